#pragma once

#include <cmath>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "swsched/instance_io.hpp"
#include "swsched/problem_model.hpp"
#include "swsched/qubo.hpp"

namespace swsched::fixtures {

inline std::filesystem::path data_path(const std::string& name) { return std::filesystem::path(SWSCHED_DATA_DIR) / name; }

inline ProblemInstance demo3() { return load_instance(data_path("demo_3p2w.json")); }
inline ProblemInstance demo4() { return load_instance(data_path("demo_4p3w.json")); }

/// Random planar instance, slots on a quarter-hour grid inside 09:00-17:00.
inline ProblemInstance random_instance(std::mt19937_64& rng, int patients, int workers, double epsilon = 0.7) {
  std::uniform_real_distribution<double> coord(0.0, 40.0);
  std::uniform_int_distribution<int> quarter(0, 28);
  std::vector<std::pair<double, double>> pts{{20.0, 20.0}};
  ProblemInstance inst;
  for (int i = 0; i < patients; ++i) {
    pts.emplace_back(coord(rng), coord(rng));
    const int start = 540 + 15 * quarter(rng);
    inst.patients.push_back({i + 1, start, start + 60, ""});
  }
  inst.distances = euclidean_distances(pts);
  for (std::size_t i = 0; i < inst.distances.size(); ++i)
    for (std::size_t j = 0; j < inst.distances.size(); ++j)
      inst.distances(i, j) = std::round(inst.distances(i, j) * 10.0) / 10.0;
  inst.n_workers = workers;
  inst.capacity = patients;
  inst.epsilon = epsilon;
  return inst;
}

inline QuadraticModel random_qubo(std::mt19937_64& rng, std::size_t vars, double density = 0.6) {
  std::uniform_real_distribution<double> coef(-10.0, 10.0);
  std::bernoulli_distribution keep(density);
  QuadraticModel m(vars);
  for (std::size_t p = 0; p < vars; ++p) m.linear[p] = coef(rng);
  for (std::size_t p = 0; p < vars; ++p)
    for (std::size_t q = p + 1; q < vars; ++q)
      if (keep(rng)) m.quadratic[{p, q}] = coef(rng);
  m.offset = coef(rng);
  return m;
}

inline IsingModel random_ising(std::mt19937_64& rng, std::size_t spins, double density = 0.6) {
  std::uniform_real_distribution<double> coef(-5.0, 5.0);
  std::bernoulli_distribution keep(density);
  IsingModel m(spins);
  for (auto& h : m.h) h = coef(rng);
  for (std::size_t p = 0; p < spins; ++p)
    for (std::size_t q = p + 1; q < spins; ++q)
      if (keep(rng)) m.J[{p, q}] = coef(rng);
  m.offset = coef(rng);
  return m;
}

inline std::vector<double> random_angles(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> angle(0.0, 2.0 * M_PI);
  std::vector<double> out(n);
  for (auto& a : out) a = angle(rng);
  return out;
}

}  // namespace swsched::fixtures
