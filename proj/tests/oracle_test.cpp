#include <gtest/gtest.h>

#include <algorithm>
#include <random>

#include "support.hpp"
#include "swsched/oracle.hpp"

using namespace swsched;

namespace {

ArcSelection empty_arcs(std::size_t nodes) { return ArcSelection(nodes, std::vector<std::uint8_t>(nodes, 0)); }

ProblemInstance line_instance(int patients, int workers, int capacity) {
  ProblemInstance inst;
  inst.distances = SquareMatrix(patients + 1);
  for (int i = 0; i <= patients; ++i)
    for (int j = 0; j <= patients; ++j) inst.distances(i, j) = std::abs(i - j);
  for (int i = 0; i < patients; ++i) inst.patients.push_back({i + 1, 540 + 60 * i, 600 + 60 * i, ""});
  inst.n_workers = workers;
  inst.capacity = capacity;
  return inst;
}

}  // namespace

TEST(Enumerate, OffsetOnly) {
  QuadraticModel m(3);
  m.offset = -1.5;
  const auto r = enumerate(m);
  EXPECT_EQ(r.min_energy, -1.5);
  ASSERT_EQ(r.argmin.size(), 8u);
  for (std::uint64_t i = 0; i < 8; ++i) EXPECT_EQ(r.argmin[i].index(), i);
}

TEST(Enumerate, HandExample) {
  QuadraticModel m(2);
  m.linear = {3.0, 3.0};
  m.quadratic[{0, 1}] = -8.0;
  const auto r = enumerate(m);
  EXPECT_EQ(r.min_energy, -2.0);
  ASSERT_EQ(r.argmin.size(), 1u);
  EXPECT_EQ(r.argmin[0].to_string(), "11");
}

TEST(Enumerate, TwoPatientTour) {
  const auto inst = line_instance(2, 1, 2);
  const auto c = compile_qubo(build_weight_matrix(inst), 1, std::nullopt);
  const auto r = enumerate(c.model);
  ASSERT_EQ(r.argmin.size(), 2u);
  const auto forward = c.map.expand(r.argmin[0]);
  const auto backward = c.map.expand(r.argmin[1]);
  const bool fwd = forward[0][1] && forward[1][2] && forward[2][0];
  const bool bwd = backward[0][2] && backward[2][1] && backward[1][0];
  EXPECT_TRUE(fwd || bwd);
  EXPECT_NE(r.argmin[0], r.argmin[1]);
  EXPECT_LT(r.argmin[0].index(), r.argmin[1].index());
}

TEST(Enumerate, CapRejectsLargeModels) { EXPECT_THROW(enumerate(QuadraticModel(25)), EnumerationLimitError); }

TEST(Enumerate, QuboAndIsingAgree) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 40; ++t) {
    const auto m = fixtures::random_qubo(rng, 1 + t % 12);
    const auto a = enumerate(m), b = enumerate(qubo_to_ising(m));
    EXPECT_NEAR(a.min_energy, b.min_energy, 1e-9 * std::max(1.0, std::abs(a.min_energy)));
    EXPECT_EQ(a.argmin, b.argmin);
  }
}

TEST(Enumerate, MatchesNaiveScan) {
  std::mt19937_64 rng(22);
  for (int t = 0; t < 20; ++t) {
    const std::size_t v = 3 + t % 8;
    const auto m = fixtures::random_qubo(rng, v);
    double best = 1e300;
    for (std::uint64_t i = 0; i < (std::uint64_t{1} << v); ++i) best = std::min(best, energy(m, Bitstring::from_index(i, v)));
    EXPECT_EQ(enumerate(m).min_energy, best);
  }
}

TEST(Feasibility, AllZero) {
  const auto inst = line_instance(3, 2, 3);
  const auto r = check_feasibility(empty_arcs(4), inst);
  EXPECT_FALSE(r.feasible);
  EXPECT_TRUE(r.has(Constraint::DepotOut));
  const auto out_degree = std::count_if(r.violations.begin(), r.violations.end(),
                                        [](const auto& v) { return v.constraint == Constraint::OutDegree; });
  EXPECT_EQ(out_degree, 3);
}

TEST(Feasibility, SingleTour) {
  const auto inst = line_instance(2, 1, 2);
  auto a = empty_arcs(3);
  a[0][1] = a[1][2] = a[2][0] = 1;
  const auto r = check_feasibility(a, inst);
  EXPECT_TRUE(r.feasible) << r.summary();
  EXPECT_TRUE(r.violations.empty());
}

TEST(Feasibility, DisjointCycleIsSubtour) {
  const auto inst = line_instance(3, 1, 3);
  auto a = empty_arcs(4);
  a[0][1] = a[1][0] = 1;
  a[2][3] = a[3][2] = 1;
  const auto r = check_feasibility(a, inst);
  EXPECT_FALSE(r.feasible);
  ASSERT_TRUE(r.has(Constraint::Subtour));
  const auto it = std::find_if(r.violations.begin(), r.violations.end(),
                               [](const auto& v) { return v.constraint == Constraint::Subtour; });
  EXPECT_EQ(it->detail, "{2,3}");
  EXPECT_NE(r.summary().find("SUBTOUR"), std::string::npos);
}

TEST(Feasibility, Capacity) {
  const auto inst = line_instance(3, 1, 2);
  auto a = empty_arcs(4);
  a[0][1] = a[1][2] = a[2][3] = a[3][0] = 1;
  const auto r = check_feasibility(a, inst);
  EXPECT_FALSE(r.feasible);
  EXPECT_TRUE(r.has(Constraint::Capacity));
}

TEST(Feasibility, FlowImbalance) {
  const auto inst = line_instance(2, 1, 2);
  auto a = empty_arcs(3);
  a[0][1] = a[0][2] = 1;
  a[1][0] = 1;
  const auto r = check_feasibility(a, inst);
  EXPECT_TRUE(r.has(Constraint::Flow));
}

TEST(Feasibility, ReportInvariant) {
  std::mt19937_64 rng(30);
  const auto inst = line_instance(3, 2, 3);
  const auto map = VariableMap::build(3, Encoding::FullArc);
  std::uniform_int_distribution<std::uint64_t> pick(0, (1u << 12) - 1);
  for (int t = 0; t < 500; ++t) {
    const auto r = check_feasibility(Bitstring::from_index(pick(rng), 12), map, inst);
    EXPECT_EQ(r.feasible, r.violations.empty());
  }
}

TEST(FeasibleSet, CountsMatchClosedForm) {
  // Partitions of n labelled patients into exactly k ordered-within, unordered-between routes.
  const auto map = VariableMap::build(3, Encoding::FullArc);
  EXPECT_EQ(feasible_assignments(map, line_instance(3, 1, 3)).size(), 6u);
  EXPECT_EQ(feasible_assignments(map, line_instance(3, 2, 3)).size(), 6u);
  EXPECT_EQ(feasible_assignments(map, line_instance(3, 3, 3)).size(), 1u);
  EXPECT_EQ(feasible_assignments(map, line_instance(3, 1, 2)).size(), 0u);
  const auto map4 = VariableMap::build(4, Encoding::PatientsOnly);
  EXPECT_EQ(feasible_assignments(map4, line_instance(4, 2, 4)).size(), 36u);
}

TEST(FeasibleSet, AgreesWithBruteForceCheck) {
  for (auto enc : {Encoding::FullArc, Encoding::PatientsOnly}) {
    const auto inst = line_instance(3, 2, 2);
    const auto map = VariableMap::build(3, enc);
    std::vector<Bitstring> brute;
    for (std::uint64_t i = 0; i < (std::uint64_t{1} << map.size()); ++i) {
      const auto x = Bitstring::from_index(i, map.size());
      if (check_feasibility(x, map, inst).feasible) brute.push_back(x);
    }
    EXPECT_EQ(feasible_assignments(map, inst), brute);
  }
}

TEST(FeasibleMinimum, SinglePatient) {
  const auto inst = line_instance(1, 1, 1);
  const auto c = compile_qubo(build_weight_matrix(inst), 1, std::nullopt);
  const auto best = feasible_minimum(c.model, c.map, inst);
  ASSERT_TRUE(best);
  EXPECT_EQ(best->energy, 2.0);
}

TEST(FeasibleMinimum, MatchesEnumerateOnDemo) {
  const auto inst = canonicalize(fixtures::demo3());
  const auto c = compile_qubo(build_weight_matrix(inst), inst.n_workers, std::nullopt);
  const auto best = feasible_minimum(c.model, c.map, inst);
  const auto all = enumerate(c.model);
  ASSERT_TRUE(best);
  EXPECT_NEAR(best->energy, all.min_energy, 1e-9 * best->energy);
  EXPECT_EQ(best->assignment, all.argmin.front());
}

TEST(FeasibleMinimum, TooManyWorkers) {
  const auto inst = line_instance(2, 3, 2);
  const auto c = compile_qubo(build_weight_matrix(inst), 3, std::nullopt);
  EXPECT_FALSE(feasible_minimum(c.model, c.map, inst));
}

TEST(FeasibleMinimum, NeverBelowUnconstrained) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 25; ++t) {
    const auto inst = fixtures::random_instance(rng, 2 + t % 3, 1 + t % 2);
    const auto c = compile_qubo(build_weight_matrix(inst), inst.n_workers, std::nullopt);
    const auto best = feasible_minimum(c.model, c.map, inst);
    ASSERT_TRUE(best);
    EXPECT_GE(best->energy, enumerate(c.model).min_energy - 1e-9);
  }
}
