#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "swsched/bitstring.hpp"
#include "swsched/problem_model.hpp"

namespace swsched {

/// Which arcs become decision variables.
///   FullArc      - every arc (i, j), i != j, over {0..n}: (n+1)n variables.
///   PatientsOnly - patient-to-patient arcs only: n(n-1) variables. Depot
///                  arcs are implied by chain starts and ends.
enum class Encoding { FullArc, PatientsOnly };

std::string to_string(Encoding e);
Encoding encoding_from_string(std::string_view s);

struct Arc {
  std::size_t from = 0;
  std::size_t to = 0;
  friend bool operator==(const Arc&, const Arc&) = default;
};

/// Selected arcs as an adjacency matrix over {0..n}.
using ArcSelection = std::vector<std::vector<std::uint8_t>>;

class VariableMap {
 public:
  static VariableMap build(std::size_t patient_count, Encoding encoding);

  Encoding encoding() const { return encoding_; }
  std::size_t node_count() const { return nodes_; }
  std::size_t size() const { return arcs_.size(); }
  const std::vector<Arc>& arcs() const { return arcs_; }
  std::optional<std::size_t> index_of(std::size_t from, std::size_t to) const;

  /// Full adjacency for an assignment. PatientsOnly infers x_0j = 1 for
  /// patients with no incoming patient arc and x_i0 = 1 for those with no
  /// outgoing one.
  ArcSelection expand(const Bitstring& assignment) const;
  Bitstring encode(const ArcSelection& arcs) const;

 private:
  Encoding encoding_ = Encoding::FullArc;
  std::size_t nodes_ = 0;
  std::vector<Arc> arcs_;
  std::vector<std::ptrdiff_t> index_;  // nodes_ x nodes_, -1 when absent
};

using PairKey = std::pair<std::size_t, std::size_t>;

/// E(x) = sum_p linear[p] x_p + sum_{p<q} quadratic[p,q] x_p x_q + offset.
struct QuadraticModel {
  std::vector<double> linear;
  std::map<PairKey, double> quadratic;
  double offset = 0.0;
  double penalty_A = 0.0;

  QuadraticModel() = default;
  explicit QuadraticModel(std::size_t variables) : linear(variables, 0.0) {}

  std::size_t variable_count() const { return linear.size(); }
  void add_linear(std::size_t p, double c) { linear.at(p) += c; }
  /// Folds p == q into the linear term (x^2 = x).
  void add_quadratic(std::size_t p, std::size_t q, double c);
  /// Adds scale * (target - sum_{p in vars} x_p)^2.
  void add_squared_penalty(std::span<const std::size_t> vars, double target, double scale);
  /// Adds scale * sum_{p<q in vars} x_p x_q, which is zero iff at most one is set.
  void add_at_most_one_penalty(std::span<const std::size_t> vars, double scale);
};

/// E(z) = sum_p h[p] z_p + sum_{p<q} J[p,q] z_p z_q + offset, z in {+1, -1}.
struct IsingModel {
  std::vector<double> h;
  std::map<PairKey, double> J;
  double offset = 0.0;

  IsingModel() = default;
  explicit IsingModel(std::size_t spins) : h(spins, 0.0) {}
  std::size_t variable_count() const { return h.size(); }
};

class PenaltyError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct CompiledModel {
  QuadraticModel model;
  VariableMap map;
};

/// Multiplier of max(w) used when no penalty is given.
inline constexpr double kAutoPenaltyFactor = 10.0;

/// Builds the penalized routing Hamiltonian: weighted arc cost plus
/// A-weighted squared violations of patient in/out degree 1 and depot in/out
/// degree k. `penalty` of nullopt selects 10 * max(w). An explicit penalty
/// must exceed max(w); otherwise PenaltyError is thrown.
CompiledModel compile_qubo(const WeightMatrix& weights, int n_workers, std::optional<double> penalty,
                           Encoding encoding = Encoding::FullArc);

/// Substitutes x = (1 - z) / 2.
IsingModel qubo_to_ising(const QuadraticModel& model);

double energy(const QuadraticModel& model, const Bitstring& x);
double energy(const IsingModel& model, std::span<const int> spins);
double energy(const IsingModel& model, const Bitstring& x);

/// Plain-text listing: "variables N", "penalty_A a", "offset c",
/// "linear p c" and "quadratic p q c" lines.
std::string dump_model(const QuadraticModel& model);
QuadraticModel parse_model(std::string_view text);

}  // namespace swsched
