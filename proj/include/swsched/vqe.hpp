#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "swsched/bitstring.hpp"
#include "swsched/optimizers.hpp"
#include "swsched/qubo.hpp"
#include "swsched/statevector.hpp"

namespace swsched {

enum class OptimizerKind { Cobyla, Spsa, GradientDescent };

std::string to_string(OptimizerKind kind);
OptimizerKind optimizer_from_string(std::string_view s);

struct VqeConfig {
  /// Unset picks COBYLA for exact expectation and SPSA when sampling.
  std::optional<OptimizerKind> optimizer;
  std::size_t max_iterations = 500;
  /// Starting parameters of restart 0.
  std::optional<std::vector<double>> initial_point;
  std::size_t restarts = 10;
  std::uint64_t seed = 0;
  /// Unset means exact expectation.
  std::optional<std::size_t> shots;
  double tolerance = 1e-8;
  /// COBYLA initial trust radius for random starts and for a warm start.
  double rho_begin = 0.5;
  double warm_rho_begin = 0.1;
  double rho_end = 1e-7;

  OptimizerKind resolved_optimizer() const;
};

/// Throws std::invalid_argument when the config cannot drive `ansatz`.
void validate_config(const VqeConfig& config, const Ansatz& ansatz);

struct RestartOutcome {
  std::vector<double> params;
  double energy = 0.0;
  Bitstring bitstring;
  std::size_t evaluations = 0;
  std::string stop_reason;
};

struct VqeResult {
  std::vector<double> best_params;
  double best_energy = 0.0;
  /// Most probable basis state of the final ansatz state.
  Bitstring best_bitstring;
  /// Per-iteration energies of the winning restart.
  std::vector<double> trace;
  /// Objective evaluations over all restarts.
  std::size_t evaluations = 0;
  std::size_t best_restart = 0;
  std::vector<RestartOutcome> restarts;
};

/// Evaluates <psi(theta)|H|psi(theta)> for one ansatz and Hamiltonian. The
/// plain RY+CZ family without a data layer runs on real amplitudes; other
/// circuits go through the complex simulator.
class CircuitEvaluator {
 public:
  CircuitEvaluator(Ansatz ansatz, const IsingModel& ising);

  const Ansatz& ansatz() const { return ansatz_; }
  std::span<const double> diagonal() const { return diagonal_; }

  double operator()(std::span<const double> params) const;
  std::vector<double> probabilities(std::span<const double> params) const;

 private:
  void fill_probabilities(std::span<const double> params, std::vector<double>& out) const;

  Ansatz ansatz_;
  std::vector<double> diagonal_;
  /// 1 where the entangler layer flips the amplitude sign.
  std::vector<std::uint8_t> cz_sign_;
  bool real_path_ = false;
  mutable std::vector<double> scratch_;
};

/// f(theta) = expectation(prepare_ansatz_state(ansatz, theta), ising).
double circuit_function(const Ansatz& ansatz, const IsingModel& ising, std::span<const double> params);

/// 0.5 * [f(theta_i + pi/2) - f(theta_i - pi/2)].
double parameter_shift_gradient(const CircuitEvaluator& f, std::span<const double> params, std::size_t index);
double parameter_shift_gradient(const Ansatz& ansatz, const IsingModel& ising, std::span<const double> params,
                                std::size_t index);
std::vector<double> parameter_shift_gradient(const CircuitEvaluator& f, std::span<const double> params);

/// Parameters that prepare `state` exactly: pi on the first-layer rotation of
/// every set bit, zero elsewhere. Requires an ansatz without a data layer.
std::vector<double> basis_state_parameters(const Ansatz& ansatz, const Bitstring& state);

/// Like basis_state_parameters but with every first-layer angle pulled
/// `softening` radians toward pi/2, so the state keeps weight on neighbours.
std::vector<double> softened_basis_parameters(const Ansatz& ansatz, const Bitstring& state, double softening);

VqeResult minimize(const Ansatz& ansatz, const IsingModel& ising, const VqeConfig& config);

/// "iteration,energy" lines.
std::string trace_to_csv(std::span<const double> trace);

}  // namespace swsched
