#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace swsched {

using Objective = std::function<double(std::span<const double>)>;
using GradientFn = std::function<std::vector<double>(std::span<const double>)>;

struct Bounds {
  std::vector<double> lower;
  std::vector<double> upper;
};

/// Stops once the best value has improved by less than `tolerance` over the
/// last `window` iterations.
struct StallRule {
  std::size_t window = 25;
  double tolerance = 1e-8;
};

struct OptimizeResult {
  std::vector<double> x;
  double fx = 0.0;
  /// Objective value of each iterate, in order.
  std::vector<double> trace;
  std::size_t evaluations = 0;
  std::size_t iterations = 0;
  std::string stop_reason;
};

/// Thrown when the objective returns a non-finite value.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, std::vector<double> partial_trace)
      : std::runtime_error(what), partial_trace_(std::move(partial_trace)) {}
  const std::vector<double>& partial_trace() const { return partial_trace_; }

 private:
  std::vector<double> partial_trace_;
};

/// Derivative-free linear-model trust-region method in the style of Powell's
/// COBYLA, specialised to box constraints. Keeps a simplex of n+1 points,
/// interpolates a linear model, steps `rho` downhill, repairs simplex
/// geometry when it degenerates and shrinks `rho` on poor steps.
/// `max_iterations` caps objective evaluations; the stall window counts
/// trust-region steps.
struct CobylaOptions {
  double rho_begin = 0.5;
  double rho_end = 1e-7;
  std::size_t max_iterations = 500;
  std::optional<Bounds> bounds;
  StallRule stall;
};

OptimizeResult cobyla_minimize(const Objective& f, std::vector<double> x0, const CobylaOptions& options);

/// a_k = a / (k + 1 + A0)^alpha, c_k = c / (k + 1)^gamma.
struct SpsaGains {
  double a = 0.2;
  double c = 0.1;
  double A0 = 10.0;
  double alpha = 0.602;
  double gamma = 0.101;

  double step(std::size_t k) const;
  double perturbation(std::size_t k) const;
};

struct SpsaOptions {
  SpsaGains gains;
  /// Re-derive `gains.a` so the first update moves about `target_step`.
  bool calibrate = true;
  double target_step = 0.2;
  std::size_t calibration_samples = 10;
  std::size_t max_iterations = 500;
  std::uint64_t seed = 0;
  /// Evaluate each new iterate for the trace and best tracking.
  bool track_iterates = true;
  std::optional<Bounds> bounds;
  StallRule stall;
};

/// One simultaneous-perturbation update: two objective evaluations at
/// x +/- c_k * delta with delta uniform in {-1, +1}^n, then x - a_k * g.
std::vector<double> spsa_step(const Objective& f, std::span<const double> x, std::size_t k, const SpsaGains& gains,
                              std::mt19937_64& rng);

OptimizeResult spsa_minimize(const Objective& f, std::vector<double> x0, const SpsaOptions& options);

/// Steepest descent with Armijo backtracking.
struct GradientDescentOptions {
  /// Largest coordinate move of the first trial step.
  double initial_step = 0.2;
  std::size_t max_iterations = 500;
  StallRule stall;
};

OptimizeResult gradient_descent_minimize(const Objective& f, const GradientFn& gradient, std::vector<double> x0,
                                         const GradientDescentOptions& options);

}  // namespace swsched
