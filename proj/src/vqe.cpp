#include "swsched/vqe.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fmt/format.h>
#include <numbers>
#include <random>
#include <stdexcept>

namespace swsched {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  return splitmix64(splitmix64(splitmix64(seed) ^ a) ^ b);
}

std::vector<double> random_point(std::size_t n, std::uint64_t seed, std::size_t restart) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(restart)};
  std::mt19937_64 rng(seq);
  std::vector<double> x(n);
  for (auto& v : x) v = static_cast<double>(rng() >> 11) * 0x1.0p-53 * 2.0 * std::numbers::pi;
  return x;
}

std::uint64_t argmax_index(const std::vector<double>& probs) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < probs.size(); ++i)
    if (probs[i] > probs[best]) best = i;
  return best;
}

}  // namespace

std::string to_string(OptimizerKind kind) {
  switch (kind) {
    case OptimizerKind::Cobyla: return "cobyla";
    case OptimizerKind::Spsa: return "spsa";
    case OptimizerKind::GradientDescent: return "gd";
  }
  return "cobyla";
}

OptimizerKind optimizer_from_string(std::string_view s) {
  if (s == "cobyla" || s == "COBYLA") return OptimizerKind::Cobyla;
  if (s == "spsa" || s == "SPSA") return OptimizerKind::Spsa;
  if (s == "gd" || s == "gradient-descent" || s == "GRADIENT_DESCENT") return OptimizerKind::GradientDescent;
  throw std::invalid_argument(fmt::format("unknown optimizer '{}'", s));
}

OptimizerKind VqeConfig::resolved_optimizer() const {
  if (optimizer) return *optimizer;
  return shots ? OptimizerKind::Spsa : OptimizerKind::Cobyla;
}

void validate_config(const VqeConfig& config, const Ansatz& ansatz) {
  if (config.max_iterations < 1) throw std::invalid_argument("max_iterations must be at least 1");
  if (config.restarts < 1) throw std::invalid_argument("restarts must be at least 1");
  if (config.shots && *config.shots < 1) throw std::invalid_argument("shots must be at least 1");
  if (config.initial_point && config.initial_point->size() != ansatz.parameter_count())
    throw std::invalid_argument(fmt::format("initial point has {} values, ansatz has {} parameters",
                                            config.initial_point->size(), ansatz.parameter_count()));
  if (!(config.rho_end > 0.0) || config.rho_end > config.rho_begin || config.rho_end > config.warm_rho_begin)
    throw std::invalid_argument("trust radii must satisfy 0 < rho_end <= rho_begin");
}

CircuitEvaluator::CircuitEvaluator(Ansatz ansatz, const IsingModel& ising) : ansatz_(std::move(ansatz)) {
  if (ising.variable_count() != ansatz_.n_qubits)
    throw std::invalid_argument(fmt::format("Ising model has {} spins, ansatz has {} qubits", ising.variable_count(),
                                            ansatz_.n_qubits));
  if (ansatz_.layers < 1) throw std::invalid_argument("ansatz needs at least one layer");
  diagonal_ = diagonal_energies(ising);
  real_path_ = ansatz_.data_layer.empty();
  if (real_path_ && ansatz_.layers > 1) {
    const std::size_t dim = diagonal_.size();
    cz_sign_.resize(dim);
    for (std::size_t i = 0; i < dim; ++i) {
      if (ansatz_.entanglement == Entanglement::Linear) {
        cz_sign_[i] = static_cast<std::uint8_t>(std::popcount(i & (i >> 1)) & 1);
      } else {
        const auto c = static_cast<std::size_t>(std::popcount(i));
        cz_sign_[i] = static_cast<std::uint8_t>((c * (c - 1) / 2) & 1);
      }
    }
  }
}

void CircuitEvaluator::fill_probabilities(std::span<const double> params, std::vector<double>& out) const {
  if (params.size() != ansatz_.parameter_count())
    throw std::invalid_argument(
        fmt::format("ansatz expects {} parameters, got {}", ansatz_.parameter_count(), params.size()));
  const std::size_t n = ansatz_.n_qubits;
  const std::size_t dim = std::size_t{1} << n;
  if (!real_path_) {
    out = prepare_ansatz_state(ansatz_, params).probabilities();
    return;
  }
  auto& psi = scratch_;
  psi.resize(dim);
  psi[0] = 1.0;
  std::size_t size = 1;
  for (std::size_t q = 0; q < n; ++q) {
    const double c = std::cos(params[q] / 2.0), s = std::sin(params[q] / 2.0);
    for (std::size_t i = 0; i < size; ++i) {
      psi[i + size] = psi[i] * s;
      psi[i] *= c;
    }
    size *= 2;
  }
  for (std::size_t layer = 1; layer < ansatz_.layers; ++layer) {
    for (std::size_t i = 0; i < dim; ++i)
      if (cz_sign_[i]) psi[i] = -psi[i];
    for (std::size_t q = 0; q < n; ++q) {
      const double theta = params[layer * n + q];
      if (theta == 0.0) continue;
      const double c = std::cos(theta / 2.0), s = std::sin(theta / 2.0);
      const std::size_t stride = std::size_t{1} << q;
      for (std::size_t block = 0; block < dim; block += 2 * stride) {
        for (std::size_t i = block; i < block + stride; ++i) {
          const double a0 = psi[i], a1 = psi[i + stride];
          psi[i] = c * a0 - s * a1;
          psi[i + stride] = s * a0 + c * a1;
        }
      }
    }
  }
  // The trailing CZ layer only changes signs, so probabilities are final here.
  out.resize(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = psi[i] * psi[i];
}

std::vector<double> CircuitEvaluator::probabilities(std::span<const double> params) const {
  std::vector<double> p;
  fill_probabilities(params, p);
  return p;
}

double CircuitEvaluator::operator()(std::span<const double> params) const {
  std::vector<double> p;
  fill_probabilities(params, p);
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) acc += p[i] * diagonal_[i];
  return acc;
}

double circuit_function(const Ansatz& ansatz, const IsingModel& ising, std::span<const double> params) {
  return expectation(prepare_ansatz_state(ansatz, params), ising);
}

double parameter_shift_gradient(const CircuitEvaluator& f, std::span<const double> params, std::size_t index) {
  if (index >= params.size()) throw std::out_of_range(fmt::format("parameter index {} out of range", index));
  std::vector<double> shifted(params.begin(), params.end());
  shifted[index] = params[index] + std::numbers::pi / 2.0;
  const double plus = f(shifted);
  shifted[index] = params[index] - std::numbers::pi / 2.0;
  const double minus = f(shifted);
  return 0.5 * (plus - minus);
}

double parameter_shift_gradient(const Ansatz& ansatz, const IsingModel& ising, std::span<const double> params,
                                std::size_t index) {
  if (index >= params.size()) throw std::out_of_range(fmt::format("parameter index {} out of range", index));
  std::vector<double> shifted(params.begin(), params.end());
  shifted[index] = params[index] + std::numbers::pi / 2.0;
  const double plus = circuit_function(ansatz, ising, shifted);
  shifted[index] = params[index] - std::numbers::pi / 2.0;
  const double minus = circuit_function(ansatz, ising, shifted);
  return 0.5 * (plus - minus);
}

std::vector<double> parameter_shift_gradient(const CircuitEvaluator& f, std::span<const double> params) {
  std::vector<double> g(params.size());
  for (std::size_t i = 0; i < params.size(); ++i) g[i] = parameter_shift_gradient(f, params, i);
  return g;
}

std::vector<double> basis_state_parameters(const Ansatz& ansatz, const Bitstring& state) {
  return softened_basis_parameters(ansatz, state, 0.0);
}

std::vector<double> softened_basis_parameters(const Ansatz& ansatz, const Bitstring& state, double softening) {
  if (!ansatz.data_layer.empty()) throw std::invalid_argument("basis-state parameters need an ansatz without data layer");
  if (state.size() != ansatz.n_qubits)
    throw std::invalid_argument(
        fmt::format("bitstring has {} bits, ansatz has {} qubits", state.size(), ansatz.n_qubits));
  std::vector<double> params(ansatz.parameter_count(), 0.0);
  for (std::size_t q = 0; q < ansatz.n_qubits; ++q)
    params[q] = state[q] ? std::numbers::pi - softening : softening;
  return params;
}

VqeResult minimize(const Ansatz& ansatz, const IsingModel& ising, const VqeConfig& config) {
  validate_config(config, ansatz);
  const CircuitEvaluator evaluator(ansatz, ising);
  const auto kind = config.resolved_optimizer();
  const std::size_t n_params = ansatz.parameter_count();
  StallRule stall;
  stall.tolerance = config.tolerance;

  VqeResult result;
  for (std::size_t r = 0; r < config.restarts; ++r) {
    const bool warm = r == 0 && config.initial_point.has_value();
    std::vector<double> x0 = warm ? *config.initial_point : random_point(n_params, config.seed, r);

    std::uint64_t sample_counter = 0;
    Objective f;
    if (config.shots) {
      f = [&, r](std::span<const double> p) {
        const auto state = prepare_ansatz_state(ansatz, p);
        const auto counts = sample_bitstrings(state, *config.shots, mix_seed(config.seed, r + 1, ++sample_counter));
        return histogram_expectation(counts, evaluator.diagonal());
      };
    } else {
      f = [&](std::span<const double> p) { return evaluator(p); };
    }

    OptimizeResult opt;
    std::size_t extra_evaluations = 0;
    switch (kind) {
      case OptimizerKind::Cobyla: {
        CobylaOptions o;
        o.rho_begin = warm ? config.warm_rho_begin : config.rho_begin;
        o.rho_end = config.rho_end;
        o.max_iterations = config.max_iterations;
        o.stall = stall;
        opt = cobyla_minimize(f, std::move(x0), o);
        break;
      }
      case OptimizerKind::Spsa: {
        SpsaOptions o;
        o.max_iterations = config.max_iterations;
        o.seed = mix_seed(config.seed, r);
        o.stall = stall;
        if (warm) o.target_step = config.warm_rho_begin;
        opt = spsa_minimize(f, std::move(x0), o);
        break;
      }
      case OptimizerKind::GradientDescent: {
        GradientDescentOptions o;
        o.max_iterations = config.max_iterations;
        o.stall = stall;
        if (warm) o.initial_step = config.warm_rho_begin;
        const GradientFn grad = [&](std::span<const double> p) {
          std::vector<double> g(p.size());
          std::vector<double> shifted(p.begin(), p.end());
          for (std::size_t i = 0; i < p.size(); ++i) {
            shifted[i] = p[i] + std::numbers::pi / 2.0;
            const double plus = f(shifted);
            shifted[i] = p[i] - std::numbers::pi / 2.0;
            const double minus = f(shifted);
            shifted[i] = p[i];
            g[i] = 0.5 * (plus - minus);
            extra_evaluations += 2;
          }
          return g;
        };
        opt = gradient_descent_minimize(f, grad, std::move(x0), o);
        break;
      }
    }

    RestartOutcome outcome;
    outcome.params = opt.x;
    outcome.energy = opt.fx;
    outcome.bitstring = Bitstring::from_index(argmax_index(evaluator.probabilities(opt.x)), ansatz.n_qubits);
    outcome.evaluations = opt.evaluations + extra_evaluations;
    outcome.stop_reason = opt.stop_reason;
    result.evaluations += outcome.evaluations;

    if (r == 0 || outcome.energy < result.best_energy) {
      result.best_energy = outcome.energy;
      result.best_params = outcome.params;
      result.best_bitstring = outcome.bitstring;
      result.trace = std::move(opt.trace);
      result.best_restart = r;
    }
    result.restarts.push_back(std::move(outcome));
  }
  return result;
}

std::string trace_to_csv(std::span<const double> trace) {
  std::string out = "iteration,energy\n";
  for (std::size_t i = 0; i < trace.size(); ++i) out += fmt::format("{},{:.17g}\n", i, trace[i]);
  return out;
}

}  // namespace swsched
