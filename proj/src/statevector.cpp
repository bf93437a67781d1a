#include "swsched/statevector.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fmt/format.h>
#include <numbers>
#include <numeric>
#include <random>
#include <stdexcept>

namespace swsched {

namespace {

void check_qubit_count(std::size_t n) {
  if (n == 0 || n > kMaxQubits)
    throw std::invalid_argument(fmt::format("qubit count {} outside 1..{}", n, kMaxQubits));
}

}  // namespace

StateVector::StateVector(std::size_t n_qubits) : n_qubits_(n_qubits) {
  check_qubit_count(n_qubits);
  amplitudes_.assign(std::size_t{1} << n_qubits, Amplitude{0.0, 0.0});
  amplitudes_[0] = 1.0;
}

StateVector StateVector::basis(std::size_t n_qubits, std::uint64_t index) {
  StateVector s(n_qubits);
  if (index >= s.dimension()) throw std::out_of_range("basis index out of range");
  s.amplitudes_[0] = 0.0;
  s.amplitudes_[index] = 1.0;
  return s;
}

StateVector StateVector::from_amplitudes(std::vector<Amplitude> amplitudes) {
  const auto dim = amplitudes.size();
  if (dim < 2 || (dim & (dim - 1)) != 0) throw std::invalid_argument("amplitude count must be a power of two");
  StateVector s(static_cast<std::size_t>(std::countr_zero(dim)));
  s.amplitudes_ = std::move(amplitudes);
  return s;
}

double StateVector::norm_squared() const {
  double acc = 0.0;
  for (const auto& a : amplitudes_) acc += std::norm(a);
  return acc;
}

std::vector<double> StateVector::probabilities() const {
  std::vector<double> p(amplitudes_.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(amplitudes_[i]);
  return p;
}

void StateVector::check_qubit(std::size_t q) const {
  if (q >= n_qubits_) throw std::out_of_range(fmt::format("qubit {} out of range for {} qubits", q, n_qubits_));
}

void StateVector::apply_single(std::size_t qubit, const Matrix2& m) {
  check_qubit(qubit);
  const std::size_t stride = std::size_t{1} << qubit;
  const std::size_t dim = amplitudes_.size();
  for (std::size_t block = 0; block < dim; block += 2 * stride) {
    for (std::size_t i = block; i < block + stride; ++i) {
      const Amplitude a0 = amplitudes_[i];
      const Amplitude a1 = amplitudes_[i + stride];
      amplitudes_[i] = m[0] * a0 + m[1] * a1;
      amplitudes_[i + stride] = m[2] * a0 + m[3] * a1;
    }
  }
}

void StateVector::apply_cz(std::size_t a, std::size_t b) {
  check_qubit(a);
  check_qubit(b);
  if (a == b) throw std::invalid_argument("CZ needs two distinct qubits");
  const std::size_t mask = (std::size_t{1} << a) | (std::size_t{1} << b);
  for (std::size_t i = 0; i < amplitudes_.size(); ++i)
    if ((i & mask) == mask) amplitudes_[i] = -amplitudes_[i];
}

void StateVector::apply_cnot(std::size_t control, std::size_t target) {
  check_qubit(control);
  check_qubit(target);
  if (control == target) throw std::invalid_argument("CNOT needs two distinct qubits");
  const std::size_t cbit = std::size_t{1} << control;
  const std::size_t tbit = std::size_t{1} << target;
  for (std::size_t i = 0; i < amplitudes_.size(); ++i)
    if ((i & cbit) && !(i & tbit)) std::swap(amplitudes_[i], amplitudes_[i | tbit]);
}

Matrix2 u3_matrix(double theta, double phi, double lambda) {
  const double c = std::cos(theta / 2.0);
  const double s = std::sin(theta / 2.0);
  return {Amplitude{c, 0.0}, -std::polar(s, lambda), std::polar(s, phi), std::polar(c, lambda + phi)};
}

Matrix2 gate_matrix(const Gate& gate) {
  auto need = [&](std::size_t n) {
    if (gate.params.size() != n || gate.targets.size() != 1)
      throw std::invalid_argument("single-qubit gate has wrong arity");
  };
  switch (gate.kind) {
    case GateKind::H: {
      need(0);
      const double r = 1.0 / std::numbers::sqrt2;
      return {Amplitude{r}, Amplitude{r}, Amplitude{r}, Amplitude{-r}};
    }
    case GateKind::U3:
      need(3);
      return u3_matrix(gate.params[0], gate.params[1], gate.params[2]);
    case GateKind::U1:
      need(1);
      return {Amplitude{1.0}, Amplitude{0.0}, Amplitude{0.0}, std::polar(1.0, gate.params[0])};
    case GateKind::RY: {
      need(1);
      const double c = std::cos(gate.params[0] / 2.0), s = std::sin(gate.params[0] / 2.0);
      return {Amplitude{c}, Amplitude{-s}, Amplitude{s}, Amplitude{c}};
    }
    case GateKind::RZ:
      need(1);
      return {std::polar(1.0, -gate.params[0] / 2.0), Amplitude{0.0}, Amplitude{0.0},
              std::polar(1.0, gate.params[0] / 2.0)};
    case GateKind::CNOT:
    case GateKind::CZ:
      break;
  }
  throw std::invalid_argument("two-qubit gate has no 2x2 matrix");
}

void apply_gate_inplace(StateVector& state, const Gate& gate) {
  switch (gate.kind) {
    case GateKind::CNOT:
    case GateKind::CZ:
      if (gate.targets.size() != 2) throw std::invalid_argument("two-qubit gate needs two targets");
      if (gate.kind == GateKind::CZ)
        state.apply_cz(gate.targets[0], gate.targets[1]);
      else
        state.apply_cnot(gate.targets[0], gate.targets[1]);
      return;
    default:
      if (gate.targets.size() != 1) throw std::invalid_argument("single-qubit gate needs one target");
      state.apply_single(gate.targets[0], gate_matrix(gate));
  }
}

StateVector apply_gate(StateVector state, const Gate& gate) {
  apply_gate_inplace(state, gate);
  return state;
}

std::string to_string(Entanglement e) { return e == Entanglement::Linear ? "linear" : "full"; }

Entanglement entanglement_from_string(std::string_view s) {
  if (s == "linear") return Entanglement::Linear;
  if (s == "full") return Entanglement::Full;
  throw std::invalid_argument(fmt::format("unknown entanglement '{}'", s));
}

std::vector<std::pair<std::size_t, std::size_t>> Ansatz::entangler_pairs() const {
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (entanglement == Entanglement::Linear) {
    for (std::size_t q = 0; q + 1 < n_qubits; ++q) pairs.emplace_back(q, q + 1);
  } else {
    for (std::size_t a = 0; a < n_qubits; ++a)
      for (std::size_t b = a + 1; b < n_qubits; ++b) pairs.emplace_back(a, b);
  }
  return pairs;
}

std::vector<Gate> Ansatz::gates(std::span<const double> params) const {
  if (params.size() != parameter_count())
    throw std::invalid_argument(
        fmt::format("ansatz expects {} parameters, got {}", parameter_count(), params.size()));
  std::vector<Gate> out = data_layer;
  const auto pairs = entangler_pairs();
  for (std::size_t layer = 0; layer < layers; ++layer) {
    for (std::size_t q = 0; q < n_qubits; ++q) out.push_back(Gate::ry(q, params[layer * n_qubits + q]));
    for (const auto& [a, b] : pairs) out.push_back(Gate::cz(a, b));
  }
  return out;
}

std::size_t default_layers(std::size_t n_qubits) {
  if (n_qubits <= 6) return 2;
  if (n_qubits <= 12) return 3;
  return 4;
}

std::vector<Gate> iqp_data_layer(std::size_t n_qubits, std::span<const double> single_phases,
                                 std::span<const std::pair<std::size_t, std::size_t>> pairs,
                                 std::span<const double> pair_phases) {
  if (single_phases.size() != n_qubits || pairs.size() != pair_phases.size())
    throw std::invalid_argument("IQP layer phase counts do not match");
  std::vector<Gate> out;
  for (std::size_t q = 0; q < n_qubits; ++q) out.push_back(Gate::h(q));
  for (std::size_t q = 0; q < n_qubits; ++q) out.push_back(Gate::u1(q, single_phases[q]));
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    out.push_back(Gate::cnot(pairs[k].first, pairs[k].second));
    out.push_back(Gate::rz(pairs[k].second, pair_phases[k]));
    out.push_back(Gate::cnot(pairs[k].first, pairs[k].second));
  }
  return out;
}

StateVector prepare_ansatz_state(const Ansatz& ansatz, std::span<const double> params) {
  StateVector state(ansatz.n_qubits);
  for (const auto& g : ansatz.gates(params)) apply_gate_inplace(state, g);
  return state;
}

std::vector<double> diagonal_energies(const IsingModel& ising) {
  const auto n = ising.variable_count();
  check_qubit_count(n);
  const std::size_t dim = std::size_t{1} << n;
  std::vector<double> diag(dim, ising.offset);
  // z_p = +1 when bit p is clear.
  for (std::size_t p = 0; p < n; ++p) {
    const double hp = ising.h[p];
    if (hp == 0.0) continue;
    const std::size_t bit = std::size_t{1} << p;
    for (std::size_t i = 0; i < dim; ++i) diag[i] += (i & bit) ? -hp : hp;
  }
  for (const auto& [key, c] : ising.J) {
    const std::size_t mask = (std::size_t{1} << key.first) | (std::size_t{1} << key.second);
    for (std::size_t i = 0; i < dim; ++i) {
      const bool odd = std::popcount(i & mask) == 1;
      diag[i] += odd ? -c : c;
    }
  }
  return diag;
}

double expectation(const StateVector& state, std::span<const double> diagonal) {
  if (diagonal.size() != state.dimension())
    throw std::invalid_argument("Hamiltonian dimension does not match the state");
  double acc = 0.0;
  const auto amps = state.amplitudes();
  for (std::size_t i = 0; i < amps.size(); ++i) acc += std::norm(amps[i]) * diagonal[i];
  return acc;
}

double expectation(const StateVector& state, const IsingModel& ising) {
  if (ising.variable_count() != state.n_qubits())
    throw std::invalid_argument(fmt::format("Ising model has {} spins, state has {} qubits",
                                            ising.variable_count(), state.n_qubits()));
  const auto diag = diagonal_energies(ising);
  return expectation(state, diag);
}

Histogram sample_bitstrings(const StateVector& state, std::size_t shots, std::uint64_t seed) {
  if (shots == 0) throw std::invalid_argument("shots must be at least 1");
  const auto probs = state.probabilities();
  std::vector<double> cumulative(probs.size());
  std::partial_sum(probs.begin(), probs.end(), cumulative.begin());
  const double total = cumulative.back();
  std::mt19937_64 rng(seed);
  Histogram counts;
  for (std::size_t s = 0; s < shots; ++s) {
    // 53-bit uniform in [0, total)
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53 * total;
    auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
    auto idx = static_cast<std::size_t>(std::min<std::ptrdiff_t>(it - cumulative.begin(),
                                                                  static_cast<std::ptrdiff_t>(probs.size() - 1)));
    ++counts[idx];
  }
  return counts;
}

double histogram_expectation(const Histogram& counts, std::span<const double> diagonal) {
  double acc = 0.0;
  std::size_t total = 0;
  for (const auto& [idx, n] : counts) {
    acc += diagonal[idx] * static_cast<double>(n);
    total += n;
  }
  return total ? acc / static_cast<double>(total) : 0.0;
}

std::vector<BasisProbability> top_probabilities(const StateVector& state, std::size_t k) {
  const auto probs = state.probabilities();
  std::vector<BasisProbability> all(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) all[i] = {i, probs[i]};
  k = std::min(k, all.size());
  std::partial_sort(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(k), all.end(),
                    [](const auto& a, const auto& b) {
                      return a.probability != b.probability ? a.probability > b.probability : a.index < b.index;
                    });
  all.resize(k);
  return all;
}

std::string dump_top_probabilities(const StateVector& state, std::size_t k) {
  std::string out;
  for (const auto& bp : top_probabilities(state, k))
    out += fmt::format("{} {:.6f}\n", Bitstring::from_index(bp.index, state.n_qubits()).to_string(), bp.probability);
  return out;
}

}  // namespace swsched
