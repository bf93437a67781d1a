#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "swsched/qubo.hpp"

namespace swsched {

using Amplitude = std::complex<double>;
using Matrix2 = std::array<Amplitude, 4>;  // row-major {m00, m01, m10, m11}

/// Dense amplitude storage is capped here.
inline constexpr std::size_t kMaxQubits = 24;

/// 2^N amplitudes. Qubit q is bit q of the basis index.
class StateVector {
 public:
  /// |0...0>.
  explicit StateVector(std::size_t n_qubits);
  static StateVector basis(std::size_t n_qubits, std::uint64_t index);
  static StateVector from_amplitudes(std::vector<Amplitude> amplitudes);

  std::size_t n_qubits() const { return n_qubits_; }
  std::size_t dimension() const { return amplitudes_.size(); }
  std::span<const Amplitude> amplitudes() const { return amplitudes_; }
  Amplitude operator[](std::size_t index) const { return amplitudes_[index]; }

  double norm_squared() const;
  std::vector<double> probabilities() const;

  void apply_single(std::size_t qubit, const Matrix2& m);
  void apply_cz(std::size_t a, std::size_t b);
  void apply_cnot(std::size_t control, std::size_t target);

 private:
  void check_qubit(std::size_t q) const;

  std::size_t n_qubits_ = 0;
  std::vector<Amplitude> amplitudes_;
};

enum class GateKind { H, U3, U1, RY, RZ, CNOT, CZ };

struct Gate {
  GateKind kind = GateKind::H;
  std::vector<std::size_t> targets;
  std::vector<double> params;

  static Gate h(std::size_t q) { return {GateKind::H, {q}, {}}; }
  static Gate u3(std::size_t q, double theta, double phi, double lambda) {
    return {GateKind::U3, {q}, {theta, phi, lambda}};
  }
  static Gate u1(std::size_t q, double lambda) { return {GateKind::U1, {q}, {lambda}}; }
  static Gate ry(std::size_t q, double theta) { return {GateKind::RY, {q}, {theta}}; }
  static Gate rz(std::size_t q, double theta) { return {GateKind::RZ, {q}, {theta}}; }
  static Gate cnot(std::size_t control, std::size_t target) { return {GateKind::CNOT, {control, target}, {}}; }
  static Gate cz(std::size_t a, std::size_t b) { return {GateKind::CZ, {a, b}, {}}; }
};

/// U3(theta, phi, lambda) = [[cos(t/2), -e^{i l} sin(t/2)], [e^{i p} sin(t/2), e^{i(l+p)} cos(t/2)]].
Matrix2 u3_matrix(double theta, double phi, double lambda);
/// Unitary of a single-qubit gate; throws for two-qubit kinds.
Matrix2 gate_matrix(const Gate& gate);

void apply_gate_inplace(StateVector& state, const Gate& gate);
StateVector apply_gate(StateVector state, const Gate& gate);

enum class Entanglement { Linear, Full };

std::string to_string(Entanglement e);
Entanglement entanglement_from_string(std::string_view s);

/// Layered hardware-efficient circuit. Each layer applies RY(theta) to every
/// qubit, then CZ on the entangler pairs (linear chain or all pairs). An
/// optional fixed data layer runs first on |0...0>.
struct Ansatz {
  std::size_t n_qubits = 1;
  std::size_t layers = 1;
  Entanglement entanglement = Entanglement::Linear;
  std::vector<Gate> data_layer;

  std::size_t parameter_count() const { return layers * n_qubits; }
  std::vector<std::pair<std::size_t, std::size_t>> entangler_pairs() const;
  /// Parameter index layer * n_qubits + q drives RY on qubit q of that layer.
  std::vector<Gate> gates(std::span<const double> params) const;
};

/// Layer count by qubit count, following the reference experiments
/// (6 qubits -> 2, 12 -> 3, 20 -> 4).
std::size_t default_layers(std::size_t n_qubits);

/// Instantaneous-quantum-polynomial data layer: H on every qubit, U1 phases,
/// then a ZZ phase CNOT-RZ-CNOT on each listed pair.
std::vector<Gate> iqp_data_layer(std::size_t n_qubits, std::span<const double> single_phases,
                                 std::span<const std::pair<std::size_t, std::size_t>> pairs,
                                 std::span<const double> pair_phases);

StateVector prepare_ansatz_state(const Ansatz& ansatz, std::span<const double> params);

/// Ising energy of every basis state, indexed by basis index.
std::vector<double> diagonal_energies(const IsingModel& ising);

double expectation(const StateVector& state, const IsingModel& ising);
double expectation(const StateVector& state, std::span<const double> diagonal);

/// Outcome counts keyed by basis index.
using Histogram = std::map<std::uint64_t, std::size_t>;

Histogram sample_bitstrings(const StateVector& state, std::size_t shots, std::uint64_t seed);

/// Mean diagonal energy over a histogram.
double histogram_expectation(const Histogram& counts, std::span<const double> diagonal);

struct BasisProbability {
  std::uint64_t index = 0;
  double probability = 0.0;
};

/// Most probable basis states, ties broken by lower index.
std::vector<BasisProbability> top_probabilities(const StateVector& state, std::size_t k);
std::string dump_top_probabilities(const StateVector& state, std::size_t k);

}  // namespace swsched
