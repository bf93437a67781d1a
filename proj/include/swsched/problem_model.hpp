#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace swsched {

/// Minutes from midnight.
using Minutes = int;

std::string format_hhmm(Minutes minutes);
Minutes parse_hhmm(std::string_view text);

/// Dense row-major square matrix over the node set {0 = depot, 1..n}.
class SquareMatrix {
 public:
  SquareMatrix() = default;
  explicit SquareMatrix(std::size_t n, double fill = 0.0) : n_(n), data_(n * n, fill) {}

  std::size_t size() const { return n_; }
  double& operator()(std::size_t i, std::size_t j) { return data_[i * n_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * n_ + j]; }

  friend bool operator==(const SquareMatrix&, const SquareMatrix&) = default;

 private:
  std::size_t n_ = 0;
  std::vector<double> data_;
};

struct PatientVisit {
  int patient_id = 0;
  Minutes slot_start = 0;
  Minutes slot_end = 0;
  std::string day;

  friend bool operator==(const PatientVisit&, const PatientVisit&) = default;
};

/// One day of visits. Patient k (0-based position in `patients`) is node k+1
/// of `distances`; node 0 is the depot.
struct ProblemInstance {
  std::vector<PatientVisit> patients;
  int n_workers = 1;
  int capacity = 1;
  SquareMatrix distances;
  double epsilon = 0.0;
  std::string day;

  std::size_t patient_count() const { return patients.size(); }
  std::size_t node_count() const { return patients.size() + 1; }
  const PatientVisit& patient_at_node(std::size_t node) const { return patients.at(node - 1); }
  /// Node index of a patient id, or 0 if the id is not present.
  std::size_t node_of(int patient_id) const;

  friend bool operator==(const ProblemInstance&, const ProblemInstance&) = default;
};

struct Violation {
  std::string field;
  std::string rule;

  friend bool operator==(const Violation&, const Violation&) = default;
};

/// Lists every broken instance invariant. Empty means the instance is usable.
std::vector<Violation> validate_instance(const ProblemInstance& instance);

class InstanceError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Throws InstanceError naming the first violation.
void require_valid(const ProblemInstance& instance);

/// Patients sorted by id with the distance matrix re-indexed to match.
/// The day label is dropped from the instance and its visits.
ProblemInstance canonicalize(const ProblemInstance& instance);

/// Time-window weighted travel cost. Patient pairs get
/// w_ij = d_ij + epsilon * (tau_i - tau_j)^2 / (d_max - d_min); depot arcs
/// carry the bare distance.
struct WeightMatrix {
  SquareMatrix w;
  double d_max = 0.0;
  double d_min = 0.0;
  /// (tau_i - tau_j)^2 over patient pairs, zero on depot rows and columns.
  SquareMatrix t_window;

  double max_weight() const;
};

/// Throws InstanceError on a negative epsilon or a malformed distance matrix.
WeightMatrix build_weight_matrix(const ProblemInstance& instance);

}  // namespace swsched
