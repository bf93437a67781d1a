#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "swsched/bitstring.hpp"
#include "swsched/problem_model.hpp"
#include "swsched/qubo.hpp"

namespace swsched {

inline constexpr std::size_t kDefaultEnumerationCap = 24;

class EnumerationLimitError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct EnumerationResult {
  double min_energy = 0.0;
  /// Every minimizer, ascending by basis index.
  std::vector<Bitstring> argmin;
};

/// Exhaustive search over all 2^V assignments.
EnumerationResult enumerate(const QuadraticModel& model, std::size_t max_vars = kDefaultEnumerationCap);
EnumerationResult enumerate(const IsingModel& model, std::size_t max_vars = kDefaultEnumerationCap);

enum class Constraint { OutDegree, InDegree, DepotOut, DepotIn, Flow, Capacity, Subtour };

std::string to_string(Constraint c);

struct ConstraintViolation {
  Constraint constraint = Constraint::OutDegree;
  std::string detail;
};

struct FeasibilityReport {
  bool feasible = true;
  std::vector<ConstraintViolation> violations;

  bool has(Constraint c) const;
  /// "OUT_DEGREE: patient 2 ...; SUBTOUR: {2,3}".
  std::string summary() const;
};

FeasibilityReport check_feasibility(const ArcSelection& arcs, const ProblemInstance& instance);
FeasibilityReport check_feasibility(const Bitstring& assignment, const VariableMap& map,
                                    const ProblemInstance& instance);

/// Every assignment that is a valid set of exactly n_workers routes within
/// capacity, ascending by basis index. Limited to small patient counts.
std::vector<Bitstring> feasible_assignments(const VariableMap& map, const ProblemInstance& instance);

struct FeasibleOptimum {
  double energy = 0.0;
  Bitstring assignment;
};

/// Lowest-energy feasible assignment, ties to the lowest basis index.
/// nullopt when no feasible assignment exists.
std::optional<FeasibleOptimum> feasible_minimum(const QuadraticModel& model, const VariableMap& map,
                                                const ProblemInstance& instance);

}  // namespace swsched
