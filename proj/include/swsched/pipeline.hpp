#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "swsched/cbr.hpp"
#include "swsched/oracle.hpp"
#include "swsched/qubo.hpp"
#include "swsched/schedule.hpp"
#include "swsched/statevector.hpp"
#include "swsched/vqe.hpp"

namespace swsched {

struct SolveOptions {
  SolverSettings settings;
  /// Cross-check against the brute-force oracle.
  bool use_oracle = true;
};

/// The instance is too large for the oracle and the caller did not opt out.
class OracleLimitError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

Ansatz make_ansatz(std::size_t n_qubits, const SolverSettings& settings);

struct SolveOutcome {
  CompiledModel compiled;
  IsingModel ising;
  Ansatz ansatz;
  VqeResult vqe;
  /// Best feasible bitstring among the restarts, if any.
  std::optional<Bitstring> assignment;
  std::optional<Schedule> schedule;
  /// QUBO energy of `assignment`.
  std::optional<double> energy;
  /// Final parameters of the restart that produced `assignment`.
  std::vector<double> params;
  /// Feasibility of the VQE's most probable bitstring.
  FeasibilityReport report;
  std::optional<FeasibleOptimum> oracle;
};

/// Compile, run the VQE and decode the best feasible restart outcome.
/// Throws OracleLimitError when use_oracle is set and the model has more
/// than kDefaultEnumerationCap variables.
SolveOutcome solve_instance(const ProblemInstance& instance, const SolveOptions& options);

struct ReplanOptions {
  SolveOptions solve;
  ReplanPolicy policy;
  /// First-layer angles of a basis-state warm start are pulled this far
  /// toward pi/2.
  double warm_softening = 0.35;
  /// Restarts under REOPTIMIZE; the first starts from the warm point.
  std::size_t reoptimize_restarts = 3;
};

struct ReplanOutcome {
  /// Dispatch chosen by retrieval.
  BranchDecision decision;
  /// Branch that produced the returned schedule.
  Branch final_branch = Branch::TopDown;
  std::optional<Schedule> schedule;
  std::optional<Bitstring> assignment;
  /// Optimizer evaluations across every branch tried.
  std::size_t evaluations = 0;
  /// Share of `evaluations` spent by the warm-started REOPTIMIZE run.
  std::size_t reoptimize_evaluations = 0;
  std::optional<double> quality;
  std::optional<std::uint64_t> retained_id;
  /// Reasons for falling through to a later branch.
  std::vector<std::string> notes;
};

/// retrieve -> reuse | warm-started re-optimization | full solve -> retain.
ReplanOutcome replan(CaseBase& base, const ProblemInstance& statement, const ReplanOptions& options, Timestamp now);

}  // namespace swsched
