#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "swsched/bitstring.hpp"
#include "swsched/problem_model.hpp"
#include "swsched/qubo.hpp"
#include "swsched/schedule.hpp"
#include "swsched/statevector.hpp"
#include "swsched/vqe.hpp"

namespace swsched {

/// Seconds since the Unix epoch.
using Timestamp = std::int64_t;

inline constexpr Timestamp kSecondsPerDay = 86400;

/// Solver settings recorded with a case so a later warm start can tell
/// whether the stored parameters fit the current ansatz.
struct SolverSettings {
  Encoding encoding = Encoding::FullArc;
  std::size_t layers = 0;  // 0 selects default_layers
  Entanglement entanglement = Entanglement::Linear;
  std::optional<double> penalty;
  VqeConfig vqe;
};

struct Case {
  std::uint64_t id = 0;
  /// Canonical form (see canonicalize).
  ProblemInstance statement;
  Schedule solution;
  Bitstring assignment;
  std::vector<double> initial_point;
  SolverSettings config;
  /// Achieved weight over the best known weight; 1 is optimal.
  double quality = 1.0;
  Timestamp solved_at = 0;
};

struct SimilarityWeights {
  double patients = 0.3;
  double distances = 0.3;
  double slots = 0.3;
  double fleet = 0.1;
};

struct SimilarityBreakdown {
  double patients = 0.0;
  double distances = 0.0;
  double slots = 0.0;
  double fleet = 0.0;
  double total = 0.0;
};

/// Weighted mean of patient-set Jaccard, distance agreement and slot
/// agreement over shared patients, and a workers/capacity/epsilon match.
SimilarityBreakdown similarity_breakdown(const ProblemInstance& a, const ProblemInstance& b,
                                         const SimilarityWeights& weights = {});
double similarity(const ProblemInstance& a, const ProblemInstance& b, const SimilarityWeights& weights = {});

/// Slot differences saturate at this many minutes (the working day).
inline constexpr double kSlotScaleMinutes = 420.0;

struct ReplanPolicy {
  double reuse_threshold = 0.95;
  double adapt_threshold = 0.60;
  double degradation_threshold = 1.25;
  Timestamp min_age = 90 * kSecondsPerDay;
  bool allow_reuse = true;
  SimilarityWeights weights;
};

/// True once the case is at least min_age old or its quality ratio exceeds
/// the degradation threshold.
bool replan_allowed(const Case& c, Timestamp now, const ReplanPolicy& policy);

enum class Branch { Reuse, Reoptimize, TopDown };

std::string to_string(Branch b);
Branch branch_from_string(std::string_view s);

struct BranchDecision {
  Branch branch = Branch::TopDown;
  std::optional<std::uint64_t> matched_case;
  double similarity = 0.0;
  friend bool operator==(const BranchDecision&, const BranchDecision&) = default;
};

/// Maps a stored solution onto a new statement. Shared patients stay put,
/// departed patients are replaced by the new patient with the closest slot
/// start, leftovers go to the least-loaded route. nullopt when the result
/// cannot have exactly n_workers routes.
std::optional<Schedule> adapt(const Case& c, const ProblemInstance& statement);

struct Revision {
  bool accepted = false;
  Schedule schedule;
  /// Constraint name or "DEGRADED" when rejected.
  std::string reason;
  double ratio = 0.0;
};

Revision revise(const Schedule& candidate, const ProblemInstance& statement, double best_known,
                const ReplanPolicy& policy);

class CaseLog;

/// Thrown by the persistence test hook to simulate a crash mid-write.
class InjectedCrash : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Retrieval {
  BranchDecision decision;
  std::optional<Case> matched;
  std::optional<Schedule> adapted;
};

/// Append-ordered case memory with a patient-id index. Backed by a case log
/// when opened with a path. Many readers, one writer.
class CaseBase {
 public:
  CaseBase();
  explicit CaseBase(const std::filesystem::path& log_path);
  ~CaseBase();
  CaseBase(const CaseBase&) = delete;
  CaseBase& operator=(const CaseBase&) = delete;

  std::size_t size() const;
  std::vector<Case> snapshot() const;
  std::optional<Case> find(std::uint64_t id) const;

  /// Assigns the next id, persists, then indexes. Returns the stored case.
  /// Rejects solutions that fail check_feasibility on the statement.
  Case retain(Case c);

  Retrieval retrieve_detailed(const ProblemInstance& statement, const ReplanPolicy& policy, Timestamp now) const;

  /// Test hook: the next persist writes only this many bytes of its record
  /// and throws InjectedCrash.
  void crash_next_persist_after(std::size_t bytes);

 private:
  mutable std::shared_mutex mutex_;
  std::vector<Case> cases_;
  std::map<int, std::vector<std::size_t>> by_patient_;
  std::unique_ptr<CaseLog> log_;
  std::optional<std::size_t> crash_after_;
};

BranchDecision retrieve(const CaseBase& base, const ProblemInstance& statement, const ReplanPolicy& policy,
                        Timestamp now);

}  // namespace swsched
