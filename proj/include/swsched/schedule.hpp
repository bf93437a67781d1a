#pragma once

#include <cstddef>
#include <nlohmann/json.hpp>
#include <stdexcept>
#include <string>
#include <vector>

#include "swsched/bitstring.hpp"
#include "swsched/oracle.hpp"
#include "swsched/problem_model.hpp"
#include "swsched/qubo.hpp"

namespace swsched {

struct Visit {
  int patient_id = 0;
  Minutes slot_start = 0;
  Minutes slot_end = 0;
  friend bool operator==(const Visit&, const Visit&) = default;
};

/// Routes hold visits in travel order (depot exit first). Workers are
/// numbered by route position.
struct Schedule {
  std::string day;
  std::vector<std::vector<Visit>> routes;
  double total_weight = 0.0;

  std::size_t visit_count() const;
  friend bool operator==(const Schedule&, const Schedule&) = default;
};

class DecodeError : public std::runtime_error {
 public:
  explicit DecodeError(FeasibilityReport report)
      : std::runtime_error("infeasible assignment: " + report.summary()), report_(std::move(report)) {}
  const FeasibilityReport& report() const { return report_; }

 private:
  FeasibilityReport report_;
};

/// Walks the selected arcs from the depot. Routes are ordered by their
/// earliest slot, then by lowest patient id. Throws DecodeError when the
/// assignment fails check_feasibility.
Schedule decode(const Bitstring& assignment, const VariableMap& map, const ProblemInstance& instance);
Schedule decode(const Bitstring& assignment, const VariableMap& map, const ProblemInstance& instance,
                const WeightMatrix& weights);

ArcSelection schedule_arcs(const Schedule& schedule, const ProblemInstance& instance);
Bitstring encode(const Schedule& schedule, const VariableMap& map, const ProblemInstance& instance);

/// Sum of w over patient arcs plus bare distance on depot arcs.
double route_weight(const Schedule& schedule, const ProblemInstance& instance, const WeightMatrix& weights);

struct TimeConflict {
  std::size_t worker = 0;
  int first_patient = 0;
  int second_patient = 0;
};

/// Overlapping visits within one worker's day. The Hamiltonian does not
/// forbid these; callers decide whether to surface them.
std::vector<TimeConflict> time_conflicts(const Schedule& schedule);

/// Visits of one route sorted by slot start, then patient id.
std::vector<Visit> in_time_order(const std::vector<Visit>& route);

std::string render_timetable(const Schedule& schedule);

/// One row per worker per day, 100 px per hour.
std::string render_gantt_svg(const std::vector<Schedule>& week);

nlohmann::json schedule_to_json(const Schedule& schedule);
Schedule schedule_from_json(const nlohmann::json& doc);

}  // namespace swsched
