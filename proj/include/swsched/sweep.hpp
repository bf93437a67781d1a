#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "swsched/pipeline.hpp"
#include "swsched/problem_model.hpp"
#include "swsched/schedule.hpp"

namespace swsched {

/// Epsilon-independent score of a schedule, in minutes: travel time, plus
/// idle time between consecutive visits in time order, plus a full day for
/// every visit that cannot be reached before its slot starts.
struct ScheduleQuality {
  double travel = 0.0;
  double idle = 0.0;
  int late_transitions = 0;
  double score() const { return travel + idle + 1440.0 * late_transitions; }
};

ScheduleQuality schedule_quality(const Schedule& schedule, const ProblemInstance& instance);

struct SweepRow {
  double epsilon = 0.0;
  bool solved = false;
  double total_weight = 0.0;
  ScheduleQuality quality;
  Schedule schedule;
};

struct SweepOptions {
  /// Solve each point with the VQE instead of the feasible-minimum oracle.
  bool use_vqe = false;
  SolveOptions solve;
  bool refine = false;
  std::size_t refine_rounds = 6;
};

struct SweepReport {
  /// Ascending epsilon.
  std::vector<SweepRow> rows;
  /// Index of the lowest quality score, ties to the smaller epsilon.
  std::optional<std::size_t> best;
};

SweepReport epsilon_sweep(const ProblemInstance& instance, std::vector<double> grid, const SweepOptions& options);
std::string render_sweep(const SweepReport& report);

}  // namespace swsched
