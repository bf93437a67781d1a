#include "swsched/sweep.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <stdexcept>

#include "swsched/oracle.hpp"

namespace swsched {

ScheduleQuality schedule_quality(const Schedule& schedule, const ProblemInstance& instance) {
  ScheduleQuality q;
  const auto& d = instance.distances;
  for (const auto& route : schedule.routes) {
    const auto ordered = in_time_order(route);
    if (ordered.empty()) continue;
    std::size_t prev = instance.node_of(ordered.front().patient_id);
    q.travel += d(0, prev);
    for (std::size_t i = 1; i < ordered.size(); ++i) {
      const auto node = instance.node_of(ordered[i].patient_id);
      const double leg = d(prev, node);
      q.travel += leg;
      const double arrival = ordered[i - 1].slot_end + leg;
      if (arrival > ordered[i].slot_start)
        ++q.late_transitions;
      else
        q.idle += ordered[i].slot_start - arrival;
      prev = node;
    }
    q.travel += d(prev, 0);
  }
  return q;
}

namespace {

SweepRow solve_at(const ProblemInstance& instance, double epsilon, const SweepOptions& options) {
  auto inst = instance;
  inst.epsilon = epsilon;
  SweepRow row;
  row.epsilon = epsilon;
  std::optional<Schedule> schedule;
  if (options.use_vqe) {
    schedule = solve_instance(inst, options.solve).schedule;
  } else {
    require_valid(inst);
    const auto weights = build_weight_matrix(inst);
    const auto compiled =
        compile_qubo(weights, inst.n_workers, options.solve.settings.penalty, options.solve.settings.encoding);
    if (auto opt = feasible_minimum(compiled.model, compiled.map, inst))
      schedule = decode(opt->assignment, compiled.map, inst, weights);
  }
  if (schedule) {
    row.solved = true;
    row.total_weight = schedule->total_weight;
    row.quality = schedule_quality(*schedule, inst);
    row.schedule = std::move(*schedule);
  }
  return row;
}

std::optional<std::size_t> pick_best(const std::vector<SweepRow>& rows) {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!rows[i].solved) continue;
    if (!best || rows[i].quality.score() < rows[*best].quality.score()) best = i;
  }
  return best;
}

}  // namespace

SweepReport epsilon_sweep(const ProblemInstance& instance, std::vector<double> grid, const SweepOptions& options) {
  if (grid.empty()) throw std::invalid_argument("epsilon grid is empty");
  for (double e : grid)
    if (!(e >= 0.0) || !std::isfinite(e)) throw std::invalid_argument(fmt::format("invalid epsilon {}", e));
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  SweepReport report;
  for (double e : grid) report.rows.push_back(solve_at(instance, e, options));
  report.best = pick_best(report.rows);

  if (options.refine && report.best && report.rows.size() > 1) {
    auto has = [&](double e) {
      return std::any_of(report.rows.begin(), report.rows.end(), [&](const auto& r) { return r.epsilon == e; });
    };
    for (std::size_t round = 0; round < options.refine_rounds; ++round) {
      const auto b = *report.best;
      std::vector<double> probes;
      if (b > 0) probes.push_back((report.rows[b - 1].epsilon + report.rows[b].epsilon) / 2.0);
      if (b + 1 < report.rows.size()) probes.push_back((report.rows[b].epsilon + report.rows[b + 1].epsilon) / 2.0);
      bool added = false;
      for (double e : probes) {
        if (has(e)) continue;
        report.rows.push_back(solve_at(instance, e, options));
        added = true;
      }
      if (!added) break;
      std::sort(report.rows.begin(), report.rows.end(), [](const auto& x, const auto& y) { return x.epsilon < y.epsilon; });
      report.best = pick_best(report.rows);
    }
  }
  return report;
}

std::string render_sweep(const SweepReport& report) {
  std::string out = fmt::format("{:>10}  {:>14}  {:>10}  {:>10}  {:>6}  {:>12}\n", "epsilon", "total_weight", "travel",
                                "idle", "late", "quality");
  for (const auto& r : report.rows) {
    if (!r.solved) {
      out += fmt::format("{:>10.4f}  {:>14}  {:>10}  {:>10}  {:>6}  {:>12}\n", r.epsilon, "infeasible", "-", "-", "-",
                         "-");
      continue;
    }
    out += fmt::format("{:>10.4f}  {:>14.3f}  {:>10.3f}  {:>10.3f}  {:>6}  {:>12.3f}\n", r.epsilon, r.total_weight,
                       r.quality.travel, r.quality.idle, r.quality.late_transitions, r.quality.score());
  }
  if (report.best)
    out += fmt::format("best epsilon: {:.4f}\n", report.rows[*report.best].epsilon);
  else
    out += "best epsilon: none\n";
  return out;
}

}  // namespace swsched
