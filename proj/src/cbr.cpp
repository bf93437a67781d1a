#include "swsched/cbr.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <limits>
#include <mutex>
#include <set>

#include "swsched/case_log.hpp"
#include "swsched/oracle.hpp"

namespace swsched {

SimilarityBreakdown similarity_breakdown(const ProblemInstance& a_raw, const ProblemInstance& b_raw,
                                         const SimilarityWeights& weights) {
  const auto a = canonicalize(a_raw);
  const auto b = canonicalize(b_raw);
  SimilarityBreakdown s;

  std::vector<int> shared;
  std::size_t union_size = 0;
  {
    std::size_t i = 0, j = 0;
    while (i < a.patients.size() || j < b.patients.size()) {
      ++union_size;
      if (j == b.patients.size() || (i < a.patients.size() && a.patients[i].patient_id < b.patients[j].patient_id)) {
        ++i;
      } else if (i == a.patients.size() || b.patients[j].patient_id < a.patients[i].patient_id) {
        ++j;
      } else {
        shared.push_back(a.patients[i].patient_id);
        ++i;
        ++j;
      }
    }
  }
  s.patients = union_size == 0 ? 1.0 : static_cast<double>(shared.size()) / static_cast<double>(union_size);

  if (!shared.empty()) {
    std::vector<std::size_t> na{0}, nb{0};
    for (int id : shared) {
      na.push_back(a.node_of(id));
      nb.push_back(b.node_of(id));
    }
    double diff = 0.0, scale = 0.0;
    for (std::size_t u = 0; u < na.size(); ++u)
      for (std::size_t v = u + 1; v < na.size(); ++v) {
        const double da = a.distances(na[u], na[v]), db = b.distances(nb[u], nb[v]);
        diff += std::abs(da - db);
        scale += std::max(da, db);
      }
    s.distances = scale == 0.0 ? 1.0 : 1.0 - diff / scale;

    double gap = 0.0;
    for (std::size_t k = 1; k < na.size(); ++k) {
      const auto& pa = a.patient_at_node(na[k]);
      const auto& pb = b.patient_at_node(nb[k]);
      const double moved = (std::abs(pa.slot_start - pb.slot_start) + std::abs(pa.slot_end - pb.slot_end)) / 2.0;
      gap += std::min(1.0, moved / kSlotScaleMinutes);
    }
    s.slots = 1.0 - gap / static_cast<double>(shared.size());
  }

  s.fleet = (a.n_workers == b.n_workers && a.capacity == b.capacity && a.epsilon == b.epsilon) ? 1.0 : 0.0;

  const double total_weight = weights.patients + weights.distances + weights.slots + weights.fleet;
  if (!(total_weight > 0.0)) throw std::invalid_argument("similarity weights must have a positive sum");
  const double mean = (weights.patients * s.patients + weights.distances * s.distances + weights.slots * s.slots +
                       weights.fleet * s.fleet) /
                      total_weight;
  s.total = std::clamp(mean, 0.0, 1.0);
  return s;
}

double similarity(const ProblemInstance& a, const ProblemInstance& b, const SimilarityWeights& weights) {
  return similarity_breakdown(a, b, weights).total;
}

bool replan_allowed(const Case& c, Timestamp now, const ReplanPolicy& policy) {
  return now - c.solved_at >= policy.min_age || c.quality > policy.degradation_threshold;
}

std::string to_string(Branch b) {
  switch (b) {
    case Branch::Reuse: return "REUSE";
    case Branch::Reoptimize: return "REOPTIMIZE";
    case Branch::TopDown: return "TOP_DOWN";
  }
  return "TOP_DOWN";
}

Branch branch_from_string(std::string_view s) {
  if (s == "REUSE") return Branch::Reuse;
  if (s == "REOPTIMIZE") return Branch::Reoptimize;
  if (s == "TOP_DOWN") return Branch::TopDown;
  throw std::invalid_argument(fmt::format("unknown branch '{}'", s));
}

std::optional<Schedule> adapt(const Case& c, const ProblemInstance& statement_raw) {
  const auto statement = canonicalize(statement_raw);
  std::set<int> now_ids, old_ids;
  for (const auto& p : statement.patients) now_ids.insert(p.patient_id);
  for (const auto& route : c.solution.routes)
    for (const auto& v : route) old_ids.insert(v.patient_id);

  std::vector<const PatientVisit*> arrivals;
  for (const auto& p : statement.patients)
    if (!old_ids.count(p.patient_id)) arrivals.push_back(&p);
  std::vector<Visit> departed;
  for (const auto& route : c.solution.routes)
    for (const auto& v : route)
      if (!now_ids.count(v.patient_id)) departed.push_back(v);
  std::sort(departed.begin(), departed.end(), [](const Visit& x, const Visit& y) { return x.patient_id < y.patient_id; });

  // Greedy closest-slot pairing of arrivals onto departed places.
  std::map<int, int> replacement;  // departed id -> arriving id
  std::vector<bool> arrival_used(arrivals.size(), false), departed_used(departed.size(), false);
  while (true) {
    int best_gap = -1;
    std::size_t bi = 0, bj = 0;
    for (std::size_t i = 0; i < arrivals.size(); ++i) {
      if (arrival_used[i]) continue;
      for (std::size_t j = 0; j < departed.size(); ++j) {
        if (departed_used[j]) continue;
        const int gap = std::abs(arrivals[i]->slot_start - departed[j].slot_start);
        if (best_gap < 0 || gap < best_gap) {
          best_gap = gap;
          bi = i;
          bj = j;
        }
      }
    }
    if (best_gap < 0) break;
    arrival_used[bi] = departed_used[bj] = true;
    replacement[departed[bj].patient_id] = arrivals[bi]->patient_id;
  }

  auto visit_for = [&](int id) {
    const auto& p = statement.patient_at_node(statement.node_of(id));
    return Visit{p.patient_id, p.slot_start, p.slot_end};
  };

  Schedule out;
  out.day = statement_raw.day;
  for (const auto& route : c.solution.routes) {
    std::vector<Visit> next;
    for (const auto& v : route) {
      if (now_ids.count(v.patient_id)) {
        next.push_back(visit_for(v.patient_id));
      } else if (auto it = replacement.find(v.patient_id); it != replacement.end()) {
        next.push_back(visit_for(it->second));
      }
    }
    if (!next.empty()) out.routes.push_back(std::move(next));
  }
  for (std::size_t i = 0; i < arrivals.size(); ++i) {
    if (arrival_used[i]) continue;
    if (out.routes.empty()) out.routes.emplace_back();
    std::size_t lightest = 0;
    for (std::size_t r = 1; r < out.routes.size(); ++r)
      if (out.routes[r].size() < out.routes[lightest].size()) lightest = r;
    out.routes[lightest].push_back(visit_for(arrivals[i]->patient_id));
  }
  if (static_cast<int>(out.routes.size()) != statement.n_workers) return std::nullopt;
  out.total_weight = route_weight(out, statement, build_weight_matrix(statement));
  return out;
}

Revision revise(const Schedule& candidate, const ProblemInstance& statement, double best_known,
                const ReplanPolicy& policy) {
  Revision r;
  r.schedule = candidate;
  FeasibilityReport report;
  try {
    report = check_feasibility(schedule_arcs(candidate, statement), statement);
  } catch (const std::invalid_argument&) {
    r.reason = to_string(Constraint::OutDegree);
    return r;
  }
  if (!report.feasible) {
    r.reason = to_string(report.violations.front().constraint);
    return r;
  }
  const double weight = route_weight(candidate, statement, build_weight_matrix(statement));
  r.schedule.total_weight = weight;
  if (best_known > 0.0) {
    r.ratio = weight / best_known;
  } else {
    r.ratio = weight <= best_known ? 1.0 : std::numeric_limits<double>::infinity();
  }
  if (r.ratio > policy.degradation_threshold) {
    r.reason = "DEGRADED";
    return r;
  }
  r.accepted = true;
  return r;
}

CaseBase::CaseBase() = default;

CaseBase::CaseBase(const std::filesystem::path& log_path) : log_(std::make_unique<CaseLog>(log_path)) {
  for (auto& c : log_->take_loaded()) {
    for (const auto& p : c.statement.patients) by_patient_[p.patient_id].push_back(cases_.size());
    cases_.push_back(std::move(c));
  }
}

CaseBase::~CaseBase() = default;

std::size_t CaseBase::size() const {
  std::shared_lock lock(mutex_);
  return cases_.size();
}

std::vector<Case> CaseBase::snapshot() const {
  std::shared_lock lock(mutex_);
  return cases_;
}

std::optional<Case> CaseBase::find(std::uint64_t id) const {
  std::shared_lock lock(mutex_);
  for (const auto& c : cases_)
    if (c.id == id) return c;
  return std::nullopt;
}

void CaseBase::crash_next_persist_after(std::size_t bytes) {
  std::unique_lock lock(mutex_);
  crash_after_ = bytes;
}

Case CaseBase::retain(Case c) {
  c.statement = canonicalize(c.statement);
  const auto report = check_feasibility(schedule_arcs(c.solution, c.statement), c.statement);
  if (!report.feasible) throw std::invalid_argument("cannot retain an infeasible case: " + report.summary());

  std::unique_lock lock(mutex_);
  c.id = cases_.empty() ? 1 : cases_.back().id + 1;
  if (log_) {
    auto crash = crash_after_;
    crash_after_.reset();
    log_->append(c, crash);
  }
  for (const auto& p : c.statement.patients) by_patient_[p.patient_id].push_back(cases_.size());
  cases_.push_back(c);
  return c;
}

Retrieval CaseBase::retrieve_detailed(const ProblemInstance& statement_raw, const ReplanPolicy& policy,
                                      Timestamp now) const {
  const auto statement = canonicalize(statement_raw);
  std::shared_lock lock(mutex_);
  Retrieval out;
  if (cases_.empty()) return out;

  std::set<std::size_t> candidates;
  for (const auto& p : statement.patients)
    if (auto it = by_patient_.find(p.patient_id); it != by_patient_.end())
      candidates.insert(it->second.begin(), it->second.end());

  const double fleet_share =
      policy.weights.fleet /
      (policy.weights.patients + policy.weights.distances + policy.weights.slots + policy.weights.fleet);
  std::optional<std::size_t> best;
  double best_sim = -1.0;
  auto consider = [&](std::size_t idx) {
    const double s = similarity(statement, cases_[idx].statement, policy.weights);
    // Later cases win ties.
    if (!best || s > best_sim ||
        (s == best_sim && (cases_[idx].solved_at > cases_[*best].solved_at ||
                           (cases_[idx].solved_at == cases_[*best].solved_at && idx > *best)))) {
      best = idx;
      best_sim = s;
    }
  };
  for (auto idx : candidates) consider(idx);
  // Cases sharing no patient score at most the fleet share.
  if (!best || best_sim <= fleet_share)
    for (std::size_t idx = 0; idx < cases_.size(); ++idx) consider(idx);

  const auto& match = cases_[*best];
  out.decision.similarity = best_sim;
  if (best_sim < policy.adapt_threshold) return out;

  out.matched = match;
  out.decision.matched_case = match.id;
  out.adapted = adapt(match, statement);
  out.decision.branch = Branch::Reoptimize;
  if (best_sim >= policy.reuse_threshold && out.adapted && policy.allow_reuse && !replan_allowed(match, now, policy)) {
    const auto report = check_feasibility(schedule_arcs(*out.adapted, statement), statement);
    if (report.feasible) out.decision.branch = Branch::Reuse;
  }
  return out;
}

BranchDecision retrieve(const CaseBase& base, const ProblemInstance& statement, const ReplanPolicy& policy,
                        Timestamp now) {
  return base.retrieve_detailed(statement, policy, now).decision;
}

}  // namespace swsched
