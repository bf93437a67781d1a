#include "swsched/problem_model.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fmt/format.h>
#include <numeric>
#include <set>

namespace swsched {

std::string format_hhmm(Minutes minutes) {
  return fmt::format("{:02d}:{:02d}", minutes / 60, minutes % 60);
}

Minutes parse_hhmm(std::string_view text) {
  auto colon = text.find(':');
  if (colon == std::string_view::npos) throw std::invalid_argument(fmt::format("time '{}' is not HH:MM", text));
  int h = 0, m = 0;
  auto hs = text.substr(0, colon);
  auto ms = text.substr(colon + 1);
  auto r1 = std::from_chars(hs.data(), hs.data() + hs.size(), h);
  auto r2 = std::from_chars(ms.data(), ms.data() + ms.size(), m);
  if (r1.ec != std::errc{} || r1.ptr != hs.data() + hs.size() || r2.ec != std::errc{} ||
      r2.ptr != ms.data() + ms.size() || m < 0 || m >= 60 || h < 0 || h > 24)
    throw std::invalid_argument(fmt::format("time '{}' is not HH:MM", text));
  return h * 60 + m;
}

std::size_t ProblemInstance::node_of(int patient_id) const {
  for (std::size_t k = 0; k < patients.size(); ++k)
    if (patients[k].patient_id == patient_id) return k + 1;
  return 0;
}

std::vector<Violation> validate_instance(const ProblemInstance& instance) {
  std::vector<Violation> out;
  if (instance.n_workers < 1) out.push_back({"n_workers", "positive"});
  if (instance.capacity < 1) out.push_back({"capacity", "positive"});
  if (!(instance.epsilon >= 0.0) || !std::isfinite(instance.epsilon)) out.push_back({"epsilon", "nonnegative"});

  std::set<int> ids;
  for (const auto& p : instance.patients) {
    auto field = fmt::format("patients[{}]", p.patient_id);
    if (!ids.insert(p.patient_id).second) out.push_back({field, "one slot per day"});
    if (p.slot_end <= p.slot_start) out.push_back({field, "slot ordering"});
    if (p.slot_start < 0 || p.slot_start >= 24 * 60) out.push_back({field, "slot start range"});
    if (!instance.day.empty() && !p.day.empty() && p.day != instance.day) out.push_back({field, "day mismatch"});
  }

  const auto& d = instance.distances;
  if (d.size() != instance.node_count()) {
    out.push_back({"distances", "dimension"});
    return out;
  }
  bool symmetric = true, nonneg = true, diagonal = true;
  for (std::size_t i = 0; i < d.size(); ++i) {
    if (d(i, i) != 0.0) diagonal = false;
    for (std::size_t j = 0; j < d.size(); ++j) {
      if (!(d(i, j) >= 0.0) || !std::isfinite(d(i, j))) nonneg = false;
      if (d(i, j) != d(j, i)) symmetric = false;
    }
  }
  if (!symmetric) out.push_back({"distances", "distance symmetry"});
  if (!nonneg) out.push_back({"distances", "distance nonnegative"});
  if (!diagonal) out.push_back({"distances", "zero diagonal"});
  return out;
}

void require_valid(const ProblemInstance& instance) {
  auto violations = validate_instance(instance);
  if (!violations.empty())
    throw InstanceError(fmt::format("invalid instance: {} violates {}", violations.front().field,
                                    violations.front().rule));
}

ProblemInstance canonicalize(const ProblemInstance& instance) {
  std::vector<std::size_t> order(instance.patients.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return instance.patients[a].patient_id < instance.patients[b].patient_id;
  });

  ProblemInstance out;
  out.n_workers = instance.n_workers;
  out.capacity = instance.capacity;
  out.epsilon = instance.epsilon;
  for (auto k : order) {
    auto visit = instance.patients[k];
    visit.day.clear();
    out.patients.push_back(std::move(visit));
  }
  const auto n = instance.node_count();
  if (instance.distances.size() == n) {
    // node map: new node k+1 <- old node order[k]+1
    std::vector<std::size_t> node(n, 0);
    for (std::size_t k = 0; k < order.size(); ++k) node[k + 1] = order[k] + 1;
    out.distances = SquareMatrix(n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out.distances(i, j) = instance.distances(node[i], node[j]);
  } else {
    out.distances = instance.distances;
  }
  return out;
}

double WeightMatrix::max_weight() const {
  double m = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = 0; j < w.size(); ++j)
      if (i != j) m = std::max(m, w(i, j));
  return m;
}

WeightMatrix build_weight_matrix(const ProblemInstance& instance) {
  if (!(instance.epsilon >= 0.0)) throw InstanceError("epsilon must be nonnegative");
  for (const auto& v : validate_instance(instance)) {
    if (v.field == "distances") throw InstanceError(fmt::format("distance matrix rejected: {}", v.rule));
  }

  const auto n = instance.node_count();
  const auto& d = instance.distances;
  WeightMatrix out;
  out.w = d;
  out.t_window = SquareMatrix(n);

  bool any_pair = false;
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (!any_pair) {
        out.d_max = out.d_min = d(i, j);
        any_pair = true;
      }
      out.d_max = std::max(out.d_max, d(i, j));
      out.d_min = std::min(out.d_min, d(i, j));
    }
  }

  const double spread = out.d_max - out.d_min;
  for (std::size_t i = 1; i < n; ++i) {
    for (std::size_t j = 1; j < n; ++j) {
      if (i == j) continue;
      const double gap = static_cast<double>(instance.patient_at_node(i).slot_start -
                                             instance.patient_at_node(j).slot_start);
      out.t_window(i, j) = gap * gap;
      if (spread > 0.0) out.w(i, j) = d(i, j) + instance.epsilon * out.t_window(i, j) / spread;
    }
  }
  return out;
}

}  // namespace swsched
