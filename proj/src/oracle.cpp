#include "swsched/oracle.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <fmt/format.h>
#include <numeric>

namespace swsched {

namespace {

inline constexpr std::size_t kMaxRoutingPatients = 10;

struct Neighbour {
  std::size_t var;
  double coupling;
};

using Adjacency = std::vector<std::vector<Neighbour>>;

Adjacency adjacency_of(std::size_t n, const std::map<PairKey, double>& couplings) {
  Adjacency adj(n);
  for (const auto& [key, c] : couplings) {
    if (c == 0.0) continue;
    adj[key.first].push_back({key.second, c});
    adj[key.second].push_back({key.first, c});
  }
  return adj;
}

double coefficient_scale(std::span<const double> linear, const std::map<PairKey, double>& couplings, double offset) {
  double s = std::abs(offset);
  for (double v : linear) s += std::abs(v);
  for (const auto& [key, c] : couplings) s += std::abs(c);
  return std::max(1.0, s);
}

void check_cap(std::size_t vars, std::size_t max_vars) {
  if (vars > max_vars || vars > 63)
    throw EnumerationLimitError(fmt::format("{} variables exceed the enumeration cap of {}", vars, max_vars));
}

// Walks the Gray code; `delta(p, code)` returns the energy change of
// flipping bit p from the current state `code` and updates any cached fields.
template <typename Delta, typename Exact>
EnumerationResult gray_scan(std::size_t n, double start_energy, double scale, Delta&& delta, Exact&& exact) {
  const double tol = 1e-9 * scale;
  std::uint64_t code = 0;
  double e = start_energy;
  double running_min = e;
  std::vector<std::pair<std::uint64_t, double>> candidates{{0, e}};
  const std::uint64_t total = std::uint64_t{1} << n;
  for (std::uint64_t i = 1; i < total; ++i) {
    const auto p = static_cast<std::size_t>(std::countr_zero(i));
    e += delta(p, code);
    code ^= std::uint64_t{1} << p;
    if (e <= running_min + tol) {
      if (e < running_min - tol) {
        running_min = e;
        std::erase_if(candidates, [&](const auto& c) { return c.second > running_min + tol; });
      }
      running_min = std::min(running_min, e);
      candidates.emplace_back(code, e);
    }
  }
  EnumerationResult out;
  out.min_energy = std::numeric_limits<double>::infinity();
  std::vector<std::pair<std::uint64_t, double>> exact_values;
  for (const auto& [idx, approx] : candidates) {
    if (approx > running_min + tol) continue;
    const double v = exact(Bitstring::from_index(idx, n));
    exact_values.emplace_back(idx, v);
    out.min_energy = std::min(out.min_energy, v);
  }
  std::sort(exact_values.begin(), exact_values.end());
  for (const auto& [idx, v] : exact_values)
    if (v <= out.min_energy + tol) out.argmin.push_back(Bitstring::from_index(idx, n));
  return out;
}

}  // namespace

EnumerationResult enumerate(const QuadraticModel& model, std::size_t max_vars) {
  const auto n = model.variable_count();
  check_cap(n, max_vars);
  const auto adj = adjacency_of(n, model.quadratic);
  // field[p] = linear[p] + sum_q Q[p,q] x_q
  std::vector<double> field = model.linear;
  auto delta = [&](std::size_t p, std::uint64_t code) {
    const bool was_set = (code >> p) & 1U;
    const double d = was_set ? -field[p] : field[p];
    const double sign = was_set ? -1.0 : 1.0;
    for (const auto& nb : adj[p]) field[nb.var] += sign * nb.coupling;
    return d;
  };
  auto exact = [&](const Bitstring& x) { return energy(model, x); };
  return gray_scan(n, model.offset, coefficient_scale(model.linear, model.quadratic, model.offset), delta, exact);
}

EnumerationResult enumerate(const IsingModel& model, std::size_t max_vars) {
  const auto n = model.variable_count();
  check_cap(n, max_vars);
  const auto adj = adjacency_of(n, model.J);
  // All spins start at +1; field[p] = h[p] + sum_q J[p,q] z_q
  std::vector<double> field = model.h;
  double start = model.offset;
  for (double v : model.h) start += v;
  for (const auto& [key, c] : model.J) {
    start += c;
    field[key.first] += c;
    field[key.second] += c;
  }
  auto delta = [&](std::size_t p, std::uint64_t code) {
    const double z = ((code >> p) & 1U) ? -1.0 : 1.0;
    const double d = -2.0 * z * field[p];
    for (const auto& nb : adj[p]) field[nb.var] -= 2.0 * z * nb.coupling;
    return d;
  };
  auto exact = [&](const Bitstring& x) { return energy(model, x); };
  return gray_scan(n, start, coefficient_scale(model.h, model.J, model.offset), delta, exact);
}

std::string to_string(Constraint c) {
  switch (c) {
    case Constraint::OutDegree: return "OUT_DEGREE";
    case Constraint::InDegree: return "IN_DEGREE";
    case Constraint::DepotOut: return "DEPOT_OUT";
    case Constraint::DepotIn: return "DEPOT_IN";
    case Constraint::Flow: return "FLOW";
    case Constraint::Capacity: return "CAPACITY";
    case Constraint::Subtour: return "SUBTOUR";
  }
  return "UNKNOWN";
}

bool FeasibilityReport::has(Constraint c) const {
  return std::any_of(violations.begin(), violations.end(), [c](const auto& v) { return v.constraint == c; });
}

std::string FeasibilityReport::summary() const {
  if (feasible) return "feasible";
  std::string out;
  for (const auto& v : violations) {
    if (!out.empty()) out += "; ";
    out += fmt::format("{}: {}", to_string(v.constraint), v.detail);
  }
  return out;
}

FeasibilityReport check_feasibility(const ArcSelection& arcs, const ProblemInstance& instance) {
  const auto nodes = instance.node_count();
  if (arcs.size() != nodes || std::any_of(arcs.begin(), arcs.end(), [&](const auto& r) { return r.size() != nodes; }))
    throw std::invalid_argument("arc selection does not match the instance size");
  FeasibilityReport report;
  auto add = [&](Constraint c, std::string detail) { report.violations.push_back({c, std::move(detail)}); };
  auto id = [&](std::size_t node) { return instance.patient_at_node(node).patient_id; };

  std::vector<int> out_deg(nodes, 0), in_deg(nodes, 0);
  for (std::size_t i = 0; i < nodes; ++i)
    for (std::size_t j = 0; j < nodes; ++j)
      if (i != j && arcs[i][j]) {
        ++out_deg[i];
        ++in_deg[j];
      }

  for (std::size_t i = 1; i < nodes; ++i)
    if (out_deg[i] != 1) add(Constraint::OutDegree, fmt::format("patient {} has out-degree {}", id(i), out_deg[i]));
  for (std::size_t i = 1; i < nodes; ++i)
    if (in_deg[i] != 1) add(Constraint::InDegree, fmt::format("patient {} has in-degree {}", id(i), in_deg[i]));
  if (out_deg[0] != instance.n_workers)
    add(Constraint::DepotOut, fmt::format("depot out-degree {} != {}", out_deg[0], instance.n_workers));
  if (in_deg[0] != instance.n_workers)
    add(Constraint::DepotIn, fmt::format("depot in-degree {} != {}", in_deg[0], instance.n_workers));
  for (std::size_t i = 1; i < nodes; ++i)
    if (in_deg[i] != out_deg[i])
      add(Constraint::Flow, fmt::format("patient {} has in {} and out {}", id(i), in_deg[i], out_deg[i]));

  // Routes: follow unique successors from each depot exit.
  for (std::size_t start = 1; start < nodes; ++start) {
    if (!arcs[0][start]) continue;
    std::vector<bool> seen(nodes, false);
    std::size_t node = start;
    int visits = 0;
    while (node != 0 && !seen[node]) {
      seen[node] = true;
      ++visits;
      if (out_deg[node] != 1) break;
      std::size_t next = 0;
      for (std::size_t j = 0; j < nodes; ++j)
        if (j != node && arcs[node][j]) next = j;
      node = next;
    }
    if (visits > instance.capacity)
      add(Constraint::Capacity,
          fmt::format("route starting at patient {} has {} visits > {}", id(start), visits, instance.capacity));
  }

  std::vector<bool> reachable(nodes, false);
  std::vector<std::size_t> stack{0};
  reachable[0] = true;
  while (!stack.empty()) {
    const auto u = stack.back();
    stack.pop_back();
    for (std::size_t v = 0; v < nodes; ++v)
      if (v != u && arcs[u][v] && !reachable[v]) {
        reachable[v] = true;
        stack.push_back(v);
      }
  }
  auto reaches = [&](std::size_t from, std::size_t to) {
    std::vector<bool> seen(nodes, false);
    std::vector<std::size_t> st{from};
    while (!st.empty()) {
      const auto u = st.back();
      st.pop_back();
      for (std::size_t v = 1; v < nodes; ++v) {
        if (v == u || !arcs[u][v] || reachable[v]) continue;
        if (v == to) return true;
        if (!seen[v]) {
          seen[v] = true;
          st.push_back(v);
        }
      }
    }
    return false;
  };
  // Group unreachable patients into weak components; report those with a cycle.
  std::vector<int> component(nodes, -1);
  int next_component = 0;
  for (std::size_t s = 1; s < nodes; ++s) {
    if (reachable[s] || component[s] >= 0) continue;
    std::vector<std::size_t> members;
    std::vector<std::size_t> st{s};
    component[s] = next_component;
    while (!st.empty()) {
      const auto u = st.back();
      st.pop_back();
      members.push_back(u);
      for (std::size_t v = 1; v < nodes; ++v)
        if (v != u && !reachable[v] && component[v] < 0 && (arcs[u][v] || arcs[v][u])) {
          component[v] = next_component;
          st.push_back(v);
        }
    }
    ++next_component;
    const bool cyclic = std::any_of(members.begin(), members.end(), [&](std::size_t u) { return reaches(u, u); });
    if (!cyclic) continue;
    std::vector<int> ids;
    for (auto m : members) ids.push_back(id(m));
    std::sort(ids.begin(), ids.end());
    add(Constraint::Subtour, fmt::format("{{{}}}", fmt::join(ids, ",")));
  }

  report.feasible = report.violations.empty();
  return report;
}

FeasibilityReport check_feasibility(const Bitstring& assignment, const VariableMap& map,
                                    const ProblemInstance& instance) {
  if (map.node_count() != instance.node_count())
    throw std::invalid_argument("variable map does not match the instance size");
  return check_feasibility(map.expand(assignment), instance);
}

std::vector<Bitstring> feasible_assignments(const VariableMap& map, const ProblemInstance& instance) {
  const auto n = instance.patient_count();
  if (map.node_count() != instance.node_count())
    throw std::invalid_argument("variable map does not match the instance size");
  if (n > kMaxRoutingPatients)
    throw EnumerationLimitError(fmt::format("{} patients exceed the route enumeration cap of {}", n, kMaxRoutingPatients));
  const auto k = static_cast<std::size_t>(instance.n_workers);
  std::vector<Bitstring> out;
  if (k > n) return out;
  const auto cap = static_cast<std::size_t>(instance.capacity);

  // Restricted growth strings give each unordered partition once.
  std::vector<std::size_t> block(n, 0);
  std::vector<std::vector<std::size_t>> routes(k);
  ArcSelection arcs(n + 1, std::vector<std::uint8_t>(n + 1, 0));

  auto emit_orders = [&](auto&& self, std::size_t r) -> void {
    if (r == k) {
      for (auto& row : arcs) std::fill(row.begin(), row.end(), 0);
      for (const auto& route : routes) {
        std::size_t prev = 0;
        for (auto node : route) {
          arcs[prev][node] = 1;
          prev = node;
        }
        arcs[prev][0] = 1;
      }
      out.push_back(map.encode(arcs));
      return;
    }
    auto& route = routes[r];
    std::sort(route.begin(), route.end());
    do {
      self(self, r + 1);
    } while (std::next_permutation(route.begin(), route.end()));
  };

  auto partitions = [&](auto&& self, std::size_t i, std::size_t used) -> void {
    if (n - i < k - used) return;
    if (i == n) {
      for (auto& r : routes) r.clear();
      for (std::size_t p = 0; p < n; ++p) routes[block[p]].push_back(p + 1);
      for (const auto& r : routes)
        if (r.size() > cap) return;
      emit_orders(emit_orders, 0);
      return;
    }
    for (std::size_t b = 0; b < std::min(used + 1, k); ++b) {
      block[i] = b;
      self(self, i + 1, std::max(used, b + 1));
    }
  };
  partitions(partitions, 0, 0);
  std::sort(out.begin(), out.end(), index_less);
  return out;
}

std::optional<FeasibleOptimum> feasible_minimum(const QuadraticModel& model, const VariableMap& map,
                                                const ProblemInstance& instance) {
  if (model.variable_count() != map.size()) throw std::invalid_argument("model does not match the variable map");
  std::optional<FeasibleOptimum> best;
  for (const auto& x : feasible_assignments(map, instance)) {
    const double e = energy(model, x);
    if (!best || e < best->energy) best = FeasibleOptimum{e, x};
  }
  return best;
}

}  // namespace swsched
