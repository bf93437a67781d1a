#include "swsched/qubo.hpp"

#include <fmt/format.h>
#include <sstream>

namespace swsched {

std::string to_string(Encoding e) { return e == Encoding::FullArc ? "full" : "patients"; }

Encoding encoding_from_string(std::string_view s) {
  if (s == "full" || s == "full-arc") return Encoding::FullArc;
  if (s == "patients" || s == "patients-only") return Encoding::PatientsOnly;
  throw std::invalid_argument(fmt::format("unknown encoding '{}'", s));
}

VariableMap VariableMap::build(std::size_t patient_count, Encoding encoding) {
  VariableMap map;
  map.encoding_ = encoding;
  map.nodes_ = patient_count + 1;
  map.index_.assign(map.nodes_ * map.nodes_, -1);
  const std::size_t first = encoding == Encoding::FullArc ? 0 : 1;
  for (std::size_t i = first; i < map.nodes_; ++i) {
    for (std::size_t j = first; j < map.nodes_; ++j) {
      if (i == j) continue;
      map.index_[i * map.nodes_ + j] = static_cast<std::ptrdiff_t>(map.arcs_.size());
      map.arcs_.push_back({i, j});
    }
  }
  return map;
}

std::optional<std::size_t> VariableMap::index_of(std::size_t from, std::size_t to) const {
  if (from >= nodes_ || to >= nodes_) return std::nullopt;
  auto idx = index_[from * nodes_ + to];
  if (idx < 0) return std::nullopt;
  return static_cast<std::size_t>(idx);
}

ArcSelection VariableMap::expand(const Bitstring& assignment) const {
  if (assignment.size() != arcs_.size())
    throw std::invalid_argument(
        fmt::format("assignment has {} bits, variable map has {}", assignment.size(), arcs_.size()));
  ArcSelection sel(nodes_, std::vector<std::uint8_t>(nodes_, 0));
  for (std::size_t p = 0; p < arcs_.size(); ++p)
    if (assignment[p]) sel[arcs_[p].from][arcs_[p].to] = 1;
  if (encoding_ == Encoding::PatientsOnly) {
    for (std::size_t i = 1; i < nodes_; ++i) {
      bool has_in = false, has_out = false;
      for (std::size_t j = 1; j < nodes_; ++j) {
        has_in = has_in || sel[j][i];
        has_out = has_out || sel[i][j];
      }
      sel[0][i] = has_in ? 0 : 1;
      sel[i][0] = has_out ? 0 : 1;
    }
  }
  return sel;
}

Bitstring VariableMap::encode(const ArcSelection& arcs) const {
  Bitstring out(arcs_.size());
  for (std::size_t p = 0; p < arcs_.size(); ++p) out.set(p, arcs.at(arcs_[p].from).at(arcs_[p].to) != 0);
  return out;
}

void QuadraticModel::add_quadratic(std::size_t p, std::size_t q, double c) {
  if (p == q) {
    add_linear(p, c);
    return;
  }
  if (p > q) std::swap(p, q);
  if (q >= linear.size()) throw std::out_of_range("quadratic term index out of range");
  quadratic[{p, q}] += c;
}

void QuadraticModel::add_squared_penalty(std::span<const std::size_t> vars, double target, double scale) {
  offset += scale * target * target;
  for (auto p : vars) add_linear(p, scale * (1.0 - 2.0 * target));
  for (std::size_t a = 0; a < vars.size(); ++a)
    for (std::size_t b = a + 1; b < vars.size(); ++b) add_quadratic(vars[a], vars[b], 2.0 * scale);
}

void QuadraticModel::add_at_most_one_penalty(std::span<const std::size_t> vars, double scale) {
  for (std::size_t a = 0; a < vars.size(); ++a)
    for (std::size_t b = a + 1; b < vars.size(); ++b) add_quadratic(vars[a], vars[b], scale);
}

CompiledModel compile_qubo(const WeightMatrix& weights, int n_workers, std::optional<double> penalty,
                           Encoding encoding) {
  const auto nodes = weights.w.size();
  if (nodes < 2) throw std::invalid_argument("instance has no patients");
  if (n_workers < 1) throw std::invalid_argument("n_workers must be positive");
  const double max_w = weights.max_weight();
  double A = 0.0;
  if (penalty) {
    if (!(*penalty > max_w))
      throw PenaltyError(fmt::format("penalty A = {} violates A > max(w_ij) = {}", *penalty, max_w));
    A = *penalty;
  } else {
    A = max_w > 0.0 ? kAutoPenaltyFactor * max_w : 1.0;
  }

  CompiledModel out{QuadraticModel(0), VariableMap::build(nodes - 1, encoding)};
  auto& model = out.model;
  const auto& map = out.map;
  model = QuadraticModel(map.size());
  model.penalty_A = A;
  const double k = static_cast<double>(n_workers);

  std::vector<std::size_t> vars;
  auto collect_out = [&](std::size_t i) {
    vars.clear();
    for (std::size_t j = 0; j < nodes; ++j)
      if (auto p = map.index_of(i, j)) vars.push_back(*p);
    return std::span<const std::size_t>(vars);
  };
  auto collect_in = [&](std::size_t j) {
    vars.clear();
    for (std::size_t i = 0; i < nodes; ++i)
      if (auto p = map.index_of(i, j)) vars.push_back(*p);
    return std::span<const std::size_t>(vars);
  };

  if (encoding == Encoding::FullArc) {
    for (std::size_t p = 0; p < map.size(); ++p) model.add_linear(p, weights.w(map.arcs()[p].from, map.arcs()[p].to));
    for (std::size_t i = 1; i < nodes; ++i) model.add_squared_penalty(collect_out(i), 1.0, A);
    for (std::size_t i = 1; i < nodes; ++i) model.add_squared_penalty(collect_in(i), 1.0, A);
    model.add_squared_penalty(collect_out(0), k, A);
    model.add_squared_penalty(collect_in(0), k, A);
    return out;
  }

  // Patients-only: a chain start j pays w_0j = w_0j (1 - in_j), a chain end i
  // pays w_i0 (1 - out_i). With in/out degree at most one and n - k arcs the
  // selection is exactly k chains.
  for (std::size_t p = 0; p < map.size(); ++p) {
    const auto [i, j] = map.arcs()[p];
    model.add_linear(p, weights.w(i, j) - weights.w(0, j) - weights.w(i, 0));
  }
  for (std::size_t i = 1; i < nodes; ++i) model.offset += weights.w(0, i) + weights.w(i, 0);
  for (std::size_t i = 1; i < nodes; ++i) model.add_at_most_one_penalty(collect_out(i), A);
  for (std::size_t i = 1; i < nodes; ++i) model.add_at_most_one_penalty(collect_in(i), A);
  std::vector<std::size_t> all(map.size());
  for (std::size_t p = 0; p < all.size(); ++p) all[p] = p;
  model.add_squared_penalty(all, static_cast<double>(nodes - 1) - k, A);
  return out;
}

IsingModel qubo_to_ising(const QuadraticModel& model) {
  IsingModel out(model.variable_count());
  out.offset = model.offset;
  for (std::size_t p = 0; p < model.linear.size(); ++p) {
    const double c = model.linear[p];
    out.offset += c / 2.0;
    out.h[p] -= c / 2.0;
  }
  for (const auto& [key, c] : model.quadratic) {
    out.offset += c / 4.0;
    out.h[key.first] -= c / 4.0;
    out.h[key.second] -= c / 4.0;
    out.J[key] += c / 4.0;
  }
  return out;
}

double energy(const QuadraticModel& model, const Bitstring& x) {
  if (x.size() != model.variable_count())
    throw std::invalid_argument(
        fmt::format("assignment length {} does not match {} variables", x.size(), model.variable_count()));
  double e = model.offset;
  for (std::size_t p = 0; p < x.size(); ++p)
    if (x[p]) e += model.linear[p];
  for (const auto& [key, c] : model.quadratic)
    if (x[key.first] && x[key.second]) e += c;
  return e;
}

double energy(const IsingModel& model, std::span<const int> spins) {
  if (spins.size() != model.variable_count())
    throw std::invalid_argument(
        fmt::format("spin string length {} does not match {} spins", spins.size(), model.variable_count()));
  double e = model.offset;
  for (std::size_t p = 0; p < spins.size(); ++p) e += model.h[p] * spins[p];
  for (const auto& [key, c] : model.J) e += c * spins[key.first] * spins[key.second];
  return e;
}

double energy(const IsingModel& model, const Bitstring& x) {
  auto z = x.spins();
  return energy(model, std::span<const int>(z));
}

std::string dump_model(const QuadraticModel& model) {
  std::string out = "# quadratic model\n";
  out += fmt::format("variables {}\n", model.variable_count());
  out += fmt::format("penalty_A {:.17g}\n", model.penalty_A);
  out += fmt::format("offset {:.17g}\n", model.offset);
  for (std::size_t p = 0; p < model.linear.size(); ++p) out += fmt::format("linear {} {:.17g}\n", p, model.linear[p]);
  for (const auto& [key, c] : model.quadratic) out += fmt::format("quadratic {} {} {:.17g}\n", key.first, key.second, c);
  return out;
}

QuadraticModel parse_model(std::string_view text) {
  std::istringstream in{std::string(text)};
  QuadraticModel model;
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& why) {
    throw std::invalid_argument(fmt::format("model dump line {}: {}", line_no, why));
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream fields(line);
    std::string tag;
    fields >> tag;
    if (tag == "variables") {
      std::size_t n = 0;
      if (!(fields >> n)) fail("bad variable count");
      model = QuadraticModel(n);
    } else if (tag == "penalty_A") {
      if (!(fields >> model.penalty_A)) fail("bad penalty");
    } else if (tag == "offset") {
      if (!(fields >> model.offset)) fail("bad offset");
    } else if (tag == "linear") {
      std::size_t p = 0;
      double c = 0;
      if (!(fields >> p >> c) || p >= model.variable_count()) fail("bad linear term");
      model.linear[p] = c;
    } else if (tag == "quadratic") {
      std::size_t p = 0, q = 0;
      double c = 0;
      if (!(fields >> p >> q >> c) || p >= q || q >= model.variable_count()) fail("bad quadratic term");
      model.quadratic[{p, q}] = c;
    } else {
      fail("unknown tag '" + tag + "'");
    }
  }
  return model;
}

}  // namespace swsched
