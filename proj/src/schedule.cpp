#include "swsched/schedule.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fmt/format.h>

namespace swsched {

std::size_t Schedule::visit_count() const {
  std::size_t n = 0;
  for (const auto& r : routes) n += r.size();
  return n;
}

Schedule decode(const Bitstring& assignment, const VariableMap& map, const ProblemInstance& instance) {
  return decode(assignment, map, instance, build_weight_matrix(instance));
}

Schedule decode(const Bitstring& assignment, const VariableMap& map, const ProblemInstance& instance,
                const WeightMatrix& weights) {
  auto report = check_feasibility(assignment, map, instance);
  if (!report.feasible) throw DecodeError(std::move(report));
  const auto arcs = map.expand(assignment);
  const auto nodes = instance.node_count();

  Schedule s;
  s.day = instance.day;
  for (std::size_t start = 1; start < nodes; ++start) {
    if (!arcs[0][start]) continue;
    std::vector<Visit> route;
    for (std::size_t node = start; node != 0;) {
      const auto& p = instance.patient_at_node(node);
      route.push_back({p.patient_id, p.slot_start, p.slot_end});
      std::size_t next = 0;
      for (std::size_t j = 0; j < nodes; ++j)
        if (j != node && arcs[node][j]) next = j;
      node = next;
    }
    s.routes.push_back(std::move(route));
  }
  auto key = [](const std::vector<Visit>& r) {
    const auto earliest = std::min_element(r.begin(), r.end(), [](const Visit& a, const Visit& b) {
      return a.slot_start != b.slot_start ? a.slot_start < b.slot_start : a.patient_id < b.patient_id;
    });
    int lowest = r.front().patient_id;
    for (const auto& v : r) lowest = std::min(lowest, v.patient_id);
    return std::pair{earliest->slot_start, lowest};
  };
  std::stable_sort(s.routes.begin(), s.routes.end(), [&](const auto& a, const auto& b) { return key(a) < key(b); });
  s.total_weight = route_weight(s, instance, weights);
  return s;
}

ArcSelection schedule_arcs(const Schedule& schedule, const ProblemInstance& instance) {
  const auto nodes = instance.node_count();
  ArcSelection arcs(nodes, std::vector<std::uint8_t>(nodes, 0));
  for (const auto& route : schedule.routes) {
    std::size_t prev = 0;
    for (const auto& v : route) {
      const auto node = instance.node_of(v.patient_id);
      if (node == 0) throw std::invalid_argument(fmt::format("patient {} is not in the instance", v.patient_id));
      arcs[prev][node] = 1;
      prev = node;
    }
    if (!route.empty()) arcs[prev][0] = 1;
  }
  return arcs;
}

Bitstring encode(const Schedule& schedule, const VariableMap& map, const ProblemInstance& instance) {
  return map.encode(schedule_arcs(schedule, instance));
}

double route_weight(const Schedule& schedule, const ProblemInstance& instance, const WeightMatrix& weights) {
  double total = 0.0;
  for (const auto& route : schedule.routes) {
    if (route.empty()) continue;
    std::size_t prev = 0;
    for (const auto& v : route) {
      const auto node = instance.node_of(v.patient_id);
      if (node == 0) throw std::invalid_argument(fmt::format("patient {} is not in the instance", v.patient_id));
      total += prev == 0 ? instance.distances(0, node) : weights.w(prev, node);
      prev = node;
    }
    total += instance.distances(prev, 0);
  }
  return total;
}

std::vector<Visit> in_time_order(const std::vector<Visit>& route) {
  auto sorted = route;
  std::stable_sort(sorted.begin(), sorted.end(), [](const Visit& a, const Visit& b) {
    return a.slot_start != b.slot_start ? a.slot_start < b.slot_start : a.patient_id < b.patient_id;
  });
  return sorted;
}

std::vector<TimeConflict> time_conflicts(const Schedule& schedule) {
  std::vector<TimeConflict> out;
  for (std::size_t w = 0; w < schedule.routes.size(); ++w) {
    const auto ordered = in_time_order(schedule.routes[w]);
    for (std::size_t i = 1; i < ordered.size(); ++i)
      if (ordered[i].slot_start < ordered[i - 1].slot_end)
        out.push_back({w, ordered[i - 1].patient_id, ordered[i].patient_id});
  }
  return out;
}

std::string render_timetable(const Schedule& schedule) {
  std::string out = "Social Worker TimeTable\n";
  for (std::size_t w = 0; w < schedule.routes.size(); ++w) {
    out += "-----\n";
    out += fmt::format("Social Worker {}:\n", w + 1);
    for (const auto& v : in_time_order(schedule.routes[w]))
      out += fmt::format("    Patient {}: {}-{}\n", v.patient_id, format_hhmm(v.slot_start), format_hhmm(v.slot_end));
  }
  return out;
}

namespace {

constexpr std::array<const char*, 8> kPalette{"#4e79a7", "#f28e2b", "#e15759", "#76b7b2",
                                              "#59a14f", "#edc948", "#b07aa1", "#ff9da7"};
constexpr int kPxPerHour = 100;
constexpr int kLabelWidth = 120;
constexpr int kRowHeight = 28;
constexpr int kAxisHeight = 30;

std::string escape_xml(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

}  // namespace

std::string render_gantt_svg(const std::vector<Schedule>& week) {
  int first_hour = 8, last_hour = 18;
  bool any = false;
  for (const auto& day : week)
    for (const auto& route : day.routes)
      for (const auto& v : route) {
        if (!any) {
          first_hour = v.slot_start / 60;
          last_hour = (v.slot_end + 59) / 60;
          any = true;
        }
        first_hour = std::min(first_hour, v.slot_start / 60);
        last_hour = std::max(last_hour, (v.slot_end + 59) / 60);
      }
  if (last_hour <= first_hour) last_hour = first_hour + 1;

  std::size_t rows = 0;
  for (const auto& day : week) rows += day.routes.size();
  const int width = kLabelWidth + (last_hour - first_hour) * kPxPerHour + 20;
  const int height = kAxisHeight + static_cast<int>(rows) * kRowHeight + 10;
  auto x_of = [&](Minutes m) { return kLabelWidth + (m - first_hour * 60) * kPxPerHour / 60.0; };

  std::string svg;
  svg += "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  svg += fmt::format(
      "<svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{}\" height=\"{}\" viewBox=\"0 0 {} {}\">\n",
      width, height, width, height);
  svg += "<g font-family=\"sans-serif\" font-size=\"11\">\n";
  for (int h = first_hour; h <= last_hour; ++h) {
    const double x = x_of(h * 60);
    svg += fmt::format("<line x1=\"{:.1f}\" y1=\"{}\" x2=\"{:.1f}\" y2=\"{}\" stroke=\"#cccccc\"/>\n", x,
                       kAxisHeight - 6, x, height - 10);
    svg += fmt::format("<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\">{:02d}:00</text>\n", x, kAxisHeight - 12, h);
  }
  svg += fmt::format("<line x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#000000\"/>\n", kLabelWidth,
                     kAxisHeight - 6, width - 20, kAxisHeight - 6);

  int row = 0;
  for (const auto& day : week) {
    for (std::size_t w = 0; w < day.routes.size(); ++w, ++row) {
      const int y = kAxisHeight + row * kRowHeight;
      svg += fmt::format("<text x=\"4\" y=\"{}\">{} worker {}</text>\n", y + kRowHeight / 2 + 4, escape_xml(day.day),
                         w + 1);
      const char* color = kPalette[w % kPalette.size()];
      for (const auto& v : in_time_order(day.routes[w])) {
        const double x0 = x_of(v.slot_start), x1 = x_of(v.slot_end);
        svg += fmt::format(
            "<rect x=\"{:.1f}\" y=\"{}\" width=\"{:.1f}\" height=\"{}\" fill=\"{}\" stroke=\"#333333\"/>\n", x0, y + 4,
            x1 - x0, kRowHeight - 8, color);
        svg += fmt::format("<text x=\"{:.1f}\" y=\"{}\">P{} {}-{}</text>\n", x0 + 3, y + kRowHeight / 2 + 4,
                           v.patient_id, format_hhmm(v.slot_start), format_hhmm(v.slot_end));
      }
    }
  }
  svg += "</g>\n</svg>\n";
  return svg;
}

nlohmann::json schedule_to_json(const Schedule& schedule) {
  nlohmann::json routes = nlohmann::json::array();
  for (const auto& route : schedule.routes) {
    nlohmann::json r = nlohmann::json::array();
    for (const auto& v : route)
      r.push_back({{"patient", v.patient_id}, {"start", format_hhmm(v.slot_start)}, {"end", format_hhmm(v.slot_end)}});
    routes.push_back(std::move(r));
  }
  return {{"day", schedule.day}, {"total_weight", schedule.total_weight}, {"routes", std::move(routes)}};
}

Schedule schedule_from_json(const nlohmann::json& doc) {
  Schedule s;
  s.day = doc.value("day", std::string{});
  s.total_weight = doc.value("total_weight", 0.0);
  for (const auto& r : doc.at("routes")) {
    std::vector<Visit> route;
    for (const auto& v : r)
      route.push_back({v.at("patient").get<int>(), parse_hhmm(v.at("start").get<std::string>()),
                       parse_hhmm(v.at("end").get<std::string>())});
    s.routes.push_back(std::move(route));
  }
  return s;
}

}  // namespace swsched
