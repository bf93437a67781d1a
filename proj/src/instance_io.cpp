#include "swsched/instance_io.hpp"

#include <cmath>
#include <fmt/format.h>
#include <fstream>
#include <map>
#include <sstream>

namespace swsched {

using nlohmann::json;

namespace {

Minutes read_time(const json& value, const char* what) {
  if (value.is_number_integer()) return value.get<int>();
  if (value.is_string()) return parse_hhmm(value.get<std::string>());
  throw InstanceError(fmt::format("{} must be HH:MM or integer minutes", what));
}

template <typename T>
T required(const json& doc, const char* key) {
  if (!doc.contains(key)) throw InstanceError(fmt::format("missing field '{}'", key));
  try {
    return doc.at(key).get<T>();
  } catch (const json::exception& e) {
    throw InstanceError(fmt::format("field '{}': {}", key, e.what()));
  }
}

std::pair<double, double> read_point(const json& value) {
  if (!value.is_array() || value.size() != 2) throw InstanceError("coordinates must be [x, y] pairs");
  return {value[0].get<double>(), value[1].get<double>()};
}

}  // namespace

SquareMatrix euclidean_distances(const std::vector<std::pair<double, double>>& points) {
  SquareMatrix d(points.size());
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = 0; j < points.size(); ++j)
      d(i, j) = std::hypot(points[i].first - points[j].first, points[i].second - points[j].second);
  return d;
}

ProblemInstance instance_from_json(const json& doc) {
  if (!doc.is_object()) throw InstanceError("instance document must be an object");
  ProblemInstance inst;
  inst.day = doc.value("day", std::string{});
  inst.n_workers = required<int>(doc, "n_workers");
  inst.capacity = required<int>(doc, "capacity");
  inst.epsilon = doc.value("epsilon", 0.0);

  const auto& patients = doc.at("patients");
  if (!patients.is_array()) throw InstanceError("'patients' must be an array");
  for (const auto& p : patients) {
    PatientVisit v;
    v.patient_id = required<int>(p, "id");
    v.slot_start = read_time(p.at("start"), "start");
    v.slot_end = read_time(p.at("end"), "end");
    v.day = p.value("day", inst.day);
    inst.patients.push_back(std::move(v));
  }

  if (doc.contains("distances")) {
    const auto& rows = doc.at("distances");
    const auto n = rows.size();
    inst.distances = SquareMatrix(n);
    for (std::size_t i = 0; i < n; ++i) {
      if (rows[i].size() != n) throw InstanceError("'distances' must be a square matrix");
      for (std::size_t j = 0; j < n; ++j) inst.distances(i, j) = rows[i][j].get<double>();
    }
  } else if (doc.contains("coordinates")) {
    std::vector<std::pair<double, double>> pts;
    for (const auto& c : doc.at("coordinates")) pts.push_back(read_point(c));
    inst.distances = euclidean_distances(pts);
  } else {
    throw InstanceError("instance needs 'distances' or 'coordinates'");
  }
  require_valid(inst);
  return inst;
}

json instance_to_json(const ProblemInstance& instance) {
  json doc;
  doc["day"] = instance.day;
  doc["n_workers"] = instance.n_workers;
  doc["capacity"] = instance.capacity;
  doc["epsilon"] = instance.epsilon;
  doc["patients"] = json::array();
  for (const auto& p : instance.patients) {
    json v{{"id", p.patient_id}, {"start", format_hhmm(p.slot_start)}, {"end", format_hhmm(p.slot_end)}};
    if (!p.day.empty() && p.day != instance.day) v["day"] = p.day;
    doc["patients"].push_back(std::move(v));
  }
  json rows = json::array();
  for (std::size_t i = 0; i < instance.distances.size(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < instance.distances.size(); ++j) row.push_back(instance.distances(i, j));
    rows.push_back(std::move(row));
  }
  doc["distances"] = std::move(rows);
  return doc;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InstanceError(fmt::format("cannot open '{}'", path.string()));
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw InstanceError(fmt::format("'{}' is not valid JSON: {}", path.string(), e.what()));
  }
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error(fmt::format("cannot write '{}'", path.string()));
  out << text;
}

ProblemInstance load_instance(const std::filesystem::path& path) {
  try {
    return instance_from_json(read_json_file(path));
  } catch (const json::exception& e) {
    throw InstanceError(fmt::format("'{}': {}", path.string(), e.what()));
  }
}

void save_instance(const ProblemInstance& instance, const std::filesystem::path& path) {
  write_text_file(path, instance_to_json(instance).dump(2) + "\n");
}

std::vector<ProblemInstance> week_from_json(const json& doc) {
  const int workers = required<int>(doc, "n_workers");
  const int capacity = required<int>(doc, "capacity");
  const double epsilon = doc.value("epsilon", 0.0);
  const auto depot = read_point(doc.at("depot"));
  std::map<int, std::pair<double, double>> locations;
  for (const auto& [key, value] : doc.at("locations").items()) locations[std::stoi(key)] = read_point(value);

  std::vector<std::string> day_order;
  std::map<std::string, std::vector<PatientVisit>> by_day;
  for (const auto& v : doc.at("visits")) {
    PatientVisit visit;
    visit.patient_id = required<int>(v, "patient");
    visit.day = required<std::string>(v, "day");
    visit.slot_start = read_time(v.at("start"), "start");
    visit.slot_end = read_time(v.at("end"), "end");
    if (!locations.count(visit.patient_id))
      throw InstanceError(fmt::format("visit for patient {} has no location", visit.patient_id));
    if (!by_day.count(visit.day)) day_order.push_back(visit.day);
    by_day[visit.day].push_back(std::move(visit));
  }

  std::vector<ProblemInstance> week;
  for (const auto& day : day_order) {
    ProblemInstance inst;
    inst.day = day;
    inst.n_workers = workers;
    inst.capacity = capacity;
    inst.epsilon = epsilon;
    inst.patients = by_day[day];
    std::vector<std::pair<double, double>> pts{depot};
    for (const auto& p : inst.patients) pts.push_back(locations[p.patient_id]);
    inst.distances = euclidean_distances(pts);
    require_valid(inst);
    week.push_back(std::move(inst));
  }
  return week;
}

std::vector<ProblemInstance> load_week(const std::filesystem::path& path) {
  try {
    return week_from_json(read_json_file(path));
  } catch (const json::exception& e) {
    throw InstanceError(fmt::format("'{}': {}", path.string(), e.what()));
  }
}

}  // namespace swsched
