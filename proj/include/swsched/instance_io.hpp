#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <vector>

#include "swsched/problem_model.hpp"

namespace swsched {

/// Single-day instance document:
///
///   { "day": "Tue", "n_workers": 2, "capacity": 3, "epsilon": 0.7,
///     "patients": [ {"id": 1, "start": "09:00", "end": "10:00"}, ... ],
///     "distances": [[...], ...] }
///
/// "distances" may be replaced by "coordinates": [[x, y], ...] listing the
/// depot first; Euclidean distances are derived from them. Slot times are
/// either "HH:MM" strings or integer minutes.
ProblemInstance instance_from_json(const nlohmann::json& doc);
nlohmann::json instance_to_json(const ProblemInstance& instance);

ProblemInstance load_instance(const std::filesystem::path& path);
void save_instance(const ProblemInstance& instance, const std::filesystem::path& path);

/// Week document: shared coordinates plus dated visits, split into one
/// instance per day in first-appearance order.
///
///   { "n_workers": 3, "capacity": 3, "epsilon": 0.7, "depot": [x, y],
///     "locations": {"1": [x, y], ...},
///     "visits": [ {"patient": 1, "day": "Mon", "start": "09:00", "end": "10:00"}, ... ] }
std::vector<ProblemInstance> week_from_json(const nlohmann::json& doc);
std::vector<ProblemInstance> load_week(const std::filesystem::path& path);

SquareMatrix euclidean_distances(const std::vector<std::pair<double, double>>& points);

nlohmann::json read_json_file(const std::filesystem::path& path);
void write_text_file(const std::filesystem::path& path, const std::string& text);

}  // namespace swsched
