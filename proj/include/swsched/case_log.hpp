#pragma once

#include <cstddef>
#include <filesystem>
#include <nlohmann/json.hpp>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "swsched/cbr.hpp"

namespace swsched {

/// A case log that cannot be trusted: bad header, unparsable record or
/// checksum mismatch on a complete line.
class CaseLogError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

nlohmann::json settings_to_json(const SolverSettings& s);
SolverSettings settings_from_json(const nlohmann::json& doc);
nlohmann::json case_to_json(const Case& c);
Case case_from_json(const nlohmann::json& doc);

/// One JSON document per line. The first line is the header
/// {"format":"swsched-case-log","version":1}; every other line is
/// {"crc32":N,"case":{...}} with N the CRC-32 of the compact case text.
/// A final line without a newline is a torn write and is dropped.
class CaseLog {
 public:
  /// Creates the file with a header if missing, otherwise loads and verifies
  /// it and cuts any torn tail.
  explicit CaseLog(std::filesystem::path path);

  const std::filesystem::path& path() const { return path_; }
  std::vector<Case> take_loaded() { return std::move(loaded_); }

  /// Appends one record and syncs it. With `crash_after`, writes only that
  /// many bytes and throws InjectedCrash.
  void append(const Case& c, std::optional<std::size_t> crash_after = std::nullopt);

 private:
  std::filesystem::path path_;
  std::vector<Case> loaded_;
  std::uintmax_t valid_size_ = 0;
};

/// Reads and verifies a log without modifying it.
std::vector<Case> read_case_log(const std::filesystem::path& path);

std::string encode_case_record(const Case& c);

}  // namespace swsched
