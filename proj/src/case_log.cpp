#include "swsched/case_log.hpp"

#include <fcntl.h>
#include <unistd.h>
#include <zlib.h>

#include <cerrno>
#include <cstring>
#include <fmt/format.h>
#include <fstream>
#include <sstream>

#include "swsched/instance_io.hpp"

namespace swsched {

namespace {

constexpr const char* kFormat = "swsched-case-log";
constexpr int kVersion = 1;

std::string header_line() {
  return nlohmann::json{{"format", kFormat}, {"version", kVersion}}.dump() + "\n";
}

std::uint32_t checksum(const std::string& text) {
  return static_cast<std::uint32_t>(
      crc32(0L, reinterpret_cast<const Bytef*>(text.data()), static_cast<uInt>(text.size())));
}

struct Parsed {
  std::vector<Case> cases;
  std::uintmax_t valid_size = 0;
};

Parsed parse_log(const std::string& content, const std::filesystem::path& path) {
  Parsed out;
  std::size_t pos = 0, line_no = 0;
  while (pos < content.size()) {
    const auto nl = content.find('\n', pos);
    if (nl == std::string::npos) break;  // torn tail
    const std::string line = content.substr(pos, nl - pos);
    ++line_no;
    pos = nl + 1;
    if (line_no == 1) {
      nlohmann::json head;
      try {
        head = nlohmann::json::parse(line);
      } catch (const nlohmann::json::exception&) {
        throw CaseLogError(fmt::format("{}: header is not valid JSON", path.string()));
      }
      if (!head.is_object() || head.value("format", std::string{}) != kFormat)
        throw CaseLogError(fmt::format("{}: not a case log", path.string()));
      if (head.value("version", 0) != kVersion)
        throw CaseLogError(fmt::format("{}: unsupported case log version {}", path.string(), head.value("version", 0)));
      out.valid_size = pos;
      continue;
    }
    if (line.empty()) {
      out.valid_size = pos;
      continue;
    }
    const auto record = line_no - 1;
    try {
      const auto doc = nlohmann::json::parse(line);
      const auto& body = doc.at("case");
      const auto expected = doc.at("crc32").get<std::uint32_t>();
      if (checksum(body.dump()) != expected)
        throw CaseLogError(fmt::format("{}: record {} (line {}) fails its checksum", path.string(), record, line_no));
      out.cases.push_back(case_from_json(body));
    } catch (const CaseLogError&) {
      throw;
    } catch (const std::exception& e) {
      throw CaseLogError(fmt::format("{}: record {} (line {}) is corrupt: {}", path.string(), record, line_no, e.what()));
    }
    out.valid_size = pos;
  }
  if (line_no == 0) throw CaseLogError(fmt::format("{}: missing header", path.string()));
  return out;
}

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error(fmt::format("cannot read {}", path.string()));
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

nlohmann::json settings_to_json(const SolverSettings& s) {
  nlohmann::json j{{"encoding", to_string(s.encoding)},
                   {"layers", s.layers},
                   {"entanglement", to_string(s.entanglement)},
                   {"max_iterations", s.vqe.max_iterations},
                   {"restarts", s.vqe.restarts},
                   {"seed", s.vqe.seed},
                   {"tolerance", s.vqe.tolerance}};
  j["penalty"] = s.penalty ? nlohmann::json(*s.penalty) : nlohmann::json(nullptr);
  j["optimizer"] = s.vqe.optimizer ? nlohmann::json(to_string(*s.vqe.optimizer)) : nlohmann::json(nullptr);
  j["shots"] = s.vqe.shots ? nlohmann::json(*s.vqe.shots) : nlohmann::json(nullptr);
  return j;
}

SolverSettings settings_from_json(const nlohmann::json& j) {
  SolverSettings s;
  s.encoding = encoding_from_string(j.at("encoding").get<std::string>());
  s.layers = j.at("layers").get<std::size_t>();
  s.entanglement = entanglement_from_string(j.at("entanglement").get<std::string>());
  s.vqe.max_iterations = j.at("max_iterations").get<std::size_t>();
  s.vqe.restarts = j.at("restarts").get<std::size_t>();
  s.vqe.seed = j.at("seed").get<std::uint64_t>();
  s.vqe.tolerance = j.at("tolerance").get<double>();
  if (!j.at("penalty").is_null()) s.penalty = j.at("penalty").get<double>();
  if (!j.at("optimizer").is_null()) s.vqe.optimizer = optimizer_from_string(j.at("optimizer").get<std::string>());
  if (!j.at("shots").is_null()) s.vqe.shots = j.at("shots").get<std::size_t>();
  return s;
}

nlohmann::json case_to_json(const Case& c) {
  return {{"id", c.id},
          {"solved_at", c.solved_at},
          {"quality", c.quality},
          {"statement", instance_to_json(c.statement)},
          {"solution", schedule_to_json(c.solution)},
          {"assignment", c.assignment.to_string()},
          {"initial_point", c.initial_point},
          {"config", settings_to_json(c.config)}};
}

Case case_from_json(const nlohmann::json& doc) {
  Case c;
  c.id = doc.at("id").get<std::uint64_t>();
  c.solved_at = doc.at("solved_at").get<Timestamp>();
  c.quality = doc.at("quality").get<double>();
  c.statement = instance_from_json(doc.at("statement"));
  c.solution = schedule_from_json(doc.at("solution"));
  c.assignment = Bitstring::parse(doc.at("assignment").get<std::string>());
  c.initial_point = doc.at("initial_point").get<std::vector<double>>();
  c.config = settings_from_json(doc.at("config"));
  return c;
}

std::string encode_case_record(const Case& c) {
  const auto body = case_to_json(c);
  const auto text = body.dump();
  nlohmann::json record{{"crc32", checksum(text)}, {"case", body}};
  return record.dump() + "\n";
}

std::vector<Case> read_case_log(const std::filesystem::path& path) {
  return parse_log(slurp(path), path).cases;
}

CaseLog::CaseLog(std::filesystem::path path) : path_(std::move(path)) {
  if (!std::filesystem::exists(path_)) {
    if (path_.has_parent_path()) std::filesystem::create_directories(path_.parent_path());
    auto tmp = path_;
    tmp += ".tmp";
    write_text_file(tmp, header_line());
    std::filesystem::rename(tmp, path_);
    valid_size_ = header_line().size();
    return;
  }
  auto parsed = parse_log(slurp(path_), path_);
  loaded_ = std::move(parsed.cases);
  valid_size_ = parsed.valid_size;
  if (std::filesystem::file_size(path_) != valid_size_) std::filesystem::resize_file(path_, valid_size_);
}

void CaseLog::append(const Case& c, std::optional<std::size_t> crash_after) {
  const auto record = encode_case_record(c);
  const int fd = ::open(path_.c_str(), O_WRONLY);
  if (fd < 0) throw std::runtime_error(fmt::format("cannot open {}: {}", path_.string(), std::strerror(errno)));
  auto fail = [&](const char* what) {
    const int err = errno;
    ::close(fd);
    throw std::runtime_error(fmt::format("{} {}: {}", what, path_.string(), std::strerror(err)));
  };
  // Drop leftovers of an interrupted earlier append before writing.
  if (::ftruncate(fd, static_cast<off_t>(valid_size_)) != 0) fail("cannot truncate");
  if (::lseek(fd, static_cast<off_t>(valid_size_), SEEK_SET) < 0) fail("cannot seek");
  const std::size_t limit = crash_after ? std::min(*crash_after, record.size() - 1) : record.size();
  std::size_t written = 0;
  while (written < limit) {
    const auto n = ::write(fd, record.data() + written, limit - written);
    if (n < 0) {
      if (errno == EINTR) continue;
      fail("cannot write");
    }
    written += static_cast<std::size_t>(n);
  }
  if (::fsync(fd) != 0) fail("cannot sync");
  ::close(fd);
  if (crash_after) throw InjectedCrash(fmt::format("injected crash after {} bytes", limit));
  valid_size_ += record.size();
}

}  // namespace swsched
