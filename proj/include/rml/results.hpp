#pragma once

// Result records and their CSV persistence. Files are replaced atomically:
// the new content goes to a temporary sibling which is then renamed over the
// final path.

#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rml/error.hpp"

namespace rml {

struct ResultRecord {
  std::string experiment_id;
  std::string timestamp;
  std::string config_hash;
  std::string law;
  std::size_t n = 0;
  std::optional<double> p;
  std::size_t replicas = 0;
  std::uint64_t seed = 0;
  std::string statistic;
  double value = 0.0;
  std::optional<double> ci_low;
  std::optional<double> ci_high;
  std::optional<double> tolerance;
  std::optional<bool> pass;  // empty for report-only statistics
};

struct ReplicaRow {
  std::string experiment_id;
  std::string statistic;
  std::size_t n = 0;
  std::optional<double> p;
  std::size_t replica = 0;
  double value = 0.0;
};

inline const char* kResultsHeader =
    "experiment_id,timestamp,config_hash,law,n,p,replicas,seed,statistic,value,ci_low,ci_high,tolerance,pass";
inline const char* kReplicasHeader = "experiment_id,statistic,n,p,replica,value";

namespace detail {

inline std::string csv_number(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

inline std::string csv_optional(const std::optional<double>& x) { return x ? csv_number(*x) : std::string(); }

inline std::string csv_text(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace detail

inline std::string utc_timestamp() {
  const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  return os.str();
}

inline std::string to_csv(const ResultRecord& r) {
  using namespace detail;
  std::ostringstream os;
  os << csv_text(r.experiment_id) << ',' << r.timestamp << ',' << r.config_hash << ',' << csv_text(r.law) << ','
     << r.n << ',' << csv_optional(r.p) << ',' << r.replicas << ',' << r.seed << ',' << csv_text(r.statistic) << ','
     << csv_number(r.value) << ',' << csv_optional(r.ci_low) << ',' << csv_optional(r.ci_high) << ','
     << csv_optional(r.tolerance) << ',' << (r.pass ? (*r.pass ? "1" : "0") : "");
  return os.str();
}

inline std::string to_csv(const ReplicaRow& r) {
  using namespace detail;
  return csv_text(r.experiment_id) + ',' + csv_text(r.statistic) + ',' + std::to_string(r.n) + ',' +
         csv_optional(r.p) + ',' + std::to_string(r.replica) + ',' + csv_number(r.value);
}

/// Writes `content` to `path` through a temporary file and a rename.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const std::filesystem::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) throw std::runtime_error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

/// Appends rows under `header`, creating the file if needed. The whole file
/// is rewritten atomically, so a reader never sees a partial append.
inline void atomic_append(const std::filesystem::path& path, const std::string& header,
                          const std::vector<std::string>& rows) {
  std::string content;
  if (std::ifstream in(path, std::ios::binary); in) {
    std::ostringstream buf;
    buf << in.rdbuf();
    content = buf.str();
    const auto first = content.substr(0, content.find('\n'));
    if (first != header) throw std::runtime_error(path.string() + ": existing file has a different header");
    if (!content.empty() && content.back() != '\n') content += '\n';
  } else {
    content = header + "\n";
  }
  for (const auto& r : rows) content += r + "\n";
  atomic_write(path, content);
}

/// Minimal CSV reader for files written by this module (RFC 4180 quoting).
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw UsageError("CSV is missing column '" + name + "'");
  }
};

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

inline CsvTable read_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open '" + path.string() + "'");
  CsvTable t;
  std::string line;
  if (!std::getline(in, line)) throw UsageError("'" + path.string() + "' is empty");
  t.header = split_csv_line(line);
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto row = split_csv_line(line);
    if (row.size() != t.header.size())
      throw UsageError("'" + path.string() + "': row with " + std::to_string(row.size()) + " fields, expected " +
                       std::to_string(t.header.size()));
    t.rows.push_back(std::move(row));
  }
  return t;
}

}  // namespace rml
