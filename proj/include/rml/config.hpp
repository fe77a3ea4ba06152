#pragma once

// Experiment configuration: a flat key = value text file with optional
// sections. Keys before any header are global; [law] and [region] hold the
// entry law and the spectral-domain parameters; a section named after the
// command overrides global keys for that command only.
//
//   seed = 7
//   n_list = 128, 256
//   replicas = 4
//   [law]
//   kind = rademacher
//   [delta-sweep]
//   p = 1

#include <algorithm>
#include <cstdint>
#include <fstream>
#include <iomanip>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <type_traits>
#include <vector>

#include "rml/entry_law.hpp"
#include "rml/error.hpp"
#include "rml/spectral.hpp"

namespace rml {

enum class Command { verify_identities, delta_sweep, stieltjes_scan, smoothing, rigidity, rate_fit, epsilon_moments };

inline const std::vector<std::pair<Command, std::string>>& command_names() {
  static const std::vector<std::pair<Command, std::string>> names = {
      {Command::verify_identities, "verify-identities"}, {Command::delta_sweep, "delta-sweep"},
      {Command::stieltjes_scan, "stieltjes-scan"},       {Command::smoothing, "smoothing"},
      {Command::rigidity, "rigidity"},                   {Command::rate_fit, "rate-fit"},
      {Command::epsilon_moments, "epsilon-moments"}};
  return names;
}

inline std::string to_string(Command c) {
  for (const auto& [cmd, name] : command_names())
    if (cmd == c) return name;
  return "?";
}

inline Command parse_command(const std::string& s) {
  for (const auto& [cmd, name] : command_names())
    if (name == s) return cmd;
  throw UsageError("unknown command '" + s + "'");
}

/// Sections of a parsed file; "" is the global section.
using IniFile = std::map<std::string, KeyValues>;

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline IniFile parse_ini(std::istream& in, const std::string& origin = "config") {
  IniFile file;
  file[""];
  std::string section, line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const std::string where = origin + ":" + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw UsageError(where + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw UsageError(where + ": empty section name");
      file[section];
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw UsageError(where + ": expected key = value");
    const std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw UsageError(where + ": empty key");
    auto& block = file[section];
    if (block.count(key)) throw UsageError(where + ": duplicate key '" + key + "'");
    block[key] = trim(line.substr(eq + 1));
  }
  return file;
}

inline IniFile load_ini(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot open config file '" + path + "'");
  return parse_ini(in, path);
}

struct ExperimentConfig {
  Command command = Command::delta_sweep;
  KeyValues law_block{{"kind", "rademacher"}};
  std::vector<std::size_t> n_list;
  std::size_t replicas = 1;
  std::vector<double> p_list{1.0};
  std::optional<std::uint64_t> seed;
  std::string out = "results";
  std::size_t jobs = 0;  // 0: all available cores

  // Region G and the evaluation point. v0 and v may be absolute or scaled by 1/n.
  double A0 = 1.0;
  std::optional<double> v0;
  std::optional<double> v0_scale;
  std::optional<double> eps;
  double V = 4.0;
  double A1 = 1.0;
  double u = 0.0;
  std::optional<double> v;
  std::optional<double> v_scale;
  bool random_z = false;
  double v_min = 0.05;
  bool allow_outside_region = false;
  bool allow_p_above_cap = false;

  double C = 10.0;
  double C1 = 1.0;
  double C2 = 1.0;
  double c1 = 1.0;
  QuantileConvention quantiles = QuantileConvention::upper;
  double trunc_c = 0.0;  // 0 disables the truncation check
  std::vector<double> q_list{2.0, 4.0};
  std::size_t k_n = 1000;

  double identity_tol = 1e-9;
  double schur_tol = 1e-8;
  double cdf_tol = 1e-10;
  double quad_tol = 1e-6;
  std::optional<double> slope_min;
  std::optional<double> slope_max;
  std::optional<double> score_ratio_max;

  EntryLaw law() const { return law_from_config(law_block); }

  /// v of the evaluation point for size n.
  double point_v(std::size_t n, double default_scale) const {
    if (v) return *v;
    return (v_scale ? *v_scale : default_scale) / static_cast<double>(n);
  }
  /// v0 override for size n; nullopt keeps A0 log^4(n) / n.
  std::optional<double> region_v0(std::size_t n, std::optional<double> default_scale = std::nullopt) const {
    if (v0) return v0;
    if (v0_scale) return *v0_scale / static_cast<double>(n);
    if (default_scale) return *default_scale / static_cast<double>(n);
    return std::nullopt;
  }
};

namespace detail {

inline std::uint64_t parse_u64(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t.empty() || t.find_first_not_of("0123456789") != std::string::npos)
    throw UsageError("field '" + key + "': not a non-negative integer: '" + text + "'");
  try {
    return std::stoull(t);
  } catch (const std::exception&) {
    throw UsageError("field '" + key + "': out of range: '" + text + "'");
  }
}

inline bool parse_bool(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t == "true" || t == "1" || t == "yes") return true;
  if (t == "false" || t == "0" || t == "no") return false;
  throw UsageError("field '" + key + "': expected true or false, got '" + text + "'");
}

inline std::string format_double(double x) {
  std::ostringstream os;
  os << std::setprecision(17) << x;
  return os.str();
}

}  // namespace detail

inline const std::set<std::string>& general_keys() {
  static const std::set<std::string> keys = {
      "command", "n_list",   "n",         "replicas",     "p",         "seed",        "out",
      "jobs",    "C",        "C1",        "C2",           "c1",        "quantiles",   "trunc_c",
      "q_list",  "k_n",      "identity_tol", "schur_tol", "cdf_tol",   "quad_tol",    "slope_min",
      "slope_max", "score_ratio_max"};
  return keys;
}

inline const std::set<std::string>& region_keys() {
  static const std::set<std::string> keys = {"A0", "v0", "v0_scale", "eps", "V",
                                             "A1", "u", "v", "v_scale", "random_z",
                                             "v_min", "allow_outside_region", "allow_p_above_cap"};
  return keys;
}

/// Resolves the sections of `file` for `command` into a validated config.
/// Unknown keys and sections are usage errors.
inline ExperimentConfig make_config(const IniFile& file, Command command) {
  std::set<std::string> known_sections = {"", "law", "region"};
  for (const auto& [c, name] : command_names()) known_sections.insert(name);
  for (const auto& [name, block] : file)
    if (!known_sections.count(name)) throw UsageError("unknown config section [" + name + "]");

  KeyValues merged;
  auto absorb = [&](const std::string& section) {
    auto it = file.find(section);
    if (it == file.end()) return;
    for (const auto& [k, v] : it->second) {
      if (!general_keys().count(k) && !region_keys().count(k))
        throw UsageError("unknown field '" + k + "' in [" + (section.empty() ? "global" : section) + "]");
      merged[k] = v;
    }
  };
  absorb("");
  absorb("region");
  for (const auto& [c, name] : command_names()) {
    if (file.count(name) && c != command) {
      // Still checked for typos even though it does not apply.
      for (const auto& [k, v] : file.at(name))
        if (!general_keys().count(k) && !region_keys().count(k))
          throw UsageError("unknown field '" + k + "' in [" + name + "]");
    }
  }
  absorb(to_string(command));
  if (auto it = file.find("region"); it != file.end())
    for (const auto& [k, v] : it->second)
      if (!region_keys().count(k)) throw UsageError("field '" + k + "' does not belong in [region]");

  ExperimentConfig cfg;
  cfg.command = command;
  if (merged.count("command") && parse_command(trim(merged["command"])) != command)
    throw UsageError("config names command '" + merged["command"] + "' but '" + to_string(command) + "' was requested");
  if (auto it = file.find("law"); it != file.end() && !it->second.empty()) cfg.law_block = it->second;
  (void)cfg.law();  // validates the law block

  auto num = [&](const char* key, double& dst) {
    if (merged.count(key)) dst = detail::parse_double(key, merged[key]);
  };
  auto opt = [&](const char* key, std::optional<double>& dst) {
    if (merged.count(key)) dst = detail::parse_double(key, merged[key]);
  };
  auto flag = [&](const char* key, bool& dst) {
    if (merged.count(key)) dst = detail::parse_bool(key, merged[key]);
  };
  auto count = [&](const char* key, std::size_t& dst) {
    if (merged.count(key)) dst = detail::parse_u64(key, merged[key]);
  };

  if (merged.count("n_list") && merged.count("n")) throw UsageError("give either 'n' or 'n_list', not both");
  const std::string nkey = merged.count("n_list") ? "n_list" : "n";
  if (merged.count(nkey)) {
    std::stringstream ss(merged[nkey]);
    std::string item;
    while (std::getline(ss, item, ','))
      if (!trim(item).empty()) cfg.n_list.push_back(detail::parse_u64(nkey, item));
  }
  if (cfg.n_list.empty()) throw UsageError("field 'n_list': must list at least one size");
  for (auto n : cfg.n_list)
    if (n == 0) throw UsageError("field 'n_list': sizes must be positive");
  count("replicas", cfg.replicas);
  if (cfg.replicas == 0) throw UsageError("field 'replicas': must be at least 1");
  if (merged.count("p")) cfg.p_list = detail::parse_double_list("p", merged["p"]);
  if (cfg.p_list.empty()) throw UsageError("field 'p': empty list");
  for (double p : cfg.p_list)
    if (!(p >= 1.0)) throw UsageError("field 'p': every p must be at least 1");
  if (merged.count("seed")) cfg.seed = detail::parse_u64("seed", merged["seed"]);
  if (merged.count("out")) cfg.out = trim(merged["out"]);
  count("jobs", cfg.jobs);

  num("A0", cfg.A0);
  opt("v0", cfg.v0);
  opt("v0_scale", cfg.v0_scale);
  opt("eps", cfg.eps);
  num("V", cfg.V);
  num("A1", cfg.A1);
  num("u", cfg.u);
  opt("v", cfg.v);
  opt("v_scale", cfg.v_scale);
  flag("random_z", cfg.random_z);
  num("v_min", cfg.v_min);
  flag("allow_outside_region", cfg.allow_outside_region);
  flag("allow_p_above_cap", cfg.allow_p_above_cap);
  if (cfg.v0 && cfg.v0_scale) throw UsageError("give either 'v0' or 'v0_scale', not both");
  if (cfg.v && cfg.v_scale) throw UsageError("give either 'v' or 'v_scale', not both");
  if (!(cfg.A0 > 0.0)) throw UsageError("field 'A0': must be positive");
  if (!(cfg.V > 0.0)) throw UsageError("field 'V': must be positive");
  if ((cfg.v && !(*cfg.v > 0.0)) || (cfg.v_scale && !(*cfg.v_scale > 0.0)))
    throw UsageError("field 'v': must be positive");
  if ((cfg.v0 && !(*cfg.v0 > 0.0)) || (cfg.v0_scale && !(*cfg.v0_scale > 0.0)))
    throw UsageError("field 'v0': must be positive");
  if (!(cfg.v_min > 0.0)) throw UsageError("field 'v_min': must be positive");

  num("C", cfg.C);
  num("C1", cfg.C1);
  num("C2", cfg.C2);
  num("c1", cfg.c1);
  if (!(cfg.C > 0.0 && cfg.c1 > 0.0)) throw UsageError("fields 'C' and 'c1': must be positive");
  if (merged.count("quantiles")) {
    const std::string q = trim(merged["quantiles"]);
    if (q == "upper")
      cfg.quantiles = QuantileConvention::upper;
    else if (q == "midpoint")
      cfg.quantiles = QuantileConvention::midpoint;
    else
      throw UsageError("field 'quantiles': expected upper or midpoint");
  }
  num("trunc_c", cfg.trunc_c);
  if (cfg.trunc_c < 0.0) throw UsageError("field 'trunc_c': must be non-negative");
  if (merged.count("q_list")) cfg.q_list = detail::parse_double_list("q_list", merged["q_list"]);
  count("k_n", cfg.k_n);
  if (cfg.k_n == 0) throw UsageError("field 'k_n': must be positive");
  num("identity_tol", cfg.identity_tol);
  num("schur_tol", cfg.schur_tol);
  num("cdf_tol", cfg.cdf_tol);
  num("quad_tol", cfg.quad_tol);
  if (!(cfg.quad_tol > 0.0)) throw UsageError("field 'quad_tol': must be positive");
  opt("slope_min", cfg.slope_min);
  opt("slope_max", cfg.slope_max);
  opt("score_ratio_max", cfg.score_ratio_max);
  return cfg;
}

/// Fields that determine results, in canonical form. Output path and job
/// count are excluded since they never change a statistic.
inline std::map<std::string, std::string> semantic_fields(const ExperimentConfig& c) {
  using detail::format_double;
  std::map<std::string, std::string> f;
  auto list = [](const auto& xs) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i) s += ',';
      if constexpr (std::is_floating_point_v<std::decay_t<decltype(xs[i])>>)
        s += format_double(xs[i]);
      else
        s += std::to_string(xs[i]);
    }
    return s;
  };
  auto maybe = [&](const char* key, const std::optional<double>& x) {
    if (x) f[key] = format_double(*x);
  };
  f["command"] = to_string(c.command);
  f["law"] = c.law().id();
  f["n_list"] = list(c.n_list);
  f["replicas"] = std::to_string(c.replicas);
  f["p"] = list(c.p_list);
  f["seed"] = c.seed ? std::to_string(*c.seed) : "";
  f["A0"] = format_double(c.A0);
  maybe("v0", c.v0);
  maybe("v0_scale", c.v0_scale);
  maybe("eps", c.eps);
  f["V"] = format_double(c.V);
  f["A1"] = format_double(c.A1);
  f["u"] = format_double(c.u);
  maybe("v", c.v);
  maybe("v_scale", c.v_scale);
  f["random_z"] = c.random_z ? "1" : "0";
  f["v_min"] = format_double(c.v_min);
  f["allow_outside_region"] = c.allow_outside_region ? "1" : "0";
  f["allow_p_above_cap"] = c.allow_p_above_cap ? "1" : "0";
  f["C"] = format_double(c.C);
  f["C1"] = format_double(c.C1);
  f["C2"] = format_double(c.C2);
  f["c1"] = format_double(c.c1);
  f["quantiles"] = c.quantiles == QuantileConvention::upper ? "upper" : "midpoint";
  f["trunc_c"] = format_double(c.trunc_c);
  f["q_list"] = list(c.q_list);
  f["k_n"] = std::to_string(c.k_n);
  f["identity_tol"] = format_double(c.identity_tol);
  f["schur_tol"] = format_double(c.schur_tol);
  f["cdf_tol"] = format_double(c.cdf_tol);
  f["quad_tol"] = format_double(c.quad_tol);
  maybe("slope_min", c.slope_min);
  maybe("slope_max", c.slope_max);
  maybe("score_ratio_max", c.score_ratio_max);
  return f;
}

/// FNV-1a over the sorted "key=value" lines of the semantic fields.
inline std::string config_hash(const ExperimentConfig& c) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (const auto& [k, v] : semantic_fields(c)) {
    for (unsigned char ch : k + "=" + v + "\n") {
      h ^= ch;
      h *= 0x100000001b3ULL;
    }
  }
  std::ostringstream os;
  os << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

}  // namespace rml
