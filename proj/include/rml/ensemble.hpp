#pragma once

// Wigner samples X (symmetric, unscaled entries) and the truncation ->
// recentering -> rescaling pipeline. W = X / sqrt(n) is exposed through
// accessors; entries are stored once (upper triangle).

#include <cmath>
#include <cstdint>
#include <istream>
#include <memory>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rml/eigensolver.hpp"
#include "rml/entry_law.hpp"
#include "rml/error.hpp"
#include "rml/rng.hpp"

namespace rml {

enum class Stage { raw, truncated, recentered_rescaled };

inline const char* to_string(Stage s) {
  switch (s) {
    case Stage::raw: return "raw";
    case Stage::truncated: return "truncated";
    case Stage::recentered_rescaled: return "recentered_rescaled";
  }
  return "?";
}

class WignerSample {
 public:
  /// Takes the packed upper triangle, column by column: entry (j, k), j <= k,
  /// lives at k (k + 1) / 2 + j.
  WignerSample(std::size_t n, std::vector<double> packed, std::uint64_t seed, std::string law_id, Stage stage)
      : n_(n), packed_(std::move(packed)), seed_(seed), law_id_(std::move(law_id)), stage_(stage) {
    if (n_ == 0) throw UsageError("WignerSample: n must be positive");
    if (packed_.size() != n_ * (n_ + 1) / 2) throw UsageError("WignerSample: packed size mismatch");
  }

  std::size_t n() const noexcept { return n_; }
  std::uint64_t seed() const noexcept { return seed_; }
  const std::string& law_id() const noexcept { return law_id_; }
  Stage stage() const noexcept { return stage_; }
  /// Cut level c n^{1/4} used by the truncation stage (0 when raw).
  double cut() const noexcept { return cut_; }
  /// Number of upper-triangle entries zeroed by truncation.
  std::size_t zeroed_entries() const noexcept { return zeroed_; }

  static constexpr std::size_t packed_index(std::size_t j, std::size_t k) noexcept {
    return j <= k ? k * (k + 1) / 2 + j : j * (j + 1) / 2 + k;
  }

  double x(std::size_t j, std::size_t k) const noexcept { return packed_[packed_index(j, k)]; }
  double w(std::size_t j, std::size_t k) const noexcept { return x(j, k) / std::sqrt(static_cast<double>(n_)); }
  const std::vector<double>& packed() const noexcept { return packed_; }

  double trace_w() const noexcept {
    double s = 0.0;
    for (std::size_t j = 0; j < n_; ++j) s += x(j, j);
    return s / std::sqrt(static_cast<double>(n_));
  }

  /// Dense copy of W = X / sqrt(n).
  DenseMatrix scaled_dense() const {
    DenseMatrix a(n_);
    const double inv = 1.0 / std::sqrt(static_cast<double>(n_));
    for (std::size_t k = 0; k < n_; ++k)
      for (std::size_t j = 0; j <= k; ++j) a(j, k) = a(k, j) = packed_[packed_index(j, k)] * inv;
    return a;
  }

 private:
  friend WignerSample truncate_entries(const WignerSample&, double);
  friend WignerSample recenter_rescale(const WignerSample&, const EntryLaw&, double);

  std::size_t n_;
  std::vector<double> packed_;
  std::uint64_t seed_;
  std::string law_id_;
  Stage stage_;
  double cut_ = 0.0;
  std::size_t zeroed_ = 0;
};

/// Upper triangle i.i.d. from `law`. Entry (j, k) is drawn from the counter
/// (j, k) of the stream keyed by `seed`, so the fill order is irrelevant.
inline WignerSample sample_wigner(const EntryLaw& law, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw UsageError("sample_wigner: n must be positive");
  if (std::fabs(law.mean()) > kStandardizationTol || std::fabs(law.variance() - 1.0) > kStandardizationTol)
    throw UsageError("sample_wigner: law '" + law.id() + "' is not standardized");
  std::vector<double> packed(n * (n + 1) / 2);
  for (std::size_t k = 0; k < n; ++k)
    for (std::size_t j = 0; j <= k; ++j)
      packed[WignerSample::packed_index(j, k)] =
          law.sample(cell_uniform(seed, static_cast<std::uint32_t>(j), static_cast<std::uint32_t>(k)));
  return WignerSample(n, std::move(packed), seed, law.id(), Stage::raw);
}

inline double truncation_level(std::size_t n, double c) { return c * std::pow(static_cast<double>(n), 0.25); }

/// Zeroes entries with |X| > c n^{1/4}.
inline WignerSample truncate_entries(const WignerSample& sample, double c) {
  if (sample.stage() != Stage::raw) throw UsageError("truncate_entries: sample is not raw");
  if (!(c > 0.0)) throw UsageError("truncate_entries: c must be positive");
  const double cut = truncation_level(sample.n(), c);
  std::vector<double> packed = sample.packed();
  std::size_t zeroed = 0;
  for (double& v : packed) {
    if (std::fabs(v) > cut) {
      v = 0.0;
      ++zeroed;
    }
  }
  WignerSample out(sample.n(), std::move(packed), sample.seed(), sample.law_id(), Stage::truncated);
  out.cut_ = cut;
  out.zeroed_ = zeroed;
  return out;
}

/// Replaces each truncated entry by (X - m) / sigma, where m and sigma^2 are
/// the exact mean and variance of X 1{|X| <= c n^{1/4}} under `law`.
inline WignerSample recenter_rescale(const WignerSample& sample, const EntryLaw& law, double c) {
  if (sample.stage() != Stage::truncated) throw UsageError("recenter_rescale: sample is not truncated");
  const double cut = truncation_level(sample.n(), c);
  if (std::fabs(cut - sample.cut()) > 1e-12 * cut)
    throw UsageError("recenter_rescale: c does not match the truncation level of the sample");
  const EntryLaw derived = law.truncated_rescaled(cut);
  const auto& st = *derived.truncation();
  std::vector<double> packed = sample.packed();
  for (double& v : packed) v = (v - st.shift) / st.scale;
  WignerSample out(sample.n(), std::move(packed), sample.seed(), derived.id(), Stage::recentered_rescaled);
  out.cut_ = cut;
  out.zeroed_ = sample.zeroed_entries();
  return out;
}

struct MomentReport {
  double mean = 0.0;
  double variance = 0.0;
  double mu4 = 0.0;
  double mu8 = 0.0;
  double support = 0.0;     // sup |X|
  double allowed = 0.0;     // D n^{1/4}
  bool mean_ok = false;     // |mean| <= tol
  bool variance_ok = false; // |variance - 1| <= tol
  bool mu4_ok = false;      // finite and >= 1
  bool mu8_ok = false;      // finite and >= mu4^2
  bool support_ok = false;  // support <= D n^{1/4}

  bool all_ok() const noexcept { return mean_ok && variance_ok && mu4_ok && mu8_ok && support_ok; }
};

inline MomentReport verify_moment_conditions(const EntryLaw& law, std::size_t n, double D = 1.0,
                                             double tol = kStandardizationTol) {
  MomentReport r;
  r.mean = law.mean();
  r.variance = law.variance();
  r.mu4 = law.mu4();
  r.mu8 = law.mu8();
  r.support = law.support_bound();
  r.allowed = D * std::pow(static_cast<double>(n), 0.25);
  r.mean_ok = std::fabs(r.mean) <= tol;
  r.variance_ok = std::fabs(r.variance - 1.0) <= tol;
  r.mu4_ok = std::isfinite(r.mu4) && r.mu4 >= 1.0 - tol;
  r.mu8_ok = std::isfinite(r.mu8) && r.mu8 >= r.mu4 * r.mu4 * (1.0 - tol);
  r.support_ok = r.support <= r.allowed * (1.0 + 1e-15);
  return r;
}

/// Debug dump: one line per stored entry, "j,k,X_jk" (0-based, j <= k).
inline void write_triplets(std::ostream& os, const WignerSample& s) {
  os << "j,k,x\n";
  os.precision(17);
  for (std::size_t k = 0; k < s.n(); ++k)
    for (std::size_t j = 0; j <= k; ++j) os << j << ',' << k << ',' << s.x(j, k) << '\n';
}

inline WignerSample read_triplets(std::istream& is, std::uint64_t seed = 0, const std::string& law_id = "file",
                                  Stage stage = Stage::raw) {
  std::string line;
  if (!std::getline(is, line)) throw UsageError("read_triplets: empty input");
  struct T {
    std::size_t j, k;
    double x;
  };
  std::vector<T> rows;
  std::size_t n = 0;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ss(line);
    T t{};
    char c1 = 0, c2 = 0;
    if (!(ss >> t.j >> c1 >> t.k >> c2 >> t.x) || c1 != ',' || c2 != ',')
      throw UsageError("read_triplets: malformed line '" + line + "'");
    if (t.j > t.k) std::swap(t.j, t.k);
    n = std::max(n, t.k + 1);
    rows.push_back(t);
  }
  if (n == 0) throw UsageError("read_triplets: no entries");
  std::vector<double> packed(n * (n + 1) / 2, 0.0);
  for (const auto& t : rows) packed[WignerSample::packed_index(t.j, t.k)] = t.x;
  return WignerSample(n, std::move(packed), seed, law_id, stage);
}

}  // namespace rml
