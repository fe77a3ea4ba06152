#pragma once

// Standardized entry distributions for Wigner matrices, with closed-form
// moments. A law may carry one truncation stage
//   X -> (X 1{|X| <= cut} - shift) / scale
// whose moments are still exact (binomial expansion over truncated raw moments).

#include <algorithm>
#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <numbers>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <boost/math/special_functions/erf.hpp>

#include "rml/error.hpp"

namespace rml {

enum class LawKind { rademacher, two_point, truncated_gaussian, discrete_table };

struct Atom {
  double value;
  double prob;
};

/// The truncation stage applied on top of a base law.
struct TruncationStage {
  double cut;    // entries with |X| > cut are zeroed
  double shift;  // E[X 1{|X| <= cut}]
  double scale;  // sqrt(Var[X 1{|X| <= cut}])
};

inline constexpr double kStandardizationTol = 1e-10;

namespace detail {

inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * std::numbers::pi); }

// I_k(t) = int_{-t}^{t} y^k phi(y) dy for the standard normal, t may be +inf.
inline double gaussian_central_moment(int k, double t) {
  if (k % 2 == 1) return 0.0;
  if (std::isinf(t)) {
    double m = 1.0;
    for (int j = k - 1; j > 0; j -= 2) m *= j;
    return m;
  }
  double m = std::erf(t / std::numbers::sqrt2);
  const double tail = 2.0 * normal_pdf(t);
  for (int j = 2; j <= k; j += 2) m = (j - 1) * m - tail * std::pow(t, j - 1);
  return m;
}

inline double binomial(int n, int k) {
  double b = 1.0;
  for (int i = 1; i <= k; ++i) b = b * (n - k + i) / i;
  return b;
}

}  // namespace detail

class EntryLaw {
 public:
  static EntryLaw rademacher() { return EntryLaw(LawKind::rademacher, {{-1.0, 0.5}, {1.0, 0.5}}); }

  /// Two-point law taking sqrt((1-p)/p) with probability p and -sqrt(p/(1-p)) otherwise.
  static EntryLaw two_point(double p_high) {
    if (!(p_high > 0.0 && p_high < 1.0)) throw UsageError("two_point: probability must lie in (0, 1)");
    EntryLaw law(LawKind::two_point,
                 {{-std::sqrt(p_high / (1.0 - p_high)), 1.0 - p_high}, {std::sqrt((1.0 - p_high) / p_high), p_high}});
    law.param_ = p_high;
    return law;
  }

  /// Standard normal conditioned on |Y| <= cutoff, divided by its standard
  /// deviation. cutoff = +inf gives the Gaussian itself.
  static EntryLaw truncated_gaussian(double cutoff) {
    if (!(cutoff > 0.0)) throw UsageError("truncated_gaussian: cutoff must be positive");
    EntryLaw law(LawKind::truncated_gaussian, {});
    law.param_ = cutoff;
    law.gauss_mass_ = detail::gaussian_central_moment(0, cutoff);
    law.gauss_sd_ = std::sqrt(detail::gaussian_central_moment(2, cutoff) / law.gauss_mass_);
    return law;
  }

  /// User table; must already be standardized (mean 0, variance 1 within 1e-10).
  static EntryLaw table(std::vector<Atom> atoms) {
    if (atoms.empty()) throw UsageError("table: no atoms");
    double total = 0.0, mean = 0.0, second = 0.0;
    for (const auto& a : atoms) {
      if (!(a.prob >= 0.0) || !std::isfinite(a.value)) throw UsageError("table: invalid atom");
      total += a.prob;
      mean += a.prob * a.value;
      second += a.prob * a.value * a.value;
    }
    if (std::fabs(total - 1.0) > kStandardizationTol) throw UsageError("table: probabilities do not sum to 1");
    if (std::fabs(mean) > kStandardizationTol || std::fabs(second - 1.0) > kStandardizationTol) {
      std::ostringstream os;
      os << "table: law is not standardized (mean " << mean << ", variance " << second - mean * mean << ")";
      throw UsageError(os.str());
    }
    std::sort(atoms.begin(), atoms.end(), [](const Atom& x, const Atom& y) { return x.value < y.value; });
    return EntryLaw(LawKind::discrete_table, std::move(atoms));
  }

  LawKind kind() const noexcept { return kind_; }
  double parameter() const noexcept { return param_; }
  const std::optional<TruncationStage>& truncation() const noexcept { return stage_; }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }

  std::string id() const {
    std::ostringstream os;
    os.precision(17);
    switch (kind_) {
      case LawKind::rademacher: os << "rademacher"; break;
      case LawKind::two_point: os << "two_point(p=" << param_ << ")"; break;
      case LawKind::truncated_gaussian: os << "truncated_gaussian(cutoff=" << param_ << ")"; break;
      case LawKind::discrete_table:
        os << "table(";
        for (std::size_t i = 0; i < atoms_.size(); ++i) os << (i ? ";" : "") << atoms_[i].value << ":" << atoms_[i].prob;
        os << ")";
        break;
    }
    if (stage_) os << "|trunc(cut=" << stage_->cut << ")";
    return os.str();
  }

  /// E[X^k 1{|X| <= cut}] for the base law (before any truncation stage).
  double base_truncated_moment(int k, double cut) const {
    if (kind_ == LawKind::truncated_gaussian) {
      const double t = std::min(param_, cut * gauss_sd_);
      return detail::gaussian_central_moment(k, t) / (gauss_mass_ * std::pow(gauss_sd_, k));
    }
    double m = 0.0;
    for (const auto& a : atoms_)
      if (std::fabs(a.value) <= cut) m += a.prob * std::pow(a.value, k);
    return m;
  }

  /// P(|X| > cut) for the base law.
  double base_tail_probability(double cut) const {
    if (kind_ == LawKind::truncated_gaussian) {
      const double t = std::min(param_, cut * gauss_sd_);
      return (gauss_mass_ - detail::gaussian_central_moment(0, t)) / gauss_mass_;
    }
    double p = 0.0;
    for (const auto& a : atoms_)
      if (std::fabs(a.value) > cut) p += a.prob;
    return p;
  }

  /// E X^k, exact.
  double raw_moment(int k) const {
    constexpr double inf = std::numeric_limits<double>::infinity();
    if (!stage_) return base_truncated_moment(k, inf);
    // E[(Xhat - a)^k] / b^k with E[Xhat^0] = 1 (zeroed entries count).
    double acc = 0.0;
    for (int i = 0; i <= k; ++i) {
      const double xi = i == 0 ? 1.0 : base_truncated_moment(i, stage_->cut);
      acc += detail::binomial(k, i) * xi * std::pow(-stage_->shift, k - i);
    }
    return acc / std::pow(stage_->scale, k);
  }

  double mean() const { return raw_moment(1); }
  double variance() const {
    const double m = mean();
    return raw_moment(2) - m * m;
  }
  double mu4() const { return raw_moment(4); }
  double mu8() const { return raw_moment(8); }

  /// sup |X| over the support; +inf when unbounded.
  double support_bound() const {
    double base = 0.0;
    if (kind_ == LawKind::truncated_gaussian) {
      base = param_ / gauss_sd_;
    } else {
      for (const auto& a : atoms_) base = std::max(base, std::fabs(a.value));
    }
    if (!stage_) return base;
    if (kind_ != LawKind::truncated_gaussian) {
      double b = std::fabs(stage_->shift);  // a zeroed entry
      for (const auto& a : atoms_)
        if (std::fabs(a.value) <= stage_->cut) b = std::max(b, std::fabs(a.value - stage_->shift));
      return b / stage_->scale;
    }
    const double kept = std::min(base, stage_->cut);
    return (kept + std::fabs(stage_->shift)) / stage_->scale;
  }

  /// Inverse-transform draw from a uniform in (0, 1).
  double sample(double u) const {
    double x = 0.0;
    if (kind_ == LawKind::truncated_gaussian) {
      // Y = Phi^{-1}(Phi(-T) + u (Phi(T) - Phi(-T))), written with erf_inv for symmetry.
      const double y = std::numbers::sqrt2 * boost::math::erf_inv((2.0 * u - 1.0) * gauss_mass_);
      x = y / gauss_sd_;
    } else {
      double acc = 0.0;
      x = atoms_.back().value;
      for (const auto& a : atoms_) {
        acc += a.prob;
        if (u < acc) {
          x = a.value;
          break;
        }
      }
    }
    return stage_ ? apply_stage(x) : x;
  }

  double apply_stage(double x) const {
    const double kept = std::fabs(x) <= stage_->cut ? x : 0.0;
    return (kept - stage_->shift) / stage_->scale;
  }

  /// Law of (X 1{|X| <= cut} - m) / sigma with m, sigma^2 the exact mean and
  /// variance of the truncated variable.
  EntryLaw truncated_rescaled(double cut) const {
    if (stage_) throw UsageError("truncated_rescaled: law already carries a truncation stage");
    if (!(cut > 0.0)) throw UsageError("truncated_rescaled: cut must be positive");
    const double m = base_truncated_moment(1, cut);
    const double var = base_truncated_moment(2, cut) - m * m;
    if (var < 1e-8) throw NumericalError("truncated_rescaled: degenerate truncation (variance < 1e-8)");
    EntryLaw out = *this;
    out.stage_ = TruncationStage{cut, m, std::sqrt(var)};
    return out;
  }

 private:
  EntryLaw(LawKind kind, std::vector<Atom> atoms) : kind_(kind), atoms_(std::move(atoms)) {}

  LawKind kind_;
  std::vector<Atom> atoms_;
  double param_ = 0.0;
  double gauss_mass_ = 1.0;  // P(|Y| <= T)
  double gauss_sd_ = 1.0;    // sd of Y given |Y| <= T
  std::optional<TruncationStage> stage_;
};

using KeyValues = std::map<std::string, std::string>;

namespace detail {

inline double parse_double(const std::string& key, const std::string& text) {
  std::string t = text;
  t.erase(std::remove_if(t.begin(), t.end(), [](unsigned char ch) { return std::isspace(ch); }), t.end());
  if (t == "inf" || t == "+inf" || t == "infinity") return std::numeric_limits<double>::infinity();
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used != t.size()) throw std::invalid_argument(t);
    return v;
  } catch (const std::exception&) {
    throw UsageError("field '" + key + "': not a number: '" + text + "'");
  }
}

inline std::vector<double> parse_double_list(const std::string& key, const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (item.find_first_not_of(" \t") == std::string::npos) continue;
    out.push_back(parse_double(key, item));
  }
  return out;
}

}  // namespace detail

/// Builds a law from a config block: kind = rademacher | two_point | gaussian |
/// truncated_gaussian | table, plus p / cutoff / values+probs as applicable.
inline EntryLaw law_from_config(const KeyValues& block) {
  auto get = [&](const std::string& key) -> const std::string& {
    auto it = block.find(key);
    if (it == block.end()) throw UsageError("law: missing field '" + key + "'");
    return it->second;
  };
  const std::string& kind = get("kind");
  if (kind == "rademacher") return EntryLaw::rademacher();
  if (kind == "two_point") return EntryLaw::two_point(detail::parse_double("p", get("p")));
  if (kind == "gaussian") return EntryLaw::truncated_gaussian(std::numeric_limits<double>::infinity());
  if (kind == "truncated_gaussian") return EntryLaw::truncated_gaussian(detail::parse_double("cutoff", get("cutoff")));
  if (kind == "table") {
    const auto values = detail::parse_double_list("values", get("values"));
    const auto probs = detail::parse_double_list("probs", get("probs"));
    if (values.size() != probs.size()) throw UsageError("law: 'values' and 'probs' differ in length");
    std::vector<Atom> atoms;
    for (std::size_t i = 0; i < values.size(); ++i) atoms.push_back({values[i], probs[i]});
    return EntryLaw::table(std::move(atoms));
  }
  throw UsageError("law: unknown kind '" + kind + "'");
}

}  // namespace rml
