#pragma once

// Experiment orchestration: runs one configured command, collects result
// records and replica vectors, and writes them to <out>/results.csv and
// <out>/replicas.csv. Replica r at size n always uses the sample seed
// seed_stream(seed_stream(master, n), r), whatever the job count.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "rml/bounds.hpp"
#include "rml/config.hpp"
#include "rml/ensemble.hpp"
#include "rml/error.hpp"
#include "rml/parallel.hpp"
#include "rml/resolvent.hpp"
#include "rml/results.hpp"
#include "rml/rng.hpp"
#include "rml/spectral.hpp"
#include "rml/stieltjes.hpp"

namespace rml {

struct RunOutput {
  std::vector<ResultRecord> records;
  std::vector<ReplicaRow> replicas;
  std::vector<std::string> warnings;

  std::size_t failures() const {
    return static_cast<std::size_t>(
        std::count_if(records.begin(), records.end(), [](const auto& r) { return r.pass && !*r.pass; }));
  }
};

namespace detail {

class Recorder {
 public:
  Recorder(const ExperimentConfig& cfg, RunOutput& out, std::string timestamp)
      : out_(out), timestamp_(std::move(timestamp)) {
    hash_ = config_hash(cfg);
    id_ = to_string(cfg.command) + "-" + hash_.substr(0, 8);
    law_ = cfg.law().id();
  }

  const std::string& id() const { return id_; }

  ResultRecord& add(std::size_t n, std::optional<double> p, std::size_t replicas, std::uint64_t seed,
                    std::string statistic, double value) {
    ResultRecord r;
    r.experiment_id = id_;
    r.timestamp = timestamp_;
    r.config_hash = hash_;
    r.law = law_;
    r.n = n;
    r.p = p;
    r.replicas = replicas;
    r.seed = seed;
    r.statistic = std::move(statistic);
    r.value = value;
    out_.records.push_back(std::move(r));
    return out_.records.back();
  }

  ResultRecord& check(std::size_t n, std::optional<double> p, std::size_t replicas, std::uint64_t seed,
                      std::string statistic, double value, double tolerance, bool pass) {
    auto& r = add(n, p, replicas, seed, std::move(statistic), value);
    r.tolerance = tolerance;
    r.pass = pass;
    return r;
  }

  void estimate(std::uint64_t seed, const std::string& statistic, const LpEstimate& e) {
    auto& r = add(e.n, e.p, e.replicas, seed, statistic + "_root", e.root);
    r.ci_low = e.ci_low;
    r.ci_high = e.ci_high;
    add(e.n, e.p, e.replicas, seed, statistic + "_mean_pow", e.mean_pow);
    add(e.n, e.p, e.replicas, seed, statistic + "_median", e.median);
    add(e.n, e.p, e.replicas, seed, statistic + "_max", e.max);
  }

  void replicas(std::size_t n, std::optional<double> p, const std::string& statistic,
                const std::vector<double>& values) {
    for (std::size_t i = 0; i < values.size(); ++i) out_.replicas.push_back({id_, statistic, n, p, i, values[i]});
  }

 private:
  RunOutput& out_;
  std::string timestamp_;
  std::string hash_, id_, law_;
};

inline std::uint64_t master_seed(const ExperimentConfig& cfg) {
  if (!cfg.seed) throw UsageError("field 'seed': required (no clock-based default)");
  return *cfg.seed;
}

struct IdentityInstance {
  std::uint64_t seed = 0;
  double u = 0.0, v = 0.0;
  std::map<std::string, double> residuals;  // exact identities
  double schur = 0.0;
  std::map<std::string, std::pair<double, bool>> inequalities;  // worst margin, pass
  double c0 = std::numeric_limits<double>::infinity();
  std::optional<TruncationImpact> truncation;
};

inline IdentityInstance identity_instance(const ExperimentConfig& cfg, const EntryLaw& law, std::size_t n,
                                          std::uint64_t seed) {
  IdentityInstance out;
  out.seed = seed;
  if (cfg.random_z) {
    CounterStream cs(seed, 0x7a);
    out.u = -3.0 + 6.0 * cs.next_uniform();
    out.v = cfg.v_min * std::pow(cfg.V / cfg.v_min, cs.next_uniform());
  } else {
    out.u = cfg.u;
    out.v = cfg.v ? *cfg.v : (cfg.v_scale ? *cfg.v_scale / static_cast<double>(n) : 1.0);
  }
  const ComplexPoint z(out.u, out.v);
  const WignerSample w = sample_wigner(law, n, seed);
  const ResolventBundle b = resolvent(w, z, n > 1 ? singleton_minors(n) : std::vector<IndexSet>{});
  const auto stats = epsilon_decomposition_all(w, b);
  double repr = 0.0, imp2 = 0.0;
  for (const auto& st : stats) {
    repr = std::max(repr, st.repr_residual);
    imp2 = std::max(imp2, st.eps4_eta_residual);
  }
  out.residuals["repr_residual"] = repr;
  out.residuals["eps4_eta_residual"] = imp2;
  out.residuals["lambda_residual"] = lambda_identity_check(b, stats).residual;
  out.residuals["trace_square_residual"] = trace_square_identity(b, stats).residual;
  out.residuals["m_trace_residual"] = std::abs(m_transform(eigenvalues(w), z) - b.m());

  const std::size_t j = seed % n;
  out.schur = schur_trace_identity(w, z, j).residual;

  std::vector<IndexSet> sets{{}};
  if (n >= 2) sets.push_back({j});
  if (n >= 3) sets.push_back({j, (j + 1) % n});
  for (const auto& J : sets) {
    const auto rep = verify_resolvent_inequalities(b, J);
    out.c0 = std::min(out.c0, rep.empirical_c0);
    for (const auto& c : rep.checks) {
      auto it = out.inequalities.find(c.name);
      if (it == out.inequalities.end())
        out.inequalities[c.name] = {c.margin, c.pass};
      else
        it->second = {std::min(it->second.first, c.margin), it->second.second && c.pass};
    }
  }
  if (cfg.trunc_c > 0.0) out.truncation = truncation_impact(w, truncate_entries(w, cfg.trunc_c), z);
  return out;
}

inline void run_verify_identities(const ExperimentConfig& cfg, Recorder& rec) {
  const EntryLaw law = cfg.law();
  const std::uint64_t master = master_seed(cfg);
  for (std::size_t n : cfg.n_list) {
    const std::uint64_t n_seed = seed_stream(master, n);
    const auto instances = parallel_map(cfg.replicas, cfg.jobs, [&](std::size_t r) {
      return identity_instance(cfg, law, n, seed_stream(n_seed, r));
    });
    for (const auto& in : instances) {
      for (const auto& [name, value] : in.residuals)
        rec.check(n, std::nullopt, 1, in.seed, name, value, cfg.identity_tol, value <= cfg.identity_tol);
      rec.check(n, std::nullopt, 1, in.seed, "schur_residual", in.schur, cfg.schur_tol, in.schur <= cfg.schur_tol);
      for (const auto& [name, mp] : in.inequalities) {
        const bool equality = name == "ward_identity";
        rec.check(n, std::nullopt, 1, in.seed, name + "_margin", mp.first,
                  equality ? kEqualityTol : kInequalityRelTol, mp.second);
      }
      rec.add(n, std::nullopt, 1, in.seed, "stability_c0", in.c0);
      if (in.truncation)
        rec.check(n, std::nullopt, 1, in.seed, "truncation_rank_margin", in.truncation->margin, 1e-10,
                  in.truncation->pass);
    }
  }
}

inline void run_delta(const ExperimentConfig& cfg, Recorder& rec, bool fit) {
  const EntryLaw law = cfg.law();
  const std::uint64_t master = master_seed(cfg);
  if (cfg.replicas < 2) throw UsageError("field 'replicas': L_p estimates need at least 2");
  std::map<double, std::vector<LpEstimate>> by_p;
  for (std::size_t n : cfg.n_list) {
    const std::uint64_t n_seed = seed_stream(master, n);
    const auto values = delta_replicas(law, n, cfg.replicas, n_seed, cfg.jobs);
    rec.replicas(n, std::nullopt, "delta", values);
    for (double p : cfg.p_list) {
      auto e = make_lp_estimate(values, p, n, bootstrap_seed(n_seed));
      rec.estimate(n_seed, "delta", e);
      by_p[p].push_back(std::move(e));
    }
  }
  if (!fit) return;
  for (const auto& [p, ests] : by_p) {
    const RateFit f = fit_rate(ests);
    if (cfg.slope_min || cfg.slope_max) {
      const double lo = cfg.slope_min.value_or(-std::numeric_limits<double>::infinity());
      const double hi = cfg.slope_max.value_or(std::numeric_limits<double>::infinity());
      auto& r = rec.check(0, p, cfg.replicas, master, "rate_slope", f.slope, 0.0, f.slope >= lo && f.slope <= hi);
      r.ci_low = lo;
      r.ci_high = hi;
    } else {
      rec.add(0, p, cfg.replicas, master, "rate_slope", f.slope);
    }
    rec.add(0, p, cfg.replicas, master, "rate_intercept", f.intercept);
    rec.add(0, p, cfg.replicas, master, "rate_slope_logcorrected", f.slope_logcorrected);
  }
}

inline void run_stieltjes_scan(const ExperimentConfig& cfg, Recorder& rec, RunOutput& out) {
  const EntryLaw law = cfg.law();
  const std::uint64_t master = master_seed(cfg);
  if (cfg.replicas < 2) throw UsageError("field 'replicas': L_p estimates need at least 2");
  std::map<double, std::vector<double>> scores;
  for (std::size_t n : cfg.n_list) {
    const ComplexPoint z(cfg.u, cfg.point_v(n, 10.0));
    StieltjesScanOptions opt;
    opt.region = RegionGParams::make(n, cfg.A0, cfg.region_v0(n, 10.0), cfg.V, cfg.eps);
    opt.A1 = cfg.A1;
    opt.allow_outside_region = cfg.allow_outside_region;
    opt.allow_p_above_cap = cfg.allow_p_above_cap;
    for (double p : cfg.p_list) (void)stieltjes_admissibility(n, z, p, opt);
    const std::uint64_t n_seed = seed_stream(master, n);
    const auto dev = stieltjes_deviations(law, n, z, cfg.replicas, n_seed, cfg.jobs);
    rec.replicas(n, std::nullopt, "stieltjes_deviation", dev);
    for (double p : cfg.p_list) {
      const auto est = stieltjes_estimate_from(dev, n, z, p, n_seed, opt);
      for (const auto& w : est.warnings) out.warnings.push_back("n=" + std::to_string(n) + ": " + w);
      rec.estimate(n_seed, "stieltjes", est.estimate);
      rec.add(n, p, cfg.replicas, n_seed, "stieltjes_score", est.score);
      rec.add(n, p, cfg.replicas, n_seed, "stieltjes_p_cap", est.p_cap);
      rec.add(n, p, cfg.replicas, n_seed, "in_region", est.in_region ? 1.0 : 0.0);
      scores[p].push_back(est.score);
    }
  }
  for (const auto& [p, s] : scores) {
    const auto [lo, hi] = std::minmax_element(s.begin(), s.end());
    const double ratio = *hi / *lo;
    if (cfg.score_ratio_max)
      rec.check(0, p, cfg.replicas, master, "score_ratio", ratio, *cfg.score_ratio_max, ratio <= *cfg.score_ratio_max);
    else
      rec.add(0, p, cfg.replicas, master, "score_ratio", ratio);
  }
}

inline void run_smoothing(const ExperimentConfig& cfg, Recorder& rec, RunOutput& out) {
  const EntryLaw law = cfg.law();
  const std::uint64_t master = master_seed(cfg);
  for (std::size_t n : cfg.n_list) {
    const RegionGParams params = RegionGParams::make(n, cfg.A0, cfg.region_v0(n), cfg.V, cfg.eps);
    params.validate();
    const std::uint64_t n_seed = seed_stream(master, n);
    const auto parts = parallel_map(cfg.replicas, cfg.jobs, [&](std::size_t r) {
      return smoothing_breakdown(eigenvalues(sample_wigner(law, n, seed_stream(n_seed, r))), params, cfg.quad_tol,
                                 cfg.k_n);
    });
    const double R = static_cast<double>(parts.size());
    double h = 0, vert = 0, delta = 0, implied = 0, implied_max = -std::numeric_limits<double>::infinity();
    bool nonneg = true;
    std::size_t converged = 0;
    std::vector<double> implied_values;
    for (const auto& b : parts) {
      h += b.term_horizontal / R;
      vert += b.term_vertical_sup / R;
      delta += b.delta_actual / R;
      implied += b.implied_constant / R;
      implied_max = std::max(implied_max, b.implied_constant);
      implied_values.push_back(b.implied_constant);
      nonneg = nonneg && b.term_horizontal >= 0 && b.term_vertical_sup >= 0 && b.term_v0 >= 0 && b.term_eps >= 0 &&
               b.delta_actual > 0;
      if (b.converged) ++converged;
    }
    if (converged < parts.size())
      out.warnings.push_back("n=" + std::to_string(n) + ": quadrature did not converge on " +
                             std::to_string(parts.size() - converged) + " replicas");
    rec.add(n, 1.0, cfg.replicas, n_seed, "term_horizontal_mean", h);
    rec.add(n, 1.0, cfg.replicas, n_seed, "term_v0", params.v0);
    rec.add(n, 1.0, cfg.replicas, n_seed, "term_eps", std::pow(params.eps, 1.5));
    rec.add(n, 1.0, cfg.replicas, n_seed, "term_vertical_sup_mean", vert);
    rec.add(n, 1.0, cfg.replicas, n_seed, "delta_actual_mean", delta);
    rec.add(n, 1.0, cfg.replicas, n_seed, "smoothing_rhs_mean",
            h + cfg.C1 * params.v0 + cfg.C2 * std::pow(params.eps, 1.5) + vert);
    rec.add(n, 1.0, cfg.replicas, n_seed, "implied_constant_mean", implied);
    rec.add(n, 1.0, cfg.replicas, n_seed, "implied_constant_max", implied_max);
    rec.add(n, 1.0, cfg.replicas, n_seed, "quadrature_converged_fraction", static_cast<double>(converged) / R);
    rec.check(n, 1.0, cfg.replicas, n_seed, "terms_nonnegative", nonneg ? 1.0 : 0.0, 0.0, nonneg);
    rec.replicas(n, 1.0, "implied_constant", implied_values);
  }
}

inline void run_rigidity(const ExperimentConfig& cfg, Recorder& rec) {
  const EntryLaw law = cfg.law();
  const std::uint64_t master = master_seed(cfg);
  const auto rows = rigidity_experiment(law, cfg.n_list, cfg.replicas, cfg.C, cfg.c1, master, cfg.quantiles, cfg.jobs);
  for (const auto& row : rows) {
    const std::uint64_t n_seed = seed_stream(master, row.n);
    const auto q = semicircle_quantiles(row.n, cfg.quantiles);
    const auto synthetic = rigidity_check(Spectrum::from_values(q.gammas), q, cfg.C, cfg.c1);
    rec.check(row.n, std::nullopt, 1, 0, "synthetic_max_rho", synthetic.max_rho, 0.0,
              synthetic.max_rho == 0.0 && synthetic.violations.empty());
    rec.add(row.n, std::nullopt, row.replicas, n_seed, "empty_window", row.empty_window ? 1.0 : 0.0);
    if (row.empty_window) continue;
    rec.add(row.n, std::nullopt, row.replicas, n_seed, "window_lo", static_cast<double>(row.window_lo));
    rec.add(row.n, std::nullopt, row.replicas, n_seed, "window_hi", static_cast<double>(row.window_hi));
    rec.add(row.n, std::nullopt, row.replicas, n_seed, "max_rho_median", row.median_max_rho);
    rec.add(row.n, std::nullopt, row.replicas, n_seed, "max_rho_p95", row.p95_max_rho);
    rec.add(row.n, std::nullopt, row.replicas, n_seed, "max_rho_max", row.max_max_rho);
    rec.add(row.n, std::nullopt, row.replicas, n_seed, "violation_fraction", row.violation_fraction);
    rec.replicas(row.n, std::nullopt, "max_rho", row.max_rho);
  }
}

inline void run_epsilon_moments(const ExperimentConfig& cfg, Recorder& rec) {
  const EntryLaw law = cfg.law();
  const std::uint64_t master = master_seed(cfg);
  const double v = cfg.v ? *cfg.v : (cfg.v_scale ? 0.0 : 4.0);
  if (cfg.v_scale) throw UsageError("epsilon-moments takes an absolute 'v'");
  if (!(v >= 1.0)) throw UsageError("epsilon-moments: v must be at least 1");
  const auto rows = epsilon_moment_sweep(law, cfg.n_list, ComplexPoint(cfg.u, v), cfg.q_list, cfg.replicas, master,
                                         cfg.jobs);
  for (const auto& row : rows) {
    const std::uint64_t n_seed = seed_stream(master, row.n);
    rec.add(row.n, row.q, cfg.replicas, n_seed, row.statistic + "_moment", row.mean_pow);
    rec.add(row.n, row.q, cfg.replicas, n_seed, row.statistic + "_normalized", row.normalized);
  }
}

}  // namespace detail

/// Runs the configured command. Usage problems throw UsageError; failed hard
/// checks are reported through records with pass = false.
inline RunOutput run(const ExperimentConfig& cfg, const std::string& timestamp = utc_timestamp()) {
  RunOutput out;
  detail::Recorder rec(cfg, out, timestamp);
  switch (cfg.command) {
    case Command::verify_identities: detail::run_verify_identities(cfg, rec); break;
    case Command::delta_sweep: detail::run_delta(cfg, rec, false); break;
    case Command::rate_fit: detail::run_delta(cfg, rec, true); break;
    case Command::stieltjes_scan: detail::run_stieltjes_scan(cfg, rec, out); break;
    case Command::smoothing: detail::run_smoothing(cfg, rec, out); break;
    case Command::rigidity: detail::run_rigidity(cfg, rec); break;
    case Command::epsilon_moments: detail::run_epsilon_moments(cfg, rec); break;
  }
  return out;
}

inline void write_outputs(const std::filesystem::path& dir, const RunOutput& out) {
  std::vector<std::string> rows;
  for (const auto& r : out.records) rows.push_back(to_csv(r));
  atomic_append(dir / "results.csv", kResultsHeader, rows);
  if (!out.replicas.empty()) {
    rows.clear();
    for (const auto& r : out.replicas) rows.push_back(to_csv(r));
    atomic_append(dir / "replicas.csv", kReplicasHeader, rows);
  }
}

/// One line per statistic (and n): count, failures and the value range.
inline void print_summary(std::ostream& os, const RunOutput& out) {
  struct Agg {
    std::size_t count = 0, failed = 0;
    double lo = std::numeric_limits<double>::infinity(), hi = -std::numeric_limits<double>::infinity();
    bool checked = false;
  };
  std::vector<std::pair<std::string, Agg>> order;
  std::map<std::string, std::size_t> index;
  for (const auto& r : out.records) {
    std::string key = r.statistic + (r.n ? " n=" + std::to_string(r.n) : "");
    if (r.p && r.statistic.find("moment") == std::string::npos && r.statistic.find("normalized") == std::string::npos)
      key += " p=" + detail::csv_number(*r.p);
    else if (r.p)
      key += " q=" + detail::csv_number(*r.p);
    auto [it, fresh] = index.emplace(key, order.size());
    if (fresh) order.push_back({key, {}});
    auto& a = order[it->second].second;
    ++a.count;
    a.lo = std::min(a.lo, r.value);
    a.hi = std::max(a.hi, r.value);
    if (r.pass) {
      a.checked = true;
      if (!*r.pass) ++a.failed;
    }
  }
  os.precision(6);
  for (const auto& [key, a] : order) {
    os << key << ": ";
    if (a.count == 1)
      os << a.lo;
    else
      os << "[" << a.lo << ", " << a.hi << "] over " << a.count;
    if (a.checked) os << (a.failed ? "  FAIL x" + std::to_string(a.failed) : "  ok");
    os << '\n';
  }
  for (const auto& w : out.warnings) os << "warning: " << w << '\n';
}

enum class PlotKind { rate, region, histogram };

inline PlotKind parse_plot_kind(const std::string& s) {
  if (s == "rate") return PlotKind::rate;
  if (s == "region") return PlotKind::region;
  if (s == "histogram") return PlotKind::histogram;
  throw UsageError("unknown plot kind '" + s + "' (rate, region, histogram)");
}

struct PlotPoint {
  double x = 0.0;
  double y = 0.0;
  std::string series;
};

inline std::string plot_csv(const std::vector<PlotPoint>& pts) {
  std::string s = "x,y,series\n";
  for (const auto& p : pts) s += detail::csv_number(p.x) + "," + detail::csv_number(p.y) + "," + p.series + "\n";
  return s;
}

/// log n against log root for `statistic` rows (one series per p), plus the
/// fitted line at the same abscissae.
inline std::vector<PlotPoint> plot_rate(const CsvTable& results, const std::string& statistic = "delta_root") {
  const auto cs = results.column("statistic"), cn = results.column("n"), cp = results.column("p"),
             cv = results.column("value");
  std::map<std::string, std::pair<std::vector<std::size_t>, std::vector<double>>> series;
  for (const auto& row : results.rows) {
    if (row[cs] != statistic) continue;
    auto& s = series[row[cp]];
    s.first.push_back(static_cast<std::size_t>(std::stoull(row[cn])));
    s.second.push_back(std::stod(row[cv]));
  }
  if (series.empty()) throw UsageError("no rows with statistic '" + statistic + "'");
  std::vector<PlotPoint> pts;
  for (const auto& [p, data] : series) {
    const RateFit f = fit_rate(data.first, data.second);
    const std::string tag = "p=" + (p.empty() ? std::string("na") : p);
    for (std::size_t i = 0; i < data.first.size(); ++i)
      pts.push_back({std::log(static_cast<double>(data.first[i])), std::log(data.second[i]), "observed " + tag});
    for (std::size_t i = 0; i < data.first.size(); ++i) {
      const double x = std::log(static_cast<double>(data.first[i]));
      pts.push_back({x, f.intercept + f.slope * x, "fit " + tag});
    }
  }
  return pts;
}

/// Lower boundary of G located by bisection on region_contains along
/// `columns` + 1 equally spaced u in the band, plus the top edge at V.
inline std::vector<PlotPoint> plot_region(const RegionGParams& params, std::size_t columns = 200) {
  params.validate();
  std::vector<PlotPoint> pts;
  const double a = -2.0 + params.eps, b = 2.0 - params.eps;
  for (std::size_t i = 0; i <= columns; ++i) {
    const double u = a + (b - a) * static_cast<double>(i) / static_cast<double>(columns);
    if (!region_contains(params, ComplexPoint(u, params.V))) continue;
    double lo = 1e-300, hi = params.V;
    for (int it = 0; it < 200 && hi - lo > 1e-14 * hi; ++it) {
      const double mid = 0.5 * (lo + hi);
      (region_contains(params, ComplexPoint(u, mid)) ? hi : lo) = mid;
    }
    pts.push_back({u, hi, "lower"});
  }
  pts.push_back({a, params.V, "upper"});
  pts.push_back({b, params.V, "upper"});
  return pts;
}

/// Bin counts of replica values for `statistic`, one series per n.
inline std::vector<PlotPoint> plot_histogram(const CsvTable& replicas, const std::string& statistic = "",
                                             std::size_t bins = 20) {
  if (bins == 0) throw UsageError("histogram: bins must be positive");
  const auto cs = replicas.column("statistic"), cn = replicas.column("n"), cv = replicas.column("value");
  std::string stat = statistic;
  if (stat.empty() && !replicas.rows.empty()) stat = replicas.rows.front()[cs];
  std::map<std::size_t, std::vector<double>> by_n;
  for (const auto& row : replicas.rows)
    if (row[cs] == stat) by_n[static_cast<std::size_t>(std::stoull(row[cn]))].push_back(std::stod(row[cv]));
  if (by_n.empty()) throw UsageError("no replica rows with statistic '" + stat + "'");
  std::vector<PlotPoint> pts;
  for (const auto& [n, vals] : by_n) {
    const auto [mn, mx] = std::minmax_element(vals.begin(), vals.end());
    const double lo = *mn, width = (*mx > *mn ? *mx - *mn : 1.0) / static_cast<double>(bins);
    std::vector<std::size_t> counts(bins, 0);
    for (double v : vals) counts[std::min(bins - 1, static_cast<std::size_t>((v - lo) / width))]++;
    for (std::size_t k = 0; k < bins; ++k)
      pts.push_back({lo + (static_cast<double>(k) + 0.5) * width, static_cast<double>(counts[k]),
                     stat + " n=" + std::to_string(n)});
  }
  return pts;
}

}  // namespace rml
