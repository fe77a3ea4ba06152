// rml <command> --config <file> [--seed S] [--out DIR] [--jobs N]
// rml plot-data --kind rate|region|histogram ...
//
// Exit status: 0 ok, 1 a hard check failed, 2 usage error.

#include <CLI11.hpp>

#include <cstdint>
#include <exception>
#include <iostream>
#include <optional>
#include <string>

#include "rml/harness.hpp"

namespace {

int run_command(rml::Command command, const std::string& config_path, std::optional<std::uint64_t> seed,
                std::optional<std::string> out, std::optional<std::size_t> jobs, bool quiet) {
  rml::ExperimentConfig cfg = rml::make_config(rml::load_ini(config_path), command);
  if (seed) cfg.seed = *seed;
  if (out) cfg.out = *out;
  if (jobs) cfg.jobs = *jobs;
  const rml::RunOutput result = rml::run(cfg);
  rml::write_outputs(cfg.out, result);
  if (!quiet) rml::print_summary(std::cout, result);
  const std::size_t failures = result.failures();
  std::cout << rml::to_string(command) << ": " << result.records.size() << " records, " << failures
            << " failed checks -> " << (std::filesystem::path(cfg.out) / "results.csv").string() << '\n';
  return failures == 0 ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Wigner matrix spectral laboratory"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> jobs;
  bool quiet = false;
  std::vector<std::pair<CLI::App*, rml::Command>> commands;
  for (const auto& [cmd, name] : rml::command_names()) {
    auto* sub = app.add_subcommand(name, "run the " + name + " experiment");
    sub->add_option("--config", config_path, "experiment config file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", seed, "master seed (overrides the config)");
    sub->add_option("--out", out, "output directory (overrides the config)");
    sub->add_option("--jobs", jobs, "worker threads, 0 = all cores (overrides the config)");
    sub->add_flag("--quiet", quiet, "only print the final line");
    commands.emplace_back(sub, cmd);
  }

  std::string kind, results_path, plot_out, statistic;
  std::optional<std::string> plot_config;
  std::size_t n_region = 0, bins = 20;
  auto* plot = app.add_subcommand("plot-data", "emit tidy x,y,series CSV for plotting");
  plot->add_option("--kind", kind, "rate, region or histogram")->required();
  plot->add_option("--results", results_path, "results.csv (rate) or replicas.csv (histogram)");
  plot->add_option("--config", plot_config, "config with [region] parameters (region)");
  plot->add_option("--n", n_region, "matrix size for the region boundary (region)");
  plot->add_option("--statistic", statistic, "statistic to plot");
  plot->add_option("--bins", bins, "histogram bins");
  plot->add_option("--out", plot_out, "output CSV (default stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    for (const auto& [sub, cmd] : commands)
      if (sub->parsed()) return run_command(cmd, config_path, seed, out, jobs, quiet);

    std::vector<rml::PlotPoint> pts;
    switch (rml::parse_plot_kind(kind)) {
      case rml::PlotKind::rate:
        if (results_path.empty()) throw rml::UsageError("plot-data rate needs --results");
        pts = rml::plot_rate(rml::read_csv(results_path), statistic.empty() ? "delta_root" : statistic);
        break;
      case rml::PlotKind::histogram:
        if (results_path.empty()) throw rml::UsageError("plot-data histogram needs --results (replicas.csv)");
        pts = rml::plot_histogram(rml::read_csv(results_path), statistic, bins);
        break;
      case rml::PlotKind::region: {
        if (!plot_config) throw rml::UsageError("plot-data region needs --config");
        if (n_region == 0) throw rml::UsageError("plot-data region needs --n");
        const auto file = rml::load_ini(*plot_config);
        double A0 = 1.0, V = 4.0;
        std::optional<double> v0, eps;
        if (auto it = file.find("region"); it != file.end()) {
          for (const auto& [k, v] : it->second) {
            if (k == "A0") A0 = rml::detail::parse_double(k, v);
            else if (k == "V") V = rml::detail::parse_double(k, v);
            else if (k == "v0") v0 = rml::detail::parse_double(k, v);
            else if (k == "v0_scale") v0 = rml::detail::parse_double(k, v) / static_cast<double>(n_region);
            else if (k == "eps") eps = rml::detail::parse_double(k, v);
          }
        }
        pts = rml::plot_region(rml::RegionGParams::make(n_region, A0, v0, V, eps));
        break;
      }
    }
    const std::string csv = rml::plot_csv(pts);
    if (plot_out.empty())
      std::cout << csv;
    else
      rml::atomic_write(plot_out, csv);
    return 0;
  } catch (const rml::UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return 2;
  } catch (const rml::NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
}
