// gshape: train geometric constellation shapes and evaluate them over a
// surrogate fiber channel.
//
// Exit codes: 0 success, 1 configuration/input error, 2 runtime or numerical error.

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "gshape/cli/commands.hpp"
#include "gshape/cli/config.hpp"
#include "gshape/error.hpp"

namespace fs = std::filesystem;
using namespace gshape;

namespace {

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct GlobalFlags {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> samples;
};

cli::ExperimentConfig load(const GlobalFlags& g) {
  if (g.config.empty()) throw ConfigError("--config is required for this command");
  auto cfg = cli::ExperimentConfig::load(g.config);
  if (g.seed) cfg.override_seed(*g.seed);
  if (g.samples) cfg.override_samples(*g.samples);
  return cfg;
}

fs::path out_dir(const GlobalFlags& g, const cli::ExperimentConfig* cfg) {
  if (!g.out.empty()) return g.out;
  return cfg ? cfg->output_dir() : fs::path("out");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"gshape: learned geometric constellation shaping over a surrogate fiber channel"};
  app.require_subcommand(1);
  GlobalFlags g;
  app.add_option("--config", g.config, "experiment config file");
  app.add_option("--out", g.out, "output directory (overrides [output] dir)");
  app.add_option("--seed", g.seed, "global seed (overrides the config)");
  app.add_option("--samples", g.samples, "Monte-Carlo samples per estimate (overrides the config)");

  auto* train = app.add_subcommand("train", "train one shape per configured span count");
  auto* sweep = app.add_subcommand("sweep", "evaluate constellation files over the span/power grid");
  std::vector<std::string> sweep_files;
  sweep->add_option("files", sweep_files, "constellation files")->required()->check(CLI::ExistingFile);
  auto* baseline = app.add_subcommand("baseline", "square QAM and Maxwell-Boltzmann shaped baselines");
  auto* report = app.add_subcommand("report", "shaping gains at the optimal launch power");
  std::vector<std::string> report_files;
  std::string geometric = "geometric", qam, ps;
  std::size_t report_order = 256;
  report->add_option("csv", report_files, "sweep/baseline CSV files")->required()->check(CLI::ExistingFile);
  report->add_option("--geometric", geometric, "geometric format id")->capture_default_str();
  report->add_option("--qam", qam, "uniform QAM format id (default qam<order>)");
  report->add_option("--ps", ps, "probabilistically shaped format id (default ps<order>)");
  report->add_option("--order", report_order, "order used for default baseline ids")->capture_default_str();
  auto* exporter = app.add_subcommand("export", "write a constellation as an index,label,re,im CSV");
  std::string export_file;
  exporter->add_option("file", export_file, "constellation file")->required()->check(CLI::ExistingFile);

  for (auto* sub : {train, sweep, baseline, report, exporter}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  try {
    if (train->parsed()) {
      const auto cfg = load(g);
      for (const auto& a : cli::cmd_train(cfg, out_dir(g, &cfg))) {
        std::cout << a.constellation.string() << "  spans=" << a.spans << " power_dbm=" << a.launch_power_dbm
                  << " validation_rate_bits=" << a.validation_rate << '\n';
      }
    } else if (sweep->parsed()) {
      const auto cfg = load(g);
      const std::vector<fs::path> files(sweep_files.begin(), sweep_files.end());
      const auto result = cli::cmd_sweep(cfg, files, out_dir(g, &cfg));
      std::cout << result.csv.string() << "  rows=" << result.rows.size() << '\n';
      if (result.failures) {
        std::cerr << result.failures << " sweep rows failed\n";
        return kExitRuntime;
      }
    } else if (baseline->parsed()) {
      const auto cfg = load(g);
      const auto result = cli::cmd_baseline(cfg, out_dir(g, &cfg));
      std::cout << result.qam_file.string() << '\n' << result.csv.string() << '\n';
      if (!result.mb_csv.empty()) std::cout << result.mb_csv.string() << '\n';
    } else if (report->parsed()) {
      std::vector<cli::SweepRow> rows;
      for (const auto& f : report_files) {
        auto part = cli::read_sweep_csv(fs::path(f));
        rows.insert(rows.end(), part.begin(), part.end());
      }
      if (qam.empty()) qam = "qam" + std::to_string(report_order);
      if (ps.empty()) ps = "ps" + std::to_string(report_order);
      const auto gains = cli::cmd_report(rows, geometric, qam, ps);
      const fs::path dir = g.out.empty() ? fs::path(".") : fs::path(g.out);
      fs::create_directories(dir);
      cli::write_report_csv(gains, dir / "report.csv");
      std::cout << cli::kReportCsvHeader << '\n';
      for (const auto& r : gains) {
        std::cout << r.spans << ',' << r.mi_gain_geometric << ',' << r.mi_gain_ps << ',' << r.gain_ratio << ','
                  << r.gmi_gain_geometric << '\n';
      }
    } else if (exporter->parsed()) {
      const fs::path dir = g.out.empty() ? fs::path(".") : fs::path(g.out);
      fs::create_directories(dir);
      const fs::path target = dir / (fs::path(export_file).stem().string() + "_points.csv");
      cli::cmd_export(export_file, target);
      std::cout << target.string() << '\n';
    }
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const UnsupportedOrderError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
