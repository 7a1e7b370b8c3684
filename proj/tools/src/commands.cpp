#include "gshape/cli/commands.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <limits>
#include <map>
#include <set>
#include <sstream>

#include "gshape/autoenc.hpp"
#include "gshape/error.hpp"
#include "gshape/infometrics.hpp"
#include "gshape/mb_shaping.hpp"
#include "gshape/rng.hpp"

namespace gshape::cli {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string fmt_real(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt_power(double dbm) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", dbm);
  return buf;
}

double parse_real_field(const std::string& s, const std::string& source, std::size_t line) {
  if (s == "nan") return kNaN;
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || ec != std::errc() || ptr != s.data() + s.size()) {
    throw ParseError(source, line, "invalid number '" + s + "'");
  }
  return v;
}

std::filesystem::path ensure_dir(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ConfigError("cannot create output directory " + dir.string() + ": " + ec.message());
  return dir;
}

EstimatorOptions estimator_options(const SweepBlock& sweep) {
  EstimatorOptions o;
  o.chunk_size = sweep.chunk_size;
  return o;
}

SweepRow evaluate_row(const Constellation& c, const ChannelBlock& channel, int spans, double power_dbm,
                      const std::string& format, std::size_t samples, std::uint64_t seed,
                      const EstimatorOptions& opts) {
  SweepRow row;
  row.spans = spans;
  row.power_dbm = power_dbm;
  row.format = format;
  const Moments mom = moments(normalize_power(c));
  row.kappa = mom.kappa;
  row.kappa3 = mom.kappa3;
  try {
    const auto report = evaluate(c, channel.params(spans, dbm_to_mw(power_dbm)), samples, seed, opts);
    row.mi_bits = report.mi_bits;
    row.gmi_bits = report.gmi_bits;
    row.stderr_bits = report.mc_std_error_bits;
  } catch (const NumericalError& e) {
    std::cerr << "warning: " << format << " spans=" << spans << " power=" << power_dbm << " dBm: " << e.what() << '\n';
    row.mi_bits = row.gmi_bits = row.stderr_bits = kNaN;
    row.valid = false;
  }
  return row;
}

}  // namespace

void mark_optimal(std::vector<SweepRow>& rows) {
  std::map<std::pair<std::string, int>, std::size_t> best;
  for (std::size_t i = 0; i < rows.size(); ++i) {
    auto& r = rows[i];
    r.optimal = false;
    if (!r.valid || std::isnan(r.mi_bits)) continue;
    const auto key = std::make_pair(r.format, r.spans);
    auto it = best.find(key);
    if (it == best.end()) {
      best.emplace(key, i);
      continue;
    }
    const auto& cur = rows[it->second];
    if (r.mi_bits > cur.mi_bits || (r.mi_bits == cur.mi_bits && r.power_dbm < cur.power_dbm)) it->second = i;
  }
  for (const auto& [key, i] : best) rows[i].optimal = true;
}

void write_sweep_csv(std::span<const SweepRow> rows, std::ostream& out) {
  out << kSweepCsvHeader << '\n';
  for (const auto& r : rows) {
    out << r.spans << ',' << fmt_power(r.power_dbm) << ',' << r.format << ',' << fmt_real(r.mi_bits) << ','
        << fmt_real(r.gmi_bits) << ',' << fmt_real(r.stderr_bits) << ',' << fmt_real(r.kappa) << ','
        << fmt_real(r.kappa3) << ',' << (r.optimal ? 1 : 0) << '\n';
  }
}

void write_sweep_csv(std::span<const SweepRow> rows, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  write_sweep_csv(rows, out);
}

std::vector<SweepRow> read_sweep_csv(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line) || line != kSweepCsvHeader) {
    throw ParseError(source, 1, std::string("expected header '") + kSweepCsvHeader + "'");
  }
  std::vector<SweepRow> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::stringstream ss(line);
    std::string item;
    while (std::getline(ss, item, ',')) f.push_back(item);
    if (f.size() != 9) throw ParseError(source, lineno, "expected 9 fields, got " + std::to_string(f.size()));
    SweepRow r;
    const double spans = parse_real_field(f[0], source, lineno);
    if (spans != std::floor(spans) || spans < 1) throw ParseError(source, lineno, "invalid spans '" + f[0] + "'");
    r.spans = static_cast<int>(spans);
    r.power_dbm = parse_real_field(f[1], source, lineno);
    r.format = f[2];
    r.mi_bits = parse_real_field(f[3], source, lineno);
    r.gmi_bits = parse_real_field(f[4], source, lineno);
    r.stderr_bits = parse_real_field(f[5], source, lineno);
    r.kappa = parse_real_field(f[6], source, lineno);
    r.kappa3 = parse_real_field(f[7], source, lineno);
    if (f[8] != "0" && f[8] != "1") throw ParseError(source, lineno, "optimal flag must be 0 or 1");
    r.optimal = f[8] == "1";
    r.valid = !std::isnan(r.mi_bits);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<SweepRow> read_sweep_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return read_sweep_csv(in, path.string());
}

std::uint64_t row_seed(std::uint64_t global_seed, const std::string& format, int spans) {
  return derive_seed(global_seed, format, {static_cast<std::uint64_t>(spans)});
}

double resolve_launch_power_mw(const ChannelBlock& channel, int spans, const Constellation& c) {
  if (channel.launch_power_dbm) return dbm_to_mw(*channel.launch_power_dbm);
  return optimal_launch_power_mw(channel.params(spans, 1.0), moments(normalize_power(c)));
}

std::vector<TrainArtifact> cmd_train(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
  const ChannelBlock channel = config.channel();
  const TrainBlock block = config.train();
  ensure_dir(out_dir);
  std::vector<int> spans_list = block.spans.empty() ? std::vector<int>{channel.link.spans} : block.spans;

  std::vector<TrainArtifact> artifacts;
  for (int spans : spans_list) {
    TrainConfig tc = block.base;
    const Constellation start = normalize_power(Constellation(initial_table(tc.order)));
    const double power = resolve_launch_power_mw(channel, spans, start);
    tc.channel = channel.params(spans, power);
    tc.seed = derive_seed(config.seed(), "train", {static_cast<std::uint64_t>(spans)});
    tc.validate();
    if (tc.batch_size < tc.order) {
      std::cerr << "warning: batch_size " << tc.batch_size << " is smaller than the order " << tc.order << '\n';
    }

    const TrainResult result = train(tc);
    const std::string stem = block.prefix + "_M" + std::to_string(tc.order) + "_s" + std::to_string(spans);
    TrainArtifact a;
    a.spans = spans;
    a.launch_power_dbm = mw_to_dbm(power);
    a.constellation = out_dir / (stem + ".const");
    a.decoder = out_dir / (stem + ".decoder");
    a.loss_history = out_dir / (stem + "_loss.csv");
    a.validation_rate = result.validation_rate;
    const std::vector<std::string> notes = {
        "trained autoencoder shape, spans=" + std::to_string(spans) + " launch_power_dbm=" + fmt_real(a.launch_power_dbm),
        "seed=" + std::to_string(config.seed()) + " restart=" + std::to_string(result.best_restart) +
            " validation_rate_bits=" + fmt_real(result.validation_rate)};
    write_constellation(result.constellation, a.constellation, notes);
    write_decoder(result.params.decoder, a.decoder);
    write_loss_history(result.history, a.loss_history);
    artifacts.push_back(std::move(a));
  }
  return artifacts;
}

SweepResult cmd_sweep(const ExperimentConfig& config, std::span<const std::filesystem::path> files,
                      const std::filesystem::path& out_dir) {
  const ChannelBlock channel = config.channel();
  const SweepBlock sweep = config.sweep();
  if (files.empty()) throw ConfigError("sweep needs at least one constellation file");
  const auto opts = estimator_options(sweep);

  std::vector<std::pair<std::string, Constellation>> formats;
  std::set<std::string> ids;
  for (const auto& f : files) {
    Constellation c = read_constellation(f);
    validate(c);
    std::string id = f.stem().string();
    if (!ids.insert(id).second) throw ConfigError("duplicate format id '" + id + "' in sweep inputs");
    formats.emplace_back(std::move(id), std::move(c));
  }
  for (const auto& member : sweep.family) {
    if (!ids.count(member)) throw ConfigError("[sweep] family member '" + member + "' is not among the input files");
  }
  if (!sweep.family.empty() && ids.count(sweep.family_name)) {
    throw ConfigError("[sweep] family_name '" + sweep.family_name + "' collides with an input format id");
  }

  SweepResult result;
  for (const auto& [id, c] : formats) {
    for (int spans : sweep.spans) {
      const auto seed = row_seed(config.seed(), id, spans);
      for (double p : sweep.power_dbm) {
        result.rows.push_back(evaluate_row(c, channel, spans, p, id, sweep.samples, seed, opts));
        if (!result.rows.back().valid) ++result.failures;
      }
    }
  }
  mark_optimal(result.rows);

  if (!sweep.family.empty()) {
    std::vector<SweepRow> family_rows;
    for (int spans : sweep.spans) {
      const SweepRow* best = nullptr;
      for (const auto& member : sweep.family) {
        for (const auto& r : result.rows) {
          if (r.format == member && r.spans == spans && r.optimal && (!best || r.mi_bits > best->mi_bits)) best = &r;
        }
      }
      if (!best) continue;
      const std::string chosen = best->format;
      for (const auto& r : result.rows) {
        if (r.format == chosen && r.spans == spans) {
          SweepRow copy = r;
          copy.format = sweep.family_name;
          family_rows.push_back(std::move(copy));
        }
      }
    }
    result.rows.insert(result.rows.end(), family_rows.begin(), family_rows.end());
  }

  result.csv = ensure_dir(out_dir) / "sweep.csv";
  write_sweep_csv(result.rows, result.csv);
  return result;
}

BaselineResult cmd_baseline(const ExperimentConfig& config, const std::filesystem::path& out_dir) {
  const ChannelBlock channel = config.channel();
  const SweepBlock sweep = config.sweep();
  const BaselineBlock base = config.baselines();
  const auto opts = estimator_options(sweep);
  const Constellation qam = square_qam(base.order);
  const std::string qam_id = "qam" + std::to_string(base.order);
  const std::string ps_id = "ps" + std::to_string(base.order);
  ensure_dir(out_dir);

  BaselineResult result;
  result.qam_file = out_dir / (qam_id + ".const");
  write_constellation(qam, result.qam_file, std::vector<std::string>{"Gray-coded square QAM"});

  std::vector<SweepRow> qam_rows, ps_rows;
  for (int spans : sweep.spans) {
    // Both baselines share the QAM noise stream so nu = 0 reproduces the QAM row exactly.
    const auto seed = row_seed(config.seed(), qam_id, spans);
    for (double p : sweep.power_dbm) {
      SweepRow q = evaluate_row(qam, channel, spans, p, qam_id, sweep.samples, seed, opts);
      if (base.mb_ps) {
        const ChannelParams params = channel.params(spans, dbm_to_mw(p));
        MbResult mb = optimize_mb(qam, params, base.nu_grid, base.mb_samples, seed, opts);
        double nu = mb.nu;
        McEstimate mi = mb.mi;
        if (base.mb_samples != sweep.samples || nu != 0.0) {
          mb = shape_mb(qam, nu);
          mi = mi_mc(mb.shaped, mb.pmf, AuxChannel{noise_variance(params, mb.moments), params.launch_power_mw},
                     sweep.samples, seed, opts);
        }
        // The grid always contains nu = 0, whose score is the QAM row itself.
        if (!(mi.bits > q.mi_bits) && q.valid) {
          nu = 0.0;
          mb = shape_mb(qam, 0.0);
          mi = {q.mi_bits, q.stderr_bits, sweep.samples};
        }
        SweepRow r;
        r.spans = spans;
        r.power_dbm = p;
        r.format = ps_id;
        r.mi_bits = mi.bits;
        r.gmi_bits = kNaN;
        r.stderr_bits = mi.std_error;
        r.kappa = mb.moments.kappa;
        r.kappa3 = mb.moments.kappa3;
        r.valid = std::isfinite(mi.bits);
        ps_rows.push_back(r);
        result.mb.push_back({spans, p, nu, mi.bits, mi.std_error, mb.pmf.entropy_bits()});
      }
      if (base.square_qam) qam_rows.push_back(std::move(q));
    }
  }
  result.rows = std::move(qam_rows);
  result.rows.insert(result.rows.end(), ps_rows.begin(), ps_rows.end());
  mark_optimal(result.rows);
  result.csv = out_dir / "baseline.csv";
  write_sweep_csv(result.rows, result.csv);

  if (base.mb_ps) {
    result.mb_csv = out_dir / "mb_nu.csv";
    std::ofstream out(result.mb_csv);
    if (!out) throw Error("cannot write " + result.mb_csv.string());
    out << kMbCsvHeader << '\n';
    for (const auto& r : result.mb) {
      out << r.spans << ',' << fmt_power(r.power_dbm) << ',' << fmt_real(r.nu) << ',' << fmt_real(r.mi_bits) << ','
          << fmt_real(r.stderr_bits) << ',' << fmt_real(r.entropy_bits) << '\n';
    }
  }
  return result;
}

std::vector<PairGain> compare_formats(std::span<const SweepRow> rows, const std::string& format,
                                      const std::string& reference) {
  std::map<int, const SweepRow*> a, b;
  for (const auto& r : rows) {
    if (!r.optimal) continue;
    if (r.format == format) a[r.spans] = &r;
    if (r.format == reference) b[r.spans] = &r;
  }
  std::set<int> spans;
  for (const auto& [s, r] : a) spans.insert(s);
  for (const auto& [s, r] : b) spans.insert(s);
  std::vector<std::string> missing;
  if (spans.empty()) missing = {format, reference};
  for (int s : spans) {
    if (!a.count(s)) missing.push_back(format + "@spans=" + std::to_string(s));
    if (!b.count(s)) missing.push_back(reference + "@spans=" + std::to_string(s));
  }
  if (!missing.empty()) {
    std::string msg = "missing optimal-power rows for:";
    for (const auto& m : missing) msg += " " + m;
    throw ConfigError(msg);
  }
  std::vector<PairGain> out;
  for (int s : spans) out.push_back({s, a[s]->mi_bits - b[s]->mi_bits, a[s]->gmi_bits - b[s]->gmi_bits});
  return out;
}

std::vector<GainRow> cmd_report(std::span<const SweepRow> rows, const std::string& geometric, const std::string& qam,
                                const std::string& ps) {
  std::vector<std::string> absent;
  for (const auto& f : {geometric, qam, ps}) {
    if (std::none_of(rows.begin(), rows.end(), [&](const SweepRow& r) { return r.format == f; })) absent.push_back(f);
  }
  if (!absent.empty()) {
    std::string msg = "report needs rows for formats that are absent:";
    for (const auto& f : absent) msg += " " + f;
    throw ConfigError(msg);
  }
  const auto geo = compare_formats(rows, geometric, qam);
  const auto shaped = compare_formats(rows, ps, qam);
  if (geo.size() != shaped.size()) throw ConfigError("geometric and PS rows cover different span values");
  std::vector<GainRow> out;
  for (std::size_t i = 0; i < geo.size(); ++i) {
    if (geo[i].spans != shaped[i].spans) throw ConfigError("geometric and PS rows cover different span values");
    const double ratio = shaped[i].mi_gain != 0.0 ? geo[i].mi_gain / shaped[i].mi_gain : kNaN;
    out.push_back({geo[i].spans, geo[i].mi_gain, shaped[i].mi_gain, ratio, geo[i].gmi_gain});
  }
  return out;
}

void write_report_csv(std::span<const GainRow> gains, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << kReportCsvHeader << '\n';
  for (const auto& g : gains) {
    out << g.spans << ',' << fmt_real(g.mi_gain_geometric) << ',' << fmt_real(g.mi_gain_ps) << ','
        << fmt_real(g.gain_ratio) << ',' << fmt_real(g.gmi_gain_geometric) << '\n';
  }
}

void cmd_export(const std::filesystem::path& constellation, const std::filesystem::path& csv) {
  const Constellation c = read_constellation(constellation);
  std::ofstream out(csv);
  if (!out) throw Error("cannot write " + csv.string());
  out << "index,label,re,im\n";
  for (std::size_t i = 0; i < c.order(); ++i) {
    out << i << ',' << BitWord(i, c.bits_per_symbol()).to_string() << ',' << fmt_real(c[i].real()) << ','
        << fmt_real(c[i].imag()) << '\n';
  }
}

}  // namespace gshape::cli
