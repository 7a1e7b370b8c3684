#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "gshape/cli/config.hpp"
#include "gshape/constellation.hpp"

namespace gshape::cli {

inline constexpr const char* kSweepCsvHeader = "spans,power_dbm,format,mi_bits,gmi_bits,stderr_bits,kappa,kappa3,optimal";
inline constexpr const char* kReportCsvHeader = "spans,mi_gain_geometric,mi_gain_ps,gain_ratio,gmi_gain_geometric";
inline constexpr const char* kMbCsvHeader = "spans,power_dbm,nu,mi_bits,stderr_bits,entropy_bits";

struct SweepRow {
  int spans = 0;
  double power_dbm = 0.0;
  std::string format;
  double mi_bits = 0.0;
  double gmi_bits = 0.0;  ///< NaN for non-uniform (shaped) formats
  double stderr_bits = 0.0;
  double kappa = 0.0;
  double kappa3 = 0.0;
  bool optimal = false;
  bool valid = true;
};

/// Sets `optimal` on the max-MI row of every (format, spans) group; ties go to the
/// lower power. Invalid rows never win.
void mark_optimal(std::vector<SweepRow>& rows);

void write_sweep_csv(std::span<const SweepRow> rows, std::ostream& out);
void write_sweep_csv(std::span<const SweepRow> rows, const std::filesystem::path& path);
std::vector<SweepRow> read_sweep_csv(std::istream& in, const std::string& source);
std::vector<SweepRow> read_sweep_csv(const std::filesystem::path& path);

/// Stream seed of one sweep curve. Shared by every power point of a
/// (format, spans) pair.
std::uint64_t row_seed(std::uint64_t global_seed, const std::string& format, int spans);

/// Launch power from the channel block, or the analytic optimum for `c` when unset.
double resolve_launch_power_mw(const ChannelBlock& channel, int spans, const Constellation& c);

struct TrainArtifact {
  int spans;
  double launch_power_dbm;
  std::filesystem::path constellation;
  std::filesystem::path decoder;
  std::filesystem::path loss_history;
  double validation_rate;
};

/// Trains one shape per configured span count ([train] spans, default [channel] spans).
std::vector<TrainArtifact> cmd_train(const ExperimentConfig& config, const std::filesystem::path& out_dir);

struct SweepResult {
  std::vector<SweepRow> rows;
  std::filesystem::path csv;
  std::size_t failures = 0;
};

/// Evaluates every constellation file over [sweep] spans x power_dbm and writes sweep.csv.
/// Format ids are file stems. If [sweep] family names member ids, rows of the best member
/// (max MI at its optimal power) are repeated per span under family_name.
SweepResult cmd_sweep(const ExperimentConfig& config, std::span<const std::filesystem::path> files,
                      const std::filesystem::path& out_dir);

struct MbRow {
  int spans;
  double power_dbm;
  double nu;
  double mi_bits;
  double stderr_bits;
  double entropy_bits;
};

struct BaselineResult {
  std::filesystem::path qam_file;
  std::vector<SweepRow> rows;  ///< qam<M> and, when enabled, ps<M>
  std::vector<MbRow> mb;
  std::filesystem::path csv;
  std::filesystem::path mb_csv;
};

/// Writes qam<M>.const, baseline.csv (sweep schema) and, for mb_ps, mb_nu.csv.
BaselineResult cmd_baseline(const ExperimentConfig& config, const std::filesystem::path& out_dir);

struct GainRow {
  int spans;
  double mi_gain_geometric;
  double mi_gain_ps;
  double gain_ratio;
  double gmi_gain_geometric;
};

/// Optimal-power MI and GMI of `format` minus those of `reference`, per span count
/// present for both. Throws ConfigError listing formats with no optimal row.
struct PairGain {
  int spans;
  double mi_gain;
  double gmi_gain;
};
std::vector<PairGain> compare_formats(std::span<const SweepRow> rows, const std::string& format,
                                      const std::string& reference);

std::vector<GainRow> cmd_report(std::span<const SweepRow> rows, const std::string& geometric, const std::string& qam,
                                const std::string& ps);
void write_report_csv(std::span<const GainRow> gains, const std::filesystem::path& path);

/// Writes `index,label,re,im` for plotting.
void cmd_export(const std::filesystem::path& constellation, const std::filesystem::path& csv);

}  // namespace gshape::cli
