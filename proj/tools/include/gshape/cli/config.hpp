#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "gshape/autoenc.hpp"
#include "gshape/channel.hpp"

namespace gshape::cli {

/// Raw `key = value` entries grouped by `[section]`; top-level keys live in section "".
///
/// Grammar, one item per line:
///   `# comment` | blank | `[section]` | `key = value`
/// Keys are unique within a section. The top level must carry `version = 1`.
class IniDocument {
 public:
  static IniDocument parse(std::istream& in, const std::string& source);
  static IniDocument load(const std::filesystem::path& path);

  bool has_section(const std::string& section) const;
  std::optional<std::string> find(const std::string& section, const std::string& key) const;
  /// Throws ConfigError naming `[section] key` when absent.
  std::string require(const std::string& section, const std::string& key) const;
  std::vector<std::string> keys(const std::string& section) const;
  const std::string& source() const noexcept { return source_; }

 private:
  struct Entry {
    std::string value;
    std::size_t line;
  };
  std::string source_;
  std::map<std::string, std::map<std::string, Entry>> sections_;
};

/// Parses `a:step:b` (inclusive) or a comma-separated list.
std::vector<double> parse_real_list(const std::string& text, const std::string& what);
std::vector<int> parse_int_list(const std::string& text, const std::string& what);

struct ChannelBlock {
  LinkBudget link{};
  NlinCoeffs nlin{};
  /// Overrides the link-budget ASE variance per span when set.
  std::optional<double> ase_variance_mw;
  /// Unset means "analytic optimum for the constellation's moments".
  std::optional<double> launch_power_dbm;

  double ase_per_span_mw() const;
  ChannelParams params(int spans, double launch_power_mw) const;
};

struct TrainBlock {
  TrainConfig base{};  ///< channel field filled per family member
  std::vector<int> spans;
  std::string prefix = "gs";
};

struct SweepBlock {
  std::vector<double> power_dbm;
  std::vector<int> spans;
  std::size_t samples = 1000000;
  std::size_t chunk_size = 16384;
  std::vector<std::string> family;
  std::string family_name = "geometric";
};

struct BaselineBlock {
  bool square_qam = true;
  bool mb_ps = true;
  std::size_t order = 256;
  std::vector<double> nu_grid;
  std::size_t mb_samples = 100000;
};

/// Typed view of a config document. Blocks are materialized on demand so a
/// command only requires the sections it uses.
class ExperimentConfig {
 public:
  explicit ExperimentConfig(IniDocument doc);
  static ExperimentConfig load(const std::filesystem::path& path);

  std::uint64_t seed() const { return seed_; }
  void override_seed(std::uint64_t seed) { seed_ = seed; }
  void override_samples(std::size_t n) { samples_override_ = n; }

  ChannelBlock channel() const;
  TrainBlock train() const;
  SweepBlock sweep() const;
  BaselineBlock baselines() const;
  std::filesystem::path output_dir() const;

  const IniDocument& document() const noexcept { return doc_; }

 private:
  IniDocument doc_;
  std::uint64_t seed_ = 0;
  std::optional<std::size_t> samples_override_;
};

}  // namespace gshape::cli
