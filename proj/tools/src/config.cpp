#include "gshape/cli/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <set>
#include <sstream>

#include "gshape/error.hpp"

namespace gshape::cli {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

double to_real(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size() || !std::isfinite(v)) {
    throw ConfigError(what + ": expected a real number, got '" + text + "'");
  }
  return v;
}

std::uint64_t to_uint(const std::string& text, const std::string& what) {
  const std::string t = trim(text);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (t.empty() || ec != std::errc() || ptr != t.data() + t.size()) {
    throw ConfigError(what + ": expected a nonnegative integer, got '" + text + "'");
  }
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

void check_known(const IniDocument& doc, const std::string& section, const std::set<std::string>& known) {
  for (const auto& k : doc.keys(section)) {
    if (!known.count(k)) {
      throw ConfigError(doc.source() + ": unknown key '" + k + "' in section [" + section + "]");
    }
  }
}

template <class T>
void require_sorted(const std::vector<T>& v, const std::string& what) {
  if (v.empty()) throw ConfigError(what + " must not be empty");
  for (std::size_t i = 1; i < v.size(); ++i) {
    if (!(v[i - 1] < v[i])) throw ConfigError(what + " must be strictly increasing");
  }
}

}  // namespace

IniDocument IniDocument::parse(std::istream& in, const std::string& source) {
  IniDocument doc;
  doc.source_ = source;
  doc.sections_[""];
  std::string section;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    if (t.front() == '[') {
      if (t.back() != ']' || t.size() < 3) throw ParseError(source, lineno, "malformed section header '" + t + "'");
      section = trim(t.substr(1, t.size() - 2));
      if (doc.sections_.count(section) && section != "") {
        throw ParseError(source, lineno, "duplicate section [" + section + "]");
      }
      doc.sections_[section];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw ParseError(source, lineno, "expected 'key = value', got '" + t + "'");
    const std::string key = trim(t.substr(0, eq));
    const std::string value = trim(t.substr(eq + 1));
    if (key.empty()) throw ParseError(source, lineno, "empty key");
    auto& entries = doc.sections_[section];
    if (entries.count(key)) throw ParseError(source, lineno, "duplicate key '" + key + "'");
    entries[key] = Entry{value, lineno};
  }
  const auto version = doc.find("", "version");
  if (!version) throw ConfigError(source + ": missing required top-level key 'version'");
  if (*version != "1") throw ConfigError(source + ": unsupported config version '" + *version + "'");
  return doc;
}

IniDocument IniDocument::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  return parse(in, path.string());
}

bool IniDocument::has_section(const std::string& section) const { return sections_.count(section) > 0; }

std::optional<std::string> IniDocument::find(const std::string& section, const std::string& key) const {
  const auto s = sections_.find(section);
  if (s == sections_.end()) return std::nullopt;
  const auto e = s->second.find(key);
  if (e == s->second.end()) return std::nullopt;
  return e->second.value;
}

std::string IniDocument::require(const std::string& section, const std::string& key) const {
  if (!has_section(section)) {
    throw ConfigError(source_ + ": missing section [" + section + "] (required key '" + key + "')");
  }
  auto v = find(section, key);
  if (!v) throw ConfigError(source_ + ": missing required key '" + key + "' in section [" + section + "]");
  return *v;
}

std::vector<std::string> IniDocument::keys(const std::string& section) const {
  std::vector<std::string> out;
  const auto s = sections_.find(section);
  if (s == sections_.end()) return out;
  for (const auto& [k, v] : s->second) out.push_back(k);
  return out;
}

std::vector<double> parse_real_list(const std::string& text, const std::string& what) {
  std::vector<double> out;
  if (text.find(':') != std::string::npos) {
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string p;
    while (std::getline(ss, p, ':')) parts.push_back(p);
    if (parts.size() != 3) throw ConfigError(what + ": range must be 'start:step:stop'");
    const double start = to_real(parts[0], what);
    const double step = to_real(parts[1], what);
    const double stop = to_real(parts[2], what);
    if (!(step > 0.0) || stop < start) throw ConfigError(what + ": range needs step > 0 and stop >= start");
    const auto n = static_cast<std::size_t>(std::floor((stop - start) / step + 1e-9));
    if (n > 1000000) throw ConfigError(what + ": range has too many points");
    for (std::size_t i = 0; i <= n; ++i) out.push_back(start + static_cast<double>(i) * step);
    return out;
  }
  for (const auto& item : split_list(text)) out.push_back(to_real(item, what));
  if (out.empty()) throw ConfigError(what + ": empty list");
  return out;
}

std::vector<int> parse_int_list(const std::string& text, const std::string& what) {
  std::vector<int> out;
  for (double v : parse_real_list(text, what)) {
    if (v != std::floor(v) || v < 1 || v > 100000) throw ConfigError(what + ": expected positive integers");
    out.push_back(static_cast<int>(v));
  }
  return out;
}

double ChannelBlock::ase_per_span_mw() const {
  return ase_variance_mw ? *ase_variance_mw : ase_variance_per_span(link);
}

ChannelParams ChannelBlock::params(int spans, double launch_power_mw) const {
  ChannelParams p;
  p.ase_variance_per_span_mw = ase_per_span_mw();
  p.nlin = nlin;
  p.spans = spans;
  p.launch_power_mw = launch_power_mw;
  p.validate();
  return p;
}

ExperimentConfig::ExperimentConfig(IniDocument doc) : doc_(std::move(doc)) {
  check_known(doc_, "", {"version", "seed"});
  seed_ = to_uint(doc_.require("", "seed"), "seed");
}

ExperimentConfig ExperimentConfig::load(const std::filesystem::path& path) {
  return ExperimentConfig(IniDocument::load(path));
}

ChannelBlock ExperimentConfig::channel() const {
  const std::string s = "channel";
  check_known(doc_, s,
              {"span_length_km", "attenuation_db_per_km", "spans", "noise_figure_db", "symbol_rate_hz", "nlin_c0",
               "nlin_c1", "nlin_c2", "launch_power_dbm", "center_frequency_hz", "ase_variance_mw"});
  ChannelBlock c;
  c.link.span_length_km = to_real(doc_.require(s, "span_length_km"), "span_length_km");
  c.link.attenuation_db_per_km = to_real(doc_.require(s, "attenuation_db_per_km"), "attenuation_db_per_km");
  c.link.spans = static_cast<int>(to_uint(doc_.require(s, "spans"), "spans"));
  c.link.noise_figure_db = to_real(doc_.require(s, "noise_figure_db"), "noise_figure_db");
  c.link.symbol_rate_hz = to_real(doc_.require(s, "symbol_rate_hz"), "symbol_rate_hz");
  c.nlin.c0 = to_real(doc_.require(s, "nlin_c0"), "nlin_c0");
  c.nlin.c1 = to_real(doc_.require(s, "nlin_c1"), "nlin_c1");
  c.nlin.c2 = to_real(doc_.require(s, "nlin_c2"), "nlin_c2");
  const std::string power = doc_.require(s, "launch_power_dbm");
  if (lower(power) != "optimal") c.launch_power_dbm = to_real(power, "launch_power_dbm");
  if (auto f = doc_.find(s, "center_frequency_hz")) c.link.center_frequency_hz = to_real(*f, "center_frequency_hz");
  if (auto a = doc_.find(s, "ase_variance_mw")) {
    c.ase_variance_mw = to_real(*a, "ase_variance_mw");
    if (*c.ase_variance_mw < 0.0) throw ConfigError("ase_variance_mw must be >= 0");
  }
  c.link.validate();
  ChannelParams probe = c.params(c.link.spans, 1.0);
  probe.validate();
  return c;
}

TrainBlock ExperimentConfig::train() const {
  const std::string s = "train";
  check_known(doc_, s,
              {"order", "batch_size", "steps", "learning_rate", "hidden_width", "restarts", "init_jitter",
               "validation_samples", "checkpoint_interval", "spans", "prefix"});
  TrainBlock t;
  auto& b = t.base;
  b.order = to_uint(doc_.require(s, "order"), "order");
  if (auto v = doc_.find(s, "batch_size")) b.batch_size = to_uint(*v, "batch_size");
  if (auto v = doc_.find(s, "steps")) b.steps = to_uint(*v, "steps");
  if (auto v = doc_.find(s, "learning_rate")) b.learning_rate = to_real(*v, "learning_rate");
  if (auto v = doc_.find(s, "hidden_width")) b.hidden_width = to_uint(*v, "hidden_width");
  if (auto v = doc_.find(s, "restarts")) b.restarts = to_uint(*v, "restarts");
  if (auto v = doc_.find(s, "init_jitter")) b.init_jitter = to_real(*v, "init_jitter");
  if (auto v = doc_.find(s, "validation_samples")) b.validation_samples = to_uint(*v, "validation_samples");
  if (auto v = doc_.find(s, "checkpoint_interval")) b.checkpoint_interval = to_uint(*v, "checkpoint_interval");
  if (auto v = doc_.find(s, "prefix")) t.prefix = *v;
  if (t.prefix.empty()) throw ConfigError("[train] prefix must not be empty");
  b.seed = seed_;
  if (auto v = doc_.find(s, "spans")) {
    t.spans = parse_int_list(*v, "[train] spans");
    require_sorted(t.spans, "[train] spans");
  }
  return t;
}

SweepBlock ExperimentConfig::sweep() const {
  const std::string s = "sweep";
  check_known(doc_, s, {"power_dbm", "spans", "samples", "chunk_size", "family", "family_name"});
  SweepBlock w;
  w.power_dbm = parse_real_list(doc_.require(s, "power_dbm"), "[sweep] power_dbm");
  require_sorted(w.power_dbm, "[sweep] power_dbm");
  w.spans = parse_int_list(doc_.require(s, "spans"), "[sweep] spans");
  require_sorted(w.spans, "[sweep] spans");
  if (auto v = doc_.find(s, "samples")) w.samples = to_uint(*v, "samples");
  if (samples_override_) w.samples = *samples_override_;
  if (auto v = doc_.find(s, "chunk_size")) w.chunk_size = to_uint(*v, "chunk_size");
  if (w.chunk_size == 0) throw ConfigError("[sweep] chunk_size must be positive");
  if (auto v = doc_.find(s, "family")) w.family = split_list(*v);
  if (auto v = doc_.find(s, "family_name")) w.family_name = *v;
  return w;
}

BaselineBlock ExperimentConfig::baselines() const {
  const std::string s = "baselines";
  check_known(doc_, s, {"formats", "order", "nu_grid", "mb_samples"});
  BaselineBlock b;
  b.square_qam = false;
  b.mb_ps = false;
  for (const auto& f : split_list(doc_.require(s, "formats"))) {
    if (f == "square_qam") {
      b.square_qam = true;
    } else if (f == "mb_ps") {
      b.mb_ps = true;
    } else {
      throw ConfigError("[baselines] formats: unknown baseline '" + f + "' (expected square_qam, mb_ps)");
    }
  }
  b.order = to_uint(doc_.require(s, "order"), "order");
  b.nu_grid = parse_real_list(doc_.find(s, "nu_grid").value_or("0:0.05:3"), "[baselines] nu_grid");
  require_sorted(b.nu_grid, "[baselines] nu_grid");
  if (auto v = doc_.find(s, "mb_samples")) b.mb_samples = to_uint(*v, "mb_samples");
  if (samples_override_) b.mb_samples = *samples_override_;
  return b;
}

std::filesystem::path ExperimentConfig::output_dir() const {
  check_known(doc_, "output", {"dir"});
  return doc_.find("output", "dir").value_or("out");
}

}  // namespace gshape::cli
