#include "gshape/constellation.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <numeric>
#include <ostream>
#include <sstream>

#include "gshape/error.hpp"

namespace gshape {

bool is_power_of_two(std::size_t n) noexcept { return std::has_single_bit(n); }

int bits_per_symbol(std::size_t order) {
  if (order < 2 || !is_power_of_two(order)) {
    throw UnsupportedOrderError("constellation order " + std::to_string(order) + " is not a power of two >= 2");
  }
  return std::countr_zero(order);
}

int hamming_distance(std::size_t a, std::size_t b) noexcept { return std::popcount(a ^ b); }

BitWord::BitWord(std::size_t index, int bits) : index_(index), bits_(bits) {
  if (bits < 1 || bits > 30) throw Error("bit word length must be in [1, 30]");
  if (index >> bits) throw Error("index " + std::to_string(index) + " does not fit in " + std::to_string(bits) + " bits");
}

BitWord BitWord::from_bits(std::span<const std::uint8_t> bits) {
  std::size_t index = 0;
  for (auto b : bits) {
    if (b > 1) throw Error("bit values must be 0 or 1");
    index = (index << 1) | b;
  }
  return BitWord(index, static_cast<int>(bits.size()));
}

std::vector<std::uint8_t> BitWord::bits() const {
  std::vector<std::uint8_t> out(bits_);
  for (int i = 0; i < bits_; ++i) out[i] = static_cast<std::uint8_t>((*this)[i]);
  return out;
}

std::string BitWord::to_string() const {
  std::string s(bits_, '0');
  for (int i = 0; i < bits_; ++i) s[i] = (*this)[i] ? '1' : '0';
  return s;
}

Constellation::Constellation(std::vector<Complex> points) : points_(std::move(points)) {
  bits_ = gshape::bits_per_symbol(points_.size());
  for (std::size_t i = 0; i < points_.size(); ++i) {
    if (!std::isfinite(points_[i].real()) || !std::isfinite(points_[i].imag())) {
      throw DegenerateInputError("constellation point " + std::to_string(i) + " is not finite");
    }
  }
}

Constellation Constellation::scaled(double a) const {
  std::vector<Complex> pts(points_);
  for (auto& z : pts) z *= a;
  return Constellation(std::move(pts));
}

Pmf::Pmf(std::vector<double> probs) : probs_(std::move(probs)) {
  if (probs_.empty()) throw DegenerateInputError("empty pmf");
  double sum = 0.0;
  for (double p : probs_) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw DegenerateInputError("pmf entries must be finite and nonnegative");
    sum += p;
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    std::ostringstream os;
    os << "pmf sums to " << std::setprecision(17) << sum << ", not 1";
    throw DegenerateInputError(os.str());
  }
}

Pmf Pmf::uniform(std::size_t order) {
  return Pmf(std::vector<double>(order, 1.0 / static_cast<double>(order)));
}

bool Pmf::is_uniform() const noexcept {
  const double u = 1.0 / static_cast<double>(probs_.size());
  return std::all_of(probs_.begin(), probs_.end(), [u](double p) { return p == u; });
}

double Pmf::entropy_bits() const {
  double h = 0.0;
  for (double p : probs_) {
    if (p > 0.0) h -= p * std::log2(p);
  }
  return h;
}

namespace {

void check_pmf(const Constellation& c, const Pmf& p) {
  if (p.size() != c.order()) {
    throw DegenerateInputError("pmf has " + std::to_string(p.size()) + " entries for a constellation of order " +
                               std::to_string(c.order()));
  }
}

double mean_power(const Constellation& c, const Pmf& p) {
  double mu2 = 0.0;
  for (std::size_t i = 0; i < c.order(); ++i) mu2 += p[i] * std::norm(c[i]);
  return mu2;
}

}  // namespace

double min_distance(const Constellation& c) {
  double best = std::numeric_limits<double>::infinity();
  const auto pts = c.points();
  for (std::size_t i = 0; i < pts.size(); ++i) {
    for (std::size_t j = i + 1; j < pts.size(); ++j) best = std::min(best, std::abs(pts[i] - pts[j]));
  }
  return best;
}

double rms_magnitude(const Constellation& c) { return std::sqrt(mean_power(c, Pmf::uniform(c.order()))); }

void validate(const Constellation& c) {
  const double rms = rms_magnitude(c);
  if (rms == 0.0) throw DegenerateInputError("constellation has zero power");
  const double dmin = min_distance(c);
  if (dmin <= 1e-6 * rms) {
    std::ostringstream os;
    os << "constellation points nearly coincide (min distance " << dmin << ", rms " << rms << ")";
    throw DegenerateInputError(os.str());
  }
}

Constellation normalize_power(const Constellation& c, const Pmf& p) {
  check_pmf(c, p);
  const double mu2 = mean_power(c, p);
  if (!(mu2 > 0.0)) throw DegenerateInputError("cannot normalize a zero-power constellation");
  return c.scaled(1.0 / std::sqrt(mu2));
}

Constellation normalize_power(const Constellation& c) { return normalize_power(c, Pmf::uniform(c.order())); }

Moments moments(const Constellation& c, const Pmf& p) {
  check_pmf(c, p);
  double s2 = 0.0, s4 = 0.0, s6 = 0.0;
  for (std::size_t i = 0; i < c.order(); ++i) {
    const double e = std::norm(c[i]);
    s2 += p[i] * e;
    s4 += p[i] * e * e;
    s6 += p[i] * e * e * e;
  }
  if (!(s2 > 0.0)) throw DegenerateInputError("moments of a zero-power constellation are undefined");
  return {s2, s4 / (s2 * s2), s6 / (s2 * s2 * s2)};
}

Moments moments(const Constellation& c) { return moments(c, Pmf::uniform(c.order())); }

Constellation square_qam(std::size_t order) {
  if (order < 4 || !is_power_of_two(order) || std::countr_zero(order) % 2 != 0 || order > 1024) {
    throw UnsupportedOrderError("square QAM supports orders 4, 16, 64, 256 and 1024, not " + std::to_string(order));
  }
  const int half = std::countr_zero(order) / 2;
  const std::size_t levels = std::size_t{1} << half;
  const std::size_t mask = levels - 1;
  auto gray_to_binary = [](std::size_t g) {
    std::size_t b = g;
    for (std::size_t s = g >> 1; s; s >>= 1) b ^= s;
    return b;
  };
  auto amplitude = [&](std::size_t bits) {
    return 2.0 * static_cast<double>(gray_to_binary(bits)) - static_cast<double>(levels - 1);
  };
  std::vector<Complex> pts(order);
  for (std::size_t i = 0; i < order; ++i) pts[i] = {amplitude(i >> half), amplitude(i & mask)};
  return normalize_power(Constellation(std::move(pts)));
}

double gray_penalty(const Constellation& c) {
  validate(c);
  const auto pts = c.points();
  const std::size_t n = pts.size();
  double total = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double dmin = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i) dmin = std::min(dmin, std::abs(pts[i] - pts[j]));
    }
    const double limit = dmin * (1.0 + 1e-9);
    int count = 0;
    int bits = 0;
    for (std::size_t j = 0; j < n; ++j) {
      if (j != i && std::abs(pts[i] - pts[j]) <= limit) {
        ++count;
        bits += hamming_distance(i, j);
      }
    }
    total += static_cast<double>(bits) / count;
  }
  return total / static_cast<double>(n);
}

Pmf maxwell_boltzmann(const Constellation& c, double nu) {
  if (!(nu >= 0.0) || !std::isfinite(nu)) throw DegenerateInputError("Maxwell-Boltzmann parameter must be >= 0");
  const auto pts = c.points();
  double emin = std::numeric_limits<double>::infinity();
  for (const auto& z : pts) emin = std::min(emin, std::norm(z));
  std::vector<double> w(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) w[i] = std::exp(-nu * (std::norm(pts[i]) - emin));
  const double sum = std::accumulate(w.begin(), w.end(), 0.0);
  for (auto& x : w) x /= sum;
  return Pmf(std::move(w));
}

Constellation parse_constellation(std::istream& in, const std::string& source) {
  std::string line;
  std::size_t lineno = 0;
  if (!std::getline(in, line)) throw ParseError(source, 1, "empty file, expected header 'GSHAPE v1 M=<int>'");
  ++lineno;
  if (!line.empty() && line.back() == '\r') line.pop_back();
  constexpr std::string_view prefix = "GSHAPE v1 M=";
  if (line.rfind(prefix, 0) != 0) throw ParseError(source, lineno, "expected header 'GSHAPE v1 M=<int>', got '" + line + "'");
  std::size_t order = 0;
  {
    const char* first = line.data() + prefix.size();
    const char* last = line.data() + line.size();
    auto [ptr, ec] = std::from_chars(first, last, order);
    if (ec != std::errc() || ptr != last || first == last) throw ParseError(source, lineno, "invalid order in header '" + line + "'");
  }
  if (order < 2 || !is_power_of_two(order)) {
    throw ParseError(source, lineno, "order " + std::to_string(order) + " is not a power of two >= 2");
  }

  auto parse_double = [&](std::string_view tok, std::size_t at) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (ec != std::errc() || ptr != tok.data() + tok.size()) {
      throw ParseError(source, at, "invalid number '" + std::string(tok) + "'");
    }
    return v;
  };

  std::vector<Complex> pts;
  pts.reserve(order);
  bool in_comments = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty() && line.front() == '#') {
      in_comments = true;
      continue;
    }
    if (line.find_first_not_of(" \t") == std::string::npos) {
      if (pts.size() < order) throw ParseError(source, lineno, "blank line inside point list");
      continue;
    }
    if (in_comments) throw ParseError(source, lineno, "point data after comment lines");
    if (pts.size() == order) throw ParseError(source, lineno, "more than " + std::to_string(order) + " points");
    std::istringstream ls(line);
    std::string re, im, extra;
    if (!(ls >> re >> im) || (ls >> extra)) throw ParseError(source, lineno, "expected '<re> <im>', got '" + line + "'");
    pts.emplace_back(parse_double(re, lineno), parse_double(im, lineno));
  }
  if (pts.size() != order) {
    throw ParseError(source, lineno,
                     "header declares M=" + std::to_string(order) + " but file has " + std::to_string(pts.size()) + " points");
  }
  try {
    return Constellation(std::move(pts));
  } catch (const Error& e) {
    throw ParseError(source, 0, e.what());
  }
}

void format_constellation(std::ostream& out, const Constellation& c, std::span<const std::string> comments) {
  out << "GSHAPE v1 M=" << c.order() << '\n';
  char buf[64];
  for (const auto& z : c.points()) {
    std::snprintf(buf, sizeof buf, "%.17g %.17g\n", z.real(), z.imag());
    out << buf;
  }
  for (const auto& note : comments) out << "# " << note << '\n';
}

Constellation read_constellation(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return parse_constellation(in, path.string());
}

void write_constellation(const Constellation& c, const std::filesystem::path& path, std::span<const std::string> comments) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  format_constellation(out, c, comments);
  if (!out) throw Error("write failed for " + path.string());
}

}  // namespace gshape
