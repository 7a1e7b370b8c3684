#pragma once

#include <complex>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace gshape {

using Complex = std::complex<double>;

bool is_power_of_two(std::size_t n) noexcept;

/// log2(order); throws UnsupportedOrderError unless order is a power of two >= 2.
int bits_per_symbol(std::size_t order);

/// Number of differing bits between two labels.
int hamming_distance(std::size_t a, std::size_t b) noexcept;

/// Binary label of a constellation index, most significant bit first.
///
/// A labeling is the bijection index <-> BitWord; point i of a Constellation always
/// carries BitWord(i, m).
class BitWord {
 public:
  BitWord(std::size_t index, int bits);

  /// Builds a word from explicit bits, MSB first. Every entry must be 0 or 1.
  static BitWord from_bits(std::span<const std::uint8_t> bits);

  std::size_t index() const noexcept { return index_; }
  int size() const noexcept { return bits_; }

  /// Bit at position i (0 = MSB).
  int operator[](int i) const noexcept { return static_cast<int>((index_ >> (bits_ - 1 - i)) & 1U); }

  std::vector<std::uint8_t> bits() const;
  std::string to_string() const;

  friend bool operator==(const BitWord&, const BitWord&) = default;

 private:
  std::size_t index_;
  int bits_;
};

/// M labeled complex points; point i carries label BitWord(i, log2 M).
///
/// Construction enforces M >= 2, M a power of two and finite points. Point
/// separation is checked separately by validate() so that files with duplicate
/// points can still be loaded and inspected.
class Constellation {
 public:
  explicit Constellation(std::vector<Complex> points);

  std::size_t order() const noexcept { return points_.size(); }
  int bits_per_symbol() const noexcept { return bits_; }
  std::span<const Complex> points() const noexcept { return points_; }
  const Complex& operator[](std::size_t i) const { return points_[i]; }

  /// Returns a copy with every point multiplied by a.
  Constellation scaled(double a) const;

  friend bool operator==(const Constellation&, const Constellation&) = default;

 private:
  std::vector<Complex> points_;
  int bits_;
};

/// Probability mass function over constellation indices.
class Pmf {
 public:
  /// Throws DegenerateInputError on negative/non-finite entries or a sum off 1 by more than 1e-12.
  explicit Pmf(std::vector<double> probs);

  static Pmf uniform(std::size_t order);

  std::size_t size() const noexcept { return probs_.size(); }
  std::span<const double> probs() const noexcept { return probs_; }
  double operator[](std::size_t i) const { return probs_[i]; }
  bool is_uniform() const noexcept;

  /// Shannon entropy in bits.
  double entropy_bits() const;

 private:
  std::vector<double> probs_;
};

/// Power-normalized moments of a constellation under a PMF.
struct Moments {
  double mu2;     ///< sum p|x|^2
  double kappa;   ///< sum p|x|^4 / mu2^2
  double kappa3;  ///< sum p|x|^6 / mu2^3
};

/// Minimum pairwise Euclidean distance.
double min_distance(const Constellation& c);

/// Root-mean-square point magnitude under a uniform PMF.
double rms_magnitude(const Constellation& c);

/// Throws DegenerateInputError if two points lie closer than 1e-6 times the RMS magnitude.
void validate(const Constellation& c);

/// Scales c by one positive factor so that sum p|x|^2 = 1.
Constellation normalize_power(const Constellation& c, const Pmf& p);
Constellation normalize_power(const Constellation& c);

Moments moments(const Constellation& c, const Pmf& p);
Moments moments(const Constellation& c);

/// Unit-power square QAM with a binary-reflected Gray code per axis.
/// The first m/2 label bits select the in-phase level, the last m/2 the quadrature level.
Constellation square_qam(std::size_t order);

/// Mean over points of the mean Hamming distance to the Euclidean nearest
/// neighbour(s). Neighbours within relative distance 1e-9 of the nearest all count.
double gray_penalty(const Constellation& c);

/// p_i proportional to exp(-nu |x_i|^2) evaluated on the geometry as given.
Pmf maxwell_boltzmann(const Constellation& c, double nu);

/// Constellation file: `GSHAPE v1 M=<M>` then M lines `<re> <im>` in label order,
/// then optional `#` comment lines.
Constellation parse_constellation(std::istream& in, const std::string& source = "<stream>");
void format_constellation(std::ostream& out, const Constellation& c,
                          std::span<const std::string> comments = {});

Constellation read_constellation(const std::filesystem::path& path);
void write_constellation(const Constellation& c, const std::filesystem::path& path,
                         std::span<const std::string> comments = {});

}  // namespace gshape
