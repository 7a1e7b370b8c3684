#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "gshape/channel.hpp"
#include "gshape/constellation.hpp"
#include "gshape/rng.hpp"

namespace gshape {

/// Floor applied to decoder posteriors before taking logs.
inline constexpr double kPosteriorFloor = 1e-12;

struct TrainConfig {
  std::size_t order = 16;
  std::size_t batch_size = 1024;
  std::size_t steps = 20000;
  double learning_rate = 1e-3;
  std::uint64_t seed = 1;
  ChannelParams channel{};
  std::size_t hidden_width = 64;
  std::size_t restarts = 5;
  /// Std of the complex jitter added to the initial table.
  double init_jitter = 0.01;
  /// Words x noise draws used for the end-of-run validation rate.
  std::size_t validation_samples = 65536;
  /// Checkpoint callback period in steps; 0 disables checkpoints.
  std::size_t checkpoint_interval = 0;

  /// Throws ConfigError on invalid fields.
  void validate() const;
};

/// Decoder MLP 2 -> H -> H -> m, tanh hidden units, sigmoid outputs.
/// Weight matrices are (fan_out x fan_in).
struct Decoder {
  Eigen::MatrixXd w1, w2, w3;
  Eigen::VectorXd b1, b2, b3;

  std::size_t hidden_width() const noexcept { return static_cast<std::size_t>(w1.rows()); }
  int outputs() const noexcept { return static_cast<int>(w3.rows()); }
};

struct AutoencoderParams {
  std::vector<Complex> encoder_table;
  Decoder decoder;

  std::size_t order() const noexcept { return encoder_table.size(); }
  int bits_per_symbol() const;
  std::size_t parameter_count() const noexcept;
};

/// Flat parameter vector: table as (re, im) pairs, then w1 (row-major), b1, w2, b2, w3, b3.
Eigen::VectorXd flatten(const AutoencoderParams& p);
void unflatten(const Eigen::VectorXd& flat, AutoencoderParams& p);

/// Initial table for order M: unit-power square QAM when M is a perfect square
/// power of two; otherwise two concentric rings of M/2 points (ring chosen by the
/// MSB, Gray order around each ring). Deterministic, no jitter.
std::vector<Complex> initial_table(std::size_t order);

/// Initial table plus complex jitter and Glorot-uniform decoder weights, zero biases.
AutoencoderParams init_params(const TrainConfig& config, Rng& rng);

/// Unit-power (uniform PMF) version of the encoder table.
Constellation extract_constellation(const AutoencoderParams& p);

/// Table lookup followed by normalization over the whole table.
std::vector<Complex> encode(const AutoencoderParams& p, std::span<const std::size_t> words);

/// Intermediates retained by forward() for backward().
struct ForwardCache {
  std::vector<std::size_t> words;
  std::vector<Complex> unit_noise;  ///< eps with E|eps|^2 = 1
  std::vector<Complex> normalized_table;
  double table_power = 0.0;  ///< mean |T|^2 before normalization
  Moments moments{};
  double sigma2 = 0.0;
  ChannelParams channel{};
  Eigen::MatrixXd input;   ///< 2 x K received samples
  Eigen::MatrixXd hidden1; ///< H x K, post-activation
  Eigen::MatrixXd hidden2; ///< H x K, post-activation
  Eigen::MatrixXd raw;     ///< m x K unclamped sigmoid outputs
};

struct ForwardResult {
  Eigen::MatrixXd posteriors;  ///< m x K, clamped to [eps, 1 - eps]
  ForwardCache cache;
};

/// Encode, pass through the surrogate channel with exact table moments, decode.
/// Throws DegenerateInputError when the table has coincident points.
ForwardResult forward(const AutoencoderParams& p, std::span<const std::size_t> words,
                      const ChannelParams& channel, Rng& rng);

/// Same as forward() with a caller-supplied unit-variance noise draw.
ForwardResult forward_with_noise(const AutoencoderParams& p, std::span<const std::size_t> words,
                                 const ChannelParams& channel, std::span<const Complex> unit_noise);

/// Mean per-bit binary cross entropy in nats.
double bce_loss(std::span<const std::size_t> words, const Eigen::MatrixXd& posteriors);

/// Gradient of bce_loss with respect to flatten(p).
Eigen::VectorXd backward(const AutoencoderParams& p, const ForwardCache& cache);

/// m (1 - L / ln 2), floored at zero. A lower bound on the GMI of the decoder.
double rate_from_loss(double loss_nats_per_bit, int m);

struct LossRecord {
  std::size_t step;
  double loss_nats_per_bit;
  double rate_bits;
};

/// Adam with bias correction.
class AdamOptimizer {
 public:
  AdamOptimizer(Eigen::Index size, double learning_rate, double beta1 = 0.9, double beta2 = 0.999,
                double epsilon = 1e-8);

  void step(Eigen::VectorXd& params, const Eigen::VectorXd& grad);

 private:
  double lr_, beta1_, beta2_, eps_;
  double beta1_pow_ = 1.0, beta2_pow_ = 1.0;
  Eigen::VectorXd m_, v_;
};

struct CheckpointInfo {
  std::size_t restart;
  std::size_t step;
  const AutoencoderParams& params;
};
using CheckpointFn = std::function<void(const CheckpointInfo&)>;

struct RestartOutcome {
  bool ok = false;
  double validation_rate = 0.0;
  std::string failure;
};

struct TrainResult {
  AutoencoderParams params;
  Constellation constellation;
  std::vector<LossRecord> history;
  std::size_t best_restart = 0;
  double validation_rate = 0.0;
  std::vector<RestartOutcome> restarts;
};

/// Validation rate of a parameter set on the config's fixed validation draw.
double validation_rate(const AutoencoderParams& p, const TrainConfig& config);

/// Runs `restarts` independent Adam runs and keeps the one with the highest
/// validation rate (ties to the lowest restart index). Throws NumericalError if
/// every restart diverges.
TrainResult train(const TrainConfig& config, const CheckpointFn& on_checkpoint = {});

/// Decoder sidecar: `GSHAPE-DECODER v1`, then `matrix <name> <rows> <cols>` / `vector <name> <n>`
/// blocks with row-major values, one matrix row per line.
void format_decoder(std::ostream& out, const Decoder& d);
Decoder parse_decoder(std::istream& in, const std::string& source = "<stream>");
void write_decoder(const Decoder& d, const std::filesystem::path& path);
Decoder read_decoder(const std::filesystem::path& path);

/// `step,loss_nats_per_bit,rate_bits`
void write_loss_history(std::span<const LossRecord> history, const std::filesystem::path& path);

}  // namespace gshape
