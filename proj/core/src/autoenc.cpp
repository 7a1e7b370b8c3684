#include "gshape/autoenc.hpp"

#include <algorithm>
#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include "gshape/error.hpp"

namespace gshape {

namespace {

constexpr std::size_t kValidationBatch = 8192;

std::size_t gray_to_binary(std::size_t g) {
  std::size_t b = g;
  for (std::size_t s = g >> 1; s; s >>= 1) b ^= s;
  return b;
}

bool is_square_order(std::size_t order) {
  return order >= 4 && order <= 1024 && is_power_of_two(order) && std::countr_zero(order) % 2 == 0;
}

// m x K matrix of target bits, MSB first.
Eigen::MatrixXd target_bits(std::span<const std::size_t> words, int m) {
  Eigen::MatrixXd s(m, static_cast<Eigen::Index>(words.size()));
  for (std::size_t k = 0; k < words.size(); ++k) {
    for (int b = 0; b < m; ++b) s(b, static_cast<Eigen::Index>(k)) = static_cast<double>((words[k] >> (m - 1 - b)) & 1U);
  }
  return s;
}

void glorot(Eigen::MatrixXd& w, Rng& rng) {
  const double limit = std::sqrt(6.0 / static_cast<double>(w.rows() + w.cols()));
  std::uniform_real_distribution<double> u(-limit, limit);
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = u(rng);
  }
}

void put_matrix(const Eigen::MatrixXd& w, Eigen::VectorXd& flat, Eigen::Index& at) {
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) flat(at++) = w(i, j);
  }
}

void get_matrix(Eigen::MatrixXd& w, const Eigen::VectorXd& flat, Eigen::Index& at) {
  for (Eigen::Index i = 0; i < w.rows(); ++i) {
    for (Eigen::Index j = 0; j < w.cols(); ++j) w(i, j) = flat(at++);
  }
}

void put_vector(const Eigen::VectorXd& v, Eigen::VectorXd& flat, Eigen::Index& at) {
  flat.segment(at, v.size()) = v;
  at += v.size();
}

void get_vector(Eigen::VectorXd& v, const Eigen::VectorXd& flat, Eigen::Index& at) {
  v = flat.segment(at, v.size());
  at += v.size();
}

}  // namespace

void TrainConfig::validate() const {
  if (order < 2 || order > 1024 || !is_power_of_two(order)) {
    throw ConfigError("train order must be a power of two in [2, 1024], got " + std::to_string(order));
  }
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (steps < 1) throw ConfigError("steps must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ConfigError("learning_rate must be positive");
  if (hidden_width < 1) throw ConfigError("hidden_width must be >= 1");
  if (restarts < 1) throw ConfigError("restarts must be >= 1");
  if (!(init_jitter >= 0.0)) throw ConfigError("init_jitter must be >= 0");
  if (validation_samples < order) throw ConfigError("validation_samples must be at least the constellation order");
  channel.validate();
}

int AutoencoderParams::bits_per_symbol() const { return gshape::bits_per_symbol(encoder_table.size()); }

std::size_t AutoencoderParams::parameter_count() const noexcept {
  return 2 * encoder_table.size() + static_cast<std::size_t>(decoder.w1.size() + decoder.b1.size() + decoder.w2.size() +
                                                             decoder.b2.size() + decoder.w3.size() + decoder.b3.size());
}

Eigen::VectorXd flatten(const AutoencoderParams& p) {
  Eigen::VectorXd flat(static_cast<Eigen::Index>(p.parameter_count()));
  Eigen::Index at = 0;
  for (const auto& z : p.encoder_table) {
    flat(at++) = z.real();
    flat(at++) = z.imag();
  }
  put_matrix(p.decoder.w1, flat, at);
  put_vector(p.decoder.b1, flat, at);
  put_matrix(p.decoder.w2, flat, at);
  put_vector(p.decoder.b2, flat, at);
  put_matrix(p.decoder.w3, flat, at);
  put_vector(p.decoder.b3, flat, at);
  return flat;
}

void unflatten(const Eigen::VectorXd& flat, AutoencoderParams& p) {
  if (flat.size() != static_cast<Eigen::Index>(p.parameter_count())) throw Error("flat parameter size mismatch");
  Eigen::Index at = 0;
  for (auto& z : p.encoder_table) {
    z = {flat(at), flat(at + 1)};
    at += 2;
  }
  get_matrix(p.decoder.w1, flat, at);
  get_vector(p.decoder.b1, flat, at);
  get_matrix(p.decoder.w2, flat, at);
  get_vector(p.decoder.b2, flat, at);
  get_matrix(p.decoder.w3, flat, at);
  get_vector(p.decoder.b3, flat, at);
}

std::vector<Complex> initial_table(std::size_t order) {
  if (is_square_order(order)) {
    const auto c = square_qam(order);
    return {c.points().begin(), c.points().end()};
  }
  const int m = bits_per_symbol(order);
  const std::size_t per_ring = order / 2;
  std::vector<Complex> pts(order);
  for (std::size_t i = 0; i < order; ++i) {
    const std::size_t ring = i >> (m - 1);
    const std::size_t low = i & (per_ring - 1);
    const double pos = static_cast<double>(gray_to_binary(low)) + 0.5 * static_cast<double>(ring);
    const double angle = 2.0 * std::numbers::pi * pos / static_cast<double>(per_ring);
    pts[i] = std::polar(1.0 + static_cast<double>(ring), angle);
  }
  const auto c = normalize_power(Constellation(std::move(pts)));
  return {c.points().begin(), c.points().end()};
}

AutoencoderParams init_params(const TrainConfig& config, Rng& rng) {
  config.validate();
  const int m = bits_per_symbol(config.order);
  AutoencoderParams p;
  p.encoder_table = initial_table(config.order);
  if (config.init_jitter > 0.0) {
    std::normal_distribution<double> jitter(0.0, config.init_jitter / std::sqrt(2.0));
    for (auto& z : p.encoder_table) {
      const double re = jitter(rng);
      const double im = jitter(rng);
      z += Complex{re, im};
    }
  }
  const auto h = static_cast<Eigen::Index>(config.hidden_width);
  auto& d = p.decoder;
  d.w1.resize(h, 2);
  d.w2.resize(h, h);
  d.w3.resize(m, h);
  glorot(d.w1, rng);
  glorot(d.w2, rng);
  glorot(d.w3, rng);
  d.b1 = Eigen::VectorXd::Zero(h);
  d.b2 = Eigen::VectorXd::Zero(h);
  d.b3 = Eigen::VectorXd::Zero(m);
  return p;
}

Constellation extract_constellation(const AutoencoderParams& p) { return normalize_power(Constellation(p.encoder_table)); }

std::vector<Complex> encode(const AutoencoderParams& p, std::span<const std::size_t> words) {
  const auto unit = extract_constellation(p);
  std::vector<Complex> x(words.size());
  for (std::size_t k = 0; k < words.size(); ++k) {
    if (words[k] >= unit.order()) throw Error("word index out of range");
    x[k] = unit[words[k]];
  }
  return x;
}

ForwardResult forward(const AutoencoderParams& p, std::span<const std::size_t> words, const ChannelParams& channel,
                      Rng& rng) {
  std::vector<Complex> noise(words.size());
  draw_unit_noise(noise, rng);
  return forward_with_noise(p, words, channel, noise);
}

ForwardResult forward_with_noise(const AutoencoderParams& p, std::span<const std::size_t> words,
                                 const ChannelParams& channel, std::span<const Complex> unit_noise) {
  if (unit_noise.size() != words.size()) throw Error("noise draw size does not match batch size");
  const std::size_t order = p.order();
  const int m = p.bits_per_symbol();

  ForwardResult out;
  ForwardCache& c = out.cache;
  c.words.assign(words.begin(), words.end());
  c.unit_noise.assign(unit_noise.begin(), unit_noise.end());
  c.channel = channel;

  double power = 0.0;
  for (const auto& z : p.encoder_table) power += std::norm(z);
  power /= static_cast<double>(order);
  if (!(power > 0.0) || !std::isfinite(power)) throw DegenerateInputError("encoder table has zero or non-finite power");
  c.table_power = power;
  const Constellation unit(p.encoder_table);
  validate(unit);
  const double inv_rms = 1.0 / std::sqrt(power);
  c.normalized_table.resize(order);
  for (std::size_t j = 0; j < order; ++j) c.normalized_table[j] = p.encoder_table[j] * inv_rms;
  c.moments = moments(Constellation(c.normalized_table));
  c.sigma2 = noise_variance(channel, c.moments);

  // The decoder sees y / sqrt(P) = x + sqrt(sigma2 / P) eps.
  const double noise_scale = std::sqrt(c.sigma2 / channel.launch_power_mw);
  const auto batch = static_cast<Eigen::Index>(words.size());
  c.input.resize(2, batch);
  for (Eigen::Index k = 0; k < batch; ++k) {
    const auto w = words[static_cast<std::size_t>(k)];
    if (w >= order) throw Error("word index out of range");
    const Complex u = c.normalized_table[w] + noise_scale * unit_noise[static_cast<std::size_t>(k)];
    c.input(0, k) = u.real();
    c.input(1, k) = u.imag();
  }

  const auto& d = p.decoder;
  if (d.outputs() != m) throw Error("decoder output width does not match bits per symbol");
  c.hidden1 = ((d.w1 * c.input).colwise() + d.b1).array().tanh().matrix();
  c.hidden2 = ((d.w2 * c.hidden1).colwise() + d.b2).array().tanh().matrix();
  const Eigen::MatrixXd logits = (d.w3 * c.hidden2).colwise() + d.b3;
  c.raw = (1.0 / (1.0 + (-logits.array()).exp())).matrix();
  out.posteriors = c.raw.array().max(kPosteriorFloor).min(1.0 - kPosteriorFloor).matrix();
  return out;
}

double bce_loss(std::span<const std::size_t> words, const Eigen::MatrixXd& posteriors) {
  const int m = static_cast<int>(posteriors.rows());
  if (posteriors.cols() != static_cast<Eigen::Index>(words.size())) throw Error("posterior batch size mismatch");
  double total = 0.0;
  for (std::size_t k = 0; k < words.size(); ++k) {
    for (int b = 0; b < m; ++b) {
      const double r = std::clamp(posteriors(b, static_cast<Eigen::Index>(k)), kPosteriorFloor, 1.0 - kPosteriorFloor);
      const bool bit = (words[k] >> (m - 1 - b)) & 1U;
      total -= bit ? std::log(r) : std::log1p(-r);
    }
  }
  return total / (static_cast<double>(words.size()) * m);
}

Eigen::VectorXd backward(const AutoencoderParams& p, const ForwardCache& c) {
  const std::size_t order = p.order();
  const int m = p.bits_per_symbol();
  const auto batch = static_cast<Eigen::Index>(c.words.size());
  const auto& d = p.decoder;

  // dL/dlogit = (r - s) / (K m); zero where the clamp is active.
  const Eigen::MatrixXd s = target_bits(c.words, m);
  Eigen::MatrixXd delta3 = (c.raw - s) / (static_cast<double>(batch) * m);
  for (Eigen::Index k = 0; k < batch; ++k) {
    for (int b = 0; b < m; ++b) {
      const double r = c.raw(b, k);
      if (r < kPosteriorFloor || r > 1.0 - kPosteriorFloor) delta3(b, k) = 0.0;
    }
  }

  AutoencoderParams g = p;
  g.decoder.w3 = delta3 * c.hidden2.transpose();
  g.decoder.b3 = delta3.rowwise().sum();
  const Eigen::MatrixXd delta2 = ((d.w3.transpose() * delta3).array() * (1.0 - c.hidden2.array().square())).matrix();
  g.decoder.w2 = delta2 * c.hidden1.transpose();
  g.decoder.b2 = delta2.rowwise().sum();
  const Eigen::MatrixXd delta1 = ((d.w2.transpose() * delta2).array() * (1.0 - c.hidden1.array().square())).matrix();
  g.decoder.w1 = delta1 * c.input.transpose();
  g.decoder.b1 = delta1.rowwise().sum();
  const Eigen::MatrixXd grad_input = d.w1.transpose() * delta1;

  // Decoder input u_k = x_{w_k} + sqrt(sigma2 / P) eps_k.
  std::vector<Complex> grad_x(order, Complex{});
  double grad_noise_scale = 0.0;
  for (Eigen::Index k = 0; k < batch; ++k) {
    const Complex gu{grad_input(0, k), grad_input(1, k)};
    grad_x[c.words[static_cast<std::size_t>(k)]] += gu;
    const Complex eps = c.unit_noise[static_cast<std::size_t>(k)];
    grad_noise_scale += gu.real() * eps.real() + gu.imag() * eps.imag();
  }
  const double grad_sigma2 = grad_noise_scale / (2.0 * std::sqrt(c.sigma2 * c.channel.launch_power_mw));

  // sigma2 depends on the table through kappa = mean|x|^4 and kappa3 = mean|x|^6.
  const auto partials = noise_variance_partials(c.channel);
  const double inv_m = 1.0 / static_cast<double>(order);
  for (std::size_t j = 0; j < order; ++j) {
    const Complex x = c.normalized_table[j];
    const double e = std::norm(x);
    grad_x[j] += grad_sigma2 * (partials.d_kappa * 4.0 * e + partials.d_kappa3 * 6.0 * e * e) * inv_m * x;
  }

  // Back through x = T / sqrt(mean|T|^2).
  double radial = 0.0;
  for (std::size_t j = 0; j < order; ++j) {
    radial += grad_x[j].real() * c.normalized_table[j].real() + grad_x[j].imag() * c.normalized_table[j].imag();
  }
  radial *= inv_m;
  const double inv_rms = 1.0 / std::sqrt(c.table_power);
  for (std::size_t j = 0; j < order; ++j) g.encoder_table[j] = inv_rms * (grad_x[j] - radial * c.normalized_table[j]);

  return flatten(g);
}

double rate_from_loss(double loss_nats_per_bit, int m) {
  return std::max(0.0, static_cast<double>(m) * (1.0 - loss_nats_per_bit / std::numbers::ln2));
}

AdamOptimizer::AdamOptimizer(Eigen::Index size, double learning_rate, double beta1, double beta2, double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon),
      m_(Eigen::VectorXd::Zero(size)), v_(Eigen::VectorXd::Zero(size)) {}

void AdamOptimizer::step(Eigen::VectorXd& params, const Eigen::VectorXd& grad) {
  beta1_pow_ *= beta1_;
  beta2_pow_ *= beta2_;
  m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
  v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseProduct(grad);
  const double c1 = 1.0 / (1.0 - beta1_pow_);
  const double c2 = 1.0 / (1.0 - beta2_pow_);
  params.array() -= lr_ * (m_.array() * c1) / ((v_.array() * c2).sqrt() + eps_);
}

double validation_rate(const AutoencoderParams& p, const TrainConfig& config) {
  const std::size_t order = p.order();
  Rng rng(derive_seed(config.seed, "validation"));
  double total = 0.0;
  std::size_t done = 0;
  std::vector<std::size_t> words;
  while (done < config.validation_samples) {
    const std::size_t n = std::min(kValidationBatch, config.validation_samples - done);
    words.resize(n);
    for (std::size_t k = 0; k < n; ++k) words[k] = (done + k) % order;
    const auto fr = forward(p, words, config.channel, rng);
    total += bce_loss(words, fr.posteriors) * static_cast<double>(n);
    done += n;
  }
  return rate_from_loss(total / static_cast<double>(done), p.bits_per_symbol());
}

TrainResult train(const TrainConfig& config, const CheckpointFn& on_checkpoint) {
  config.validate();
  const int m = bits_per_symbol(config.order);

  std::vector<RestartOutcome> outcomes(config.restarts);
  std::optional<AutoencoderParams> best_params;
  std::vector<LossRecord> best_history;
  std::size_t best_restart = 0;

  for (std::size_t r = 0; r < config.restarts; ++r) {
    Rng rng(derive_seed(config.seed, "restart", {r}));
    AutoencoderParams p = init_params(config, rng);
    Eigen::VectorXd theta = flatten(p);
    AdamOptimizer adam(theta.size(), config.learning_rate);
    std::uniform_int_distribution<std::size_t> pick(0, config.order - 1);
    std::vector<std::size_t> words(config.batch_size);
    std::vector<LossRecord> history;
    history.reserve(config.steps);
    RestartOutcome& outcome = outcomes[r];
    try {
      for (std::size_t step = 1; step <= config.steps; ++step) {
        for (auto& w : words) w = pick(rng);
        const auto fr = forward(p, words, config.channel, rng);
        const double loss = bce_loss(words, fr.posteriors);
        if (!std::isfinite(loss)) throw NumericalError("loss is not finite at step " + std::to_string(step));
        const Eigen::VectorXd grad = backward(p, fr.cache);
        if (!grad.allFinite()) throw NumericalError("gradient is not finite at step " + std::to_string(step));
        history.push_back({step, loss, rate_from_loss(loss, m)});
        adam.step(theta, grad);
        unflatten(theta, p);
        if (on_checkpoint && config.checkpoint_interval > 0 && step % config.checkpoint_interval == 0) {
          on_checkpoint(CheckpointInfo{r, step, p});
        }
      }
      outcome.validation_rate = validation_rate(p, config);
      if (!std::isfinite(outcome.validation_rate)) throw NumericalError("validation rate is not finite");
      outcome.ok = true;
    } catch (const NumericalError& e) {
      outcome.failure = e.what();
    } catch (const DegenerateInputError& e) {
      outcome.failure = e.what();
    }
    if (outcome.ok && (!best_params || outcome.validation_rate > outcomes[best_restart].validation_rate)) {
      best_params = std::move(p);
      best_history = std::move(history);
      best_restart = r;
    }
  }

  if (!best_params) {
    std::string why = "all " + std::to_string(config.restarts) + " training restarts failed:";
    for (std::size_t r = 0; r < outcomes.size(); ++r) why += " [" + std::to_string(r) + "] " + outcomes[r].failure;
    throw NumericalError(why);
  }
  Constellation constellation = extract_constellation(*best_params);
  return TrainResult{std::move(*best_params), std::move(constellation), std::move(best_history), best_restart,
                     outcomes[best_restart].validation_rate, std::move(outcomes)};
}

void format_decoder(std::ostream& out, const Decoder& d) {
  char buf[64];
  auto matrix = [&](const char* name, const Eigen::MatrixXd& w) {
    out << "matrix " << name << ' ' << w.rows() << ' ' << w.cols() << '\n';
    for (Eigen::Index i = 0; i < w.rows(); ++i) {
      for (Eigen::Index j = 0; j < w.cols(); ++j) {
        std::snprintf(buf, sizeof buf, j ? " %.17g" : "%.17g", w(i, j));
        out << buf;
      }
      out << '\n';
    }
  };
  auto vector = [&](const char* name, const Eigen::VectorXd& v) {
    out << "vector " << name << ' ' << v.size() << '\n';
    for (Eigen::Index i = 0; i < v.size(); ++i) {
      std::snprintf(buf, sizeof buf, i ? " %.17g" : "%.17g", v(i));
      out << buf;
    }
    out << '\n';
  };
  out << "GSHAPE-DECODER v1\n";
  out << "activation tanh\n";
  matrix("w1", d.w1);
  vector("b1", d.b1);
  matrix("w2", d.w2);
  vector("b2", d.b2);
  matrix("w3", d.w3);
  vector("b3", d.b3);
}

Decoder parse_decoder(std::istream& in, const std::string& source) {
  std::size_t lineno = 0;
  std::string line;
  auto next_line = [&]() -> std::string& {
    if (!std::getline(in, line)) throw ParseError(source, lineno + 1, "unexpected end of file");
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    return line;
  };
  if (next_line() != "GSHAPE-DECODER v1") throw ParseError(source, lineno, "expected header 'GSHAPE-DECODER v1'");
  if (next_line() != "activation tanh") throw ParseError(source, lineno, "expected 'activation tanh'");

  auto read_values = [&](Eigen::Index count, std::vector<double>& out) {
    out.clear();
    std::istringstream ls(next_line());
    std::string tok;
    while (ls >> tok) {
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (ec != std::errc() || ptr != tok.data() + tok.size()) throw ParseError(source, lineno, "invalid number '" + tok + "'");
      out.push_back(v);
    }
    if (static_cast<Eigen::Index>(out.size()) != count) {
      throw ParseError(source, lineno, "expected " + std::to_string(count) + " values, got " + std::to_string(out.size()));
    }
  };
  std::vector<double> row;
  auto matrix = [&](const std::string& name) {
    std::istringstream hs(next_line());
    std::string kind, got;
    Eigen::Index rows = 0, cols = 0;
    if (!(hs >> kind >> got >> rows >> cols) || kind != "matrix" || got != name || rows < 1 || cols < 1) {
      throw ParseError(source, lineno, "expected 'matrix " + name + " <rows> <cols>'");
    }
    Eigen::MatrixXd w(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i) {
      read_values(cols, row);
      for (Eigen::Index j = 0; j < cols; ++j) w(i, j) = row[static_cast<std::size_t>(j)];
    }
    return w;
  };
  auto vector = [&](const std::string& name) {
    std::istringstream hs(next_line());
    std::string kind, got;
    Eigen::Index n = 0;
    if (!(hs >> kind >> got >> n) || kind != "vector" || got != name || n < 1) {
      throw ParseError(source, lineno, "expected 'vector " + name + " <n>'");
    }
    read_values(n, row);
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(row.data(), n));
  };
  Decoder d;
  d.w1 = matrix("w1");
  d.b1 = vector("b1");
  d.w2 = matrix("w2");
  d.b2 = vector("b2");
  d.w3 = matrix("w3");
  d.b3 = vector("b3");
  const auto h = d.w1.rows();
  if (d.w1.cols() != 2 || d.b1.size() != h || d.w2.rows() != h || d.w2.cols() != h || d.b2.size() != h ||
      d.w3.cols() != h || d.b3.size() != d.w3.rows()) {
    throw ParseError(source, 0, "inconsistent decoder layer shapes");
  }
  return d;
}

void write_decoder(const Decoder& d, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  format_decoder(out, d);
}

Decoder read_decoder(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path.string(), 0, "cannot open file");
  return parse_decoder(in, path.string());
}

void write_loss_history(std::span<const LossRecord> history, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "step,loss_nats_per_bit,rate_bits\n";
  char buf[96];
  for (const auto& r : history) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g\n", r.step, r.loss_nats_per_bit, r.rate_bits);
    out << buf;
  }
}

}  // namespace gshape
