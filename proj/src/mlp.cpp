#include "rv/mlp.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace rv {

void MlpShape::validate() const {
  if (input < 1 || hidden < 1 || output < 1) {
    throw std::invalid_argument("network layer sizes must be positive");
  }
}

MlpParams MlpParams::zeros(const MlpShape& shape) {
  shape.validate();
  MlpParams p;
  p.shape = shape;
  p.w1 = Eigen::MatrixXd::Zero(shape.hidden, shape.input);
  p.b1 = Eigen::VectorXd::Zero(shape.hidden);
  p.w2 = Eigen::MatrixXd::Zero(shape.hidden, shape.hidden);
  p.b2 = Eigen::VectorXd::Zero(shape.hidden);
  p.w3 = Eigen::MatrixXd::Zero(shape.output, shape.hidden);
  p.b3 = Eigen::VectorXd::Zero(shape.output);
  return p;
}

MlpParams MlpParams::init_uniform(const MlpShape& shape, Rng& rng) {
  MlpParams p = zeros(shape);
  auto fill = [&rng](auto& m, int fan_in) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      for (Eigen::Index r = 0; r < m.rows(); ++r) {
        m(r, c) = rng.uniform(-bound, bound);
      }
    }
  };
  fill(p.w1, shape.input);
  fill(p.b1, shape.input);
  fill(p.w2, shape.hidden);
  fill(p.b2, shape.hidden);
  fill(p.w3, shape.hidden);
  fill(p.b3, shape.hidden);
  return p;
}

std::size_t MlpParams::parameter_count() const {
  return static_cast<std::size_t>(w1.size() + b1.size() + w2.size() +
                                  b2.size() + w3.size() + b3.size());
}

bool MlpParams::finite() const {
  return w1.allFinite() && b1.allFinite() && w2.allFinite() &&
         b2.allFinite() && w3.allFinite() && b3.allFinite();
}

MlpGrad MlpGrad::zeros(const MlpShape& shape) {
  MlpGrad g;
  g.w1 = Eigen::MatrixXd::Zero(shape.hidden, shape.input);
  g.b1 = Eigen::VectorXd::Zero(shape.hidden);
  g.w2 = Eigen::MatrixXd::Zero(shape.hidden, shape.hidden);
  g.b2 = Eigen::VectorXd::Zero(shape.hidden);
  g.w3 = Eigen::MatrixXd::Zero(shape.output, shape.hidden);
  g.b3 = Eigen::VectorXd::Zero(shape.output);
  return g;
}

void MlpGrad::set_zero() {
  w1.setZero();
  b1.setZero();
  w2.setZero();
  b2.setZero();
  w3.setZero();
  b3.setZero();
}

namespace {

Eigen::VectorXd to_vector(std::span<const double> features) {
  return Eigen::Map<const Eigen::VectorXd>(features.data(),
                                           static_cast<Eigen::Index>(features.size()));
}

void check_features(const MlpParams& p, std::span<const double> features) {
  if (static_cast<int>(features.size()) != p.shape.input) {
    throw std::invalid_argument("feature length does not match the input layer");
  }
}

}  // namespace

ForwardCache forward_cached(const MlpParams& p,
                            std::span<const double> features) {
  check_features(p, features);
  ForwardCache c;
  c.x = to_vector(features);
  c.z1 = p.w1 * c.x + p.b1;
  c.h1 = c.z1.cwiseMax(0.0);
  c.z2 = p.w2 * c.h1 + p.b2;
  c.h2 = c.z2.cwiseMax(0.0);
  c.q = p.w3 * c.h2 + p.b3;
  return c;
}

Eigen::VectorXd forward(const MlpParams& p, std::span<const double> features) {
  return forward_cached(p, features).q;
}

void accumulate_grad_q(const MlpParams& p, const ForwardCache& cache,
                       int action, double coef, MlpGrad& acc) {
  if (action < 0 || action >= p.shape.output) {
    throw std::invalid_argument("action out of range");
  }
  // Output layer: only the selected action's row is connected.
  acc.w3.row(action) += coef * cache.h2.transpose();
  acc.b3(action) += coef;
  // Backpropagate through the rectifier masks.
  Eigen::VectorXd gz2 =
      (coef * p.w3.row(action).transpose().array() *
       (cache.z2.array() > 0.0).cast<double>())
          .matrix();
  acc.w2.noalias() += gz2 * cache.h1.transpose();
  acc.b2 += gz2;
  Eigen::VectorXd gz1 =
      ((p.w2.transpose() * gz2).array() * (cache.z1.array() > 0.0).cast<double>())
          .matrix();
  acc.w1.noalias() += gz1 * cache.x.transpose();
  acc.b1 += gz1;
}

MlpGrad grad_q(const MlpParams& p, std::span<const double> features,
               int action) {
  MlpGrad g = MlpGrad::zeros(p.shape);
  const ForwardCache cache = forward_cached(p, features);
  accumulate_grad_q(p, cache, action, 1.0, g);
  return g;
}

void FaUpdateConfig::validate() const {
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning_rate must be positive");
  if (!(gamma >= 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must be in [0,1]");
  if (batch < 1) throw std::invalid_argument("batch must be positive");
  if (buffer_capacity < 1) throw std::invalid_argument("buffer_capacity must be positive");
  if (total_steps < 1) throw std::invalid_argument("total_steps must be positive");
  if (!(beta > 0.0)) throw std::invalid_argument("beta must be positive");
  if (target_sync_period < 0) {
    throw std::invalid_argument("target_sync_period must be >= 0");
  }
}

double td_target(const MlpParams& target, const FaExperience& e, double gamma,
                 Flavor flavor, double beta) {
  if (e.terminal) return e.reward;
  const auto feats = e.next_state.features();
  const Eigen::VectorXd q = forward(target, feats);
  const std::span<const double> row{q.data(), static_cast<std::size_t>(q.size())};
  const double next_value =
      is_soft(flavor) ? logsumexp(beta, row) : max_value(row);
  return e.reward + gamma * next_value;
}

std::vector<double> sgd_minibatch_update(MlpParams& params,
                                         const MlpParams& target,
                                         std::span<const FaExperience> batch,
                                         std::span<const double> is_w,
                                         Flavor flavor,
                                         const FaUpdateConfig& cfg) {
  if (batch.empty()) throw std::invalid_argument("batch must be nonempty");
  if (is_w.size() != batch.size()) {
    throw std::invalid_argument("one importance weight per batch entry required");
  }
  std::vector<double> tds(batch.size());
  MlpGrad acc = MlpGrad::zeros(params.shape);
  const double inv_batch = 1.0 / static_cast<double>(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    const FaExperience& e = batch[i];
    const auto feats = e.state.features();
    const ForwardCache cache = forward_cached(params, feats);
    const double td =
        td_target(target, e, cfg.gamma, flavor, cfg.beta) - cache.q(e.action);
    if (!std::isfinite(td)) {
      throw DivergenceError("non-finite TD error in minibatch update");
    }
    tds[i] = td;
    accumulate_grad_q(params, cache, e.action, is_w[i] * td * inv_batch, acc);
  }
  params.w1 += cfg.learning_rate * acc.w1;
  params.b1 += cfg.learning_rate * acc.b1;
  params.w2 += cfg.learning_rate * acc.w2;
  params.b2 += cfg.learning_rate * acc.b2;
  params.w3 += cfg.learning_rate * acc.w3;
  params.b3 += cfg.learning_rate * acc.b3;
  return tds;
}

FaSample fa_virtual_rows(const MlpParams& params, const MlpParams& target,
                         const FaExperience& e, Flavor flavor,
                         const FaUpdateConfig& cfg) {
  const auto feats = e.state.features();
  const Eigen::VectorXd q = forward(params, feats);
  FaSample s;
  s.row_old.assign(q.data(), q.data() + q.size());
  s.row_new = s.row_old;
  const double bootstrap = td_target(target, e, cfg.gamma, flavor, cfg.beta);
  s.row_new[static_cast<std::size_t>(e.action)] = bootstrap;
  s.td = bootstrap - s.row_old[static_cast<std::size_t>(e.action)];
  return s;
}

MetricRecord metrics_fa(const MlpParams& params, const MlpParams& target,
                        const FaExperience& e, Flavor flavor,
                        const FaUpdateConfig& cfg) {
  if (!is_fa(flavor)) {
    throw std::invalid_argument("metrics_fa expects a function-approximation flavor");
  }
  const FaSample s = fa_virtual_rows(params, target, e, flavor, cfg);
  return metric_record_rows(s.row_old, s.row_new, e.action, s.td, flavor,
                            /*effective_alpha=*/1.0, cfg.beta);
}

namespace {

constexpr char kMagic[8] = {'r', 'v', 'm', 'l', 'p', '0', '1', '\n'};

void write_doubles(std::ofstream& out, const double* data, std::size_t n) {
  out.write(reinterpret_cast<const char*>(data),
            static_cast<std::streamsize>(n * sizeof(double)));
}

void read_doubles(std::ifstream& in, double* data, std::size_t n) {
  in.read(reinterpret_cast<char*>(data),
          static_cast<std::streamsize>(n * sizeof(double)));
  if (!in) throw std::runtime_error("checkpoint truncated");
}

}  // namespace

void save_mlp(const MlpParams& p, const std::string& path) {
  static_assert(std::endian::native == std::endian::little,
                "checkpoint layout assumes a little-endian host");
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot open checkpoint for writing: " + path);
  out.write(kMagic, sizeof(kMagic));
  const std::int64_t dims[3] = {p.shape.input, p.shape.hidden, p.shape.output};
  out.write(reinterpret_cast<const char*>(dims), sizeof(dims));
  // Row-major weight layout, independent of Eigen's internal storage order.
  auto write_matrix = [&out](const Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        const double v = m(r, c);
        write_doubles(out, &v, 1);
      }
    }
  };
  write_matrix(p.w1);
  write_doubles(out, p.b1.data(), static_cast<std::size_t>(p.b1.size()));
  write_matrix(p.w2);
  write_doubles(out, p.b2.data(), static_cast<std::size_t>(p.b2.size()));
  write_matrix(p.w3);
  write_doubles(out, p.b3.data(), static_cast<std::size_t>(p.b3.size()));
  if (!out) throw std::runtime_error("checkpoint write failed: " + path);
}

MlpParams load_mlp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open checkpoint: " + path);
  char magic[sizeof(kMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("not a network checkpoint: " + path);
  }
  std::int64_t dims[3];
  in.read(reinterpret_cast<char*>(dims), sizeof(dims));
  if (!in) throw std::runtime_error("checkpoint truncated");
  MlpShape shape{static_cast<int>(dims[0]), static_cast<int>(dims[1]),
                 static_cast<int>(dims[2])};
  shape.validate();
  MlpParams p = MlpParams::zeros(shape);
  auto read_matrix = [&in](Eigen::MatrixXd& m) {
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
      for (Eigen::Index c = 0; c < m.cols(); ++c) {
        read_doubles(in, &m(r, c), 1);
      }
    }
  };
  read_matrix(p.w1);
  read_doubles(in, p.b1.data(), static_cast<std::size_t>(p.b1.size()));
  read_matrix(p.w2);
  read_doubles(in, p.b2.data(), static_cast<std::size_t>(p.b2.size()));
  read_matrix(p.w3);
  read_doubles(in, p.b3.data(), static_cast<std::size_t>(p.b3.size()));
  in.peek();
  if (!in.eof()) throw std::runtime_error("checkpoint has trailing data: " + path);
  return p;
}

}  // namespace rv
