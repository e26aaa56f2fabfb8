#pragma once
// Feedforward Q-network (input -> hidden -> hidden -> actions, rectified
// linear hidden units, linear output) with explicit gradients, semi-gradient
// TD minibatch updates, target values, and the target-substituted per-sample
// value metrics.

#include <Eigen/Dense>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "rv/env.hpp"
#include "rv/metrics.hpp"
#include "rv/numerics.hpp"

namespace rv {

// Thrown when training produces non-finite values.
struct DivergenceError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct MlpShape {
  int input = 4;
  int hidden = 256;
  int output = 2;

  void validate() const;  // throws std::invalid_argument
  bool operator==(const MlpShape&) const = default;
};

struct MlpParams {
  MlpShape shape;
  Eigen::MatrixXd w1;  // hidden x input
  Eigen::VectorXd b1;  // hidden
  Eigen::MatrixXd w2;  // hidden x hidden
  Eigen::VectorXd b2;  // hidden
  Eigen::MatrixXd w3;  // output x hidden
  Eigen::VectorXd b3;  // output

  static MlpParams zeros(const MlpShape& shape);
  // Every weight and bias uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)].
  static MlpParams init_uniform(const MlpShape& shape, Rng& rng);

  std::size_t parameter_count() const;
  bool finite() const;
};

// Gradient (or gradient accumulator) with the same layout as MlpParams.
struct MlpGrad {
  Eigen::MatrixXd w1;
  Eigen::VectorXd b1;
  Eigen::MatrixXd w2;
  Eigen::VectorXd b2;
  Eigen::MatrixXd w3;
  Eigen::VectorXd b3;

  static MlpGrad zeros(const MlpShape& shape);
  void set_zero();
};

struct ForwardCache {
  Eigen::VectorXd x;        // input
  Eigen::VectorXd z1, h1;   // first hidden pre/post activation
  Eigen::VectorXd z2, h2;   // second hidden pre/post activation
  Eigen::VectorXd q;        // output action values
};

// Action values for one state. Throws std::invalid_argument on a feature
// vector whose length does not match the input layer.
Eigen::VectorXd forward(const MlpParams& p, std::span<const double> features);
ForwardCache forward_cached(const MlpParams& p,
                            std::span<const double> features);

// Gradient of the scalar Q(features, action) with respect to every parameter.
MlpGrad grad_q(const MlpParams& p, std::span<const double> features,
               int action);

// Adds coef * dQ(cached state, action)/dtheta into acc (shared kernel of
// grad_q and the minibatch update).
void accumulate_grad_q(const MlpParams& p, const ForwardCache& cache,
                       int action, double coef, MlpGrad& acc);

struct FaUpdateConfig {
  double learning_rate = 0.005;
  double gamma = 0.99;
  int batch = 16;
  int buffer_capacity = 1000;
  long long total_steps = 50000;
  double beta = 0.5;  // soft-flavor temperature
  long long target_sync_period = 100;  // 0: no target network, bootstrap live

  void validate() const;  // throws std::invalid_argument
};

// Bootstrap target of one experience against the (target) network:
// plain: r + gamma*max_a' Q(s',a'); soft: r + gamma*logsumexp(beta, Q(s',.));
// terminal: r alone.
double td_target(const MlpParams& target, const FaExperience& e, double gamma,
                 Flavor flavor, double beta);

// One semi-gradient step: theta += lr * mean_i(is_w[i] * td_i * grad Q_i).
// Returns the per-sample TDs (for priority refresh and logging). Throws
// DivergenceError when a TD or network output is non-finite.
std::vector<double> sgd_minibatch_update(MlpParams& params,
                                         const MlpParams& target,
                                         std::span<const FaExperience> batch,
                                         std::span<const double> is_w,
                                         Flavor flavor,
                                         const FaUpdateConfig& cfg);

// The actual row Q(s_k,.), the virtual row with entry a_k replaced by the
// bootstrap target, and the TD between them.
struct FaSample {
  std::vector<double> row_old;
  std::vector<double> row_new;
  double td = 0.0;
};
FaSample fa_virtual_rows(const MlpParams& params, const MlpParams& target,
                         const FaExperience& e, Flavor flavor,
                         const FaUpdateConfig& cfg);

// MetricRecord of one experience under the target-substituted virtual update
// (effective step size 1). flavor must be fa_plain or fa_soft.
MetricRecord metrics_fa(const MlpParams& params, const MlpParams& target,
                        const FaExperience& e, Flavor flavor,
                        const FaUpdateConfig& cfg);

// Binary checkpoint: magic, shape header, then the flat parameter list as
// little-endian 64-bit floats in layer order (w1 row-major, b1, w2, b2, w3,
// b3). Throws std::runtime_error on I/O or format errors.
void save_mlp(const MlpParams& p, const std::string& path);
MlpParams load_mlp(const std::string& path);

}  // namespace rv
