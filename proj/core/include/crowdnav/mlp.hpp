#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "crowdnav/rng.hpp"
#include "crowdnav/vec2.hpp"

namespace crowdnav {

// Two-hidden-layer tanh network with a 2-unit action-mean head, a scalar
// value head on the shared trunk, and a state-independent log-std pair.
// Weights are row-major: w1 is (hidden x obs_dim), w2 (hidden x hidden),
// w_mu (2 x hidden), w_v (1 x hidden).
struct PolicyParams {
  int obs_dim = 0;
  int hidden = 64;

  std::vector<double> w1, b1;
  std::vector<double> w2, b2;
  std::vector<double> w_mu, b_mu;
  std::vector<double> w_v, b_v;
  std::vector<double> log_std;  // length 2

  static PolicyParams init(int obs_dim, int hidden, double init_log_std,
                           SplitMix64& rng);

  // Fixed-order named views over every tensor; the same order everywhere
  // (updates, clipping, serialization, gradient checks).
  std::vector<std::pair<std::string, std::vector<double>*>> tensors();
  std::vector<std::pair<std::string, const std::vector<double>*>> tensors() const;
};

// Gradient holder with the same shapes as PolicyParams.
struct PolicyGrads {
  std::vector<double> w1, b1, w2, b2, w_mu, b_mu, w_v, b_v, log_std;

  explicit PolicyGrads(const PolicyParams& params);
  void zero();
  std::vector<std::vector<double>*> tensors();
  std::vector<const std::vector<double>*> tensors() const;
};

struct PolicyOutput {
  Vec2 mean;
  double value = 0.0;
};

struct ForwardCache {
  std::vector<double> h1, h2;
};

// Deterministic forward pass. Throws DimensionMismatch on a wrong obs length.
PolicyOutput policy_forward(const PolicyParams& params,
                            std::span<const double> obs);
PolicyOutput policy_forward_cached(const PolicyParams& params,
                                   std::span<const double> obs,
                                   ForwardCache& cache);

// Backpropagates d_mean and d_value through the cached activations,
// accumulating into `grads`. log-std gradients are handled by the caller
// (they do not flow through the trunk).
void policy_backward(const PolicyParams& params, const ForwardCache& cache,
                     std::span<const double> obs, const std::array<double, 2>& d_mean,
                     double d_value, PolicyGrads& grads);

struct ActionSample {
  Vec2 action;
  double log_prob = 0.0;
};

// Diagonal Gaussian sample plus its exact log density.
ActionSample sample_action(Vec2 mean, std::span<const double> log_std,
                           SplitMix64& rng);

double gaussian_log_prob(Vec2 action, Vec2 mean,
                         std::span<const double> log_std);

// Closed form: sum_d (log_std_d + 0.5 * log(2*pi*e)).
double gaussian_entropy(std::span<const double> log_std);

// Adam with bias correction:
//   m <- b1*m + (1-b1)*g,  v <- b2*v + (1-b2)*g^2
//   theta <- theta - lr * (m/(1-b1^t)) / (sqrt(v/(1-b2^t)) + eps)
struct AdamState {
  std::vector<std::vector<double>> m, v;
  long long t = 0;

  explicit AdamState(const PolicyParams& params);
};

void adam_step(PolicyParams& params, const PolicyGrads& grads, AdamState& state,
               double lr, double beta1 = 0.9, double beta2 = 0.999,
               double eps = 1e-8);

double global_grad_norm(const PolicyGrads& grads);
void scale_grads(PolicyGrads& grads, double factor);

}  // namespace crowdnav
