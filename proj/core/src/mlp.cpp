#include "crowdnav/mlp.hpp"

#include <cmath>

#include "crowdnav/errors.hpp"

namespace crowdnav {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;  // log(2*pi)

// Uniform Glorot-style init, gain-scaled.
void fill_uniform(std::vector<double>& w, int fan_in, int fan_out, double gain,
                  SplitMix64& rng) {
  const double bound = gain * std::sqrt(6.0 / (fan_in + fan_out));
  for (auto& x : w) x = rng.uniform(-bound, bound);
}

}  // namespace

PolicyParams PolicyParams::init(int obs_dim, int hidden, double init_log_std,
                                SplitMix64& rng) {
  PolicyParams p;
  p.obs_dim = obs_dim;
  p.hidden = hidden;
  p.w1.resize(static_cast<std::size_t>(hidden) * obs_dim);
  p.b1.assign(static_cast<std::size_t>(hidden), 0.0);
  p.w2.resize(static_cast<std::size_t>(hidden) * hidden);
  p.b2.assign(static_cast<std::size_t>(hidden), 0.0);
  p.w_mu.resize(static_cast<std::size_t>(2) * hidden);
  p.b_mu.assign(2, 0.0);
  p.w_v.resize(static_cast<std::size_t>(hidden));
  p.b_v.assign(1, 0.0);
  p.log_std.assign(2, init_log_std);

  fill_uniform(p.w1, obs_dim, hidden, 1.0, rng);
  fill_uniform(p.w2, hidden, hidden, 1.0, rng);
  // Small action head so the initial policy is near zero velocity.
  fill_uniform(p.w_mu, hidden, 2, 0.01, rng);
  fill_uniform(p.w_v, hidden, 1, 1.0, rng);
  return p;
}

std::vector<std::pair<std::string, std::vector<double>*>>
PolicyParams::tensors() {
  return {{"w1", &w1},     {"b1", &b1},     {"w2", &w2},
          {"b2", &b2},     {"w_mu", &w_mu}, {"b_mu", &b_mu},
          {"w_v", &w_v},   {"b_v", &b_v},   {"log_std", &log_std}};
}

std::vector<std::pair<std::string, const std::vector<double>*>>
PolicyParams::tensors() const {
  return {{"w1", &w1},     {"b1", &b1},     {"w2", &w2},
          {"b2", &b2},     {"w_mu", &w_mu}, {"b_mu", &b_mu},
          {"w_v", &w_v},   {"b_v", &b_v},   {"log_std", &log_std}};
}

PolicyGrads::PolicyGrads(const PolicyParams& params)
    : w1(params.w1.size(), 0.0),
      b1(params.b1.size(), 0.0),
      w2(params.w2.size(), 0.0),
      b2(params.b2.size(), 0.0),
      w_mu(params.w_mu.size(), 0.0),
      b_mu(params.b_mu.size(), 0.0),
      w_v(params.w_v.size(), 0.0),
      b_v(params.b_v.size(), 0.0),
      log_std(params.log_std.size(), 0.0) {}

void PolicyGrads::zero() {
  for (auto* t : tensors()) std::fill(t->begin(), t->end(), 0.0);
}

std::vector<std::vector<double>*> PolicyGrads::tensors() {
  return {&w1, &b1, &w2, &b2, &w_mu, &b_mu, &w_v, &b_v, &log_std};
}

std::vector<const std::vector<double>*> PolicyGrads::tensors() const {
  return {&w1, &b1, &w2, &b2, &w_mu, &b_mu, &w_v, &b_v, &log_std};
}

PolicyOutput policy_forward(const PolicyParams& params,
                            std::span<const double> obs) {
  ForwardCache cache;
  return policy_forward_cached(params, obs, cache);
}

PolicyOutput policy_forward_cached(const PolicyParams& params,
                                   std::span<const double> obs,
                                   ForwardCache& cache) {
  if (static_cast<int>(obs.size()) != params.obs_dim) {
    throw DimensionMismatch("policy_forward: obs length " +
                            std::to_string(obs.size()) + ", expected " +
                            std::to_string(params.obs_dim));
  }
  const int h = params.hidden;
  const int d = params.obs_dim;
  cache.h1.resize(static_cast<std::size_t>(h));
  cache.h2.resize(static_cast<std::size_t>(h));

  for (int i = 0; i < h; ++i) {
    const double* row = params.w1.data() + static_cast<std::size_t>(i) * d;
    double sum = params.b1[static_cast<std::size_t>(i)];
    for (int j = 0; j < d; ++j) sum += row[j] * obs[static_cast<std::size_t>(j)];
    cache.h1[static_cast<std::size_t>(i)] = std::tanh(sum);
  }
  for (int i = 0; i < h; ++i) {
    const double* row = params.w2.data() + static_cast<std::size_t>(i) * h;
    double sum = params.b2[static_cast<std::size_t>(i)];
    for (int j = 0; j < h; ++j) sum += row[j] * cache.h1[static_cast<std::size_t>(j)];
    cache.h2[static_cast<std::size_t>(i)] = std::tanh(sum);
  }

  PolicyOutput out;
  double mx = params.b_mu[0];
  double my = params.b_mu[1];
  double value = params.b_v[0];
  for (int j = 0; j < h; ++j) {
    const double a = cache.h2[static_cast<std::size_t>(j)];
    mx += params.w_mu[static_cast<std::size_t>(j)] * a;
    my += params.w_mu[static_cast<std::size_t>(h + j)] * a;
    value += params.w_v[static_cast<std::size_t>(j)] * a;
  }
  out.mean = {mx, my};
  out.value = value;
  return out;
}

void policy_backward(const PolicyParams& params, const ForwardCache& cache,
                     std::span<const double> obs,
                     const std::array<double, 2>& d_mean, double d_value,
                     PolicyGrads& grads) {
  const int h = params.hidden;
  const int d = params.obs_dim;

  std::vector<double> dh2(static_cast<std::size_t>(h), 0.0);
  for (int j = 0; j < h; ++j) {
    const double a = cache.h2[static_cast<std::size_t>(j)];
    grads.w_mu[static_cast<std::size_t>(j)] += d_mean[0] * a;
    grads.w_mu[static_cast<std::size_t>(h + j)] += d_mean[1] * a;
    grads.w_v[static_cast<std::size_t>(j)] += d_value * a;
    dh2[static_cast<std::size_t>(j)] =
        d_mean[0] * params.w_mu[static_cast<std::size_t>(j)] +
        d_mean[1] * params.w_mu[static_cast<std::size_t>(h + j)] +
        d_value * params.w_v[static_cast<std::size_t>(j)];
  }
  grads.b_mu[0] += d_mean[0];
  grads.b_mu[1] += d_mean[1];
  grads.b_v[0] += d_value;

  std::vector<double> dh1(static_cast<std::size_t>(h), 0.0);
  for (int i = 0; i < h; ++i) {
    const double a = cache.h2[static_cast<std::size_t>(i)];
    const double dz = dh2[static_cast<std::size_t>(i)] * (1.0 - a * a);
    double* wrow = grads.w2.data() + static_cast<std::size_t>(i) * h;
    const double* prow = params.w2.data() + static_cast<std::size_t>(i) * h;
    for (int j = 0; j < h; ++j) {
      wrow[j] += dz * cache.h1[static_cast<std::size_t>(j)];
      dh1[static_cast<std::size_t>(j)] += dz * prow[j];
    }
    grads.b2[static_cast<std::size_t>(i)] += dz;
  }

  for (int i = 0; i < h; ++i) {
    const double a = cache.h1[static_cast<std::size_t>(i)];
    const double dz = dh1[static_cast<std::size_t>(i)] * (1.0 - a * a);
    double* wrow = grads.w1.data() + static_cast<std::size_t>(i) * d;
    for (int j = 0; j < d; ++j) wrow[j] += dz * obs[static_cast<std::size_t>(j)];
    grads.b1[static_cast<std::size_t>(i)] += dz;
  }
}

ActionSample sample_action(Vec2 mean, std::span<const double> log_std,
                           SplitMix64& rng) {
  const double sx = std::exp(log_std[0]);
  const double sy = std::exp(log_std[1]);
  ActionSample s;
  s.action = {mean.x + sx * rng.gaussian(), mean.y + sy * rng.gaussian()};
  s.log_prob = gaussian_log_prob(s.action, mean, log_std);
  return s;
}

double gaussian_log_prob(Vec2 action, Vec2 mean,
                         std::span<const double> log_std) {
  const double zx = (action.x - mean.x) / std::exp(log_std[0]);
  const double zy = (action.y - mean.y) / std::exp(log_std[1]);
  return -0.5 * (zx * zx + zy * zy) - log_std[0] - log_std[1] - kLog2Pi;
}

double gaussian_entropy(std::span<const double> log_std) {
  double h = 0.0;
  for (const double ls : log_std) h += ls + 0.5 * (kLog2Pi + 1.0);
  return h;
}

AdamState::AdamState(const PolicyParams& params) {
  for (const auto& [name, tensor] : params.tensors()) {
    (void)name;
    m.emplace_back(tensor->size(), 0.0);
    v.emplace_back(tensor->size(), 0.0);
  }
}

void adam_step(PolicyParams& params, const PolicyGrads& grads, AdamState& state,
               double lr, double beta1, double beta2, double eps) {
  ++state.t;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));

  auto param_tensors = params.tensors();
  auto grad_tensors = grads.tensors();
  for (std::size_t k = 0; k < param_tensors.size(); ++k) {
    std::vector<double>& theta = *param_tensors[k].second;
    const std::vector<double>& g = *grad_tensors[k];
    std::vector<double>& m = state.m[k];
    std::vector<double>& v = state.v[k];
    for (std::size_t i = 0; i < theta.size(); ++i) {
      m[i] = beta1 * m[i] + (1.0 - beta1) * g[i];
      v[i] = beta2 * v[i] + (1.0 - beta2) * g[i] * g[i];
      theta[i] -= lr * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + eps);
    }
  }
}

double global_grad_norm(const PolicyGrads& grads) {
  double sum = 0.0;
  for (const auto* t : grads.tensors()) {
    for (const double g : *t) sum += g * g;
  }
  return std::sqrt(sum);
}

void scale_grads(PolicyGrads& grads, double factor) {
  for (auto* t : grads.tensors()) {
    for (double& g : *t) g *= factor;
  }
}

}  // namespace crowdnav
