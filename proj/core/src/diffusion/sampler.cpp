// Copyright 2026 The modpol Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "modpol/diffusion/sampler.hpp"

#include <cmath>
#include <string>

#include "modpol/errors.hpp"

namespace modpol::diffusion {

using gradcore::Tensor;

void validate(const FlowMatchConfig& cfg) {
  if (!(cfg.beta_dist_alpha > 0.0) || !(cfg.beta_dist_beta > 0.0)) {
    throw ConfigError("Beta distribution shape parameters must be positive");
  }
  if (cfg.beta_dist_beta != 1.0) {
    throw ConfigError(
        "timestep sampling uses the inverse-CDF shortcut, which requires "
        "beta_dist_beta == 1");
  }
  if (cfg.n_sample_steps < 1 || cfg.t_discretize < 1) {
    throw ConfigError("flow sampling needs n_sample_steps, t_discretize >= 1");
  }
}

double beta_sample(Rng& rng, const FlowMatchConfig& cfg) {
  return std::pow(rng.uniform(), 1.0 / cfg.beta_dist_alpha);
}

void validate(const AdaptiveScheduleConfig& cfg) {
  if (cfg.pre_contact.steps < 1 || cfg.post_contact.steps < 1) {
    throw ConfigError("adaptive schedule branches need >= 1 step");
  }
  if (cfg.pre_contact.steps < cfg.post_contact.steps) {
    throw ConfigError("pre-contact branch must run at least as many steps");
  }
  if (cfg.pre_contact.sigma_scale < 1.0 || cfg.post_contact.sigma_scale > 1.0) {
    throw ConfigError(
        "sigma_scale must be >= 1 pre-contact and <= 1 post-contact");
  }
}

namespace {

Tensor gaussian_tensor(const std::vector<int>& shape, Rng& rng) {
  int64_t n = 1;
  for (int d : shape) n *= d;
  std::vector<double> data(n);
  for (auto& v : data) v = rng.normal();
  return Tensor::from(shape, std::move(data));
}

// Evenly spaced timesteps from hi down to 0 inclusive.
std::vector<int> strided_timesteps(int total, int n_steps) {
  std::vector<int> ts;
  if (n_steps <= 0 || n_steps >= total) {
    ts.reserve(total);
    for (int t = total - 1; t >= 0; --t) ts.push_back(t);
    return ts;
  }
  ts.reserve(n_steps);
  if (n_steps == 1) {
    ts.push_back(0);
    return ts;
  }
  int prev = -1;
  for (int i = 0; i < n_steps; ++i) {
    const double frac = static_cast<double>(i) / (n_steps - 1);
    int t = static_cast<int>(std::lround((total - 1) * (1.0 - frac)));
    if (t == prev) continue;
    ts.push_back(t);
    prev = t;
  }
  return ts;
}

Tensor masked_mse(const Tensor& pred, const Tensor& target,
                  const Tensor* mask) {
  Tensor diff = sub(pred, target);
  Tensor sq = mul(diff, diff);
  if (mask == nullptr) return mean_all(sq);
  if (mask->rows() != pred.rows() || mask->cols() != 1) {
    throw ShapeError("loss mask must be [rows x 1]");
  }
  double count = 0.0;
  for (double v : mask->values()) count += v;
  if (count == 0.0) throw ContractError("loss mask excludes every row");
  const double denom = count * pred.cols();
  return scale(sum_all(mul(sq, *mask)), 1.0 / denom);
}

}  // namespace

Tensor sample_actions_ddpm(const DenoiserFn& net, const std::vector<int>& shape,
                           const NoiseSchedule& sched, uint64_t seed,
                           int n_steps, double sigma_scale,
                           SampleTrace* trace) {
  Rng rng(seed);
  Tensor x = gaussian_tensor(shape, rng);
  const auto ts = strided_timesteps(sched.steps, n_steps);
  for (int t : ts) {
    Tensor eps_hat = net(x, t);
    Tensor z = gaussian_tensor(shape, rng);
    x = ddpm_reverse_step(x, eps_hat, t, z, sched, sigma_scale);
  }
  if (trace) trace->steps_run = static_cast<int>(ts.size());
  return x;
}

Tensor sample_actions_flow(const DenoiserFn& net, const std::vector<int>& shape,
                           const FlowMatchConfig& cfg, uint64_t seed,
                           SampleTrace* trace) {
  validate(cfg);
  Rng rng(seed);
  Tensor x = gaussian_tensor(shape, rng);
  const int n = cfg.n_sample_steps;
  const double dt = 1.0 / n;
  for (int i = 0; i < n; ++i) {
    const double tau = 1.0 - i * dt;
    const int step =
        static_cast<int>(std::lround(tau * (cfg.t_discretize - 1)));
    Tensor v = net(x, step);
    x = sub(x, scale(v, dt));
  }
  if (trace) trace->steps_run = n;
  return x;
}

Tensor adaptive_sample(const DenoiserFn& net, const std::vector<int>& shape,
                       bool contact_flag, const AdaptiveScheduleConfig& cfg,
                       const NoiseSchedule& base, uint64_t seed,
                       SampleTrace* trace) {
  validate(cfg);
  const auto& branch = contact_flag ? cfg.post_contact : cfg.pre_contact;
  return sample_actions_ddpm(net, shape, base, seed, branch.steps,
                             branch.sigma_scale, trace);
}

Tensor flow_match_loss(const DenoiserFn& net, const Tensor& x0,
                       const FlowMatchConfig& cfg, Rng& rng,
                       const Tensor* mask) {
  const double tau = beta_sample(rng, cfg);
  Tensor eps = gaussian_tensor(x0.shape(), rng);
  Tensor x_tau = add(scale(x0, 1.0 - tau), scale(eps, tau));
  Tensor target = sub(eps, x0);  // velocity of the linear interpolant
  const int step = static_cast<int>(std::lround(tau * (cfg.t_discretize - 1)));
  Tensor pred = net(x_tau, step);
  if (pred.shape() != x0.shape()) {
    throw ShapeError("denoiser output shape " +
                     gradcore::shape_str(pred.shape()) +
                     " does not match actions " +
                     gradcore::shape_str(x0.shape()));
  }
  return masked_mse(pred, target, mask);
}

Tensor ddpm_eps_loss(const DenoiserFn& net, const Tensor& x0,
                     const NoiseSchedule& sched, Rng& rng, const Tensor* mask) {
  const int t = static_cast<int>(rng.uniform_int(sched.steps));
  Tensor eps = gaussian_tensor(x0.shape(), rng);
  Tensor x_t = forward_diffuse(x0, t, eps, sched);
  Tensor pred = net(x_t, t);
  return masked_mse(pred, eps, mask);
}

void ActionNormalizer::normalize(std::vector<double>& rows) const {
  const int d = dims();
  for (size_t i = 0; i < rows.size(); ++i) {
    const size_t j = i % d;
    rows[i] = (rows[i] - mean[j]) / std_dev[j];
  }
}

void ActionNormalizer::denormalize(std::vector<double>& rows) const {
  const int d = dims();
  for (size_t i = 0; i < rows.size(); ++i) {
    const size_t j = i % d;
    rows[i] = rows[i] * std_dev[j] + mean[j];
  }
}

}  // namespace modpol::diffusion
