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

#ifndef MODPOL_DIFFUSION_SAMPLER_HPP_
#define MODPOL_DIFFUSION_SAMPLER_HPP_

#include <functional>
#include <vector>

#include "modpol/diffusion/schedule.hpp"
#include "modpol/gradcore/tensor.hpp"
#include "modpol/rng.hpp"

namespace modpol::diffusion {

/// A denoising network bound to its conditioning: maps (x_t, discrete step)
/// to predicted noise or velocity of the same shape.
using DenoiserFn =
    std::function<gradcore::Tensor(const gradcore::Tensor&, int)>;

/// Flow-matching configuration. Timesteps are drawn from
/// Beta(beta_dist_alpha, beta_dist_beta) and discretized onto
/// [0, t_discretize - 1] for network conditioning; inference integrates the
/// learned velocity with n_sample_steps uniform Euler steps.
struct FlowMatchConfig {
  double beta_dist_alpha = 1.5;
  double beta_dist_beta = 1.0;
  int n_sample_steps = 10;
  int t_discretize = 1000;
};

void validate(const FlowMatchConfig& cfg);

/// Inverse-CDF Beta sampler for beta_dist_beta == 1: tau = u^(1/alpha).
double beta_sample(Rng& rng, const FlowMatchConfig& cfg);

/// Pre/post-contact sampler settings: before contact, more reverse
/// iterations at inflated sigma; after contact, fewer at damped sigma.
struct AdaptiveScheduleConfig {
  struct Branch {
    int steps = 0;
    double sigma_scale = 1.0;
  };
  Branch pre_contact;
  Branch post_contact;
};

void validate(const AdaptiveScheduleConfig& cfg);

struct SampleTrace {
  int steps_run = 0;
};

/// Full reverse-diffusion sampling from Gaussian noise. n_steps == 0 runs
/// every schedule step; otherwise the loop visits n_steps evenly spaced
/// timesteps from steps-1 down to 0. Bit-reproducible given the seed.
gradcore::Tensor sample_actions_ddpm(const DenoiserFn& net,
                                     const std::vector<int>& shape,
                                     const NoiseSchedule& sched, uint64_t seed,
                                     int n_steps = 0, double sigma_scale = 1.0,
                                     SampleTrace* trace = nullptr);

/// Euler integration of the learned velocity field from tau = 1 to tau = 0.
gradcore::Tensor sample_actions_flow(const DenoiserFn& net,
                                     const std::vector<int>& shape,
                                     const FlowMatchConfig& cfg, uint64_t seed,
                                     SampleTrace* trace = nullptr);

/// Dispatches on the contact flag to the matching branch of the adaptive
/// schedule, then runs the DDPM sampler with that branch's step count and
/// sigma scale.
gradcore::Tensor adaptive_sample(const DenoiserFn& net,
                                 const std::vector<int>& shape,
                                 bool contact_flag,
                                 const AdaptiveScheduleConfig& cfg,
                                 const NoiseSchedule& base, uint64_t seed,
                                 SampleTrace* trace = nullptr);

/// Single-sample flow-matching loss: draws tau ~ Beta, eps ~ N(0,I), forms
/// x_tau = (1-tau) x0 + tau eps, and regresses the network output at the
/// discretized step onto the velocity target eps - x0. `mask`, when given,
/// is an [H x 1] 0/1 tensor selecting which rows enter the mean.
gradcore::Tensor flow_match_loss(const DenoiserFn& net,
                                 const gradcore::Tensor& x0,
                                 const FlowMatchConfig& cfg, Rng& rng,
                                 const gradcore::Tensor* mask = nullptr);

/// Single-sample DDPM epsilon-prediction loss at a uniformly drawn timestep.
gradcore::Tensor ddpm_eps_loss(const DenoiserFn& net,
                               const gradcore::Tensor& x0,
                               const NoiseSchedule& sched, Rng& rng,
                               const gradcore::Tensor* mask = nullptr);

/// Per-dimension z-score statistics for action sequences. Policies train in
/// normalized space; decoding denormalizes.
struct ActionNormalizer {
  std::vector<double> mean;
  std::vector<double> std_dev;

  int dims() const { return static_cast<int>(mean.size()); }
  /// Row-major [n x dims] in place.
  void normalize(std::vector<double>& rows) const;
  void denormalize(std::vector<double>& rows) const;
};

}  // namespace modpol::diffusion

#endif  // MODPOL_DIFFUSION_SAMPLER_HPP_
