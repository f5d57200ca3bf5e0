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

#ifndef MODPOL_DIFFUSION_SCHEDULE_HPP_
#define MODPOL_DIFFUSION_SCHEDULE_HPP_

#include <vector>

#include "modpol/gradcore/tensor.hpp"

namespace modpol::diffusion {

/// Discrete-time noise schedule tables. alpha[t] = 1 - beta[t],
/// alpha_bar[t] = prod_{u<=t} alpha[u], sigma[t] = sqrt(beta[t]).
struct NoiseSchedule {
  int steps = 0;
  std::vector<double> beta;
  std::vector<double> alpha;
  std::vector<double> alpha_bar;
  std::vector<double> sigma;
};

/// Linear beta ramp from beta_start to beta_end over `steps` entries.
NoiseSchedule linear_schedule(int steps, double beta_start = 1e-4,
                              double beta_end = 0.02);

/// Closed-form noising: x_t = sqrt(abar_t) x0 + sqrt(1 - abar_t) eps.
gradcore::Tensor forward_diffuse(const gradcore::Tensor& x0, int t,
                                 const gradcore::Tensor& eps,
                                 const NoiseSchedule& sched);

/// One reverse update
///   x_{t-1} = (x_t - (1-alpha_t)/sqrt(1-abar_t) * eps_hat) / sqrt(alpha_t)
///             + sigma_t * z
/// with sigma treated as 0 at t == 0 so sampling ends deterministically.
/// `sigma_scale` multiplies sigma_t (1.0 for the standard sampler).
gradcore::Tensor ddpm_reverse_step(const gradcore::Tensor& x_t,
                                   const gradcore::Tensor& eps_hat, int t,
                                   const gradcore::Tensor& z,
                                   const NoiseSchedule& sched,
                                   double sigma_scale = 1.0);

}  // namespace modpol::diffusion

#endif  // MODPOL_DIFFUSION_SCHEDULE_HPP_
