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

#ifndef MODPOL_DEMOGEN_TRAJECTORY_HPP_
#define MODPOL_DEMOGEN_TRAJECTORY_HPP_

#include <vector>

#include "modpol/simenv/env.hpp"

namespace modpol::demogen {

/// Quintic minimum-jerk time profile s(u) = 10u^3 - 15u^4 + 6u^5 on [0,1];
/// boundary position exact, boundary velocity and acceleration zero.
double min_jerk_profile(double u);

/// Straight-line path from p0 to p1 sampled at n_ticks points (endpoints
/// included) under the minimum-jerk profile. n_ticks >= 2.
std::vector<simenv::Vec2> min_jerk(simenv::Vec2 p0, simenv::Vec2 p1,
                                   int n_ticks);

/// Closed-form planar inverse kinematics, elbow-down branch.
/// For the 3-link arm the base joint is fixed to atan2(target) - 0.3 rad and
/// the distal pair is solved in closed form. Throws ReachError (with the
/// distance deficit) for unreachable targets.
std::vector<double> ik(const simenv::ArmSpec& arm, simenv::Vec2 target);

}  // namespace modpol::demogen

#endif  // MODPOL_DEMOGEN_TRAJECTORY_HPP_
