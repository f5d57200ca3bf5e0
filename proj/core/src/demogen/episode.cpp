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

#include "modpol/demogen/episode.hpp"

#include <cmath>
#include <string>

#include "modpol/demogen/trajectory.hpp"
#include "modpol/errors.hpp"

namespace modpol::demogen {

using simenv::PlanarEnv;
using simenv::Vec2;

namespace {

constexpr double kTravelMetersPerTick = 0.01;
constexpr double kClosedAperture = 0.08;
constexpr int kCloseTicks = 8;
constexpr int kOpenTicks = 6;
constexpr int kGraspDwell = 4;
constexpr int kReleaseDwell = 2;

int travel_ticks(double distance) {
  return std::max(6, static_cast<int>(std::ceil(distance / kTravelMetersPerTick)));
}

void append_aperture_ramp(std::vector<std::vector<double>>& actions,
                          const std::vector<double>& joint_targets,
                          double ap_from, double ap_to, int ticks, int dwell) {
  for (int i = 1; i <= ticks; ++i) {
    const double ap = ap_from + (ap_to - ap_from) * i / ticks;
    auto a = joint_targets;
    a.push_back(ap);
    actions.push_back(std::move(a));
  }
  for (int i = 0; i < dwell; ++i) {
    auto a = joint_targets;
    a.push_back(ap_to);
    actions.push_back(std::move(a));
  }
}

}  // namespace

std::vector<std::vector<double>> compile_waypoints(
    const simenv::ArmSpec& arm, Vec2 start,
    const std::vector<Waypoint>& waypoints, double aperture0) {
  std::vector<std::vector<double>> actions;
  Vec2 pos = start;
  double aperture = aperture0;
  for (const auto& wp : waypoints) {
    const double norm = std::sqrt(wp.position.x * wp.position.x +
                                  wp.position.y * wp.position.y);
    if (norm > arm.reach()) {
      throw ContractError("waypoint outside workspace reach");
    }
    const double d = simenv::dist(pos, wp.position);
    if (d > 1e-9) {
      const auto path = min_jerk(pos, wp.position, travel_ticks(d) + 1);
      for (size_t i = 1; i < path.size(); ++i) {
        auto a = ik(arm, path[i]);
        a.push_back(wp.aperture);
        actions.push_back(std::move(a));
      }
    }
    for (int i = 0; i < wp.dwell; ++i) {
      auto a = ik(arm, wp.position);
      a.push_back(wp.aperture);
      actions.push_back(std::move(a));
    }
    pos = wp.position;
    aperture = wp.aperture;
  }
  (void)aperture;
  return actions;
}

std::vector<std::vector<double>> plan_expert_actions(const PlanarEnv& env) {
  const auto& arm = env.arm();
  const auto& scene = env.scene();
  const Vec2 ee = env.ee();
  std::vector<std::vector<double>> actions;

  const bool holding = env.attached();
  const Vec2 grasp_point = scene.object;

  if (!holding) {
    // Approach with the gripper open, then close onto the object.
    std::vector<Waypoint> approach{{grasp_point, 1.0, 2}};
    auto travel = compile_waypoints(arm, ee, approach, env.aperture());
    actions.insert(actions.end(), travel.begin(), travel.end());
    auto hold = ik(arm, grasp_point);
    append_aperture_ramp(actions, hold, 1.0, kClosedAperture, kCloseTicks,
                         kGraspDwell);
  }

  // Carry to the bowl (the object follows the gripper once attached).
  const Vec2 carry_from = holding ? ee : grasp_point;
  std::vector<Waypoint> carry{{scene.bowl, kClosedAperture, 2}};
  auto transport = compile_waypoints(arm, carry_from, carry,
                                     holding ? env.aperture() : kClosedAperture);
  actions.insert(actions.end(), transport.begin(), transport.end());

  // Release and retreat.
  auto hold_bowl = ik(arm, scene.bowl);
  append_aperture_ramp(actions, hold_bowl, kClosedAperture, 1.0, kOpenTicks,
                       kReleaseDwell);
  std::vector<Waypoint> retreat{{Vec2{0.22, 0.0}, 1.0, 0}};
  auto back = compile_waypoints(arm, scene.bowl, retreat, 1.0);
  actions.insert(actions.end(), back.begin(), back.end());
  return actions;
}

Episode generate_episode(const std::string& embodiment, uint64_t seed,
                         const GenerateOptions& opts) {
  const auto& arm = simenv::embodiment_spec(embodiment);
  for (int attempt = 0; attempt < 10; ++attempt) {
    simenv::EnvConfig cfg;
    cfg.depth_noise_sigma = opts.depth_noise_sigma;
    PlanarEnv env(embodiment, cfg);
    const uint64_t env_seed =
        attempt == 0 ? seed : Rng::derive(seed, 0xE0 + attempt);
    simenv::Observation obs = env.reset(env_seed);
    const auto plan = plan_expert_actions(env);

    Episode ep;
    ep.embodiment = embodiment;
    ep.instruction = kInstruction;
    ep.has_depth = opts.record_depth;
    ep.state_dim = arm.state_dim();
    ep.action_dim = arm.action_dim();
    bool success = false;
    for (const auto& action : plan) {
      ep.rgb.insert(ep.rgb.end(), obs.rgb.begin(), obs.rgb.end());
      if (opts.record_depth) {
        ep.depth.insert(ep.depth.end(), obs.depth.begin(), obs.depth.end());
      }
      for (double v : obs.state) ep.state.push_back(static_cast<float>(v));
      ep.contact.push_back(obs.contact);
      ep.forces.push_back(static_cast<float>(obs.forces[0]));
      ep.forces.push_back(static_cast<float>(obs.forces[1]));
      for (double v : action) ep.actions.push_back(static_cast<float>(v));
      ep.length += 1;

      auto result = env.step(action);
      obs = std::move(result.observation);
      if (result.done) {
        success = result.success;
        break;
      }
    }
    if (success) {
      ep.success = 1;
      return ep;
    }
  }
  throw Error("expert failed 10 consecutive attempts for seed " +
              std::to_string(seed) + " on " + embodiment +
              "; the script or scene is broken");
}

}  // namespace modpol::demogen
