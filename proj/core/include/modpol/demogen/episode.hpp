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

#ifndef MODPOL_DEMOGEN_EPISODE_HPP_
#define MODPOL_DEMOGEN_EPISODE_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "modpol/simenv/env.hpp"

namespace modpol::demogen {

inline constexpr const char* kInstruction =
    "pick the apple and place it in the bowl";

/// One demonstration. Per-step arrays are stored flat and row-major in the
/// same element types the dataset file uses (RGB bytes, everything else
/// 32-bit floats), so write/read round trips are bit-exact.
struct Episode {
  std::string embodiment;
  std::string instruction;
  int length = 0;
  bool has_depth = true;
  uint8_t success = 0;
  std::vector<uint8_t> rgb;     // [length * 64*64*3]
  std::vector<float> depth;     // [length * 64*64], empty when !has_depth
  std::vector<float> state;     // [length * state_dim]
  std::vector<uint8_t> contact; // [length]
  std::vector<float> forces;    // [length * 2]
  std::vector<float> actions;   // [length * action_dim]

  int state_dim = 0;
  int action_dim = 0;
};

/// Cartesian waypoint of the expert script.
struct Waypoint {
  simenv::Vec2 position;
  double aperture = 1.0;
  int dwell = 0;
};

/// Expands waypoints into per-tick [joint targets..., aperture] actions:
/// minimum-jerk travel between consecutive positions, then `dwell` holding
/// ticks. Validates that every position is within the arm's reach.
std::vector<std::vector<double>> compile_waypoints(
    const simenv::ArmSpec& arm, simenv::Vec2 start,
    const std::vector<Waypoint>& waypoints, double aperture0);

/// Plans the scripted pick-and-place from the environment's current state:
/// approach the object, close, carry to the bowl, release, retreat. Replans
/// correctly from any mid-task state, so it can also serve as a privileged
/// closed-loop oracle policy.
std::vector<std::vector<double>> plan_expert_actions(
    const simenv::PlanarEnv& env);

struct GenerateOptions {
  bool record_depth = true;
  double depth_noise_sigma = 0.01;
};

/// Runs the scripted expert in a fresh environment seeded with `seed` and
/// records every (observation, action) step. Failed episodes are discarded
/// and regenerated with a derived sub-seed; ten consecutive failures raise
/// an Error since the script is expected to succeed.
Episode generate_episode(const std::string& embodiment, uint64_t seed,
                         const GenerateOptions& opts = GenerateOptions{});

}  // namespace modpol::demogen

#endif  // MODPOL_DEMOGEN_EPISODE_HPP_
