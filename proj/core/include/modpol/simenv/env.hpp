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

#ifndef MODPOL_SIMENV_ENV_HPP_
#define MODPOL_SIMENV_ENV_HPP_

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "modpol/rng.hpp"

namespace modpol::simenv {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline double dist(Vec2 a, Vec2 b) {
  const double dx = a.x - b.x, dy = a.y - b.y;
  return std::sqrt(dx * dx + dy * dy);
}

// Planar pick-and-place world: a kinematic n-link arm over a table, one
// graspable disc, one bowl. Two embodiments are registered:
//   simGR1: 2 links, state_dim 7, action_dim 3
//   simG1:  3 links, state_dim 9, action_dim 4
// State layout: [joint angles, joint velocities, ee x, ee y, aperture];
// action layout: [joint angle targets, aperture target].

struct ArmSpec {
  std::string name;
  int n_links = 0;
  std::vector<double> link_lengths;  // meters
  std::vector<double> rest_joints;   // nominal reset pose, radians

  int state_dim() const { return 2 * n_links + 3; }
  int action_dim() const { return n_links + 1; }
  double reach() const;
};

/// Registered embodiments, fixed order {simGR1, simG1}.
const std::vector<ArmSpec>& embodiment_registry();

/// Lookup by name; throws ConfigError for unknown names.
const ArmSpec& embodiment_spec(const std::string& name);

/// Forward kinematics: joint positions from the base (origin) outward.
/// Returns n_links + 1 points; the last is the end effector.
std::vector<Vec2> forward_kinematics(const ArmSpec& arm,
                                     const std::vector<double>& joints);

struct Scene {
  Vec2 object;
  double object_radius = 0.035;
  bool graspable = true;
  Vec2 bowl{0.25, -0.25};
  double bowl_radius = 0.08;
  // Table extent; doubles as the camera view.
  double x_min = 0.0, x_max = 0.8, y_min = -0.4, y_max = 0.4;
};

struct Observation {
  static constexpr int kImage = 64;
  std::vector<uint8_t> rgb;    // [64*64*3]
  std::vector<float> depth;    // [64*64], meters
  std::vector<double> state;   // [state_dim]
  uint8_t contact = 0;
  std::array<double, 2> forces{0.0, 0.0};  // per fingertip, newtons
};

struct StepResult {
  Observation observation;
  bool success = false;
  bool done = false;
  double penetration = 0.0;  // max fingertip penetration, meters
  Vec2 ee;
};

struct EnvConfig {
  double tick = 0.05;               // seconds
  double max_joint_speed = 1.5;     // rad/s
  double aperture_speed = 2.0;      // 1/s
  int episode_cap = 200;
  double joint_limit = 3.0;         // |q| bound, radians
  double depth_noise_sigma = 0.01;  // meters; 0 disables
  // Object spawn region (inside both embodiments' reach).
  double spawn_x_min = 0.35, spawn_x_max = 0.55;
  double spawn_y_min = 0.05, spawn_y_max = 0.30;
  double rest_jitter = 0.2;  // radians, uniform, per joint
  // Penetration-spring contact.
  double contact_stiffness = 100.0;  // N/m
  double contact_threshold = 0.01;   // N
  // Fingertips sit perpendicular to the last link at
  // +- (tip_base + tip_span * aperture) from the ee point.
  double tip_base = 0.01;
  double tip_span = 0.05;
  double grasp_aperture = 0.5;  // attach below, release at or above
  // Rendered surface heights above the 1.0 m table plane.
  double object_height = 0.05;
  double bowl_height = 0.02;
  double arm_height = 0.08;
};

class PlanarEnv {
 public:
  explicit PlanarEnv(const std::string& embodiment,
                     EnvConfig config = EnvConfig{});

  /// Randomizes the object position and rest pose; deterministic per seed.
  Observation reset(uint64_t seed);

  /// Tracks joint/aperture targets at bounded speed, updates the grasp
  /// attachment, and re-renders. Action is [joint targets..., aperture].
  StepResult step(const std::vector<double>& action);

  /// (contact bit, per-fingertip forces) for the current pose.
  std::pair<bool, std::array<double, 2>> detect_contact_and_force() const;

  /// Orthographic top-down RGB and metric depth of the current scene.
  void render(std::vector<uint8_t>& rgb, std::vector<float>& depth);

  bool is_success() const;

  const ArmSpec& arm() const { return arm_; }
  const Scene& scene() const { return scene_; }
  const EnvConfig& config() const { return config_; }
  const std::vector<double>& joints() const { return joints_; }
  double aperture() const { return aperture_; }
  Vec2 ee() const;
  bool attached() const { return attached_; }
  int step_count() const { return step_count_; }
  std::array<Vec2, 2> fingertips() const;
  Observation observe();

 private:
  ArmSpec arm_;
  EnvConfig config_;
  Scene scene_;
  Rng rng_{0};
  std::vector<double> joints_;
  std::vector<double> velocities_;
  double aperture_ = 1.0;
  bool attached_ = false;
  Vec2 grasp_offset_;  // object center relative to ee, ee frame
  int step_count_ = 0;
  bool done_ = false;
};

}  // namespace modpol::simenv

#endif  // MODPOL_SIMENV_ENV_HPP_
