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

#include "modpol/simenv/env.hpp"

#include <algorithm>
#include <cmath>

#include "modpol/errors.hpp"

namespace modpol::simenv {

namespace {

double clampd(double v, double lo, double hi) {
  return std::min(std::max(v, lo), hi);
}

double point_segment_dist(Vec2 p, Vec2 a, Vec2 b) {
  const double abx = b.x - a.x, aby = b.y - a.y;
  const double len2 = abx * abx + aby * aby;
  double t = 0.0;
  if (len2 > 0.0) {
    t = clampd(((p.x - a.x) * abx + (p.y - a.y) * aby) / len2, 0.0, 1.0);
  }
  const Vec2 q{a.x + t * abx, a.y + t * aby};
  return dist(p, q);
}

}  // namespace

double ArmSpec::reach() const {
  double r = 0.0;
  for (double l : link_lengths) r += l;
  return r;
}

const std::vector<ArmSpec>& embodiment_registry() {
  static const std::vector<ArmSpec> specs = {
      {"simGR1", 2, {0.35, 0.30}, {1.0, -2.5}},
      {"simG1", 3, {0.30, 0.25, 0.20}, {0.9, -1.8, -0.6}},
  };
  return specs;
}

const ArmSpec& embodiment_spec(const std::string& name) {
  for (const auto& spec : embodiment_registry()) {
    if (spec.name == name) return spec;
  }
  throw ConfigError("unknown embodiment '" + name + "'");
}

std::vector<Vec2> forward_kinematics(const ArmSpec& arm,
                                     const std::vector<double>& joints) {
  if (static_cast<int>(joints.size()) != arm.n_links) {
    throw ShapeError("forward_kinematics: expected " +
                     std::to_string(arm.n_links) + " joints, got " +
                     std::to_string(joints.size()));
  }
  std::vector<Vec2> pts(arm.n_links + 1);
  pts[0] = {0.0, 0.0};
  double heading = 0.0;
  for (int i = 0; i < arm.n_links; ++i) {
    heading += joints[i];
    pts[i + 1] = {pts[i].x + arm.link_lengths[i] * std::cos(heading),
                  pts[i].y + arm.link_lengths[i] * std::sin(heading)};
  }
  return pts;
}

PlanarEnv::PlanarEnv(const std::string& embodiment, EnvConfig config)
    : arm_(embodiment_spec(embodiment)), config_(config) {
  scene_.object = {config_.spawn_x_min, config_.spawn_y_min};
  if (scene_.bowl_radius <= scene_.object_radius) {
    throw ConfigError("bowl radius must exceed object radius");
  }
  joints_ = arm_.rest_joints;
  velocities_.assign(arm_.n_links, 0.0);
}

Vec2 PlanarEnv::ee() const {
  return forward_kinematics(arm_, joints_).back();
}

std::array<Vec2, 2> PlanarEnv::fingertips() const {
  double heading = 0.0;
  for (double q : joints_) heading += q;
  const Vec2 tip = ee();
  const double off = config_.tip_base + config_.tip_span * aperture_;
  const Vec2 n{-std::sin(heading), std::cos(heading)};
  return {Vec2{tip.x + off * n.x, tip.y + off * n.y},
          Vec2{tip.x - off * n.x, tip.y - off * n.y}};
}

Observation PlanarEnv::reset(uint64_t seed) {
  rng_ = Rng(seed);
  scene_.object.x = rng_.uniform(config_.spawn_x_min, config_.spawn_x_max);
  scene_.object.y = rng_.uniform(config_.spawn_y_min, config_.spawn_y_max);
  aperture_ = 1.0;
  attached_ = false;
  step_count_ = 0;
  done_ = false;
  velocities_.assign(arm_.n_links, 0.0);
  // Re-jitter if the randomized rest pose lands on the object; the spawn
  // region and rest poses are laid out so this almost never triggers.
  for (int attempt = 0; attempt < 10; ++attempt) {
    for (int i = 0; i < arm_.n_links; ++i) {
      joints_[i] = clampd(
          arm_.rest_joints[i] +
              rng_.uniform(-config_.rest_jitter, config_.rest_jitter),
          -config_.joint_limit, config_.joint_limit);
    }
    if (!detect_contact_and_force().first) break;
  }
  return observe();
}

StepResult PlanarEnv::step(const std::vector<double>& action) {
  if (static_cast<int>(action.size()) != arm_.action_dim()) {
    throw ShapeError("action has " + std::to_string(action.size()) +
                     " dims, embodiment " + arm_.name + " needs " +
                     std::to_string(arm_.action_dim()));
  }
  const double max_dq = config_.max_joint_speed * config_.tick;
  for (int i = 0; i < arm_.n_links; ++i) {
    double target = action[i];
    if (!std::isfinite(target)) target = joints_[i];
    target = clampd(target, -config_.joint_limit, config_.joint_limit);
    const double dq = clampd(target - joints_[i], -max_dq, max_dq);
    joints_[i] += dq;
    velocities_[i] = dq / config_.tick;
  }
  double ap_target = action[arm_.n_links];
  if (!std::isfinite(ap_target)) ap_target = aperture_;
  ap_target = clampd(ap_target, 0.0, 1.0);
  const double max_da = config_.aperture_speed * config_.tick;
  aperture_ += clampd(ap_target - aperture_, -max_da, max_da);

  double heading = 0.0;
  for (double q : joints_) heading += q;
  const Vec2 tip = ee();

  if (attached_) {
    const double c = std::cos(heading), s = std::sin(heading);
    scene_.object = {tip.x + c * grasp_offset_.x - s * grasp_offset_.y,
                     tip.y + s * grasp_offset_.x + c * grasp_offset_.y};
    if (aperture_ >= config_.grasp_aperture) attached_ = false;
  } else if (aperture_ < config_.grasp_aperture && scene_.graspable) {
    const auto tips = fingertips();
    const double d = std::min(dist(tips[0], scene_.object),
                              dist(tips[1], scene_.object));
    if (d < scene_.object_radius) {
      attached_ = true;
      const double c = std::cos(-heading), s = std::sin(-heading);
      const Vec2 rel{scene_.object.x - tip.x, scene_.object.y - tip.y};
      grasp_offset_ = {c * rel.x - s * rel.y, s * rel.x + c * rel.y};
    }
  }

  ++step_count_;
  StepResult result;
  result.observation = observe();
  result.success = is_success();
  done_ = done_ || result.success || step_count_ >= config_.episode_cap;
  result.done = done_;
  result.ee = tip;
  const auto tips = fingertips();
  for (const auto& t : tips) {
    const double pen = scene_.object_radius - dist(t, scene_.object);
    result.penetration = std::max(result.penetration, std::max(0.0, pen));
  }
  return result;
}

std::pair<bool, std::array<double, 2>> PlanarEnv::detect_contact_and_force()
    const {
  const auto tips = fingertips();
  std::array<double, 2> forces{0.0, 0.0};
  for (int i = 0; i < 2; ++i) {
    const double pen = scene_.object_radius - dist(tips[i], scene_.object);
    if (pen > 0.0) forces[i] = config_.contact_stiffness * pen;
  }
  const bool contact = std::max(forces[0], forces[1]) > config_.contact_threshold;
  return {contact, forces};
}

void PlanarEnv::render(std::vector<uint8_t>& rgb, std::vector<float>& depth) {
  constexpr int N = Observation::kImage;
  rgb.assign(N * N * 3, 0);
  depth.assign(N * N, 0.0f);
  const double dx = (scene_.x_max - scene_.x_min) / N;
  const double dy = (scene_.y_max - scene_.y_min) / N;
  const auto pts = forward_kinematics(arm_, joints_);
  const auto tips = fingertips();
  const double link_half_width = 0.015;
  const double tip_radius = 0.012;
  const double sigma = config_.depth_noise_sigma;
  const double depth_max = 1.0 + 4.0 * sigma;

  for (int r = 0; r < N; ++r) {
    const double y = scene_.y_max - (r + 0.5) * dy;
    for (int c = 0; c < N; ++c) {
      const double x = scene_.x_min + (c + 0.5) * dx;
      const Vec2 p{x, y};

      double height = 0.0;
      uint8_t cr = 205, cg = 205, cb = 205;  // table
      if (dist(p, scene_.bowl) <= scene_.bowl_radius) {
        height = config_.bowl_height;
        cr = 60; cg = 80; cb = 200;
      }
      if (dist(p, scene_.object) <= scene_.object_radius) {
        height = config_.object_height;
        cr = 200; cg = 30; cb = 30;
      }
      bool on_arm = false;
      for (size_t i = 0; i + 1 < pts.size(); ++i) {
        if (point_segment_dist(p, pts[i], pts[i + 1]) <= link_half_width) {
          on_arm = true;
          break;
        }
      }
      if (on_arm) {
        height = config_.arm_height;
        cr = 70; cg = 70; cb = 70;
      }
      for (const auto& t : tips) {
        if (dist(p, t) <= tip_radius) {
          height = config_.arm_height;
          cr = 30; cg = 110; cb = 50;
          break;
        }
      }

      const int64_t idx = static_cast<int64_t>(r) * N + c;
      rgb[idx * 3 + 0] = cr;
      rgb[idx * 3 + 1] = cg;
      rgb[idx * 3 + 2] = cb;
      double d = 1.0 - height;
      if (sigma > 0.0) d += rng_.normal(0.0, sigma);
      depth[idx] = static_cast<float>(clampd(d, 0.5, depth_max));
    }
  }
}

Observation PlanarEnv::observe() {
  Observation obs;
  render(obs.rgb, obs.depth);
  obs.state.reserve(arm_.state_dim());
  for (double q : joints_) obs.state.push_back(q);
  for (double v : velocities_) obs.state.push_back(v);
  const Vec2 tip = ee();
  obs.state.push_back(tip.x);
  obs.state.push_back(tip.y);
  obs.state.push_back(aperture_);
  const auto [contact, forces] = detect_contact_and_force();
  obs.contact = contact ? 1 : 0;
  obs.forces = forces;
  return obs;
}

bool PlanarEnv::is_success() const {
  return !attached_ && dist(scene_.object, scene_.bowl) <= scene_.bowl_radius;
}

}  // namespace modpol::simenv
