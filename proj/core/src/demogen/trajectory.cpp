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

#include "modpol/demogen/trajectory.hpp"

#include <cmath>
#include <string>

#include "modpol/errors.hpp"

namespace modpol::demogen {

using simenv::ArmSpec;
using simenv::Vec2;

double min_jerk_profile(double u) {
  const double u3 = u * u * u;
  return 10.0 * u3 - 15.0 * u3 * u + 6.0 * u3 * u * u;
}

std::vector<Vec2> min_jerk(Vec2 p0, Vec2 p1, int n_ticks) {
  if (n_ticks < 2) throw ContractError("min_jerk needs n_ticks >= 2");
  std::vector<Vec2> path(n_ticks);
  for (int i = 0; i < n_ticks; ++i) {
    const double u = static_cast<double>(i) / (n_ticks - 1);
    const double s = min_jerk_profile(u);
    path[i] = {p0.x + (p1.x - p0.x) * s, p0.y + (p1.y - p0.y) * s};
  }
  return path;
}

namespace {

// Elbow-down two-link solution for links (l1, l2) reaching `target` from
// `base`, angles absolute (world frame). Returns {phi1, phi2} where phi1 is
// the absolute angle of the first link and phi2 the relative elbow angle.
std::pair<double, double> two_link(Vec2 base, double l1, double l2,
                                   Vec2 target) {
  const double dx = target.x - base.x;
  const double dy = target.y - base.y;
  const double r = std::sqrt(dx * dx + dy * dy);
  if (r > l1 + l2) {
    throw ReachError("target beyond reach by " +
                     std::to_string(r - (l1 + l2)) + " m");
  }
  if (r < std::abs(l1 - l2)) {
    throw ReachError("target inside dead zone by " +
                     std::to_string(std::abs(l1 - l2) - r) + " m");
  }
  double cos_elbow = (r * r - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
  cos_elbow = std::min(1.0, std::max(-1.0, cos_elbow));
  const double phi2 = -std::acos(cos_elbow);
  const double phi1 = std::atan2(dy, dx) -
                      std::atan2(l2 * std::sin(phi2), l1 + l2 * std::cos(phi2));
  return {phi1, phi2};
}

}  // namespace

std::vector<double> ik(const ArmSpec& arm, Vec2 target) {
  if (arm.n_links == 2) {
    const auto [phi1, phi2] =
        two_link({0.0, 0.0}, arm.link_lengths[0], arm.link_lengths[1], target);
    return {phi1, phi2};
  }
  if (arm.n_links == 3) {
    // Redundancy resolved by pointing the base link 0.3 rad off the target
    // bearing, then solving the distal pair exactly.
    const double q1 = std::atan2(target.y, target.x) - 0.3;
    const Vec2 elbow{arm.link_lengths[0] * std::cos(q1),
                     arm.link_lengths[0] * std::sin(q1)};
    const auto [phi2, phi3] =
        two_link(elbow, arm.link_lengths[1], arm.link_lengths[2], target);
    return {q1, phi2 - q1, phi3};
  }
  throw ConfigError("ik supports 2- and 3-link arms, got " +
                    std::to_string(arm.n_links));
}

}  // namespace modpol::demogen
