// In-process planners for exercising the benchmark harness.
#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "graspbench/bench.hpp"

namespace stubs {

using namespace graspbench;

/// Knows the ground truth: closes through the object's centre of mass, tries
/// axis directions in 5 degree steps, sizes the jaw to the measured span and
/// keeps the first grasp the simulator scores 3.
inline GraspPose oracle_grasp(const TrialContext& ctx, const PhysicsParams& phys) {
  const auto com_local = ctx.object.center_of_mass();
  const double c = std::cos(ctx.placement.yaw), s = std::sin(ctx.placement.yaw);
  const Point2 com{ctx.placement.x + c * com_local.x - s * com_local.y,
                   ctx.placement.y + s * com_local.x + c * com_local.y};
  const PlacedScene placed(ctx.scene);
  const double z = 0.005;
  for (int k = 0; k < 36; ++k) {
    const double theta = k * std::numbers::pi / 36;
    GraspPose probe{com.x, com.y, z, theta, ctx.gripper.max_opening - phys.width_tolerance, 1.0};
    const auto first = evaluate_pick(placed, probe, ctx.gripper, phys);
    if (!first.contact_a || !first.contact_b) continue;
    // The jaw stays centred on the centre of mass, so it must reach the
    // farther contact.
    GraspPose g = probe;
    const double reach = std::max(distance(first.contact_a->point, com), distance(first.contact_b->point, com));
    g.width = std::clamp(2 * reach, ctx.gripper.min_opening, ctx.gripper.max_opening);
    const auto out = evaluate_grasp(placed, g, ctx.gripper, phys);
    if (score_trial(out) == 3) return g;
  }
  throw Error(ErrorCode::NoFeasibleGrasp, "oracle found no perfect grasp");
}

inline AlgorithmSpec oracle_stub(const PhysicsParams& phys = {}) {
  return AlgorithmSpec::function("oracle", [phys](const TrialContext& ctx) { return oracle_grasp(ctx, phys); });
}

inline AlgorithmSpec null_stub() {
  return AlgorithmSpec::function("null", [](const TrialContext&) -> GraspPose {
    throw Error(ErrorCode::NoFeasibleGrasp, "null planner never grasps");
  });
}

inline std::string grasp_json(double x, double y, double z, double theta, double width, double quality) {
  return "{\"x\": " + std::to_string(x) + ", \"y\": " + std::to_string(y) + ", \"z\": " + std::to_string(z) +
         ", \"theta_rad\": " + std::to_string(theta) + ", \"width\": " + std::to_string(width) +
         ", \"quality\": " + std::to_string(quality) + "}";
}

}  // namespace stubs
