// Builds the ground-truth BEV flow for a planar motion on a 128 x 128 grid and
// recovers the motion from it.

#include <cstdio>

#include "bevodom/bevodom.hpp"

int main() {
  using namespace bevodom;
  const BevGridSpec grid = BevGridSpec::centered(128, 128, 0.8);
  const Pose2 motion(deg_to_rad(12.0), 1.5, -0.4);

  const FlowField flow = construct_flow_gt(motion, grid);
  const Pose2 back = solve_pose_from_flow(flow);

  std::printf("input     theta=%.12f tx=%.12f ty=%.12f\n", motion.theta, motion.tx, motion.ty);
  std::printf("recovered theta=%.12f tx=%.12f ty=%.12f\n", back.theta, back.tx, back.ty);
  std::printf("flow at corner (0,0): du=%.6f dv=%.6f\n", flow.du(0, 0), flow.dv(0, 0));
  return 0;
}
