// Independent reference implementations used to cross-check the library.
// These deliberately take a different route than the shipped code (transform
// stacks instead of closed-form planar trig, finite differences instead of
// analytic Jacobians).
#pragma once

#include <Eigen/Geometry>

#include "quadsim/kinematics.hpp"
#include "quadsim/morphology.hpp"

namespace quadsim::oracles {

// foot position via an explicit joint-by-joint transform chain
inline Vec3 fk_transform_stack(const RobotModel& m, LegId leg, const Vec3& q) {
  const double s = side_sign(leg);
  const Vec3 a = m.hip_offset(leg) - Vec3(0.0, s * m.abad_offset, 0.0);
  Eigen::Isometry3d t = Eigen::Isometry3d::Identity();
  t.translate(a);
  t.rotate(Eigen::AngleAxisd(s * q[0], Vec3::UnitX()));
  t.translate(Vec3(0.0, s * m.abad_offset, 0.0));
  t.rotate(Eigen::AngleAxisd(-q[1], Vec3::UnitY()));
  t.translate(Vec3(0.0, 0.0, -m.thigh_length));
  t.rotate(Eigen::AngleAxisd(q[2], Vec3::UnitY()));
  t.translate(Vec3(0.0, 0.0, -m.shank_length));
  return t.translation();
}

// central-difference Jacobian of the library FK
inline Mat3 jacobian_central_diff(const RobotModel& m, LegId leg,
                                  const Vec3& q, double h = 1e-6) {
  Mat3 j;
  for (int col = 0; col < 3; ++col) {
    Vec3 qp = q, qm = q;
    qp[col] += h;
    qm[col] -= h;
    j.col(col) =
        (forward_kinematics(m, leg, qp) - forward_kinematics(m, leg, qm)) /
        (2.0 * h);
  }
  return j;
}

}  // namespace quadsim::oracles
