#include "quadsim/kinematics.hpp"

#include <cmath>
#include <sstream>

namespace quadsim {

namespace {

Mat3 rot_x(double a) {
  const double c = std::cos(a), s = std::sin(a);
  Mat3 r;
  r << 1, 0, 0, 0, c, -s, 0, s, c;
  return r;
}

// planar thigh/shank chain in the leg sagittal plane (x forward, z down the
// leg); phi is the hip pitch angle, k the knee flexion
struct Planar {
  double x, z;
};

Planar planar_fk(double l1, double l2, double phi, double k) {
  return {l1 * std::sin(phi) + l2 * std::sin(phi - k),
          -l1 * std::cos(phi) - l2 * std::cos(phi - k)};
}

}  // namespace

Vec3 abad_axis_origin(const RobotModel& model, LegId leg) {
  const double s = side_sign(leg);
  return model.hip_offset(leg) - Vec3(0.0, s * model.abad_offset, 0.0);
}

Vec3 forward_kinematics(const RobotModel& model, LegId leg, const Vec3& q) {
  const double s = side_sign(leg);
  const double d = model.abad_offset;
  const Planar pl = planar_fk(model.thigh_length, model.shank_length, q[1], q[2]);
  const Vec3 in_abad(pl.x, s * d, pl.z);
  return abad_axis_origin(model, leg) + rot_x(s * q[0]) * in_abad;
}

Mat3 jacobian(const RobotModel& model, LegId leg, const Vec3& q) {
  const double s = side_sign(leg);
  const double l1 = model.thigh_length, l2 = model.shank_length;
  const double phi = q[1], k = q[2];
  const Mat3 r = rot_x(s * q[0]);

  const Planar pl = planar_fk(l1, l2, phi, k);
  const Vec3 arm = r * Vec3(pl.x, s * model.abad_offset, pl.z);

  Mat3 j;
  j.col(0) = s * Vec3::UnitX().cross(arm);
  j.col(1) = r * Vec3(l1 * std::cos(phi) + l2 * std::cos(phi - k), 0.0,
                      l1 * std::sin(phi) + l2 * std::sin(phi - k));
  j.col(2) = r * Vec3(-l2 * std::cos(phi - k), 0.0, -l2 * std::sin(phi - k));
  return j;
}

Vec3 foot_velocity(const RobotModel& model, LegId leg, const Vec3& q,
                   const Vec3& qdot) {
  return jacobian(model, leg, q) * qdot;
}

std::optional<Vec3> try_inverse_kinematics(const RobotModel& model, LegId leg,
                                           const Vec3& p, KneeBranch branch) {
  const double s = side_sign(leg);
  const double d = model.abad_offset;
  const double l1 = model.thigh_length, l2 = model.shank_length;

  const Vec3 r = p - abad_axis_origin(model, leg);
  const double rho_sq = r.y() * r.y() + r.z() * r.z();
  const double zl_sq = rho_sq - d * d;
  if (zl_sq < 0.0) return std::nullopt;  // inside the abad offset cylinder
  const double zl = -std::sqrt(zl_sq);

  const double alpha = std::atan2(r.z(), r.y()) - std::atan2(zl, s * d);
  const double xl = r.x();

  const double dist_sq = xl * xl + zl * zl;
  const double cos_k = (dist_sq - l1 * l1 - l2 * l2) / (2.0 * l1 * l2);
  if (cos_k < -1.0 - 1e-12 || cos_k > 1.0 + 1e-12) return std::nullopt;
  const double k_mag = std::acos(std::clamp(cos_k, -1.0, 1.0));
  const double k = (branch == KneeBranch::FlexedBack) ? k_mag : -k_mag;

  const double gamma = std::atan2(xl, -zl);
  const double phi = gamma + std::atan2(l2 * std::sin(k), l1 + l2 * std::cos(k));

  Vec3 q(s * alpha, phi, k);
  // wrap abad into (-pi, pi]
  if (q[0] > kPi) q[0] -= 2.0 * kPi;
  if (q[0] <= -kPi) q[0] += 2.0 * kPi;
  return q;
}

Vec3 inverse_kinematics(const RobotModel& model, LegId leg, const Vec3& p,
                        KneeBranch branch) {
  auto q = try_inverse_kinematics(model, leg, p, branch);
  if (!q) {
    std::ostringstream os;
    os << "foot target (" << p.x() << ", " << p.y() << ", " << p.z()
       << ") unreachable for leg " << to_string(leg);
    throw UnreachableTargetError(os.str());
  }
  return *q;
}

}  // namespace quadsim
