#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "quadsim/kinematics.hpp"

using namespace quadsim;

namespace {
const RobotModel kModel;

Vec3 random_in_limits(std::mt19937_64& rng) {
  Vec3 q;
  for (int j = 0; j < 3; ++j) {
    std::uniform_real_distribution<double> u(kModel.joint_limits.lower[j],
                                             kModel.joint_limits.upper[j]);
    q[j] = u(rng);
  }
  return q;
}
}  // namespace

TEST_CASE("FK straight down and fully forward") {
  for (LegId leg : kLegOrder) {
    const Vec3 down = forward_kinematics(kModel, leg, Vec3::Zero());
    CHECK((down - (kModel.hip_offset(leg) + Vec3(0, 0, -0.5))).norm() <
          1e-15);

    const Vec3 fwd =
        forward_kinematics(kModel, leg, Vec3(0.0, deg2rad(90.0), 0.0));
    CHECK((fwd - (kModel.hip_offset(leg) + Vec3(0.5, 0, 0))).norm() < 1e-12);
  }
}

TEST_CASE("FK matches the transform-stack oracle") {
  std::mt19937_64 rng(7);
  for (int i = 0; i < 2000; ++i) {
    const LegId leg = kLegOrder[i % kNumLegs];
    const Vec3 q = random_in_limits(rng);
    const Vec3 lib = forward_kinematics(kModel, leg, q);
    const Vec3 ref = oracles::fk_transform_stack(kModel, leg, q);
    CHECK((lib - ref).norm() < 1e-12);
  }
}

TEST_CASE("IK trivial and unreachable cases") {
  for (LegId leg : kLegOrder) {
    const Vec3 q =
        inverse_kinematics(kModel, leg, kModel.hip_offset(leg) + Vec3(0, 0, -0.5));
    CHECK(q.norm() < 1e-9);

    CHECK_THROWS_AS(inverse_kinematics(
                        kModel, leg, kModel.hip_offset(leg) + Vec3(0, 0, -0.6)),
                    UnreachableTargetError);
    CHECK_FALSE(try_inverse_kinematics(
        kModel, leg, kModel.hip_offset(leg) + Vec3(0, 0, -0.6)));

    // target on the ab/ad axis: no lateral-offset-consistent solution
    const Vec3 on_axis = abad_axis_origin(kModel, leg) + Vec3(0.1, 0, 0);
    CHECK_THROWS_AS(inverse_kinematics(kModel, leg, on_axis),
                    UnreachableTargetError);
  }
}

namespace {
// planar foot height in the leg plane; IK's principal domain is z_l <= 0
// (foot below the ab/ad axis). Extreme in-limit folds can place the foot
// above the axis, where the target has a second, distinct in-limit preimage
// on the same knee branch, so no IK can invert FK there.
double planar_height(const RobotModel& m, const Vec3& q) {
  return -m.thigh_length * std::cos(q[1]) -
         m.shank_length * std::cos(q[1] - q[2]);
}
}  // namespace

TEST_CASE("IK(FK(q)) = q on the matching branch") {
  std::mt19937_64 rng(11);
  int tested = 0;
  while (tested < 2000) {
    const LegId leg = kLegOrder[tested % kNumLegs];
    const Vec3 q = random_in_limits(rng);
    if (planar_height(kModel, q) > -0.01) continue;  // outside IK's domain
    ++tested;
    const KneeBranch branch =
        q[2] >= 0.0 ? KneeBranch::FlexedBack : KneeBranch::FlexedForward;
    const Vec3 p = forward_kinematics(kModel, leg, q);
    const Vec3 back = inverse_kinematics(kModel, leg, p, branch);
    CHECK((back - q).cwiseAbs().maxCoeff() < 1e-9);
  }
}

TEST_CASE("foot above the ab/ad axis: IK returns the below-axis preimage") {
  // hip -60 deg with knee folded 165 deg lifts the foot above the axis;
  // IK still returns a consistent solution, just on its principal domain
  const Vec3 q(0.0, deg2rad(-60.0), deg2rad(165.0));
  CHECK(planar_height(kModel, q) > 0.0);
  const Vec3 p = forward_kinematics(kModel, LegId::FL, q);
  const Vec3 alt = inverse_kinematics(kModel, LegId::FL, p);
  CHECK((forward_kinematics(kModel, LegId::FL, alt) - p).norm() < 1e-9);
  CHECK((alt - q).cwiseAbs().maxCoeff() > 0.1);  // genuinely different branch
}

TEST_CASE("analytic Jacobian matches central differences") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 500; ++i) {
    const LegId leg = kLegOrder[i % kNumLegs];
    const Vec3 q = random_in_limits(rng);
    const Mat3 ja = jacobian(kModel, leg, q);
    const Mat3 jn = oracles::jacobian_central_diff(kModel, leg, q);
    CHECK((ja - jn).norm() / std::max(1.0, ja.norm()) < 1e-6);
  }
}

TEST_CASE("straight-down leg: vertical force loads neither hip nor knee") {
  for (LegId leg : kLegOrder) {
    const Mat3 j = jacobian(kModel, leg, Vec3::Zero());
    const Vec3 tau = j.transpose() * Vec3(0, 0, -120.0);
    CHECK(std::abs(tau[1]) < 1e-12);
    CHECK(std::abs(tau[2]) < 1e-12);
  }
}

TEST_CASE("pitch columns scale linearly with link lengths") {
  RobotModel big = kModel;
  big.thigh_length *= 2.0;
  big.shank_length *= 2.0;
  const Vec3 q(0.2, 0.5, 1.0);
  const Mat3 j1 = jacobian(kModel, LegId::FR, q);
  const Mat3 j2 = jacobian(big, LegId::FR, q);
  CHECK((j2.col(1) - 2.0 * j1.col(1)).norm() < 1e-12);
  CHECK((j2.col(2) - 2.0 * j1.col(2)).norm() < 1e-12);
}

TEST_CASE("power balance through the Jacobian transpose") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const LegId leg = kLegOrder[i % kNumLegs];
    const Vec3 q = random_in_limits(rng);
    const Vec3 qdot(u(rng), u(rng), u(rng));
    const Vec3 f(u(rng), u(rng), u(rng));
    const Mat3 j = jacobian(kModel, leg, q);
    CHECK(std::abs(f.dot(j * qdot) - (j.transpose() * f).dot(qdot)) < 1e-12);
    CHECK((foot_velocity(kModel, leg, q, qdot) - j * qdot).norm() < 1e-15);
  }
}

TEST_CASE("FK Lipschitz bound from total arm length") {
  std::mt19937_64 rng(19);
  std::uniform_real_distribution<double> u(-0.05, 0.05);
  const double arm =
      kModel.thigh_length + kModel.shank_length + kModel.abad_offset;
  for (int i = 0; i < 200; ++i) {
    const LegId leg = kLegOrder[i % kNumLegs];
    const Vec3 q = random_in_limits(rng);
    const Vec3 dq(u(rng), u(rng), u(rng));
    const double dp = (forward_kinematics(kModel, leg, q + dq) -
                       forward_kinematics(kModel, leg, q))
                          .norm();
    CHECK(dp <= arm * dq.norm() * (1.0 + 1e-9));
  }
}
