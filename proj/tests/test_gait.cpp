#include <doctest.h>

#include <cmath>

#include "quadsim/gait.hpp"

using namespace quadsim;

TEST_CASE("schedule validation") {
  GaitSchedule trot = GaitSchedule::trot();
  CHECK_NOTHROW(trot.validate());
  trot.duty_factor = 0.0;
  CHECK_THROWS_AS(trot.validate(), ConfigError);

  GaitSchedule stand = GaitSchedule::stand();
  CHECK(stand.duty_factor == 1.0);
  stand.duty_factor = 0.9;  // stand must keep every leg planted
  CHECK_THROWS_AS(stand.validate(), ConfigError);

  GaitSchedule crawl = GaitSchedule::crawl();
  crawl.duty_factor = 0.7;  // would allow two legs in swing
  CHECK_THROWS_AS(crawl.validate(), ConfigError);
}

TEST_CASE("trot phases at t = 0 and diagonal synchronization") {
  const GaitSchedule trot = GaitSchedule::trot();
  const auto at0 = leg_phase(0.0, trot);
  CHECK(at0[0].phase == 0.0);  // FL stance start
  CHECK(at0[0].stance);
  CHECK(at0[1].phase == 0.5);  // FR swing start
  CHECK_FALSE(at0[1].stance);
  CHECK_FALSE(at0[2].stance);  // RL with FR
  CHECK(at0[3].stance);        // RR with FL

  for (double t = 0.0; t < 2.0; t += 0.00317) {
    const auto p = leg_phase(t, trot);
    CHECK(p[0].phase == doctest::Approx(p[3].phase).epsilon(1e-12));
    CHECK(p[1].phase == doctest::Approx(p[2].phase).epsilon(1e-12));
    CHECK(p[0].stance == p[3].stance);
    CHECK(p[1].stance == p[2].stance);
  }
}

TEST_CASE("leg_phase is periodic") {
  const GaitSchedule crawl = GaitSchedule::crawl();
  for (double t = 0.0; t < 3.0; t += 0.0411) {
    const auto a = leg_phase(t, crawl);
    const auto b = leg_phase(t + crawl.period, crawl);
    for (int li = 0; li < kNumLegs; ++li) {
      CHECK(a[li].phase == doctest::Approx(b[li].phase).epsilon(1e-9));
      CHECK(a[li].stance == b[li].stance);
    }
  }
}

TEST_CASE("crawl keeps at least three legs in stance") {
  const GaitSchedule crawl = GaitSchedule::crawl();
  for (double t = 0.0; t <= crawl.period; t += 1e-4) {
    const auto p = leg_phase(t, crawl);
    int stance = 0;
    for (int li = 0; li < kNumLegs; ++li) stance += p[li].stance ? 1 : 0;
    REQUIRE(stance >= 3);
  }
}

TEST_CASE("stand keeps every leg in stance") {
  const GaitSchedule stand = GaitSchedule::stand();
  for (double t = 0.0; t < 5.0; t += 0.137) {
    for (const LegPhase& p : leg_phase(t, stand)) CHECK(p.stance);
  }
}

TEST_CASE("swing trajectory endpoints, apex, and endpoint velocities") {
  const Vec3 start(0.3, 0.15, 0.0);
  const Vec3 target(0.42, 0.13, 0.03);
  const double h = 0.06;

  CHECK((swing_trajectory(0.0, start, target, h) - start).norm() == 0.0);
  CHECK((swing_trajectory(1.0, start, target, h) - target).norm() == 0.0);

  const Vec3 apex = swing_trajectory(0.5, start, target, h);
  CHECK(apex.z() == doctest::Approx(std::max(start.z(), target.z()) + h));

  const Vec3 p(0.1, -0.2, 0.05);
  CHECK((swing_trajectory(0.5, p, p, h) - (p + Vec3(0, 0, h))).norm() <
        1e-15);

  // vertical velocity vanishes at both ends (soft touchdown)
  const double ds = 1e-7;
  const double v0 =
      (swing_trajectory(ds, start, target, h).z() - start.z()) / ds;
  const double v1 =
      (target.z() - swing_trajectory(1.0 - ds, start, target, h).z()) / ds;
  CHECK(std::abs(v0) < 1e-6);
  CHECK(std::abs(v1) < 1e-6);

  CHECK_THROWS_AS(swing_trajectory(-0.01, start, target, h),
                  std::invalid_argument);
  CHECK_THROWS_AS(swing_trajectory(1.01, start, target, h),
                  std::invalid_argument);
}

TEST_CASE("swing trajectory stays inside the raised box hull") {
  const Vec3 start(-0.1, 0.2, 0.01);
  const Vec3 target(0.15, 0.17, -0.02);
  const double h = 0.08;
  const Vec3 lo = start.cwiseMin(target);
  const Vec3 hi = start.cwiseMax(target) + Vec3(0, 0, h);
  for (int i = 0; i <= 1000; ++i) {
    const Vec3 p = swing_trajectory(i / 1000.0, start, target, h);
    CHECK(p.x() >= lo.x() - 1e-12);
    CHECK(p.y() >= lo.y() - 1e-12);
    CHECK(p.z() >= lo.z() - 1e-12);
    CHECK(p.x() <= hi.x() + 1e-12);
    CHECK(p.y() <= hi.y() + 1e-12);
    CHECK(p.z() <= hi.z() + 1e-12);
  }
}

TEST_CASE("foothold targeting") {
  const GroundPlane flat{Vec3::Zero(), Vec3::UnitZ()};
  const Vec3 hip(0.3, 0.15, 0.0);

  CHECK((foothold_target(Vec3::Zero(), Vec3::Zero(), 0.25, hip, flat) - hip)
            .norm() < 1e-15);

  const Vec3 t =
      foothold_target(Vec3(0.4, 0, 0), Vec3(0.4, 0, 0), 0.25, hip, flat);
  CHECK((t - (hip + Vec3(0.05, 0, 0))).norm() < 1e-12);

  // velocity error feedback with the default 0.03 s gain
  const Vec3 e = foothold_target(Vec3(0.4, 0, 0), Vec3(0.3, 0.1, 0), 0.25,
                                 hip, flat);
  CHECK((e - (hip + Vec3(0.05 - 0.003, 0.003, 0))).norm() < 1e-12);

  // sloped plane: the target lands on the surface
  const Vec3 n = Vec3(-std::sin(0.2), 0, std::cos(0.2));
  const GroundPlane slope{Vec3::Zero(), n};
  const Vec3 s =
      foothold_target(Vec3(0.3, 0, 0), Vec3(0.3, 0, 0), 0.3, hip, slope);
  CHECK(std::abs(slope.signed_distance(s)) < 1e-9);
}
