#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "quadsim/morphology.hpp"

using namespace quadsim;

TEST_CASE("planetary ratio is 1 + ring/sun") {
  TransmissionSpec spec;  // 20/40/100
  CHECK(planetary_ratio(spec) == 6.0);  // exact: small integers

  spec.sun_teeth = 25;
  spec.planet_teeth = 25;
  spec.ring_teeth = 75;
  CHECK(planetary_ratio(spec) == 4.0);
}

TEST_CASE("planetary mesh condition enforced") {
  TransmissionSpec spec;
  spec.ring_teeth = 99;  // 20 + 2*40 = 100 != 99
  CHECK_THROWS_AS(planetary_ratio(spec), ModelValidationError);
}

TEST_CASE("knee chain stage multiplies the planetary stage") {
  RobotModel model;
  const auto r = leg_reductions(model);
  CHECK(r[0] == 6.0);
  CHECK(r[1] == 6.0);
  CHECK(r[2] == doctest::Approx(90.0 / 11.0).epsilon(1e-15));

  char buf[16];
  std::snprintf(buf, sizeof buf, "%.2f", r[2]);
  CHECK(std::string(buf) == "8.18");
}

TEST_CASE("knee without sprockets is rejected") {
  TransmissionSpec spec;  // no sprockets set
  CHECK_THROWS_AS(joint_reduction(JointId::Knee, spec), ModelValidationError);
  CHECK(joint_reduction(JointId::Hip, spec) == 6.0);  // ignored off the knee
}

TEST_CASE("actuator/joint maps are inverses") {
  RobotModel model;
  const auto r = leg_reductions(model);
  const Vec3 q_joint(0.2, -0.4, 1.1);
  const Vec3 q_act = joint_to_actuator(q_joint, r);
  CHECK((actuator_to_joint(q_act, r) - q_joint).norm() < 1e-15);
  CHECK(q_act[0] == doctest::Approx(1.2));
  // a joint torque maps to a smaller rotor torque by the same ratio
  const Vec3 tau = torque_joint_to_actuator(Vec3(6.0, 6.0, 90.0 / 11.0), r);
  CHECK((tau - Vec3::Ones()).norm() < 1e-12);
}

TEST_CASE("clamp_to_limits reports which joints hit") {
  RobotModel model;
  const auto res =
      clamp_to_limits(Vec3(deg2rad(40.0), 0.0, deg2rad(-80.0)),
                      model.joint_limits);
  CHECK(res.violated[0]);
  CHECK_FALSE(res.violated[1]);
  CHECK(res.violated[2]);
  CHECK(res.q[0] == doctest::Approx(deg2rad(35.0)));
  CHECK(res.q[2] == doctest::Approx(deg2rad(-55.0)));
}

TEST_CASE("validate names the offending field") {
  RobotModel model;
  model.thigh_length = -0.25;
  try {
    model.validate();
    FAIL("expected ModelValidationError");
  } catch (const ModelValidationError& e) {
    CHECK(std::string(e.what()).find("thigh_length") != std::string::npos);
  }

  RobotModel bad_limits;
  bad_limits.joint_limits.lower[1] = bad_limits.joint_limits.upper[1] + 0.1;
  CHECK_THROWS_AS(bad_limits.validate(), ModelValidationError);

  RobotModel asym;
  asym.hip_offsets[1].y() = -0.17;  // breaks left/right mirror symmetry
  CHECK_THROWS_AS(asym.validate(), ModelValidationError);
}

TEST_CASE("base inertia matches the box formula") {
  RobotModel model;
  const Mat3 inertia = model.base_inertia();
  const double m = model.total_mass;
  const Vec3 d = model.torso_dims;
  CHECK(inertia(0, 0) ==
        doctest::Approx(m / 12.0 * (d.y() * d.y() + d.z() * d.z())));
  CHECK(inertia(1, 1) ==
        doctest::Approx(m / 12.0 * (d.x() * d.x() + d.z() * d.z())));
  CHECK(inertia(2, 2) ==
        doctest::Approx(m / 12.0 * (d.x() * d.x() + d.y() * d.y())));
  CHECK(inertia(0, 1) == 0.0);
}

TEST_CASE("model JSON round trip and partial override") {
  const RobotModel model;
  const auto dir = std::filesystem::temp_directory_path() / "quadsim_morph";
  std::filesystem::create_directories(dir);
  const std::string path = (dir / "model.json").string();
  save_model(model, path);
  const RobotModel back = load_model(path);
  CHECK(back == model);

  // a partial file only overrides the named fields
  const std::string partial = (dir / "partial.json").string();
  {
    std::ofstream out(partial);
    out << R"({"robot": {"total_mass_kg": 30.0}})";
  }
  const RobotModel merged = load_model(partial);
  CHECK(merged.total_mass == 30.0);
  CHECK(merged.thigh_length == model.thigh_length);

  const std::string broken = (dir / "broken.json").string();
  {
    std::ofstream out(broken);
    out << R"({"robot": {"total_mass_kg": "heavy"}})";
  }
  CHECK_THROWS_AS(load_model(broken), ConfigError);
}
