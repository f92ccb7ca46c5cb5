// Compares the serial reference implementations against the OpenMP-parallel
// kernels (batch leg kinematics, per-leg sim stage) and verifies the results
// are bit-identical. Exit 0 iff they are.

#include <chrono>
#include <cstdio>
#include <cstring>
#include <random>
#include <vector>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <CLI11.hpp>

#include "quadsim/config.hpp"
#include "quadsim/kinematics_batch.hpp"
#include "quadsim/simworld.hpp"

namespace {

using namespace quadsim;
using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

bool bits_equal(const double& a, const double& b) {
  return std::memcmp(&a, &b, sizeof(double)) == 0;
}

bool bits_equal(const Vec3& a, const Vec3& b) {
  return std::memcmp(a.data(), b.data(), 3 * sizeof(double)) == 0;
}

bool bits_equal(const Mat3& a, const Mat3& b) {
  return std::memcmp(a.data(), b.data(), 9 * sizeof(double)) == 0;
}

bool states_bits_equal(const SimState& a, const SimState& b) {
  if (!bits_equal(a.base_position, b.base_position)) return false;
  if (std::memcmp(a.base_orientation.coeffs().data(),
                  b.base_orientation.coeffs().data(), 4 * sizeof(double)) != 0)
    return false;
  if (!bits_equal(a.base_linear_velocity, b.base_linear_velocity)) return false;
  if (!bits_equal(a.base_angular_momentum, b.base_angular_momentum))
    return false;
  for (int li = 0; li < kNumLegs; ++li) {
    if (!bits_equal(a.joints[li].q, b.joints[li].q)) return false;
    if (!bits_equal(a.joints[li].qdot, b.joints[li].qdot)) return false;
  }
  for (int i = 0; i < kNumJoints; ++i) {
    if (!bits_equal(a.actuators[i].current, b.actuators[i].current))
      return false;
    if (!bits_equal(a.actuators[i].driver_temp, b.actuators[i].driver_temp))
      return false;
  }
  return true;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"serial vs OpenMP kernel benchmark"};
  long batch = 200000;
  long sim_steps = 4000;
  int repeats = 3;
  app.add_option("--batch", batch, "kinematics batch size");
  app.add_option("--steps", sim_steps, "sim steps per timing run");
  app.add_option("--repeats", repeats, "timing repetitions (best kept)");
  CLI11_PARSE(app, argc, argv);

#ifdef _OPENMP
  std::printf("OpenMP enabled, max threads %d\n", omp_get_max_threads());
#else
  std::printf("built without OpenMP; parallel paths run serially\n");
#endif

  const SystemConfig config = default_system_config();

  // --- batch kinematics ---
  std::mt19937_64 rng(12345);
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::vector<LegState> states(batch);
  for (long i = 0; i < batch; ++i) {
    states[i].leg_id = kLegOrder[i % kNumLegs];
    states[i].q = Vec3(u(rng), u(rng), u(rng) + 0.9);
  }

  double t_serial = 1e300, t_parallel = 1e300;
  BatchKinematics ref, par;
  for (int r = 0; r < repeats; ++r) {
    auto t0 = clock_type::now();
    ref = batch_leg_kinematics_serial(states, config.robot);
    t_serial = std::min(t_serial, seconds_since(t0));
    t0 = clock_type::now();
    par = batch_leg_kinematics_parallel(states, config.robot);
    t_parallel = std::min(t_parallel, seconds_since(t0));
  }
  bool kin_match = ref.foot_positions.size() == par.foot_positions.size();
  for (size_t i = 0; kin_match && i < ref.foot_positions.size(); ++i)
    kin_match = bits_equal(ref.foot_positions[i], par.foot_positions[i]) &&
                bits_equal(ref.jacobians[i], par.jacobians[i]);
  std::printf(
      "batch kinematics (%ld rows): serial %.3f ms, parallel %.3f ms, "
      "speedup %.2fx, bit-identical: %s\n",
      batch, t_serial * 1e3, t_parallel * 1e3, t_serial / t_parallel,
      kin_match ? "yes" : "NO");

  // --- sim step, per-leg stage serial vs OpenMP ---
  SimParams serial_params = config.sim;
  serial_params.parallel_legs = false;
  SimParams parallel_params = config.sim;
  parallel_params.parallel_legs = true;

  const SimState init = initial_standing_state(
      config.robot, config.terrain, config.controller.stance_height,
      config.sim);
  std::array<double, kNumJoints> cmds{};  // passive drop exercises contact

  double s_serial = 1e300, s_parallel = 1e300;
  SimState end_serial = init, end_parallel = init;
  for (int r = 0; r < repeats; ++r) {
    SimState s = init;
    auto t0 = clock_type::now();
    for (long i = 0; i < sim_steps; ++i)
      s = step(s, cmds, config.terrain, config.robot, serial_params);
    s_serial = std::min(s_serial, seconds_since(t0));
    end_serial = s;

    s = init;
    t0 = clock_type::now();
    for (long i = 0; i < sim_steps; ++i)
      s = step(s, cmds, config.terrain, config.robot, parallel_params);
    s_parallel = std::min(s_parallel, seconds_since(t0));
    end_parallel = s;
  }
  const bool sim_match = states_bits_equal(end_serial, end_parallel);
  std::printf(
      "sim step (%ld steps): serial %.3f ms, parallel %.3f ms, speedup "
      "%.2fx, bit-identical: %s\n",
      sim_steps, s_serial * 1e3, s_parallel * 1e3, s_serial / s_parallel,
      sim_match ? "yes" : "NO");

  return (kin_match && sim_match) ? 0 : 1;
}
