#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <random>
#include <vector>

#include "pof/error.hpp"
#include "pof/kinematics.hpp"

using namespace pof;

TEST(IntegrateStep, ZeroAcceleration) {
  const auto s = integrate_step({0.0, 30.0, 0.0, 0}, 0.0, 0.1);
  EXPECT_DOUBLE_EQ(s.position, 3.0);
  EXPECT_DOUBLE_EQ(s.velocity, 30.0);
}

TEST(IntegrateStep, ConstantAcceleration) {
  // 30 * 0.1 + 0.5 * 1 * 0.01
  const auto s = integrate_step({0.0, 30.0, 0.0, 0}, 1.0, 0.1);
  EXPECT_NEAR(s.position, 3.005, 1e-12);
  EXPECT_NEAR(s.velocity, 30.1, 1e-12);
  EXPECT_DOUBLE_EQ(s.acceleration, 1.0);
}

TEST(IntegrateStep, StoppedVehicleDoesNotReverse) {
  const auto s = integrate_step({10.0, 0.0, 0.0, 0}, -2.0, 0.1);
  EXPECT_DOUBLE_EQ(s.velocity, 0.0);
  EXPECT_DOUBLE_EQ(s.position, 10.0);
}

TEST(IntegrateStep, StopsWithinStep) {
  // 0.1 m/s cannot absorb 4 m/s^2 for a full step; the vehicle halts.
  const auto s = integrate_step({0.0, 0.1, 0.0, 0}, -4.0, 0.1);
  EXPECT_DOUBLE_EQ(s.velocity, 0.0);
  EXPECT_NEAR(s.position, 0.005, 1e-12);
  EXPECT_GE(s.position, 0.0);
}

TEST(IntegrateStep, ClampsToActuatorBound) {
  const auto s = integrate_step({0.0, 20.0, 0.0, 0}, 9.0, 0.1);
  EXPECT_DOUBLE_EQ(s.acceleration, kDefaultAccelBound);
  const auto t = integrate_step({0.0, 20.0, 0.0, 0}, -9.0, 0.1, 2.5);
  EXPECT_DOUBLE_EQ(t.acceleration, -2.5);
}

TEST(IntegrateStep, RejectsBadInput) {
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EXPECT_THROW(integrate_step({nan, 1.0, 0.0, 0}, 0.0, 0.1), InvalidState);
  EXPECT_THROW(integrate_step({0.0, 1.0, 0.0, 0}, nan, 0.1), InvalidState);
  EXPECT_THROW(integrate_step({0.0, -1.0, 0.0, 0}, 0.0, 0.1), InvalidState);
  EXPECT_THROW(integrate_step({0.0, 1.0, 0.0, 0}, 0.0, 0.0), DomainError);
}

TEST(MeasureRange, SameLaneFollower) {
  std::mt19937_64 rng(1);
  const VehicleState v{100.0, 30.0, 0.0, 0};
  const std::vector<VehicleState> scene{v, {55.0, 30.0, 0.0, 0}};
  const auto r = measure_range(v, scene, RangeSensor{}, rng);
  ASSERT_TRUE(r);
  EXPECT_NEAR(*r, 45.0, 1e-9);
}

TEST(MeasureRange, AdjacentLaneIsInvisible) {
  std::mt19937_64 rng(1);
  const VehicleState v{100.0, 30.0, 0.0, 0};
  const std::vector<VehicleState> scene{{55.0, 30.0, 0.0, 1}};
  EXPECT_FALSE(measure_range(v, scene, RangeSensor{}, rng));
}

TEST(MeasureRange, NearestWins) {
  std::mt19937_64 rng(1);
  const VehicleState v{100.0, 30.0, 0.0, 0};
  const std::vector<VehicleState> scene{{55.0, 30.0, 0.0, 0}, {70.0, 30.0, 0.0, 0}};
  const auto r = measure_range(v, scene, RangeSensor{}, rng);
  ASSERT_TRUE(r);
  EXPECT_NEAR(*r, 30.0, 1e-9);
}

TEST(MeasureRange, IgnoresVehiclesAheadAndOutOfRange) {
  std::mt19937_64 rng(1);
  const VehicleState v{100.0, 30.0, 0.0, 0};
  RangeSensor sensor;
  sensor.max_range = 40.0;
  const std::vector<VehicleState> scene{{130.0, 30.0, 0.0, 0}, {55.0, 30.0, 0.0, 0}};
  EXPECT_FALSE(measure_range(v, scene, sensor, rng));
}

TEST(MeasureRange, QuantizesToResolution) {
  std::mt19937_64 rng(1);
  const VehicleState v{100.0, 30.0, 0.0, 0};
  const std::vector<VehicleState> scene{{58.14, 30.0, 0.0, 0}};
  const auto r = measure_range(v, scene, RangeSensor{}, rng);
  ASSERT_TRUE(r);
  EXPECT_NEAR(*r, 42.0, 1e-9);
}

TEST(RangeSensor, Validates) {
  EXPECT_THROW((RangeSensor{0.0, 0.0, 10.0}.validate()), DomainError);
  EXPECT_THROW((RangeSensor{0.3, -1.0, 10.0}.validate()), DomainError);
  EXPECT_THROW((RangeSensor{0.3, 0.0, 0.0}.validate()), DomainError);
  EXPECT_NO_THROW(RangeSensor{}.validate());
}

TEST(MeasureRangeProperty, NearestBehindMatchesBruteForce) {
  std::mt19937_64 scene_rng(7);
  std::mt19937_64 rng(0);
  std::uniform_real_distribution<double> pos(0.0, 300.0);
  std::uniform_int_distribution<int> lane(0, 2);
  const RangeSensor sensor{0.3, 0.0, 150.0};
  for (int trial = 0; trial < 500; ++trial) {
    const VehicleState v{150.0, 30.0, 0.0, lane(scene_rng)};
    std::vector<VehicleState> scene{v};
    for (int i = 0; i < 6; ++i) scene.push_back({pos(scene_rng), 30.0, 0.0, lane(scene_rng)});

    std::optional<double> best;
    for (const auto& s : scene) {
      const double d = v.position - s.position;
      if (s.lane != v.lane || d <= 0.0 || d > sensor.max_range) continue;
      if (!best || d < *best) best = d;
    }
    const auto r = measure_range(v, scene, sensor, rng);
    ASSERT_EQ(r.has_value(), best.has_value());
    if (!best) continue;
    EXPECT_NEAR(*r, std::round(*best / 0.3) * 0.3, 1e-9);
    for (const auto& s : scene) {
      const double d = v.position - s.position;
      if (s.lane == v.lane && d > 0.0 && d <= sensor.max_range) EXPECT_LE(*r, d + 0.15 + 1e-9);
    }
  }
}

TEST(MeasureRangeProperty, ConstantVelocityPairGivesConstantRange) {
  std::mt19937_64 rng(3);
  VehicleState lead{500.0, 27.0, 0.0, 0};
  VehicleState follower{455.3, 27.0, 0.0, 0};
  const RangeSensor sensor;
  const auto first = measure_range(lead, std::vector{follower}, sensor, rng);
  ASSERT_TRUE(first);
  for (int n = 0; n < 600; ++n) {
    lead = integrate_step(lead, 0.0, 0.1);
    follower = integrate_step(follower, 0.0, 0.1);
    const auto r = measure_range(lead, std::vector{follower}, sensor, rng);
    ASSERT_TRUE(r);
    EXPECT_NEAR(*r, *first, 1e-9);
  }
}

TEST(MeasureRangeProperty, NoisyReadingsStayOnGrid) {
  std::mt19937_64 rng(11);
  const VehicleState v{100.0, 30.0, 0.0, 0};
  const std::vector<VehicleState> scene{{55.0, 30.0, 0.0, 0}};
  const RangeSensor sensor{0.3, 0.5, 150.0};
  for (int i = 0; i < 200; ++i) {
    const auto r = measure_range(v, scene, sensor, rng);
    ASSERT_TRUE(r);
    const double q = *r / 0.3;
    EXPECT_NEAR(q, std::round(q), 1e-9);
  }
}

TEST(RouteTrace, RequiresIncreasingTime) {
  RouteTrace trace;
  trace.append({0.0, 0, 0.0});
  trace.append({3.0, 0, 0.1});
  EXPECT_THROW(trace.append({6.0, 0, 0.1}), InvalidState);
  EXPECT_THROW(trace.append({6.0, 0, 0.05}), InvalidState);
  EXPECT_EQ(trace.size(), 2u);
}
