#include "midblock/energy.hpp"

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"

namespace midblock {
namespace {

Trajectory constant(double v, double duration, double dt = 0.5) {
  Trajectory t;
  t.dt = dt;
  const auto n = static_cast<int>(std::llround(duration / dt));
  for (int k = 0; k <= n; ++k) t.samples.push_back({k * dt, v * k * dt, v, 0.0});
  t.street_length = t.samples.back().position;
  return t;
}

Trajectory random_trajectory(std::mt19937_64& rng, int steps, double dt) {
  std::uniform_real_distribution<double> accel(-4.0, 3.0);
  Trajectory t;
  t.dt = dt;
  TrajectorySample s{0.0, 0.0, 8.0, 0.0};
  for (int k = 0; k < steps; ++k) {
    s.accel = std::max(accel(rng), -s.speed / dt);
    if (k % 7 == 3) s.accel = 0.0;
    TrajectorySample next = advance(s, s.accel, dt);
    next.speed = std::max(next.speed, 0.0);
    t.samples.push_back(s);
    s = next;
  }
  t.samples.push_back(s);
  return t;
}

oracle::Car car_of(const VehicleSpec& v) { return {v.mass, v.f0, v.f2, v.eta}; }

std::vector<oracle::Sample> to_oracle(const Trajectory& t) {
  std::vector<oracle::Sample> out;
  for (const auto& s : t.samples) out.push_back({s.t, s.speed, s.accel});
  return out;
}

TEST(Power, CamryCruise) {
  EXPECT_NEAR(instantaneous_power(camry(), 13.4, 0.0), 113.82 * 13.4 + 0.36 * 13.4 * 13.4 * 13.4, 1e-9);
  EXPECT_NEAR(instantaneous_power(camry(), 13.4, 0.0), 2391.4, 0.05);
}

TEST(Power, ZeroWhenIdleOrBraking) {
  EXPECT_EQ(instantaneous_power(camry(), 0.0, 0.0), 0.0);
  EXPECT_EQ(instantaneous_power(highlander(), 10.0, -2.0), 0.0);
  EXPECT_EQ(instantaneous_power(camry(), 0.1, 1.0), 0.0);
}

TEST(Power, MildDecelerationStillPaysResistance) {
  const double p = instantaneous_power(camry(), 10.0, -0.04);
  EXPECT_NEAR(p, 1644.0 * -0.04 * 10.0 + 113.82 * 10.0 + 0.36 * 1000.0, 1e-9);
}

TEST(Energy, ConstantCruiseClosedForm) {
  VehicleSpec spec = camry();
  spec.eta = 0.2;
  const auto r = energy_of(constant(13.4, 74.5), spec);
  const double expected = oracle::cruise_fuel(car_of(spec), 13.4, 74.5);
  EXPECT_NEAR(r.e_fuel / expected, 1.0, 1e-12);
  EXPECT_NEAR(r.e_fuel / 1000.0, 890.8, 0.1);
  EXPECT_NEAR(r.e_inst / 1000.0, 178.2, 0.1);
  EXPECT_EQ(r.e_fuel, r.e_inst / spec.eta);
  EXPECT_DOUBLE_EQ(r.modes.cruising, 74.5);
  EXPECT_EQ(r.trip_time, 74.5);
  EXPECT_NEAR(r.mean_speed, 13.4, 1e-12);
  EXPECT_NEAR(r.speed_stddev, 0.0, 1e-12);
}

TEST(Energy, Co2Factor) {
  EXPECT_NEAR(co2_grams(1000.0 * 1000.0), 71.148, 1e-9);
  EXPECT_NEAR(co2_grams(1000.0 * 1000.0), 1000.0 * 0.0196 * 0.99 * 44.0 / 12.0, 1e-9);
}

TEST(Energy, Standstill) {
  const auto r = energy_of(constant(0.0, 10.0), camry());
  EXPECT_EQ(r.e_inst, 0.0);
  EXPECT_EQ(r.co2, 0.0);
  EXPECT_DOUBLE_EQ(r.modes.idling, r.trip_time);
}

TEST(Energy, MatchesBruteForceOracle) {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<int> steps(2, 400);
  std::uniform_real_distribution<double> dt(0.1, 1.0);
  for (int i = 0; i < 100; ++i) {
    const Trajectory t = random_trajectory(rng, steps(rng), dt(rng));
    for (const auto& spec : {camry(), highlander()}) {
      const auto r = energy_of(t, spec);
      const auto ref = oracle::brute_force(to_oracle(t), car_of(spec));
      if (ref.wheel_j == 0.0) {
        EXPECT_EQ(r.e_inst, 0.0);
        continue;
      }
      EXPECT_NEAR(r.e_inst / ref.wheel_j, 1.0, 1e-9);
      EXPECT_NEAR(r.e_fuel / ref.fuel_j, 1.0, 1e-9);
      EXPECT_NEAR(r.co2 / ref.co2_g, 1.0, 1e-9);
    }
  }
}

TEST(Energy, ModeDurationsCoverTrip) {
  std::mt19937_64 rng(8);
  for (int i = 0; i < 20; ++i) {
    const Trajectory t = random_trajectory(rng, 120, 0.5);
    const auto r = energy_of(t, camry());
    EXPECT_NEAR(r.modes.total(), r.trip_time, 0.5);
  }
}

TEST(Energy, EtaScaling) {
  std::mt19937_64 rng(9);
  const Trajectory t = random_trajectory(rng, 200, 0.5);
  VehicleSpec a = camry();
  VehicleSpec b = camry();
  b.eta = a.eta * 1.5;
  const auto ra = energy_of(t, a);
  const auto rb = energy_of(t, b);
  EXPECT_EQ(ra.e_inst, rb.e_inst);
  EXPECT_NEAR(ra.e_fuel / rb.e_fuel, 1.5, 1e-12);
  EXPECT_NEAR(ra.co2 / rb.co2, 1.5, 1e-12);
}

TEST(Energy, DoublingTheTripDoublesEnergy) {
  std::mt19937_64 rng(10);
  const Trajectory t = random_trajectory(rng, 150, 0.5);
  Trajectory twice = t;
  twice.samples.pop_back();
  const double shift = t.samples.back().t;
  for (auto s : t.samples) {
    s.t += shift;
    twice.samples.push_back(s);
  }
  // The seam sample drives the second copy's first step.
  EXPECT_NEAR(energy_of(twice, camry()).e_inst / energy_of(t, camry()).e_inst, 2.0, 1e-9);
}

TEST(Energy, HighlanderUsesMoreThanCamry) {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 50; ++i) {
    const Trajectory t = random_trajectory(rng, 100, 0.5);
    const auto c = energy_of(t, camry());
    const auto h = energy_of(t, highlander());
    if (c.e_inst > 0.0) {
      EXPECT_GT(h.e_inst, c.e_inst);
      EXPECT_GT(h.e_fuel, c.e_fuel);
    }
  }
}

TEST(Energy, RejectsNonUniformStep) {
  Trajectory t = constant(10.0, 5.0);
  t.samples[3].t += 0.01;
  EXPECT_THROW(energy_of(t, camry()), NonUniformStep);
  EXPECT_THROW(energy_of(Trajectory{}, camry()), Error);
}

TEST(Ingest, ConstantTwoRows) {
  std::istringstream in("time_s,speed_mps\n0,10\n1,10\n");
  const auto t = ingest_trajectory(in);
  ASSERT_EQ(t.samples.size(), 2u);
  EXPECT_EQ(t.dt, 1.0);
  EXPECT_EQ(t.samples[0].accel, 0.0);
  EXPECT_EQ(t.samples[1].position, 10.0);
}

TEST(Ingest, BackFillsAcceleration) {
  std::istringstream in("time_s,speed_mps\n0,0\n1,2\n");
  const auto t = ingest_trajectory(in);
  EXPECT_EQ(t.samples[0].accel, 2.0);
  EXPECT_EQ(t.samples[1].accel, 0.0);
  EXPECT_EQ(t.samples[1].position, 1.0);
}

TEST(Ingest, AcceptsBomAndCrlf) {
  std::istringstream in("\xEF\xBB\xBFtime_s,speed_mps\r\n0,5\r\n0.5,5\r\n1,5\r\n");
  const auto t = ingest_trajectory(in);
  EXPECT_EQ(t.samples.size(), 3u);
  EXPECT_EQ(t.samples.back().position, 5.0);
}

TEST(Ingest, NonIncreasingTime) {
  std::istringstream in("time_s,speed_mps\n0,1\n0.5,1\n0.4,1\n");
  try {
    ingest_trajectory(in);
    FAIL();
  } catch (const MonotonicityError& e) {
    EXPECT_EQ(e.line(), 4u);
  }
}

TEST(Ingest, SchemaErrors) {
  auto expect_schema = [](const std::string& text, std::size_t line) {
    std::istringstream in(text);
    try {
      ingest_trajectory(in);
      ADD_FAILURE() << text;
    } catch (const SchemaError& e) {
      EXPECT_EQ(e.line(), line) << text;
      if (line > 0) {
        EXPECT_NE(std::string(e.what()).find("line " + std::to_string(line)), std::string::npos);
      }
    }
  };
  expect_schema("", 0);
  expect_schema("time,speed\n0,1\n1,1\n", 1);
  expect_schema("time_s,speed_mps\n0,1\n", 2);
  expect_schema("time_s,speed_mps\n0,1\n1\n", 3);
  expect_schema("time_s,speed_mps\n0,1\n1,abc\n", 3);
  expect_schema("time_s,speed_mps\n0,1,2\n1,1\n", 2);
}

TEST(Ingest, NegativeSpeed) {
  std::istringstream in("time_s,speed_mps\n0,1\n1,-1\n");
  EXPECT_THROW(ingest_trajectory(in), ValueError);
}

TEST(Ingest, NonUniformSpacing) {
  std::istringstream in("time_s,speed_mps\n0,1\n1,1\n2.5,1\n");
  EXPECT_THROW(ingest_trajectory(in), NonUniformStep);
}

TEST(Ingest, AccelColumnMatchesBackFill) {
  std::mt19937_64 rng(4);
  const Trajectory t = random_trajectory(rng, 80, 0.5);
  std::ostringstream with;
  write_trajectory_csv(with, t);
  std::ostringstream without;
  without << kCsvHeader << '\n';
  for (const auto& s : t.samples) without << detail::format_double(s.t) << ',' << detail::format_double(s.speed) << '\n';

  std::istringstream a(with.str());
  std::istringstream b(without.str());
  const auto ta = ingest_trajectory(a);
  const auto tb = ingest_trajectory(b);
  const auto ra = energy_of(ta, camry());
  const auto rb = energy_of(tb, camry());
  EXPECT_NEAR(ra.e_fuel / rb.e_fuel, 1.0, 1e-9);
  EXPECT_EQ(ra.modes, energy_of(t, camry()).modes);
}

TEST(Ingest, RoundTripIsExact) {
  std::mt19937_64 rng(6);
  const Trajectory t = random_trajectory(rng, 60, 0.5);
  std::ostringstream out;
  write_trajectory_csv(out, t);
  std::istringstream in(out.str());
  const auto back = ingest_trajectory(in);
  ASSERT_EQ(back.samples.size(), t.samples.size());
  for (std::size_t k = 0; k < t.samples.size(); ++k) {
    EXPECT_EQ(back.samples[k].t, t.samples[k].t);
    EXPECT_EQ(back.samples[k].speed, t.samples[k].speed);
    EXPECT_EQ(back.samples[k].accel, t.samples[k].accel);
  }
  EXPECT_EQ(energy_of(back, highlander()).e_fuel, energy_of(t, highlander()).e_fuel);
}

}  // namespace
}  // namespace midblock
