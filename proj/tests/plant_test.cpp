#include <sstream>

#include <gtest/gtest.h>

#include "marijke/closed_loop.hpp"

using namespace marijke;

namespace {

const LockId N = LockId::north;
const LockId S = LockId::south;
const StreamSide U = StreamSide::upstream;
const StreamSide D = StreamSide::downstream;
const Orientation E = Orientation::east;
const Orientation W = Orientation::west;

PlantConfig full() { return PlantConfig::full(); }

FaultTarget gate_target(LockId l, StreamSide s, Orientation o) { return {TargetKind::gate, l, s, o}; }
FaultTarget leaving_target(LockId l, StreamSide s, Orientation o) { return {TargetKind::leaving_light, l, s, o}; }

std::vector<Action> ticks(Plant& p, int n) {
  std::vector<Action> all;
  for (int i = 0; i < n; ++i)
    for (const Action& a : p.tick())
      all.push_back(a);
  return all;
}

// Drives a gate to `pos` by opening it and ticking.
void open_to(Plant& p, LockId l, StreamSide s, Orientation o, int pos) {
  p.apply(Action::gate_actuator(l, s, o, ActuatorCommand::do_open));
  for (int i = 0; i < pos; ++i)
    p.tick();
}

SensorPosition sensed(const Device& d) {
  if (d.position == 0)
    return SensorPosition::sense_closed;
  if (d.position == plant_travel)
    return SensorPosition::sense_open;
  return SensorPosition::sense_intermediate;
}

std::string run_scenario(const std::string& text, std::uint64_t ticks, FaultProfile profile = {}, std::uint64_t seed = 0) {
  ClosedLoop loop(PlantConfig::reduced(), {}, select_requirements("all"), profile, seed);
  loop.run(parse_scenario(text), ticks);
  std::ostringstream out;
  write_trace(out, loop.trace());
  return out.str();
}

const char* const demo_scenario = "0 PaddleCommand(north,upstream,command_open)\n"
                                  "5 PaddleCommand(north,upstream,command_close)\n"
                                  "20 GateCommand(north,upstream,command_open)\n"
                                  "40 inject(gate(north,upstream,east),motor_stall)\n"
                                  "41 GateCommand(north,upstream,command_close)\n"
                                  "60 clear(gate(north,upstream,east))\n"
                                  "61 GateCommand(north,upstream,command_close)\n";

} // namespace

// ---------------------------------------------------------------------------
// Initial state

TEST(PlantInit, BarrierOpenGatesClosedLightsRed) {
  const Plant p(full());
  EXPECT_TRUE(p.faults().empty());
  EXPECT_EQ(p.barrier().position, plant_travel);
  int gates = 0;
  for (LockId l : {N, S})
    for (StreamSide s : {U, D})
      for (Orientation o : {E, W}) {
        EXPECT_EQ(p.gate(l, s, o).position, 0);
        EXPECT_EQ(p.paddle(l, s, o).position, 0);
        EXPECT_EQ(p.entering(l, s, o), DoubleLight::single_red);
        EXPECT_EQ(p.leaving(l, s, o), SingleLight::red);
        EXPECT_NE(p.differential(l, s), 0);
        ++gates;
      }
  EXPECT_EQ(gates, 8);
  for (StreamSide s : {U, D})
    for (Orientation o : {E, W})
      EXPECT_EQ(p.barrier_light(s, o), SingleLight::red);
}

TEST(PlantInit, RejectsInvalidProfile) {
  EXPECT_THROW(Plant(full(), FaultProfile{-0.1, 0, 0, 0}), ConfigError);
  EXPECT_THROW(Plant(full(), FaultProfile{0, 1.5, 0, 0}), ConfigError);
  EXPECT_NO_THROW(Plant(full(), FaultProfile{1, 1, 1, 1}));
}

// ---------------------------------------------------------------------------
// Actuators

TEST(PlantApply, EmergencyStopFreezesMovingGate) {
  Plant p(full());
  open_to(p, N, U, E, 4);
  EXPECT_EQ(p.gate(N, U, E).motion, Motion::opening);
  p.apply(Action::gate_actuator(N, U, E, ActuatorCommand::do_emergencyStop));
  EXPECT_EQ(p.gate(N, U, E).motion, Motion::still);
  EXPECT_EQ(p.gate(N, U, E).position, 4);
  ticks(p, 30);
  EXPECT_EQ(p.gate(N, U, E).position, 4);
}

TEST(PlantApply, StuckGreenLightIgnoresRed) {
  Plant p(full());
  p.inject_fault(leaving_target(N, U, E), {FaultKind::stuck_aspect, to_u8(SingleLight::green)});
  p.apply(Action::leaving_light_actuator(N, U, E, SingleLight::red));
  EXPECT_EQ(p.leaving(N, U, E), SingleLight::green);
}

TEST(PlantApply, StalledGateDoesNotMove) {
  Plant p(full());
  p.inject_fault(gate_target(N, U, E), {FaultKind::motor_stall, 0});
  p.apply(Action::gate_actuator(N, U, E, ActuatorCommand::do_open));
  EXPECT_EQ(p.gate(N, U, E).motion, Motion::still);
  ticks(p, 5);
  EXPECT_EQ(p.gate(N, U, E).position, 0);
}

TEST(PlantApply, RejectsNonActuatorsAndUnconfiguredDevices) {
  Plant p(PlantConfig::reduced());
  EXPECT_THROW(p.apply(Action::gate_command(N, U, ConsoleCommand::command_open)), InvalidAction);
  EXPECT_THROW(p.apply(Action::gate_actuator(S, U, E, ActuatorCommand::do_open)), InvalidAction);
  EXPECT_THROW(p.apply(Action::gate_actuator(N, U, W, ActuatorCommand::do_open)), InvalidAction);
}

// ---------------------------------------------------------------------------
// Ticks

TEST(PlantTick, ReachingOpenEmitsSenseOpen) {
  Plant p(full());
  open_to(p, N, U, E, plant_travel - 1);
  EXPECT_EQ(p.gate(N, U, E).position, plant_travel - 1);
  const auto events = p.tick();
  EXPECT_EQ(p.gate(N, U, E).position, plant_travel);
  EXPECT_EQ(p.gate(N, U, E).motion, Motion::still);
  EXPECT_NE(std::find(events.begin(), events.end(), Action::gate_sensor(N, U, E, SensorPosition::sense_open)),
            events.end());
}

TEST(PlantTick, QuiescentPlantIsSilentBetweenHeartbeats) {
  Plant p(full());
  for (int i = 1; i < plant_heartbeat; ++i)
    EXPECT_TRUE(p.tick().empty()) << "tick " << i;
  // 1 barrier + 8 gates + 8 paddles + 4 water sensors
  EXPECT_EQ(p.tick().size(), 21u);
}

TEST(PlantTick, FailedWaterSensorReportsFailure) {
  Plant p(full());
  p.inject_fault({TargetKind::water, N, U}, {FaultKind::sensor_fail, 0});
  const auto events = ticks(p, plant_heartbeat);
  EXPECT_NE(std::find(events.begin(), events.end(), Action::water_sensor(N, U, WaterLevel::fail_water_sensor)),
            events.end());
  EXPECT_EQ(std::find(events.begin(), events.end(), Action::water_sensor(N, U, WaterLevel::unequal)), events.end());
}

TEST(PlantTick, WaterRelaxesThroughOpenPaddle) {
  Plant p(full());
  const int start = p.differential(N, U);
  p.apply(Action::paddle_actuator(N, U, E, ActuatorCommand::do_open));
  std::vector<Action> events;
  for (int i = 0; i < start; ++i) {
    EXPECT_EQ(p.differential(N, U), start - i);
    for (const Action& a : p.tick())
      events.push_back(a);
  }
  EXPECT_EQ(p.differential(N, U), 0);
  EXPECT_EQ(events, (std::vector<Action>{Action::water_sensor(N, U, WaterLevel::equal)}));
  EXPECT_EQ(p.differential(S, U), start); // other lock untouched
}

TEST(PlantTick, TwoOpenDevicesRelaxTwiceAsFast) {
  Plant p(full());
  p.apply(Action::paddle_actuator(N, D, E, ActuatorCommand::do_open));
  p.apply(Action::paddle_actuator(N, D, W, ActuatorCommand::do_open));
  const int start = p.differential(N, D);
  p.tick();
  EXPECT_EQ(p.differential(N, D), start - 2);
}

TEST(PlantTick, StillDevicesKeepTheirPosition) {
  Plant p(full());
  open_to(p, S, D, W, 3);
  p.apply(Action::gate_actuator(S, D, W, ActuatorCommand::do_endStopOpening));
  ticks(p, 40);
  EXPECT_EQ(p.gate(S, D, W).position, 3);
}

// ---------------------------------------------------------------------------
// Reads

TEST(PlantRespond, LightReads) {
  Plant p(full());
  const Action leaving = Action::leaving_light_sensor(N, U, E, SingleLightStatus::show_red);
  EXPECT_EQ(p.respond(leaving).as<SingleLightStatus>(), SingleLightStatus::show_red);

  p.inject_fault({TargetKind::entering_light, N, U, E}, {FaultKind::sensor_fail, 0});
  const Action entering = Action::entering_light_sensor(N, U, E, DoubleLightStatus::show_single_red);
  EXPECT_EQ(p.respond(entering).as<DoubleLightStatus>(), DoubleLightStatus::fail_double);

  p.inject_fault(leaving_target(N, U, E), {FaultKind::stuck_aspect, to_u8(SingleLight::green)});
  p.apply(Action::leaving_light_actuator(N, U, E, SingleLight::red));
  EXPECT_EQ(p.respond(leaving).as<SingleLightStatus>(), SingleLightStatus::show_green);
}

TEST(PlantRespond, OnlyLightSensorsAreRead) {
  Plant p(full());
  EXPECT_THROW(p.respond(Action::gate_sensor(N, U, E, SensorPosition::sense_open)), InvalidAction);
  EXPECT_THROW(p.respond(Action::water_sensor(N, U, WaterLevel::equal)), InvalidAction);
}

// ---------------------------------------------------------------------------
// Faults

TEST(PlantFaults, AddThenRemoveRestores) {
  Plant p(full());
  const Plant before = p;
  p.inject_fault(gate_target(N, U, E), {FaultKind::sensor_fail, 0});
  p.clear_fault(gate_target(N, U, E));
  EXPECT_EQ(p, before);
}

TEST(PlantFaults, DifferentTargetsCoexist) {
  Plant p(full());
  p.inject_fault(gate_target(N, U, E), {FaultKind::sensor_fail, 0});
  p.inject_fault(gate_target(S, D, W), {FaultKind::motor_stall, 0});
  EXPECT_EQ(p.faults().size(), 2u);
}

TEST(PlantFaults, ReAddingIsIdempotentConflictIsRefused) {
  Plant p(full());
  p.inject_fault(gate_target(N, U, E), {FaultKind::sensor_fail, 0});
  const Plant once = p;
  p.inject_fault(gate_target(N, U, E), {FaultKind::sensor_fail, 0});
  EXPECT_EQ(p, once);
  EXPECT_THROW(p.inject_fault(gate_target(N, U, E), {FaultKind::motor_stall, 0}), FaultError);
}

TEST(PlantFaults, KindMustSuitTarget) {
  Plant p(PlantConfig::reduced());
  EXPECT_THROW(p.inject_fault({TargetKind::water, N, U}, {FaultKind::motor_stall, 0}), FaultError);
  EXPECT_THROW(p.inject_fault(gate_target(N, U, E), {FaultKind::stuck_aspect, 0}), FaultError);
  EXPECT_THROW(p.inject_fault(gate_target(S, U, E), {FaultKind::sensor_fail, 0}), FaultError);
  EXPECT_THROW(p.inject_fault(leaving_target(N, U, E), {FaultKind::stuck_aspect, 3}), FaultError);
}

TEST(PlantFaults, TextRoundTrip) {
  for (const char* text : {"gate(north,upstream,east)", "barrier", "water(south,downstream)",
                           "entering_light(north,downstream,west)", "barrier_light(upstream,west)"})
    EXPECT_EQ(to_string(parse_fault_target(text)), text);
  const FaultTarget light = parse_fault_target("entering_light(north,upstream,east)");
  EXPECT_EQ(to_string(parse_fault("stuck_aspect(redgreen)", light.kind), light.kind), "stuck_aspect(redgreen)");
  EXPECT_THROW(parse_fault_target("gate(north,upstream)"), ParseError);
  EXPECT_THROW(parse_fault_target("door(north)"), ParseError);
  EXPECT_THROW(parse_fault("stuck_aspect(purple)", light.kind), ParseError);
}

TEST(PlantFaults, RandomProfileIsSeeded) {
  const FaultProfile profile{0.01, 0.01, 0.01, 0};
  Plant a(full(), profile, 5), b(full(), profile, 5), c(full(), profile, 6);
  ticks(a, 200);
  ticks(b, 200);
  ticks(c, 200);
  EXPECT_FALSE(a.faults().empty());
  EXPECT_EQ(a, b);
  EXPECT_NE(a.faults(), c.faults());
  for (const auto& [t, f] : a.faults()) {
    const bool light = t.kind == TargetKind::entering_light || t.kind == TargetKind::leaving_light ||
                       t.kind == TargetKind::barrier_light;
    if (f.kind == FaultKind::stuck_aspect) {
      EXPECT_TRUE(light) << to_string(t);
    }
    if (f.kind == FaultKind::motor_stall) {
      EXPECT_FALSE(light || t.kind == TargetKind::water) << to_string(t);
    }
  }
}

// ---------------------------------------------------------------------------
// Scenarios and the closed loop

TEST(Scenario, ParsesAndSortsByTick) {
  const auto events = parse_scenario("# comment\n5 GateCommand(north,upstream,command_open)\n"
                                     "2 inject(leaving_light(north,upstream,east),stuck_aspect(green))\n"
                                     "\n2 clear(barrier)\n");
  ASSERT_EQ(events.size(), 3u);
  EXPECT_EQ(to_string(events[0]), "2 inject(leaving_light(north,upstream,east),stuck_aspect(green))");
  EXPECT_EQ(to_string(events[1]), "2 clear(barrier)");
  EXPECT_EQ(to_string(events[2]), "5 GateCommand(north,upstream,command_open)");
}

TEST(Scenario, RejectsBadLines) {
  EXPECT_THROW(parse_scenario("x GateCommand(north,upstream,command_open)\n"), ParseError);
  EXPECT_THROW(parse_scenario("1 GateActuator(north,upstream,east,do_open)\n"), ParseError);
  EXPECT_THROW(parse_scenario("1 inject(barrier)\n"), ParseError);
  EXPECT_THROW(parse_scenario("1\n"), ParseError);
}

TEST(ClosedLoop, ReplayIsByteIdentical) {
  const std::string a = run_scenario(demo_scenario, 200);
  EXPECT_EQ(a, run_scenario(demo_scenario, 200));
  const FaultProfile noisy{0.002, 0.002, 0.002, 0.2};
  const std::string b = run_scenario(demo_scenario, 2000, noisy, 11);
  EXPECT_EQ(b, run_scenario(demo_scenario, 2000, noisy, 11));
  EXPECT_NE(b, run_scenario(demo_scenario, 2000, noisy, 12));
}

TEST(ClosedLoop, StalledGateStaysOpenUntilCleared) {
  ClosedLoop loop(PlantConfig::reduced());
  const auto events = parse_scenario(demo_scenario);
  loop.run(events, 60);
  EXPECT_EQ(loop.plant().gate(N, U, E).position, plant_travel);
  loop.run(events, 20);
  EXPECT_EQ(loop.plant().gate(N, U, E).position, 0);
  EXPECT_EQ(loop.state().params.gate(N, U, E), Position::closed);
}

TEST(ClosedLoop, BurstsAreCompleteAndReplayable) {
  ClosedLoop loop(PlantConfig::reduced(), {}, {}, FaultProfile{0, 0, 0, 0.3}, 4);
  loop.run({}, 500);
  EXPECT_TRUE(loop.state().is_stable());
  ControllerState s = loop.controller().initial_state();
  for (const Action& a : loop.trace())
    s = loop.controller().step(s, a);
  EXPECT_EQ(s, loop.state());
}

TEST(ClosedLoop, RejectsNonInputs) {
  ClosedLoop loop(PlantConfig::reduced());
  EXPECT_THROW(loop.input(Action::barrier_actuator(ActuatorCommand::do_open)), InvalidAction);
  EXPECT_THROW(loop.input(Action::gate_command(S, U, ConsoleCommand::command_open)), InvalidAction);
}

TEST(ClosedLoop, NoOpposingOpeningsWithoutFaults) {
  // Physical oracle: a non-closed gate never coexists with a non-closed gate
  // or paddle on the other side of the same lock.
  for (std::uint64_t seed : {1, 2, 3}) {
    ClosedLoop loop(full(), {}, {}, FaultProfile{0, 0, 0, 0.5}, seed);
    loop.set_record_trace(false);
    for (int t = 0; t < 20'000; ++t) {
      loop.tick();
      const Plant& p = loop.plant();
      for (LockId l : {N, S})
        for (StreamSide s : {U, D}) {
          bool gate_here = false, other_side = false;
          for (Orientation o : {E, W}) {
            gate_here |= p.gate(l, s, o).position > 0;
            other_side |= p.gate(l, opposite(s), o).position > 0 || p.paddle(l, opposite(s), o).position > 0;
          }
          ASSERT_FALSE(gate_here && other_side) << "seed " << seed << " tick " << t;
        }
    }
  }
}

TEST(ClosedLoop, HealthySensorsReportPhysicalState) {
  ClosedLoop loop(full(), {}, {}, FaultProfile{0, 0, 0, 0.5}, 9);
  loop.set_record_trace(false);
  std::size_t checked = 0;
  loop.set_observer([&](std::uint64_t, const Action& a) {
    const Plant& p = loop.plant();
    switch (a.kind) {
    case ActionKind::gate_sensor:
      EXPECT_EQ(a.as<SensorPosition>(), sensed(p.gate(a.lock, a.side, a.orientation)));
      break;
    case ActionKind::paddle_sensor:
      EXPECT_EQ(a.as<SensorPosition>(), sensed(p.paddle(a.lock, a.side, a.orientation)));
      break;
    case ActionKind::barrier_sensor: EXPECT_EQ(a.as<SensorPosition>(), sensed(p.barrier())); break;
    case ActionKind::water_sensor:
      EXPECT_EQ(a.as<WaterLevel>(), p.differential(a.lock, a.side) == 0 ? WaterLevel::equal : WaterLevel::unequal);
      break;
    case ActionKind::leaving_light_sensor:
      EXPECT_EQ(a.as<SingleLightStatus>(), show(p.leaving(a.lock, a.side, a.orientation)));
      break;
    case ActionKind::entering_light_sensor:
      EXPECT_EQ(a.as<DoubleLightStatus>(), show(p.entering(a.lock, a.side, a.orientation)));
      break;
    default: return;
    }
    ++checked;
  });
  for (int t = 0; t < 5000; ++t)
    loop.tick();
  EXPECT_GT(checked, 1000u);
}

TEST(ClosedLoop, FaultFreeRunSatisfiesMonitors) {
  ClosedLoop loop(full(), {}, select_requirements("all"), FaultProfile{0, 0, 0, 0.5}, 21);
  loop.set_record_trace(false);
  loop.run({}, 20'000);
  EXPECT_TRUE(loop.violations().empty());
  EXPECT_TRUE(all_ok(loop.checker().report()));
}

TEST(ClosedLoop, FaultyRunSatisfiesMonitors) {
  ClosedLoop loop(full(), {}, select_requirements("all"), FaultProfile{0.001, 0.001, 0.001, 0.5}, 22);
  loop.set_record_trace(false);
  loop.run({}, 20'000);
  EXPECT_FALSE(loop.plant().faults().empty());
  EXPECT_TRUE(all_ok(loop.checker().report()));
}

TEST(RandomWalk, SameSeedSameWalk) {
  Controller c(full());
  RandomWalk a(c, 7), b(c, 7), d(c, 8);
  bool differs = false;
  for (int i = 0; i < 10'000; ++i) {
    const Action x = a.step();
    ASSERT_EQ(x, b.step());
    differs |= x != d.step();
  }
  EXPECT_TRUE(differs);
  EXPECT_EQ(a.state(), b.state());
}
