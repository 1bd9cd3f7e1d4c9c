#include <set>

#include <gtest/gtest.h>

#include "marijke/domain.hpp"

using namespace marijke;

namespace {

// Independent count: product of the argument domains as listed by hand.
std::uint64_t expected_instances(ActionKind k, std::uint64_t locks, std::uint64_t orients) {
  switch (k) {
  case ActionKind::skip: return 1;
  case ActionKind::gate_command:
  case ActionKind::paddle_command: return locks * 2 * 3;
  case ActionKind::emergency_lock_command: return locks * 2;
  case ActionKind::barrier_command: return 3;
  case ActionKind::emergency_barrier_command: return 2;
  case ActionKind::entering_light_command: return locks * 2 * 4;
  case ActionKind::leaving_light_command: return locks * 2 * 2;
  case ActionKind::barrier_light_command: return 2 * 2;
  case ActionKind::gate_actuator:
  case ActionKind::paddle_actuator: return locks * 2 * orients * 5;
  case ActionKind::barrier_actuator: return 5;
  case ActionKind::entering_light_actuator: return locks * 2 * orients * 4;
  case ActionKind::leaving_light_actuator: return locks * 2 * orients * 2;
  case ActionKind::barrier_light_actuator: return 2 * 2 * 2;
  case ActionKind::gate_sensor:
  case ActionKind::paddle_sensor: return locks * 2 * orients * 4;
  case ActionKind::barrier_sensor: return 4;
  case ActionKind::water_sensor: return locks * 2 * 3;
  case ActionKind::entering_light_sensor: return locks * 2 * orients * 5;
  case ActionKind::leaving_light_sensor: return locks * 2 * orients * 3;
  case ActionKind::barrier_light_sensor: return 2 * 2 * 3;
  }
  return 0;
}

} // namespace

TEST(Domain, OppositeIsInvolution) {
  for (StreamSide s : {StreamSide::upstream, StreamSide::downstream}) {
    EXPECT_NE(opposite(s), s);
    EXPECT_EQ(opposite(opposite(s)), s);
  }
}

TEST(Domain, EnumerationSizes) {
  EXPECT_EQ(value_count(ValueType::single_light_status), 3u);
  EXPECT_EQ(value_count(ValueType::double_light_status), 5u);
  EXPECT_EQ(value_count(ValueType::sensor_position), 4u);
  EXPECT_EQ(value_count(ValueType::water_level), 3u);
  EXPECT_EQ(value_count(ValueType::actuator_command), 5u);
}

TEST(Domain, ShowIsInjective) {
  std::set<DoubleLightStatus> d;
  for (auto l : {DoubleLight::single_red, DoubleLight::single_green, DoubleLight::redred, DoubleLight::redgreen})
    d.insert(show(l));
  EXPECT_EQ(d.size(), 4u);
  EXPECT_FALSE(d.count(DoubleLightStatus::fail_double));
  EXPECT_NE(show(SingleLight::red), show(SingleLight::green));
}

TEST(Domain, InstanceCounts) {
  EXPECT_EQ(instances(PlantConfig::full(), ActionKind::gate_actuator), 40u);
  EXPECT_EQ(instances(PlantConfig::full(), ActionKind::barrier_sensor), 4u);
  EXPECT_EQ(instances(PlantConfig::reduced(), ActionKind::gate_sensor), 8u);
  for (std::size_t k = 0; k < action_kind_count; ++k) {
    const auto kind = static_cast<ActionKind>(k);
    EXPECT_EQ(instances(PlantConfig::full(), kind), expected_instances(kind, 2, 2)) << info(kind).name;
    EXPECT_EQ(instances(PlantConfig::reduced(), kind), expected_instances(kind, 1, 1)) << info(kind).name;
  }
}

TEST(Domain, NoBarrierMeansNoBarrierActions) {
  PlantConfig c = PlantConfig::reduced();
  c.include_barrier = false;
  EXPECT_EQ(instances(c, ActionKind::barrier_actuator), 0u);
  EXPECT_EQ(instances(c, ActionKind::barrier_light_sensor), 0u);
  EXPECT_FALSE(well_typed(Action::barrier_command(ConsoleCommand::command_close), c));
}

TEST(Domain, ConfigValidation) {
  EXPECT_NO_THROW(PlantConfig::full().validate());
  PlantConfig c = PlantConfig::reduced();
  c.stream_sides = {StreamSide::upstream};
  EXPECT_THROW(c.validate(), ConfigError);
  c = PlantConfig::reduced();
  c.locks.clear();
  EXPECT_THROW(c.validate(), ConfigError);
  c = PlantConfig::full();
  c.orientations = {Orientation::west, Orientation::east};
  EXPECT_THROW(c.validate(), ConfigError);
  EXPECT_THROW(config_by_name("tiny"), ConfigError);
}

TEST(Domain, EncodingIsDenseBijection) {
  for (const PlantConfig& c : {PlantConfig::full(), PlantConfig::reduced()}) {
    Alphabet alpha(c);
    std::uint64_t total = 0;
    for (std::size_t k = 0; k < action_kind_count; ++k)
      total += instances(c, static_cast<ActionKind>(k));
    ASSERT_EQ(alpha.size(), total);
    std::set<std::uint32_t> codes;
    for (std::uint32_t i = 0; i < alpha.size(); ++i) {
      const Action& a = alpha.decode(i);
      EXPECT_TRUE(well_typed(a, c));
      EXPECT_EQ(alpha.encode(a), i);
      codes.insert(alpha.encode(a));
    }
    EXPECT_EQ(codes.size(), alpha.size());
    EXPECT_EQ(alpha.encode(Action::skip()), Alphabet::skip_code);
    EXPECT_THROW(alpha.decode(static_cast<std::uint32_t>(alpha.size())), InvalidAction);
  }
}

TEST(Domain, RoundTripGateCommand) {
  Alphabet alpha(PlantConfig::full());
  const Action a = Action::gate_command(LockId::north, StreamSide::upstream, ConsoleCommand::command_open);
  EXPECT_EQ(alpha.decode(alpha.encode(a)), a);
}

TEST(Domain, EncodeRejectsUnconfiguredLock) {
  Alphabet alpha(PlantConfig::reduced());
  EXPECT_THROW(alpha.encode(Action::water_sensor(LockId::south, StreamSide::upstream, WaterLevel::equal)),
               InvalidAction);
}

TEST(Domain, TextIsBitExact) {
  EXPECT_EQ(to_string(Action::gate_actuator(LockId::north, StreamSide::upstream, Orientation::east,
                                            ActuatorCommand::do_open)),
            "GateActuator(north,upstream,east,do_open)");
  EXPECT_EQ(to_string(Action::leaving_light_sensor(LockId::south, StreamSide::downstream, Orientation::west,
                                                   SingleLightStatus::show_green)),
            "LeavingTrafficLightSensor(south,downstream,west,show(green))");
  EXPECT_EQ(to_string(Action::barrier_command(ConsoleCommand::command_stop)), "BarrierCommand(command_stop)");
  EXPECT_EQ(to_string(Action::skip()), "skip");
}

TEST(Domain, ParseRoundTripsWholeAlphabet) {
  Alphabet alpha(PlantConfig::full());
  for (const Action& a : alpha.actions())
    EXPECT_EQ(parse_action(to_string(a)), a) << to_string(a);
}

TEST(Domain, ParseRejectsGarbage) {
  EXPECT_THROW(parse_action("GateActuator(north,upstream,east)"), ParseError);
  EXPECT_THROW(parse_action("GateActuator(north,upstream,east,do_fly)"), ParseError);
  EXPECT_THROW(parse_action("Teleport(north)"), ParseError);
  EXPECT_THROW(parse_action("GateCommand north"), ParseError);
  EXPECT_THROW(parse_action(""), ParseError);
}

TEST(Domain, ClassificationIsExclusive) {
  Alphabet alpha(PlantConfig::full());
  for (const Action& a : alpha.actions()) {
    EXPECT_NE(a.is_input(), a.is_output());
    if (a.is_read()) {
      EXPECT_FALSE(a.is_stable_input());
    }
  }
  EXPECT_TRUE(Action::skip().is_stable_input());
}
