#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <json.hpp>

#include "lanekeep/config.hpp"

using namespace lanekeep;
using nlohmann::json;

TEST_CASE("empty config yields the defaults") {
    const ScenarioConfig c = parse_scenario_config(json::object());
    CHECK(c.seed == 1);
    CHECK(c.camera.image_width == 240);
    CHECK(c.dt == doctest::Approx(0.01));
    CHECK(c.perception.lane_width_px ==
          doctest::Approx(c.road.lane_width * c.camera.px_per_m()));
}

TEST_CASE("unknown keys are rejected with a field path") {
    json j = {{"road", {{"lane_width", 0.35}, {"lane_widht", 0.3}}}};
    try {
        parse_scenario_config(j);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("config.road.lane_widht") != std::string::npos);
    }

    json top = {{"roads", json::object()}};
    CHECK_THROWS_AS(parse_scenario_config(top), ConfigError);

    json nested = {{"perception", {{"ribbon", {{"front_radios", 30.0}}}}}};
    try {
        parse_scenario_config(nested);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        CHECK(std::string(e.what()).find("config.perception.ribbon.front_radios") !=
              std::string::npos);
    }
}

TEST_CASE("invariant violations carry the offending path") {
    json j = {{"road", {{"lane_width", -0.1}}}};
    try {
        parse_scenario_config(j);
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("config.road.lane_width") != std::string::npos);
        CHECK(msg.find("> 0") != std::string::npos);
    }

    CHECK_THROWS_AS(parse_scenario_config(json{{"sim", {{"dt", 0.5}}}}), ConfigError);
    CHECK_THROWS_AS(parse_scenario_config(json{{"gains", {{"alpha_clamp_deg", 95.0}}}}),
                    ConfigError);
    CHECK_THROWS_AS(parse_scenario_config(json{{"fusion", {{"imu_rate_hz", 5.0}}}}), ConfigError);
    CHECK_THROWS_AS(parse_scenario_config(json{{"perception", {{"kernel_width", 4}}}}),
                    ConfigError);
    CHECK_THROWS_AS(
        parse_scenario_config(json{{"perception", {{"split", "somewhere"}}}}),
        ConfigError);
    CHECK_THROWS_AS(parse_scenario_config(json{{"noise", {{"salt_prob", 1.5}}}}), ConfigError);
}

TEST_CASE("arc radius must exceed the wheelbase") {
    json j = {{"road",
               {{"segments",
                 json::array({{{"type", "arc"}, {"radius", 0.2}, {"angle_deg", 45.0}}})}}},
              {"sim", {{"wheelbase", 0.3}}}};
    CHECK_THROWS_AS(parse_scenario_config(j), ConfigError);
}

TEST_CASE("road segments parse into the model") {
    json j = {{"road",
               {{"segments", json::array({{{"type", "straight"}, {"length", 2.5}},
                                          {{"type", "arc"}, {"radius", 2.0},
                                           {"angle_deg", -90.0}}})}}}};
    const ScenarioConfig c = parse_scenario_config(j);
    REQUIRE(c.road.segments.size() == 2);
    CHECK(std::get<StraightSegment>(c.road.segments[0]).length == doctest::Approx(2.5));
    const auto& arc = std::get<ArcSegment>(c.road.segments[1]);
    CHECK(arc.radius == doctest::Approx(2.0));
    CHECK(arc.angle == doctest::Approx(-kPi / 2.0));
    CHECK(c.road.total_length() == doctest::Approx(2.5 + 2.0 * kPi / 2.0));
}

TEST_CASE("seed override propagates to the noise model") {
    const ScenarioConfig c = parse_scenario_config(json{{"seed", 77}});
    CHECK(c.seed == 77);
    CHECK(c.noise.rng_seed == 77);
}

TEST_CASE("parking section round-trips values") {
    json j = {{"parking",
               {{"vehicle",
                 {{"wheelbase", 0.32}, {"length", 0.5}, {"width", 0.28}, {"delta_max", 0.4}}},
                {"layout", {{"gap_length_m", 1.4}, {"spike_count", 3}}},
                {"min_depth_mm", 700.0},
                {"max_spike_run", 3}}}};
    const ScenarioConfig c = parse_scenario_config(j);
    CHECK(c.parking.vehicle.wheelbase == doctest::Approx(0.32));
    CHECK(c.parking.vehicle.delta_max == doctest::Approx(0.4));
    CHECK(c.parking.layout.gap_length == doctest::Approx(1.4));
    CHECK(c.parking.layout.spike_count == 3);
    CHECK(c.parking.min_depth_mm == doctest::Approx(700.0));
    CHECK(c.parking.max_spike_run == 3);
    CHECK(c.parking.effective_lateral_gap() ==
          doctest::Approx(c.parking.layout.wall_range_mm / 1000.0 + 0.14));
}
