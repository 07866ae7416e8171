#include <filesystem>
#include <fstream>
#include <set>

#include "doctest.h"
#include "lunatrack/config.hpp"
#include "lunatrack/errors.hpp"
#include "lunatrack/scenario.hpp"

using namespace lunatrack;
using nlohmann::json;

TEST_CASE("defaults validate") {
    PlatformConfig cfg;
    CHECK_NOTHROW(cfg.validate());
    const auto map = cfg.zone_map();
    CHECK(map.size() == 5);
    std::set<int> zones;
    for (const auto& [uuid, zone] : map) zones.insert(zone);
    CHECK(zones == std::set<int>{1, 2, 3, 4, 5});
}

TEST_CASE("platform config round trip") {
    PlatformConfig cfg;
    cfg.lens.voxel_mm = 1.0;
    cfg.gain_model.lens_on = false;
    cfg.fusion.offset_db = 1.25;
    cfg.tracker.loss_debounce_frames = 2;
    cfg.service.listen = "0.0.0.0:9000";
    const json j = to_json(cfg);
    const auto back = parse_platform_config(j);
    CHECK(to_json(back) == j);
    CHECK(back.lens.voxel_mm == 1.0);
    CHECK(back.fusion.offset_db == 1.25);
    CHECK(back.tracker.loss_debounce_frames == 2);
}

TEST_CASE("partial config keeps defaults") {
    const auto cfg = parse_platform_config(json::parse(R"({"lens":{"R":40}})"));
    CHECK(cfg.lens.radius_mm == 40.0);
    CHECK(cfg.lens.eps_min == 1.38);
    CHECK(cfg.radars.size() == 5);
}

TEST_CASE("zone mapping must be a bijection") {
    PlatformConfig cfg;
    cfg.radars[1].zone = cfg.radars[0].zone;
    CHECK_THROWS_AS(cfg.validate(), ConfigError);

    PlatformConfig dup;
    dup.radars[2].uuid = dup.radars[3].uuid;
    CHECK_THROWS_AS(dup.validate(), ConfigError);

    PlatformConfig four;
    four.radars.pop_back();
    CHECK_THROWS_AS(four.validate(), ConfigError);

    PlatformConfig out;
    out.radars[4].zone = 6;
    CHECK_THROWS_AS(out.validate(), ConfigError);

    json j = to_json(cfg);
    CHECK_THROWS_AS(parse_platform_config(j), ParseError);
}

TEST_CASE("type errors are parse errors") {
    CHECK_THROWS_AS(parse_platform_config(json::parse(R"({"lens":{"R":"big"}})")), ParseError);
    CHECK_THROWS_AS(parse_platform_config(json::parse(R"({"radars":{}})")), ParseError);
    CHECK_THROWS_AS(parse_platform_config(json::parse("[1,2]")), ParseError);
    CHECK_THROWS_AS(parse_platform_config(json::parse(R"({"fusion":{"stale_frames":0}})")), ParseError);
}

TEST_CASE("config files") {
    const auto dir = std::filesystem::temp_directory_path() / "lunatrack_test_config";
    std::filesystem::create_directories(dir);
    const auto good = dir / "good.json";
    std::ofstream(good) << to_json(PlatformConfig{}).dump(2);
    CHECK_NOTHROW(load_platform_config(good));

    const auto bad = dir / "bad.json";
    std::ofstream(bad) << "{ \"lens\": ";
    CHECK_THROWS_AS(load_platform_config(bad), ParseError);
    CHECK_THROWS_AS(load_platform_config(dir / "missing.json"), FileError);
    std::filesystem::remove_all(dir);
}

TEST_CASE("addresses") {
    CHECK(split_address("127.0.0.1:7070") == std::pair<std::string, unsigned short>{"127.0.0.1", 7070});
    CHECK(split_address(":80").first == "0.0.0.0");
    CHECK(split_address("localhost:0").second == 0);
    CHECK_THROWS_AS(split_address("localhost"), ConfigError);
    CHECK_THROWS_AS(split_address("host:"), ConfigError);
    CHECK_THROWS_AS(split_address("host:70000"), ConfigError);
    CHECK_THROWS_AS(split_address("host:12ab"), ConfigError);
}

TEST_CASE("scenario parsing") {
    const auto s = parse_scenario(json::parse(R"({
        "seed": 3, "lens_on": false, "noise_floor": null,
        "waypoints": [{"t": 0, "absent": true}, {"t": 1, "x": 0.5, "y": 1.0}],
        "duration": 12})"));
    CHECK(s.seed == 3);
    CHECK_FALSE(s.lens_on);
    CHECK_FALSE(s.scene.noise_floor_db.has_value());
    REQUIRE(s.waypoints.size() == 2);
    CHECK(s.waypoints[0].absent);
    CHECK(s.waypoints[1].x_m == 0.5);
    CHECK(s.effective_duration() == 12.0);
    CHECK(parse_scenario(to_json(s)).waypoints.size() == 2);

    CHECK_THROWS_AS(parse_scenario(json::parse(R"({"waypoints":[{"t":0,"x":1}]})")), ParseError);
    CHECK_THROWS_AS(parse_scenario(json::parse(R"({"waypoints":[{"t":2,"absent":true},{"t":1,"absent":true}]})")),
                    ParseError);
    CHECK_THROWS_AS(parse_scenario(json::parse(R"({"duration":-1})")), ParseError);
    CHECK_THROWS_AS(parse_scenario(json::parse(R"({"torso_width":"wide"})")), ParseError);
}

TEST_CASE("bundled scenarios parse") {
    const std::filesystem::path dir = LUNATRACK_SOURCE_DIR "/scenarios";
    int n = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        if (e.path().extension() != ".json") continue;
        CAPTURE(e.path().string());
        CHECK_NOTHROW(load_scenario(e.path()));
        ++n;
    }
    CHECK(n >= 6);
}
