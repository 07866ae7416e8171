#include <filesystem>
#include <fstream>

#include "doctest.h"
#include "lunatrack/config.hpp"
#include "lunatrack/errors.hpp"
#include "lunatrack/event_log.hpp"
#include "lunatrack/protocol.hpp"

using namespace lunatrack;
using namespace lunatrack::protocol;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "lunatrack_test_log";
    std::filesystem::create_directories(dir);
    return dir / name;
}

std::vector<std::string> keys(const Json& j) {
    std::vector<std::string> out;
    for (const auto& [k, v] : j.items()) out.push_back(k);
    return out;
}

}  // namespace

TEST_CASE("snapshot message") {
    fusion::ZoneSnapshot s;
    s.timestamp_s = 5.05;
    s.states = {false, true, false, false, false};
    s.seqs = {1, 2, 3, 4, 5};
    s.stale = {false, false, false, true, false};
    s.cold_start = false;
    const auto j = snapshot_message(s, s.timestamp_s);
    CHECK(keys(j) == std::vector<std::string>{"kind", "t", "zones", "stale", "seqs", "cold_start"});
    CHECK(j["zones"][1] == true);
    CHECK(j["stale"] == Json::array({4}));
    CHECK(j["seqs"][4] == 5);
    CHECK(encode(j).find('\n') == std::string::npos);
}

TEST_CASE("detection, alert, tracker, status and diagnostic messages") {
    const auto d = detection_message({"u3", 7, 1.5, -42.25, true}, 3);
    CHECK(keys(d) == std::vector<std::string>{"kind", "uuid", "t", "amplitude_db", "detect", "seq", "zone"});
    const auto back = detection_from_json(d);
    CHECK(back.uuid == "u3");
    CHECK(back.seq == 7);
    CHECK(back.amplitude_db == -42.25);
    CHECK(back.detect);
    CHECK_THROWS_AS(detection_from_json(Json{{"uuid", "x"}}), ParseError);

    CHECK(encode(alert_message(3, 25.0)) == R"({"kind":"alert","zone":3,"t":25.0})");

    const auto h = tracker_message({tracker::EventKind::ZoneHandoff, 2, 20.0, 1});
    CHECK(h["from"] == 1);
    CHECK(h["event"] == tracker::to_string(tracker::EventKind::ZoneHandoff));
    CHECK_FALSE(tracker_message({tracker::EventKind::TrackStarted, 2, 1.0, 0}).contains("from"));

    const auto st = status_message({1.0, 10, 2, 1, {3}, true});
    CHECK(keys(st) == std::vector<std::string>{"kind", "t", "drops", "enqueued", "gaps", "stale", "log_ok"});
    CHECK(st["drops"] == 2);

    const auto dg = diagnostic_message(2.0, "fusion", "seq_gap", "u1 3->5");
    CHECK(keys(dg) == std::vector<std::string>{"kind", "t", "source", "type", "detail"});
}

TEST_CASE("config message") {
    PlatformConfig cfg;
    const auto j = config_message(cfg, true);
    REQUIRE(j["zones"].size() == 5);
    CHECK(j["zones"][0]["timeout"] == 20.0);
    CHECK(j["zones"][2]["timeout"] == 10.0);
    CHECK(j["zones"][0]["boresight"] == -56.0);
    CHECK(j["sector_width"] == 28.0);
    CHECK(j["frame_period"] == 0.05);
    CHECK(j["lens_on"] == true);
}

TEST_CASE("inbound steering") {
    auto ok = parse_inbound(R"({"kind":"subject","x":0.5,"y":1.2})");
    REQUIRE(std::holds_alternative<Steering>(ok));
    CHECK(std::get<Steering>(ok).x_m == 0.5);
    CHECK_FALSE(std::get<Steering>(ok).absent);

    auto gone = parse_inbound(R"({"kind":"subject","absent":true})");
    REQUIRE(std::holds_alternative<Steering>(gone));
    CHECK(std::get<Steering>(gone).absent);

    for (const char* bad : {"not json", "[1]", R"({"x":1})", R"({"kind":"other"})", R"({"kind":"subject","x":1})",
                            R"({"kind":"subject","x":"a","y":1})", R"({"kind":"subject","absent":1})"}) {
        CAPTURE(bad);
        const auto r = parse_inbound(bad);
        REQUIRE(std::holds_alternative<InboundError>(r));
        CHECK_FALSE(std::get<InboundError>(r).reason.empty());
    }
}

TEST_CASE("log records") {
    const auto msg = alert_message(1, 26.0);
    const auto r = eventlog::from_message(msg, 26.0, "alert");
    CHECK(r.payload == Json{{"zone", 1}});
    CHECK(eventlog::encode(r) == R"({"t":26.0,"kind":"alert","payload":{"zone":1}})");
    const auto back = eventlog::decode(eventlog::encode(r));
    CHECK(back.t == 26.0);
    CHECK(back.kind == "alert");
    CHECK(back.payload == r.payload);

    CHECK_THROWS_AS(eventlog::decode("{"), ParseError);
    CHECK_THROWS_AS(eventlog::decode(R"({"kind":"alert"})"), ParseError);
    CHECK_THROWS_AS(eventlog::decode(R"({"t":1,"kind":"x","payload":3})"), ParseError);
}

TEST_CASE("event log file") {
    const auto path = temp_file("log.jsonl");
    {
        eventlog::EventLog log(path, std::chrono::milliseconds(0));
        CHECK(log.append({0.0, "snapshot", Json{{"zones", Json::array()}}}));
        CHECK(log.append({0.0, "detection", Json::object()}));
        CHECK(log.append({0.05, "alert", Json{{"zone", 2}}}));
        CHECK_THROWS_AS(log.append({0.01, "alert", Json::object()}), ContractError);
        CHECK(log.written() == 3);
    }
    const auto records = eventlog::read_log(path);
    REQUIRE(records.size() == 3);
    CHECK(records[2].payload["zone"] == 2);
    for (std::size_t i = 1; i < records.size(); ++i) CHECK(records[i].t >= records[i - 1].t);

    std::ofstream(path, std::ios::app) << "garbage\n";
    CHECK_THROWS_AS(eventlog::read_log(path), ParseError);
    CHECK_THROWS_AS(eventlog::read_log(temp_file("absent.jsonl")), FileError);
    CHECK_THROWS_AS(eventlog::EventLog(temp_file("no/such/dir/log.jsonl")), FileError);
}

TEST_CASE("write failure marks the log unhealthy") {
    if (!std::filesystem::exists("/dev/full")) return;
    eventlog::EventLog log("/dev/full", std::chrono::milliseconds(0));
    bool ok = true;
    for (int i = 0; i < 10 && ok; ++i) ok = log.append({i * 0.05, "snapshot", Json::object()});
    CHECK_FALSE(ok);
    CHECK_FALSE(log.healthy());
    const auto failure = log.take_failure();
    REQUIRE(failure.has_value());
    CHECK(failure->find("/dev/full") != std::string::npos);
    CHECK_FALSE(log.take_failure().has_value());
    CHECK_FALSE(log.append({1.0, "snapshot", Json::object()}));
}
