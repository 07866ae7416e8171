#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>

#include "doctest.h"
#include "lunatrack/errors.hpp"
#include "lunatrack/pipeline.hpp"
#include "lunatrack/protocol.hpp"

using namespace lunatrack;
using tracker::EventKind;

namespace {

std::filesystem::path temp_file(const std::string& name) {
    const auto dir = std::filesystem::temp_directory_path() / "lunatrack_test_pipeline";
    std::filesystem::create_directories(dir);
    return dir / name;
}

Scenario scenario(const std::string& name) {
    return load_scenario(std::filesystem::path(LUNATRACK_SOURCE_DIR) / "scenarios" / (name + ".json"));
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p);
    std::stringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct RecordingPublisher : Publisher {
    std::mutex mutex;
    std::vector<std::string> lines;
    std::string hello;

    void publish(const std::string& line) override {
        std::lock_guard lock(mutex);
        lines.push_back(line);
    }
    void set_hello(const std::string& line) override { hello = line; }

    std::size_t count(const std::string& kind) {
        std::lock_guard lock(mutex);
        std::size_t n = 0;
        for (const auto& l : lines) n += protocol::Json::parse(l)["kind"] == kind;
        return n;
    }
};

const tracker::TrackerEvent& first(const PipelineResult& r, EventKind k) {
    return *std::find_if(r.events.begin(), r.events.end(), [&](const auto& e) { return e.kind == k; });
}

}  // namespace

TEST_CASE("fall in zone 3 raises one alert ten seconds after loss") {
    Pipeline p(PlatformConfig{}, scenario("fall_zone3"));
    const auto r = p.run_virtual();
    REQUIRE(r.count(EventKind::AlertRaised) == 1);
    const auto& alert = first(r, EventKind::AlertRaised);
    CHECK(alert.zone == 3);
    const auto& loss = first(r, EventKind::FallbackEntered);
    CHECK(loss.timestamp_s >= 15.0 - 1e-9);
    CHECK(loss.timestamp_s <= 15.1);
    CHECK(alert.timestamp_s - loss.timestamp_s >= 10.0 - 1e-9);
    CHECK(alert.timestamp_s - loss.timestamp_s <= 10.05 + 1e-9);
    CHECK(r.ticks == 600);
}

TEST_CASE("edge zones use the long timeout") {
    for (const auto* name : {"fall_zone1", "fall_zone5"}) {
        CAPTURE(name);
        Pipeline p(PlatformConfig{}, scenario(name));
        const auto r = p.run_virtual();
        REQUIRE(r.count(EventKind::AlertRaised) == 1);
        const double dt = first(r, EventKind::AlertRaised).timestamp_s - first(r, EventKind::FallbackEntered).timestamp_s;
        CHECK(dt >= 20.0 - 1e-9);
        CHECK(dt <= 20.05 + 1e-9);
    }
}

TEST_CASE("empty room stays quiet") {
    Pipeline p(PlatformConfig{}, scenario("empty_room"));
    const auto r = p.run_virtual();
    CHECK(r.events.empty());
    CHECK(r.stats.snapshots == r.ticks);
}

TEST_CASE("steering moves the subject") {
    Pipeline p(PlatformConfig{}, scenario("empty_room"));
    bool steered = false;
    std::vector<int> seen;
    p.set_observer([&](const fusion::TickOutput& out, const std::vector<tracker::TrackerEvent>& events) {
        if (out.tick == 150 && !steered) {
            p.handle_inbound(R"({"kind":"subject","x":0.0,"y":1.0})");
            steered = true;
        }
        for (const auto& e : events) seen.push_back(e.zone);
    });
    const auto r = p.run_virtual();
    REQUIRE(r.count(EventKind::TrackStarted) >= 1);
    CHECK(first(r, EventKind::TrackStarted).zone == 3);
    CHECK(first(r, EventKind::TrackStarted).timestamp_s > 150 * 0.05);
    CHECK(r.count(EventKind::AlertRaised) == 0);
}

TEST_CASE("malformed inbound lines become diagnostics") {
    PipelineOptions opts;
    opts.duration_s = 1.0;
    Pipeline p(PlatformConfig{}, scenario("empty_room"), opts);
    p.handle_inbound("{nope");
    p.handle_inbound(R"({"kind":"subject","x":1})");
    const auto r = p.run_virtual();
    const auto n = std::count_if(r.diagnostics.begin(), r.diagnostics.end(),
                                 [](const auto& d) { return d.kind == "malformed_inbound"; });
    CHECK(n == 2);
    CHECK(r.ticks == 20);
}

TEST_CASE("event log contents") {
    PipelineOptions opts;
    opts.duration_s = 60.0;
    opts.log_path = temp_file("sixty.jsonl");
    Pipeline p(PlatformConfig{}, scenario("handoff"), opts);
    p.run_virtual();
    const auto records = eventlog::read_log(*opts.log_path);
    std::map<std::string, std::size_t> kinds;
    for (std::size_t i = 0; i < records.size(); ++i) {
        ++kinds[records[i].kind];
        if (i > 0) CHECK(records[i].t >= records[i - 1].t);
    }
    CHECK(kinds["snapshot"] >= 1200);
    CHECK(kinds["detection"] == (1200 - 100) * 5);
    CHECK(kinds["tracker"] >= 3);
    for (const auto& [k, n] : kinds) {
        CAPTURE(k);
        CHECK((k == "snapshot" || k == "detection" || k == "tracker" || k == "alert" || k == "diagnostics"));
    }
}

TEST_CASE("zero duration writes an empty log") {
    PipelineOptions opts;
    opts.duration_s = 0.0;
    opts.log_path = temp_file("empty.jsonl");
    Pipeline p(PlatformConfig{}, scenario("fall_zone3"), opts);
    const auto r = p.run_virtual();
    CHECK(r.ticks == 0);
    CHECK(std::filesystem::exists(*opts.log_path));
    CHECK(std::filesystem::file_size(*opts.log_path) == 0);
}

TEST_CASE("a failing log sink does not stop processing") {
    if (!std::filesystem::exists("/dev/full")) return;
    PipelineOptions opts;
    opts.log_path = "/dev/full";
    opts.log_flush_interval = std::chrono::milliseconds(0);
    Pipeline p(PlatformConfig{}, scenario("fall_zone3"), opts);
    const auto r = p.run_virtual();
    CHECK_FALSE(r.log_ok);
    CHECK(r.ticks == 600);
    CHECK(r.count(EventKind::AlertRaised) == 1);
    const auto n = std::count_if(r.diagnostics.begin(), r.diagnostics.end(),
                                 [](const auto& d) { return d.kind == "persistent_sink_down"; });
    CHECK(n == 1);
}

TEST_CASE("replay reproduces tracker output") {
    for (const auto* name : {"fall_zone3", "handoff", "walk_1_to_5"}) {
        CAPTURE(name);
        PipelineOptions opts;
        opts.log_path = temp_file(std::string(name) + ".jsonl");
        Pipeline p(PlatformConfig{}, scenario(name), opts);
        const auto r = p.run_virtual();
        const auto rep = replay(eventlog::read_log(*opts.log_path));
        CHECK(rep.identical());
        CHECK(rep.events == r.events);
        CHECK(rep.snapshots == r.ticks);
        CHECK_FALSE(rep.logged.empty());
    }
}

TEST_CASE("handoff scenario hands over to zone 2") {
    Pipeline p(PlatformConfig{}, scenario("handoff"));
    const auto r = p.run_virtual();
    CHECK(r.count(EventKind::AlertRaised) == 0);
    REQUIRE(r.count(EventKind::ZoneHandoff) == 1);
    const auto& h = first(r, EventKind::ZoneHandoff);
    CHECK(h.zone == 2);
    CHECK(h.from_zone == 1);
}

TEST_CASE("live run matches the virtual run") {
    PipelineOptions vopts;
    vopts.log_path = temp_file("virtual.jsonl");
    Pipeline v(PlatformConfig{}, scenario("fall_zone3"), vopts);
    v.run_virtual();

    PipelineOptions lopts;
    lopts.log_path = temp_file("live.jsonl");
    lopts.speed = 10.0;
    Pipeline l(PlatformConfig{}, scenario("fall_zone3"), lopts);
    RecordingPublisher pub;
    const auto r = l.run_live(&pub);
    CHECK(r.ticks == 600);
    CHECK(slurp(*lopts.log_path) == slurp(*vopts.log_path));

    CHECK(protocol::Json::parse(pub.hello)["kind"] == "config");
    CHECK(pub.count("snapshot") == 600);
    CHECK(pub.count("status") == 30);
    CHECK(pub.count("alert") == 1);
}

TEST_CASE("pipeline option contracts") {
    PipelineOptions opts;
    opts.speed = 0.0;
    CHECK_THROWS_AS(Pipeline(PlatformConfig{}, scenario("empty_room"), opts), ConfigError);
    opts.speed = 1.0;
    opts.duration_s = -1.0;
    CHECK_THROWS_AS(Pipeline(PlatformConfig{}, scenario("empty_room"), opts), ConfigError);
    PipelineOptions bad_log;
    bad_log.log_path = temp_file("missing/dir/x.jsonl");
    Pipeline p(PlatformConfig{}, scenario("empty_room"), bad_log);
    CHECK_THROWS_AS(p.run_virtual(), FileError);
}
