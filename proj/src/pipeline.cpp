#include "lunatrack/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "lunatrack/errors.hpp"
#include "lunatrack/protocol.hpp"

namespace lunatrack {

namespace {

fusion::RuntimeSettings runtime_settings(const FusionSettings& f) {
    return {f.calibration_n, f.offset_db, f.queue_capacity, f.stale_frames};
}

}  // namespace

std::size_t PipelineResult::count(tracker::EventKind kind) const {
    return static_cast<std::size_t>(
        std::count_if(events.begin(), events.end(), [&](const auto& e) { return e.kind == kind; }));
}

std::vector<eventlog::LogRecord> tracker_records(const std::vector<tracker::TrackerEvent>& events) {
    std::vector<eventlog::LogRecord> out;
    for (const auto& ev : events) {
        out.push_back(eventlog::from_message(protocol::tracker_message(ev), ev.timestamp_s, "tracker"));
        if (ev.kind == tracker::EventKind::AlertRaised) {
            out.push_back(eventlog::from_message(protocol::alert_message(ev.zone, ev.timestamp_s), ev.timestamp_s,
                                                 "alert"));
        }
    }
    return out;
}

struct Pipeline::RunState {
    tracker::FallTracker tracker;
    std::map<std::string, int> zones;
    std::unique_ptr<eventlog::EventLog> log;
    Publisher* publisher{nullptr};
    PipelineResult result;
    bool log_failure_reported{false};

    explicit RunState(int debounce) : tracker(debounce) {}

    void record(const eventlog::LogRecord& r) {
        if (log) log->append(r);
    }
    void send(const protocol::Json& j) {
        if (publisher) publisher->publish(protocol::encode(j));
    }
    void diagnostic(double t, const std::string& source, const std::string& type, const std::string& detail) {
        result.diagnostics.push_back({t, type, source, detail});
        const auto msg = protocol::diagnostic_message(t, source, type, detail);
        record(eventlog::from_message(msg, t, "diagnostics"));
        send(msg);
    }
};

Pipeline::Pipeline(PlatformConfig config, Scenario scenario, PipelineOptions options)
    : config_(std::move(config)), scenario_(std::move(scenario)), options_(std::move(options)) {
    if (!scenario_.radars.empty()) config_.radars = scenario_.radars;
    config_.validate();
    if (!(options_.speed > 0.0)) throw ConfigError("pipeline: speed must be positive");
    if (options_.duration_s && !(*options_.duration_s >= 0.0)) throw ConfigError("pipeline: duration must be >= 0");
    if (options_.status_every < 1) throw ConfigError("pipeline: status interval must be positive");
    auto model = config_.gain_model;
    model.lens_on = scenario_.lens_on;
    simulator_ = std::make_unique<ScenarioSimulator>(scenario_, config_.radars, model);
}

Pipeline::~Pipeline() = default;

std::uint64_t Pipeline::tick_count() const {
    if (options_.duration_s) {
        return static_cast<std::uint64_t>(std::llround(*options_.duration_s / simulator_->frame_period()));
    }
    return simulator_->tick_count();
}

std::string Pipeline::hello_line() const {
    return protocol::encode(protocol::config_message(config_, scenario_.lens_on));
}

void Pipeline::steer(const Steering& s) { simulator_->steer(s); }

void Pipeline::handle_inbound(const std::string& line) {
    auto parsed = protocol::parse_inbound(line);
    if (auto* s = std::get_if<Steering>(&parsed)) {
        steer(*s);
        return;
    }
    std::lock_guard lock(inbound_mutex_);
    inbound_errors_.push_back(std::get<protocol::InboundError>(parsed).reason);
}

void Pipeline::on_tick(RunState& rs, const fusion::TickOutput& out) {
    const double t = out.time_s;
    for (const auto& m : out.messages) {
        auto it = rs.zones.find(m.uuid);
        const int zone = it == rs.zones.end() ? 0 : it->second;
        const auto msg = protocol::detection_message(m, zone);
        rs.record(eventlog::from_message(msg, t, "detection"));
        rs.send(msg);
        if (m.detect) ++rs.result.detected_messages;
    }
    const auto snap = protocol::snapshot_message(out.snapshot, t);
    rs.record(eventlog::from_message(snap, t, "snapshot"));
    rs.send(snap);

    for (const auto& d : out.diagnostics) rs.diagnostic(t, "fusion", d.kind, d.uuid + ": " + d.detail);
    {
        std::vector<std::string> errors;
        {
            std::lock_guard lock(inbound_mutex_);
            errors.swap(inbound_errors_);
        }
        for (const auto& e : errors) rs.diagnostic(t, "service", "malformed_inbound", e);
    }

    auto events = rs.tracker.update(out.snapshot.states, t);
    for (const auto& r : tracker_records(events)) rs.record(r);
    for (const auto& ev : events) {
        rs.send(protocol::tracker_message(ev));
        if (ev.kind == tracker::EventKind::AlertRaised) rs.send(protocol::alert_message(ev.zone, t));
    }
    for (const auto& d : rs.tracker.take_diagnostics()) rs.diagnostic(t, "tracker", d.kind, d.detail);

    if (rs.log && !rs.log->healthy() && !rs.log_failure_reported) {
        rs.log_failure_reported = true;
        rs.diagnostic(t, "event_log", "persistent_sink_down", rs.log->take_failure().value_or("write failed"));
    }

    if (out.tick % static_cast<std::uint64_t>(options_.status_every) == 0) {
        protocol::StatusCounters c;
        c.t = t;
        c.enqueued = out.enqueued;
        c.drops = out.dropped;
        c.stale = protocol::stale_zones(out.snapshot);
        c.log_ok = !rs.log || rs.log->healthy();
        rs.send(protocol::status_message(c));
    }

    rs.result.events.insert(rs.result.events.end(), events.begin(), events.end());
    ++rs.result.ticks;
    if (observer_) observer_(out, events);
}

PipelineResult Pipeline::run(bool live, Publisher* publisher, const std::atomic<bool>* stop) {
    RunState rs(config_.tracker.loss_debounce_frames);
    rs.publisher = publisher;
    rs.zones = config_.zone_map();
    if (options_.log_path) rs.log = std::make_unique<eventlog::EventLog>(*options_.log_path, options_.log_flush_interval);
    if (publisher) publisher->set_hello(hello_line());

    fusion::Runtime runtime(config_.radars, runtime_settings(config_.fusion));
    const auto sink = [&](const fusion::TickOutput& out) { on_tick(rs, out); };
    rs.result.stats = live ? runtime.run_threaded(*simulator_, tick_count(), sink, options_.speed, stop)
                           : runtime.run_virtual(*simulator_, tick_count(), sink);

    if (rs.log) {
        rs.log->close();
        if (!rs.log->healthy()) {
            rs.result.log_ok = false;
            if (!rs.log_failure_reported) {
                const double t = rs.result.ticks == 0 ? 0.0 : tick_time(rs.result.ticks - 1, simulator_->frame_period());
                rs.log_failure_reported = true;
                rs.diagnostic(t, "event_log", "persistent_sink_down", rs.log->take_failure().value_or("write failed"));
            }
        }
    }
    return std::move(rs.result);
}

PipelineResult Pipeline::run_virtual() { return run(false, nullptr, nullptr); }

PipelineResult Pipeline::run_live(Publisher* publisher, const std::atomic<bool>* stop) {
    return run(true, publisher, stop);
}

ReplayResult replay(const std::vector<eventlog::LogRecord>& records, const TrackerSettings& settings) {
    ReplayResult out;
    std::map<std::string, int> zones;
    for (const auto& r : records) {
        if (r.kind != "detection") continue;
        const auto uuid = r.payload.at("uuid").get<std::string>();
        const int zone = r.payload.value("zone", 0);
        auto [it, inserted] = zones.emplace(uuid, zone);
        if (!inserted && it->second != zone) throw ParseError("replay: radar " + uuid + " changes zone");
    }
    double period = 0.05;
    {
        std::optional<double> prev;
        for (const auto& r : records) {
            if (r.kind != "snapshot") continue;
            if (prev && r.t > *prev) {
                period = r.t - *prev;
                break;
            }
            prev = r.t;
        }
    }

    fusion::Fuser fuser(zones, period);
    tracker::FallTracker tr(settings.loss_debounce_frames);
    std::vector<fusion::DetectionMessage> pending;
    for (const auto& r : records) {
        if (r.kind == "detection") {
            auto payload = r.payload;
            payload["t"] = r.payload.contains("t") ? r.payload["t"] : protocol::Json(r.t);
            pending.push_back(protocol::detection_from_json(payload));
            ++out.detections;
        } else if (r.kind == "snapshot") {
            for (const auto& m : pending) fuser.ingest(m);
            pending.clear();
            fuser.take_diagnostics();
            const auto snap = fuser.snapshot(r.t);
            auto events = tr.update(snap.states, r.t);
            for (const auto& rec : tracker_records(events)) out.replayed.push_back(eventlog::encode(rec));
            out.events.insert(out.events.end(), events.begin(), events.end());
            ++out.snapshots;
        } else if (r.kind == "tracker" || r.kind == "alert") {
            out.logged.push_back(eventlog::encode(r));
        }
    }
    return out;
}

}  // namespace lunatrack
