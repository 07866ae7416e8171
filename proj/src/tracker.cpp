#include "lunatrack/tracker.hpp"

#include <algorithm>

#include "lunatrack/errors.hpp"

namespace lunatrack::tracker {

namespace {

constexpr double kTimeEps = 1e-9;

void check_zone(int zone) {
    if (zone < 1 || zone > fmcw::kZones) throw DomainError("zone " + std::to_string(zone) + " outside 1..5");
}

bool on(const ZoneStates& zones, int zone) { return zones[static_cast<std::size_t>(zone - 1)]; }

std::optional<int> lowest_true(const ZoneStates& zones) {
    for (int z = 1; z <= fmcw::kZones; ++z) {
        if (on(zones, z)) return z;
    }
    return std::nullopt;
}

void start_track(StepResult& r, int zone, double now) {
    r.state.stage = Stage::Monitoring;
    r.state.tracked_zone = zone;
    r.state.fallback_deadline.reset();
    r.state.last_seen = now;
    r.state.misses = 0;
    r.events.push_back({EventKind::TrackStarted, zone, now, 0});
}

void monitor(StepResult& r, double now) {
    r.state.stage = Stage::Monitoring;
    r.state.fallback_deadline.reset();
    r.state.last_seen = now;
    r.state.misses = 0;
}

void fallback(StepResult& r, const ZoneStates& zones, double now) {
    auto& s = r.state;
    const int zone = *s.tracked_zone;
    const auto near = adjacent(zone);
    std::optional<int> hit;
    if (on(zones, zone)) {
        hit = zone;
    } else {
        for (int z : near) {
            if (on(zones, z)) {
                hit = z;
                break;
            }
        }
    }
    if (hit) {
        r.events.push_back({*hit == zone ? EventKind::TrackResumed : EventKind::ZoneHandoff, *hit, now,
                            *hit == zone ? 0 : zone});
        s.tracked_zone = *hit;
        monitor(r, now);
        return;
    }
    for (int z = 1; z <= fmcw::kZones; ++z) {
        auto& reported = s.reported_far[static_cast<std::size_t>(z - 1)];
        if (on(zones, z) && !reported) {
            reported = true;
            r.diagnostics.push_back({now, "non_adjacent_reappearance",
                                     "zone " + std::to_string(z) + " while tracking zone " + std::to_string(zone)});
        }
    }
    if (now + kTimeEps >= *s.fallback_deadline) {
        s.stage = Stage::Alerted;
        s.fallback_deadline.reset();
        r.events.push_back({EventKind::AlertRaised, zone, now, 0});
    }
}

}  // namespace

std::string to_string(Stage s) {
    switch (s) {
        case Stage::InitialDetection: return "InitialDetection";
        case Stage::Monitoring: return "Monitoring";
        case Stage::Fallback: return "Fallback";
        case Stage::Alerted: return "Alerted";
    }
    return "?";
}

std::string to_string(EventKind k) {
    switch (k) {
        case EventKind::TrackStarted: return "TrackStarted";
        case EventKind::ZoneHandoff: return "ZoneHandoff";
        case EventKind::FallbackEntered: return "FallbackEntered";
        case EventKind::AlertRaised: return "AlertRaised";
        case EventKind::TrackResumed: return "TrackResumed";
    }
    return "?";
}

double timeout_for(int zone) {
    check_zone(zone);
    return (zone == 1 || zone == fmcw::kZones) ? 20.0 : 10.0;
}

std::vector<int> adjacent(int zone) {
    check_zone(zone);
    std::vector<int> out;
    for (int z = std::max(1, zone - 1); z <= std::min(fmcw::kZones, zone + 1); ++z) out.push_back(z);
    return out;
}

StepResult step(const TrackerState& state, const ZoneStates& zones, double now, int loss_debounce_frames) {
    StepResult r{state, {}, {}};
    if (state.last_time && now < *state.last_time) {
        r.diagnostics.push_back({now, "out_of_order_snapshot",
                                 "snapshot at " + std::to_string(now) + " after " + std::to_string(*state.last_time)});
        return r;
    }
    auto& s = r.state;
    s.last_time = now;

    switch (s.stage) {
        case Stage::Alerted:
        case Stage::InitialDetection:
            if (auto z = lowest_true(zones)) {
                s.stage = Stage::InitialDetection;
                start_track(r, *z, now);
            }
            break;
        case Stage::Monitoring: {
            const int zone = *s.tracked_zone;
            if (on(zones, zone)) {
                monitor(r, now);
                break;
            }
            if (s.misses == 0) s.first_miss = now;
            ++s.misses;
            if (s.misses < std::max(1, loss_debounce_frames)) break;
            s.stage = Stage::Fallback;
            s.fallback_deadline = s.first_miss + timeout_for(zone);
            s.reported_far = {};
            r.events.push_back({EventKind::FallbackEntered, zone, now, 0});
            fallback(r, zones, now);
            break;
        }
        case Stage::Fallback:
            fallback(r, zones, now);
            break;
    }
    return r;
}

FallTracker::FallTracker(int loss_debounce_frames) : debounce_(loss_debounce_frames) {
    if (debounce_ < 1) throw ConfigError("tracker: loss_debounce_frames must be at least 1");
}

std::vector<TrackerEvent> FallTracker::update(const ZoneStates& zones, double now) {
    auto r = step(state_, zones, now, debounce_);
    state_ = std::move(r.state);
    history_.insert(history_.end(), r.events.begin(), r.events.end());
    diagnostics_.insert(diagnostics_.end(), r.diagnostics.begin(), r.diagnostics.end());
    return std::move(r.events);
}

std::vector<TrackerDiagnostic> FallTracker::take_diagnostics() {
    std::vector<TrackerDiagnostic> out;
    out.swap(diagnostics_);
    return out;
}

}  // namespace lunatrack::tracker
