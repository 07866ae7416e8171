#pragma once

// Four-stage fall-detection cycle over fused zone snapshots: initial
// detection, monitoring for disappearance, fallback timer over adjacent zones,
// and alert with automatic reset on the next detection.

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "lunatrack/fmcw.hpp"

namespace lunatrack::tracker {

using ZoneStates = std::array<bool, fmcw::kZones>;

enum class Stage { InitialDetection, Monitoring, Fallback, Alerted };
enum class EventKind { TrackStarted, ZoneHandoff, FallbackEntered, AlertRaised, TrackResumed };

std::string to_string(Stage s);
std::string to_string(EventKind k);

struct TrackerState {
    Stage stage{Stage::InitialDetection};
    std::optional<int> tracked_zone;
    std::optional<double> fallback_deadline;
    double last_seen{0.0};
    /// Timestamp of the last accepted snapshot.
    std::optional<double> last_time;
    /// Consecutive snapshots with the tracked zone false while Monitoring.
    int misses{0};
    double first_miss{0.0};
    /// Non-adjacent zones already reported during the current fallback window.
    std::array<bool, fmcw::kZones> reported_far{};
};

struct TrackerEvent {
    EventKind kind{EventKind::TrackStarted};
    int zone{0};
    double timestamp_s{0.0};
    /// Previous zone for handoffs, 0 otherwise.
    int from_zone{0};

    bool operator==(const TrackerEvent&) const = default;
};

struct TrackerDiagnostic {
    double timestamp_s{0.0};
    std::string kind;  // out_of_order_snapshot, non_adjacent_reappearance
    std::string detail;
};

struct StepResult {
    TrackerState state;
    std::vector<TrackerEvent> events;
    std::vector<TrackerDiagnostic> diagnostics;
};

/// 20 s for the edge zones 1 and 5, 10 s for 2..4. Throws DomainError otherwise.
double timeout_for(int zone);

/// {X-1, X, X+1} clamped to 1..5, ascending.
std::vector<int> adjacent(int zone);

/// Pure transition function. Snapshots older than the last accepted one are
/// rejected with a diagnostic and leave the state unchanged.
StepResult step(const TrackerState& state, const ZoneStates& zones, double now_s, int loss_debounce_frames = 1);

class FallTracker {
public:
    explicit FallTracker(int loss_debounce_frames = 1);

    /// Advances the machine; returns the events raised by this snapshot.
    std::vector<TrackerEvent> update(const ZoneStates& zones, double now_s);

    const TrackerState& state() const { return state_; }
    const std::vector<TrackerEvent>& history() const { return history_; }
    std::vector<TrackerDiagnostic> take_diagnostics();

private:
    int debounce_;
    TrackerState state_;
    std::vector<TrackerEvent> history_;
    std::vector<TrackerDiagnostic> diagnostics_;
};

}  // namespace lunatrack::tracker
