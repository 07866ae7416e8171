#pragma once

// End-to-end pipeline: scenario simulator -> radar workers -> fuser ->
// fall tracker, with every tick recorded to the event log and streamed to an
// optional publisher.

#include <atomic>
#include <filesystem>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "lunatrack/config.hpp"
#include "lunatrack/event_log.hpp"
#include "lunatrack/fusion.hpp"
#include "lunatrack/scenario.hpp"
#include "lunatrack/tracker.hpp"

namespace lunatrack {

/// Receiver of encoded protocol lines (no trailing newline). Must not block.
class Publisher {
public:
    virtual ~Publisher() = default;
    virtual void publish(const std::string& line) = 0;
    /// Message sent to every client right after it connects.
    virtual void set_hello(const std::string& line) = 0;
};

struct PipelineOptions {
    std::optional<std::filesystem::path> log_path;
    std::chrono::milliseconds log_flush_interval{1000};
    /// Overrides the scenario playback length.
    std::optional<double> duration_s;
    double speed{1.0};
    /// Ticks between status messages.
    int status_every{20};
};

struct PipelineResult {
    fusion::RuntimeStats stats;
    std::vector<tracker::TrackerEvent> events;
    std::vector<fusion::Diagnostic> diagnostics;
    std::uint64_t ticks{0};
    std::uint64_t detected_messages{0};
    bool log_ok{true};

    std::size_t count(tracker::EventKind kind) const;
};

/// Called once per fused tick with the tracker events it produced.
using TickObserver = std::function<void(const fusion::TickOutput&, const std::vector<tracker::TrackerEvent>&)>;

class Pipeline {
public:
    Pipeline(PlatformConfig config, Scenario scenario, PipelineOptions options = {});
    ~Pipeline();

    /// Deterministic single-threaded run over the virtual clock.
    PipelineResult run_virtual();

    /// Threaded run paced against the wall clock at `options.speed`.
    PipelineResult run_live(Publisher* publisher = nullptr, const std::atomic<bool>* stop = nullptr);

    /// Handles one inbound client line; thread-safe. Malformed input becomes a
    /// diagnostic on the next tick.
    void handle_inbound(const std::string& line);
    void steer(const Steering& s);

    void set_observer(TickObserver observer) { observer_ = std::move(observer); }

    std::uint64_t tick_count() const;
    ScenarioSimulator& simulator() { return *simulator_; }
    const PlatformConfig& config() const { return config_; }
    std::string hello_line() const;

private:
    struct RunState;
    void on_tick(RunState& rs, const fusion::TickOutput& out);
    PipelineResult run(bool live, Publisher* publisher, const std::atomic<bool>* stop);

    PlatformConfig config_;
    Scenario scenario_;
    PipelineOptions options_;
    std::unique_ptr<ScenarioSimulator> simulator_;
    TickObserver observer_;

    std::mutex inbound_mutex_;
    std::vector<std::string> inbound_errors_;
};

struct ReplayResult {
    /// Tracker and alert records as produced by the replay.
    std::vector<std::string> replayed;
    /// Tracker and alert records found in the log.
    std::vector<std::string> logged;
    std::vector<tracker::TrackerEvent> events;
    std::size_t detections{0};
    std::size_t snapshots{0};

    bool identical() const { return replayed == logged; }
};

/// Re-fuses the logged detection records at each logged snapshot time and
/// reruns the tracker.
ReplayResult replay(const std::vector<eventlog::LogRecord>& records, const TrackerSettings& settings = {});

/// Tracker and alert records for a batch of tracker events.
std::vector<eventlog::LogRecord> tracker_records(const std::vector<tracker::TrackerEvent>& events);

}  // namespace lunatrack
