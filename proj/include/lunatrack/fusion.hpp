#pragma once

// Per-radar calibration and threshold detection, the bounded detection queue,
// and the fuser that turns detection messages into zone snapshots.
//
// Two runtimes drive the same workers and fuser: a deterministic single-thread
// stepper over a virtual clock, and a threaded runtime with one producer
// thread per radar paced against the wall clock.

#include <array>
#include <atomic>
#include <chrono>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "lunatrack/fmcw.hpp"
#include "lunatrack/scenario.hpp"

namespace lunatrack::fusion {

inline constexpr double kDefaultOffsetDb = 0.75;

struct Baseline {
    std::string uuid;
    double mean_amplitude_db{0.0};
    int n_samples{0};
};

struct CalibrationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Arithmetic mean (dB domain) of the first `n` amplitudes.
Baseline calibrate(std::span<const double> amplitudes_db, int n = 100, std::string uuid = {});

/// Strictly above baseline + offset.
bool detect(double amplitude_db, const Baseline& baseline, double offset_db = kDefaultOffsetDb);

struct DetectionMessage {
    std::string uuid;
    std::uint64_t seq{0};
    double timestamp_s{0.0};
    double amplitude_db{0.0};
    bool detect{false};
};

/// Per-radar processing: range profile, peak extraction, calibration then
/// thresholding. Emits nothing until its baseline exists.
class RadarWorker {
public:
    RadarWorker(fmcw::RadarConfig radar, int calibration_n, double offset_db);

    std::optional<DetectionMessage> process(const fmcw::Frame& frame, double timestamp_s);
    /// Same as process() for an already extracted peak amplitude.
    std::optional<DetectionMessage> process_amplitude(double amplitude_db, double timestamp_s);

    bool calibrated() const { return baseline_.has_value(); }
    const std::optional<Baseline>& baseline() const { return baseline_; }
    const fmcw::RadarConfig& radar() const { return radar_; }

private:
    fmcw::RadarConfig radar_;
    int calibration_n_;
    double offset_db_;
    std::vector<double> calibration_;
    std::optional<Baseline> baseline_;
    std::uint64_t next_seq_{0};
};

/// Bounded multi-producer / single-consumer queue; a push into a full queue
/// evicts the oldest element and counts a drop.
template <typename T>
class BoundedQueue {
public:
    explicit BoundedQueue(std::size_t capacity) : capacity_(capacity == 0 ? 1 : capacity) {}

    void push(T value) {
        {
            std::lock_guard lock(mutex_);
            if (items_.size() >= capacity_) {
                items_.pop_front();
                ++dropped_;
            }
            items_.push_back(std::move(value));
            ++pushed_;
        }
        ready_.notify_one();
    }

    std::optional<T> try_pop() {
        std::lock_guard lock(mutex_);
        return pop_locked();
    }

    template <typename Clock, typename Duration>
    std::optional<T> pop_until(const std::chrono::time_point<Clock, Duration>& deadline) {
        std::unique_lock lock(mutex_);
        ready_.wait_until(lock, deadline, [&] { return !items_.empty() || closed_; });
        return pop_locked();
    }

    void close() {
        {
            std::lock_guard lock(mutex_);
            closed_ = true;
        }
        ready_.notify_all();
    }

    std::size_t capacity() const { return capacity_; }
    std::uint64_t pushed() const {
        std::lock_guard lock(mutex_);
        return pushed_;
    }
    std::uint64_t dropped() const {
        std::lock_guard lock(mutex_);
        return dropped_;
    }
    std::uint64_t popped() const {
        std::lock_guard lock(mutex_);
        return popped_;
    }

private:
    std::optional<T> pop_locked() {
        if (items_.empty()) return std::nullopt;
        T value = std::move(items_.front());
        items_.pop_front();
        ++popped_;
        return value;
    }

    std::size_t capacity_;
    mutable std::mutex mutex_;
    std::condition_variable ready_;
    std::deque<T> items_;
    bool closed_{false};
    std::uint64_t pushed_{0};
    std::uint64_t dropped_{0};
    std::uint64_t popped_{0};
};

struct ZoneSnapshot {
    double timestamp_s{0.0};
    std::array<bool, fmcw::kZones> states{};
    std::array<std::uint64_t, fmcw::kZones> seqs{};
    std::array<bool, fmcw::kZones> stale{};
    /// No message has been fused yet.
    bool cold_start{true};
};

struct Diagnostic {
    double timestamp_s{0.0};
    std::string kind;  // seq_gap, unknown_uuid, out_of_order, ...
    std::string uuid;
    std::string detail;
};

class Fuser {
public:
    Fuser(std::map<std::string, int> uuid_to_zone, double frame_period_s, int stale_frames = 3);

    /// Applies one message; older-or-equal seqs and unmapped uuids are rejected
    /// with a diagnostic.
    void ingest(const DetectionMessage& msg);

    /// Latest state per zone as seen at time `now`.
    ZoneSnapshot snapshot(double now_s) const;

    std::vector<Diagnostic> take_diagnostics();

    std::uint64_t consumed() const { return consumed_; }
    std::uint64_t gaps() const { return gaps_; }
    std::uint64_t rejected() const { return rejected_; }

private:
    struct ZoneState {
        bool detect{false};
        bool seen{false};
        std::uint64_t seq{0};
        double last_timestamp{0.0};
    };

    std::map<std::string, int> zones_;
    double frame_period_;
    int stale_frames_;
    std::array<ZoneState, fmcw::kZones> state_{};
    std::vector<Diagnostic> diagnostics_;
    std::uint64_t consumed_{0};
    std::uint64_t gaps_{0};
    std::uint64_t rejected_{0};
};

struct RuntimeSettings {
    int calibration_n{100};
    double offset_db{kDefaultOffsetDb};
    std::size_t queue_capacity_per_radar{64};
    int stale_frames{3};
};

/// One fused tick: the messages applied (ordered by zone) and the snapshot.
struct TickOutput {
    std::uint64_t tick{0};
    double time_s{0.0};
    std::vector<DetectionMessage> messages;
    ZoneSnapshot snapshot;
    std::vector<Diagnostic> diagnostics;
    /// Queue counters at emission time.
    std::uint64_t enqueued{0};
    std::uint64_t dropped{0};
};

struct RuntimeStats {
    std::uint64_t enqueued{0};
    std::uint64_t dropped{0};
    std::uint64_t consumed{0};
    std::uint64_t snapshots{0};
    std::uint64_t gaps{0};
    /// Wall-clock delay from a tick's scheduled acquisition to its snapshot.
    std::vector<double> latencies_s;

    double median_latency_s() const;
};

using TickSink = std::function<void(const TickOutput&)>;

class Runtime {
public:
    Runtime(std::vector<fmcw::RadarConfig> radars, RuntimeSettings settings);

    /// Single-threaded, deterministic: each tick steps the workers round-robin
    /// then fuses. Ticks run back to back.
    RuntimeStats run_virtual(FrameSource& source, std::uint64_t ticks, const TickSink& sink);

    /// One producer thread per radar pacing tick k at start + k * period / speed;
    /// the calling thread is the consumer. A snapshot for tick k is emitted once
    /// every live radar has reported it or stale_frames periods after its schedule.
    /// `stop` (optional) ends the run early.
    RuntimeStats run_threaded(FrameSource& source, std::uint64_t ticks, const TickSink& sink, double speed = 1.0,
                              const std::atomic<bool>* stop = nullptr);

    double frame_period() const { return radars_.front().frame_rep_time_s; }
    const std::vector<fmcw::RadarConfig>& radars() const { return radars_; }
    std::map<std::string, int> zone_map() const;

private:
    std::vector<fmcw::RadarConfig> radars_;
    RuntimeSettings settings_;
};

}  // namespace lunatrack::fusion
