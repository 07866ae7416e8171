#include "lunatrack/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <thread>

#include "lunatrack/errors.hpp"
#include "lunatrack/units.hpp"

namespace lunatrack::fusion {

Baseline calibrate(std::span<const double> amplitudes_db, int n, std::string uuid) {
    if (n < 1) throw ContractError("calibrate: calibration length must be positive");
    if (amplitudes_db.size() < static_cast<std::size_t>(n)) {
        throw CalibrationError("calibration incomplete: " + std::to_string(amplitudes_db.size()) + " of " +
                               std::to_string(n) + " frames for radar '" + uuid + "'");
    }
    const double sum = std::accumulate(amplitudes_db.begin(), amplitudes_db.begin() + n, 0.0);
    return {std::move(uuid), sum / n, n};
}

bool detect(double amplitude_db, const Baseline& baseline, double offset_db) {
    return amplitude_db > baseline.mean_amplitude_db + offset_db;
}

RadarWorker::RadarWorker(fmcw::RadarConfig radar, int calibration_n, double offset_db)
    : radar_(std::move(radar)), calibration_n_(calibration_n), offset_db_(offset_db) {
    if (calibration_n_ < 1) throw ConfigError("worker: calibration length must be positive");
    calibration_.reserve(static_cast<std::size_t>(calibration_n_));
}

std::optional<DetectionMessage> RadarWorker::process(const fmcw::Frame& frame, double timestamp_s) {
    const auto profile = fmcw::range_profile(frame, radar_);
    const auto peak = fmcw::peak_amplitude(profile, radar_.max_range_m);
    return process_amplitude(peak.amplitude_db, timestamp_s);
}

std::optional<DetectionMessage> RadarWorker::process_amplitude(double amplitude_db, double timestamp_s) {
    if (!baseline_) {
        calibration_.push_back(amplitude_db);
        if (calibration_.size() == static_cast<std::size_t>(calibration_n_)) {
            baseline_ = calibrate(calibration_, calibration_n_, radar_.uuid);
        }
        return std::nullopt;
    }
    return DetectionMessage{radar_.uuid, next_seq_++, timestamp_s, amplitude_db,
                            detect(amplitude_db, *baseline_, offset_db_)};
}

Fuser::Fuser(std::map<std::string, int> uuid_to_zone, double frame_period_s, int stale_frames)
    : zones_(std::move(uuid_to_zone)), frame_period_(frame_period_s), stale_frames_(stale_frames) {
    for (const auto& [uuid, zone] : zones_) {
        if (zone < 1 || zone > fmcw::kZones) throw ConfigError("fuser: zone of " + uuid + " outside 1..5");
    }
}

void Fuser::ingest(const DetectionMessage& msg) {
    auto it = zones_.find(msg.uuid);
    if (it == zones_.end()) {
        ++rejected_;
        diagnostics_.push_back({msg.timestamp_s, "unknown_uuid", msg.uuid, "message from unmapped radar rejected"});
        return;
    }
    ++consumed_;
    ZoneState& z = state_[static_cast<std::size_t>(it->second - 1)];
    if (z.seen && msg.seq <= z.seq) {
        ++rejected_;
        diagnostics_.push_back({msg.timestamp_s, "out_of_order", msg.uuid,
                                "seq " + std::to_string(msg.seq) + " after " + std::to_string(z.seq)});
        return;
    }
    const std::uint64_t expected = z.seen ? z.seq + 1 : 0;
    if (msg.seq != expected) {
        ++gaps_;
        diagnostics_.push_back({msg.timestamp_s, "seq_gap", msg.uuid,
                                "expected seq " + std::to_string(expected) + ", got " + std::to_string(msg.seq)});
    }
    z.detect = msg.detect;
    z.seen = true;
    z.seq = msg.seq;
    z.last_timestamp = msg.timestamp_s;
}

ZoneSnapshot Fuser::snapshot(double now_s) const {
    ZoneSnapshot snap;
    double newest = -std::numeric_limits<double>::infinity();
    double oldest_seen = std::numeric_limits<double>::infinity();
    for (const auto& z : state_) {
        if (!z.seen) continue;
        snap.cold_start = false;
        newest = std::max(newest, z.last_timestamp);
        oldest_seen = std::min(oldest_seen, z.last_timestamp);
    }
    snap.timestamp_s = snap.cold_start ? now_s : newest;
    const double limit = stale_frames_ - 1e-6;
    for (std::size_t i = 0; i < state_.size(); ++i) {
        const auto& z = state_[i];
        snap.states[i] = z.detect;
        snap.seqs[i] = z.seq;
        if (z.seen) {
            snap.stale[i] = (now_s - z.last_timestamp) / frame_period_ >= limit;
        } else if (!snap.cold_start) {
            // Never reported although other radars have.
            snap.stale[i] = (now_s - oldest_seen) / frame_period_ >= limit;
        }
    }
    return snap;
}

std::vector<Diagnostic> Fuser::take_diagnostics() {
    std::vector<Diagnostic> out;
    out.swap(diagnostics_);
    return out;
}

double RuntimeStats::median_latency_s() const {
    if (latencies_s.empty()) return 0.0;
    std::vector<double> sorted = latencies_s;
    const auto mid = sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2);
    std::nth_element(sorted.begin(), mid, sorted.end());
    return *mid;
}

Runtime::Runtime(std::vector<fmcw::RadarConfig> radars, RuntimeSettings settings)
    : radars_(std::move(radars)), settings_(settings) {
    if (radars_.empty()) throw ConfigError("runtime: no radars");
    for (const auto& r : radars_) r.validate();
}

std::map<std::string, int> Runtime::zone_map() const {
    std::map<std::string, int> map;
    for (const auto& r : radars_) map.emplace(r.uuid, r.zone);
    return map;
}

namespace {

void sort_by_zone(std::vector<DetectionMessage>& msgs, const std::map<std::string, int>& zones) {
    auto zone_of = [&](const DetectionMessage& m) {
        auto it = zones.find(m.uuid);
        return it == zones.end() ? fmcw::kZones + 1 : it->second;
    };
    std::stable_sort(msgs.begin(), msgs.end(), [&](const auto& a, const auto& b) {
        if (a.timestamp_s != b.timestamp_s) return a.timestamp_s < b.timestamp_s;
        return zone_of(a) < zone_of(b);
    });
}

}  // namespace

RuntimeStats Runtime::run_virtual(FrameSource& source, std::uint64_t ticks, const TickSink& sink) {
    std::vector<RadarWorker> workers;
    for (const auto& r : radars_) workers.emplace_back(r, settings_.calibration_n, settings_.offset_db);
    BoundedQueue<DetectionMessage> queue(settings_.queue_capacity_per_radar * radars_.size());
    const auto zones = zone_map();
    Fuser fuser(zones, frame_period(), settings_.stale_frames);
    RuntimeStats stats;

    for (std::uint64_t tick = 0; tick < ticks; ++tick) {
        const double t = tick_time(tick, frame_period());
        for (std::size_t r = 0; r < workers.size(); ++r) {
            if (auto msg = workers[r].process(source.frame(r, tick), t)) queue.push(std::move(*msg));
        }
        TickOutput out;
        out.tick = tick;
        out.time_s = t;
        while (auto msg = queue.try_pop()) out.messages.push_back(std::move(*msg));
        sort_by_zone(out.messages, zones);
        for (const auto& m : out.messages) fuser.ingest(m);
        out.snapshot = fuser.snapshot(t);
        out.diagnostics = fuser.take_diagnostics();
        out.enqueued = queue.pushed();
        out.dropped = queue.dropped();
        ++stats.snapshots;
        if (sink) sink(out);
    }
    stats.enqueued = queue.pushed();
    stats.dropped = queue.dropped();
    stats.consumed = queue.popped();
    stats.gaps = fuser.gaps();
    return stats;
}

RuntimeStats Runtime::run_threaded(FrameSource& source, std::uint64_t ticks, const TickSink& sink, double speed,
                                   const std::atomic<bool>* stop) {
    using Clock = std::chrono::steady_clock;
    if (!(speed > 0.0)) throw ConfigError("runtime: speed must be positive");
    const double period = frame_period();
    const auto wall_period = std::chrono::duration_cast<Clock::duration>(std::chrono::duration<double>(period / speed));
    const auto start = Clock::now();
    auto scheduled = [&](std::uint64_t k) { return start + wall_period * static_cast<long>(k); };
    auto stop_requested = [&] { return stop != nullptr && stop->load(); };

    BoundedQueue<DetectionMessage> queue(settings_.queue_capacity_per_radar * radars_.size());
    std::atomic<bool> finished{false};
    std::mutex wake_mutex;
    std::condition_variable wake;

    std::vector<std::thread> threads;
    threads.reserve(radars_.size());
    for (std::size_t r = 0; r < radars_.size(); ++r) {
        threads.emplace_back([&, r] {
            RadarWorker worker(radars_[r], settings_.calibration_n, settings_.offset_db);
            for (std::uint64_t k = 0; k < ticks; ++k) {
                {
                    std::unique_lock lock(wake_mutex);
                    wake.wait_until(lock, scheduled(k), [&] { return finished.load() || stop_requested(); });
                }
                if (finished.load() || stop_requested()) return;
                auto msg = worker.process(source.frame(r, k), tick_time(k, period));
                if (msg) queue.push(std::move(*msg));
            }
        });
    }

    const auto zones = zone_map();
    std::map<std::string, std::size_t> radar_index;
    for (std::size_t r = 0; r < radars_.size(); ++r) radar_index.emplace(radars_[r].uuid, r);
    Fuser fuser(zones, period, settings_.stale_frames);
    RuntimeStats stats;
    std::map<std::uint64_t, std::vector<DetectionMessage>> pending;
    const auto calibration_ticks = static_cast<std::uint64_t>(settings_.calibration_n);
    std::vector<long long> last_reported(radars_.size(), static_cast<long long>(calibration_ticks) - 1);

    auto accept = [&](DetectionMessage msg) {
        const auto tick = static_cast<std::uint64_t>(std::llround(msg.timestamp_s / period));
        if (auto it = radar_index.find(msg.uuid); it != radar_index.end()) {
            last_reported[it->second] = std::max(last_reported[it->second], static_cast<long long>(tick));
        }
        pending[tick].push_back(std::move(msg));
    };
    auto all_reported = [&](std::uint64_t k) {
        if (k < calibration_ticks) return true;
        const auto it = pending.find(k);
        for (std::size_t r = 0; r < radars_.size(); ++r) {
            const bool live = static_cast<long long>(k) - last_reported[r] <= settings_.stale_frames;
            if (!live) continue;
            const bool has = it != pending.end() && std::any_of(it->second.begin(), it->second.end(), [&](const auto& m) {
                                 return m.uuid == radars_[r].uuid;
                             });
            if (!has) return false;
        }
        return true;
    };

    for (std::uint64_t k = 0; k < ticks && !stop_requested(); ++k) {
        const auto due = scheduled(k);
        const auto deadline = due + wall_period * static_cast<long>(settings_.stale_frames);
        while (true) {
            while (auto msg = queue.try_pop()) accept(std::move(*msg));
            const auto now = Clock::now();
            if (now >= due && all_reported(k)) break;
            if (now >= deadline || stop_requested()) break;
            const auto wait_until = all_reported(k) ? due : deadline;
            if (auto msg = queue.pop_until(std::min(wait_until, deadline))) accept(std::move(*msg));
        }

        TickOutput out;
        out.tick = k;
        out.time_s = tick_time(k, period);
        for (auto it = pending.begin(); it != pending.end() && it->first <= k;) {
            for (auto& m : it->second) out.messages.push_back(std::move(m));
            it = pending.erase(it);
        }
        sort_by_zone(out.messages, zones);
        for (const auto& m : out.messages) fuser.ingest(m);
        out.snapshot = fuser.snapshot(out.time_s);
        out.diagnostics = fuser.take_diagnostics();
        out.enqueued = queue.pushed();
        out.dropped = queue.dropped();
        ++stats.snapshots;
        stats.latencies_s.push_back(std::chrono::duration<double>(Clock::now() - due).count());
        if (sink) sink(out);
    }

    finished = true;
    {
        std::lock_guard lock(wake_mutex);
    }
    wake.notify_all();
    for (auto& t : threads) t.join();
    queue.close();

    stats.enqueued = queue.pushed();
    stats.dropped = queue.dropped();
    // Messages left in flight at shutdown count as consumed by the drain below.
    while (queue.try_pop()) {
    }
    stats.consumed = queue.popped();
    stats.gaps = fuser.gaps();
    return stats;
}

}  // namespace lunatrack::fusion
