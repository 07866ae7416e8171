#include "lunatrack/fmcw.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <map>
#include <mutex>
#include <numbers>
#include <random>

#include "lunatrack/errors.hpp"
#include "lunatrack/units.hpp"

namespace lunatrack::fmcw {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

double hann(int n, int N) { return 0.5 - 0.5 * std::cos(kTwoPi * n / N); }

// FFTW planning is not thread-safe; execution with the new-array interface is.
class PlanCache {
public:
    static PlanCache& instance() {
        static PlanCache cache;
        return cache;
    }

    fftw_plan r2c(int n) {
        std::lock_guard lock(mutex_);
        auto it = plans_.find(n);
        if (it != plans_.end()) return it->second;
        std::vector<double> in(static_cast<std::size_t>(n));
        std::vector<fftw_complex> out(static_cast<std::size_t>(n / 2 + 1));
        fftw_plan plan = fftw_plan_dft_r2c_1d(n, in.data(), out.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
        plans_.emplace(n, plan);
        return plan;
    }

    ~PlanCache() {
        for (auto& [n, plan] : plans_) fftw_destroy_plan(plan);
    }

private:
    std::mutex mutex_;
    std::map<int, fftw_plan> plans_;
};

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

bool is_power_of_two(int n) { return n > 0 && (n & (n - 1)) == 0; }

}  // namespace

void RadarConfig::validate() const {
    if (uuid.empty()) throw ConfigError("radar: uuid must not be empty");
    if (zone < 1 || zone > kZones) throw ConfigError("radar " + uuid + ": zone must be in 1..5");
    if (!(f_end_ghz > f_start_ghz)) throw ConfigError("radar " + uuid + ": f_end must exceed f_start");
    if (!is_power_of_two(samples_per_chirp))
        throw ConfigError("radar " + uuid + ": samples_per_chirp must be a power of two");
    if (chirps_per_frame < 1) throw ConfigError("radar " + uuid + ": chirps_per_frame must be positive");
    if (!(sample_rate_mhz > 0.0) || !(frame_rep_time_s > 0.0) || !(chirp_rep_time_s > 0.0))
        throw ConfigError("radar " + uuid + ": timing parameters must be positive");
    if (chirp_duration_s() > chirp_rep_time_s)
        throw ConfigError("radar " + uuid + ": chirp duration exceeds chirp repetition time");
    if (chirps_per_frame * chirp_rep_time_s > frame_rep_time_s)
        throw ConfigError("radar " + uuid + ": chirps do not fit in the frame period");
}

double RadarConfig::beat_frequency_hz(double range_m) const { return 2.0 * range_m * slope_hz_per_s() / kSpeedOfLight; }

double RadarConfig::range_per_bin_m() const {
    const double fs = sample_rate_mhz * 1e6;
    return kSpeedOfLight * fs / (2.0 * slope_hz_per_s() * samples_per_chirp);
}

std::vector<RadarConfig> default_radars() {
    std::vector<RadarConfig> radars;
    for (int zone = 1; zone <= kZones; ++zone) {
        RadarConfig r;
        r.uuid = "radar-" + std::to_string(zone);
        r.zone = zone;
        r.boresight_deg = -56.0 + 28.0 * (zone - 1);
        radars.push_back(r);
    }
    return radars;
}

void ZoneGainModel::validate() const {
    for (double b : lens_boost_db) {
        if (!(b > 0.0)) throw ConfigError("gain model: lens boost must be positive");
    }
    if (!(hpbw_on_deg > 0.0 && hpbw_on_deg < sector_width_deg))
        throw ConfigError("gain model: hpbw_on must be positive and below the sector width");
    if (!(hpbw_off_deg > 0.0)) throw ConfigError("gain model: hpbw_off must be positive");
    if (!(shelf_db > 0.0)) throw ConfigError("gain model: shelf depth must be positive");
}

double ZoneGainModel::peak_db(int zone) const {
    if (zone < 1 || zone > kZones) throw DomainError("zone_gain: zone must be in 1..5");
    return lens_on ? base_gain_db + lens_boost_db[static_cast<std::size_t>(zone - 1)] : base_gain_db;
}

double zone_gain(const ZoneGainModel& model, double off_boresight_deg, int zone) {
    const double peak = model.peak_db(zone);
    const double x = 2.0 * off_boresight_deg / model.hpbw_deg();
    return std::max(peak - 3.0 * x * x, peak - model.shelf_db);
}

std::optional<double> subject_tone_db(const Scene& scene, const RadarConfig& radar, const ZoneGainModel& model) {
    if (!scene.subject) return std::nullopt;
    const double range = std::hypot(scene.subject->x_m, scene.subject->y_m);
    if (range < 1e-3) return std::nullopt;
    const double az = rad_to_deg(std::atan2(scene.subject->x_m, scene.subject->y_m));
    const double half_width = rad_to_deg(std::atan((scene.torso_width_m / 2.0) / range));
    // The nearest torso edge sets the illumination angle; a torso spanning the
    // boresight is illuminated on-axis.
    const double off = std::max(0.0, std::abs(az - radar.boresight_deg) - half_width);
    const double gain = zone_gain(model, off, radar.zone);
    return 2.0 * gain + radar.if_gain_db + 10.0 * std::log10(scene.reflectivity) - 40.0 * std::log10(range) +
           scene.link_constant_db;
}

std::uint64_t frame_seed(std::uint64_t scenario_seed, std::uint64_t radar_index, std::uint64_t frame_index) {
    return splitmix64(splitmix64(splitmix64(scenario_seed) ^ radar_index) ^ frame_index);
}

double tone_peak_gain_db(double bin, int n_samples) {
    const int half = n_samples / 2;
    const int lo = std::max(0, static_cast<int>(std::floor(bin)) - 1);
    const int hi = std::min(half, static_cast<int>(std::ceil(bin)) + 1);
    double best = 0.0;
    for (int k = lo; k <= hi; ++k) {
        std::complex<double> acc{};
        for (int n = 0; n < n_samples; ++n) {
            const double s = hann(n, n_samples) * std::cos(kTwoPi * bin * n / n_samples);
            acc += s * std::polar(1.0, -kTwoPi * k * n / n_samples);
        }
        best = std::max(best, std::abs(acc));
    }
    return 20.0 * std::log10(best);
}

double noise_peak_reference_db(double noise_floor_db, int n_samples) {
    // sqrt(sum w^2) = sqrt(3N/8) for the Hann window; the +1.3 dB accounts for
    // taking the maximum over the window of chirp-averaged bins.
    return noise_floor_db + 10.0 * std::log10(3.0 * n_samples / 8.0) + 1.3;
}

Frame synth_frame(const Scene& scene, const RadarConfig& radar, const ZoneGainModel& model, double t_s,
                  std::uint64_t noise_seed, std::uint64_t frame_index) {
    const int N = radar.samples_per_chirp;
    const double fs = radar.sample_rate_mhz * 1e6;
    const double nyquist = fs / 2.0;
    const double rpb = radar.range_per_bin_m();

    Frame frame;
    frame.uuid = radar.uuid;
    frame.index = frame_index;
    frame.timestamp_s = t_s;
    frame.chirps = radar.chirps_per_frame;
    frame.samples = N;

    std::vector<double> chirp(static_cast<std::size_t>(N), 0.0);
    auto add_tone = [&](double range_m, double level_db) {
        const double fb = radar.beat_frequency_hz(range_m);
        if (!(fb > 0.0 && fb < nyquist)) return;  // outside the IF band
        const double amp = std::pow(10.0, level_db / 20.0);
        const double phase = std::fmod(4.0 * std::numbers::pi * radar.f_start_ghz * 1e9 * range_m / kSpeedOfLight, kTwoPi);
        for (int n = 0; n < N; ++n) chirp[static_cast<std::size_t>(n)] += amp * std::cos(kTwoPi * fb * n / fs + phase);
    };

    if (auto level = subject_tone_db(scene, radar, model)) {
        add_tone(std::hypot(scene.subject->x_m, scene.subject->y_m), *level);
    }
    for (const auto& c : scene.clutter) add_tone(c.range_m, c.level_db);

    std::mt19937_64 rng(noise_seed);
    if (scene.multipath_enabled && !model.lens_on) {
        std::bernoulli_distribution ghost(scene.ghost_probability);
        std::uniform_real_distribution<double> ghost_bin(4.0, static_cast<double>(radar.usable_bins() - 2));
        std::uniform_real_distribution<double> excess(1.0, 2.0);
        const bool present = ghost(rng);
        const double bin = ghost_bin(rng);
        const double above = excess(rng);
        if (present) {
            // Reference: the strongest static return's spectral peak, else the
            // noise-only peak statistic.
            double reference = -std::numeric_limits<double>::infinity();
            for (const auto& c : scene.clutter) {
                reference = std::max(reference, c.level_db + tone_peak_gain_db(c.range_m / rpb, N));
            }
            if (!std::isfinite(reference) && scene.noise_floor_db) {
                reference = noise_peak_reference_db(*scene.noise_floor_db, N);
            }
            if (std::isfinite(reference)) add_tone(bin * rpb, reference + above - tone_peak_gain_db(bin, N));
        }
    }

    frame.data.resize(static_cast<std::size_t>(frame.chirps) * N);
    if (scene.noise_floor_db) {
        std::normal_distribution<double> noise(0.0, std::pow(10.0, *scene.noise_floor_db / 20.0));
        for (int c = 0; c < frame.chirps; ++c) {
            for (int n = 0; n < N; ++n) {
                frame.data[static_cast<std::size_t>(c) * N + n] = chirp[static_cast<std::size_t>(n)] + noise(rng);
            }
        }
    } else {
        for (int c = 0; c < frame.chirps; ++c) std::copy(chirp.begin(), chirp.end(), frame.data.begin() + c * N);
    }
    return frame;
}

RangeProfile range_profile(const Frame& frame, const RadarConfig& radar) {
    const int N = frame.samples;
    if (N != radar.samples_per_chirp || frame.chirps != radar.chirps_per_frame ||
        frame.data.size() != static_cast<std::size_t>(frame.chirps) * static_cast<std::size_t>(N)) {
        throw ContractError("range_profile: frame dimensions do not match the radar configuration");
    }
    const int bins = N / 2 + 1;
    fftw_plan plan = PlanCache::instance().r2c(N);
    std::vector<double> in(static_cast<std::size_t>(N));
    std::vector<fftw_complex> out(static_cast<std::size_t>(bins));
    std::vector<double> window(static_cast<std::size_t>(N));
    for (int n = 0; n < N; ++n) window[static_cast<std::size_t>(n)] = hann(n, N);

    std::vector<double> magnitude(static_cast<std::size_t>(bins), 0.0);
    for (int c = 0; c < frame.chirps; ++c) {
        for (int n = 0; n < N; ++n) in[static_cast<std::size_t>(n)] = frame.at(c, n) * window[static_cast<std::size_t>(n)];
        fftw_execute_dft_r2c(plan, in.data(), out.data());
        for (int k = 0; k < bins; ++k) {
            magnitude[static_cast<std::size_t>(k)] += std::hypot(out[k][0], out[k][1]);
        }
    }
    RangeProfile profile;
    profile.range_per_bin_m = radar.range_per_bin_m();
    profile.db.reserve(magnitude.size());
    for (double m : magnitude) profile.db.push_back(20.0 * std::log10(std::max(m / frame.chirps, 1e-300)));
    return profile;
}

Peak peak_amplitude(const RangeProfile& profile, double max_range_m) {
    const int half = static_cast<int>(profile.db.size()) - 1;
    const int last = std::min(half, static_cast<int>(std::floor(max_range_m / profile.range_per_bin_m + 1e-9)));
    if (last < 1) throw ContractError("peak_amplitude: empty range window");
    Peak peak{profile.db[1], profile.range_per_bin_m, 1};
    for (int k = 2; k <= last; ++k) {
        if (profile.db[static_cast<std::size_t>(k)] > peak.amplitude_db) {
            peak = {profile.db[static_cast<std::size_t>(k)], k * profile.range_per_bin_m, k};
        }
    }
    return peak;
}

void validate_waypoints(const std::vector<Waypoint>& waypoints) {
    for (std::size_t i = 1; i < waypoints.size(); ++i) {
        if (waypoints[i].t_s < waypoints[i - 1].t_s) {
            throw ParseError("scenario: waypoints are not time-sorted at index " + std::to_string(i));
        }
    }
}

Scene step_scene(const Scene& scene, const std::vector<Waypoint>& waypoints, double t_s) {
    validate_waypoints(waypoints);
    Scene out = scene;
    if (waypoints.empty()) return out;

    auto place = [&](const Waypoint& w) {
        if (w.absent) {
            out.subject.reset();
        } else {
            out.subject = Subject{w.x_m, w.y_m};
        }
    };
    if (t_s <= waypoints.front().t_s) {
        place(waypoints.front());
        return out;
    }
    if (t_s >= waypoints.back().t_s) {
        place(waypoints.back());
        return out;
    }
    // Last waypoint at or before t.
    auto next = std::upper_bound(waypoints.begin(), waypoints.end(), t_s,
                                 [](double t, const Waypoint& w) { return t < w.t_s; });
    const Waypoint& a = *(next - 1);
    const Waypoint& b = *next;
    if (a.absent || b.absent || b.t_s == a.t_s) {
        place(a);  // hold; absence starts exactly at an absent waypoint
        return out;
    }
    const double f = (t_s - a.t_s) / (b.t_s - a.t_s);
    out.subject = Subject{a.x_m + f * (b.x_m - a.x_m), a.y_m + f * (b.y_m - a.y_m)};
    return out;
}

}  // namespace lunatrack::fmcw
