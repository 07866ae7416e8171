#pragma once

// Five-beam FMCW radar simulator: beam gain model, beat-signal synthesis,
// range profiles and peak extraction.
//
// Zone-plane geometry: the lens sits at the origin, +y points into the room
// and azimuth is measured from +y toward +x. All amplitudes are dB relative to
// an arbitrary full scale; only differences carry meaning.

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace lunatrack::fmcw {

inline constexpr int kZones = 5;

struct RadarConfig {
    std::string uuid;
    int zone{1};
    double boresight_deg{0.0};
    double frame_rep_time_s{0.05};
    double chirp_rep_time_s{0.0007};
    int chirps_per_frame{16};
    double f_start_ghz{58.0};
    double f_end_ghz{63.0};
    double sample_rate_mhz{2.330};
    int samples_per_chirp{128};
    double if_gain_db{23.0};
    double max_range_m{2.0};

    void validate() const;

    double bandwidth_hz() const { return (f_end_ghz - f_start_ghz) * 1e9; }
    double chirp_duration_s() const { return samples_per_chirp / (sample_rate_mhz * 1e6); }
    double slope_hz_per_s() const { return bandwidth_hz() / chirp_duration_s(); }
    double beat_frequency_hz(double range_m) const;
    double range_per_bin_m() const;
    /// Bins 0..N/2 of the real-signal spectrum; the usable window is N/2 bins.
    int usable_bins() const { return samples_per_chirp / 2; }
    double usable_range_m() const { return usable_bins() * range_per_bin_m(); }
};

/// The five default radars at boresights -56, -28, 0, 28, 56 deg (zones 1..5).
std::vector<RadarConfig> default_radars();

struct ZoneGainModel {
    double base_gain_db{10.0};
    /// One-way lens enhancement per zone (index 0 is zone 1).
    std::array<double, kZones> lens_boost_db{12.5, 13.0, 13.5, 13.0, 12.5};
    double hpbw_on_deg{4.0};
    double hpbw_off_deg{60.0};
    double sector_width_deg{28.0};
    /// Depth of the sidelobe shelf below the main-lobe peak.
    double shelf_db{20.0};
    bool lens_on{true};

    void validate() const;
    double peak_db(int zone) const;
    double hpbw_deg() const { return lens_on ? hpbw_on_deg : hpbw_off_deg; }
};

/// One-way antenna gain toward a direction `off_boresight_deg` from a zone's
/// boresight: Gaussian main lobe floored at the sidelobe shelf.
double zone_gain(const ZoneGainModel& model, double off_boresight_deg, int zone);

struct StaticReflector {
    double range_m{0.3};
    /// Beat-tone amplitude, dB full scale.
    double level_db{-50.0};
};

struct Subject {
    double x_m{0.0};
    double y_m{1.0};
};

struct Scene {
    std::optional<Subject> subject;
    double torso_width_m{0.5};
    double reflectivity{1.0};
    /// Per-sample noise standard deviation in dB; disabled when empty.
    std::optional<double> noise_floor_db{-70.0};
    bool multipath_enabled{true};
    double ghost_probability{0.02};
    std::vector<StaticReflector> clutter;
    /// Radar-equation constant folding transmit power and unit conversions.
    double link_constant_db{-100.0};
};

struct Frame {
    std::string uuid;
    std::uint64_t index{0};
    double timestamp_s{0.0};
    int chirps{0};
    int samples{0};
    std::vector<double> data;  // chirp-major

    double at(int chirp, int sample) const { return data[static_cast<std::size_t>(chirp) * samples + sample]; }
};

/// Expected beat-tone amplitude of the subject at a radar, dB (noise-free).
std::optional<double> subject_tone_db(const Scene& scene, const RadarConfig& radar, const ZoneGainModel& model);

/// Deterministic given its arguments; `noise_seed` drives noise and ghosts.
Frame synth_frame(const Scene& scene, const RadarConfig& radar, const ZoneGainModel& model, double t_s,
                  std::uint64_t noise_seed, std::uint64_t frame_index = 0);

/// Mixes a scenario seed with radar and frame indices into an independent stream seed.
std::uint64_t frame_seed(std::uint64_t scenario_seed, std::uint64_t radar_index, std::uint64_t frame_index);

struct RangeProfile {
    std::vector<double> db;  // bins 0..N/2
    double range_per_bin_m{0.0};
};

/// Hann-windowed magnitude spectrum averaged over the frame's chirps.
RangeProfile range_profile(const Frame& frame, const RadarConfig& radar);

struct Peak {
    double amplitude_db{0.0};
    double range_m{0.0};
    int bin{0};
};

/// Strongest bin in (0, max_range], DC excluded, window clamped to N/2 bins.
Peak peak_amplitude(const RangeProfile& profile, double max_range_m);

/// Spectral peak produced by a unit-amplitude tone at fractional bin `bin`,
/// dB (Hann window, N samples).
double tone_peak_gain_db(double bin, int n_samples);

/// Approximate empty-scene peak statistic for white noise at `noise_floor_db`.
double noise_peak_reference_db(double noise_floor_db, int n_samples);

struct Waypoint {
    double t_s{0.0};
    double x_m{0.0};
    double y_m{0.0};
    bool absent{false};
};

/// Throws ParseError when waypoints are not sorted by time.
void validate_waypoints(const std::vector<Waypoint>& waypoints);

/// Scene at time t following piecewise-linear waypoint playback.
Scene step_scene(const Scene& scene, const std::vector<Waypoint>& waypoints, double t_s);

}  // namespace lunatrack::fmcw
