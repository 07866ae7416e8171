#include <cmath>

#include "doctest.h"
#include "lunatrack/errors.hpp"
#include "lunatrack/fmcw.hpp"
#include "lunatrack/fusion.hpp"
#include "lunatrack/units.hpp"

using namespace lunatrack;
using namespace lunatrack::fmcw;

namespace {

RadarConfig radar(int zone) { return default_radars()[static_cast<std::size_t>(zone - 1)]; }

Scene quiet_scene(std::optional<Subject> s) {
    Scene sc;
    sc.subject = s;
    sc.noise_floor_db.reset();
    return sc;
}

Subject at(double range, double az_deg) {
    const double a = deg_to_rad(az_deg);
    return {range * std::sin(a), range * std::cos(a)};
}

Peak measure(const Scene& sc, const RadarConfig& r, const ZoneGainModel& m, std::uint64_t seed = 1) {
    return peak_amplitude(range_profile(synth_frame(sc, r, m, 0.0, seed), r), r.max_range_m);
}

}  // namespace

TEST_CASE("table parameters") {
    const RadarConfig r = radar(3);
    CHECK_NOTHROW(r.validate());
    CHECK(r.slope_hz_per_s() == doctest::Approx(9.10e13).epsilon(1e-3));
    CHECK(r.beat_frequency_hz(1.0) == doctest::Approx(0.607e6).epsilon(1e-3));
    // c / 2B independent of the sampling parameters.
    CHECK(r.range_per_bin_m() == doctest::Approx(kSpeedOfLight / (2.0 * 5e9)).epsilon(1e-12));
    CHECK(std::abs(r.range_per_bin_m() - 0.030) < 5e-4);
    CHECK(r.usable_bins() == 64);
    CHECK(std::abs(r.usable_range_m() - 1.92) < 0.005);
}

TEST_CASE("radar validation") {
    RadarConfig r = radar(1);
    r.samples_per_chirp = 100;
    CHECK_THROWS_AS(r.validate(), ConfigError);
    r = radar(1);
    r.f_end_ghz = 57;
    CHECK_THROWS_AS(r.validate(), ConfigError);
    r = radar(1);
    r.chirp_rep_time_s = 1e-5;
    CHECK_THROWS_AS(r.validate(), ConfigError);
}

TEST_CASE("zone gain") {
    ZoneGainModel m;
    CHECK(zone_gain(m, 0.0, 3) == doctest::Approx(m.base_gain_db + 13.5));
    CHECK(zone_gain(m, m.hpbw_on_deg / 2, 3) == doctest::Approx(m.base_gain_db + 13.5 - 3.0));
    CHECK(zone_gain(m, 40.0, 3) == doctest::Approx(m.base_gain_db + 13.5 - 20.0));
    m.lens_on = false;
    CHECK(zone_gain(m, 0.0, 3) == doctest::Approx(m.base_gain_db));
    CHECK(zone_gain(m, m.hpbw_off_deg / 2, 1) == doctest::Approx(m.base_gain_db - 3.0));
    CHECK_THROWS_AS(zone_gain(m, 0.0, 6), DomainError);
}

TEST_CASE("subject tone lands in the right bin") {
    const ZoneGainModel m;
    const auto r = radar(3);
    const auto p = measure(quiet_scene(Subject{0.0, 1.0}), r, m);
    CHECK(std::abs(p.range_m - 1.0) <= r.range_per_bin_m());
}

TEST_CASE("range accuracy across the window") {
    const ZoneGainModel m;
    const auto r = radar(3);
    Scene sc;
    for (double range = 0.1; range <= 1.9; range += 0.05) {
        sc.subject = Subject{0.0, range};
        const auto p = measure(sc, r, m, static_cast<std::uint64_t>(range * 1000));
        CHECK(std::abs(p.range_m - range) <= r.range_per_bin_m());
    }
}

TEST_CASE("pure tone at a bin") {
    const auto r = radar(3);
    const ZoneGainModel m;
    Scene sc = quiet_scene(std::nullopt);
    for (int k : {5, 20, 47}) {
        sc.clutter = {{k * r.range_per_bin_m(), -30.0}};
        const auto p = measure(sc, r, m);
        CHECK(std::abs(p.bin - k) <= 1);
    }
}

TEST_CASE("strongest of two tones wins") {
    const auto r = radar(3);
    Scene sc = quiet_scene(std::nullopt);
    sc.clutter = {{0.5, -30.0}, {1.2, -36.0}};
    CHECK(std::abs(measure(sc, r, ZoneGainModel{}).range_m - 0.5) <= r.range_per_bin_m());
}

TEST_CASE("radar-equation slope") {
    const ZoneGainModel m;
    const auto r = radar(3);
    for (double base : {0.5, 0.6, 0.9}) {
        const double near = measure(quiet_scene(Subject{0.0, base}), r, m).amplitude_db;
        const double far = measure(quiet_scene(Subject{0.0, 2 * base}), r, m).amplitude_db;
        CHECK(std::abs((near - far) - 12.0) <= 1.0);
    }
}

TEST_CASE("lens link-budget delta") {
    ZoneGainModel on, off;
    off.lens_on = false;
    for (int zone = 1; zone <= kZones; ++zone) {
        const auto r = radar(zone);
        const auto s = quiet_scene(at(1.0, r.boresight_deg));
        const double delta = measure(s, r, on).amplitude_db - measure(s, r, off).amplitude_db;
        CHECK(std::abs(delta - 2.0 * on.lens_boost_db[static_cast<std::size_t>(zone - 1)]) <= 0.5);
    }
}

TEST_CASE("sidelobe suppression") {
    const ZoneGainModel m;
    const auto r = radar(3);
    const double bore = *subject_tone_db(quiet_scene(at(1.0, 0.0)), r, m);
    // Torso edge well clear of the main lobe.
    Scene wide = quiet_scene(at(1.0, 40.0));
    wide.torso_width_m = 0.05;
    CHECK(bore - *subject_tone_db(wide, r, m) >= 20.0);
}

TEST_CASE("empty scene is noise") {
    const auto r = radar(2);
    const ZoneGainModel m;
    Scene sc;
    const auto f = synth_frame(sc, r, m, 0.0, 42);
    double sum2 = 0;
    for (double v : f.data) sum2 += v * v;
    const double rms_db = 10 * std::log10(sum2 / static_cast<double>(f.data.size()));
    CHECK(std::abs(rms_db - *sc.noise_floor_db) < 0.5);
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const double a = measure(sc, r, m, seed).amplitude_db;
        CHECK(std::abs(a - noise_peak_reference_db(*sc.noise_floor_db, r.samples_per_chirp)) < 3.0);
    }
}

TEST_CASE("determinism") {
    const auto r = radar(4);
    ZoneGainModel m;
    m.lens_on = false;
    Scene sc;
    sc.subject = at(1.2, 20.0);
    const auto a = synth_frame(sc, r, m, 1.5, frame_seed(9, 3, 77), 77);
    const auto b = synth_frame(sc, r, m, 1.5, frame_seed(9, 3, 77), 77);
    CHECK(a.data == b.data);
    const auto c = synth_frame(sc, r, m, 1.5, frame_seed(9, 3, 78), 78);
    CHECK(a.data != c.data);
    CHECK(frame_seed(1, 0, 0) != frame_seed(1, 1, 0));
    CHECK(frame_seed(1, 0, 1) != frame_seed(2, 0, 1));
}

TEST_CASE("multipath ghosts only without the lens") {
    const auto r = radar(3);
    Scene sc;
    sc.ghost_probability = 1.0;
    sc.clutter = {{0.24, -50.0}};
    ZoneGainModel on, off;
    off.lens_on = false;
    Scene clean = sc;
    clean.ghost_probability = 0.0;
    const double base = measure(clean, r, off, 5).amplitude_db;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const double ghost = measure(sc, r, off, seed).amplitude_db;
        CHECK(ghost > base + 0.75);
        CHECK(ghost < base + 3.0);
        CHECK(measure(sc, r, on, seed).amplitude_db < base + 0.5);
    }
    sc.multipath_enabled = false;
    CHECK(measure(sc, r, off, 1).amplitude_db < base + 0.5);
}

TEST_CASE("zone selectivity") {
    ZoneGainModel m;
    const auto radars = default_radars();
    Scene empty;
    empty.clutter = {{0.24, -50.0}};
    for (int zone = 1; zone <= kZones; ++zone) {
        Scene sc = empty;
        sc.subject = at(1.0, radars[static_cast<std::size_t>(zone - 1)].boresight_deg);
        for (const auto& r : radars) {
            std::vector<double> cal;
            for (std::uint64_t k = 0; k < 100; ++k) cal.push_back(measure(empty, r, m, frame_seed(3, r.zone, k)).amplitude_db);
            const auto baseline = fusion::calibrate(cal, 100, r.uuid);
            for (std::uint64_t k = 100; k < 140; ++k) {
                const double a = measure(sc, r, m, frame_seed(3, r.zone, k)).amplitude_db;
                CHECK(fusion::detect(a, baseline) == (r.zone == zone));
            }
        }
    }
}

TEST_CASE("range profile contracts") {
    const auto r = radar(1);
    Frame f = synth_frame(Scene{}, r, ZoneGainModel{}, 0.0, 1);
    f.samples = 64;
    CHECK_THROWS_AS(range_profile(f, r), ContractError);
    RangeProfile p;
    p.db = {0.0, 1.0};
    p.range_per_bin_m = 0.03;
    CHECK_THROWS_AS(peak_amplitude(p, 0.01), ContractError);
}

TEST_CASE("waypoint playback") {
    Scene sc;
    const std::vector<Waypoint> w = {{0.0, 0.0, 1.0, false}, {10.0, 2.0, 1.0, false}, {12.0, 0, 0, true}};
    CHECK(step_scene(sc, w, -1.0).subject->x_m == 0.0);
    CHECK(step_scene(sc, w, 5.0).subject->x_m == doctest::Approx(1.0));
    CHECK(step_scene(sc, w, 11.0).subject->x_m == doctest::Approx(2.0));
    CHECK_FALSE(step_scene(sc, w, 12.0).subject.has_value());
    CHECK_FALSE(step_scene(sc, w, 100.0).subject.has_value());
    const std::vector<Waypoint> unsorted = {{5.0, 0, 1, false}, {1.0, 0, 1, false}};
    CHECK_THROWS_AS(step_scene(sc, unsorted, 0.0), ParseError);
}
