#include <cmath>
#include <random>

#include "doctest.h"
#include "lunatrack/coverage.hpp"
#include "lunatrack/errors.hpp"

using namespace lunatrack;
using namespace lunatrack::coverage;

TEST_CASE("unit-cell frequency limit") {
    CHECK(fmax_unit_cell_ghz(2.0, 2.8) == doctest::Approx(125.49).epsilon(0.1 / 125.49));
    CHECK(fmax_unit_cell_ghz(4.0, 2.8) == doctest::Approx(62.75).epsilon(0.1 / 62.75));
    CHECK(fmax_unit_cell_ghz(2.0, 1.0) == doctest::Approx(1.4 * 299792458.0 / 2e-3 / 1e9));
    CHECK_THROWS_AS(fmax_unit_cell_ghz(0.0, 2.8), DomainError);
    CHECK_THROWS_AS(fmax_unit_cell_ghz(2.0, 0.5), DomainError);
}

TEST_CASE("unit-cell limit scaling") {
    std::mt19937 rng(11);
    std::uniform_real_distribution<double> len(0.1, 10.0), eps(1.0, 12.0), k(1.1, 4.0);
    for (int i = 0; i < 200; ++i) {
        const double l = len(rng), e = eps(rng), s = k(rng);
        CHECK(fmax_unit_cell_ghz(l * s, e) == doctest::Approx(fmax_unit_cell_ghz(l, e) / s));
        CHECK(fmax_unit_cell_ghz(l, e * s * s) == doctest::Approx(fmax_unit_cell_ghz(l, e) / s));
    }
}

TEST_CASE("torso half-angle") {
    CHECK(torso_half_angle_deg(0.5, 1.18) == doctest::Approx(11.97).epsilon(0.01 / 11.97));
    CHECK(torso_half_angle_deg(0.5, 0.25) == doctest::Approx(45.0));
    CHECK(torso_half_angle_deg(0.5, 1e9) < 1e-6);
    CHECK_THROWS_AS(torso_half_angle_deg(0.5, 0.0), DomainError);
    CHECK_THROWS_AS(torso_half_angle_deg(0.0, 1.0), DomainError);

    std::mt19937 rng(5);
    std::uniform_real_distribution<double> d(0.05, 20.0), w(0.1, 1.5);
    for (int i = 0; i < 200; ++i) {
        const double dd = d(rng), ww = w(rng);
        CHECK(torso_half_angle_deg(ww, dd * 1.01) < torso_half_angle_deg(ww, dd));
        CHECK(torso_half_angle_deg(ww * 1.01, dd) > torso_half_angle_deg(ww, dd));
    }
}

TEST_CASE("gap-free distance") {
    CHECK(std::abs(min_gapfree_distance_m(0.5, 24.0) - 1.18) <= 0.01);
    CHECK(min_gapfree_distance_m(0.5, 24.0) == doctest::Approx(0.25 / std::tan(12.0 * M_PI / 180.0)));
    CHECK(min_gapfree_distance_m(0.5, 90.0) == doctest::Approx(0.25));
    CHECK(min_gapfree_distance_m(1.0, 24.0) == doctest::Approx(2.352).epsilon(1e-3));
    CHECK_THROWS_AS(min_gapfree_distance_m(0.5, 0.0), DomainError);
    CHECK_THROWS_AS(min_gapfree_distance_m(0.5, 180.0), DomainError);

    for (double g = 1.0; g < 179.0; g += 7.3) {
        for (double w : {0.2, 0.5, 1.3}) {
            CHECK(std::abs(torso_half_angle_deg(w, min_gapfree_distance_m(w, g)) - g / 2) < 1e-12);
        }
    }
}

TEST_CASE("resolvable separation") {
    CHECK(std::abs(resolvable_separation_m(10.0, 4.0) - 0.7) <= 0.01);
    CHECK(resolvable_separation_m(10.0, 4.0) == doctest::Approx(0.699).epsilon(1e-3));
    CHECK(resolvable_separation_m(0.0, 4.0) == 0.0);
    CHECK(resolvable_separation_m(5.0, 4.0) == doctest::Approx(0.350).epsilon(2e-3));
}

TEST_CASE("range extension") {
    CHECK(std::abs(range_extension_factor(24.0) - 3.98) <= 0.05);
    CHECK(std::abs(range_extension_factor(24.0) - 4.0) <= 0.05);
    CHECK(range_extension_factor(0.0) == 1.0);
    CHECK(range_extension_factor(40.0) == doctest::Approx(10.0));
    std::mt19937 rng(9);
    std::uniform_real_distribution<double> db(-30.0, 30.0);
    for (int i = 0; i < 100; ++i) {
        const double a = db(rng), b = db(rng);
        CHECK(range_extension_factor(a + b) == doctest::Approx(range_extension_factor(a) * range_extension_factor(b)));
    }
}

TEST_CASE("coverage report") {
    CoverageConfig cfg;
    CHECK(cfg.beam_gap_deg() == 24.0);
    const auto r = coverage_report(cfg, {0.5, 1.0, 1.176, 1.18, 10.0});
    REQUIRE(r.rows.size() == 5);
    CHECK(r.rows[1].body_width_deg == doctest::Approx(28.07).epsilon(1e-3));
    CHECK(r.rows[1].verdict == Verdict::GapFree);
    CHECK(r.rows[1].regime == Regime::BodyLimited);
    CHECK(r.rows[2].verdict == Verdict::Boundary);
    CHECK(r.rows[3].verdict == Verdict::Boundary);
    CHECK(r.rows[3].alpha_deg == doctest::Approx(11.96).epsilon(1e-3));
    CHECK(r.rows[4].verdict == Verdict::Gap);
    CHECK(r.rows[4].regime == Regime::BeamLimited);
    CHECK(r.gapfree_distance_m == doctest::Approx(1.176).epsilon(1e-3));
    CHECK(r.fmax_literal_ghz == doctest::Approx(fmax_unit_cell_ghz(2.0, 2.8)));
    CHECK(r.fmax_quoted_cell_ghz == doctest::Approx(fmax_unit_cell_ghz(4.0, 2.8)));
    const auto text = format_table(r);
    CHECK(text.find("boundary") != std::string::npos);
    CHECK(text.find("62.7") != std::string::npos);

    CoverageConfig bad;
    bad.hpbw_deg = 30.0;
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}
