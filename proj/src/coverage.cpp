#include "lunatrack/coverage.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

#include "lunatrack/errors.hpp"
#include "lunatrack/units.hpp"

namespace lunatrack::coverage {

void CoverageConfig::validate() const {
    if (n_zones <= 0 || !(inter_beam_spacing_deg > 0) || !(hpbw_deg > 0) || !(torso_width_m > 0) ||
        !(unit_cell_mm > 0) || !(host_eps > 0)) {
        throw ConfigError("coverage: all parameters must be positive");
    }
    if (!(hpbw_deg < inter_beam_spacing_deg)) throw ConfigError("coverage: hpbw must be below the beam spacing");
}

double fmax_unit_cell_ghz(double cell_mm, double eps) {
    if (!(cell_mm > 0.0)) throw DomainError("fmax_unit_cell: cell size must be positive");
    if (!(eps >= 1.0)) throw DomainError("fmax_unit_cell: permittivity must be >= 1");
    return 1.4 * kSpeedOfLight / (cell_mm * 1e-3 * std::sqrt(eps)) * 1e-9;
}

double torso_half_angle_deg(double width_m, double distance_m) {
    if (!(width_m > 0.0)) throw DomainError("torso_half_angle: width must be positive");
    if (!(distance_m > 0.0)) throw DomainError("torso_half_angle: distance must be positive");
    return rad_to_deg(std::atan((width_m / 2.0) / distance_m));
}

double min_gapfree_distance_m(double width_m, double gap_deg) {
    if (!(gap_deg > 0.0 && gap_deg < 180.0)) throw DomainError("min_gapfree_distance: gap must lie in (0, 180)");
    if (!(width_m > 0.0)) throw DomainError("min_gapfree_distance: width must be positive");
    return (width_m / 2.0) / std::tan(deg_to_rad(gap_deg / 2.0));
}

double resolvable_separation_m(double distance_m, double hpbw_deg) {
    if (!(distance_m >= 0.0)) throw DomainError("resolvable_separation: distance must be non-negative");
    return distance_m * std::tan(deg_to_rad(hpbw_deg));
}

double range_extension_factor(double two_way_gain_db) { return std::pow(10.0, two_way_gain_db / 40.0); }

std::string to_string(Verdict v) {
    switch (v) {
        case Verdict::GapFree: return "gap-free";
        case Verdict::Boundary: return "boundary";
        case Verdict::Gap: return "gap";
    }
    return "?";
}

std::string to_string(Regime r) { return r == Regime::BodyLimited ? "body-limited" : "beam-limited"; }

CoverageReport coverage_report(const CoverageConfig& cfg, const std::vector<double>& distances_m) {
    cfg.validate();
    CoverageReport report;
    report.config = cfg;
    report.gap_deg = cfg.beam_gap_deg();
    report.gapfree_distance_m = min_gapfree_distance_m(cfg.torso_width_m, report.gap_deg);
    report.crossover_distance_m = min_gapfree_distance_m(cfg.torso_width_m, cfg.hpbw_deg);
    report.fmax_literal_ghz = fmax_unit_cell_ghz(cfg.unit_cell_mm, cfg.host_eps);
    report.fmax_quoted_cell_ghz = fmax_unit_cell_ghz(2.0 * cfg.unit_cell_mm, cfg.host_eps);

    for (double d : distances_m) {
        CoverageRow row;
        row.distance_m = d;
        row.alpha_deg = torso_half_angle_deg(cfg.torso_width_m, d);
        row.body_width_deg = 2.0 * row.alpha_deg;
        const double excess = row.body_width_deg - report.gap_deg;
        row.verdict = std::abs(excess) <= kBoundaryToleranceDeg ? Verdict::Boundary
                      : excess > 0.0                            ? Verdict::GapFree
                                                                : Verdict::Gap;
        row.regime = row.body_width_deg > cfg.hpbw_deg ? Regime::BodyLimited : Regime::BeamLimited;
        row.resolvable_separation_m = resolvable_separation_m(d, cfg.hpbw_deg);
        report.rows.push_back(row);
    }
    return report;
}

std::string format_table(const CoverageReport& report) {
    std::ostringstream os;
    char buf[160];
    std::snprintf(buf, sizeof buf, "beam gap %.2f deg, gap-free from D <= %.3f m, beam-limited beyond %.3f m\n",
                  report.gap_deg, report.gapfree_distance_m, report.crossover_distance_m);
    os << buf;
    std::snprintf(buf, sizeof buf, "%10s %10s %10s %10s %14s %12s\n", "D [m]", "alpha", "2alpha", "verdict",
                  "regime", "sep@hpbw [m]");
    os << buf;
    for (const auto& r : report.rows) {
        std::snprintf(buf, sizeof buf, "%10.3f %10.3f %10.3f %10s %14s %12.3f\n", r.distance_m, r.alpha_deg,
                      r.body_width_deg, to_string(r.verdict).c_str(), to_string(r.regime).c_str(),
                      r.resolvable_separation_m);
        os << buf;
    }
    std::snprintf(buf, sizeof buf,
                  "unit-cell limit: %.2f GHz at L = %.1f mm (eps %.2f); %.2f GHz at L = %.1f mm "
                  "(the ~62.8 GHz operating limit corresponds to the doubled cell)\n",
                  report.fmax_literal_ghz, report.config.unit_cell_mm, report.config.host_eps,
                  report.fmax_quoted_cell_ghz, 2.0 * report.config.unit_cell_mm);
    os << buf;
    return os.str();
}

}  // namespace lunatrack::coverage
