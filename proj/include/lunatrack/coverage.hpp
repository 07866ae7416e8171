#pragma once

// Angular-coverage and link-budget arithmetic for the five-beam array.
// Angles are taken and returned in degrees; distances in metres.

#include <string>
#include <vector>

namespace lunatrack::coverage {

struct CoverageConfig {
    int n_zones{5};
    double inter_beam_spacing_deg{28.0};
    double hpbw_deg{4.0};
    double torso_width_m{0.50};
    double unit_cell_mm{2.0};
    double host_eps{2.8};

    void validate() const;
    /// Angular gap between adjacent -3 dB beam edges.
    double beam_gap_deg() const { return inter_beam_spacing_deg - hpbw_deg; }
};

/// Homogenisation limit of a printed unit cell: 1.4 c / (L sqrt(eps)), GHz.
double fmax_unit_cell_ghz(double cell_mm, double eps);

/// Half-angle subtended by a torso of width W at distance D.
double torso_half_angle_deg(double width_m, double distance_m);

/// Distance at which the torso half-angle equals half of `gap_deg`.
double min_gapfree_distance_m(double width_m, double gap_deg);

/// Lateral separation matching an angular separation of `hpbw_deg` at D.
double resolvable_separation_m(double distance_m, double hpbw_deg);

/// Radar-equation range scaling for a two-way gain improvement: 10^(dB/40).
double range_extension_factor(double two_way_gain_db);

/// Band around 2*alpha == gap reported as a boundary verdict.
inline constexpr double kBoundaryToleranceDeg = 0.1;

enum class Verdict { GapFree, Boundary, Gap };
enum class Regime { BodyLimited, BeamLimited };

std::string to_string(Verdict v);
std::string to_string(Regime r);

struct CoverageRow {
    double distance_m{0.0};
    double alpha_deg{0.0};
    double body_width_deg{0.0};
    Verdict verdict{Verdict::Gap};
    Regime regime{Regime::BodyLimited};
    double resolvable_separation_m{0.0};
};

struct CoverageReport {
    CoverageConfig config;
    double gap_deg{0.0};
    double gapfree_distance_m{0.0};
    /// Distance where the body width shrinks to one beamwidth.
    double crossover_distance_m{0.0};
    double fmax_literal_ghz{0.0};
    double fmax_quoted_cell_ghz{0.0};
    std::vector<CoverageRow> rows;
};

CoverageReport coverage_report(const CoverageConfig& cfg, const std::vector<double>& distances_m);

/// Plain-text table, one row per distance, with the unit-cell footnote.
std::string format_table(const CoverageReport& report);

}  // namespace lunatrack::coverage
