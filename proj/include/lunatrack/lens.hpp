#pragma once

// Modified multi-feed GRIN Luneburg lens: permittivity synthesis, fabrication
// export and cross-sections.
//
// Coordinates are millimetres with the lens centre at the origin. Rods lie in
// the Y-Z plane; the feed side of each rod is its negative axial end.

#include <array>
#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "lunatrack/vec3.hpp"

namespace lunatrack::lens {

/// Relative permittivity written for voxels outside the lens sphere.
inline constexpr double kVacuum = 1.0;

struct LensConfig {
    double radius_mm{50.0};
    double eps_min{1.38};
    double base_offset{0.8};
    double base_span{1.2};
    double rod_radius_mm{7.5};
    /// Feed-side, middle and radiation-side rod segment permittivities.
    std::array<double, 3> segment_eps{1.5, 2.0, 1.75};
    /// Axial segment boundaries as fractions of the radius.
    std::array<double, 2> segment_bounds{-0.34, 0.34};
    int n_rods{13};
    double theta_min_deg{-90.0};
    double theta_max_deg{90.0};
    double voxel_mm{2.0};
    /// Upper bound on grid size accepted by synthesize_field.
    std::size_t voxel_budget{100'000'000};

    /// Throws ConfigError naming the first violated invariant.
    void validate() const;
    /// Largest value any in-sphere voxel can take.
    double eps_ceiling() const;
};

struct RodSpec {
    Vec3 direction;  // [0, sin(theta), cos(theta)]
    double theta_deg{0.0};
};

/// Voxelised permittivity on a regular cubic grid. Voxel (i, j, k) has its
/// centre at origin + (i + 0.5, j + 0.5, k + 0.5) * step; x varies fastest in
/// the flat storage.
class PermittivityField {
public:
    PermittivityField() = default;
    PermittivityField(Vec3 origin, double step, std::array<std::size_t, 3> dims, double lens_radius,
                      double fill = kVacuum);

    const Vec3& origin() const { return origin_; }
    double step() const { return step_; }
    const std::array<std::size_t, 3>& dims() const { return dims_; }
    double lens_radius() const { return lens_radius_; }
    std::size_t size() const { return values_.size(); }
    bool empty() const { return values_.empty(); }

    std::size_t index(std::size_t i, std::size_t j, std::size_t k) const {
        return i + dims_[0] * (j + dims_[1] * k);
    }
    double at(std::size_t i, std::size_t j, std::size_t k) const { return values_[index(i, j, k)]; }
    double& at(std::size_t i, std::size_t j, std::size_t k) { return values_[index(i, j, k)]; }

    double center_coord(int axis, std::size_t i) const;
    Vec3 center(std::size_t i, std::size_t j, std::size_t k) const;
    /// True when the voxel centre lies inside (or on) the lens sphere.
    bool inside(std::size_t i, std::size_t j, std::size_t k) const;

    /// Index of the voxel centre nearest to `coord` along `axis`, or -1 when the
    /// coordinate falls outside the grid.
    long nearest_index(int axis, double coord) const;

    const std::vector<double>& values() const { return values_; }
    std::vector<double>& values() { return values_; }

private:
    Vec3 origin_{};
    double step_{1.0};
    std::array<std::size_t, 3> dims_{0, 0, 0};
    double lens_radius_{0.0};
    std::vector<double> values_;
};

/// Classical Luneburg refractive index sqrt(2 - (r/R)^2).
double classical_index(double r_mm, double radius_mm);

/// Base GRIN profile of the modified lens (not clipped).
double base_grin_eps(const Vec3& p, const LensConfig& cfg);

/// Rod axes spaced uniformly over [theta_min, theta_max], endpoints included.
std::vector<RodSpec> rod_directions(const LensConfig& cfg);

/// Segment permittivity of one rod at p, or 0 when p is outside the rod.
double rod_contribution(const Vec3& p, const RodSpec& rod, const LensConfig& cfg);

/// Pointwise modified permittivity max(eps_min, base, max rod) for p in the sphere.
double modified_eps(const Vec3& p, const LensConfig& cfg, const std::vector<RodSpec>& rods);

/// Grid with odd voxel counts centred on the lens so a voxel centre sits at the origin.
PermittivityField make_grid(const LensConfig& cfg);

PermittivityField synthesize_field(const LensConfig& cfg);
PermittivityField synthesize_field(const LensConfig& cfg, const std::vector<RodSpec>& rods);

/// Writes `x y z eps` per in-sphere voxel, fixed six decimals, x fastest.
void export_ascii(const PermittivityField& field, std::ostream& out);
void export_ascii(const PermittivityField& field, const std::filesystem::path& path);

struct AsciiVoxel {
    Vec3 position;
    double eps{0.0};
};

std::vector<AsciiVoxel> parse_ascii(std::istream& in);
std::vector<AsciiVoxel> parse_ascii(const std::filesystem::path& path);

enum class Plane { X0, Y0, Z0 };

/// Plane from its CLI spelling ("x0", "y0", "z0").
Plane parse_plane(const std::string& name);

/// Dense slice of the field nearest to a coordinate plane. Rows follow the
/// second in-plane axis, columns the first: X0 -> (y, z), Y0 -> (x, z), Z0 -> (x, y).
struct CrossSection {
    Plane plane{Plane::Z0};
    double plane_coord{0.0};
    std::vector<double> col_coords;
    std::vector<double> row_coords;
    std::vector<double> values;  // row-major

    std::size_t rows() const { return row_coords.size(); }
    std::size_t cols() const { return col_coords.size(); }
    double at(std::size_t row, std::size_t col) const { return values[row * cols() + col]; }

    void write_csv(std::ostream& out) const;
};

CrossSection cross_section(const PermittivityField& field, Plane plane, double coord_mm = 0.0);

}  // namespace lunatrack::lens
