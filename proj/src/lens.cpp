#include "lunatrack/lens.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "lunatrack/errors.hpp"
#include "lunatrack/units.hpp"

namespace lunatrack::lens {

void LensConfig::validate() const {
    if (!(radius_mm > 0.0)) throw ConfigError("lens: radius must be positive");
    if (!(rod_radius_mm > 0.0 && rod_radius_mm < radius_mm))
        throw ConfigError("lens: rod radius must lie in (0, R)");
    if (!(eps_min >= 1.0)) throw ConfigError("lens: eps_min must be >= 1");
    if (!(voxel_mm > 0.0)) throw ConfigError("lens: voxel step must be positive");
    if (voxel_mm > radius_mm / 5.0) throw ConfigError("lens: voxel step must be <= R/5");
    if (!(segment_bounds[0] < segment_bounds[1]) || segment_bounds[0] <= -1.0 || segment_bounds[1] >= 1.0)
        throw ConfigError("lens: segment bounds must be increasing inside (-1, 1)");
    for (double eps : segment_eps) {
        if (!(eps >= eps_min)) throw ConfigError("lens: rod segment permittivity below eps_min");
    }
    if (n_rods < 0) throw ConfigError("lens: rod count must be non-negative");
    if (!(theta_min_deg >= -90.0 && theta_max_deg <= 90.0 && theta_min_deg <= theta_max_deg))
        throw ConfigError("lens: rod angles must lie in [-90, 90]");
}

double LensConfig::eps_ceiling() const {
    double ceiling = std::max(eps_min, base_offset + base_span);
    for (double eps : segment_eps) ceiling = std::max(ceiling, eps);
    return ceiling;
}

PermittivityField::PermittivityField(Vec3 origin, double step, std::array<std::size_t, 3> dims,
                                     double lens_radius, double fill)
    : origin_(origin),
      step_(step),
      dims_(dims),
      lens_radius_(lens_radius),
      values_(dims[0] * dims[1] * dims[2], fill) {}

double PermittivityField::center_coord(int axis, std::size_t i) const {
    // Computed relative to the grid midpoint so mirrored indices give exactly
    // negated coordinates.
    const double half = 0.5 * static_cast<double>(dims_[axis] - 1);
    const double mid = (axis == 0 ? origin_.x : axis == 1 ? origin_.y : origin_.z) + (half + 0.5) * step_;
    return mid + (static_cast<double>(i) - half) * step_;
}

Vec3 PermittivityField::center(std::size_t i, std::size_t j, std::size_t k) const {
    return {center_coord(0, i), center_coord(1, j), center_coord(2, k)};
}

bool PermittivityField::inside(std::size_t i, std::size_t j, std::size_t k) const {
    return norm2(center(i, j, k)) <= lens_radius_ * lens_radius_;
}

long PermittivityField::nearest_index(int axis, double coord) const {
    const double lo = axis == 0 ? origin_.x : axis == 1 ? origin_.y : origin_.z;
    const double hi = lo + step_ * static_cast<double>(dims_[axis]);
    if (coord < lo || coord > hi || dims_[axis] == 0) return -1;
    const double idx = std::floor((coord - lo) / step_);
    return std::clamp(static_cast<long>(idx), 0L, static_cast<long>(dims_[axis]) - 1);
}

double classical_index(double r_mm, double radius_mm) {
    if (!(radius_mm > 0.0)) throw DomainError("classical_index: radius must be positive");
    if (!(r_mm >= 0.0 && r_mm <= radius_mm)) throw DomainError("classical_index: r outside [0, R]");
    const double rho = r_mm / radius_mm;
    return std::sqrt(2.0 - rho * rho);
}

double base_grin_eps(const Vec3& p, const LensConfig& cfg) {
    const double r2 = norm2(p) / (cfg.radius_mm * cfg.radius_mm);
    return cfg.base_offset + (1.0 - r2) * cfg.base_span;
}

std::vector<RodSpec> rod_directions(const LensConfig& cfg) {
    if (cfg.n_rods < 2) throw ConfigError("rod_directions: at least two rods are required");
    std::vector<RodSpec> rods;
    rods.reserve(static_cast<std::size_t>(cfg.n_rods));
    const double mid = 0.5 * (cfg.theta_min_deg + cfg.theta_max_deg);
    const double half_span = 0.5 * (cfg.theta_max_deg - cfg.theta_min_deg);
    const int last = cfg.n_rods - 1;
    for (int i = 0; i <= last; ++i) {
        // (2i - last) / last is exactly antisymmetric in i, so a symmetric
        // range yields exactly mirrored rods.
        const double frac = static_cast<double>(2 * i - last) / static_cast<double>(last);
        const double theta = mid + frac * half_span;
        const double rad = deg_to_rad(theta);
        rods.push_back({Vec3{0.0, std::sin(rad), std::cos(rad)}, theta});
    }
    return rods;
}

double rod_contribution(const Vec3& p, const RodSpec& rod, const LensConfig& cfg) {
    const double ell = dot(p, rod.direction);
    const Vec3 radial = p - rod.direction * ell;
    const double r_perp2 = norm2(radial);
    if (!(r_perp2 < cfg.rod_radius_mm * cfg.rod_radius_mm)) return 0.0;

    const double radius = cfg.radius_mm;
    const double lower = cfg.segment_bounds[0] * radius;
    const double upper = cfg.segment_bounds[1] * radius;
    if (ell >= -radius && ell <= lower) return cfg.segment_eps[0];
    if (ell > lower && ell <= upper) return cfg.segment_eps[1];
    if (ell > upper && ell <= radius) return cfg.segment_eps[2];
    return 0.0;
}

double modified_eps(const Vec3& p, const LensConfig& cfg, const std::vector<RodSpec>& rods) {
    double eps = std::max(cfg.eps_min, base_grin_eps(p, cfg));
    for (const auto& rod : rods) eps = std::max(eps, rod_contribution(p, rod, cfg));
    return eps;
}

PermittivityField make_grid(const LensConfig& cfg) {
    cfg.validate();
    const double ratio = cfg.radius_mm / cfg.voxel_mm;
    // Tolerate R being an exact multiple of the step despite rounding.
    const auto half = static_cast<std::size_t>(std::ceil(ratio - 1e-9));
    const std::size_t n = 2 * half + 1;
    const long double total = static_cast<long double>(n) * n * n;
    if (total > static_cast<long double>(cfg.voxel_budget)) {
        throw ResourceError("synthesize_field: grid of " + std::to_string(n) + "^3 voxels exceeds budget of " +
                            std::to_string(cfg.voxel_budget));
    }
    const double corner = -(static_cast<double>(half) + 0.5) * cfg.voxel_mm;
    return PermittivityField({corner, corner, corner}, cfg.voxel_mm, {n, n, n}, cfg.radius_mm);
}

PermittivityField synthesize_field(const LensConfig& cfg) {
    std::vector<RodSpec> rods;
    if (cfg.n_rods > 0) rods = rod_directions(cfg);
    return synthesize_field(cfg, rods);
}

PermittivityField synthesize_field(const LensConfig& cfg, const std::vector<RodSpec>& rods) {
    PermittivityField field = make_grid(cfg);
    const auto [nx, ny, nz] = field.dims();
    for (std::size_t k = 0; k < nz; ++k) {
        for (std::size_t j = 0; j < ny; ++j) {
            for (std::size_t i = 0; i < nx; ++i) {
                if (!field.inside(i, j, k)) continue;
                field.at(i, j, k) = modified_eps(field.center(i, j, k), cfg, rods);
            }
        }
    }
    return field;
}

void export_ascii(const PermittivityField& field, std::ostream& out) {
    const auto [nx, ny, nz] = field.dims();
    char line[128];
    for (std::size_t k = 0; k < nz; ++k) {
        for (std::size_t j = 0; j < ny; ++j) {
            for (std::size_t i = 0; i < nx; ++i) {
                if (!field.inside(i, j, k)) continue;
                const Vec3 c = field.center(i, j, k);
                const int n = std::snprintf(line, sizeof line, "%.6f %.6f %.6f %.6f\n", c.x, c.y, c.z,
                                            field.at(i, j, k));
                out.write(line, n);
            }
        }
    }
}

void export_ascii(const PermittivityField& field, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FileError("cannot open for writing", path.string());
    export_ascii(field, out);
    out.flush();
    if (!out) throw FileError("write failed", path.string());
}

namespace {

bool parse_number(std::string_view& sv, double& value) {
    while (!sv.empty() && (sv.front() == ' ' || sv.front() == '\t')) sv.remove_prefix(1);
    if (sv.empty()) return false;
    const auto [ptr, ec] = std::from_chars(sv.data(), sv.data() + sv.size(), value);
    if (ec != std::errc{}) return false;
    sv.remove_prefix(static_cast<std::size_t>(ptr - sv.data()));
    return true;
}

}  // namespace

std::vector<AsciiVoxel> parse_ascii(std::istream& in) {
    std::vector<AsciiVoxel> voxels;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        std::string_view sv(line);
        AsciiVoxel v;
        if (!parse_number(sv, v.position.x) || !parse_number(sv, v.position.y) ||
            !parse_number(sv, v.position.z) || !parse_number(sv, v.eps)) {
            throw ParseError("lens ascii: malformed line " + std::to_string(line_no));
        }
        voxels.push_back(v);
    }
    return voxels;
}

std::vector<AsciiVoxel> parse_ascii(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw FileError("cannot open for reading", path.string());
    return parse_ascii(in);
}

Plane parse_plane(const std::string& name) {
    if (name == "x0" || name == "X0" || name == "x") return Plane::X0;
    if (name == "y0" || name == "Y0" || name == "y") return Plane::Y0;
    if (name == "z0" || name == "Z0" || name == "z") return Plane::Z0;
    throw DomainError("unknown plane '" + name + "' (expected x0, y0 or z0)");
}

CrossSection cross_section(const PermittivityField& field, Plane plane, double coord_mm) {
    const int fixed = plane == Plane::X0 ? 0 : plane == Plane::Y0 ? 1 : 2;
    const int col_axis = fixed == 0 ? 1 : 0;
    const int row_axis = fixed == 2 ? 1 : 2;
    const long slice = field.nearest_index(fixed, coord_mm);
    if (slice < 0) throw DomainError("cross_section: plane lies outside the grid");

    CrossSection out;
    out.plane = plane;
    out.plane_coord = field.center_coord(fixed, static_cast<std::size_t>(slice));
    const auto& dims = field.dims();
    for (std::size_t c = 0; c < dims[col_axis]; ++c) out.col_coords.push_back(field.center_coord(col_axis, c));
    for (std::size_t r = 0; r < dims[row_axis]; ++r) out.row_coords.push_back(field.center_coord(row_axis, r));
    out.values.reserve(out.rows() * out.cols());
    for (std::size_t r = 0; r < dims[row_axis]; ++r) {
        for (std::size_t c = 0; c < dims[col_axis]; ++c) {
            std::array<std::size_t, 3> idx{};
            idx[fixed] = static_cast<std::size_t>(slice);
            idx[col_axis] = c;
            idx[row_axis] = r;
            out.values.push_back(field.at(idx[0], idx[1], idx[2]));
        }
    }
    return out;
}

void CrossSection::write_csv(std::ostream& out) const {
    static constexpr const char* kCorner[] = {"z\\y", "z\\x", "y\\x"};
    out << kCorner[static_cast<int>(plane)];
    char buf[64];
    for (double c : col_coords) {
        std::snprintf(buf, sizeof buf, ",%.6f", c);
        out << buf;
    }
    out << '\n';
    for (std::size_t r = 0; r < rows(); ++r) {
        std::snprintf(buf, sizeof buf, "%.6f", row_coords[r]);
        out << buf;
        for (std::size_t c = 0; c < cols(); ++c) {
            std::snprintf(buf, sizeof buf, ",%.6f", at(r, c));
            out << buf;
        }
        out << '\n';
    }
}

}  // namespace lunatrack::lens
