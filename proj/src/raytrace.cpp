#include "lunatrack/raytrace.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "lunatrack/errors.hpp"
#include "lunatrack/units.hpp"

namespace lunatrack::raytrace {

ClassicalLuneburg::ClassicalLuneburg(double radius_mm) : radius_(radius_mm) {
    if (!(radius_mm > 0.0)) throw DomainError("ClassicalLuneburg: radius must be positive");
}

EpsSample ClassicalLuneburg::sample(const Vec3& p) const {
    const double r2 = norm2(p);
    const double R2 = radius_ * radius_;
    if (r2 > R2) return {};
    return {2.0 - r2 / R2, p * (-2.0 / R2)};
}

EpsSample UniformMedium::sample(const Vec3& p) const {
    if (norm2(p) > radius_ * radius_) return {};
    return {eps_, {}};
}

VoxelMedium::VoxelMedium(const lens::PermittivityField& field) : field_(field) {
    if (field.empty()) throw ContractError("VoxelMedium: empty field");
}

double VoxelMedium::interpolate(const Vec3& p) const {
    const auto& dims = field_.dims();
    const double step = field_.step();
    const double coords[3] = {p.x, p.y, p.z};
    const double origin[3] = {field_.origin().x, field_.origin().y, field_.origin().z};
    std::size_t base[3];
    double frac[3];
    for (int a = 0; a < 3; ++a) {
        const double u = (coords[a] - origin[a]) / step - 0.5;
        const double last = static_cast<double>(dims[a] - 1);
        if (!(u >= 0.0 && u <= last)) return lens::kVacuum;
        double fl = std::floor(u);
        if (fl >= last) fl = last - 1.0;  // u == last sits on the final centre
        if (dims[a] == 1) {
            base[a] = 0;
            frac[a] = 0.0;
            continue;
        }
        base[a] = static_cast<std::size_t>(fl);
        frac[a] = u - fl;
    }
    double acc = 0.0;
    for (int corner = 0; corner < 8; ++corner) {
        double w = 1.0;
        std::size_t idx[3];
        for (int a = 0; a < 3; ++a) {
            const bool hi = (corner >> a) & 1;
            w *= hi ? frac[a] : 1.0 - frac[a];
            idx[a] = std::min(base[a] + (hi ? 1 : 0), dims[a] - 1);
        }
        if (w != 0.0) acc += w * field_.at(idx[0], idx[1], idx[2]);
    }
    return acc;
}

EpsSample VoxelMedium::sample(const Vec3& p) const {
    const double h = 0.5 * field_.step();
    EpsSample s;
    s.eps = interpolate(p);
    s.grad = {(interpolate(p + Vec3{h, 0, 0}) - interpolate(p - Vec3{h, 0, 0})) / (2 * h),
              (interpolate(p + Vec3{0, h, 0}) - interpolate(p - Vec3{0, h, 0})) / (2 * h),
              (interpolate(p + Vec3{0, 0, h}) - interpolate(p - Vec3{0, 0, h})) / (2 * h)};
    return s;
}

namespace {

struct Optical {
    Vec3 r;
    Vec3 t;  // n * unit direction
};

Optical derivative(const Medium& m, const Optical& y) {
    const EpsSample s = m.sample(y.r);
    const double n = std::sqrt(s.eps);
    return {y.t / n, s.grad / (2.0 * n)};
}

Optical rk4(const Medium& m, const Optical& y, double h) {
    const Optical k1 = derivative(m, y);
    const Optical k2 = derivative(m, {y.r + k1.r * (h / 2), y.t + k1.t * (h / 2)});
    const Optical k3 = derivative(m, {y.r + k2.r * (h / 2), y.t + k2.t * (h / 2)});
    const Optical k4 = derivative(m, {y.r + k3.r * h, y.t + k3.t * h});
    return {y.r + (k1.r + k2.r * 2.0 + k3.r * 2.0 + k4.r) * (h / 6),
            y.t + (k1.t + k2.t * 2.0 + k3.t * 2.0 + k4.t) * (h / 6)};
}

/// Smallest t > 0 with |p + t u| = R, if any.
std::optional<double> sphere_entry(const Vec3& p, const Vec3& u, double R) {
    const double b = dot(p, u);
    const double c = norm2(p) - R * R;
    const double disc = b * b - c;
    if (disc < 0.0) return std::nullopt;
    const double t = -b - std::sqrt(disc);
    if (t < 0.0) return std::nullopt;
    return t;
}

[[noreturn]] void fail_non_finite(const RayState& last) {
    std::ostringstream os;
    os << "trace_ray: non-finite state after s=" << last.path_length << " mm; last valid position ("
       << last.position.x << ", " << last.position.y << ", " << last.position.z << ")";
    throw NumericalError(os.str());
}

}  // namespace

RayPath trace_ray(const Medium& medium, const RayState& start, const TraceOptions& opts) {
    if (!(opts.step_mm > 0.0)) throw DomainError("trace_ray: step must be positive");
    const double R = medium.radius();
    const double surface_tol = 1e-9 * R;

    RayPath path;
    RayState state{start.position, normalized(start.direction), start.path_length};
    path.samples.push_back(state);

    if (norm(state.position) > R + surface_tol) {
        const auto t = sphere_entry(state.position, state.direction, R);
        if (!t) {
            path.exit_state = state;  // misses the lens entirely
            return path;
        }
        state.position = state.position + state.direction * *t;
        state.path_length += *t;
        if (*t > 0.0) path.samples.push_back(state);
    }
    if (norm(state.position) >= R - surface_tol && dot(state.position, state.direction) >= 0.0) {
        path.exit_state = state;
        return path;
    }

    const double h = opts.step_mm;
    while (state.path_length - start.path_length <= opts.max_length_mm) {
        const double n0 = std::sqrt(medium.sample(state.position).eps);
        const Optical y0{state.position, state.direction * n0};
        const Optical y1 = rk4(medium, y0, h);
        if (!is_finite(y1.r) || !is_finite(y1.t)) fail_non_finite(state);

        if (norm(y1.r) > R) {
            double lo = 0.0;
            double hi = h;
            Optical at_lo = y0;
            while (hi - lo > opts.exit_tolerance_mm) {
                const double mid = 0.5 * (lo + hi);
                const Optical ym = rk4(medium, y0, mid);
                if (norm(ym.r) > R) {
                    hi = mid;
                } else {
                    lo = mid;
                    at_lo = ym;
                }
            }
            // Close the remaining sub-tolerance gap with a straight segment onto the sphere.
            const Vec3 u = normalized(at_lo.t);
            const double b = dot(at_lo.r, u);
            const double c = norm2(at_lo.r) - R * R;
            const double t = std::max(0.0, -b + std::sqrt(std::max(0.0, b * b - c)));
            RayState exit{at_lo.r + u * t, u, state.path_length + lo + t};
            path.samples.push_back(exit);
            path.exit_state = exit;
            return path;
        }

        state = {y1.r, normalized(y1.t), state.path_length + h};
        if (opts.keep_samples) path.samples.push_back(state);
    }
    return path;  // trapped
}

BeamStats beam_metrics(const std::vector<RayPath>& paths) {
    BeamStats stats;
    stats.n_rays = static_cast<int>(paths.size());
    Vec3 sum{};
    int exited = 0;
    for (const auto& p : paths) {
        if (p.trapped()) continue;
        sum += p.exit_state->direction;
        ++exited;
    }
    if (exited == 0) throw DegenerateBeamError("beam_metrics: every ray is trapped");
    stats.trapped_fraction = static_cast<double>(paths.size() - static_cast<std::size_t>(exited)) /
                             static_cast<double>(paths.size());
    stats.mean_exit_direction = normalized(sum);
    double sq = 0.0;
    for (const auto& p : paths) {
        if (p.trapped()) continue;
        const double a = angle_between(p.exit_state->direction, stats.mean_exit_direction);
        sq += a * a;
    }
    stats.angular_spread_rms_deg = rad_to_deg(std::sqrt(sq / exited));
    return stats;
}

std::vector<Vec3> cone_directions(const Vec3& axis, double cone_half_angle_deg, int n_rays) {
    if (n_rays < 1) throw DomainError("cone_directions: need at least one ray");
    const Vec3 w = normalized(axis);
    const Vec3 helper = std::abs(w.x) < 0.9 ? Vec3{1, 0, 0} : Vec3{0, 1, 0};
    const Vec3 u = normalized(cross(helper, w));
    const Vec3 v = cross(w, u);

    std::vector<Vec3> dirs;
    dirs.reserve(static_cast<std::size_t>(n_rays));
    if (n_rays == 1) {
        dirs.push_back(w);
        return dirs;
    }
    const double cos_max = std::cos(deg_to_rad(cone_half_angle_deg));
    const double golden = std::numbers::pi * (3.0 - std::sqrt(5.0));
    for (int i = 0; i < n_rays; ++i) {
        const double c = 1.0 - (1.0 - cos_max) * (i + 0.5) / n_rays;
        const double s = std::sqrt(std::max(0.0, 1.0 - c * c));
        const double phi = golden * i;
        dirs.push_back(normalized(w * c + u * (s * std::cos(phi)) + v * (s * std::sin(phi))));
    }
    return dirs;
}

BundleResult trace_bundle(const Medium& medium, const Vec3& feed_position, double cone_half_angle_deg,
                          int n_rays, const TraceOptions& opts) {
    if (n_rays < 1) throw DomainError("trace_bundle: need at least one ray");
    const Vec3 axis = norm2(feed_position) > 0.0 ? -feed_position : Vec3{0, 0, 1};
    BundleResult result;
    result.paths.reserve(static_cast<std::size_t>(n_rays));
    for (const Vec3& dir : cone_directions(axis, cone_half_angle_deg, n_rays)) {
        result.paths.push_back(trace_ray(medium, {feed_position, dir, 0.0}, opts));
    }
    result.stats = beam_metrics(result.paths);
    return result;
}

Vec3 sector_boresight(double az_deg) {
    const double a = deg_to_rad(az_deg);
    return {0.0, std::sin(a), std::cos(a)};
}

Vec3 sector_feed(double az_deg, double radius_mm) { return sector_boresight(az_deg) * (-radius_mm); }

double bouguer_invariant(const Medium& medium, const RayState& state) {
    const double n = std::sqrt(medium.sample(state.position).eps);
    return n * norm(cross(state.position, state.direction));
}

}  // namespace lunatrack::raytrace
