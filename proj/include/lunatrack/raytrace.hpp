#pragma once

// Geometric ray tracing through gradient-index media.
//
// Rays obey d/ds (n dr/ds) = grad n, integrated in arc length with classical
// RK4 on the state (r, n*u). The direction is renormalised after every step.
// All media are confined to a sphere of radius R centred at the origin; outside
// it the medium is vacuum and rays travel straight.

#include <optional>
#include <stdexcept>
#include <vector>

#include "lunatrack/lens.hpp"
#include "lunatrack/vec3.hpp"

namespace lunatrack::raytrace {

struct EpsSample {
    double eps{1.0};
    Vec3 grad{};
};

class Medium {
public:
    virtual ~Medium() = default;
    virtual EpsSample sample(const Vec3& p_mm) const = 0;
    virtual double radius() const = 0;
};

/// eps = n^2 = 2 - (r/R)^2 inside the sphere.
class ClassicalLuneburg final : public Medium {
public:
    explicit ClassicalLuneburg(double radius_mm);
    EpsSample sample(const Vec3& p) const override;
    double radius() const override { return radius_; }

private:
    double radius_;
};

class UniformMedium final : public Medium {
public:
    UniformMedium(double eps, double radius_mm) : eps_(eps), radius_(radius_mm) {}
    EpsSample sample(const Vec3& p) const override;
    double radius() const override { return radius_; }

private:
    double eps_;
    double radius_;
};

/// Trilinear interpolation of a voxel field; gradient by central differences
/// of the interpolant. Points outside the voxel-centre box read as vacuum.
class VoxelMedium final : public Medium {
public:
    explicit VoxelMedium(const lens::PermittivityField& field);
    EpsSample sample(const Vec3& p) const override;
    double radius() const override { return field_.lens_radius(); }

    double interpolate(const Vec3& p) const;

private:
    const lens::PermittivityField& field_;
};

struct RayState {
    Vec3 position;
    Vec3 direction;
    double path_length{0.0};
};

struct RayPath {
    std::vector<RayState> samples;
    /// Boundary crossing where the ray left the lens; empty when trapped.
    std::optional<RayState> exit_state;

    bool trapped() const { return !exit_state.has_value(); }
};

struct TraceOptions {
    double step_mm{0.1};
    double max_length_mm{1000.0};
    /// Bisection tolerance for the exit crossing.
    double exit_tolerance_mm{1e-3};
    /// When false only the first sample is kept (bundles do not need paths).
    bool keep_samples{true};
};

RayPath trace_ray(const Medium& medium, const RayState& start, const TraceOptions& opts = {});

struct BeamStats {
    Vec3 mean_exit_direction{};
    double angular_spread_rms_deg{0.0};
    double trapped_fraction{0.0};
    int n_rays{0};
};

struct DegenerateBeamError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

BeamStats beam_metrics(const std::vector<RayPath>& paths);

/// Launch directions spread over a cone of `cone_half_angle_deg` around `axis`
/// with equal solid angle per ray (golden-angle spiral).
std::vector<Vec3> cone_directions(const Vec3& axis, double cone_half_angle_deg, int n_rays);

struct BundleResult {
    BeamStats stats;
    std::vector<RayPath> paths;
};

/// Rays from a feed point toward the lens centre.
BundleResult trace_bundle(const Medium& medium, const Vec3& feed_position, double cone_half_angle_deg,
                          int n_rays, const TraceOptions& opts = {});

/// Beam-plane boresight of a sector at azimuth `az_deg`: (0, sin az, cos az).
Vec3 sector_boresight(double az_deg);

/// Feed on the lens surface opposite the sector's boresight.
Vec3 sector_feed(double az_deg, double radius_mm);

/// n(r) r sin(phi): conserved along rays in spherically symmetric media.
double bouguer_invariant(const Medium& medium, const RayState& state);

}  // namespace lunatrack::raytrace
