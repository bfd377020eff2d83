#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "rydlens/error.hpp"
#include "rydlens/lens_design.hpp"
#include "rydlens/vec3.hpp"

namespace rydlens {

// ---------------------------------------------------------------------------
// Ray state
// ---------------------------------------------------------------------------

struct Ray {
    Vec3 position;
    Vec3 direction;  // unit vector
    double optical_path_psi = 0.0;  // accumulated integral of n ds, meters
};

enum class Termination { exited_sphere, max_steps };

struct Trajectory {
    std::vector<Ray> samples;
    Ray exit_state;
    Termination terminated = Termination::exited_sphere;
    bool entered_lens = false;
};

// ---------------------------------------------------------------------------
// Luneburg index field (continuous profile of the lens sphere)
// ---------------------------------------------------------------------------

namespace detail {

struct LuneburgField {
    Vec3 center;
    double R;

    double index(const Vec3& p) const {
        const double r2 = (p - center).norm2();
        const double R2 = R * R;
        if (r2 >= R2)
            return 1.0;
        return std::sqrt(2.0 - r2 / R2);
    }
    // Analytic gradient: -r_vec / (R^2 n) inside, 0 outside; the boundary
    // takes the one-sided interior value.
    Vec3 gradient(const Vec3& p) const {
        const Vec3 rel = p - center;
        const double r2 = rel.norm2();
        const double R2 = R * R;
        if (r2 > R2)
            return {0, 0, 0};
        const double n = std::sqrt(std::max(2.0 - r2 / R2, 1.0));
        return rel * (-1.0 / (R2 * n));
    }
};

// State for the arc-length ray equation d/ds(n dr/ds) = grad n:
//   r' = u/|u|,  u' = grad n,  psi' = n   with u = n * direction.
struct RayOdeState {
    Vec3 pos;
    Vec3 mom;  // u
    double psi;

    RayOdeState operator+(const RayOdeState& o) const {
        return {pos + o.pos, mom + o.mom, psi + o.psi};
    }
    RayOdeState operator*(double s) const { return {pos * s, mom * s, psi * s}; }
};

inline RayOdeState ray_ode_rhs(const RayOdeState& y, const LuneburgField& field) {
    return {y.mom / y.mom.norm(), field.gradient(y.pos), field.index(y.pos)};
}

inline RayOdeState rk4_step(const RayOdeState& y, double h, const LuneburgField& field) {
    const RayOdeState k1 = ray_ode_rhs(y, field);
    const RayOdeState k2 = ray_ode_rhs(y + k1 * (0.5 * h), field);
    const RayOdeState k3 = ray_ode_rhs(y + k2 * (0.5 * h), field);
    const RayOdeState k4 = ray_ode_rhs(y + k3 * h, field);
    return y + (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);
}

}  // namespace detail

// ---------------------------------------------------------------------------
// trace_ray
// ---------------------------------------------------------------------------

/// Integrates a ray through the continuous Luneburg profile with classical
/// fixed-step 4th-order Runge-Kutta on the arc-length ray equation. The
/// straight vacuum segments before entry (and a missing ray's whole path)
/// are marched at the same step so sample spacing never exceeds `step`.
/// Terminates when the ray leaves the sphere; the final crossing is refined
/// by bisection onto |r| = R.
inline Trajectory trace_ray(const Ray& start, const LensSpec& spec, double step,
                            std::size_t max_steps = 0) {
    if (step <= 0.0)
        throw DomainError("trace_ray: step must be positive");
    spec.validate();

    const detail::LuneburgField field{spec.lattice_origin, spec.radius_R};
    const double R = spec.radius_R;
    const Vec3 dir = start.direction.normalized();

    Trajectory traj;
    auto record = [&traj](const Vec3& p, const Vec3& d, double psi) {
        traj.samples.push_back(Ray{p, d.normalized(), psi});
    };

    // Analytic intersection with the lens sphere from the start point.
    const Vec3 m = start.position - spec.lattice_origin;
    const double b = dir.dot(m);
    const double c = m.norm2() - R * R;
    const double disc = b * b - c;

    record(start.position, dir, start.optical_path_psi);

    const bool starts_outside = c > 0.0;
    double t_entry = 0.0;
    bool misses = false;
    if (starts_outside) {
        if (disc <= 1e-12 * R * R) {
            misses = true;  // miss or grazing tangency: undeviated
        } else {
            t_entry = -b - std::sqrt(disc);
            if (t_entry < 0.0)
                misses = true;  // sphere behind the start point
        }
    }

    Vec3 pos = start.position;
    double psi = start.optical_path_psi;

    if (misses) {
        // Straight line to closest approach plus one radius.
        const double span = std::max(-b, 0.0) + R;
        double s = 0.0;
        while (s + step < span) {
            s += step;
            record(start.position + dir * s, dir, psi + s);
        }
        record(start.position + dir * span, dir, psi + span);
        traj.exit_state = traj.samples.back();
        traj.terminated = Termination::exited_sphere;
        return traj;
    }

    // Vacuum march up to the entry point (n = 1, psi grows with distance).
    if (starts_outside) {
        double s = 0.0;
        while (s + step < t_entry) {
            s += step;
            record(start.position + dir * s, dir, psi + s);
        }
        pos = start.position + dir * t_entry;
        psi += t_entry;
        record(pos, dir, psi);
    }
    traj.entered_lens = true;

    if (max_steps == 0) {
        const double budget = t_entry + 8.0 * R;
        max_steps = static_cast<std::size_t>(budget / step) + 64;
    }

    detail::RayOdeState y{pos, dir * field.index(pos), psi};
    bool inside = true;
    for (std::size_t it = traj.samples.size(); it < max_steps; ++it) {
        detail::RayOdeState y_next = detail::rk4_step(y, step, field);
        const bool next_inside = (y_next.pos - spec.lattice_origin).norm2() < R * R;
        if (inside && !next_inside) {
            // Bisect the final step onto the sphere surface.
            double lo = 0.0, hi = step;
            for (int k = 0; k < 64 && (hi - lo) > 1e-16 * R; ++k) {
                const double mid = 0.5 * (lo + hi);
                const detail::RayOdeState ym = detail::rk4_step(y, mid, field);
                ((ym.pos - spec.lattice_origin).norm2() >= R * R ? hi : lo) = mid;
            }
            y = detail::rk4_step(y, hi, field);
            record(y.pos, y.mom, y.psi);
            traj.exit_state = traj.samples.back();
            traj.terminated = Termination::exited_sphere;
            return traj;
        }
        y = y_next;
        inside = next_inside;
        record(y.pos, y.mom, y.psi);
    }
    traj.exit_state = traj.samples.back();
    traj.terminated = Termination::max_steps;
    return traj;
}

// ---------------------------------------------------------------------------
// focus_parallel_bundle
// ---------------------------------------------------------------------------

struct BundleFocus {
    Vec3 focus_point;       // centroid of exit-surface crossings
    double rms_spread = 0;  // RMS distance of crossings from the centroid
    bool no_focus = false;  // spread exceeds the lens radius
    std::vector<Vec3> crossings;
};

/// Traces a parallel bundle at the given transverse offsets and reports the
/// centroid and RMS spread of the exit-surface crossings. For the ideal
/// Luneburg profile the crossings cluster at the antipodal surface point
/// along `direction`. Rays whose offset exceeds R travel straight; a bundle
/// of such rays yields spread > R and the no_focus flag.
inline BundleFocus focus_parallel_bundle(const Vec3& direction, std::span<const double> offsets,
                                         const LensSpec& spec, double step) {
    if (offsets.size() < 3)
        throw InsufficientBundleError("focus_parallel_bundle: need at least 3 rays");
    const Vec3 dir = direction.normalized();
    const Vec3 lateral = perpendicular_unit(dir);
    const double R = spec.radius_R;

    BundleFocus result;
    result.crossings.reserve(offsets.size());
    for (double off : offsets) {
        Ray start;
        start.position = spec.lattice_origin - dir * (1.5 * R) + lateral * off;
        start.direction = dir;
        const Trajectory traj = trace_ray(start, spec, step);
        result.crossings.push_back(traj.exit_state.position);
    }

    Vec3 centroid{0, 0, 0};
    for (const auto& p : result.crossings)
        centroid += p;
    centroid = centroid / static_cast<double>(result.crossings.size());

    double sum2 = 0.0;
    for (const auto& p : result.crossings)
        sum2 += (p - centroid).norm2();
    result.focus_point = centroid;
    result.rms_spread = std::sqrt(sum2 / static_cast<double>(result.crossings.size()));
    result.no_focus = result.rms_spread > R;
    return result;
}

}  // namespace rydlens
