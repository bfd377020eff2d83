#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <map>
#include <span>
#include <vector>

#include "rydlens/constants.hpp"
#include "rydlens/error.hpp"
#include "rydlens/lens_design.hpp"
#include "rydlens/ray_trace.hpp"
#include "rydlens/vec3.hpp"

namespace rydlens {

// ---------------------------------------------------------------------------
// Types
// ---------------------------------------------------------------------------

/// Equivalent surface-current patch on an aperture. phase_psi is the optical
/// path from the incident wavefront, in meters; a common constant across a
/// patch set is immaterial.
struct AperturePatch {
    Vec3 center;
    double area = 0.0;
    std::complex<double> current_J0{1.0, 0.0};
    Vec3 exit_direction{0, 0, 1};
    double phase_psi = 0.0;
};

struct FieldSample {
    Vec3 position;
    std::complex<double> amplitude;
    double magnitude_db = 0.0;  // 20 log10(|amplitude| / reference)
};

struct GainEstimate {
    enum class Source { simulated, measured };
    double gamma_linear = 1.0;
    double gamma_db = 0.0;
    Source source = Source::simulated;
};

// ---------------------------------------------------------------------------
// Ray-optics focal amplitude
// ---------------------------------------------------------------------------

/// |s x (s x J)| — magnitude of the transverse part of J relative to s.
inline double transverse_current_magnitude(const Vec3& s_hat, const Vec3& j0) {
    const Vec3 s = s_hat.normalized();
    return s.cross(s.cross(j0)).norm();
}

/// Ray-optics focal-field magnitude of the Luneburg lens,
///   |E(rho)| = k eta0 |s x (s x J0)| / (4 pi sqrt(R) (R^2 - rho^2)^(1/4)),
/// with rho the radial offset from the lens center. The expression is the
/// asymptotic result approaching the focal surface and diverges at rho = R;
/// treat it as valid for rho <= R - lambda/4 and use the Huygens sum for
/// quantitative work at the focus itself.
inline double analytic_focal_amplitude(double rho, const LensSpec& spec,
                                       double j0_transverse) {
    const double R = spec.radius_R;
    if (rho < 0.0)
        throw DomainError("analytic_focal_amplitude: negative offset");
    if (rho >= R)
        throw DomainError("analytic_focal_amplitude: formula undefined for rho >= R");
    const double k = 2.0 * constants::pi / spec.wavelength;
    const double denom = 4.0 * constants::pi * std::sqrt(R) * std::pow(R * R - rho * rho, 0.25);
    return k * constants::eta0 * std::abs(j0_transverse) / denom;
}

inline double analytic_focal_amplitude(double rho, const LensSpec& spec, const Vec3& s_hat,
                                       const Vec3& j0) {
    return analytic_focal_amplitude(rho, spec, transverse_current_magnitude(s_hat, j0));
}

// ---------------------------------------------------------------------------
// Discretized Huygens sum
// ---------------------------------------------------------------------------

/// Coherent sum over patches, common constants factored out:
///   sum_j J0_j area_j exp(i k (psi_j + |obs - c_j|)) / |obs - c_j|.
inline std::complex<double> huygens_field(std::span<const AperturePatch> patches,
                                          const Vec3& obs, double wavelength) {
    if (patches.empty())
        throw DomainError("huygens_field: empty patch set");
    if (wavelength <= 0.0)
        throw DomainError("huygens_field: nonpositive wavelength");
    const double k = 2.0 * constants::pi / wavelength;
    std::complex<double> acc{0.0, 0.0};
    for (const auto& p : patches) {
        const double d = (obs - p.center).norm();
        if (d < 1e-12)
            throw SingularDistanceError("huygens_field: observation point on a patch center");
        const double phase = k * (p.phase_psi + d);
        acc += p.current_J0 * (p.area / d) * std::complex<double>{std::cos(phase), std::sin(phase)};
    }
    return acc;
}

enum class Axis { x, y, z };

struct ScanRange {
    double min = 0.0;
    double max = 0.0;
    double step = 0.0;
};

/// Samples the Huygens field along one axis through `through` (the nominal
/// focal point); output ordered by the scanned coordinate.
inline std::vector<FieldSample> field_scan(std::span<const AperturePatch> patches, Axis axis,
                                           const ScanRange& range, double wavelength,
                                           const Vec3& through = {0, 0, 0},
                                           double db_reference = 1.0) {
    if (range.step <= 0.0)
        throw DomainError("field_scan: step must be positive");
    if (range.max < range.min)
        throw DomainError("field_scan: empty range");
    const std::size_t axis_i = static_cast<std::size_t>(axis);
    const std::size_t count =
        static_cast<std::size_t>(std::floor((range.max - range.min) / range.step + 1e-9)) + 1;
    std::vector<FieldSample> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        Vec3 pos = through;
        pos[axis_i] = range.min + static_cast<double>(i) * range.step;
        FieldSample s;
        s.position = pos;
        s.amplitude = huygens_field(patches, pos, wavelength);
        s.magnitude_db = 20.0 * std::log10(std::abs(s.amplitude) / db_reference);
        out.push_back(s);
    }
    return out;
}

/// Linear focusing gain gamma = |E_with_lens| / |E_incident| with its dB view
/// (field convention, 20 log10).
inline GainEstimate focusing_gain(double e_with_lens, double e_incident,
                                  GainEstimate::Source source = GainEstimate::Source::simulated) {
    if (e_incident <= 0.0)
        throw DomainError("focusing_gain: incident field must be positive");
    if (e_with_lens < 0.0)
        throw DomainError("focusing_gain: negative field magnitude");
    GainEstimate g;
    g.gamma_linear = e_with_lens / e_incident;
    g.gamma_db = 20.0 * std::log10(g.gamma_linear);
    g.source = source;
    return g;
}

// ---------------------------------------------------------------------------
// Aperture construction
// ---------------------------------------------------------------------------

/// Ideal focused disc: uniform J0 patches on a disc of diameter `diameter`
/// in the plane through `disc_center` perpendicular to `axis`, with phases
/// converging on the focal point at distance `focal_distance` along `axis`.
inline std::vector<AperturePatch> focused_disc_aperture(double diameter, double focal_distance,
                                                        double pitch,
                                                        const Vec3& disc_center = {0, 0, 0},
                                                        const Vec3& axis = {0, 0, 1}) {
    if (diameter <= 0.0 || focal_distance <= 0.0 || pitch <= 0.0)
        throw DomainError("focused_disc_aperture: nonpositive geometry");
    const Vec3 n = axis.normalized();
    const Vec3 e1 = perpendicular_unit(n);
    const Vec3 e2 = n.cross(e1);
    const Vec3 focus = disc_center + n * focal_distance;
    const double radius = 0.5 * diameter;
    const int half = static_cast<int>(std::ceil(radius / pitch));

    std::vector<AperturePatch> patches;
    for (int i = -half; i < half; ++i) {
        for (int j = -half; j < half; ++j) {
            const double u = (i + 0.5) * pitch;
            const double v = (j + 0.5) * pitch;
            if (u * u + v * v > radius * radius)
                continue;
            AperturePatch p;
            p.center = disc_center + e1 * u + e2 * v;
            p.area = pitch * pitch;
            p.current_J0 = {1.0, 0.0};
            p.exit_direction = (focus - p.center).normalized();
            p.phase_psi = -(focus - p.center).norm();
            patches.push_back(p);
        }
    }
    return patches;
}

/// Equivalent phase screen of the lens on its central disc, built from traced
/// rays: each patch carries the eikonal accumulated through the lens,
/// back-propagated from the exit point to the disc. Rays are traced once per
/// distinct offset radius and reused by rotational symmetry.
inline std::vector<AperturePatch> focused_aperture_from_rays(const LensSpec& spec, double pitch,
                                                             const Vec3& direction = {0, 0, 1},
                                                             double trace_step_rel = 1e-3) {
    if (pitch <= 0.0)
        throw DomainError("focused_aperture_from_rays: nonpositive pitch");
    const Vec3 dir = direction.normalized();
    const Vec3 e1 = perpendicular_unit(dir);
    const Vec3 e2 = dir.cross(e1);
    const double R = spec.radius_R;
    const Vec3 focus = spec.lattice_origin + dir * R;
    const double step = trace_step_rel * R;

    struct RadialSolution {
        double psi_exit;     // optical path from the start plane at -1.5 R
        double dir_lateral;  // exit direction, radial component
        double dir_axial;    // exit direction, axial component
    };
    std::map<double, RadialSolution> cache;
    auto solve_radius = [&](double r_off) {
        auto it = cache.find(r_off);
        if (it != cache.end())
            return it->second;
        Ray start;
        start.position = spec.lattice_origin - dir * (1.5 * R) + e1 * r_off;
        start.direction = dir;
        const Trajectory traj = trace_ray(start, spec, step);
        const Vec3 ed = traj.exit_state.direction;
        RadialSolution sol{traj.exit_state.optical_path_psi, ed.dot(e1), ed.dot(dir)};
        cache.emplace(r_off, sol);
        return sol;
    };

    const int half = static_cast<int>(std::ceil(R / pitch));
    std::vector<AperturePatch> patches;
    for (int i = -half; i < half; ++i) {
        for (int j = -half; j < half; ++j) {
            const double u = (i + 0.5) * pitch;
            const double v = (j + 0.5) * pitch;
            const double r_off = std::hypot(u, v);
            if (r_off >= R)
                continue;
            const RadialSolution sol = solve_radius(r_off);
            const Vec3 radial = r_off > 0.0 ? (e1 * u + e2 * v) / r_off : e1;
            AperturePatch p;
            p.center = spec.lattice_origin + e1 * u + e2 * v;
            p.area = pitch * pitch;
            p.current_J0 = {1.0, 0.0};
            p.exit_direction = radial * sol.dir_lateral + dir * sol.dir_axial;
            p.phase_psi = sol.psi_exit - (focus - p.center).norm();
            patches.push_back(p);
        }
    }
    return patches;
}

/// Phase-screen patches from an already-traced bundle. Rays must share the
/// propagation direction; each ray contributes one patch at its transverse
/// offset on the lens central disc.
inline std::vector<AperturePatch> aperture_from_trajectories(std::span<const Trajectory> rays,
                                                             const LensSpec& spec,
                                                             double patch_area) {
    if (rays.empty())
        throw DomainError("aperture_from_trajectories: no rays");
    if (patch_area <= 0.0)
        throw DomainError("aperture_from_trajectories: nonpositive patch area");
    const Vec3 dir = rays.front().samples.front().direction;
    const Vec3 focus = spec.lattice_origin + dir * spec.radius_R;

    std::vector<AperturePatch> patches;
    patches.reserve(rays.size());
    for (const auto& traj : rays) {
        if (traj.samples.empty())
            throw DomainError("aperture_from_trajectories: empty trajectory");
        const Ray& start = traj.samples.front();
        // Offset of the incident ray from the lens axis, on the central disc.
        const Vec3 rel = start.position - spec.lattice_origin;
        const Vec3 off = rel - dir * rel.dot(dir);
        // Reference all eikonals to the common start plane.
        const double plane_shift = rel.dot(dir) - (rays.front().samples.front().position -
                                                   spec.lattice_origin)
                                                      .dot(dir);
        AperturePatch p;
        p.center = spec.lattice_origin + off;
        p.area = patch_area;
        p.current_J0 = {1.0, 0.0};
        p.exit_direction = traj.exit_state.direction;
        p.phase_psi = traj.exit_state.optical_path_psi - plane_shift - (focus - p.center).norm();
        patches.push_back(p);
    }
    return patches;
}

/// Focusing gain predicted by the scalar Huygens model: the patch sum at the
/// observation point divided by the plane-wave level of the same screen,
/// |J0_ref| lambda (Fresnel normalization of the free-space kernel).
inline GainEstimate simulated_focusing_gain(std::span<const AperturePatch> patches,
                                            const Vec3& obs, double wavelength,
                                            double j0_ref = 1.0) {
    if (j0_ref <= 0.0)
        throw DomainError("simulated_focusing_gain: nonpositive reference current");
    const double e_with = std::abs(huygens_field(patches, obs, wavelength));
    return focusing_gain(e_with / wavelength, j0_ref, GainEstimate::Source::simulated);
}

// ---------------------------------------------------------------------------
// Scan analysis helpers
// ---------------------------------------------------------------------------

inline const FieldSample& peak_sample(std::span<const FieldSample> scan) {
    if (scan.empty())
        throw DomainError("peak_sample: empty scan");
    std::size_t best = 0;
    for (std::size_t i = 1; i < scan.size(); ++i)
        if (std::abs(scan[i].amplitude) > std::abs(scan[best].amplitude))
            best = i;
    return scan[best];
}

/// Full width at half maximum of |E|^2 along the scanned axis, with linear
/// interpolation at the half-power crossings. NaN when a crossing is not
/// bracketed inside the scan.
inline double scan_fwhm(std::span<const FieldSample> scan, Axis axis) {
    if (scan.size() < 3)
        throw DomainError("scan_fwhm: need at least 3 samples");
    const std::size_t ai = static_cast<std::size_t>(axis);
    std::vector<double> coord(scan.size()), inten(scan.size());
    for (std::size_t i = 0; i < scan.size(); ++i) {
        coord[i] = scan[i].position[ai];
        inten[i] = std::norm(scan[i].amplitude);
    }
    std::size_t ipk = 0;
    for (std::size_t i = 1; i < scan.size(); ++i)
        if (inten[i] > inten[ipk])
            ipk = i;
    const double half = 0.5 * inten[ipk];

    auto cross = [&](bool right) -> double {
        std::size_t i = ipk;
        while (true) {
            const std::size_t j = right ? i + 1 : i - 1;
            if ((right && j >= scan.size()) || (!right && i == 0))
                return std::nan("");
            if (inten[j] <= half) {
                const double t = (inten[i] - half) / (inten[i] - inten[j]);
                return coord[i] + t * (coord[j] - coord[i]);
            }
            i = j;
        }
    };
    const double lo = cross(false), hi = cross(true);
    return hi - lo;
}

}  // namespace rydlens
