#include "rydlens/focal_field.hpp"

#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <complex>
#include <vector>

#include "rydlens/constants.hpp"
#include "rydlens/lens_design.hpp"

using namespace rydlens;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace {

constexpr double kFreq = 3.5e9;

LensSpec bench_spec() { return LensSpec::make(0.196, kFreq, 0.014, 2.99); }

/// Desk-scale ideal focusing screen: D = 4.5 wavelengths, f/D = 0.5.
struct DeskAperture {
    double wavelength;
    double diameter;
    double focal;
    std::vector<AperturePatch> patches;
};

DeskAperture desk_aperture() {
    DeskAperture a;
    a.wavelength = constants::c0 / 3.6e9;
    a.diameter = 4.5 * a.wavelength;
    a.focal = 0.5 * a.diameter;
    a.patches = focused_disc_aperture(a.diameter, a.focal, a.wavelength / 8.0);
    return a;
}

}  // namespace

TEST_CASE("transverse current magnitude follows the double cross product", "[focal_field]") {
    CHECK_THAT(transverse_current_magnitude({0, 0, 1}, {2, 0, 0}), WithinRel(2.0, 1e-12));
    CHECK_THAT(transverse_current_magnitude({0, 0, 1}, {0, 0, 3}), WithinAbs(0.0, 1e-12));
    // 45 degrees: |s x (s x J)| = |J| sin(angle).
    const Vec3 s = Vec3{0, 1, 1}.normalized();
    CHECK_THAT(transverse_current_magnitude(s, {0, 0, 5}),
               WithinRel(5.0 * std::sin(constants::pi / 4.0), 1e-12));
    // Non-normalized direction input is normalized internally.
    CHECK_THAT(transverse_current_magnitude({0, 0, 7}, {2, 0, 0}), WithinRel(2.0, 1e-12));
}

TEST_CASE("ray-optics focal amplitude obeys the quarter-power scaling", "[focal_field]") {
    const LensSpec spec = bench_spec();
    const double R = spec.radius_R;

    // Against the independently assembled closed form at rho = 0.
    const double k = 2.0 * constants::pi / spec.wavelength;
    const double e0 = k * constants::eta0 / (4.0 * constants::pi * R);
    CHECK_THAT(analytic_focal_amplitude(0.0, spec, 1.0), WithinRel(e0, 1e-12));

    // Off-center growth: E(rho)/E(0) = (R^2/(R^2 - rho^2))^(1/4).
    const double ratio =
        analytic_focal_amplitude(0.9 * R, spec, 1.0) / analytic_focal_amplitude(0.0, spec, 1.0);
    CHECK_THAT(ratio, WithinRel(std::pow(1.0 / 0.19, 0.25), 1e-9));
    CHECK_THAT(ratio, WithinAbs(1.5146476, 1e-6));

    // Linear in the transverse current.
    CHECK_THAT(analytic_focal_amplitude(0.05, spec, 3.0),
               WithinRel(3.0 * analytic_focal_amplitude(0.05, spec, 1.0), 1e-12));

    // Vector overload applies the transverse projection.
    CHECK_THAT(analytic_focal_amplitude(0.05, spec, {0, 0, 1}, {2, 0, 0}),
               WithinRel(analytic_focal_amplitude(0.05, spec, 2.0), 1e-12));

    CHECK_THROWS_AS(analytic_focal_amplitude(-0.01, spec, 1.0), DomainError);
    CHECK_THROWS_AS(analytic_focal_amplitude(R, spec, 1.0), DomainError);
    CHECK_THROWS_AS(analytic_focal_amplitude(1.5 * R, spec, 1.0), DomainError);
}

TEST_CASE("huygens sum reduces to the single-source kernel", "[focal_field]") {
    const double wl = 0.085;
    const double k = 2.0 * constants::pi / wl;

    AperturePatch p;
    p.center = {0.01, -0.02, 0.0};
    p.area = 3e-4;
    p.current_J0 = {0.7, 0.3};
    p.phase_psi = 0.013;
    const Vec3 obs{0.05, 0.04, 0.30};

    const std::vector<AperturePatch> one{p};
    const double d = (obs - p.center).norm();
    const std::complex<double> expected =
        p.current_J0 * (p.area / d) *
        std::exp(std::complex<double>{0.0, k * (p.phase_psi + d)});
    const std::complex<double> got = huygens_field(one, obs, wl);
    CHECK_THAT(std::abs(got - expected), WithinAbs(0.0, 1e-12 * std::abs(expected)));

    // Linearity in the patch current.
    AperturePatch doubled = p;
    doubled.current_J0 *= 2.0;
    const std::vector<AperturePatch> two{doubled};
    CHECK_THAT(std::abs(huygens_field(two, obs, wl)), WithinRel(2.0 * std::abs(got), 1e-12));

    CHECK_THROWS_AS(huygens_field(one, p.center, wl), SingularDistanceError);
    CHECK_THROWS_AS(huygens_field(std::vector<AperturePatch>{}, obs, wl), DomainError);
    CHECK_THROWS_AS(huygens_field(one, obs, 0.0), DomainError);
}

TEST_CASE("ideal focusing screen reproduces scalar diffraction", "[focal_field]") {
    const DeskAperture a = desk_aperture();
    const Vec3 focus{0, 0, a.focal};

    // On-axis focal gain against the closed-form Fresnel integral over the
    // disc: gamma = (2 pi / lambda) (sqrt(f^2 + D^2/4) - f).
    const double gamma_expect =
        2.0 * constants::pi / a.wavelength *
        (std::sqrt(a.focal * a.focal + a.diameter * a.diameter / 4.0) - a.focal);
    const GainEstimate g = simulated_focusing_gain(a.patches, focus, a.wavelength);
    CHECK(g.source == GainEstimate::Source::simulated);
    CHECK_THAT(g.gamma_linear, WithinRel(gamma_expect, 0.06));

    // The focal point outshines nearby off-axis points.
    const double at_focus = std::abs(huygens_field(a.patches, focus, a.wavelength));
    const Vec3 off{0.35 * a.wavelength, 0.0, a.focal};
    CHECK(at_focus > std::abs(huygens_field(a.patches, off, a.wavelength)));

    // x/y symmetry of the pattern.
    const Vec3 px{0.2 * a.wavelength, 0, a.focal}, py{0, 0.2 * a.wavelength, a.focal};
    CHECK_THAT(std::abs(huygens_field(a.patches, px, a.wavelength)),
               WithinRel(std::abs(huygens_field(a.patches, py, a.wavelength)), 1e-6));
}

TEST_CASE("small-aperture focus sits inside the nominal focal distance", "[focal_field]") {
    const DeskAperture a = desk_aperture();

    // Axial scan: at a Fresnel number of ~2, the field maximum falls well
    // short of the geometric focus.
    ScanRange zr{0.45 * a.focal, 1.2 * a.focal, a.focal / 200.0};
    const auto axial = field_scan(a.patches, Axis::z, zr, a.wavelength);
    const FieldSample& peak = peak_sample(axial);
    CHECK(peak.position.z > 0.55 * a.focal);
    CHECK(peak.position.z < 0.85 * a.focal);

    // Transverse intensity width at the axial peak plane: near the Airy
    // closed form 1.03 lambda f/D, biased a few percent wide.
    ScanRange xr{-1.2 * a.wavelength, 1.2 * a.wavelength, a.wavelength / 100.0};
    const auto cut =
        field_scan(a.patches, Axis::x, xr, a.wavelength, {0, 0, peak.position.z});
    const double fwhm = scan_fwhm(cut, Axis::x);
    CHECK(fwhm / a.wavelength > 0.44);
    CHECK(fwhm / a.wavelength < 0.62);
}

TEST_CASE("axis scans are ordered with dB bookkeeping", "[focal_field]") {
    const DeskAperture a = desk_aperture();
    ScanRange r{-0.02, 0.02, 0.002};
    const auto scan = field_scan(a.patches, Axis::x, r, a.wavelength, {0, 0, a.focal}, 2.0);
    REQUIRE(scan.size() == 21);
    for (std::size_t i = 1; i < scan.size(); ++i)
        CHECK(scan[i].position.x > scan[i - 1].position.x);
    for (const auto& s : scan)
        CHECK_THAT(s.magnitude_db, WithinAbs(20.0 * std::log10(std::abs(s.amplitude) / 2.0), 1e-9));

    CHECK_THROWS_AS(field_scan(a.patches, Axis::x, {0., 1., 0.}, a.wavelength), DomainError);
    CHECK_THROWS_AS(field_scan(a.patches, Axis::x, {1., 0., 0.1}, a.wavelength), DomainError);
}

TEST_CASE("width measurement matches a known profile", "[focal_field]") {
    // Gaussian amplitude: intensity FWHM = 2 sigma sqrt(ln 2).
    const double sigma = 0.004;
    std::vector<FieldSample> scan;
    for (int i = -200; i <= 200; ++i) {
        FieldSample s;
        s.position = {i * 1e-4, 0.0, 0.0};
        s.amplitude = std::exp(-s.position.x * s.position.x / (2.0 * sigma * sigma));
        scan.push_back(s);
    }
    CHECK_THAT(scan_fwhm(scan, Axis::x), WithinRel(2.0 * sigma * std::sqrt(std::log(2.0)), 1e-3));

    // Peak at the scan edge: no bracketed crossing, reported as NaN.
    std::vector<FieldSample> rising;
    for (int i = 0; i <= 20; ++i) {
        FieldSample s;
        s.position = {i * 1e-3, 0.0, 0.0};
        s.amplitude = static_cast<double>(i);
        rising.push_back(s);
    }
    CHECK(std::isnan(scan_fwhm(rising, Axis::x)));

    CHECK_THROWS_AS(scan_fwhm(std::vector<FieldSample>(2), Axis::x), DomainError);
}

TEST_CASE("gain bookkeeping converts to decibels", "[focal_field]") {
    CHECK_THAT(focusing_gain(2.6352, 1.0).gamma_db, WithinAbs(8.42, 0.005));
    CHECK_THAT(focusing_gain(1.0, 1.0).gamma_db, WithinAbs(0.0, 1e-12));
    CHECK_THAT(focusing_gain(0.5, 1.0).gamma_db, WithinAbs(-6.0206, 1e-3));
    CHECK(focusing_gain(2.0, 1.0, GainEstimate::Source::measured).source ==
          GainEstimate::Source::measured);
    CHECK_THROWS_AS(focusing_gain(1.0, 0.0), DomainError);
    CHECK_THROWS_AS(focusing_gain(-1.0, 1.0), DomainError);
}

TEST_CASE("traced lens aperture forms a focusing phase screen", "[focal_field]") {
    const LensSpec spec = bench_spec();
    const double R = spec.radius_R;
    const double pitch = spec.wavelength / 6.0;
    const auto patches = focused_aperture_from_rays(spec, pitch);
    REQUIRE(patches.size() > 100);

    const Vec3 focus{0, 0, R};
    double opl_min = 1e300, opl_max = -1e300;
    for (const auto& p : patches) {
        CHECK((p.center - Vec3{0, 0, 0}).norm() < R);
        CHECK(p.area == pitch * pitch);
        // Screen phase plus the remaining straight run to the focus is the
        // total eikonal, which perfect imaging makes offset-independent.
        const double opl = p.phase_psi + (focus - p.center).norm();
        opl_min = std::min(opl_min, opl);
        opl_max = std::max(opl_max, opl);
    }
    CHECK(opl_max - opl_min < 1e-3 * R);

    // Rotational symmetry: patches at the same radius share one solution.
    const auto find_radius = [&](double x, double y) {
        for (const auto& p : patches)
            if (std::abs(p.center.x - x) < 1e-12 && std::abs(p.center.y - y) < 1e-12)
                return p;
        FAIL("patch not found");
        return patches.front();
    };
    const double u = pitch * 0.5, v = pitch * 2.5;
    const AperturePatch pa = find_radius(u, v);
    const AperturePatch pb = find_radius(v, u);
    CHECK_THAT(pa.phase_psi, WithinAbs(pb.phase_psi, 1e-12 * R));

    CHECK_THROWS_AS(focused_aperture_from_rays(spec, 0.0), DomainError);
}

TEST_CASE("trajectory bundles convert to aperture patches", "[focal_field]") {
    const LensSpec spec = bench_spec();
    const double R = spec.radius_R;

    Ray start;
    start.position = {0.0, 0.0, -1.5 * R};
    start.direction = {0.0, 0.0, 1.0};
    const Trajectory axial = trace_ray(start, spec, 1e-3 * R);

    const std::vector<Trajectory> rays{axial};
    const auto patches = aperture_from_trajectories(rays, spec, 1e-4);
    REQUIRE(patches.size() == 1);
    CHECK_THAT(patches[0].center.norm(), WithinAbs(0.0, 1e-12));
    // Eikonal through the lens minus the straight run from screen to focus.
    const double expected =
        axial.exit_state.optical_path_psi - R;
    CHECK_THAT(patches[0].phase_psi, WithinRel(expected, 1e-9));

    CHECK_THROWS_AS(aperture_from_trajectories(std::vector<Trajectory>{}, spec, 1e-4),
                    DomainError);
    CHECK_THROWS_AS(aperture_from_trajectories(rays, spec, 0.0), DomainError);
}
