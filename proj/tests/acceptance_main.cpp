// Acceptance gate for the grin-rydberg toolkit. Each check exercises one
// load-bearing behaviour end to end and prints a single PASS/FAIL line;
// the binary exits 0 only when every check passes. Runtime limits are part
// of the pass conditions where stated.

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rydlens/config.hpp"
#include "rydlens/focal_field.hpp"
#include "rydlens/io.hpp"
#include "rydlens/lens_design.hpp"
#include "rydlens/pipeline.hpp"
#include "rydlens/ray_trace.hpp"
#include "rydlens/rydberg.hpp"
#include "rydlens/stl_mesh.hpp"

using namespace rydlens;
namespace fs = std::filesystem;

namespace {

struct CheckResult {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* pattern, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof(buf), pattern, a, b, c);
    return buf;
}

double rel_err(double value, double reference) {
    return std::abs(value - reference) / std::abs(reference);
}

// --- 1. A parallel bundle exits clustered at the antipodal surface point ---

CheckResult parallel_bundle_focus() {
    const LensSpec spec = LensSpec::make(0.196, 3.5e9, 0.014, 2.99);
    const double R = spec.radius_R;

    std::vector<double> offsets;
    for (int i = 0; i <= 10; ++i)
        offsets.push_back((-0.5 + 0.1 * i) * R);

    const auto t0 = std::chrono::steady_clock::now();
    const BundleFocus bundle = focus_parallel_bundle({0, 0, 1}, offsets, spec, 1e-3 * R);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const Vec3 antipode = spec.lattice_origin + Vec3{0, 0, R};
    double sum_sq = 0.0;
    for (const Vec3& hit : bundle.crossings)
        sum_sq += (hit - antipode).norm2();
    const double rms = std::sqrt(sum_sq / static_cast<double>(bundle.crossings.size()));

    CheckResult r;
    r.pass = !bundle.no_focus && bundle.crossings.size() == 11 && rms <= 1e-3 * R && secs < 5.0;
    r.detail = fmt("rms/R = %.2e (limit 1e-03), %.2f s (limit 5 s)", rms / R, secs);
    return r;
}

// --- 2. Focal-surface amplitude follows the quarter-power radial law ---

CheckResult focal_surface_amplitude_scaling() {
    const LensSpec spec = LensSpec::make(0.196, 3.5e9, 0.014, 2.99);
    const double ratio = analytic_focal_amplitude(0.9 * spec.radius_R, spec, 1.0) /
                         analytic_focal_amplitude(0.0, spec, 1.0);
    const double oracle = std::pow(1.0 / 0.19, 0.25);
    const double err = rel_err(ratio, oracle);

    CheckResult r;
    r.pass = err <= 1e-9;
    r.detail = fmt("|E(0.9R)|/|E(0)| = %.10f, relative error %.2e (limit 1e-09)", ratio, err);
    return r;
}

// --- 3. The full 392 mm lattice designs with realizable, monotone cells ---

CheckResult lattice_realizability() {
    const auto t0 = std::chrono::steady_clock::now();
    const LensLattice lattice = discretize_lens(LensSpec::make(0.196, 3.5e9, 0.014, 2.99));
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    bool fractions_ok = true;
    for (const UnitCell& cell : lattice.cells)
        fractions_ok = fractions_ok && cell.fill_fraction_f >= 0.0 && cell.fill_fraction_f <= 0.126;

    std::vector<const UnitCell*> by_radius;
    by_radius.reserve(lattice.cells.size());
    for (const UnitCell& cell : lattice.cells)
        by_radius.push_back(&cell);
    std::sort(by_radius.begin(), by_radius.end(),
              [](const UnitCell* a, const UnitCell* b) { return a->radial_r < b->radial_r; });
    bool monotone = true;
    for (std::size_t i = 1; i < by_radius.size(); ++i)
        if (by_radius[i]->radial_r > by_radius[i - 1]->radial_r + 1e-12)
            monotone = monotone &&
                       by_radius[i]->target_index_n <= by_radius[i - 1]->target_index_n + 1e-12;

    CheckResult r;
    r.pass = lattice.cells.size() == 21952 && fractions_ok && monotone && secs < 1.0;
    r.detail = fmt("cells = %.0f (want 21952), fill in range and radially monotone, %.3f s (limit 1 s)",
                   static_cast<double>(lattice.cells.size()), secs);
    if (!fractions_ok)
        r.detail += " [fill fraction out of range]";
    if (!monotone)
        r.detail += " [index not monotone]";
    return r;
}

// --- 4. Simulated beam waist matches the Airy width for an f/D = 0.5 disc ---

CheckResult beam_waist_vs_airy() {
    const auto t0 = std::chrono::steady_clock::now();
    const double freq = 3.6e9;
    const double lambda = constants::c0 / freq;
    const double R = 2.25 * lambda;  // aperture D = 4.5 lambda focused at f = R
    const LensSpec spec = LensSpec::make(R, freq, lambda / 8.0, 2.99);

    const std::vector<AperturePatch> patches = focused_aperture_from_rays(spec, lambda / 8.0);

    // Axial scan locates the true (diffraction-shifted) peak plane.
    const std::vector<FieldSample> zscan =
        field_scan(patches, Axis::z, {0.5 * R, 1.2 * R, lambda / 64.0}, lambda);
    const double peak_z = peak_sample(zscan).position.z;

    const std::vector<FieldSample> xscan = field_scan(
        patches, Axis::x, {-0.75 * lambda, 0.75 * lambda, lambda / 256.0}, lambda, {0, 0, peak_z});
    const double fwhm = scan_fwhm(xscan, Axis::x);
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    const double airy = 1.03 * lambda * 0.5;  // f/D = 0.5
    const double err = rel_err(fwhm, airy);

    CheckResult r;
    r.pass = std::isfinite(fwhm) && err <= 0.15 && secs < 60.0;
    r.detail = fmt("FWHM = %.1f mm vs 42.9 mm closed form, off by %.1f%% (limit 15%%)", fwhm * 1e3,
                   err * 100.0);
    r.detail += fmt(", peak plane z = %.1f mm, %.1f s (limit 60 s)", peak_z * 1e3, secs);
    return r;
}

// --- 5. Gain bookkeeping: field ratio 2.6352 reads as 8.42 dB ---

CheckResult gain_decibel_bookkeeping() {
    const GainEstimate g = focusing_gain(2.6352, 1.0);
    const double err = std::abs(g.gamma_db - 8.42);

    CheckResult r;
    r.pass = err <= 0.01;
    r.detail = fmt("20 log10(2.6352) = %.4f dB, off by %.4f dB (limit 0.01 dB)", g.gamma_db, err);
    return r;
}

// --- 6. Sensitivity chain: gain cancels exactly; splitting round-trips ---

CheckResult sensitivity_chain_consistency() {
    AtomicTransition tr;
    tr.dipole_moment_mu = 1e-26;
    tr.rf_frequency = 10.5e9;
    tr.label = "acceptance";
    MeasurementConfig mc;
    mc.measurement_time_Tm = 0.25;
    mc.num_measurements_Nm = 16;

    const double bare = min_detectable_field(tr, mc);
    double worst = 0.0;
    for (double gamma : {0.5, 1.0, 2.0, 2.6352, 10.0})
        worst = std::max(worst, rel_err(enhanced_min_field(tr, mc, gamma) * gamma, bare));

    for (double e_field : {1e-6, 1e-3, 0.1, 5.0}) {
        SplittingFit fit;
        fit.delta_f_hz = at_splitting(tr, e_field, 1.0);
        worst = std::max(worst, rel_err(field_from_splitting(fit, tr), e_field));
    }

    CheckResult r;
    r.pass = worst <= 1e-12;
    r.detail = fmt("worst relative error %.2e across gain sweep and field round trip (limit 1e-12)",
                   worst);
    return r;
}

// --- 7. Fitted doublet gain reads 2.00 within 5% for 100 noisy seeds ---

CheckResult doublet_gain_doubling() {
    const auto t0 = std::chrono::steady_clock::now();
    const DetuningGrid grid_without{-30e6, 30e6, 0.1e6};
    const DetuningGrid grid_with{-40e6, 40e6, 0.1e6};

    double worst = 0.0;
    int failures = 0;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        const EitSpectrum without = synth_eit_spectrum(10e6, 2e6, 1.0, 0.02, grid_without, seed);
        const EitSpectrum with = synth_eit_spectrum(20e6, 2e6, 1.0, 0.02, grid_with, seed + 1000);
        const double gamma = gain_from_spectra(with, without).gamma_linear;
        const double err = rel_err(gamma, 2.0);
        worst = std::max(worst, err);
        if (err > 0.05)
            ++failures;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();

    CheckResult r;
    r.pass = failures == 0 && secs < 10.0;
    r.detail = fmt("worst |gamma - 2|/2 = %.3f%% over 100 seeds (limit 5%%), %.1f s (limit 10 s)",
                   worst * 100.0, secs);
    if (failures > 0)
        r.detail += fmt(" [%.0f seeds out of tolerance]", static_cast<double>(failures));
    return r;
}

// --- 8. Byte-stable subcommand outputs and an exact octant mesh partition ---

RunConfig config_from_text(const std::string& text) {
    std::istringstream in(text);
    RunConfig rc;
    rc.raw = Config::parse(in);
    rc.seed = static_cast<unsigned long long>(rc.raw.get_int("seed", 0));
    return rc;
}

std::vector<std::uint8_t> file_bytes(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    const std::string s = ss.str();
    return {s.begin(), s.end()};
}

bool directories_match(const fs::path& a, const fs::path& b, std::string& why) {
    std::vector<fs::path> names;
    for (const auto& entry : fs::recursive_directory_iterator(a))
        if (entry.is_regular_file())
            names.push_back(fs::relative(entry.path(), a));
    std::sort(names.begin(), names.end());
    for (const fs::path& name : names) {
        if (!fs::exists(b / name)) {
            why = "missing on rerun: " + name.string();
            return false;
        }
        if (file_bytes(a / name) != file_bytes(b / name)) {
            why = "differs between runs: " + name.string();
            return false;
        }
    }
    return true;
}

CheckResult determinism_and_mesh_partition() {
    const fs::path root = fs::temp_directory_path() / "grin_rydberg_acceptance";
    fs::remove_all(root);
    fs::create_directories(root);
    std::ostringstream diag;  // keep the gate's own output to the PASS/FAIL lines

    // Reference doublet traces consumed by the fit-driven subcommands.
    const fs::path inputs = root / "inputs";
    if (run_pipeline("eit-synth",
                     config_from_text("eit.gamma = 2\neit.noise_rms = 0.02\nseed = 42\n"), inputs,
                     diag) != 0) {
        return {false, "staging eit-synth failed"};
    }
    const std::string with_path = (inputs / "trace_with.csv").string();
    const std::string without_path = (inputs / "trace_without.csv").string();

    const std::map<std::string, std::string> configs = {
        {"design", "lens.radius_m = 0.056\n"},
        {"trace", "lens.radius_m = 0.056\ntrace.offsets_rel = -0.4, 0, 0.4\n"},
        {"fieldmap", "scan.z_step_m = 2e-3\nscan.x_step_m = 2e-3\n"},
        {"sensitivity", "transition.dipole_moment_cm = 1e-26\nio.trace_with = " + with_path +
                            "\nio.trace_without = " + without_path + "\n"},
        {"eit-synth", "eit.noise_rms = 0.02\nseed = 42\n"},
        {"eit-fit", "transition.dipole_moment_cm = 1e-26\nio.trace = " + without_path + "\n"},
        {"gain", "io.trace_with = " + with_path + "\nio.trace_without = " + without_path + "\n"},
    };

    for (const std::string& sub : subcommands()) {
        const RunConfig rc = config_from_text(configs.at(sub));
        for (const char* round : {"a", "b"})
            if (run_pipeline(sub, rc, root / round / sub, diag) != 0)
                return {false, "subcommand failed: " + sub};
        std::string why;
        if (!directories_match(root / "a" / sub, root / "b" / sub, why))
            return {false, sub + ": " + why};
    }

    // The octant meshes must partition the full mesh triangle for triangle.
    const LensLattice lattice = discretize_lens(LensSpec::make(0.196, 3.5e9, 0.014, 2.99));
    auto full = stl_records(export_stl(lattice));
    std::vector<std::array<std::uint8_t, 50>> merged;
    for (int segment = 0; segment < 8; ++segment) {
        const auto part = stl_records(export_stl(lattice, segment));
        merged.insert(merged.end(), part.begin(), part.end());
    }
    std::sort(full.begin(), full.end());
    std::sort(merged.begin(), merged.end());
    if (merged != full)
        return {false, "octant meshes do not partition the full mesh"};

    CheckResult r;
    r.pass = true;
    r.detail = fmt("7 subcommands byte-stable on rerun; octant meshes partition all %.0f triangles",
                   static_cast<double>(full.size()));
    return r;
}

}  // namespace

int main() {
    struct Entry {
        const char* name;
        CheckResult (*check)();
    };
    const Entry entries[] = {
        {"parallel-bundle-focus", parallel_bundle_focus},
        {"focal-surface-amplitude-scaling", focal_surface_amplitude_scaling},
        {"lattice-realizability", lattice_realizability},
        {"beam-waist-vs-airy", beam_waist_vs_airy},
        {"gain-decibel-bookkeeping", gain_decibel_bookkeeping},
        {"sensitivity-chain-consistency", sensitivity_chain_consistency},
        {"doublet-gain-doubling", doublet_gain_doubling},
        {"determinism-and-mesh-partition", determinism_and_mesh_partition},
    };

    int passed = 0;
    int index = 0;
    for (const Entry& entry : entries) {
        ++index;
        CheckResult result;
        try {
            result = entry.check();
        } catch (const std::exception& e) {
            result.pass = false;
            result.detail = std::string("unexpected exception: ") + e.what();
        }
        std::printf("[%s] %d/8 %-33s %s\n", result.pass ? "PASS" : "FAIL", index, entry.name,
                    result.detail.c_str());
        std::fflush(stdout);
        if (result.pass)
            ++passed;
    }
    std::printf("acceptance: %d/8 checks passed\n", passed);
    return passed == 8 ? 0 : 1;
}
