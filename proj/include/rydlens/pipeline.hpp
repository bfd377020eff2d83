#pragma once

#include <cstdlib>
#include <filesystem>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "rydlens/config.hpp"
#include "rydlens/focal_field.hpp"
#include "rydlens/io.hpp"
#include "rydlens/lens_design.hpp"
#include "rydlens/ray_trace.hpp"
#include "rydlens/rydberg.hpp"
#include "rydlens/stl_mesh.hpp"

namespace rydlens {

// ---------------------------------------------------------------------------
// Logging (stderr; level from the GRIN_RYDBERG_LOG environment variable:
// quiet | info | debug, default info)
// ---------------------------------------------------------------------------

enum class LogLevel { quiet = 0, info = 1, debug = 2 };

inline LogLevel log_level_from_env() {
    const char* v = std::getenv("GRIN_RYDBERG_LOG");
    if (v == nullptr)
        return LogLevel::info;
    const std::string s(v);
    if (s == "quiet")
        return LogLevel::quiet;
    if (s == "debug")
        return LogLevel::debug;
    return LogLevel::info;
}

namespace pipeline {

inline void log_line(std::ostream& diag, LogLevel level, const std::string& msg) {
    if (log_level_from_env() >= level)
        diag << "[grin-rydberg] " << msg << '\n';
}

// ---------------------------------------------------------------------------
// design: lattice CSV + per-octant STL meshes + full mesh
// ---------------------------------------------------------------------------

inline void run_design(const RunConfig& rc, const std::filesystem::path& out,
                       std::ostream& diag) {
    const LensLattice lattice = discretize_lens(rc.lens());

    {
        std::ostringstream csv;
        write_lattice_csv(lattice, csv);
        write_file(out / "lattice.csv", csv.str());
    }
    write_file(out / "lens_full.stl", export_stl(lattice));
    for (int seg = 0; seg < 8; ++seg)
        write_file(out / ("lens_octant_" + std::to_string(seg) + ".stl"),
                   export_stl(lattice, seg));

    std::ostringstream report;
    report << "cells_total=" << lattice.cells.size() << '\n'
           << "cells_solid=" << lattice.solid_cell_count() << '\n';
    for (int seg = 0; seg < 8; ++seg)
        report << "cells_solid_octant_" << seg << '=' << lattice.solid_cell_count(seg) << '\n';
    double f_max = 0.0, b_max = 0.0;
    for (const auto& c : lattice.cells) {
        f_max = std::max(f_max, c.fill_fraction_f);
        b_max = std::max(b_max, c.fill_param_b);
    }
    report << "fill_max=" << format_g9(f_max) << '\n'
           << "b_max_mm=" << format_g9(b_max * 1e3) << '\n';
    write_file(out / "design_report.txt", report.str());
    log_line(diag, LogLevel::info,
             "design: " + std::to_string(lattice.solid_cell_count()) + " solid cells of " +
                 std::to_string(lattice.cells.size()));
}

// ---------------------------------------------------------------------------
// trace: trajectory CSV per configured offset (+ bundle focus when >= 3)
// ---------------------------------------------------------------------------

inline void run_trace(const RunConfig& rc, const std::filesystem::path& out,
                      std::ostream& diag) {
    const LensSpec spec = rc.lens();
    const std::vector<double> offsets = rc.trace_offsets_rel();
    const double step = rc.trace_step_rel() * spec.radius_R;
    const Vec3 dir{0, 0, 1};
    const Vec3 lateral = perpendicular_unit(dir);

    for (std::size_t i = 0; i < offsets.size(); ++i) {
        Ray start;
        start.position =
            spec.lattice_origin - dir * (1.5 * spec.radius_R) + lateral * (offsets[i] * spec.radius_R);
        start.direction = dir;
        const Trajectory traj = trace_ray(start, spec, step);
        std::ostringstream csv;
        write_trajectory_csv(traj, csv);
        std::string name = "trajectory.csv";
        if (offsets.size() > 1) {
            std::ostringstream n;
            n << "trajectory_" << std::setw(2) << std::setfill('0') << i << ".csv";
            name = n.str();
        }
        write_file(out / name, csv.str());
    }

    if (offsets.size() >= 3) {
        std::vector<double> abs_offsets;
        for (double o : offsets)
            abs_offsets.push_back(o * spec.radius_R);
        const BundleFocus focus = focus_parallel_bundle(dir, abs_offsets, spec, step);
        std::ostringstream report;
        report << "rays=" << offsets.size() << '\n'
               << "focus_x_mm=" << format_g9(focus.focus_point.x * 1e3) << '\n'
               << "focus_y_mm=" << format_g9(focus.focus_point.y * 1e3) << '\n'
               << "focus_z_mm=" << format_g9(focus.focus_point.z * 1e3) << '\n'
               << "rms_spread_mm=" << format_g9(focus.rms_spread * 1e3) << '\n'
               << "no_focus=" << (focus.no_focus ? 1 : 0) << '\n';
        write_file(out / "focus_report.txt", report.str());
    }
    log_line(diag, LogLevel::info, "trace: " + std::to_string(offsets.size()) + " ray(s)");
}

// ---------------------------------------------------------------------------
// fieldmap: axial + transverse Huygens scans and a focal report
// ---------------------------------------------------------------------------

struct FieldmapReport {
    double peak_z = 0.0;      // axial position of the field maximum (m)
    double gamma_sim = 1.0;   // simulated focusing gain at the peak
    double gamma_db = 0.0;
    double fwhm_x = 0.0;      // transverse intensity FWHM at the peak plane (m)
    std::size_t patch_count = 0;
};

inline FieldmapReport run_fieldmap(const RunConfig& rc, const std::filesystem::path& out,
                                   std::ostream& diag) {
    const LensSpec spec = rc.lens();
    const double pitch = rc.aperture_pitch(spec);
    const std::vector<AperturePatch> patches =
        focused_aperture_from_rays(spec, pitch, {0, 0, 1}, rc.trace_step_rel());
    log_line(diag, LogLevel::debug,
             "fieldmap: " + std::to_string(patches.size()) + " aperture patches");

    // dB reference lambda*|J0| makes mag_db read directly as focusing gain.
    const double wl = spec.wavelength;
    ScanRange zr = rc.axial_scan(spec);  // window is given relative to the lens centre
    zr.min += spec.lattice_origin.z;
    zr.max += spec.lattice_origin.z;
    const std::vector<FieldSample> axial =
        field_scan(patches, Axis::z, zr, wl, spec.lattice_origin, wl);
    {
        std::ostringstream csv;
        write_scan_csv(axial, Axis::z, csv);
        write_file(out / "scan_z.csv", csv.str());
    }

    // Transverse cut through the axial field maximum, not the geometric
    // focus: at these aperture sizes (a few wavelengths) the true waist
    // sits measurably inside the nominal focal distance.
    const FieldSample& peak = peak_sample(axial);
    const Vec3 through{spec.lattice_origin.x, spec.lattice_origin.y, peak.position.z};
    ScanRange xr = rc.transverse_scan();  // window is given relative to the axis
    xr.min += spec.lattice_origin.x;
    xr.max += spec.lattice_origin.x;
    const std::vector<FieldSample> transverse =
        field_scan(patches, Axis::x, xr, wl, through, wl);
    {
        std::ostringstream csv;
        write_scan_csv(transverse, Axis::x, csv);
        write_file(out / "scan_x.csv", csv.str());
    }

    FieldmapReport rep;
    rep.patch_count = patches.size();
    rep.peak_z = peak.position.z;
    const GainEstimate gain = simulated_focusing_gain(patches, peak.position, wl);
    rep.gamma_sim = gain.gamma_linear;
    rep.gamma_db = gain.gamma_db;
    rep.fwhm_x = scan_fwhm(transverse, Axis::x);

    std::ostringstream report;
    report << "patches=" << rep.patch_count << '\n'
           << "wavelength_mm=" << format_g9(wl * 1e3) << '\n'
           << "peak_z_mm=" << format_g9(rep.peak_z * 1e3) << '\n'
           << "gamma_sim=" << format_g9(rep.gamma_sim) << '\n'
           << "gamma_sim_db=" << format_db(rep.gamma_db) << '\n'
           << "fwhm_x_mm=" << format_g9(rep.fwhm_x * 1e3) << '\n';

    // Optional measured near-field scan: extract plot-ready axial and
    // transverse profiles next to the simulated ones for comparison.
    if (!rc.scan_path().empty()) {
        const std::vector<ScanRecord> records =
            load_scan(rc.scan_path(), rc.scan_columns());
        const std::vector<ScanRecord> axial_cut = z_cut(records);
        const ScanRecord best = peak_record(records);
        const std::vector<ScanRecord> waist_cut = x_cut(records, best.z_mm);

        auto write_profile = [&](const std::vector<ScanRecord>& cut, const char* coord_name,
                                 double ScanRecord::* coord, const char* file) {
            std::ostringstream csv;
            csv << coord_name << ",amplitude_db\n";
            for (const ScanRecord& r : cut)
                csv << format_g9(r.*coord) << ',' << format_db(r.amplitude_db) << '\n';
            write_file(out / file, csv.str());
        };
        write_profile(axial_cut, "z_mm", &ScanRecord::z_mm, "measured_profile_z.csv");
        write_profile(waist_cut, "x_mm", &ScanRecord::x_mm, "measured_profile_x.csv");

        report << "measured_records=" << records.size() << '\n'
               << "measured_peak_db=" << format_db(best.amplitude_db) << '\n'
               << "measured_peak_z_mm=" << format_g9(best.z_mm) << '\n';
        log_line(diag, LogLevel::info,
                 "fieldmap: ingested " + std::to_string(records.size()) +
                     " measured samples, peak " + format_db(best.amplitude_db) + " dB at z = " +
                     format_g9(best.z_mm) + " mm");
    }
    write_file(out / "fieldmap_report.txt", report.str());
    log_line(diag, LogLevel::info,
             "fieldmap: peak at z = " + format_g9(rep.peak_z * 1e3) + " mm, gain " +
                 format_db(rep.gamma_db) + " dB");
    return rep;
}

// ---------------------------------------------------------------------------
// sensitivity: minimum detectable field table across gain sources
// ---------------------------------------------------------------------------

inline void run_sensitivity(const RunConfig& rc, const std::filesystem::path& out,
                            std::ostream& diag) {
    const AtomicTransition tr = rc.transition();
    const MeasurementConfig mc = rc.measurement();
    const LensSpec spec = rc.lens();
    const double bare = min_detectable_field(tr, mc);

    struct Row {
        std::string source;
        double gamma;
    };
    std::vector<Row> rows;
    rows.push_back({"bare", 1.0});

    if (!rc.trace_with_path().empty() && !rc.trace_without_path().empty()) {
        const EitSpectrum with = load_trace(rc.trace_with_path(), rc.trace_columns());
        const EitSpectrum without = load_trace(rc.trace_without_path(), rc.trace_columns());
        rows.push_back({"fitted", gain_from_spectra(with, without).gamma_linear});
    } else {
        log_line(diag, LogLevel::info,
                 "sensitivity: no trace pair configured, skipping the fitted-gain row");
    }

    // Simulated gain at the vapor-cell position behind the lens.
    const std::vector<AperturePatch> patches = focused_aperture_from_rays(
        spec, rc.aperture_pitch(spec), {0, 0, 1}, rc.trace_step_rel());
    const Vec3 cell_pos = spec.lattice_origin + Vec3{0, 0, spec.radius_R + rc.cell_offset()};
    rows.push_back(
        {"simulated", simulated_focusing_gain(patches, cell_pos, spec.wavelength).gamma_linear});

    std::ostringstream csv;
    csv << "source,gamma,gamma_db_field,gamma_db_power,e_min_v_per_m,improvement\n";
    for (const auto& row : rows) {
        const double e_min = enhanced_min_field(tr, mc, row.gamma);
        csv << row.source << ',' << format_g9(row.gamma) << ','
            << format_db(20.0 * std::log10(row.gamma)) << ','
            << format_db(10.0 * std::log10(row.gamma)) << ',' << format_g9(e_min) << ','
            << format_g9(bare / e_min) << '\n';
    }
    write_file(out / "sensitivity.csv", csv.str());
    log_line(diag, LogLevel::info,
             "sensitivity: " + std::to_string(rows.size()) + " gain rows, bare E_min = " +
                 format_g9(bare) + " V/m");
}

// ---------------------------------------------------------------------------
// eit-synth: reference and lens-enhanced doublets from one config
// ---------------------------------------------------------------------------

inline void run_eit_synth(const RunConfig& rc, const std::filesystem::path& out,
                          std::ostream& diag) {
    const DetuningGrid grid = rc.eit_grid();
    const EitSpectrum without =
        synth_eit_spectrum(rc.eit_delta_f(), rc.eit_linewidth(), rc.eit_amplitude(),
                           rc.eit_noise_rms(), grid, rc.seed);
    EitSpectrum with =
        synth_eit_spectrum(rc.eit_gamma() * rc.eit_delta_f(), rc.eit_linewidth(),
                           rc.eit_amplitude(), rc.eit_noise_rms(), grid, rc.seed + 1);
    with.meta.lens = true;

    std::ostringstream a, b;
    write_trace_csv(without, a);
    write_trace_csv(with, b);
    write_file(out / "trace_without.csv", a.str());
    write_file(out / "trace_with.csv", b.str());
    log_line(diag, LogLevel::info,
             "eit-synth: " + std::to_string(without.detuning_hz.size()) +
                 " samples per trace, gain factor " + format_g9(rc.eit_gamma()));
}

// ---------------------------------------------------------------------------
// eit-fit: splitting fit of one configured trace
// ---------------------------------------------------------------------------

inline SplittingFit run_eit_fit(const RunConfig& rc, const std::filesystem::path& out,
                                std::ostream& diag) {
    const std::string path = rc.trace_path();
    if (path.empty())
        throw ConfigError("eit-fit requires an input trace (config key io.trace)");
    const EitSpectrum spec = load_trace(path, rc.trace_columns());
    const SplittingFit fit = fit_splitting(spec);

    std::ostringstream report;
    report << "delta_f_hz=" << format_g9(fit.delta_f_hz) << '\n'
           << "uncertainty_hz=" << format_g9(fit.uncertainty_hz) << '\n'
           << "peak_lo_hz=" << format_g9(fit.peak_positions[0]) << '\n'
           << "peak_hi_hz=" << format_g9(fit.peak_positions[1]) << '\n'
           << "goodness=" << format_g9(fit.goodness) << '\n';
    if (rc.raw.has("transition.dipole_moment_cm")) {
        // Bare-receiver electrometry readout for the configured transition.
        report << "e_field_v_per_m=" << format_g9(field_from_splitting(fit, rc.transition()))
               << '\n';
    }
    write_file(out / "fit_report.txt", report.str());
    log_line(diag, LogLevel::info, "eit-fit: delta_f = " + format_g9(fit.delta_f_hz) + " Hz");
    return fit;
}

// ---------------------------------------------------------------------------
// gain: measured focusing gain from a with/without trace pair
// ---------------------------------------------------------------------------

inline GainEstimate run_gain(const RunConfig& rc, const std::filesystem::path& out,
                             std::ostream& diag) {
    const std::string with_path = rc.trace_with_path();
    const std::string without_path = rc.trace_without_path();
    if (with_path.empty() || without_path.empty())
        throw ConfigError("gain requires config keys io.trace_with and io.trace_without");
    const EitSpectrum with = load_trace(with_path, rc.trace_columns());
    const EitSpectrum without = load_trace(without_path, rc.trace_columns());

    const SplittingFit fw = fit_splitting(with);
    const SplittingFit fo = fit_splitting(without);
    if (fo.delta_f_hz <= 0.0)
        throw DomainError("gain: reference splitting is zero");
    const GainEstimate gain =
        focusing_gain(fw.delta_f_hz, fo.delta_f_hz, GainEstimate::Source::measured);

    std::ostringstream report;
    report << "gamma=" << format_g9(gain.gamma_linear) << '\n'
           << "gamma_db=" << format_db(gain.gamma_db) << '\n'
           << "delta_f_with_hz=" << format_g9(fw.delta_f_hz) << '\n'
           << "delta_f_without_hz=" << format_g9(fo.delta_f_hz) << '\n';
    write_file(out / "gain_report.txt", report.str());
    log_line(diag, LogLevel::info, "gain: gamma = " + format_g9(gain.gamma_linear));
    return gain;
}

}  // namespace pipeline

// ---------------------------------------------------------------------------
// Dispatch
// ---------------------------------------------------------------------------

inline const std::vector<std::string>& subcommands() {
    static const std::vector<std::string> names{"design",      "trace",    "fieldmap",
                                                "sensitivity", "eit-synth", "eit-fit",
                                                "gain"};
    return names;
}

/// Runs one subcommand; returns 0 on success, 2 for an unknown subcommand.
/// Domain, config, and data failures propagate as rydlens exceptions (the
/// CLI maps them to exit 1).
inline int run_pipeline(const std::string& subcommand, const RunConfig& rc,
                        const std::filesystem::path& out_dir, std::ostream& diag) {
    std::filesystem::create_directories(out_dir);
    if (subcommand == "design")
        pipeline::run_design(rc, out_dir, diag);
    else if (subcommand == "trace")
        pipeline::run_trace(rc, out_dir, diag);
    else if (subcommand == "fieldmap")
        pipeline::run_fieldmap(rc, out_dir, diag);
    else if (subcommand == "sensitivity")
        pipeline::run_sensitivity(rc, out_dir, diag);
    else if (subcommand == "eit-synth")
        pipeline::run_eit_synth(rc, out_dir, diag);
    else if (subcommand == "eit-fit")
        pipeline::run_eit_fit(rc, out_dir, diag);
    else if (subcommand == "gain")
        pipeline::run_gain(rc, out_dir, diag);
    else {
        diag << "unknown subcommand '" << subcommand << "'\n";
        return 2;
    }
    return 0;
}

}  // namespace rydlens
