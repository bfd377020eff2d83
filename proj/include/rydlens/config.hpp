#pragma once

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "rydlens/error.hpp"
#include "rydlens/io.hpp"
#include "rydlens/lens_design.hpp"
#include "rydlens/rydberg.hpp"

namespace rydlens {

// ---------------------------------------------------------------------------
// Flat key-value configuration: `section.key = value`, '#' comments
// ---------------------------------------------------------------------------

class Config {
  public:
    Config() = default;

    static Config parse(std::istream& in) {
        Config cfg;
        std::string line;
        std::size_t lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const auto hash = line.find('#');
            if (hash != std::string::npos)
                line.erase(hash);
            const std::string trimmed = csv::trim(line);
            if (trimmed.empty())
                continue;
            const auto eq = trimmed.find('=');
            if (eq == std::string::npos)
                throw ConfigError("line " + std::to_string(lineno) +
                                  ": expected 'key = value', got '" + trimmed + "'");
            const std::string key = csv::trim(trimmed.substr(0, eq));
            const std::string value = csv::trim(trimmed.substr(eq + 1));
            if (key.empty())
                throw ConfigError("line " + std::to_string(lineno) + ": empty key");
            cfg.values_[key] = value;
        }
        return cfg;
    }

    static Config load(const std::filesystem::path& path) {
        std::ifstream in(path);
        if (!in)
            throw ConfigError("cannot open config file " + path.string());
        return parse(in);
    }

    bool has(const std::string& key) const { return values_.count(key) != 0; }

    std::string get_string(const std::string& key) const {
        auto it = values_.find(key);
        if (it == values_.end())
            throw ConfigError("missing required config key '" + key + "'");
        return it->second;
    }

    std::string get_string(const std::string& key, const std::string& fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : it->second;
    }

    double get_double(const std::string& key) const { return to_double(key, get_string(key)); }

    double get_double(const std::string& key, double fallback) const {
        auto it = values_.find(key);
        return it == values_.end() ? fallback : to_double(key, it->second);
    }

    long long get_int(const std::string& key, long long fallback) const {
        auto it = values_.find(key);
        if (it == values_.end())
            return fallback;
        try {
            std::size_t used = 0;
            const long long v = std::stoll(it->second, &used);
            if (used != it->second.size())
                throw std::invalid_argument(it->second);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': not an integer: '" + it->second + "'");
        }
    }

    /// Comma-separated list of doubles; fallback applies when the key is
    /// absent (an empty value is a config error).
    std::vector<double> get_double_list(const std::string& key,
                                        const std::vector<double>& fallback) const {
        auto it = values_.find(key);
        if (it == values_.end())
            return fallback;
        std::vector<double> out;
        std::stringstream ss(it->second);
        std::string field;
        while (std::getline(ss, field, ','))
            out.push_back(to_double(key, csv::trim(field)));
        if (out.empty())
            throw ConfigError("config key '" + key + "': empty list");
        return out;
    }

    /// All `<prefix>.<canonical> = <actual>` pairs as a CSV column map.
    csv::ColumnMap column_map(const std::string& prefix) const {
        csv::ColumnMap map;
        const std::string dotted = prefix + ".";
        for (const auto& [key, value] : values_)
            if (key.rfind(dotted, 0) == 0)
                map.rename[key.substr(dotted.size())] = value;
        return map;
    }

    const std::map<std::string, std::string>& entries() const { return values_; }

  private:
    static double to_double(const std::string& key, const std::string& value) {
        try {
            std::size_t used = 0;
            const double v = std::stod(value, &used);
            if (used != value.size())
                throw std::invalid_argument(value);
            return v;
        } catch (const std::exception&) {
            throw ConfigError("config key '" + key + "': not a number: '" + value + "'");
        }
    }

    std::map<std::string, std::string> values_;
};

// ---------------------------------------------------------------------------
// Run configuration: typed views over the flat key set, with the reference
// bench geometry as defaults (196 mm lens, 14 mm cells, 3.5 GHz design
// frequency, PLA index 2.99, horn at 3.2 m, probe plane at 2.2 m, vapor
// cell 24 mm behind the lens surface).
// ---------------------------------------------------------------------------

struct RunConfig {
    Config raw;
    unsigned long long seed = 0;

    static RunConfig load(const std::filesystem::path& path) {
        RunConfig rc;
        rc.raw = Config::load(path);
        rc.seed = static_cast<unsigned long long>(rc.raw.get_int("seed", 0));
        return rc;
    }

    LensSpec lens() const {
        const double radius = raw.get_double("lens.radius_m", 0.196);
        const double freq = raw.get_double("lens.design_freq_hz", 3.5e9);
        const double cell = raw.get_double("lens.cell_m", 0.014);
        const double n_mat = raw.get_double("lens.material_index", 2.99);
        const double wl = raw.get_double("lens.wavelength_m", 0.0);
        return LensSpec::make(radius, freq, cell, n_mat, wl > 0.0 ? wl : 0.0);
    }

    /// The RF transition under test. The dipole moment has no physically
    /// defensible default, so it is a required key.
    AtomicTransition transition() const {
        AtomicTransition tr;
        tr.dipole_moment_mu = raw.get_double("transition.dipole_moment_cm");
        tr.rf_frequency = raw.get_double("transition.rf_freq_hz", lens().design_freq);
        tr.label = raw.get_string("transition.label", "");
        tr.validate();
        return tr;
    }

    MeasurementConfig measurement() const {
        MeasurementConfig mc;
        mc.measurement_time_Tm = raw.get_double("measurement.time_s", 1.0);
        mc.num_measurements_Nm =
            static_cast<std::size_t>(raw.get_int("measurement.count", 1));
        mc.validate();
        return mc;
    }

    // Bench geometry ------------------------------------------------------

    double antenna_distance() const { return raw.get_double("antenna.distance_m", 3.2); }
    double antenna_height() const { return raw.get_double("antenna.height_m", 2.2); }
    double cell_offset() const { return raw.get_double("cell.offset_m", 0.024); }

    // Field-scan geometry --------------------------------------------------

    /// Huygens patch pitch; defaults to λ/8 at the lens design wavelength.
    double aperture_pitch(const LensSpec& spec) const {
        return raw.get_double("scan.pitch_m", spec.wavelength / 8.0);
    }

    double trace_step_rel() const { return raw.get_double("trace.step_rel", 1e-3); }

    /// Axial scan window, measured from the lens centre along the optical
    /// axis; defaults bracket the geometric focus — including the inward
    /// diffractive shift at small Fresnel numbers — and the probe reach of
    /// the reference bench (surface + 50 mm).
    ScanRange axial_scan(const LensSpec& spec) const {
        ScanRange r;
        r.min = raw.get_double("scan.z_min_m", 0.5 * spec.radius_R);
        r.max = raw.get_double("scan.z_max_m", spec.radius_R + 0.050);
        r.step = raw.get_double("scan.z_step_m", 1e-3);
        return r;
    }

    /// Transverse scan window through a chosen axial plane.
    ScanRange transverse_scan() const {
        const double half = raw.get_double("scan.x_half_m", 0.060);
        ScanRange r;
        r.min = -half;
        r.max = half;
        r.step = raw.get_double("scan.x_step_m", 1e-3);
        return r;
    }

    // EIT synthesis ---------------------------------------------------------

    double eit_delta_f() const { return raw.get_double("eit.delta_f_hz", 10e6); }
    double eit_linewidth() const { return raw.get_double("eit.linewidth_hz", 2e6); }
    double eit_amplitude() const { return raw.get_double("eit.amplitude", 1.0); }
    double eit_noise_rms() const { return raw.get_double("eit.noise_rms", 0.0); }
    double eit_gamma() const { return raw.get_double("eit.gamma", 1.0); }

    DetuningGrid eit_grid() const {
        DetuningGrid g;
        g.min_hz = raw.get_double("eit.grid_min_hz", -30e6);
        g.max_hz = raw.get_double("eit.grid_max_hz", 30e6);
        g.step_hz = raw.get_double("eit.grid_step_hz", 0.1e6);
        return g;
    }

    // Input artifacts --------------------------------------------------------

    std::string trace_path() const { return raw.get_string("io.trace", ""); }
    std::string trace_with_path() const { return raw.get_string("io.trace_with", ""); }
    std::string trace_without_path() const { return raw.get_string("io.trace_without", ""); }
    std::string scan_path() const { return raw.get_string("io.scan", ""); }

    csv::ColumnMap trace_columns() const { return raw.column_map("trace.col"); }
    csv::ColumnMap scan_columns() const { return raw.column_map("scan.col"); }

    /// Ray-start lateral offsets for the trace subcommand, as fractions of
    /// the lens radius.
    std::vector<double> trace_offsets_rel() const {
        return raw.get_double_list("trace.offsets_rel", {0.0});
    }
};

}  // namespace rydlens
