#pragma once

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "rydlens/error.hpp"
#include "rydlens/focal_field.hpp"
#include "rydlens/lens_design.hpp"
#include "rydlens/ray_trace.hpp"
#include "rydlens/rydberg.hpp"

namespace rydlens {

// ---------------------------------------------------------------------------
// Formatting: 9 significant digits for values, 0.01 dB for dB columns
// ---------------------------------------------------------------------------

inline std::string format_g9(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}

inline std::string format_db(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

// ---------------------------------------------------------------------------
// Minimal CSV machinery
// ---------------------------------------------------------------------------

namespace csv {

struct Row {
    std::vector<std::string> fields;
    std::size_t line = 0;  // 1-based source line
};

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline std::vector<Row> read_rows(std::istream& in) {
    std::vector<Row> rows;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (trim(line).empty())
            continue;
        Row row;
        row.line = lineno;
        std::stringstream ss(line);
        std::string field;
        while (std::getline(ss, field, ','))
            row.fields.push_back(trim(field));
        rows.push_back(std::move(row));
    }
    return rows;
}

inline std::vector<Row> read_rows(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open " + path.string());
    return read_rows(in);
}

inline double parse_double(const std::string& s, std::size_t line) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size())
            throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ParseError("malformed numeric field '" + s + "'", line);
    }
}

/// Maps canonical column names to the header names actually present in a
/// file (identity when a name is absent from the map).
struct ColumnMap {
    std::map<std::string, std::string> rename;

    std::string resolve(const std::string& canonical) const {
        auto it = rename.find(canonical);
        return it == rename.end() ? canonical : it->second;
    }
};

/// Column indices for the requested canonical names, validated against the
/// file's header row.
inline std::vector<std::size_t> header_indices(const Row& header,
                                               std::span<const std::string> canonical,
                                               const ColumnMap& map) {
    std::vector<std::size_t> idx;
    for (const auto& name : canonical) {
        const std::string wanted = map.resolve(name);
        auto it = std::find(header.fields.begin(), header.fields.end(), wanted);
        if (it == header.fields.end())
            throw ParseError("missing column '" + wanted + "'", header.line);
        idx.push_back(static_cast<std::size_t>(it - header.fields.begin()));
    }
    return idx;
}

}  // namespace csv

// ---------------------------------------------------------------------------
// Lattice dump: i,j,k,x_mm,y_mm,z_mm,n_target,b_mm,segment
// ---------------------------------------------------------------------------

inline void write_lattice_csv(const LensLattice& lattice, std::ostream& out) {
    out << "i,j,k,x_mm,y_mm,z_mm,n_target,b_mm,segment\n";
    for (const auto& c : lattice.cells) {
        out << c.index_ijk[0] << ',' << c.index_ijk[1] << ',' << c.index_ijk[2] << ','
            << format_g9(c.center_xyz.x * 1e3) << ',' << format_g9(c.center_xyz.y * 1e3) << ','
            << format_g9(c.center_xyz.z * 1e3) << ',' << format_g9(c.target_index_n) << ','
            << format_g9(c.fill_param_b * 1e3) << ',' << c.segment << '\n';
    }
}

// ---------------------------------------------------------------------------
// Trajectory dump: s_m,x_m,y_m,z_m,dx,dy,dz,psi_m
// ---------------------------------------------------------------------------

inline void write_trajectory_csv(const Trajectory& traj, std::ostream& out) {
    out << "s_m,x_m,y_m,z_m,dx,dy,dz,psi_m\n";
    double s = 0.0;
    Vec3 prev;
    bool first = true;
    for (const auto& r : traj.samples) {
        if (!first)
            s += (r.position - prev).norm();
        prev = r.position;
        first = false;
        out << format_g9(s) << ',' << format_g9(r.position.x) << ',' << format_g9(r.position.y)
            << ',' << format_g9(r.position.z) << ',' << format_g9(r.direction.x) << ','
            << format_g9(r.direction.y) << ',' << format_g9(r.direction.z) << ','
            << format_g9(r.optical_path_psi) << '\n';
    }
}

inline Trajectory load_trajectory_csv(std::istream& in) {
    const auto rows = csv::read_rows(in);
    if (rows.empty())
        throw ParseError("empty trajectory file", 1);
    static const std::string cols[] = {"s_m", "x_m", "y_m", "z_m", "dx", "dy", "dz", "psi_m"};
    const auto idx = csv::header_indices(rows.front(), cols, {});
    Trajectory traj;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.fields.size() < rows.front().fields.size())
            throw ParseError("short row", row.line);
        auto f = [&](std::size_t c) { return csv::parse_double(row.fields[idx[c]], row.line); };
        Ray r;
        r.position = {f(1), f(2), f(3)};
        r.direction = {f(4), f(5), f(6)};
        r.optical_path_psi = f(7);
        traj.samples.push_back(r);
    }
    if (traj.samples.empty())
        throw ParseError("trajectory file has no samples", rows.front().line);
    traj.exit_state = traj.samples.back();
    traj.terminated = Termination::exited_sphere;
    return traj;
}

inline Trajectory load_trajectory_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open " + path.string());
    return load_trajectory_csv(in);
}

// ---------------------------------------------------------------------------
// Field scan: coord_mm,re,im,mag_db
// ---------------------------------------------------------------------------

inline void write_scan_csv(std::span<const FieldSample> scan, Axis axis, std::ostream& out) {
    const std::size_t ai = static_cast<std::size_t>(axis);
    out << "coord_mm,re,im,mag_db\n";
    for (const auto& s : scan) {
        out << format_g9(s.position[ai] * 1e3) << ',' << format_g9(s.amplitude.real()) << ','
            << format_g9(s.amplitude.imag()) << ',' << format_db(s.magnitude_db) << '\n';
    }
}

// ---------------------------------------------------------------------------
// EIT trace: detuning_hz,transmission
// ---------------------------------------------------------------------------

inline void write_trace_csv(const EitSpectrum& spec, std::ostream& out) {
    out << "detuning_hz,transmission\n";
    for (std::size_t i = 0; i < spec.detuning_hz.size(); ++i)
        out << format_g9(spec.detuning_hz[i]) << ',' << format_g9(spec.transmission[i]) << '\n';
}

inline EitSpectrum load_trace(std::istream& in, const csv::ColumnMap& map = {}) {
    const auto rows = csv::read_rows(in);
    if (rows.empty())
        throw ParseError("empty EIT trace file", 1);
    static const std::string cols[] = {"detuning_hz", "transmission"};
    const auto idx = csv::header_indices(rows.front(), cols, map);

    std::vector<std::pair<double, double>> samples;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.fields.size() < rows.front().fields.size())
            throw ParseError("short row", row.line);
        samples.emplace_back(csv::parse_double(row.fields[idx[0]], row.line),
                             csv::parse_double(row.fields[idx[1]], row.line));
    }
    if (samples.empty())
        throw ParseError("EIT trace has no samples", rows.front().line);
    std::stable_sort(samples.begin(), samples.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    EitSpectrum spec;
    for (std::size_t i = 0; i < samples.size(); ++i) {
        if (i > 0 && samples[i].first == samples[i - 1].first)
            throw DataError("duplicate detuning value " + format_g9(samples[i].first));
        spec.detuning_hz.push_back(samples[i].first);
        spec.transmission.push_back(samples[i].second);
    }
    spec.validate();
    return spec;
}

inline EitSpectrum load_trace(const std::filesystem::path& path, const csv::ColumnMap& map = {}) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open " + path.string());
    return load_trace(in, map);
}

// ---------------------------------------------------------------------------
// Near-field scan records: x_mm,y_mm,z_mm,amplitude_db
// ---------------------------------------------------------------------------

struct ScanRecord {
    double x_mm = 0.0;
    double y_mm = 0.0;
    double z_mm = 0.0;
    double amplitude_db = 0.0;  // referenced to the no-lens incident level
};

inline std::vector<ScanRecord> load_scan(std::istream& in, const csv::ColumnMap& map = {}) {
    const auto rows = csv::read_rows(in);
    if (rows.empty())
        throw ParseError("empty scan file", 1);
    static const std::string cols[] = {"x_mm", "y_mm", "z_mm", "amplitude_db"};
    const auto idx = csv::header_indices(rows.front(), cols, map);
    std::vector<ScanRecord> records;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto& row = rows[i];
        if (row.fields.size() < rows.front().fields.size())
            throw ParseError("short row", row.line);
        ScanRecord r;
        r.x_mm = csv::parse_double(row.fields[idx[0]], row.line);
        r.y_mm = csv::parse_double(row.fields[idx[1]], row.line);
        r.z_mm = csv::parse_double(row.fields[idx[2]], row.line);
        r.amplitude_db = csv::parse_double(row.fields[idx[3]], row.line);
        if (!std::isfinite(r.x_mm) || !std::isfinite(r.y_mm) || !std::isfinite(r.z_mm) ||
            !std::isfinite(r.amplitude_db))
            throw DataError("non-finite scan record at line " + std::to_string(row.line));
        records.push_back(r);
    }
    if (records.empty())
        throw ParseError("scan file has no records", rows.front().line);
    return records;
}

inline std::vector<ScanRecord> load_scan(const std::filesystem::path& path,
                                         const csv::ColumnMap& map = {}) {
    std::ifstream in(path);
    if (!in)
        throw DataError("cannot open " + path.string());
    return load_scan(in, map);
}

/// On-axis cut: records with x = y = 0, ordered by z.
inline std::vector<ScanRecord> z_cut(std::span<const ScanRecord> records, double tol_mm = 1e-9) {
    std::vector<ScanRecord> cut;
    for (const auto& r : records)
        if (std::abs(r.x_mm) <= tol_mm && std::abs(r.y_mm) <= tol_mm)
            cut.push_back(r);
    std::sort(cut.begin(), cut.end(),
              [](const ScanRecord& a, const ScanRecord& b) { return a.z_mm < b.z_mm; });
    return cut;
}

/// Transverse cut at fixed z: records with y = 0 and z = z_mm, ordered by x.
inline std::vector<ScanRecord> x_cut(std::span<const ScanRecord> records, double z_mm,
                                     double tol_mm = 1e-9) {
    std::vector<ScanRecord> cut;
    for (const auto& r : records)
        if (std::abs(r.y_mm) <= tol_mm && std::abs(r.z_mm - z_mm) <= tol_mm)
            cut.push_back(r);
    std::sort(cut.begin(), cut.end(),
              [](const ScanRecord& a, const ScanRecord& b) { return a.x_mm < b.x_mm; });
    return cut;
}

inline const ScanRecord& peak_record(std::span<const ScanRecord> records) {
    if (records.empty())
        throw DomainError("peak_record: no records");
    std::size_t best = 0;
    for (std::size_t i = 1; i < records.size(); ++i)
        if (records[i].amplitude_db > records[best].amplitude_db)
            best = i;
    return records[best];
}

// ---------------------------------------------------------------------------
// Small file helpers
// ---------------------------------------------------------------------------

inline void write_file(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write " + path.string());
    out << content;
}

inline void write_file(const std::filesystem::path& path,
                       const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw DataError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
}

}  // namespace rydlens
