#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "rydlens/constants.hpp"
#include "rydlens/error.hpp"
#include "rydlens/vec3.hpp"

namespace rydlens {

// ---------------------------------------------------------------------------
// Lens parameters
// ---------------------------------------------------------------------------

/// Geometric/material description of a GRIN Luneburg lens built from cubic
/// unit cells. Lengths in meters, frequency in Hz.
struct LensSpec {
    double radius_R = 0.0;
    double design_freq = 0.0;
    double wavelength = 0.0;  // c0/design_freq unless overridden
    double cell_size_c = 0.0;
    double material_index_n = 0.0;
    Vec3 lattice_origin{0, 0, 0};

    /// Builds a spec; wavelength defaults to c0/design_freq, pass
    /// wavelength_override > 0 to use a rounded value instead.
    static LensSpec make(double radius_R, double design_freq, double cell_size_c,
                         double material_index_n, double wavelength_override = 0.0,
                         const Vec3& origin = {0, 0, 0}) {
        LensSpec s;
        s.radius_R = radius_R;
        s.design_freq = design_freq;
        s.wavelength = wavelength_override > 0.0 ? wavelength_override
                                                 : constants::c0 / design_freq;
        s.cell_size_c = cell_size_c;
        s.material_index_n = material_index_n;
        s.lattice_origin = origin;
        s.validate();
        return s;
    }

    void validate() const {
        if (radius_R <= 0.0)
            throw ConfigError("lens radius must be positive");
        if (design_freq <= 0.0 || wavelength <= 0.0)
            throw ConfigError("lens design frequency/wavelength must be positive");
        if (cell_size_c <= 0.0)
            throw ConfigError("unit-cell size must be positive");
        if (cell_size_c > wavelength / 4.0 + 1e-15)
            throw ConfigError("unit-cell size violates the subwavelength condition c <= lambda/4");
        if (material_index_n < std::sqrt(2.0) - 1e-12)
            throw ConfigError("material index below sqrt(2); Luneburg center index unrealizable");
    }
};

// ---------------------------------------------------------------------------
// Continuous profile
// ---------------------------------------------------------------------------

/// Luneburg refractive index n(r) = sqrt(2 - (r/R)^2) inside the lens,
/// 1 in the ambient region r > R.
inline double luneburg_index(double r, double R) {
    if (r < 0.0)
        throw DomainError("luneburg_index: negative radius");
    if (R <= 0.0)
        throw DomainError("luneburg_index: nonpositive lens radius");
    if (r > R)
        return 1.0;
    const double u = r / R;
    return std::sqrt(2.0 - u * u);
}

// ---------------------------------------------------------------------------
// Effective-medium models (pluggable: any type with fill_to_index /
// index_to_fill works as the Medium parameter of discretize_lens)
// ---------------------------------------------------------------------------

/// Volume-average permittivity mixing: eps_eff = f*eps_mat + (1-f)*1,
/// eps = n^2. Valid for deeply subwavelength cells.
struct VolumeAverageMedium {
    double fill_to_index(double f, double n_material) const {
        if (f < 0.0 || f > 1.0)
            throw DomainError("fill fraction outside [0,1]");
        const double eps_mat = n_material * n_material;
        return std::sqrt(f * eps_mat + (1.0 - f));
    }
    double index_to_fill(double n_target, double n_material) const {
        if (n_target < 1.0 - 1e-12 || n_target > n_material + 1e-12)
            throw UnrealizableIndexError("target index outside [1, n_material]");
        const double eps_mat = n_material * n_material;
        const double f = (n_target * n_target - 1.0) / (eps_mat - 1.0);
        return std::clamp(f, 0.0, 1.0);
    }
};

/// Tabulated fill->index curve (e.g. from full-wave simulation of the unit
/// cell). Inverted by monotone interpolation; fill samples must be strictly
/// increasing and index samples non-decreasing.
struct TabulatedMedium {
    std::vector<double> fill;
    std::vector<double> index;

    TabulatedMedium(std::vector<double> fill_samples, std::vector<double> index_samples)
        : fill(std::move(fill_samples)), index(std::move(index_samples)) {
        if (fill.size() != index.size() || fill.size() < 2)
            throw ConfigError("tabulated medium needs >= 2 matching samples");
        for (std::size_t i = 1; i < fill.size(); ++i)
            if (fill[i] <= fill[i - 1] || index[i] < index[i - 1])
                throw ConfigError("tabulated medium samples must be monotone in fill and index");
    }

    double fill_to_index(double f, double /*n_material*/) const {
        if (f < fill.front() || f > fill.back())
            throw DomainError("fill fraction outside tabulated range");
        return interpolate(fill, index, f);
    }
    double index_to_fill(double n_target, double /*n_material*/) const {
        if (n_target < index.front() - 1e-12 || n_target > index.back() + 1e-12)
            throw UnrealizableIndexError("target index outside tabulated range");
        return interpolate(index, fill, std::clamp(n_target, index.front(), index.back()));
    }

private:
    static double interpolate(const std::vector<double>& xs, const std::vector<double>& ys,
                              double x) {
        auto it = std::upper_bound(xs.begin(), xs.end(), x);
        std::size_t hi = std::min<std::size_t>(std::max<std::ptrdiff_t>(it - xs.begin(), 1),
                                               xs.size() - 1);
        const double x0 = xs[hi - 1], x1 = xs[hi];
        const double t = x1 > x0 ? (x - x0) / (x1 - x0) : 0.0;
        return ys[hi - 1] + t * (ys[hi] - ys[hi - 1]);
    }
};

/// Fill fraction realizing n_target in a host of index n_material under the
/// volume-average model; monotone increasing in n_target.
inline double fill_fraction_for_index(double n_target, double n_material) {
    return VolumeAverageMedium{}.index_to_fill(n_target, n_material);
}

/// Inclusion edge length b for fill fraction f in a cell of side c:
/// f = (b/c)^3.
inline double b_from_fill(double f, double c) {
    if (f < 0.0 || f > 1.0)
        throw DomainError("b_from_fill: fill fraction outside [0,1]");
    if (c <= 0.0)
        throw DomainError("b_from_fill: nonpositive cell size");
    return c * std::cbrt(f);
}

// ---------------------------------------------------------------------------
// Lattice
// ---------------------------------------------------------------------------

/// One lattice site: a cubic air cell of side c holding a solid inclusion of
/// side b. Cells outside the lens sphere are air (b = 0).
struct UnitCell {
    std::array<int, 3> index_ijk{};
    Vec3 center_xyz;
    double radial_r = 0.0;
    double target_index_n = 1.0;
    double fill_fraction_f = 0.0;
    double fill_param_b = 0.0;
    int segment = 0;  // octant id, 0..7
};

struct LensLattice {
    LensSpec spec;
    std::vector<UnitCell> cells;

    std::size_t solid_cell_count(int segment = -1) const {
        std::size_t n = 0;
        for (const auto& c : cells)
            if (c.fill_param_b > 0.0 && (segment < 0 || c.segment == segment))
                ++n;
        return n;
    }
};

inline int octant_of(const Vec3& rel) {
    return (rel.x >= 0.0 ? 1 : 0) | (rel.y >= 0.0 ? 2 : 0) | (rel.z >= 0.0 ? 4 : 0);
}

/// Samples the Luneburg profile at cell centers over a cube of side 2R and
/// assigns each cell its fill parameter via the effective-medium model.
/// All candidate cells are kept; air cells carry b = 0.
template <class Medium = VolumeAverageMedium>
LensLattice discretize_lens(const LensSpec& spec, const Medium& medium = Medium{}) {
    spec.validate();
    const double R = spec.radius_R;
    const double c = spec.cell_size_c;
    const int n_axis = static_cast<int>(std::ceil(2.0 * R / c - 1e-9));

    LensLattice lattice;
    lattice.spec = spec;
    lattice.cells.reserve(static_cast<std::size_t>(n_axis) * n_axis * n_axis);

    const double half = 0.5 * n_axis * c;
    for (int i = 0; i < n_axis; ++i) {
        for (int j = 0; j < n_axis; ++j) {
            for (int k = 0; k < n_axis; ++k) {
                UnitCell cell;
                cell.index_ijk = {i, j, k};
                const Vec3 rel{(i + 0.5) * c - half, (j + 0.5) * c - half, (k + 0.5) * c - half};
                cell.center_xyz = spec.lattice_origin + rel;
                cell.radial_r = rel.norm();
                cell.segment = octant_of(rel);
                if (cell.radial_r > R) {
                    cell.target_index_n = 1.0;
                    cell.fill_fraction_f = 0.0;
                    cell.fill_param_b = 0.0;
                } else {
                    cell.target_index_n = luneburg_index(cell.radial_r, R);
                    cell.fill_fraction_f =
                        medium.index_to_fill(cell.target_index_n, spec.material_index_n);
                    cell.fill_param_b = b_from_fill(cell.fill_fraction_f, c);
                }
                lattice.cells.push_back(cell);
            }
        }
    }
    return lattice;
}

}  // namespace rydlens
