#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "rydlens/constants.hpp"
#include "rydlens/detail/levmar.hpp"
#include "rydlens/error.hpp"
#include "rydlens/focal_field.hpp"

namespace rydlens {

// ---------------------------------------------------------------------------
// Receiver sensitivity chain
// ---------------------------------------------------------------------------

struct AtomicTransition {
    double dipole_moment_mu = 0.0;  // C m
    double rf_frequency = 0.0;      // Hz
    std::string label;

    void validate() const {
        if (dipole_moment_mu <= 0.0)
            throw ConfigError("transition dipole moment must be positive");
        if (rf_frequency <= 0.0)
            throw ConfigError("RF transition frequency must be positive");
    }
};

struct MeasurementConfig {
    double measurement_time_Tm = 1.0;    // s
    std::int64_t num_measurements_Nm = 1;

    void validate() const {
        if (measurement_time_Tm <= 0.0)
            throw ConfigError("measurement time must be positive");
        if (num_measurements_Nm < 1)
            throw ConfigError("number of measurements must be >= 1");
    }
};

/// Shot-noise-limited minimum detectable field of the bare receiver,
/// E_min = h / (mu Tm sqrt(Nm)).
inline double min_detectable_field(const AtomicTransition& tr, const MeasurementConfig& mc) {
    tr.validate();
    mc.validate();
    return constants::planck_h /
           (tr.dipole_moment_mu * mc.measurement_time_Tm *
            std::sqrt(static_cast<double>(mc.num_measurements_Nm)));
}

/// Autler-Townes splitting under a focusing gain gamma,
/// delta_f = gamma mu |E_inc| / h. gamma = 1 is the bare receiver.
inline double at_splitting(const AtomicTransition& tr, double e_incident, double gamma) {
    tr.validate();
    if (e_incident < 0.0)
        throw DomainError("at_splitting: negative incident field");
    if (gamma < 0.0)
        throw DomainError("at_splitting: negative gain");
    return gamma * tr.dipole_moment_mu * e_incident / constants::planck_h;
}

/// Minimum detectable field with the lens: E_min = h / (gamma mu Tm sqrt(Nm)),
/// an exact 1/gamma improvement over the bare receiver.
inline double enhanced_min_field(const AtomicTransition& tr, const MeasurementConfig& mc,
                                 double gamma) {
    if (gamma <= 0.0)
        throw DomainError("enhanced_min_field: gain must be positive");
    return min_detectable_field(tr, mc) / gamma;
}

// ---------------------------------------------------------------------------
// EIT spectra
// ---------------------------------------------------------------------------

struct EitMeta {
    bool rf_on = true;
    bool lens = false;
    std::string frequency_label;
};

struct EitSpectrum {
    std::vector<double> detuning_hz;   // strictly increasing
    std::vector<double> transmission;  // arbitrary linear units
    EitMeta meta;

    void validate() const {
        if (detuning_hz.size() != transmission.size())
            throw DataError("EIT spectrum: axis/trace length mismatch");
        for (std::size_t i = 1; i < detuning_hz.size(); ++i)
            if (detuning_hz[i] <= detuning_hz[i - 1])
                throw DataError("EIT spectrum: detuning axis not strictly increasing");
    }
};

struct DetuningGrid {
    double min_hz = 0.0;
    double max_hz = 0.0;
    double step_hz = 0.0;
};

namespace detail {
// Peak-normalized Lorentzian of the given FWHM.
inline double lorentzian(double x, double center, double fwhm) {
    const double u = 2.0 * (x - center) / fwhm;
    return 1.0 / (1.0 + u * u);
}
}  // namespace detail

/// Phenomenological Autler-Townes doublet: two equal Lorentzians at
/// +-delta_f/2 with the given FWHM; delta_f = 0 is the RF-off trace (a
/// single Lorentzian at zero detuning). Optional additive Gaussian noise,
/// reproducible through the seed.
inline EitSpectrum synth_eit_spectrum(double delta_f, double linewidth, double amplitude,
                                      double noise_rms, const DetuningGrid& grid,
                                      std::uint64_t seed = 0) {
    if (linewidth <= 0.0)
        throw DomainError("synth_eit_spectrum: linewidth must be positive");
    if (delta_f < 0.0)
        throw DomainError("synth_eit_spectrum: negative splitting");
    if (noise_rms < 0.0)
        throw DomainError("synth_eit_spectrum: negative noise RMS");
    if (grid.step_hz <= 0.0 || grid.max_hz < grid.min_hz)
        throw DomainError("synth_eit_spectrum: empty detuning grid");

    EitSpectrum spec;
    spec.meta.rf_on = delta_f > 0.0;
    const std::size_t count =
        static_cast<std::size_t>(std::floor((grid.max_hz - grid.min_hz) / grid.step_hz + 1e-9)) +
        1;
    spec.detuning_hz.reserve(count);
    spec.transmission.reserve(count);

    std::mt19937_64 rng(seed);
    std::normal_distribution<double> noise(0.0, noise_rms > 0.0 ? noise_rms : 1.0);

    for (std::size_t i = 0; i < count; ++i) {
        const double x = grid.min_hz + static_cast<double>(i) * grid.step_hz;
        double t;
        if (delta_f > 0.0)
            t = amplitude * (detail::lorentzian(x, -0.5 * delta_f, linewidth) +
                             detail::lorentzian(x, +0.5 * delta_f, linewidth));
        else
            t = amplitude * detail::lorentzian(x, 0.0, linewidth);
        if (noise_rms > 0.0)
            t += noise(rng);
        spec.detuning_hz.push_back(x);
        spec.transmission.push_back(t);
    }
    return spec;
}

// ---------------------------------------------------------------------------
// Splitting fit
// ---------------------------------------------------------------------------

struct SplittingFit {
    double delta_f_hz = 0.0;
    double uncertainty_hz = 0.0;
    std::array<double, 2> peak_positions{};  // ascending
    double goodness = 0.0;                   // residual 2-norm
};

struct FitOptions {
    double prominence_frac = 0.2;  // of the trace's max-min span
    int max_iterations = 200;
};

namespace detail {

struct PeakCandidate {
    std::size_t index;
    double prominence;
};

// Local maxima with topographic prominence.
inline std::vector<PeakCandidate> find_peaks(const std::vector<double>& y) {
    std::vector<PeakCandidate> peaks;
    const std::size_t n = y.size();
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (!(y[i] > y[i - 1] && y[i] >= y[i + 1]))
            continue;
        double left_min = y[i], right_min = y[i];
        for (std::size_t l = i; l-- > 0;) {
            if (y[l] > y[i])
                break;
            left_min = std::min(left_min, y[l]);
        }
        for (std::size_t r = i + 1; r < n; ++r) {
            if (y[r] > y[i])
                break;
            right_min = std::min(right_min, y[r]);
        }
        peaks.push_back({i, y[i] - std::max(left_min, right_min)});
    }
    std::sort(peaks.begin(), peaks.end(),
              [](const PeakCandidate& a, const PeakCandidate& b) {
                  return a.prominence > b.prominence;
              });
    return peaks;
}

// Half-width estimate by walking down to half height around a peak.
inline double estimate_fwhm(const std::vector<double>& x, const std::vector<double>& y,
                            std::size_t ipk, double baseline) {
    const double half = baseline + 0.5 * (y[ipk] - baseline);
    double lo = x.front(), hi = x.back();
    for (std::size_t l = ipk; l-- > 0;)
        if (y[l] <= half) {
            lo = x[l];
            break;
        }
    for (std::size_t r = ipk + 1; r < y.size(); ++r)
        if (y[r] <= half) {
            hi = x[r];
            break;
        }
    const double w = hi - lo;
    const double min_w = 2.0 * (x[1] - x[0]);
    return std::max(w, min_w);
}

}  // namespace detail

/// Two-stage Autler-Townes splitting estimate: prominence-based peak-pair
/// detection, then least-squares refinement of a two-Lorentzian model
/// (amplitude, center, width per peak). Throws UnresolvedDoubletError,
/// carrying the single peak position, when only one peak stands out.
inline SplittingFit fit_splitting(const EitSpectrum& spec, const FitOptions& opt = {}) {
    spec.validate();
    const std::vector<double>& x = spec.detuning_hz;
    const std::vector<double>& y = spec.transmission;
    if (x.size() < 32)
        throw DomainError("fit_splitting: need at least 32 samples");

    const auto [min_it, max_it] = std::minmax_element(y.begin(), y.end());
    const double span = *max_it - *min_it;
    if (span <= 0.0)
        throw DomainError("fit_splitting: flat trace");
    const double threshold = opt.prominence_frac * span;

    auto peaks = detail::find_peaks(y);
    peaks.erase(std::remove_if(peaks.begin(), peaks.end(),
                               [&](const detail::PeakCandidate& p) {
                                   return p.prominence < threshold;
                               }),
                peaks.end());
    if (peaks.size() < 2) {
        const std::size_t ipk = peaks.empty()
                                    ? static_cast<std::size_t>(max_it - y.begin())
                                    : peaks.front().index;
        throw UnresolvedDoubletError("fit_splitting: fewer than two resolvable peaks", x[ipk]);
    }

    std::size_t i1 = peaks[0].index, i2 = peaks[1].index;
    if (x[i1] > x[i2])
        std::swap(i1, i2);

    const double baseline = *min_it;
    const double w1 = detail::estimate_fwhm(x, y, i1, baseline);
    const double w2 = detail::estimate_fwhm(x, y, i2, baseline);
    std::vector<double> p0 = {y[i1] - baseline, x[i1], w1, y[i2] - baseline, x[i2], w2};

    const std::size_t n = x.size();
    auto model = [&](std::span<const double> p, std::vector<double>& r,
                     std::vector<double>& J) {
        for (std::size_t i = 0; i < n; ++i) {
            double m = 0.0;
            for (int c = 0; c < 2; ++c) {
                const double A = p[3 * c + 0], ctr = p[3 * c + 1], w = p[3 * c + 2];
                const double u = 2.0 * (x[i] - ctr) / w;
                const double l = 1.0 / (1.0 + u * u);
                m += A * l;
                J[i * 6 + 3 * c + 0] = l;
                J[i * 6 + 3 * c + 1] = A * 4.0 * u * l * l / w;
                J[i * 6 + 3 * c + 2] = A * 2.0 * u * u * l * l / w;
            }
            r[i] = y[i] - m;
        }
    };
    auto fit = detail::levenberg_marquardt(model, p0, n, opt.max_iterations);

    SplittingFit out;
    double c1 = fit.params[1], c2 = fit.params[4];
    if (c1 > c2)
        std::swap(c1, c2);
    out.peak_positions = {c1, c2};
    out.delta_f_hz = c2 - c1;
    out.uncertainty_hz = std::sqrt(std::max(fit.covariance_diag[1], 0.0) +
                                   std::max(fit.covariance_diag[4], 0.0));
    out.goodness = std::sqrt(fit.cost);
    return out;
}

/// Measured focusing gain from a with-lens/without-lens trace pair:
/// gamma = delta_f(with) / delta_f(without).
inline GainEstimate gain_from_spectra(const EitSpectrum& with_lens,
                                      const EitSpectrum& without_lens,
                                      const FitOptions& opt = {}) {
    const SplittingFit fw = fit_splitting(with_lens, opt);
    const SplittingFit fo = fit_splitting(without_lens, opt);
    if (fo.delta_f_hz <= 0.0)
        throw DomainError("gain_from_spectra: reference splitting is zero");
    return focusing_gain(fw.delta_f_hz, fo.delta_f_hz, GainEstimate::Source::measured);
}

/// Electrometry readout: |E| = h delta_f / mu (bare receiver, gamma = 1).
inline double field_from_splitting(const SplittingFit& fit, const AtomicTransition& tr) {
    tr.validate();
    if (fit.delta_f_hz < 0.0)
        throw DomainError("field_from_splitting: negative splitting");
    return constants::planck_h * fit.delta_f_hz / tr.dipole_moment_mu;
}

}  // namespace rydlens
