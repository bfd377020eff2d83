#pragma once

#include <cmath>
#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "rydlens/error.hpp"

namespace rydlens::detail {

/// Solves A x = b in place by Gaussian elimination with partial pivoting.
/// A is row-major n x n. Returns false when the matrix is singular.
inline bool solve_dense(std::vector<double>& A, std::vector<double>& b, std::size_t n) {
    for (std::size_t col = 0; col < n; ++col) {
        std::size_t piv = col;
        for (std::size_t r = col + 1; r < n; ++r)
            if (std::abs(A[r * n + col]) > std::abs(A[piv * n + col]))
                piv = r;
        if (std::abs(A[piv * n + col]) < 1e-300)
            return false;
        if (piv != col) {
            for (std::size_t c = 0; c < n; ++c)
                std::swap(A[col * n + c], A[piv * n + c]);
            std::swap(b[col], b[piv]);
        }
        const double d = A[col * n + col];
        for (std::size_t r = col + 1; r < n; ++r) {
            const double f = A[r * n + col] / d;
            if (f == 0.0)
                continue;
            for (std::size_t c = col; c < n; ++c)
                A[r * n + c] -= f * A[col * n + c];
            b[r] -= f * b[col];
        }
    }
    for (std::size_t ri = n; ri-- > 0;) {
        double s = b[ri];
        for (std::size_t c = ri + 1; c < n; ++c)
            s -= A[ri * n + c] * b[c];
        b[ri] = s / A[ri * n + ri];
    }
    return true;
}

struct LevMarResult {
    std::vector<double> params;
    double cost = 0.0;  // sum of squared residuals
    std::vector<double> covariance_diag;
    int iterations = 0;
    bool converged = false;
};

/// Small dense Levenberg-Marquardt. `model` fills residuals r_i = y_i - m(x_i; p)
/// and the Jacobian of the *model* J_ij = dm(x_i)/dp_j (row-major n_res x n_par).
inline LevMarResult levenberg_marquardt(
    const std::function<void(std::span<const double> p, std::vector<double>& residual,
                             std::vector<double>& jacobian)>& model,
    std::vector<double> p0, std::size_t n_res, int max_iterations = 200,
    double rel_tol = 1e-12) {
    const std::size_t n_par = p0.size();
    std::vector<double> r(n_res), J(n_res * n_par);
    std::vector<double> r_try(n_res), J_try(n_res * n_par);

    auto cost_of = [&](const std::vector<double>& rr) {
        double s = 0.0;
        for (double v : rr)
            s += v * v;
        return s;
    };

    model(p0, r, J);
    double cost = cost_of(r);
    double lambda = 1e-3;

    LevMarResult out;
    out.params = p0;
    out.cost = cost;

    for (int it = 0; it < max_iterations; ++it) {
        // Normal equations: (J^T J + lambda diag(J^T J)) delta = J^T r
        std::vector<double> JtJ(n_par * n_par, 0.0), Jtr(n_par, 0.0);
        for (std::size_t i = 0; i < n_res; ++i)
            for (std::size_t a = 0; a < n_par; ++a) {
                Jtr[a] += J[i * n_par + a] * r[i];
                for (std::size_t b = a; b < n_par; ++b)
                    JtJ[a * n_par + b] += J[i * n_par + a] * J[i * n_par + b];
            }
        for (std::size_t a = 0; a < n_par; ++a)
            for (std::size_t b = 0; b < a; ++b)
                JtJ[a * n_par + b] = JtJ[b * n_par + a];

        std::vector<double> A = JtJ;
        for (std::size_t a = 0; a < n_par; ++a)
            A[a * n_par + a] += lambda * std::max(JtJ[a * n_par + a], 1e-30);
        std::vector<double> delta = Jtr;
        if (!solve_dense(A, delta, n_par)) {
            lambda *= 10.0;
            continue;
        }

        std::vector<double> p_try = out.params;
        for (std::size_t a = 0; a < n_par; ++a)
            p_try[a] += delta[a];
        model(p_try, r_try, J_try);
        const double cost_try = cost_of(r_try);

        if (cost_try < cost) {
            const bool small_step = std::abs(cost - cost_try) <= rel_tol * (cost + 1e-300);
            out.params = std::move(p_try);
            r.swap(r_try);
            J.swap(J_try);
            cost = cost_try;
            lambda = std::max(lambda * 0.25, 1e-12);
            out.iterations = it + 1;
            if (small_step) {
                out.converged = true;
                break;
            }
        } else {
            lambda *= 10.0;
            if (lambda > 1e12) {
                out.converged = true;  // stuck in a flat region; accept current point
                break;
            }
        }
    }
    out.cost = cost;

    // Covariance diagonal: sigma^2 (J^T J)^{-1}, column-by-column solve.
    out.covariance_diag.assign(n_par, 0.0);
    if (n_res > n_par) {
        const double sigma2 = cost / static_cast<double>(n_res - n_par);
        for (std::size_t col = 0; col < n_par; ++col) {
            std::vector<double> JtJ(n_par * n_par, 0.0);
            for (std::size_t i = 0; i < n_res; ++i)
                for (std::size_t a = 0; a < n_par; ++a)
                    for (std::size_t b = 0; b < n_par; ++b)
                        JtJ[a * n_par + b] += J[i * n_par + a] * J[i * n_par + b];
            std::vector<double> e(n_par, 0.0);
            e[col] = 1.0;
            if (solve_dense(JtJ, e, n_par))
                out.covariance_diag[col] = sigma2 * e[col];
        }
    }
    return out;
}

}  // namespace rydlens::detail
