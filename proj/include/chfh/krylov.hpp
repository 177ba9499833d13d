#pragma once

// Krylov solvers on flat cell arrays. Operators are callables
// void(std::span<const double> in, std::span<double> out).

#include <cmath>
#include <span>
#include <vector>

#include "chfh/kernels.hpp"

namespace chfh {

struct KrylovResult {
    int iterations = 0;
    double rel_residual = 0.0;
    bool converged = false;
};

inline void project_out_mean(std::span<double> v)
{
    kernels::add_constant(-kernels::sum(v) / static_cast<double>(v.size()), v);
}

/// Preconditioned conjugate gradients for a symmetric positive (semi)definite
/// operator. With project_mean set, the iteration lives on the zero-mean
/// subspace and the mean is removed after every operator and preconditioner
/// application. x holds the initial guess on entry.
template <class ApplyA, class ApplyM>
KrylovResult pcg(ApplyA&& apply_a, ApplyM&& apply_m, std::span<const double> b,
                 std::span<double> x, double tol, int max_iter, bool project_mean)
{
    const std::size_t n = b.size();
    std::vector<double> r(b.begin(), b.end()), z(n), p(n), q(n);
    if (project_mean) {
        project_out_mean(r);
        project_out_mean(x);
    }
    const double bnorm = std::sqrt(kernels::dot(r, r));
    KrylovResult res;
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        res.converged = true;
        return res;
    }
    apply_a(std::span<const double>(x), std::span<double>(q));
    kernels::axpy(-1.0, q, r);
    if (project_mean)
        project_out_mean(r);

    double rz_old = 0.0;
    for (int it = 0; it < max_iter; ++it) {
        const double rnorm = std::sqrt(kernels::dot(r, r));
        res.rel_residual = rnorm / bnorm;
        if (res.rel_residual <= tol) {
            res.converged = true;
            return res;
        }
        apply_m(std::span<const double>(r), std::span<double>(z));
        if (project_mean)
            project_out_mean(z);
        const double rz = kernels::dot(r, z);
        if (it == 0)
            p = z;
        else
            kernels::xpby(z, rz / rz_old, p);
        rz_old = rz;
        apply_a(std::span<const double>(p), std::span<double>(q));
        if (project_mean)
            project_out_mean(q);
        const double pq = kernels::dot(p, q);
        if (!(pq > 0.0))
            return res;
        const double alpha = rz / pq;
        kernels::axpy(alpha, p, x);
        kernels::axpy(-alpha, q, r);
        res.iterations = it + 1;
    }
    res.rel_residual = std::sqrt(kernels::dot(r, r)) / bnorm;
    res.converged = res.rel_residual <= tol;
    return res;
}

/// Right-preconditioned restarted GMRES. x holds the initial guess on entry.
/// The residual is measured in the Euclidean norm relative to ||b||.
template <class ApplyA, class ApplyM>
KrylovResult gmres(ApplyA&& apply_a, ApplyM&& apply_m, std::span<const double> b,
                   std::span<double> x, double tol, int max_iter, int restart)
{
    const std::size_t n = b.size();
    KrylovResult res;
    const double bnorm = std::sqrt(kernels::dot(b, b));
    if (bnorm == 0.0) {
        std::fill(x.begin(), x.end(), 0.0);
        res.converged = true;
        return res;
    }
    const int m = restart;
    // Basis vectors are allocated on first use; most solves stop after a few.
    std::vector<std::vector<double>> v(1, std::vector<double>(n));
    std::vector<std::vector<double>> h(static_cast<std::size_t>(m + 1),
                                       std::vector<double>(static_cast<std::size_t>(m), 0.0));
    std::vector<double> cs(m), sn(m), g(m + 1), w(n), z(n), y(m);

    int total = 0;
    while (total < max_iter) {
        // r = b - A x
        apply_a(std::span<const double>(x), std::span<double>(w));
        for (std::size_t k = 0; k < n; ++k)
            v[0][k] = b[k] - w[k];
        double beta = std::sqrt(kernels::dot(v[0], v[0]));
        res.rel_residual = beta / bnorm;
        if (res.rel_residual <= tol) {
            res.converged = true;
            return res;
        }
        kernels::scale(1.0 / beta, v[0]);
        std::fill(g.begin(), g.end(), 0.0);
        g[0] = beta;
        int j = 0;
        for (; j < m && total < max_iter; ++j, ++total) {
            apply_m(std::span<const double>(v[j]), std::span<double>(z));
            apply_a(std::span<const double>(z), std::span<double>(w));
            // Modified Gram-Schmidt.
            for (int i = 0; i <= j; ++i) {
                h[i][j] = kernels::dot(w, v[i]);
                kernels::axpy(-h[i][j], v[i], w);
            }
            h[j + 1][j] = std::sqrt(kernels::dot(w, w));
            if (h[j + 1][j] > 0.0) {
                if (v.size() < static_cast<std::size_t>(j + 2))
                    v.emplace_back(n);
                v[j + 1] = w;
                kernels::scale(1.0 / h[j + 1][j], v[j + 1]);
            }
            for (int i = 0; i < j; ++i) {
                const double t = cs[i] * h[i][j] + sn[i] * h[i + 1][j];
                h[i + 1][j] = -sn[i] * h[i][j] + cs[i] * h[i + 1][j];
                h[i][j] = t;
            }
            const double denom = std::hypot(h[j][j], h[j + 1][j]);
            cs[j] = denom == 0.0 ? 1.0 : h[j][j] / denom;
            sn[j] = denom == 0.0 ? 0.0 : h[j + 1][j] / denom;
            h[j][j] = denom;
            h[j + 1][j] = 0.0;
            g[j + 1] = -sn[j] * g[j];
            g[j] = cs[j] * g[j];
            res.rel_residual = std::abs(g[j + 1]) / bnorm;
            if (res.rel_residual <= tol) {
                ++j;
                ++total;
                break;
            }
        }
        // Back substitution and update x += M (V y).
        for (int i = j - 1; i >= 0; --i) {
            double s = g[i];
            for (int k = i + 1; k < j; ++k)
                s -= h[i][k] * y[k];
            y[i] = s / h[i][i];
        }
        std::fill(w.begin(), w.end(), 0.0);
        for (int i = 0; i < j; ++i)
            kernels::axpy(y[i], v[i], w);
        apply_m(std::span<const double>(w), std::span<double>(z));
        kernels::axpy(1.0, z, x);
        res.iterations = total;
        if (res.rel_residual <= tol) {
            res.converged = true;
            return res;
        }
    }
    return res;
}

} // namespace chfh
