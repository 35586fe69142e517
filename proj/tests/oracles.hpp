// Independent reference computations for the test suite. None of these call
// the library routine they are used to check.
#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "metats/gaussmath.hpp"
#include "metats/random.hpp"

namespace oracle {

using metats::Matrix;
using metats::Vector;

inline Matrix random_spd(Eigen::Index d, metats::Rng& rng, double ridge = 0.5) {
    Matrix a(d, d);
    for (Eigen::Index i = 0; i < d; ++i)
        for (Eigen::Index j = 0; j < d; ++j) a(i, j) = metats::standard_normal(rng);
    return a * a.transpose() + ridge * Matrix::Identity(d, d);
}

inline Vector random_vector(Eigen::Index d, metats::Rng& rng, double scale = 1.0) {
    Vector v(d);
    for (Eigen::Index i = 0; i < d; ++i) v[i] = scale * metats::standard_normal(rng);
    return v;
}

/// Log density of N(mean, cov) through an LU decomposition.
struct LogDensity {
    Vector mean;
    Matrix inv;
    double log_norm;

    LogDensity(const Vector& m, const Matrix& cov) : mean(m) {
        Eigen::FullPivLU<Matrix> lu(cov);
        inv = lu.inverse();
        log_norm = -0.5 * (static_cast<double>(m.size()) * std::log(2.0 * std::numbers::pi) +
                           std::log(lu.determinant()));
    }
    double operator()(const Vector& x) const {
        const Vector r = x - mean;
        return log_norm - 0.5 * r.dot(inv * r);
    }
};

/// Monte Carlo estimate of E_q[log q - log p] using an eigen-decomposition
/// sampler for q.
inline double kl_monte_carlo(const Vector& mq, const Matrix& sq, const Vector& mp, const Matrix& sp,
                             std::size_t draws, metats::Rng& rng) {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(sq);
    const Matrix root = eig.eigenvectors() * eig.eigenvalues().cwiseSqrt().asDiagonal();
    const LogDensity lq(mq, sq), lp(mp, sp);
    double acc = 0.0;
    Vector z(mq.size());
    for (std::size_t i = 0; i < draws; ++i) {
        for (Eigen::Index j = 0; j < z.size(); ++j) z[j] = metats::standard_normal(rng);
        const Vector x = mq + root * z;
        acc += lq(x) - lp(x);
    }
    return acc / static_cast<double>(draws);
}

/// Ridge-regression posterior mean from the batch normal equations:
/// (X^T X / s2 + P0) mu = X^T y / s2 + P0 m0.
inline Vector batch_posterior_mean(const Matrix& x, const Vector& y, double s2, const Vector& m0,
                                   const Matrix& p0) {
    const Matrix a = x.transpose() * x / s2 + p0;
    const Vector b = x.transpose() * y / s2 + p0 * m0;
    return a.colPivHouseholderQr().solve(b);
}

struct Moments {
    Vector mean;
    Matrix cov;
};

/// Marginal posterior of the prior mean mu in the hierarchy
///   mu ~ N(mu0, diag(prior_var)),  theta | mu ~ N(mu, s0 I),  l_i ~ N(x_i' theta, s2)
/// for d = 1 or 2, by integrating theta out on a tensor grid and taking
/// moments of mu on a second grid. Each grid spans +-half_width around its
/// centre with `points` nodes per axis.
Moments grid_marginal_posterior(const Matrix& x, const Vector& l, const Vector& mu0,
                                const Vector& prior_var, double s0, double s2,
                                const Vector& mu_centre, double mu_half, const Vector& th_centre,
                                double th_half, int points);

/// Direct O(N^2) aperiodic cross-correlation with zero lag at tx.size() - 1.
inline std::vector<std::complex<double>> naive_xcorr(const std::vector<std::complex<double>>& tx,
                                                     const std::vector<std::complex<double>>& rx) {
    const long nt = static_cast<long>(tx.size()), nr = static_cast<long>(rx.size());
    std::vector<std::complex<double>> out(static_cast<std::size_t>(nt + nr - 1));
    for (long m = -(nt - 1); m <= nr - 1; ++m) {
        std::complex<double> acc{0.0, 0.0};
        for (long u = 0; u < nt; ++u) {
            const long t = u + m;
            if (t >= 0 && t < nr) acc += rx[t] * std::conj(tx[u]);
        }
        out[static_cast<std::size_t>(m + nt - 1)] = acc;
    }
    return out;
}

/// Standard normal CDF.
inline double phi(double z) { return 0.5 * std::erfc(-z / std::numbers::sqrt2); }

/// Spearman rank correlation (no ties expected).
double spearman(const std::vector<double>& a, const std::vector<double>& b);

} // namespace oracle
