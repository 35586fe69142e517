#pragma once

#include <Eigen/Core>

#include "metats/random.hpp"

namespace metats {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Tolerance used to decide whether a matrix is symmetric.
inline constexpr double kSymmetryTol = 1e-10;

/// Lower-triangular Cholesky factor of a symmetric positive-definite matrix.
/// On failure the factorization is retried once with 1e-10 * I added to the
/// diagonal; NotPositiveDefinite is thrown if that also fails.
Matrix cholesky(const Matrix& m);

/// Inverse of a symmetric positive-definite matrix, symmetrized.
Matrix spd_inverse(const Matrix& m);

/// log det of a symmetric positive-definite matrix.
double spd_log_det(const Matrix& m);

/// Multivariate normal belief N(mean, cov).
class Gaussian {
public:
    /// Throws DimensionMismatch or NotPositiveDefinite if the pair is invalid.
    Gaussian(Vector mean, Matrix cov);

    /// N(mean, var * I).
    static Gaussian isotropic(Vector mean, double var);

    const Vector& mean() const noexcept { return mean_; }
    const Matrix& cov() const noexcept { return cov_; }
    Eigen::Index dim() const noexcept { return mean_.size(); }

private:
    Vector mean_;
    Matrix cov_;
};

/// Draw mean + L z with z standard normal and L the Cholesky factor of cov.
Vector sample_gaussian(const Gaussian& g, Rng& rng);

/// Closed-form KL(q || p) between two Gaussians of equal dimension.
double kl_gaussian(const Gaussian& q, const Gaussian& p);

/// Bayesian linear-regression posterior over theta for the model
/// loss = <theta, phi> + N(0, noise_var), kept in information form
/// (precision Lambda, precision-weighted mean b = Lambda mu).
class LinearPosterior {
public:
    LinearPosterior(Matrix precision, Vector precision_mean, double noise_var);

    /// Posterior equal to the given prior, ready to absorb observations.
    static LinearPosterior from_prior(const Gaussian& prior, double noise_var);

    const Matrix& precision() const noexcept { return precision_; }
    const Vector& precision_mean() const noexcept { return precision_mean_; }
    double noise_var() const noexcept { return noise_var_; }
    Eigen::Index dim() const noexcept { return precision_mean_.size(); }

    Vector mean() const;
    Matrix covariance() const;
    Gaussian belief() const;

private:
    Matrix precision_;
    Vector precision_mean_;
    double noise_var_;
};

/// One conjugate update with feature phi and observed loss. Returns a new
/// posterior; the argument is left untouched.
LinearPosterior blr_update(const LinearPosterior& p, const Vector& phi, double loss);

} // namespace metats
