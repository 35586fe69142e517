#include "metats/gaussmath.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>

#include "metats/errors.hpp"

namespace metats {

namespace {

constexpr double kJitter = 1e-10;

void require_square_symmetric(const Matrix& m, const char* what) {
    if (m.rows() != m.cols())
        throw DimensionMismatch(std::string(what) + " is not square");
    if (m.rows() == 0) throw DimensionMismatch(std::string(what) + " is empty");
    if (!m.allFinite()) throw NotPositiveDefinite(std::string(what) + " has non-finite entries");
    const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
    if (asym > kSymmetryTol * std::max(1.0, m.cwiseAbs().maxCoeff()))
        throw NotPositiveDefinite(std::string(what) + " is not symmetric");
}

// Factor with one jitter retry. Eigen's LLT reports failure on a non-positive pivot.
Eigen::LLT<Matrix> factor(const Matrix& m) {
    Eigen::LLT<Matrix> llt(m);
    if (llt.info() == Eigen::Success) return llt;
    llt.compute(m + kJitter * Matrix::Identity(m.rows(), m.cols()));
    if (llt.info() != Eigen::Success)
        throw NotPositiveDefinite("Cholesky factorization failed after jitter retry");
    return llt;
}

Matrix symmetrized(const Matrix& m) { return 0.5 * (m + m.transpose()); }

} // namespace

Matrix cholesky(const Matrix& m) {
    require_square_symmetric(m, "matrix");
    return factor(m).matrixL();
}

Matrix spd_inverse(const Matrix& m) {
    require_square_symmetric(m, "matrix");
    auto llt = factor(m);
    return symmetrized(llt.solve(Matrix::Identity(m.rows(), m.cols())));
}

double spd_log_det(const Matrix& m) {
    require_square_symmetric(m, "matrix");
    Matrix l = factor(m).matrixL();
    return 2.0 * l.diagonal().array().log().sum();
}

Gaussian::Gaussian(Vector mean, Matrix cov) : mean_(std::move(mean)), cov_(std::move(cov)) {
    if (cov_.rows() != mean_.size() || cov_.cols() != mean_.size())
        throw DimensionMismatch("Gaussian mean has dimension " + std::to_string(mean_.size()) +
                                " but covariance is " + std::to_string(cov_.rows()) + "x" +
                                std::to_string(cov_.cols()));
    require_square_symmetric(cov_, "covariance");
    (void)factor(cov_);
}

Gaussian Gaussian::isotropic(Vector mean, double var) {
    const auto d = mean.size();
    return Gaussian(std::move(mean), var * Matrix::Identity(d, d));
}

Vector sample_gaussian(const Gaussian& g, Rng& rng) {
    const Matrix l = factor(g.cov()).matrixL();
    Vector z(g.dim());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = standard_normal(rng);
    return g.mean() + l * z;
}

double kl_gaussian(const Gaussian& q, const Gaussian& p) {
    if (q.dim() != p.dim())
        throw DimensionMismatch("KL between Gaussians of dimension " + std::to_string(q.dim()) +
                                " and " + std::to_string(p.dim()));
    const auto d = static_cast<double>(q.dim());
    const Matrix lp = factor(p.cov()).matrixL();
    const Matrix lq = factor(q.cov()).matrixL();

    // tr(Sp^-1 Sq) = ||Lp^-1 Lq||_F^2, quad = ||Lp^-1 (mu_p - mu_q)||^2
    const Matrix a = lp.triangularView<Eigen::Lower>().solve(lq);
    const Vector diff = p.mean() - q.mean();
    const Vector b = lp.triangularView<Eigen::Lower>().solve(diff);
    const double log_det_p = 2.0 * lp.diagonal().array().log().sum();
    const double log_det_q = 2.0 * lq.diagonal().array().log().sum();

    const double kl = 0.5 * (a.squaredNorm() + b.squaredNorm() - d + log_det_p - log_det_q);
    return kl;
}

LinearPosterior::LinearPosterior(Matrix precision, Vector precision_mean, double noise_var)
    : precision_(std::move(precision)), precision_mean_(std::move(precision_mean)),
      noise_var_(noise_var) {
    if (precision_.rows() != precision_mean_.size() || precision_.cols() != precision_mean_.size())
        throw DimensionMismatch("posterior precision and precision-weighted mean disagree");
    if (!(noise_var_ > 0.0) || !std::isfinite(noise_var_))
        throw InvalidVariance("noise variance must be positive and finite");
    require_square_symmetric(precision_, "precision");
}

LinearPosterior LinearPosterior::from_prior(const Gaussian& prior, double noise_var) {
    Matrix precision = spd_inverse(prior.cov());
    Vector b = precision * prior.mean();
    return LinearPosterior(std::move(precision), std::move(b), noise_var);
}

Vector LinearPosterior::mean() const { return factor(precision_).solve(precision_mean_); }

Matrix LinearPosterior::covariance() const { return spd_inverse(precision_); }

Gaussian LinearPosterior::belief() const { return Gaussian(mean(), covariance()); }

LinearPosterior blr_update(const LinearPosterior& p, const Vector& phi, double loss) {
    if (phi.size() != p.dim())
        throw DimensionMismatch("context has dimension " + std::to_string(phi.size()) +
                                ", posterior has " + std::to_string(p.dim()));
    const double inv_noise = 1.0 / p.noise_var();
    Matrix precision = p.precision() + inv_noise * phi * phi.transpose();
    precision = symmetrized(precision);
    Vector b = p.precision_mean() + (loss * inv_noise) * phi;
    return LinearPosterior(std::move(precision), std::move(b), p.noise_var());
}

} // namespace metats
