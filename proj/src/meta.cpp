#include "metats/meta.hpp"

#include <cmath>
#include <string>

#include <Eigen/Cholesky>

#include "metats/errors.hpp"

namespace metats {

namespace {

bool positive_finite(double v) { return v > 0.0 && std::isfinite(v); }

} // namespace

Gaussian MetaPosterior::belief() const { return Gaussian(mu, spd_inverse(precision)); }

MetaPosterior init_meta(double sigma_q_sq, Eigen::Index d, double sigma0_sq, double noise_var) {
    if (!positive_finite(sigma_q_sq)) throw InvalidVariance("sigma_q_sq must be positive");
    if (!positive_finite(sigma0_sq)) throw InvalidVariance("sigma0_sq must be positive");
    if (!positive_finite(noise_var)) throw InvalidVariance("noise_var must be positive");
    if (d <= 0) throw DimensionMismatch("dimension must be positive");
    MetaPosterior mp;
    mp.mu = Vector::Zero(d);
    mp.precision = Matrix::Identity(d, d) / sigma_q_sq;
    mp.sigma0_sq = sigma0_sq;
    mp.noise_var = noise_var;
    return mp;
}

Gaussian sample_instance_prior(const MetaPosterior& mp, Rng& rng) {
    // Draw mu + L^-T z where precision = L L^T, avoiding an explicit inverse.
    const Matrix l = cholesky(mp.precision);
    Vector z(mp.dim());
    for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = standard_normal(rng);
    const Vector offset = l.transpose().triangularView<Eigen::Upper>().solve(z);
    return Gaussian::isotropic(mp.mu + offset, mp.sigma0_sq);
}

MetaPosterior meta_update(const MetaPosterior& mp, const TrackData& data) {
    if (data.x.rows() != data.l.size())
        throw DimensionMismatch("track has " + std::to_string(data.x.rows()) + " context rows but " +
                                std::to_string(data.l.size()) + " losses");
    if (data.x.rows() == 0) return mp;
    if (data.x.cols() != mp.dim())
        throw DimensionMismatch("contexts have dimension " + std::to_string(data.x.cols()) +
                                ", meta-posterior has " + std::to_string(mp.dim()));

    const auto n = data.x.rows();
    Matrix middle = mp.sigma0_sq * (data.x * data.x.transpose());
    middle.diagonal().array() += mp.noise_var;
    middle = 0.5 * (middle + middle.transpose());

    Eigen::LLT<Matrix> llt(middle);
    if (llt.info() != Eigen::Success) {
        llt.compute(middle + 1e-10 * Matrix::Identity(n, n));
        if (llt.info() != Eigen::Success)
            throw NotPositiveDefinite("meta-update middle matrix is not positive definite");
    }
    const Matrix mx = llt.solve(data.x);   // M X
    const Vector ml = llt.solve(data.l);   // M L

    MetaPosterior next = mp;
    next.precision = mp.precision + data.x.transpose() * mx;
    next.precision = 0.5 * (next.precision + next.precision.transpose());
    const Vector rhs = mp.precision * mp.mu + data.x.transpose() * ml;
    next.mu = spd_inverse(next.precision) * rhs;
    return next;
}

} // namespace metats
