#pragma once

#include "metats/gaussmath.hpp"
#include "metats/random.hpp"

namespace metats {

/// Gaussian meta-posterior N(mu, precision^-1) over the mean of the
/// instance prior N(mean, sigma0_sq I).
struct MetaPosterior {
    Vector mu;
    Matrix precision;
    double sigma0_sq = 1.0;   ///< instance-prior variance
    double noise_var = 1.0;   ///< loss-observation noise variance

    Eigen::Index dim() const noexcept { return mu.size(); }
    Gaussian belief() const;
};

/// mu = 0, precision = I / sigma_q_sq. Throws InvalidVariance unless all three
/// variances are positive and finite.
MetaPosterior init_meta(double sigma_q_sq, Eigen::Index d, double sigma0_sq, double noise_var);

/// Draw a mean from the meta-posterior and return N(mean, sigma0_sq I).
Gaussian sample_instance_prior(const MetaPosterior& mp, Rng& rng);

/// Contexts (one row per CPI) and the losses observed with them.
struct TrackData {
    Matrix x;   ///< n x d
    Vector l;   ///< n
};

/// Joint update with a whole track:
///   M = (noise_var I + sigma0_sq X X^T)^-1
///   precision' = precision + X^T M X
///   mu' = precision'^-1 (precision mu + X^T M L)
/// An empty track returns mp unchanged.
MetaPosterior meta_update(const MetaPosterior& mp, const TrackData& data);

} // namespace metats
