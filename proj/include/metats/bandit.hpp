#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "metats/gaussmath.hpp"
#include "metats/random.hpp"

namespace metats {

/// Context dimension: (mean, variance, max) of past losses.
inline constexpr Eigen::Index kContextDim = 3;

/// Context returned for a (waveform, observation) pair with no history:
/// the mean and max of a uniform belief on [0, 1] and its variance 1/12.
inline constexpr double kColdMean = 0.5;
inline constexpr double kColdVariance = 1.0 / 12.0;

/// clamp(sinr_post / sinr_target, 0, 1), both in linear power units.
double compute_loss(double sinr_post, double sinr_target);

/// Running statistics of the losses seen for one (waveform, observation) pair.
struct PairStats {
    std::size_t count = 0;
    double mean = 0.0;
    double m2 = 0.0;   ///< sum of squared deviations (Welford)
    double max = 0.0;

    void add(double loss);
    /// (mean, variance, max), with the cold-start fill where undefined.
    Vector context() const;
};

struct HistoryEntry {
    std::size_t cpi = 0;
    int obs = 0;
    std::size_t waveform = 0;
    double loss = 0.0;
    Vector phi;   ///< context that drove the decision
};

/// Per-track Thompson-sampling learner. Values are immutable; record()
/// returns an updated copy.
class TsAgent {
public:
    TsAgent(LinearPosterior posterior, std::size_t catalog_size, std::size_t n_obs);
    /// Agent whose initial belief over theta is `prior`.
    static TsAgent from_prior(const Gaussian& prior, double noise_var, std::size_t catalog_size,
                              std::size_t n_obs);

    const LinearPosterior& posterior() const noexcept { return posterior_; }
    std::size_t catalog_size() const noexcept { return catalog_size_; }
    std::size_t n_obs() const noexcept { return n_obs_; }
    const PairStats& stats(int obs, std::size_t waveform) const;

    friend TsAgent record(const TsAgent& agent, const HistoryEntry& entry);

private:
    LinearPosterior posterior_;
    std::size_t catalog_size_;
    std::size_t n_obs_;
    std::vector<PairStats> stats_;   // [waveform * n_obs + obs]
};

Vector build_context(const TsAgent& agent, int obs, std::size_t waveform);
/// Contexts for every catalog waveform under observation obs.
std::vector<Vector> build_contexts(const TsAgent& agent, int obs);

/// Index of the largest <contexts[i], theta>; ties go to the lowest index.
std::size_t argmax_score(std::span<const Vector> contexts, const Vector& theta);

/// Draw theta from the belief and return the best-scoring context.
std::size_t thompson_select(const Gaussian& belief, std::span<const Vector> contexts, Rng& rng);

/// Thompson step on the agent's own running-statistics contexts.
std::size_t select_waveform(const TsAgent& agent, int obs, Rng& rng);

/// Fold one CPI into the pair statistics and the posterior. The posterior is
/// updated with entry.phi, the context used at selection time.
TsAgent record(const TsAgent& agent, const HistoryEntry& entry);

/// clamp(<theta, phi> + N(0, noise_var), 0, 1). Always consumes one normal
/// draw so streams stay aligned whatever the noise level.
double synthetic_loss(const Vector& theta, const Vector& phi, double noise_var, Rng& rng);

} // namespace metats
