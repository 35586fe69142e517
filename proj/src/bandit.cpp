#include "metats/bandit.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "metats/errors.hpp"

namespace metats {

double compute_loss(double sinr_post, double sinr_target) {
    if (!(sinr_target > 0.0)) throw InvalidInput("sinr_target must be positive");
    if (std::isnan(sinr_post)) throw InvalidInput("sinr_post is NaN");
    return std::clamp(sinr_post / sinr_target, 0.0, 1.0);
}

void PairStats::add(double loss) {
    ++count;
    const double delta = loss - mean;
    mean += delta / static_cast<double>(count);
    m2 += delta * (loss - mean);
    max = count == 1 ? loss : std::max(max, loss);
}

Vector PairStats::context() const {
    Vector phi(kContextDim);
    if (count == 0) {
        phi << kColdMean, kColdVariance, kColdMean;
    } else {
        const double var = count == 1 ? kColdVariance : m2 / static_cast<double>(count);
        phi << mean, std::max(var, 0.0), max;
    }
    return phi;
}

TsAgent::TsAgent(LinearPosterior posterior, std::size_t catalog_size, std::size_t n_obs)
    : posterior_(std::move(posterior)), catalog_size_(catalog_size), n_obs_(n_obs),
      stats_(catalog_size * n_obs) {
    if (catalog_size_ == 0 || n_obs_ == 0) throw InvalidInput("agent needs waveforms and observations");
}

TsAgent TsAgent::from_prior(const Gaussian& prior, double noise_var, std::size_t catalog_size,
                            std::size_t n_obs) {
    return TsAgent(LinearPosterior::from_prior(prior, noise_var), catalog_size, n_obs);
}

const PairStats& TsAgent::stats(int obs, std::size_t waveform) const {
    if (obs < 0 || static_cast<std::size_t>(obs) >= n_obs_)
        throw IndexOutOfRange("observation " + std::to_string(obs) + " out of range");
    if (waveform >= catalog_size_)
        throw IndexOutOfRange("waveform " + std::to_string(waveform) + " out of range");
    return stats_[waveform * n_obs_ + static_cast<std::size_t>(obs)];
}

Vector build_context(const TsAgent& agent, int obs, std::size_t waveform) {
    return agent.stats(obs, waveform).context();
}

std::vector<Vector> build_contexts(const TsAgent& agent, int obs) {
    std::vector<Vector> out;
    out.reserve(agent.catalog_size());
    for (std::size_t w = 0; w < agent.catalog_size(); ++w) out.push_back(build_context(agent, obs, w));
    return out;
}

std::size_t argmax_score(std::span<const Vector> contexts, const Vector& theta) {
    if (contexts.empty()) throw EmptyInput("no contexts to choose from");
    std::size_t best = 0;
    double best_score = 0.0;
    for (std::size_t i = 0; i < contexts.size(); ++i) {
        if (contexts[i].size() != theta.size())
            throw DimensionMismatch("context and parameter dimensions differ");
        const double score = contexts[i].dot(theta);
        if (i == 0 || score > best_score) {
            best = i;
            best_score = score;
        }
    }
    return best;
}

std::size_t thompson_select(const Gaussian& belief, std::span<const Vector> contexts, Rng& rng) {
    return argmax_score(contexts, sample_gaussian(belief, rng));
}

std::size_t select_waveform(const TsAgent& agent, int obs, Rng& rng) {
    const auto contexts = build_contexts(agent, obs);
    return thompson_select(agent.posterior().belief(), contexts, rng);
}

TsAgent record(const TsAgent& agent, const HistoryEntry& entry) {
    if (!(entry.loss >= 0.0 && entry.loss <= 1.0)) throw InvalidInput("loss must lie in [0, 1]");
    (void)agent.stats(entry.obs, entry.waveform);   // range check
    TsAgent next = agent;
    next.stats_[entry.waveform * next.n_obs_ + static_cast<std::size_t>(entry.obs)].add(entry.loss);
    next.posterior_ = blr_update(agent.posterior_, entry.phi, entry.loss);
    return next;
}

double synthetic_loss(const Vector& theta, const Vector& phi, double noise_var, Rng& rng) {
    if (theta.size() != phi.size())
        throw DimensionMismatch("parameter has dimension " + std::to_string(theta.size()) +
                                ", context has " + std::to_string(phi.size()));
    if (!(noise_var >= 0.0)) throw InvalidVariance("noise variance must be nonnegative");
    const double eta = standard_normal(rng);
    return std::clamp(theta.dot(phi) + std::sqrt(noise_var) * eta, 0.0, 1.0);
}

} // namespace metats
