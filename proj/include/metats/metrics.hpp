#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "metats/gaussmath.hpp"
#include "metats/meta.hpp"

namespace metats {

/// Outage threshold on post-processing SINR, dB.
inline constexpr double kOutageDb = 10.0;

/// Reference spread around the true prior mean used by the KL trace.
inline constexpr double kKlReferenceVar = 1e-2;

/// One CPI of one track. All indices are 0-based.
struct CpiRecord {
    std::size_t cpi = 0;
    int state = 0;
    int obs = 0;
    std::size_t waveform = 0;
    double sinr_db = 0.0;
    double loss = 0.0;
    double oracle_loss = 0.0;   ///< best expected loss available this CPI
    double regret_inc = 0.0;
    bool suboptimal = false;
    bool outage_10db = false;
};

struct TrackRecord {
    std::string policy;
    std::uint64_t seed = 0;
    std::size_t track = 0;
    std::vector<CpiRecord> rows;
    /// KL of the meta-posterior used for this track against the truth;
    /// meaningful for meta-ts only.
    double kl_to_truth = 0.0;
    bool has_kl = false;
};

/// max_i expected[i] - expected[chosen]. Throws IndexOutOfRange.
double regret_increment(std::span<const double> expected, std::size_t chosen);

/// Fraction of CPIs whose SINR is below threshold_db. Throws EmptyInput.
double outage_frequency(std::span<const CpiRecord> rows, double threshold_db = kOutageDb);
double outage_frequency(std::span<const TrackRecord> tracks, double threshold_db = kOutageDb);

/// Fraction of CPIs where the chosen waveform was not the oracle's best.
double suboptimal_frequency(std::span<const CpiRecord> rows);
double suboptimal_frequency(std::span<const TrackRecord> tracks);

/// KL(N(mu_s, precision_s^-1) || N(mu_star, kKlReferenceVar I)) for each entry.
std::vector<double> kl_trace(std::span<const MetaPosterior> history, const Vector& mu_star);

struct BoundInputs {
    double kl = 0.0;             ///< KL(posterior || prior)
    double m = 2.0;              ///< sample count
    double delta = 0.05;
    double empirical_error = 0.0;
};

/// empirical_error + sqrt((kl + ln(m / delta)) / (2 (m - 1))).
double pac_bayes_single(const BoundInputs& b);

/// mean empirical error
///   + mean_i sqrt((env_kl + kl_i + ln(2 n m_i / delta)) / (2 (m_i - 1)))
///   + sqrt((env_kl + ln(2 n / delta)) / (2 (n - 1)))
/// with n = n_tasks.
double pac_bayes_meta(std::span<const BoundInputs> per_task, double env_kl, std::size_t n_tasks,
                      double delta);

/// Sorted distinct values paired with the fraction of samples <= value.
std::vector<std::pair<double, double>> ecdf(std::span<const double> values);

} // namespace metats
