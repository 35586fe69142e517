#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "metats/bandit.hpp"
#include "metats/config.hpp"
#include "metats/fstc.hpp"
#include "metats/meta.hpp"
#include "metats/metrics.hpp"

namespace metats {

/// Purpose tags for derived random streams. Streams are keyed by
/// (seed, purpose, ...) so that every policy faces the same scene, channel
/// and noise realizations.
enum StreamTag : std::uint64_t {
    kSceneStream = 1,    // (seed): transition table, synthetic context table
    kEnvStream = 2,      // (seed, track): instance, states, observations
    kNoiseStream = 3,    // (seed, track): realized loss noise
    kOracleStream = 4,   // (seed, track): oracle noise-floor draws
    kPolicyStream = 5,   // (seed, policy, track): decisions
    kPriorStream = 6,    // (seed, policy, track): instance-prior draws
};

/// Receiver bank for the first k catalog waveforms under a config's channel.
std::shared_ptr<const ReceiverBank> make_receiver_bank(const ExperimentConfig& c);

ChannelConfig channel_config(const ExperimentConfig& c);
TaskDistribution task_distribution(const ExperimentConfig& c);

/// Everything shared by all tracks of one replicate.
struct Scenario {
    ExperimentConfig config;
    TaskDistribution task;
    ChannelConfig channel;
    StateProcess state_proc;
    double sinr_target = 1.0;   ///< linear
    std::uint64_t seed = 0;
    /// Synthetic mode: fixed context for (observation, waveform) at
    /// [obs * k + w].
    std::vector<Vector> context_table;
    /// Physical mode only.
    std::shared_ptr<const ReceiverBank> bank;

    const Vector& table_context(int obs, std::size_t w) const;
};

/// Builds the scene for one seed. In physical mode a bank may be passed in
/// to share it between replicates; otherwise one is built.
Scenario make_scenario(const ExperimentConfig& c, std::uint64_t seed,
                       std::shared_ptr<const ReceiverBank> bank = nullptr);

/// One track's environment, identical for every policy.
struct TrackEnvironment {
    Vector theta;
    FstcInstance instance;   ///< physical mode
    std::vector<int> states;
    std::vector<int> obs;
};

TrackEnvironment draw_track_environment(const Scenario& sc, std::size_t track);

struct TrackOutcome {
    std::vector<CpiRecord> rows;
    TrackData data;   ///< contexts and losses of the chosen waveforms
};

/// Run one track. `prior` is the instance prior handed to Thompson sampling;
/// nullptr selects uniformly at random instead.
TrackOutcome run_track(const Scenario& sc, const TrackEnvironment& env, std::size_t track,
                       const Gaussian* prior, Rng& decisions);

struct ExperimentResult {
    std::vector<TrackRecord> tracks;
    /// meta-ts: the meta-posterior in force at the start of each track,
    /// followed by the final one (m + 1 entries). Empty otherwise.
    std::vector<MetaPosterior> meta_history;
};

ExperimentResult run_meta_experiment(const Scenario& sc, Policy policy);

} // namespace metats
