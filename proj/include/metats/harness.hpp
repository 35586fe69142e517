#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "metats/config.hpp"
#include "metats/experiment.hpp"
#include "metats/metrics.hpp"

namespace metats {

/// Per-track summary row. cum_regret runs across the whole replicate.
struct TrackSummary {
    std::string policy;
    std::uint64_t seed = 0;
    std::size_t track = 0;
    double cum_regret = 0.0;
    double mean_loss = 0.0;
    double outage_freq = 0.0;
    double subopt_freq = 0.0;
    std::optional<double> kl_to_truth;

    bool operator==(const TrackSummary&) const = default;
};

std::vector<TrackSummary> summarize(std::span<const TrackRecord> tracks);

inline constexpr const char* kCpiHeader =
    "policy,seed,track,cpi,state,obs,waveform,sinr_db,loss,oracle_loss,regret_inc,suboptimal,outage_10db";
inline constexpr const char* kTrackHeader =
    "policy,seed,track,cum_regret,mean_loss,outage_freq,subopt_freq,kl_to_truth";

std::string cpi_csv(std::span<const TrackRecord> tracks);
std::string track_csv(std::span<const TrackSummary> rows);
/// Parses text produced by track_csv. Throws ParseError on malformed input.
std::vector<TrackSummary> parse_track_csv(std::string_view text);

std::filesystem::path cpi_csv_path(const std::filesystem::path& dir, Policy p, std::uint64_t seed);
std::filesystem::path track_csv_path(const std::filesystem::path& dir, Policy p, std::uint64_t seed);

struct ReplicateResult {
    ExperimentResult experiment;
    std::vector<TrackSummary> summary;
    double wall_ms = 0.0;   ///< reported on the console only, never persisted
};

/// Run one (policy, seed) replicate in memory.
ReplicateResult run_replicate(const ExperimentConfig& c, Policy p, std::uint64_t seed,
                              std::shared_ptr<const ReceiverBank> bank = nullptr);

/// Run one replicate and write its two CSV files into dir. Throws IoError.
ReplicateResult run(const ExperimentConfig& c, Policy p, std::uint64_t seed,
                    const std::filesystem::path& dir,
                    std::shared_ptr<const ReceiverBank> bank = nullptr);

/// Worker count: METATS_WORKERS if set, else the config value.
std::size_t resolve_workers(const ExperimentConfig& c);

/// Every configured (policy, seed) replicate, spread over worker threads.
/// Returns replicate wall times in (policy, seed) order.
std::vector<double> run_all(const ExperimentConfig& c, const std::filesystem::path& dir);

/// Write each track's instance parameters (theta, responses, clutter cell)
/// and the scene's transition table for one seed.
void dump_instances(const ExperimentConfig& c, std::uint64_t seed, const std::filesystem::path& dir);

struct AggregateRow {
    std::string policy;
    std::size_t track = 0;
    std::size_t n_seeds = 0;
    double mean = 0.0;
    double stderr_ = 0.0;   ///< sample standard deviation / sqrt(n); 0 for one seed
};

/// Metric name -> rows ordered by (policy, track). Metrics are the per-track
/// columns plus cumulative outage and suboptimal frequencies.
std::map<std::string, std::vector<AggregateRow>> aggregate(std::span<const TrackSummary> rows);

/// Read every tracks_*.csv in in_dir and write aggregate_<metric>.csv files
/// to out_dir. Throws EmptyInput if no summaries are found.
void aggregate_dir(const std::filesystem::path& in_dir, const std::filesystem::path& out_dir);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

} // namespace metats
