#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace metats {

enum class Policy { Random = 0, TsUninformative = 1, TsOracle = 2, MetaTs = 3 };
enum class Mode { Synthetic, Physical };

inline constexpr Policy kAllPolicies[] = {Policy::Random, Policy::TsUninformative,
                                          Policy::TsOracle, Policy::MetaTs};

std::string_view policy_name(Policy p);
/// Throws InvalidInput for an unknown name.
Policy parse_policy(std::string_view name);
std::string_view mode_name(Mode m);
Mode parse_mode(std::string_view name);

/// Everything needed to reproduce an experiment. The file format is one
/// `key = value` per line; `#` starts a comment; lists are comma separated
/// and seed lists accept ranges such as `1-20`.
struct ExperimentConfig {
    std::size_t m = 50;              ///< tracks
    std::size_t n = 200;             ///< CPIs per track
    std::size_t k = 5;               ///< waveforms, taken from the front of the catalog
    std::size_t d = 3;               ///< context dimension
    std::size_t n_states = 4;
    std::size_t memory = 2;
    std::size_t grid_delay = 64;
    std::size_t grid_doppler = 16;
    std::size_t ir_taps = 8;
    std::size_t oracle_draws = 64;
    std::size_t workers = 1;

    double sigma_q_sq = 1.0;         ///< meta-prior variance
    double sigma0_sq = 0.05;         ///< instance-prior variance
    double noise_var = 0.05;         ///< loss-observation noise variance
    double channel_noise_var = 1.0;  ///< receiver noise per sample
    double ir_kernel_scale = 2.0;
    double sinr_target_db = 12.0;
    double obs_flip_prob = 0.1;
    double dirichlet_concentration = 2.0;
    double target_power = 10.0;
    double clutter_power = 100.0;
    double doppler_scale = 0.0;

    std::vector<double> mu_star{0.3, -0.3, 0.3};
    std::vector<double> state_gain{0.25, 1.0, 4.0, 16.0};
    std::vector<std::uint64_t> seeds = default_seeds();
    std::vector<Policy> policies{kAllPolicies, kAllPolicies + 4};
    Mode mode = Mode::Synthetic;
    std::string output_dir = "out";

    /// Throws FieldError naming the first offending field.
    void validate() const;

    bool operator==(const ExperimentConfig&) const = default;

    static std::vector<std::uint64_t> default_seeds();
};

/// Parse config text. Unspecified keys keep their defaults. Throws ParseError
/// for malformed lines, unknown or repeated keys and unparsable values, and
/// FieldError if the result fails validation.
ExperimentConfig parse_config(std::string_view text);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Config text that parses back to an equal config.
std::string serialize(const ExperimentConfig& c);

/// Parse "1,2,5-8" style seed lists.
std::vector<std::uint64_t> parse_seed_list(std::string_view text);
std::vector<Policy> parse_policy_list(std::string_view text);

/// Shortest decimal text that reads back to the same double.
std::string format_double(double v);

} // namespace metats
