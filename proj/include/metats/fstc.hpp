#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "metats/gaussmath.hpp"
#include "metats/random.hpp"
#include "metats/waveforms.hpp"

namespace metats {

/// Hidden scene-state process with finite memory plus the noisy observation
/// kernel P(o | s) over the same alphabet.
struct StateProcess {
    std::size_t alphabet_size = 4;
    std::size_t memory = 2;
    /// One distribution over next states per (L-1)-state history. Rows are
    /// indexed by the history read as a base-|S| number, oldest state most
    /// significant.
    std::vector<std::vector<double>> transition;
    double obs_flip_prob = 0.1;

    /// Throws InvalidInput if the table has the wrong shape, a negative entry
    /// or a row that does not sum to 1 within 1e-9.
    void validate() const;

    std::size_t row_count() const;
    /// Row for a history of past states (oldest first). Only the last L-1
    /// entries are used; shorter histories are left-padded with state 0.
    std::size_t row_index(std::span<const int> history) const;

    /// Every row drawn independently from a symmetric Dirichlet(concentration).
    static StateProcess dirichlet(std::size_t alphabet_size, std::size_t memory,
                                  double concentration, double obs_flip_prob, Rng& rng);
    static StateProcess uniform(std::size_t alphabet_size, std::size_t memory, double obs_flip_prob);
};

int step_state(const StateProcess& sp, std::span<const int> history, Rng& rng);
int observe(const StateProcess& sp, int state, Rng& rng);

/// Target position on the delay-Doppler grid, 1-based cells.
struct TargetState {
    int delay_cell = 1;
    int doppler_cell = 1;
};

/// Fixed-but-unknown distribution that generates each track's channel.
struct TaskDistribution {
    Vector mu_star = Vector::Zero(3);
    double sigma0_sq = 0.05;
    double ir_kernel_scale = 2.0;
    std::size_t ir_taps = 8;

    void validate() const;
};

/// Scene-wide channel constants shared by every track.
struct ChannelConfig {
    std::size_t grid_delay = 64;      ///< N delay cells
    std::size_t grid_doppler = 16;    ///< M Doppler cells
    double noise_var = 1.0;           ///< receiver noise variance per sample
    double target_power = 10.0;       ///< mean power per target tap
    double clutter_power = 100.0;     ///< mean power per clutter tap
    std::vector<double> state_gain{0.25, 1.0, 4.0, 16.0};
    /// Doppler shift in cycles per pulse per Doppler cell away from the grid
    /// centre. 0 disables Doppler.
    double doppler_scale = 0.0;

    void validate(std::size_t alphabet_size) const;
    /// Doppler shift (cycles per pulse) for a Doppler cell.
    double doppler_cycles(int doppler_cell) const;
};

/// One track's finite-state target channel.
struct FstcInstance {
    Vector theta;
    ComplexVector target_ir;
    ComplexVector clutter_ir;
    StateProcess state_proc;
    double noise_var = 1.0;          ///< effective receiver noise variance
    double target_power = 1.0;       ///< effective per-tap target power
    double clutter_power = 1.0;      ///< effective per-tap clutter power (before state gain)
    std::vector<double> state_gain;
    double doppler_scale = 0.0;
    int clutter_delay_cell = 1;
    std::size_t grid_delay = 64;
    std::size_t grid_doppler = 16;
    std::vector<TargetState> trajectory;
};

/// softplus(x) / ln 2, so a zero task parameter leaves a gain at 1.
double unit_softplus(double x);

/// Complex GP draw over tap index with squared-exponential covariance of the
/// given length scale and unit per-tap power.
ComplexVector draw_impulse_response(std::size_t taps, double length_scale, Rng& rng);

/// Bounded random walk over the grid; starts uniformly at random.
std::vector<TargetState> draw_trajectory(std::size_t n_cpi, std::size_t grid_delay,
                                         std::size_t grid_doppler, Rng& rng);

/// Draw theta ~ N(mu*, sigma0^2 I), target/clutter responses, clutter
/// location and a trajectory of n_cpi positions. The three components of
/// theta scale target power, clutter power and noise level through
/// unit_softplus.
FstcInstance draw_instance(const TaskDistribution& task, const ChannelConfig& channel,
                           const StateProcess& state_proc, std::size_t n_cpi, Rng& rng);

/// SINR cap, 60 dB.
inline constexpr double kSinrCap = 1e6;

struct Reception {
    double sinr_post = 0.0;   ///< linear power ratio
    ComplexVector rx;         ///< received samples before matched filtering
};

/// Form the received window, matched-filter it and measure the SINR at the
/// target peak. The target peak lag is the strongest target-only output in a
/// window around the true delay; interference power there is the clutter
/// output power plus the noise floor averaged over every fully overlapped lag.
Reception receive(const FstcInstance& inst, int state, const TargetState& where,
                  const ComplexEnvelope& w, Rng& rng);

/// Precomputed per-waveform quantities that make per-CPI SINR evaluation
/// cheap: Doppler cuts of the ambiguity function and the eigenvalues of the
/// noise-output covariance over the reference lags. Immutable once built.
class ReceiverBank {
public:
    ReceiverBank(std::vector<ComplexEnvelope> catalog, const ChannelConfig& channel,
                 std::size_t ir_taps);

    std::size_t size() const noexcept { return catalog_.size(); }
    const ComplexEnvelope& envelope(std::size_t w) const { return catalog_.at(w); }
    std::size_t reference_lags() const noexcept { return reference_lags_; }

    /// Target and clutter powers at the target peak lag; these do not depend
    /// on receiver noise.
    struct Powers {
        double signal = 0.0;
        double clutter = 0.0;
        long peak_lag = 0;
    };
    Powers powers(const FstcInstance& inst, int state, const TargetState& where,
                  std::size_t w) const;

    /// One draw of the averaged noise floor with exactly the distribution the
    /// brute-force receiver produces.
    double draw_noise_floor(const FstcInstance& inst, std::size_t w, Rng& rng) const;

    /// SINR from powers and a noise-floor value, with the 60 dB cap applied.
    static double sinr(const Powers& p, double noise_floor);

    double sinr_post(const FstcInstance& inst, int state, const TargetState& where,
                     std::size_t w, Rng& rng) const;

private:
    const ComplexVector& cut(std::size_t w, int doppler_cell) const;

    std::vector<ComplexEnvelope> catalog_;
    ChannelConfig channel_;
    std::size_t ir_taps_;
    std::size_t reference_lags_;
    // cuts_[w][doppler_cell - 1], or a single entry when Doppler is disabled
    std::vector<std::vector<ComplexVector>> cuts_;
    std::vector<std::vector<double>> noise_eigs_;
};

/// Half-width, in samples, of the peak search window around the target taps.
inline constexpr long kPeakSearchMargin = 8;

} // namespace metats
