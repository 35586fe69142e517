#include "metats/fstc.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include <Eigen/Eigenvalues>

#include "metats/errors.hpp"

namespace metats {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::size_t ipow(std::size_t base, std::size_t exp) {
    std::size_t r = 1;
    for (std::size_t i = 0; i < exp; ++i) r *= base;
    return r;
}

int sample_categorical(std::span<const double> probs, Rng& rng) {
    const double u = uniform01(rng);
    double acc = 0.0;
    int last_nonzero = 0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        if (probs[i] <= 0.0) continue;
        last_nonzero = static_cast<int>(i);
        acc += probs[i];
        if (u < acc) return static_cast<int>(i);
    }
    return last_nonzero;
}

int reflect_step(int cell, int step, int cells) {
    int next = cell + step;
    if (next < 1) next = 2 - next;
    if (next > cells) next = 2 * cells - next;
    return std::clamp(next, 1, cells);
}

// Geometry shared by the brute-force and precomputed receivers.
struct Window {
    long n_w;        // envelope length
    long length;     // received window length
    long max_lag;    // last fully overlapped lag
};

Window window_for(std::size_t n_w, std::size_t grid_delay, std::size_t taps) {
    const auto nw = static_cast<long>(n_w);
    const auto len = nw + static_cast<long>(grid_delay + taps) - 1;
    return {nw, len, len - nw};
}

std::pair<long, long> peak_search_range(long delay, std::size_t taps, long max_lag) {
    const long lo = std::max(0L, delay - kPeakSearchMargin);
    const long hi = std::min(max_lag, delay + static_cast<long>(taps) - 1 + kPeakSearchMargin);
    return {lo, hi};
}

double capped(double signal, double interference) {
    if (!(interference > 0.0)) return kSinrCap;
    return std::min(signal / interference, kSinrCap);
}

} // namespace

// ---------------------------------------------------------------------------
// StateProcess

std::size_t StateProcess::row_count() const {
    return ipow(alphabet_size, memory > 0 ? memory - 1 : 0);
}

void StateProcess::validate() const {
    if (alphabet_size == 0) throw InvalidInput("state alphabet must be nonempty");
    if (memory == 0) throw InvalidInput("state memory must be at least 1");
    if (!(obs_flip_prob >= 0.0 && obs_flip_prob < 1.0))
        throw InvalidInput("observation flip probability must lie in [0, 1)");
    if (transition.size() != row_count())
        throw InvalidInput("transition table has " + std::to_string(transition.size()) +
                           " rows, expected " + std::to_string(row_count()));
    for (const auto& row : transition) {
        if (row.size() != alphabet_size) throw InvalidInput("transition row has wrong width");
        double sum = 0.0;
        for (double p : row) {
            if (!(p >= 0.0)) throw InvalidInput("transition probabilities must be nonnegative");
            sum += p;
        }
        if (std::abs(sum - 1.0) > 1e-9) throw InvalidInput("transition row does not sum to 1");
    }
}

std::size_t StateProcess::row_index(std::span<const int> history) const {
    const std::size_t need = memory - 1;
    const std::size_t have = std::min(history.size(), need);
    std::size_t idx = 0;
    // left padding with state 0 contributes nothing
    for (std::size_t i = history.size() - have; i < history.size(); ++i) {
        const int s = history[i];
        if (s < 0 || static_cast<std::size_t>(s) >= alphabet_size)
            throw IndexOutOfRange("state " + std::to_string(s) + " outside the alphabet");
        idx = idx * alphabet_size + static_cast<std::size_t>(s);
    }
    return idx;
}

StateProcess StateProcess::dirichlet(std::size_t alphabet_size, std::size_t memory,
                                     double concentration, double obs_flip_prob, Rng& rng) {
    StateProcess sp;
    sp.alphabet_size = alphabet_size;
    sp.memory = memory;
    sp.obs_flip_prob = obs_flip_prob;
    sp.transition.resize(sp.row_count());
    std::gamma_distribution<double> gamma(concentration, 1.0);
    for (auto& row : sp.transition) {
        row.resize(alphabet_size);
        double sum = 0.0;
        for (auto& p : row) sum += (p = gamma(rng));
        for (auto& p : row) p /= sum;
    }
    sp.validate();
    return sp;
}

StateProcess StateProcess::uniform(std::size_t alphabet_size, std::size_t memory,
                                   double obs_flip_prob) {
    StateProcess sp;
    sp.alphabet_size = alphabet_size;
    sp.memory = memory;
    sp.obs_flip_prob = obs_flip_prob;
    sp.transition.assign(sp.row_count(),
                         std::vector<double>(alphabet_size, 1.0 / static_cast<double>(alphabet_size)));
    sp.validate();
    return sp;
}

int step_state(const StateProcess& sp, std::span<const int> history, Rng& rng) {
    return sample_categorical(sp.transition.at(sp.row_index(history)), rng);
}

int observe(const StateProcess& sp, int state, Rng& rng) {
    const auto n = static_cast<int>(sp.alphabet_size);
    if (state < 0 || state >= n) throw IndexOutOfRange("state outside the alphabet");
    if (n == 1 || uniform01(rng) >= sp.obs_flip_prob) return state;
    const int other = std::uniform_int_distribution<int>(0, n - 2)(rng);
    return other >= state ? other + 1 : other;
}

// ---------------------------------------------------------------------------
// Task distribution and instances

void TaskDistribution::validate() const {
    if (mu_star.size() == 0) throw InvalidInput("task mean must be nonempty");
    if (!(sigma0_sq > 0.0)) throw InvalidVariance("sigma0_sq must be positive");
    if (!(ir_kernel_scale > 0.0)) throw InvalidInput("ir_kernel_scale must be positive");
    if (ir_taps == 0) throw InvalidInput("ir_taps must be positive");
}

void ChannelConfig::validate(std::size_t alphabet_size) const {
    if (grid_delay == 0 || grid_doppler == 0) throw InvalidInput("grid must be nonempty");
    if (!(noise_var > 0.0)) throw InvalidVariance("channel noise variance must be positive");
    if (!(target_power > 0.0) || !(clutter_power >= 0.0))
        throw InvalidInput("target power must be positive and clutter power nonnegative");
    if (state_gain.size() != alphabet_size)
        throw InvalidInput("state_gain needs one entry per state");
    for (double g : state_gain)
        if (!(g >= 0.0)) throw InvalidInput("state gains must be nonnegative");
}

double ChannelConfig::doppler_cycles(int doppler_cell) const {
    if (doppler_scale == 0.0) return 0.0;
    const double centre = 0.5 * (static_cast<double>(grid_doppler) + 1.0);
    return doppler_scale * (static_cast<double>(doppler_cell) - centre);
}

double unit_softplus(double x) {
    const double sp = x > 30.0 ? x : std::log1p(std::exp(x));
    return sp / std::numbers::ln2;
}

ComplexVector draw_impulse_response(std::size_t taps, double length_scale, Rng& rng) {
    const auto n = static_cast<Eigen::Index>(taps);
    Matrix k(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j) {
            const double d = static_cast<double>(i - j) / length_scale;
            k(i, j) = std::exp(-0.5 * d * d);
        }
    // Eigen-factor so that the rank-deficient long-length-scale limit stays exact.
    Eigen::SelfAdjointEigenSolver<Matrix> eig(k);
    const Vector root = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Matrix factor = eig.eigenvectors() * root.asDiagonal();

    Vector re(n), im(n);
    for (Eigen::Index i = 0; i < n; ++i) re[i] = standard_normal(rng);
    for (Eigen::Index i = 0; i < n; ++i) im[i] = standard_normal(rng);
    const Vector a = factor * re;
    const Vector b = factor * im;
    ComplexVector h(taps);
    for (Eigen::Index i = 0; i < n; ++i) h[i] = Complex(a[i], b[i]) * std::numbers::sqrt2 * 0.5;
    return h;
}

std::vector<TargetState> draw_trajectory(std::size_t n_cpi, std::size_t grid_delay,
                                         std::size_t grid_doppler, Rng& rng) {
    std::vector<TargetState> path;
    path.reserve(n_cpi);
    const auto nd = static_cast<int>(grid_delay);
    const auto nv = static_cast<int>(grid_doppler);
    std::uniform_int_distribution<int> step(-1, 1);
    TargetState z{std::uniform_int_distribution<int>(1, nd)(rng),
                  std::uniform_int_distribution<int>(1, nv)(rng)};
    for (std::size_t k = 0; k < n_cpi; ++k) {
        if (k > 0) {
            z.delay_cell = reflect_step(z.delay_cell, step(rng), nd);
            z.doppler_cell = reflect_step(z.doppler_cell, step(rng), nv);
        }
        path.push_back(z);
    }
    return path;
}

FstcInstance draw_instance(const TaskDistribution& task, const ChannelConfig& channel,
                           const StateProcess& state_proc, std::size_t n_cpi, Rng& rng) {
    task.validate();
    channel.validate(state_proc.alphabet_size);
    FstcInstance inst;
    inst.theta = sample_gaussian(Gaussian::isotropic(task.mu_star, task.sigma0_sq), rng);
    inst.target_ir = draw_impulse_response(task.ir_taps, task.ir_kernel_scale, rng);
    inst.clutter_ir = draw_impulse_response(task.ir_taps, task.ir_kernel_scale, rng);
    inst.clutter_delay_cell =
        std::uniform_int_distribution<int>(1, static_cast<int>(channel.grid_delay))(rng);
    inst.trajectory = draw_trajectory(n_cpi, channel.grid_delay, channel.grid_doppler, rng);

    const auto gain = [&](Eigen::Index i) {
        return i < inst.theta.size() ? unit_softplus(inst.theta[i]) : 1.0;
    };
    inst.state_proc = state_proc;
    inst.target_power = channel.target_power * gain(0);
    inst.clutter_power = channel.clutter_power * gain(1);
    inst.noise_var = channel.noise_var * gain(2);
    inst.state_gain = channel.state_gain;
    inst.doppler_scale = channel.doppler_scale;
    inst.grid_delay = channel.grid_delay;
    inst.grid_doppler = channel.grid_doppler;
    return inst;
}

// ---------------------------------------------------------------------------
// Brute-force receiver

namespace {

double doppler_of(const FstcInstance& inst, int doppler_cell) {
    ChannelConfig c;
    c.grid_doppler = inst.grid_doppler;
    c.doppler_scale = inst.doppler_scale;
    return c.doppler_cycles(doppler_cell);
}

ComplexVector place_return(const ComplexEnvelope& w, const ComplexVector& ir, double amplitude,
                           long delay, double doppler, long length) {
    ComplexVector out(static_cast<std::size_t>(length), Complex{0.0, 0.0});
    const long nw = static_cast<long>(w.size());
    for (std::size_t j = 0; j < ir.size(); ++j) {
        const Complex a = amplitude * ir[j];
        const long start = delay + static_cast<long>(j);
        for (long u = 0; u < nw; ++u) {
            const long t = start + u;
            if (t >= 0 && t < length) out[t] += a * w.samples[u];
        }
    }
    if (doppler != 0.0) {
        for (long t = 0; t < length; ++t)
            out[t] *= std::polar(1.0, kTwoPi * doppler * static_cast<double>(t) /
                                          static_cast<double>(nw));
    }
    return out;
}

} // namespace

Reception receive(const FstcInstance& inst, int state, const TargetState& where,
                  const ComplexEnvelope& w, Rng& rng) {
    if (state < 0 || static_cast<std::size_t>(state) >= inst.state_gain.size())
        throw IndexOutOfRange("state outside the alphabet");
    const auto win = window_for(w.size(), inst.grid_delay, inst.target_ir.size());
    const double doppler = doppler_of(inst, where.doppler_cell);
    const long tau = where.delay_cell - 1;
    const long tau_c = inst.clutter_delay_cell - 1;

    const auto target = place_return(w, inst.target_ir, std::sqrt(inst.target_power), tau,
                                     doppler, win.length);
    const auto clutter = place_return(
        w, inst.clutter_ir, std::sqrt(inst.clutter_power * inst.state_gain[state]), tau_c, doppler,
        win.length);
    ComplexVector noise(static_cast<std::size_t>(win.length));
    const double sd = std::sqrt(0.5 * inst.noise_var);
    for (auto& v : noise) {
        const double re = standard_normal(rng);
        const double im = standard_normal(rng);
        v = Complex(sd * re, sd * im);
    }

    Reception out;
    out.rx.resize(noise.size());
    for (std::size_t t = 0; t < noise.size(); ++t) out.rx[t] = target[t] + clutter[t] + noise[t];

    // The filter is linear, so each component is filtered on its own to
    // separate signal from interference at the peak.
    const auto yt = matched_filter(w, target);
    const auto yc = matched_filter(w, clutter);
    const auto yn = matched_filter(w, noise);
    const long zero = win.n_w - 1;

    const auto [lo, hi] = peak_search_range(tau, inst.target_ir.size(), win.max_lag);
    long peak = lo;
    for (long m = lo; m <= hi; ++m)
        if (std::norm(yt[zero + m]) > std::norm(yt[zero + peak])) peak = m;

    double floor = 0.0;
    for (long m = 0; m <= win.max_lag; ++m) floor += std::norm(yn[zero + m]);
    floor /= static_cast<double>(win.max_lag + 1);

    out.sinr_post = capped(std::norm(yt[zero + peak]), std::norm(yc[zero + peak]) + floor);
    return out;
}

// ---------------------------------------------------------------------------
// Precomputed receiver

ReceiverBank::ReceiverBank(std::vector<ComplexEnvelope> catalog, const ChannelConfig& channel,
                           std::size_t ir_taps)
    : catalog_(std::move(catalog)), channel_(channel), ir_taps_(ir_taps) {
    if (catalog_.empty()) throw EmptyInput("receiver bank needs at least one waveform");
    const auto n_w = catalog_.front().size();
    for (const auto& e : catalog_)
        if (e.size() != n_w) throw DimensionMismatch("catalog envelopes differ in length");
    const auto win = window_for(n_w, channel_.grid_delay, ir_taps_);
    reference_lags_ = static_cast<std::size_t>(win.max_lag + 1);

    const bool doppler = channel_.doppler_scale != 0.0;
    for (const auto& e : catalog_) {
        std::vector<ComplexVector> cuts;
        if (doppler) {
            for (std::size_t v = 1; v <= channel_.grid_doppler; ++v)
                cuts.push_back(doppler_cut(e, channel_.doppler_cycles(static_cast<int>(v))));
        } else {
            cuts.push_back(doppler_cut(e, 0.0));
        }
        const ComplexVector chi0 = doppler ? doppler_cut(e, 0.0) : cuts.front();

        // Noise outputs over the reference lags have covariance G(a, b) = chi0(a - b).
        const auto l = static_cast<Eigen::Index>(reference_lags_);
        const long zero = static_cast<long>(n_w) - 1;
        Eigen::MatrixXcd g(l, l);
        for (Eigen::Index a = 0; a < l; ++a)
            for (Eigen::Index b = 0; b < l; ++b) g(a, b) = chi0[zero + (a - b)];
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> eig(g, Eigen::EigenvaluesOnly);
        std::vector<double> eigs(static_cast<std::size_t>(l));
        for (Eigen::Index i = 0; i < l; ++i) eigs[i] = std::max(0.0, eig.eigenvalues()[i]);

        cuts_.push_back(std::move(cuts));
        noise_eigs_.push_back(std::move(eigs));
    }
}

const ComplexVector& ReceiverBank::cut(std::size_t w, int doppler_cell) const {
    const auto& per_w = cuts_.at(w);
    if (per_w.size() == 1) return per_w.front();
    return per_w.at(static_cast<std::size_t>(doppler_cell - 1));
}

ReceiverBank::Powers ReceiverBank::powers(const FstcInstance& inst, int state,
                                          const TargetState& where, std::size_t w) const {
    if (state < 0 || static_cast<std::size_t>(state) >= inst.state_gain.size())
        throw IndexOutOfRange("state outside the alphabet");
    if (inst.target_ir.size() != ir_taps_ || inst.grid_delay != channel_.grid_delay)
        throw DimensionMismatch("instance geometry does not match the receiver bank");
    const auto& chi = cut(w, where.doppler_cell);
    const long n_w = static_cast<long>(catalog_[w].size());
    const long zero = n_w - 1;
    const double f = channel_.doppler_cycles(where.doppler_cell);
    const long tau = where.delay_cell - 1;
    const long tau_c = inst.clutter_delay_cell - 1;
    const long max_lag = static_cast<long>(reference_lags_) - 1;

    // output(m) = sum_j amp * ir_j * e^{j 2 pi f (d + j) / N} * chi(m - d - j)
    const auto response = [&](const ComplexVector& ir, long delay, long m) {
        Complex acc{0.0, 0.0};
        for (std::size_t j = 0; j < ir.size(); ++j) {
            const long a = delay + static_cast<long>(j);
            Complex term = ir[j] * chi[zero + (m - a)];
            if (f != 0.0)
                term *= std::polar(1.0, kTwoPi * f * static_cast<double>(a) / static_cast<double>(n_w));
            acc += term;
        }
        return acc;
    };

    const auto [lo, hi] = peak_search_range(tau, ir_taps_, max_lag);
    long peak = lo;
    double best = -1.0;
    for (long m = lo; m <= hi; ++m) {
        const double p = std::norm(response(inst.target_ir, tau, m));
        if (p > best) {
            best = p;
            peak = m;
        }
    }
    Powers out;
    out.peak_lag = peak;
    out.signal = inst.target_power * best;
    out.clutter = inst.clutter_power * inst.state_gain[state] *
                  std::norm(response(inst.clutter_ir, tau_c, peak));
    return out;
}

double ReceiverBank::draw_noise_floor(const FstcInstance& inst, std::size_t w, Rng& rng) const {
    const auto& eigs = noise_eigs_.at(w);
    double acc = 0.0;
    for (double lambda : eigs) {
        const double re = standard_normal(rng);
        const double im = standard_normal(rng);
        acc += lambda * 0.5 * (re * re + im * im);
    }
    return inst.noise_var * acc / static_cast<double>(eigs.size());
}

double ReceiverBank::sinr(const Powers& p, double noise_floor) {
    return capped(p.signal, p.clutter + noise_floor);
}

double ReceiverBank::sinr_post(const FstcInstance& inst, int state, const TargetState& where,
                               std::size_t w, Rng& rng) const {
    const auto p = powers(inst, state, where, w);
    return sinr(p, draw_noise_floor(inst, w, rng));
}

} // namespace metats
