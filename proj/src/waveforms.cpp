#include "metats/waveforms.hpp"

#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "metats/errors.hpp"

namespace metats {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::size_t integer_sqrt(std::size_t n) {
    auto r = static_cast<std::size_t>(std::llround(std::sqrt(static_cast<double>(n))));
    while (r * r > n) --r;
    while ((r + 1) * (r + 1) <= n) ++r;
    return r;
}

double chirp_phase(const WaveformSpec& spec, double x) {
    if (spec.kind == WaveformKind::LFM) return x * x;
    // (e^{ax} - 1) / (e^a - 1): spans [0, 1] on x in [0, 1] for any alpha > 0
    return std::expm1(spec.alpha * x) / std::expm1(spec.alpha);
}

std::vector<double> code_phases(const WaveformSpec& spec) {
    const std::size_t n = spec.code_length;
    std::vector<double> phases(n);
    if (spec.kind == WaveformKind::ZadoffChu) {
        const auto two_n = static_cast<long long>(2 * n);
        const long long u = ((spec.root % two_n) + two_n) % two_n;
        for (std::size_t k = 0; k < n; ++k) {
            const auto kk = static_cast<long long>(k);
            // Exact integer reduction modulo 2N keeps the phase free of rounding drift.
            const long long q = (n % 2 == 0) ? (kk * kk) % two_n : (kk * (kk + 1)) % two_n;
            phases[k] = -std::numbers::pi * static_cast<double>((u * q) % two_n) /
                        static_cast<double>(n);
        }
    } else {
        const std::size_t m = integer_sqrt(n);
        for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < m; ++j)
                phases[i * m + j] = kTwoPi * static_cast<double>((i * j) % m) / static_cast<double>(m);
    }
    return phases;
}

void normalize(ComplexVector& s) {
    double e = 0.0;
    for (const auto& v : s) e += std::norm(v);
    const double scale = 1.0 / std::sqrt(e);
    for (auto& v : s) v *= scale;
}

} // namespace

WaveformSpec WaveformSpec::lfm(double fm_rate) {
    WaveformSpec s;
    s.kind = WaveformKind::LFM;
    s.fm_rate = fm_rate;
    return s;
}

WaveformSpec WaveformSpec::exp_fm(double alpha, double fm_rate) {
    WaveformSpec s;
    s.kind = WaveformKind::ExpFM;
    s.alpha = alpha;
    s.fm_rate = fm_rate;
    return s;
}

WaveformSpec WaveformSpec::zadoff_chu(std::size_t length, long root) {
    WaveformSpec s;
    s.kind = WaveformKind::ZadoffChu;
    s.code_length = length;
    s.root = root;
    return s;
}

WaveformSpec WaveformSpec::frank(std::size_t length) {
    WaveformSpec s;
    s.kind = WaveformKind::Frank;
    s.code_length = length;
    return s;
}

std::string WaveformSpec::name() const {
    std::ostringstream os;
    switch (kind) {
    case WaveformKind::LFM: os << "lfm"; break;
    case WaveformKind::ExpFM: os << "expfm-" << alpha; break;
    case WaveformKind::ZadoffChu: os << "zc-" << code_length; break;
    case WaveformKind::Frank: os << "frank-" << code_length; break;
    }
    return os.str();
}

double ComplexEnvelope::energy() const noexcept {
    double e = 0.0;
    for (const auto& v : samples) e += std::norm(v);
    return e;
}

ComplexEnvelope make_envelope(const WaveformSpec& spec, std::size_t n_samples) {
    if (n_samples == 0) throw UnsupportedLength("envelope needs at least one sample");
    ComplexEnvelope env;
    env.samples.assign(n_samples, Complex{0.0, 0.0});

    switch (spec.kind) {
    case WaveformKind::ExpFM:
        if (!(spec.alpha > 0.0)) throw InvalidInput("ExpFM alpha must be positive");
        [[fallthrough]];
    case WaveformKind::LFM:
        for (std::size_t n = 0; n < n_samples; ++n) {
            const double x = static_cast<double>(n) / static_cast<double>(n_samples);
            env.samples[n] = std::polar(1.0, kTwoPi * spec.fm_rate * chirp_phase(spec, x));
        }
        break;
    case WaveformKind::ZadoffChu:
    case WaveformKind::Frank: {
        const std::size_t len = spec.code_length;
        if (len == 0) throw UnsupportedLength("phase code length must be positive");
        if (spec.kind == WaveformKind::ZadoffChu &&
            std::gcd(static_cast<long>(len), spec.root) != 1)
            throw UnsupportedLength("Zadoff-Chu root " + std::to_string(spec.root) +
                                    " is not coprime with length " + std::to_string(len));
        if (spec.kind == WaveformKind::Frank) {
            const auto m = integer_sqrt(len);
            if (m * m != len)
                throw UnsupportedLength("Frank code length " + std::to_string(len) +
                                        " is not a perfect square");
        }
        if (n_samples < len)
            throw UnsupportedLength("need at least one sample per chip (" +
                                    std::to_string(len) + " chips, " +
                                    std::to_string(n_samples) + " samples)");
        const auto phases = code_phases(spec);
        const std::size_t per_chip = n_samples / len;
        for (std::size_t c = 0; c < len; ++c)
            for (std::size_t k = 0; k < per_chip; ++k)
                env.samples[c * per_chip + k] = std::polar(1.0, phases[c]);
        break;
    }
    }
    normalize(env.samples);
    return env;
}

Complex cyclic_autocorrelation(const ComplexEnvelope& e, long lag) {
    const auto n = static_cast<long>(e.size());
    if (n == 0) return {};
    const long shift = ((lag % n) + n) % n;
    Complex acc{0.0, 0.0};
    for (long k = 0; k < n; ++k) acc += e.samples[k] * std::conj(e.samples[(k + shift) % n]);
    return acc;
}

ComplexVector matched_filter(const ComplexEnvelope& tx, std::span<const Complex> rx) {
    if (tx.samples.empty() || rx.empty()) throw EmptyInput("matched filter needs nonempty inputs");
    const std::size_t nt = tx.size();
    const std::size_t nr = rx.size();
    ComplexVector out(nr + nt - 1, Complex{0.0, 0.0});
    // out[m] = sum_j conj(tx[nt-1-j]) rx[m-j]
    for (std::size_t j = 0; j < nt; ++j) {
        const Complex p = std::conj(tx.samples[nt - 1 - j]);
        for (std::size_t k = 0; k < nr; ++k) out[k + j] += p * rx[k];
    }
    return out;
}

ComplexVector doppler_cut(const ComplexEnvelope& e, double doppler_cycles) {
    const auto n = static_cast<long>(e.size());
    if (n == 0) throw EmptyInput("ambiguity cut of an empty envelope");
    ComplexVector shifted(e.samples);
    if (doppler_cycles != 0.0) {
        for (long u = 0; u < n; ++u)
            shifted[u] *= std::polar(1.0, kTwoPi * doppler_cycles * static_cast<double>(u) /
                                              static_cast<double>(n));
    }
    ComplexVector chi(2 * n - 1, Complex{0.0, 0.0});
    for (long delta = -(n - 1); delta <= n - 1; ++delta) {
        Complex acc{0.0, 0.0};
        const long lo = std::max(0L, delta);
        const long hi = std::min(n, n + delta);
        for (long u = lo; u < hi; ++u) acc += shifted[u] * std::conj(e.samples[u - delta]);
        chi[delta + n - 1] = acc;
    }
    return chi;
}

std::vector<WaveformSpec> default_catalog() {
    return {
        WaveformSpec::lfm(kDefaultFmRate),
        WaveformSpec::exp_fm(2.8, kDefaultFmRate),
        WaveformSpec::exp_fm(5.0, kDefaultFmRate),
        WaveformSpec::zadoff_chu(1024, 1),
        WaveformSpec::frank(144),
    };
}

} // namespace metats
