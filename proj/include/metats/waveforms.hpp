#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

namespace metats {

using Complex = std::complex<double>;
using ComplexVector = std::vector<Complex>;

enum class WaveformKind { LFM, ExpFM, ZadoffChu, Frank };

/// Parameters of one catalog waveform. Only the fields relevant to `kind`
/// are meaningful; use the named constructors.
struct WaveformSpec {
    WaveformKind kind = WaveformKind::LFM;
    double fm_rate = 0.0;     ///< b, total phase excursion in cycles (FM kinds)
    double alpha = 0.0;       ///< ExpFM exponent
    std::size_t code_length = 0;
    long root = 0;            ///< Zadoff-Chu root index

    static WaveformSpec lfm(double fm_rate);
    static WaveformSpec exp_fm(double alpha, double fm_rate);
    static WaveformSpec zadoff_chu(std::size_t length, long root);
    static WaveformSpec frank(std::size_t length);

    /// Short identifier such as "expfm-2.8" or "zc-1024".
    std::string name() const;

    bool operator==(const WaveformSpec&) const = default;
};

/// Unit-energy sampled complex envelope.
struct ComplexEnvelope {
    ComplexVector samples;
    double duration = 1.0;

    std::size_t size() const noexcept { return samples.size(); }
    double energy() const noexcept;
};

/// Sample a waveform at n_samples points over one pulse and normalize it to
/// unit energy. Phase codes hold each chip for floor(n_samples / code_length)
/// samples; any remaining tail samples are zero.
ComplexEnvelope make_envelope(const WaveformSpec& spec, std::size_t n_samples);

/// R(lag) = sum_k s[k] conj(s[(k + lag) mod N]).
Complex cyclic_autocorrelation(const ComplexEnvelope& e, long lag);

/// Full linear cross-correlation of rx against tx (convolution of rx with
/// conj(tx) time-reversed). Output has rx.size() + tx.size() - 1 entries and
/// zero lag sits at index tx.size() - 1.
ComplexVector matched_filter(const ComplexEnvelope& tx, std::span<const Complex> rx);

/// Aperiodic ambiguity cut at a fixed Doppler shift (cycles per pulse):
/// chi(delta) = sum_u s[u] exp(j 2 pi f u / N) conj(s[u - delta]),
/// returned for delta = -(N-1) .. N-1 at index delta + N - 1.
ComplexVector doppler_cut(const ComplexEnvelope& e, double doppler_cycles);

/// The five-waveform library: LFM, ExpFM(2.8), ExpFM(5), Zadoff-Chu(1024),
/// Frank(144).
std::vector<WaveformSpec> default_catalog();

/// Default FM rate: the LFM sweep covers a quarter of the sampled band.
inline constexpr double kDefaultFmRate = 1024.0 / 8.0;
inline constexpr std::size_t kDefaultSamples = 1024;

} // namespace metats
