#pragma once

// Foundational signal types: complex baseband signals, Gray-mapped symbol
// alphabets, m-sequence generation, AWGN injection and quality metrics.

#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "airlink/detail/math.hpp"

namespace airlink {

using cplx = std::complex<double>;

struct ComplexSignal {
    std::vector<cplx> samples;
    double sample_rate = 1.0;  // Hz, > 0

    ComplexSignal() = default;
    ComplexSignal(std::vector<cplx> s, double fs) : samples(std::move(s)), sample_rate(fs) {
        if (!(sample_rate > 0.0)) throw std::invalid_argument("ComplexSignal: sample_rate must be > 0");
    }

    double duration() const { return static_cast<double>(samples.size()) / sample_rate; }
    double power() const {
        if (samples.empty()) return 0.0;
        double acc = 0.0;
        for (const auto& s : samples) acc += std::norm(s);
        return acc / static_cast<double>(samples.size());
    }
};

// Gray-coded constellation with unit average energy.
struct SymbolAlphabet {
    std::string name;
    std::vector<cplx> points;  // points[i] is the point for bit pattern i
    int bits_per_symbol = 1;

    static SymbolAlphabet bpsk() {
        return {"BPSK", {cplx(1, 0), cplx(-1, 0)}, 1};
    }
    static SymbolAlphabet qpsk() {
        const double s = 1.0 / std::sqrt(2.0);
        // bits (b0,b1): b0 selects I sign, b1 selects Q sign; Gray by construction
        return {"QPSK",
                {cplx(s, s), cplx(s, -s), cplx(-s, s), cplx(-s, -s)},
                2};
    }
    static SymbolAlphabet qam16() {
        // per-axis Gray PAM4: 00->-3, 01->-1, 11->+1, 10->+3, scaled to unit energy
        static constexpr double lv[4] = {-3.0, -1.0, 1.0, 3.0};
        static constexpr int gray[4] = {0, 1, 3, 2};  // gray[k] = bits of level k
        const double s = 1.0 / std::sqrt(10.0);
        std::vector<cplx> pts(16);
        for (int ik = 0; ik < 4; ++ik)
            for (int qk = 0; qk < 4; ++qk)
                pts[static_cast<std::size_t>((gray[ik] << 2) | gray[qk])] =
                    cplx(lv[ik] * s, lv[qk] * s);
        return {"QAM16", pts, 4};
    }
    static SymbolAlphabet by_name(const std::string& n) {
        if (n == "BPSK" || n == "bpsk") return bpsk();
        if (n == "QPSK" || n == "qpsk") return qpsk();
        if (n == "QAM16" || n == "qam16") return qam16();
        throw std::invalid_argument("unknown alphabet: " + n);
    }
};

// One period of a bipolar m-sequence from a Fibonacci LFSR.
struct PnSequence {
    std::vector<double> chips;  // +-1
    int degree = 0;
    std::uint32_t polynomial = 0;  // bit i set -> state bit i feeds back

    std::size_t period() const { return chips.size(); }
};

// Primitive feedback masks for common degrees (state-bit convention above).
inline std::uint32_t default_primitive_poly(int degree) {
    switch (degree) {
        case 2: return 0x3;
        case 3: return 0x3;
        case 4: return 0x3;
        case 5: return 0x5;
        case 6: return 0x3;
        case 7: return 0x9;
        case 8: return 0x71;
        case 9: return 0x11;
        case 10: return 0x9;
        case 11: return 0x5;
        default: throw std::invalid_argument("no default primitive polynomial for degree " + std::to_string(degree));
    }
}

inline std::vector<cplx> modulate(const std::vector<int>& bits, const SymbolAlphabet& alphabet) {
    const int bps = alphabet.bits_per_symbol;
    if (bits.size() % static_cast<std::size_t>(bps) != 0)
        throw std::invalid_argument("modulate: bit count not divisible by bits per symbol");
    std::vector<cplx> out;
    out.reserve(bits.size() / static_cast<std::size_t>(bps));
    for (std::size_t i = 0; i < bits.size(); i += static_cast<std::size_t>(bps)) {
        std::size_t idx = 0;
        for (int b = 0; b < bps; ++b) idx = (idx << 1) | static_cast<std::size_t>(bits[i + static_cast<std::size_t>(b)] & 1);
        out.push_back(alphabet.points[idx]);
    }
    return out;
}

// Minimum-distance slicing; ties resolved toward the lowest point index.
inline std::size_t slice_index(cplx symbol, const SymbolAlphabet& alphabet) {
    if (alphabet.points.empty()) throw std::invalid_argument("demodulate: empty alphabet");
    std::size_t best = 0;
    double best_d = std::norm(symbol - alphabet.points[0]);
    for (std::size_t i = 1; i < alphabet.points.size(); ++i) {
        const double d = std::norm(symbol - alphabet.points[i]);
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

inline cplx slice(cplx symbol, const SymbolAlphabet& alphabet) {
    return alphabet.points[slice_index(symbol, alphabet)];
}

inline std::vector<int> demodulate(const std::vector<cplx>& symbols, const SymbolAlphabet& alphabet) {
    std::vector<int> bits;
    bits.reserve(symbols.size() * static_cast<std::size_t>(alphabet.bits_per_symbol));
    for (const auto& s : symbols) {
        const std::size_t idx = slice_index(s, alphabet);
        for (int b = alphabet.bits_per_symbol - 1; b >= 0; --b)
            bits.push_back(static_cast<int>((idx >> b) & 1));
    }
    return bits;
}

// Fibonacci LFSR: output = state bit 0, feedback = parity(state & polynomial),
// shifted in at the top. Bit 1 maps to chip -1, bit 0 to chip +1.
inline PnSequence pn_generate(int degree, std::uint32_t polynomial, std::uint32_t seed) {
    if (degree < 2 || degree > 24) throw std::invalid_argument("pn_generate: degree out of range");
    const std::uint32_t mask = (1u << degree) - 1u;
    seed &= mask;
    if (seed == 0) throw std::invalid_argument("pn_generate: zero seed is a degenerate LFSR state");
    PnSequence pn;
    pn.degree = degree;
    pn.polynomial = polynomial;
    const std::size_t period = (1u << degree) - 1u;
    pn.chips.reserve(period);
    std::uint32_t state = seed;
    for (std::size_t i = 0; i < period; ++i) {
        pn.chips.push_back((state & 1u) ? -1.0 : 1.0);
        const std::uint32_t fb = static_cast<std::uint32_t>(std::popcount(state & polynomial) & 1);
        state = (state >> 1) | (fb << (degree - 1));
    }
    return pn;
}

// Total noise power = measured signal power * 10^(-snr_db/10), split evenly
// between real and imaginary parts. snr_db = +inf returns the input unchanged.
inline ComplexSignal add_awgn(const ComplexSignal& signal, double snr_db, std::mt19937_64& rng) {
    if (std::isinf(snr_db) && snr_db > 0) return signal;
    if (signal.samples.empty()) throw std::invalid_argument("add_awgn: empty signal with finite snr");
    const double noise_power = signal.power() * std::pow(10.0, -snr_db / 10.0);
    const double sigma = std::sqrt(noise_power / 2.0);
    std::normal_distribution<double> gauss(0.0, 1.0);
    ComplexSignal out = signal;
    for (auto& s : out.samples) {
        const double re = gauss(rng);
        const double im = gauss(rng);
        s += cplx(sigma * re, sigma * im);
    }
    return out;
}

inline double measure_ber(const std::vector<int>& tx_bits, const std::vector<int>& rx_bits) {
    if (tx_bits.size() != rx_bits.size()) throw std::invalid_argument("measure_ber: length mismatch");
    if (tx_bits.empty()) throw std::invalid_argument("measure_ber: empty input");
    std::size_t errors = 0;
    for (std::size_t i = 0; i < tx_bits.size(); ++i)
        if ((tx_bits[i] & 1) != (rx_bits[i] & 1)) ++errors;
    return static_cast<double>(errors) / static_cast<double>(tx_bits.size());
}

inline constexpr double evm_floor_db = -120.0;

inline double measure_evm_db(const std::vector<cplx>& ref, const std::vector<cplx>& rx) {
    if (ref.size() != rx.size()) throw std::invalid_argument("measure_evm_db: length mismatch");
    if (ref.empty()) throw std::invalid_argument("measure_evm_db: empty input");
    double err = 0.0, pow_ref = 0.0;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        err += std::norm(rx[i] - ref[i]);
        pow_ref += std::norm(ref[i]);
    }
    if (pow_ref == 0.0) throw std::invalid_argument("measure_evm_db: zero reference power");
    if (err == 0.0) return evm_floor_db;
    return std::max(evm_floor_db, 10.0 * std::log10(err / pow_ref));
}

// Averaged Hann-windowed periodogram over non-overlapping segments.
inline std::vector<double> power_spectrum(const ComplexSignal& signal, std::size_t n_bins) {
    if (n_bins == 0 || signal.samples.size() < n_bins)
        throw std::invalid_argument("power_spectrum: signal shorter than n_bins");
    std::vector<double> window(n_bins);
    double wsum = 0.0;
    for (std::size_t i = 0; i < n_bins; ++i) {
        window[i] = 0.5 - 0.5 * std::cos(2.0 * detail::pi * static_cast<double>(i) / static_cast<double>(n_bins));
        wsum += window[i] * window[i];
    }
    std::vector<double> psd(n_bins, 0.0);
    const std::size_t n_seg = signal.samples.size() / n_bins;
    std::vector<cplx> seg(n_bins);
    for (std::size_t s = 0; s < n_seg; ++s) {
        for (std::size_t i = 0; i < n_bins; ++i) seg[i] = signal.samples[s * n_bins + i] * window[i];
        std::vector<cplx> spec = detail::is_pow2(n_bins) ? seg : detail::dft(seg);
        if (detail::is_pow2(n_bins)) detail::fft_pow2(spec, false);
        for (std::size_t i = 0; i < n_bins; ++i) psd[i] += std::norm(spec[i]);
    }
    for (auto& p : psd) p /= static_cast<double>(n_seg) * wsum;
    return psd;
}

inline std::vector<int> random_bits(std::size_t n, std::mt19937_64& rng) {
    std::vector<int> bits(n);
    for (auto& b : bits) b = static_cast<int>(rng() & 1u);
    return bits;
}

}  // namespace airlink
