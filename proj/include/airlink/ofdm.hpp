#pragma once

// OFDM modem with cyclic prefix: subcarrier mapping, unitary transforms,
// CP insertion/removal, least-squares and per-carrier LMS channel
// estimation, and one-tap equalization with deep-null erasures.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "airlink/sigcore.hpp"

namespace airlink::ofdm {

struct OfdmParams {
    std::size_t n_fft = 64;     // power of two
    std::size_t cp_len = 16;    // 0 <= cp_len < n_fft
    std::vector<int> used_carriers;  // signed indices in [-n_fft/2, n_fft/2), DC excluded
    double sample_rate = 20e6;  // Hz

    std::size_t symbol_len() const { return n_fft + cp_len; }
    double subcarrier_spacing() const { return sample_rate / static_cast<double>(n_fft); }

    void validate() const {
        if (!detail::is_pow2(n_fft)) throw std::invalid_argument("OfdmParams: n_fft must be a power of two");
        if (cp_len >= n_fft) throw std::invalid_argument("OfdmParams: cp_len must be < n_fft");
        if (used_carriers.empty()) throw std::invalid_argument("OfdmParams: no used carriers");
        const int half = static_cast<int>(n_fft) / 2;
        for (int k : used_carriers)
            if (k == 0 || k < -half || k >= half)
                throw std::invalid_argument("OfdmParams: carrier index outside [-n_fft/2, n_fft/2) \\ {0}");
    }

    std::size_t bin(int carrier) const {
        return carrier >= 0 ? static_cast<std::size_t>(carrier)
                            : n_fft - static_cast<std::size_t>(-carrier);
    }
};

// Contiguous band of carriers around DC (DC excluded), e.g. 52 for 802.11a-like.
inline std::vector<int> contiguous_carriers(std::size_t count) {
    if (count % 2 != 0) throw std::invalid_argument("contiguous_carriers: count must be even");
    std::vector<int> out;
    const int half = static_cast<int>(count) / 2;
    for (int k = -half; k <= half; ++k)
        if (k != 0) out.push_back(k);
    return out;
}

inline OfdmParams wifi_params() {
    return {64, 16, contiguous_carriers(52), 20e6};
}
inline OfdmParams wimax_params(std::size_t cp_len = 32) {
    return {256, cp_len, contiguous_carriers(200), 8e6};
}

enum class EstimateSource { known, lms, least_squares_preamble };

struct ChannelEstimate {
    std::vector<cplx> h;  // per used carrier, same order as params.used_carriers
    EstimateSource source = EstimateSource::known;
};

// Map symbols onto the used carriers, unitary inverse DFT, prepend the last
// cp_len time samples as the cyclic prefix.
inline ComplexSignal ofdm_modulate(const std::vector<cplx>& symbols, const OfdmParams& params) {
    params.validate();
    const std::size_t nc = params.used_carriers.size();
    if (symbols.size() % nc != 0)
        throw std::invalid_argument("ofdm_modulate: symbol count not divisible by carrier count");
    const std::size_t n_sym = symbols.size() / nc;
    const double scale = 1.0 / std::sqrt(static_cast<double>(params.n_fft));
    ComplexSignal out(std::vector<cplx>{}, params.sample_rate);
    out.samples.reserve(n_sym * params.symbol_len());
    std::vector<cplx> freq(params.n_fft);
    for (std::size_t s = 0; s < n_sym; ++s) {
        std::fill(freq.begin(), freq.end(), cplx(0, 0));
        for (std::size_t c = 0; c < nc; ++c) freq[params.bin(params.used_carriers[c])] = symbols[s * nc + c];
        detail::fft_pow2(freq, true);
        for (auto& v : freq) v *= scale;
        for (std::size_t i = params.n_fft - params.cp_len; i < params.n_fft; ++i)
            out.samples.push_back(freq[i]);
        out.samples.insert(out.samples.end(), freq.begin(), freq.end());
    }
    return out;
}

// Strip CP, forward unitary DFT, extract used carriers. timing_offset moves
// the DFT window earlier into the CP; keep it within [0, cp_len - max channel
// delay] for ISI-free operation.
inline std::vector<cplx> ofdm_demodulate(const ComplexSignal& signal, const OfdmParams& params,
                                         std::size_t timing_offset = 0) {
    params.validate();
    const std::size_t sym_len = params.symbol_len();
    if (signal.samples.size() < sym_len)
        throw std::invalid_argument("ofdm_demodulate: signal shorter than one OFDM symbol");
    if (timing_offset > params.cp_len)
        throw std::invalid_argument("ofdm_demodulate: timing offset beyond the cyclic prefix");
    const std::size_t n_sym = signal.samples.size() / sym_len;
    const double scale = 1.0 / std::sqrt(static_cast<double>(params.n_fft));
    std::vector<cplx> out;
    out.reserve(n_sym * params.used_carriers.size());
    std::vector<cplx> time(params.n_fft);
    for (std::size_t s = 0; s < n_sym; ++s) {
        const std::size_t start = s * sym_len + params.cp_len - timing_offset;
        for (std::size_t i = 0; i < params.n_fft; ++i) time[i] = signal.samples[start + i];
        detail::fft_pow2(time, false);
        for (int k : params.used_carriers) out.push_back(time[params.bin(k)] * scale);
    }
    return out;
}

// h_k = rx_k / known_k on every used carrier.
inline ChannelEstimate estimate_channel_ls(const std::vector<cplx>& rx_preamble,
                                           const std::vector<cplx>& known_preamble,
                                           const OfdmParams& params) {
    const std::size_t nc = params.used_carriers.size();
    if (rx_preamble.size() != nc || known_preamble.size() != nc)
        throw std::invalid_argument("estimate_channel_ls: preamble must cover exactly the used carriers");
    ChannelEstimate est;
    est.source = EstimateSource::least_squares_preamble;
    est.h.resize(nc);
    for (std::size_t c = 0; c < nc; ++c) {
        if (std::abs(known_preamble[c]) == 0.0)
            throw std::invalid_argument("estimate_channel_ls: zero preamble carrier");
        est.h[c] = rx_preamble[c] / known_preamble[c];
    }
    return est;
}

// Independent scalar LMS loop per carrier: h <- h + mu * conj(ref) * (rx - h*ref).
// rx_carriers and reference are per-symbol blocks of used-carrier values.
inline ChannelEstimate estimate_channel_lms(const std::vector<cplx>& rx_carriers,
                                            const std::vector<cplx>& reference,
                                            const OfdmParams& params, double mu) {
    const std::size_t nc = params.used_carriers.size();
    if (rx_carriers.size() != reference.size() || rx_carriers.size() % nc != 0)
        throw std::invalid_argument("estimate_channel_lms: inputs must be whole symbols of used carriers");
    ChannelEstimate est;
    est.source = EstimateSource::lms;
    est.h.assign(nc, cplx(0, 0));
    const std::size_t n_sym = rx_carriers.size() / nc;
    for (std::size_t s = 0; s < n_sym; ++s) {
        for (std::size_t c = 0; c < nc; ++c) {
            const cplx ref = reference[s * nc + c];
            const cplx err = rx_carriers[s * nc + c] - est.h[c] * ref;
            est.h[c] += mu * std::conj(ref) * err;
        }
    }
    return est;
}

inline constexpr double erasure_floor = 1e-6;

struct EqualizedCarriers {
    std::vector<cplx> symbols;
    std::vector<bool> erased;  // per output symbol, deep-null carriers
};

// x_k = rx_k / h_k per carrier; |h| below the floor marks the carrier erased
// instead of dividing.
inline EqualizedCarriers one_tap_equalize(const std::vector<cplx>& rx_carriers,
                                          const ChannelEstimate& est) {
    const std::size_t nc = est.h.size();
    if (nc == 0 || rx_carriers.size() % nc != 0)
        throw std::invalid_argument("one_tap_equalize: carrier count mismatch");
    EqualizedCarriers out;
    out.symbols.resize(rx_carriers.size());
    out.erased.assign(rx_carriers.size(), false);
    for (std::size_t i = 0; i < rx_carriers.size(); ++i) {
        const cplx h = est.h[i % nc];
        if (std::abs(h) < erasure_floor) {
            out.symbols[i] = cplx(0, 0);
            out.erased[i] = true;
        } else {
            out.symbols[i] = rx_carriers[i] / h;
        }
    }
    return out;
}

// EVM over the non-erased symbols only.
inline double evm_db_excluding_erasures(const std::vector<cplx>& ref, const EqualizedCarriers& eq) {
    if (ref.size() != eq.symbols.size()) throw std::invalid_argument("evm: length mismatch");
    std::vector<cplx> r, x;
    for (std::size_t i = 0; i < ref.size(); ++i) {
        if (eq.erased[i]) continue;
        r.push_back(ref[i]);
        x.push_back(eq.symbols[i]);
    }
    return measure_evm_db(r, x);
}

// Multiply by a complex tone; models an uncorrected carrier/Doppler offset.
inline ComplexSignal apply_doppler_offset(const ComplexSignal& signal, double doppler_hz) {
    if (doppler_hz == 0.0) return signal;
    ComplexSignal out = signal;
    for (std::size_t n = 0; n < out.samples.size(); ++n) {
        const double t = static_cast<double>(n) / out.sample_rate;
        out.samples[n] *= std::polar(1.0, 2.0 * detail::pi * doppler_hz * t);
    }
    return out;
}

}  // namespace airlink::ofdm
