#pragma once

// DSSS transmit chain and RAKE receiver: pilot-driven path searcher with peak
// thresholding and best-N selection, per-finger correlators with delay
// equalization, maximal-ratio combining and an optional MMSE finger.

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <vector>

#include "airlink/sigcore.hpp"

namespace airlink::rake {

struct SpreadingCode {
    PnSequence code;
    double chip_rate = 3.84e6;          // chips/s
    std::size_t spreading_factor = 16;  // chips per symbol

    void validate() const {
        if (spreading_factor < 1 || spreading_factor > code.period())
            throw std::invalid_argument("SpreadingCode: spreading factor exceeds code period");
        if (!(chip_rate > 0.0)) throw std::invalid_argument("SpreadingCode: chip rate must be > 0");
    }
    // the chip stream cycles through the whole PN period; symbol k covers
    // global chip indices [k*SF, (k+1)*SF), so the transmitted chips form a
    // plain m-sequence and keep its correlation properties
    double chip(std::size_t global_index) const { return code.chips[global_index % code.period()]; }
};

struct PathPeak {
    std::size_t delay_chips = 0;
    double strength = 0.0;       // correlation magnitude
    cplx gain{0, 0};             // complex correlation value, used as the MRC weight
    bool above_threshold = false;
};

struct FingerReport {
    int finger_id = 0;  // 1-based
    std::size_t delay_chips = 0;
    double magnitude_db = 0.0;  // 20*log10(mean |despread symbol amplitude|)
    std::vector<cplx> symbols;  // despread soft symbols
};

struct CombinedReport {
    double total_magnitude_db = 0.0;  // arithmetic sum of per-finger dB figures
    double combined_snr_linear = 0.0; // physical MRC output SNR estimate
    std::vector<double> finger_snr_linear;
};

// Known BPSK pilot sequence (pseudo-random, fixed): a constant pilot would
// make the pilot chip stream periodic in the spreading factor and alias the
// path searcher's delay estimates.
inline std::vector<cplx> pilot_sequence(std::size_t n) {
    std::vector<cplx> p(n);
    for (std::size_t k = 0; k < n; ++k)
        p[k] = (detail::mix_seed(0x9117D5ULL, k) & 1u) ? cplx(-1, 0) : cplx(1, 0);
    return p;
}

// Each symbol multiplied onto the same spreading_factor-chip code segment,
// chips emitted at chip_rate (one sample per chip).
inline ComplexSignal spread(const std::vector<cplx>& symbols, const SpreadingCode& code) {
    code.validate();
    ComplexSignal out(std::vector<cplx>{}, code.chip_rate);
    out.samples.reserve(symbols.size() * code.spreading_factor);
    for (std::size_t k = 0; k < symbols.size(); ++k)
        for (std::size_t c = 0; c < code.spreading_factor; ++c)
            out.samples.push_back(symbols[k] * code.chip(k * code.spreading_factor + c));
    return out;
}

// Coherent sliding correlation over a known pilot prefix of the frame.
// Returns local maxima above threshold_factor * strongest peak and above an
// absolute floor of 4.75x the estimated correlation noise std; top max_peaks by
// strength, ties broken toward the smaller delay. Empty result means no lock.
inline std::vector<PathPeak> path_search(const ComplexSignal& rx, const SpreadingCode& code,
                                         const std::vector<cplx>& pilot_symbols,
                                         std::size_t max_delay_chips, double threshold_factor = 0.5,
                                         std::size_t max_peaks = 4) {
    code.validate();
    const std::size_t sf = code.spreading_factor;
    const std::size_t pilot_chips = pilot_symbols.size() * sf;
    if (rx.samples.size() < pilot_chips + max_delay_chips)
        throw std::invalid_argument("path_search: rx shorter than pilot span plus search window");

    std::vector<cplx> corr(max_delay_chips + 1);
    std::vector<double> strength(max_delay_chips + 1);
    for (std::size_t d = 0; d <= max_delay_chips; ++d) {
        cplx acc(0, 0);
        for (std::size_t k = 0; k < pilot_symbols.size(); ++k)
            for (std::size_t c = 0; c < sf; ++c)
                acc += rx.samples[d + k * sf + c] * std::conj(pilot_symbols[k] * code.chip(k * sf + c));
        corr[d] = acc / static_cast<double>(pilot_chips);
        strength[d] = std::abs(corr[d]);
    }

    // noise std estimate from the median correlation magnitude (Rayleigh:
    // median = sigma_mag * sqrt(2 ln 2) with sigma_mag the per-component std)
    std::vector<double> sorted = strength;
    std::nth_element(sorted.begin(), sorted.begin() + static_cast<std::ptrdiff_t>(sorted.size() / 2), sorted.end());
    const double median = sorted[sorted.size() / 2];
    const double noise_floor = 4.75 * median / std::sqrt(2.0 * std::log(2.0));

    const double max_strength = *std::max_element(strength.begin(), strength.end());
    const double rel_thr = threshold_factor * max_strength;

    std::vector<PathPeak> peaks;
    for (std::size_t d = 0; d <= max_delay_chips; ++d) {
        const bool left_ok = d == 0 || strength[d] >= strength[d - 1];
        const bool right_ok = d == max_delay_chips || strength[d] > strength[d + 1];
        if (!(left_ok && right_ok)) continue;
        if (strength[d] < rel_thr || strength[d] < noise_floor) continue;
        peaks.push_back({d, strength[d], corr[d], true});
    }
    std::stable_sort(peaks.begin(), peaks.end(), [](const PathPeak& a, const PathPeak& b) {
        if (a.strength != b.strength) return a.strength > b.strength;
        return a.delay_chips < b.delay_chips;
    });
    if (peaks.size() > max_peaks) peaks.resize(max_peaks);
    return peaks;
}

// Delay-equalize rx by `delay` chips and correlate against the code per
// symbol period.
inline FingerReport finger_despread(const ComplexSignal& rx, const SpreadingCode& code,
                                    std::size_t delay_chips, std::size_t n_symbols,
                                    int finger_id = 0) {
    code.validate();
    const std::size_t sf = code.spreading_factor;
    if (delay_chips + n_symbols * sf > rx.samples.size())
        throw std::out_of_range("finger_despread: delay reaches past the rx buffer");
    FingerReport rep;
    rep.finger_id = finger_id;
    rep.delay_chips = delay_chips;
    rep.symbols.resize(n_symbols);
    double mean_mag = 0.0;
    for (std::size_t k = 0; k < n_symbols; ++k) {
        cplx acc(0, 0);
        for (std::size_t c = 0; c < sf; ++c)
            acc += rx.samples[delay_chips + k * sf + c] * code.chip(k * sf + c);
        rep.symbols[k] = acc / static_cast<double>(sf);
        mean_mag += std::abs(rep.symbols[k]);
    }
    mean_mag /= static_cast<double>(n_symbols);
    rep.magnitude_db = 20.0 * std::log10(std::max(mean_mag, 1e-30));
    return rep;
}

// Maximal-ratio combining: finger symbols weighted by conjugate channel
// gains, summed, rescaled by the total weight power. total_magnitude_db is
// the arithmetic sum of the per-finger dB figures (the receiver's reporting
// convention); combined_snr_linear is the physical MRC output SNR computed
// from per-finger pilot statistics.
inline std::pair<std::vector<cplx>, CombinedReport> combine(
    const std::vector<FingerReport>& fingers, const std::vector<cplx>& channel_gains,
    const std::vector<cplx>& pilot_symbols = {}) {
    if (fingers.empty()) throw std::invalid_argument("combine: no fingers");
    if (channel_gains.size() != fingers.size())
        throw std::invalid_argument("combine: one gain per finger required");
    const std::size_t n = fingers.front().symbols.size();
    for (const auto& f : fingers)
        if (f.symbols.size() != n) throw std::invalid_argument("combine: finger length mismatch");

    double wpow = 0.0;
    for (const auto& g : channel_gains) wpow += std::norm(g);
    if (wpow == 0.0) throw std::invalid_argument("combine: all-zero gains");

    std::vector<cplx> out(n, cplx(0, 0));
    for (std::size_t f = 0; f < fingers.size(); ++f)
        for (std::size_t k = 0; k < n; ++k)
            out[k] += std::conj(channel_gains[f]) * fingers[f].symbols[k];
    for (auto& s : out) s /= wpow;

    CombinedReport rep;
    for (const auto& f : fingers) rep.total_magnitude_db += f.magnitude_db;

    // SNRs from pilot statistics: signal power = |pilot-corrected mean|^2,
    // noise power = residual variance. Fingers and the MRC output are
    // measured the same way, so combining gain is an observation, not a
    // definition.
    const auto pilot_snr = [&](const std::vector<cplx>& sym) {
        cplx mean(0, 0);
        for (std::size_t k = 0; k < pilot_symbols.size(); ++k)
            mean += sym[k] * std::conj(pilot_symbols[k]);
        mean /= static_cast<double>(pilot_symbols.size());
        double var = 0.0;
        for (std::size_t k = 0; k < pilot_symbols.size(); ++k)
            var += std::norm(sym[k] - mean * pilot_symbols[k]);
        var /= static_cast<double>(pilot_symbols.size());
        return var > 0.0 ? std::norm(mean) / var : 0.0;
    };
    if (!pilot_symbols.empty() && pilot_symbols.size() <= n) {
        for (const auto& f : fingers) rep.finger_snr_linear.push_back(pilot_snr(f.symbols));
        rep.combined_snr_linear = pilot_snr(out);
    }
    return {std::move(out), rep};
}

// MMSE finger: chip-level Wiener kernel w = (R + noise_var*I)^-1 p at the
// given delay, with R the sample covariance of the per-symbol chip windows
// and p the cross-correlation against the conventional despread outputs
// (a blind estimate of the effective signature; steering to the bare code
// segment would self-null under multipath, the usual MVDR mismatch failure).
// The output is rescaled so the signal gain matches the conventional
// correlator's, making the two directly comparable; the kernel degenerates
// to the conventional one as noise_var grows.
inline FingerReport mmse_finger(const ComplexSignal& rx, const SpreadingCode& code,
                                std::size_t delay_chips, double noise_var,
                                std::size_t n_symbols, int finger_id = 0) {
    code.validate();
    if (!(noise_var > 0.0)) throw std::invalid_argument("mmse_finger: noise_var must be > 0");
    const std::size_t sf = code.spreading_factor;
    if (sf != code.code.period())
        throw std::invalid_argument("mmse_finger: requires spreading_factor == code period "
                                    "(code segment must repeat every symbol)");
    if (delay_chips + n_symbols * sf > rx.samples.size())
        throw std::out_of_range("mmse_finger: delay reaches past the rx buffer");

    // conventional despread outputs double as the reference for the
    // signature estimate p = E[x d*]
    std::vector<cplx> d_hat(n_symbols);
    for (std::size_t k = 0; k < n_symbols; ++k) {
        const std::size_t base = delay_chips + k * sf;
        cplx acc(0, 0);
        for (std::size_t i = 0; i < sf; ++i) acc += rx.samples[base + i] * code.chip(i);
        d_hat[k] = acc / static_cast<double>(sf);
    }

    std::vector<cplx> r(sf * sf, cplx(0, 0));
    std::vector<cplx> p(sf, cplx(0, 0));
    for (std::size_t k = 0; k < n_symbols; ++k) {
        const std::size_t base = delay_chips + k * sf;
        for (std::size_t i = 0; i < sf; ++i) {
            p[i] += rx.samples[base + i] * std::conj(d_hat[k]);
            for (std::size_t j = 0; j < sf; ++j)
                r[i * sf + j] += rx.samples[base + i] * std::conj(rx.samples[base + j]);
        }
    }
    double trace = 0.0;
    for (std::size_t i = 0; i < sf; ++i) {
        p[i] /= static_cast<double>(n_symbols);
        for (std::size_t j = 0; j < sf; ++j) r[i * sf + j] /= static_cast<double>(n_symbols);
        trace += r[i * sf + i].real();
    }
    const double loading = noise_var + 1e-6 * trace / static_cast<double>(sf);
    for (std::size_t i = 0; i < sf; ++i) r[i * sf + i] += loading;

    std::vector<cplx> w = detail::solve_dense(std::move(r), p);

    // match the conventional correlator's signal gain: both kernels are
    // scaled to the same response along the estimated signature p
    cplx wp(0, 0), cp(0, 0);
    for (std::size_t i = 0; i < sf; ++i) {
        wp += std::conj(w[i]) * p[i];
        cp += code.chip(i) * p[i] / static_cast<double>(sf);
    }
    const cplx scale = std::abs(wp) > 0.0 ? cp / wp : cplx(1, 0);

    FingerReport rep;
    rep.finger_id = finger_id;
    rep.delay_chips = delay_chips;
    rep.symbols.resize(n_symbols);
    double mean_mag = 0.0;
    for (std::size_t k = 0; k < n_symbols; ++k) {
        const std::size_t base = delay_chips + k * sf;
        cplx acc(0, 0);
        for (std::size_t i = 0; i < sf; ++i) acc += std::conj(w[i]) * rx.samples[base + i];
        rep.symbols[k] = acc * scale;
        mean_mag += std::abs(rep.symbols[k]);
    }
    mean_mag /= static_cast<double>(n_symbols);
    rep.magnitude_db = 20.0 * std::log10(std::max(mean_mag, 1e-30));
    return rep;
}

struct RakeConfig {
    std::size_t n_fingers = 4;
    std::size_t max_delay_chips = 32;
    double threshold_factor = 0.5;
    std::size_t pilot_symbols = 16;
    bool genie_weights = false;            // use supplied gains instead of searcher estimates
    std::vector<cplx> genie_gains;
    bool use_mmse_fingers = false;
    double mmse_noise_var = 0.1;
};

struct RakeResult {
    std::vector<PathPeak> peaks;
    std::vector<FingerReport> fingers;
    CombinedReport combined;
    std::vector<cplx> symbols;  // combined soft symbols, pilot included
    bool locked = false;
};

// search -> fingers -> combine pipeline over a frame that starts with the
// known pilot symbols.
inline RakeResult rake_receive(const ComplexSignal& rx, const SpreadingCode& code,
                               const std::vector<cplx>& pilot_symbols, std::size_t n_symbols,
                               const RakeConfig& cfg) {
    RakeResult res;
    res.peaks = path_search(rx, code, pilot_symbols, cfg.max_delay_chips, cfg.threshold_factor,
                            cfg.n_fingers);
    if (res.peaks.empty()) return res;  // no lock
    res.locked = true;

    std::vector<cplx> gains;
    for (std::size_t f = 0; f < res.peaks.size(); ++f) {
        const auto& p = res.peaks[f];
        if (cfg.use_mmse_fingers)
            res.fingers.push_back(mmse_finger(rx, code, p.delay_chips, cfg.mmse_noise_var,
                                              n_symbols, static_cast<int>(f) + 1));
        else
            res.fingers.push_back(
                finger_despread(rx, code, p.delay_chips, n_symbols, static_cast<int>(f) + 1));
        gains.push_back(cfg.genie_weights && f < cfg.genie_gains.size() ? cfg.genie_gains[f]
                                                                        : p.gain);
    }
    auto [symbols, rep] = combine(res.fingers, gains, pilot_symbols);
    res.symbols = std::move(symbols);
    res.combined = rep;
    return res;
}

}  // namespace airlink::rake
