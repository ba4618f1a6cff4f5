#pragma once

// Geometry-driven multipath channel: scatterer scenes to delay taps, the
// tapped-delay-line engine with per-tap Doppler, and band-limited
// impulse/frequency-response analysis with a main-lobe width metric.

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <vector>

#include "airlink/sigcore.hpp"

namespace airlink::channel {

inline constexpr double speed_of_light = 2.99792458e8;  // m/s

struct Vec2 {
    double x = 0.0, y = 0.0;
};

inline double dist(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

struct Scatterer {
    Vec2 pos;
    cplx reflectivity{1.0, 0.0};  // |reflectivity| <= 1
};

struct ScattererScene {
    Vec2 tx_pos;
    Vec2 rx_pos;
    std::vector<Scatterer> scatterers;
    bool los_blocked = false;
    double rx_velocity = 0.0;   // m/s along the LOS axis, positive toward tx
    double carrier_freq = 0.0;  // Hz
    double path_loss_exponent = 1.0;
};

struct Tap {
    double delay = 0.0;  // seconds, >= 0
    cplx gain{0.0, 0.0};
    double doppler = 0.0;  // Hz
};

struct TapSet {
    std::vector<Tap> taps;  // sorted by non-decreasing delay
    bool normalized = false;

    double max_delay() const {
        double m = 0.0;
        for (const auto& t : taps) m = std::max(m, t.delay);
        return m;
    }
    void sort_by_delay() {
        std::stable_sort(taps.begin(), taps.end(),
                         [](const Tap& a, const Tap& b) { return a.delay < b.delay; });
    }
    // Scale gains so the total tap power is 1.
    void normalize() {
        double p = 0.0;
        for (const auto& t : taps) p += std::norm(t.gain);
        if (p <= 0.0) throw std::invalid_argument("TapSet::normalize: zero total power");
        const double s = 1.0 / std::sqrt(p);
        for (auto& t : taps) t.gain *= s;
        normalized = true;
    }
};

struct IrAnalysis {
    ComplexSignal ir;            // band-limited reconstruction, ir.sample_rate = analysis fs
    double ir_start_time = 0.0;  // time of ir.samples[0], seconds (can be negative)
    std::vector<double> fr_freq;
    std::vector<cplx> fr;
    double mainlobe_width = 0.0;  // seconds, between first nulls around the peak
};

inline TapSet scene_to_taps(const ScattererScene& scene) {
    if (scene.tx_pos.x == scene.rx_pos.x && scene.tx_pos.y == scene.rx_pos.y)
        throw std::invalid_argument("scene_to_taps: tx and rx coincide");
    const double d_los = dist(scene.tx_pos, scene.rx_pos);
    // arrival direction at rx, pointing back along the incoming ray
    const Vec2 los_dir{(scene.tx_pos.x - scene.rx_pos.x) / d_los,
                       (scene.tx_pos.y - scene.rx_pos.y) / d_los};
    // rx velocity vector lies along the LOS axis, positive toward tx
    const Vec2 vel{scene.rx_velocity * los_dir.x, scene.rx_velocity * los_dir.y};

    TapSet out;
    const auto doppler_for = [&](Vec2 arrival_dir) {
        return (vel.x * arrival_dir.x + vel.y * arrival_dir.y) * scene.carrier_freq / speed_of_light;
    };
    if (!scene.los_blocked) {
        Tap los;
        los.delay = d_los / speed_of_light;
        los.gain = std::polar(1.0, -2.0 * detail::pi * los.delay * scene.carrier_freq);
        los.doppler = doppler_for(los_dir);
        out.taps.push_back(los);
    }
    for (const auto& sc : scene.scatterers) {
        const double d_tx = dist(scene.tx_pos, sc.pos);
        const double d_rx = dist(sc.pos, scene.rx_pos);
        if (d_tx == 0.0 || d_rx == 0.0)
            throw std::invalid_argument("scene_to_taps: scatterer coincides with tx or rx");
        Tap t;
        t.delay = (d_tx + d_rx) / speed_of_light;
        const double amp = std::pow(d_los / (d_tx + d_rx), scene.path_loss_exponent);
        t.gain = sc.reflectivity * amp *
                 std::polar(1.0, -2.0 * detail::pi * t.delay * scene.carrier_freq);
        const Vec2 arrival{(sc.pos.x - scene.rx_pos.x) / d_rx, (sc.pos.y - scene.rx_pos.y) / d_rx};
        t.doppler = doppler_for(arrival);
        out.taps.push_back(t);
    }
    if (out.taps.empty()) throw std::invalid_argument("scene_to_taps: blocked LOS and no scatterers");
    out.sort_by_delay();
    return out;
}

// Tapped delay line. Fractional delays round to the nearest sample; run the
// simulation oversampled if sub-sample accuracy matters. Doppler is a
// deterministic per-tap phasor at the output-sample time.
inline ComplexSignal apply_channel(const ComplexSignal& signal, const TapSet& taps) {
    if (taps.taps.empty()) throw std::invalid_argument("apply_channel: empty tap set");
    const double fs = signal.sample_rate;
    std::size_t max_d = 0;
    for (const auto& t : taps.taps)
        max_d = std::max(max_d, static_cast<std::size_t>(std::llround(t.delay * fs)));
    ComplexSignal out(std::vector<cplx>(signal.samples.size() + max_d, cplx(0, 0)), fs);
    for (const auto& t : taps.taps) {
        const auto d = static_cast<std::size_t>(std::llround(t.delay * fs));
        if (t.doppler == 0.0) {
            for (std::size_t n = 0; n < signal.samples.size(); ++n)
                out.samples[n + d] += t.gain * signal.samples[n];
        } else {
            for (std::size_t n = 0; n < signal.samples.size(); ++n) {
                const double tt = static_cast<double>(n + d) / fs;
                out.samples[n + d] +=
                    t.gain * std::polar(1.0, 2.0 * detail::pi * t.doppler * tt) * signal.samples[n];
            }
        }
    }
    return out;
}

namespace detail_ir {
// truncation extent of the brick-wall reconstruction kernel, in sinc lobes
inline constexpr double sinc_lobes = 16.0;
inline constexpr double null_threshold_db = -20.0;
}  // namespace detail_ir

// Band-limited (brick-wall, truncated-sinc) view of the tap train, the
// frequency response over [-bandwidth/2, +bandwidth/2] and the main-lobe
// width between the first nulls around the strongest peak.
inline IrAnalysis impulse_response(const TapSet& taps, double bandwidth, double fs, double span,
                                   std::size_t n_freq = 1024) {
    if (taps.taps.empty()) throw std::invalid_argument("impulse_response: empty tap set");
    if (!(bandwidth > 0.0) || !(fs >= 4.0 * bandwidth))
        throw std::invalid_argument("impulse_response: require fs >= 4*bandwidth > 0");
    if (span < taps.max_delay())
        throw std::invalid_argument("impulse_response: span shorter than max tap delay");

    const double margin = detail_ir::sinc_lobes / bandwidth;
    const double t0 = -margin;
    const auto n = static_cast<std::size_t>(std::ceil((span + 2.0 * margin) * fs)) + 1;

    IrAnalysis out;
    out.ir_start_time = t0;
    out.ir.sample_rate = fs;
    out.ir.samples.assign(n, cplx(0, 0));
    for (std::size_t i = 0; i < n; ++i) {
        const double t = t0 + static_cast<double>(i) / fs;
        cplx acc(0, 0);
        for (const auto& tap : taps.taps) {
            const double u = bandwidth * (t - tap.delay);
            if (std::abs(u) <= detail_ir::sinc_lobes) acc += tap.gain * airlink::detail::sinc(u);
        }
        out.ir.samples[i] = acc;
    }

    // FR directly from the tap model (exact for a brick-wall channel)
    out.fr_freq.resize(n_freq);
    out.fr.resize(n_freq);
    for (std::size_t k = 0; k < n_freq; ++k) {
        const double f = -bandwidth / 2.0 +
                         bandwidth * static_cast<double>(k) / static_cast<double>(n_freq - 1);
        out.fr_freq[k] = f;
        cplx acc(0, 0);
        for (const auto& tap : taps.taps)
            acc += tap.gain * std::polar(1.0, -2.0 * airlink::detail::pi * f * tap.delay);
        out.fr[k] = acc;
    }

    // main-lobe width: outward search from the peak for the first local
    // minima below the -20 dB threshold
    std::size_t peak = 0;
    double peak_mag = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double m = std::abs(out.ir.samples[i]);
        if (m > peak_mag) {
            peak_mag = m;
            peak = i;
        }
    }
    const double thr = peak_mag * std::pow(10.0, detail_ir::null_threshold_db / 20.0);
    const auto mag = [&](std::size_t i) { return std::abs(out.ir.samples[i]); };
    std::optional<std::size_t> left, right;
    for (std::size_t i = peak; i > 0; --i) {
        if (mag(i) < thr && mag(i) <= mag(i - 1) && (i + 1 > n - 1 || mag(i) <= mag(i + 1))) {
            left = i;
            break;
        }
    }
    for (std::size_t i = peak; i + 1 < n; ++i) {
        if (mag(i) < thr && mag(i) <= mag(i + 1) && (i == 0 || mag(i) <= mag(i - 1))) {
            right = i;
            break;
        }
    }
    if (!left || !right)
        throw std::runtime_error("impulse_response: no nulls found inside the analysis window");

    // refine the grid minima on the continuous reconstruction so the width
    // metric is not quantized to the analysis step
    const auto mag_at = [&](double t) {
        cplx acc(0, 0);
        for (const auto& tap : taps.taps) {
            const double u = bandwidth * (t - tap.delay);
            if (std::abs(u) <= detail_ir::sinc_lobes) acc += tap.gain * airlink::detail::sinc(u);
        }
        return std::abs(acc);
    };
    const auto refine = [&](std::size_t i) {
        double lo = t0 + static_cast<double>(i > 0 ? i - 1 : i) / fs;
        double hi = t0 + static_cast<double>(std::min(i + 1, n - 1)) / fs;
        for (int it = 0; it < 100; ++it) {
            const double m1 = lo + (hi - lo) / 3.0;
            const double m2 = hi - (hi - lo) / 3.0;
            if (mag_at(m1) < mag_at(m2)) hi = m2;
            else lo = m1;
        }
        return 0.5 * (lo + hi);
    };
    out.mainlobe_width = refine(*right) - refine(*left);
    return out;
}

inline double mainlobe_broadening(const IrAnalysis& base, const IrAnalysis& perturbed) {
    return 100.0 * (perturbed.mainlobe_width - base.mainlobe_width) / base.mainlobe_width;
}

}  // namespace airlink::channel
