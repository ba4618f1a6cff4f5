#pragma once

// Time-domain adaptive FIR equalizer with complex LMS updates. Training mode
// adapts against a known sequence; decision-directed mode adapts against its
// own sliced decisions.

#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "airlink/sigcore.hpp"

namespace airlink::adapteq {

enum class Mode { training, decision_directed };

struct EqualizerState {
    std::vector<cplx> taps;       // length L, output y = taps^H * window
    double mu = 0.01;             // step size
    Mode mode = Mode::training;
    std::size_t reference_delay = 0;  // decision delay D, 0 <= D < L
    std::vector<double> mse_history;  // |e|^2 per update step
    bool diverged = false;

    std::size_t length() const { return taps.size(); }
};

// Center-spike initialization: unit tap at the decision delay.
inline EqualizerState make_equalizer(std::size_t length, double mu, std::size_t reference_delay) {
    if (length < 1) throw std::invalid_argument("make_equalizer: need at least one tap");
    if (reference_delay >= length) throw std::invalid_argument("make_equalizer: reference delay out of range");
    if (!(mu >= 0.0)) throw std::invalid_argument("make_equalizer: negative step size");
    EqualizerState st;
    st.taps.assign(length, cplx(0, 0));
    st.taps[reference_delay] = cplx(1, 0);
    st.mu = mu;
    st.reference_delay = reference_delay;
    return st;
}

struct StepResult {
    cplx output;
    cplx error;
};

// One LMS update. window[i] = x[n - i] (newest sample first).
// y = w^H x, e = d - y, w <- w + mu * conj(e) * x.
inline StepResult lms_step(EqualizerState& state, const std::vector<cplx>& window, cplx desired) {
    if (window.size() != state.taps.size())
        throw std::invalid_argument("lms_step: window length must equal tap count");
    cplx y(0, 0);
    for (std::size_t i = 0; i < window.size(); ++i) y += std::conj(state.taps[i]) * window[i];
    if (!std::isfinite(y.real()) || !std::isfinite(y.imag()))
        throw std::runtime_error("lms_step: non-finite filter output");
    const cplx e = desired - y;
    const cplx g = state.mu * std::conj(e);
    for (std::size_t i = 0; i < window.size(); ++i) state.taps[i] += g * window[i];
    state.mse_history.push_back(std::norm(e));
    return {y, e};
}

namespace detail_eq {
inline constexpr std::size_t mse_window = 100;
inline constexpr double divergence_factor = 10.0;

inline double smoothed_mse(const std::vector<double>& h, std::size_t end) {
    const std::size_t n = std::min(mse_window, end);
    double acc = 0.0;
    for (std::size_t i = end - n; i < end; ++i) acc += h[i];
    return acc / static_cast<double>(n);
}

// flag, not abort: a run whose smoothed MSE blows up past 10x its best is
// reported as diverged and left inspectable via mse_history
inline void update_divergence(EqualizerState& st, double& best_smoothed) {
    if (st.mse_history.size() < mse_window) return;
    const double s = smoothed_mse(st.mse_history, st.mse_history.size());
    if (s < best_smoothed) best_smoothed = s;
    if (s > divergence_factor * best_smoothed && best_smoothed > 0.0) st.diverged = true;
}
}  // namespace detail_eq

inline std::vector<cplx> window_at(const ComplexSignal& rx, std::size_t n, std::size_t L) {
    std::vector<cplx> w(L, cplx(0, 0));
    for (std::size_t i = 0; i < L && i <= n; ++i) w[i] = rx.samples[n - i];
    return w;
}

// Training mode: run the LMS loop over the training span with the known
// symbol (delayed by D) as the desired signal.
inline EqualizerState train(const ComplexSignal& rx, const std::vector<cplx>& training_symbols,
                            std::size_t length, double mu, std::size_t reference_delay) {
    if (training_symbols.size() < length)
        throw std::invalid_argument("train: training sequence shorter than the filter");
    EqualizerState st = make_equalizer(length, mu, reference_delay);
    st.mode = Mode::training;
    double best = std::numeric_limits<double>::infinity();
    const std::size_t n_steps = std::min(rx.samples.size(), training_symbols.size() + reference_delay);
    for (std::size_t n = reference_delay; n < n_steps; ++n) {
        const cplx desired = training_symbols[n - reference_delay];
        lms_step(st, window_at(rx, n, length), desired);
        detail_eq::update_divergence(st, best);
    }
    return st;
}

struct DdResult {
    std::vector<cplx> symbols;  // sliced decisions
    std::vector<cplx> soft;     // filter outputs before slicing
    EqualizerState state;
};

// Decision-directed mode: slice the filter output and feed the decision back
// as the desired signal. Wrong decisions propagate into the taps; that is the
// documented failure mode, surfaced by mse_history and the diverged flag.
// start_index selects the first rx sample to equalize; output k is the
// decision for tx symbol start_index + k - reference_delay.
inline DdResult equalize_dd(const ComplexSignal& rx, EqualizerState state,
                            const SymbolAlphabet& alphabet, std::size_t start_index) {
    state.mode = Mode::decision_directed;
    DdResult out;
    double best = std::numeric_limits<double>::infinity();
    if (!state.mse_history.empty())
        best = detail_eq::smoothed_mse(state.mse_history, state.mse_history.size());
    for (std::size_t n = start_index; n < rx.samples.size(); ++n) {
        const auto w = window_at(rx, n, state.length());
        cplx y(0, 0);
        for (std::size_t i = 0; i < w.size(); ++i) y += std::conj(state.taps[i]) * w[i];
        const cplx decision = slice(y, alphabet);
        lms_step(state, w, decision);
        detail_eq::update_divergence(state, best);
        out.soft.push_back(y);
        out.symbols.push_back(decision);
    }
    out.state = std::move(state);
    return out;
}

inline DdResult equalize_dd(const ComplexSignal& rx, EqualizerState state,
                            const SymbolAlphabet& alphabet) {
    const std::size_t start = state.reference_delay;
    return equalize_dd(rx, std::move(state), alphabet, start);
}

// LMS mean stability bound for white input: mu < 2 / (L * input power).
inline double stability_bound(std::size_t length, double input_power) {
    return 2.0 / (static_cast<double>(length) * input_power);
}

}  // namespace airlink::adapteq
