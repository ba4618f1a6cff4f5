#include <doctest.h>

#include <cmath>
#include <random>

#include "airlink/adapteq.hpp"
#include "airlink/channel.hpp"

using namespace airlink;
using namespace airlink::adapteq;

namespace {

ComplexSignal through_channel(const std::vector<cplx>& sym,
                              const std::vector<std::pair<double, cplx>>& paths, double fs) {
    channel::TapSet ts;
    for (const auto& [d, g] : paths) ts.taps.push_back({d / fs, g, 0.0});
    ts.sort_by_delay();
    auto rx = channel::apply_channel(ComplexSignal(sym, fs), ts);
    rx.samples.resize(sym.size());
    return rx;
}

// empirical Wiener solution for the same data the LMS loop sees:
// w = R^-1 p with R = E[x x^H], p = E[x d*], x the length-L window.
std::vector<cplx> wiener_taps(const ComplexSignal& rx, const std::vector<cplx>& desired,
                              std::size_t L, std::size_t D) {
    std::vector<cplx> r(L * L, cplx(0, 0)), p(L, cplx(0, 0));
    std::size_t count = 0;
    for (std::size_t n = D; n < desired.size() + D && n < rx.samples.size(); ++n) {
        const auto x = window_at(rx, n, L);
        for (std::size_t i = 0; i < L; ++i) {
            p[i] += x[i] * std::conj(desired[n - D]);
            for (std::size_t j = 0; j < L; ++j) r[i * L + j] += x[i] * std::conj(x[j]);
        }
        ++count;
    }
    for (auto& v : r) v /= static_cast<double>(count);
    for (auto& v : p) v /= static_cast<double>(count);
    return airlink::detail::solve_dense(std::move(r), std::move(p));
}

double tap_dist(const std::vector<cplx>& a, const std::vector<cplx>& b) {
    double acc = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) acc += std::norm(a[i] - b[i]);
    return std::sqrt(acc);
}

}  // namespace

TEST_CASE("construction and single-step algebra") {
    SUBCASE("center spike init") {
        auto st = make_equalizer(7, 0.05, 3);
        REQUIRE(st.length() == 7);
        for (std::size_t i = 0; i < 7; ++i)
            CHECK(st.taps[i] == (i == 3 ? cplx(1, 0) : cplx(0, 0)));
        CHECK_THROWS(make_equalizer(0, 0.1, 0));
        CHECK_THROWS(make_equalizer(5, 0.1, 5));
        CHECK_THROWS(make_equalizer(5, -0.1, 0));
    }
    SUBCASE("one update from zero taps follows the LMS equations exactly") {
        auto st = make_equalizer(1, 0.5, 0);
        st.taps[0] = cplx(0, 0);
        const cplx x(0.3, -0.7), d(1.0, 0.5);
        auto r = lms_step(st, {x}, d);
        CHECK(r.output == cplx(0, 0));
        CHECK(r.error == d);
        // w <- w + mu * conj(e) * x
        CHECK(std::abs(st.taps[0] - 0.5 * std::conj(d) * x) < 1e-15);
        REQUIRE(st.mse_history.size() == 1);
        CHECK(st.mse_history[0] == doctest::Approx(std::norm(d)));
    }
    SUBCASE("second step uses the updated tap: y = w^H x") {
        auto st = make_equalizer(2, 0.1, 0);
        st.taps = {cplx(0.5, 0.25), cplx(-0.1, 0.0)};
        const std::vector<cplx> w0 = st.taps;
        const std::vector<cplx> x{cplx(1, 1), cplx(0, -1)};
        const cplx d(0.2, 0.2);
        const cplx y_expect = std::conj(w0[0]) * x[0] + std::conj(w0[1]) * x[1];
        auto r = lms_step(st, x, d);
        CHECK(std::abs(r.output - y_expect) < 1e-15);
        CHECK(std::abs(r.error - (d - y_expect)) < 1e-15);
        for (std::size_t i = 0; i < 2; ++i)
            CHECK(std::abs(st.taps[i] - (w0[i] + 0.1 * std::conj(d - y_expect) * x[i])) < 1e-15);
    }
    SUBCASE("mu = 0 freezes the taps") {
        auto st = make_equalizer(3, 0.0, 1);
        const auto w0 = st.taps;
        std::mt19937_64 rng(3);
        std::normal_distribution<double> g;
        for (int k = 0; k < 50; ++k)
            lms_step(st, {cplx(g(rng), g(rng)), cplx(g(rng), g(rng)), cplx(g(rng), g(rng))},
                     cplx(g(rng), g(rng)));
        CHECK(st.taps == w0);
    }
    SUBCASE("window length mismatch rejected") {
        auto st = make_equalizer(4, 0.1, 0);
        CHECK_THROWS(lms_step(st, std::vector<cplx>(3), cplx(0, 0)));
    }
}

TEST_CASE("training convergence") {
    const double fs = 1e6;
    const auto qpsk = SymbolAlphabet::qpsk();
    std::mt19937_64 rng(17);
    const auto sym = modulate(random_bits(2 * 20000, rng), qpsk);

    SUBCASE("identity channel: taps stay a delta, MSE ~ 0") {
        ComplexSignal rx(sym, fs);
        auto st = train(rx, sym, 5, 0.02, 0);
        CHECK(std::abs(st.taps[0] - cplx(1, 0)) < 1e-6);
        for (std::size_t i = 1; i < 5; ++i) CHECK(std::abs(st.taps[i]) < 1e-6);
        CHECK(!st.diverged);
    }
    SUBCASE("two-path channel converges to the empirical Wiener solution") {
        auto rx = through_channel(sym, {{0.0, cplx(1, 0)}, {2.0, cplx(0.45, -0.3)}}, fs);
        std::mt19937_64 nr(5);
        rx = add_awgn(rx, 30.0, nr);
        const std::size_t L = 11, D = 2;
        auto st = train(rx, sym, L, 0.002, D);
        const auto w_opt = wiener_taps(rx, sym, L, D);
        CHECK(tap_dist(st.taps, w_opt) < 1e-2);
        CHECK(!st.diverged);
        // residual training MSE is small
        const double tail = adapteq::detail_eq::smoothed_mse(st.mse_history, st.mse_history.size());
        CHECK(10.0 * std::log10(tail) < -20.0);
    }
    SUBCASE("step above the stability bound is flagged or blows up") {
        auto rx = through_channel(sym, {{0.0, cplx(1, 0)}, {1.0, cplx(0.5, 0.2)}}, fs);
        const std::size_t L = 11;
        const double mu_bad = 3.0 * stability_bound(L, rx.power());
        bool unstable = false;
        try {
            auto st = train(rx, sym, L, mu_bad, 2);
            unstable = st.diverged;
        } catch (const std::runtime_error&) {
            unstable = true;  // non-finite output aborts the update loop
        }
        CHECK(unstable);
    }
    SUBCASE("training sequence shorter than the filter rejected") {
        ComplexSignal rx(std::vector<cplx>(100, cplx(1, 0)), fs);
        CHECK_THROWS(train(rx, std::vector<cplx>(3, cplx(1, 0)), 5, 0.01, 0));
    }
    SUBCASE("determinism: identical inputs, identical taps and history") {
        auto rx = through_channel(sym, {{0.0, cplx(1, 0)}, {3.0, cplx(0.3, 0.3)}}, fs);
        auto a = train(rx, sym, 9, 0.01, 2);
        auto b = train(rx, sym, 9, 0.01, 2);
        CHECK(a.taps == b.taps);
        CHECK(a.mse_history == b.mse_history);
    }
}

TEST_CASE("decision-directed mode") {
    const double fs = 1e6;
    const auto qpsk = SymbolAlphabet::qpsk();
    std::mt19937_64 rng(29);
    const auto train_sym = modulate(random_bits(2 * 3000, rng), qpsk);
    const auto data_bits = random_bits(2 * 4000, rng);
    const auto data_sym = modulate(data_bits, qpsk);
    std::vector<cplx> frame = train_sym;
    frame.insert(frame.end(), data_sym.begin(), data_sym.end());
    const std::size_t L = 11, D = 2;

    SUBCASE("after training, DD decisions match the transmitted data") {
        auto rx = through_channel(frame, {{0.0, cplx(1, 0)}, {2.0, cplx(0.4, -0.25)}}, fs);
        std::mt19937_64 nr(7);
        rx = add_awgn(rx, 25.0, nr);
        auto st = train(rx, train_sym, L, 0.01, D);
        auto res = equalize_dd(rx, st, qpsk, train_sym.size() + D);
        // the last D decisions need rx past the frame end, so D fewer outputs
        REQUIRE(res.symbols.size() >= data_sym.size() - D);
        std::size_t errors = 0;
        for (std::size_t k = 0; k < data_sym.size() - D; ++k)
            if (std::abs(res.symbols[k] - data_sym[k]) > 1e-9) ++errors;
        CHECK(errors == 0);
        CHECK(!res.state.diverged);
    }
    SUBCASE("frozen DD (mu = 0) leaves the trained taps untouched") {
        auto rx = through_channel(frame, {{0.0, cplx(1, 0)}, {1.0, cplx(0.3, 0.1)}}, fs);
        auto st = train(rx, train_sym, L, 0.01, D);
        st.mu = 0.0;
        const auto w0 = st.taps;
        auto res = equalize_dd(rx, st, qpsk, train_sym.size() + D);
        CHECK(res.state.taps == w0);
    }
    SUBCASE("soft outputs are the pre-slice filter outputs") {
        auto rx = through_channel(frame, {{0.0, cplx(1, 0)}}, fs);
        auto st = train(rx, train_sym, L, 0.01, D);
        auto res = equalize_dd(rx, st, qpsk, train_sym.size() + D);
        for (std::size_t k = 0; k < res.soft.size(); ++k)
            CHECK(res.symbols[k] == slice(res.soft[k], qpsk));
    }
}

TEST_CASE("scale equivariance") {
    // scaling input and desired by a common phasor c leaves the tap
    // trajectory unchanged and rotates the outputs by c
    const double fs = 1e6;
    const auto qpsk = SymbolAlphabet::qpsk();
    std::mt19937_64 rng(31);
    const auto sym = modulate(random_bits(2 * 5000, rng), qpsk);
    auto rx = through_channel(sym, {{0.0, cplx(1, 0)}, {2.0, cplx(0.4, 0.2)}}, fs);
    const cplx c = std::polar(1.0, 0.9);
    auto rx_s = rx;
    for (auto& v : rx_s.samples) v *= c;
    std::vector<cplx> sym_s(sym.size());
    for (std::size_t i = 0; i < sym.size(); ++i) sym_s[i] = sym[i] * c;

    auto a = train(rx, sym, 9, 0.01, 2);
    auto b = train(rx_s, sym_s, 9, 0.01, 2);
    for (std::size_t i = 0; i < 9; ++i) CHECK(std::abs(a.taps[i] - b.taps[i]) < 1e-9);

    // a general common scale keeps the Wiener fixed point: R and p both pick
    // up |c|^2, so the converged taps agree between the two runs
    const cplx c2(1.7, -0.6);
    auto rx_g = rx;
    for (auto& v : rx_g.samples) v *= c2;
    std::vector<cplx> sym_g(sym.size());
    for (std::size_t i = 0; i < sym.size(); ++i) sym_g[i] = sym[i] * c2;
    const auto w1 = wiener_taps(rx, sym, 9, 2);
    const auto w2 = wiener_taps(rx_g, sym_g, 9, 2);
    CHECK(tap_dist(w1, w2) < 1e-9);
}
