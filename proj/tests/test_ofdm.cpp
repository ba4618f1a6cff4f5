#include <doctest.h>

#include <cmath>
#include <random>

#include "airlink/channel.hpp"
#include "airlink/ofdm.hpp"

using namespace airlink;
using namespace airlink::ofdm;

namespace {

std::vector<cplx> random_qpsk(std::size_t n, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    return modulate(random_bits(2 * n, rng), SymbolAlphabet::qpsk());
}

// true per-carrier response of an integer-sample-delay tap channel
std::vector<cplx> true_channel(const channel::TapSet& ts, const OfdmParams& p) {
    std::vector<cplx> h;
    for (int k : p.used_carriers) {
        cplx acc(0, 0);
        for (const auto& t : ts.taps) {
            const double d = t.delay * p.sample_rate;  // samples
            acc += t.gain * std::polar(1.0, -2.0 * airlink::detail::pi * k * d /
                                                static_cast<double>(p.n_fft));
        }
        h.push_back(acc);
    }
    return h;
}

channel::TapSet sample_taps(const std::vector<std::pair<double, cplx>>& paths, double fs) {
    channel::TapSet ts;
    for (const auto& [d, g] : paths) ts.taps.push_back({d / fs, g, 0.0});
    ts.sort_by_delay();
    return ts;
}

}  // namespace

TEST_CASE("params and carrier maps") {
    SUBCASE("wifi/wimax profiles") {
        auto w = wifi_params();
        CHECK(w.n_fft == 64);
        CHECK(w.cp_len == 16);
        CHECK(w.used_carriers.size() == 52);
        CHECK(w.symbol_len() == 80);
        auto m = wimax_params();
        CHECK(m.n_fft == 256);
        CHECK(m.used_carriers.size() == 200);
        CHECK(m.subcarrier_spacing() == doctest::Approx(8e6 / 256.0));
    }
    SUBCASE("contiguous carriers exclude DC and are symmetric") {
        auto c = contiguous_carriers(8);
        REQUIRE(c.size() == 8);
        for (int k : c) CHECK(k != 0);
        for (std::size_t i = 0; i < 4; ++i) CHECK(c[i] == -c[7 - i]);
        CHECK_THROWS(contiguous_carriers(7));
    }
    SUBCASE("validation rejects bad shapes") {
        OfdmParams p = wifi_params();
        p.n_fft = 48;
        CHECK_THROWS(p.validate());
        p = wifi_params();
        p.cp_len = 64;
        CHECK_THROWS(p.validate());
        p = wifi_params();
        p.used_carriers.push_back(0);
        CHECK_THROWS(p.validate());
        p = wifi_params();
        p.used_carriers.push_back(32);  // outside [-32, 32)
        CHECK_THROWS(p.validate());
    }
}

TEST_CASE("modulate/demodulate") {
    const auto p = wifi_params();
    const auto sym = random_qpsk(52 * 6, 11);

    SUBCASE("round trip is exact") {
        auto rx = ofdm_demodulate(ofdm_modulate(sym, p), p);
        REQUIRE(rx.size() == sym.size());
        for (std::size_t i = 0; i < sym.size(); ++i) CHECK(std::abs(rx[i] - sym[i]) < 1e-12);
    }
    SUBCASE("cyclic prefix copies the symbol tail") {
        auto sig = ofdm_modulate(sym, p);
        REQUIRE(sig.samples.size() == 6 * p.symbol_len());
        for (std::size_t s = 0; s < 6; ++s) {
            const std::size_t base = s * p.symbol_len();
            for (std::size_t i = 0; i < p.cp_len; ++i)
                CHECK(sig.samples[base + i] == sig.samples[base + p.n_fft + i]);
        }
    }
    SUBCASE("unitary transform preserves per-symbol energy") {
        auto sig = ofdm_modulate(sym, p);
        for (std::size_t s = 0; s < 6; ++s) {
            double e_time = 0.0, e_freq = 0.0;
            const std::size_t body = s * p.symbol_len() + p.cp_len;
            for (std::size_t i = 0; i < p.n_fft; ++i) e_time += std::norm(sig.samples[body + i]);
            for (std::size_t c = 0; c < 52; ++c) e_freq += std::norm(sym[s * 52 + c]);
            CHECK(e_time == doctest::Approx(e_freq).epsilon(1e-12));
        }
    }
    SUBCASE("timing offset inside the CP applies the DFT shift theorem") {
        const std::size_t t = 5;
        auto sig = ofdm_modulate(sym, p);
        auto rx = ofdm_demodulate(sig, p, t);
        for (std::size_t s = 0; s < 6; ++s)
            for (std::size_t c = 0; c < 52; ++c) {
                const int k = p.used_carriers[c];
                const cplx rot = std::polar(
                    1.0, -2.0 * airlink::detail::pi * k * static_cast<double>(t) / 64.0);
                CHECK(std::abs(rx[s * 52 + c] - sym[s * 52 + c] * rot) < 1e-12);
            }
    }
    SUBCASE("offset beyond the CP is rejected") {
        auto sig = ofdm_modulate(sym, p);
        CHECK_THROWS(ofdm_demodulate(sig, p, p.cp_len + 1));
    }
    SUBCASE("symbol count must fill whole symbols") {
        CHECK_THROWS(ofdm_modulate(std::vector<cplx>(53, cplx(1, 0)), p));
    }
}

TEST_CASE("multipath within the CP is one-tap equalizable") {
    const auto p = wifi_params();
    const auto sym = random_qpsk(52 * 8, 23);
    auto ts = sample_taps({{0.0, cplx(1, 0)}, {3.0, cplx(-0.5, 0.4)}, {9.0, cplx(0.2, -0.3)}},
                          p.sample_rate);
    auto rx_sig = channel::apply_channel(ofdm_modulate(sym, p), ts);
    rx_sig.samples.resize(8 * p.symbol_len());
    auto rx = ofdm_demodulate(rx_sig, p);

    SUBCASE("demodulated carriers match the tap DFT oracle") {
        auto h = true_channel(ts, p);
        for (std::size_t s = 0; s < 8; ++s)
            for (std::size_t c = 0; c < 52; ++c)
                CHECK(std::abs(rx[s * 52 + c] - sym[s * 52 + c] * h[c]) < 1e-10);
    }
    SUBCASE("known-channel one-tap equalization is exact") {
        ChannelEstimate est;
        est.h = true_channel(ts, p);
        auto eq = one_tap_equalize(rx, est);
        CHECK(evm_db_excluding_erasures(sym, eq) <= -100.0);
    }
    SUBCASE("delay spread beyond the CP leaves an ISI floor") {
        auto bad = sample_taps({{0.0, cplx(1, 0)}, {24.0, cplx(0.8, 0.0)}}, p.sample_rate);
        auto rx2_sig = channel::apply_channel(ofdm_modulate(sym, p), bad);
        rx2_sig.samples.resize(8 * p.symbol_len());
        auto rx2 = ofdm_demodulate(rx2_sig, p);
        ChannelEstimate est;
        est.h = true_channel(bad, p);
        auto eq = one_tap_equalize(rx2, est);
        CHECK(evm_db_excluding_erasures(sym, eq) > -30.0);
    }
}

TEST_CASE("channel estimation") {
    const auto p = wimax_params();
    const std::size_t nc = p.used_carriers.size();
    auto ts = sample_taps({{0.0, cplx(0.9, 0.1)}, {7.0, cplx(0.3, -0.5)}}, p.sample_rate);
    const auto h_true = true_channel(ts, p);
    const auto pre = random_qpsk(nc, 31);
    auto rx_sig = channel::apply_channel(ofdm_modulate(pre, p), ts);
    rx_sig.samples.resize(p.symbol_len());
    auto rx = ofdm_demodulate(rx_sig, p);

    SUBCASE("LS recovers the exact response noiselessly") {
        auto est = estimate_channel_ls(rx, pre, p);
        CHECK(est.source == EstimateSource::least_squares_preamble);
        REQUIRE(est.h.size() == nc);
        for (std::size_t c = 0; c < nc; ++c) CHECK(std::abs(est.h[c] - h_true[c]) < 1e-10);
    }
    SUBCASE("LS rejects zero preamble carriers and length mismatch") {
        auto z = pre;
        z[0] = cplx(0, 0);
        CHECK_THROWS(estimate_channel_ls(rx, z, p));
        CHECK_THROWS(estimate_channel_ls(rx, std::vector<cplx>(nc - 1), p));
    }
    SUBCASE("per-carrier LMS converges geometrically on repeated symbols") {
        // unit-modulus reference: error after n updates shrinks as (1-mu)^n
        const std::size_t reps = 40;
        std::vector<cplx> ref, got;
        for (std::size_t r = 0; r < reps; ++r) {
            ref.insert(ref.end(), pre.begin(), pre.end());
            got.insert(got.end(), rx.begin(), rx.end());
        }
        auto est = estimate_channel_lms(got, ref, p, 0.3);
        CHECK(est.source == EstimateSource::lms);
        const double expect = std::pow(1.0 - 0.3, static_cast<double>(reps));
        for (std::size_t c = 0; c < nc; ++c)
            CHECK(std::abs(est.h[c] - h_true[c]) <=
                  doctest::Approx(std::abs(h_true[c]) * expect).epsilon(1e-6));
    }
    SUBCASE("LMS input shape enforced") {
        CHECK_THROWS(estimate_channel_lms(std::vector<cplx>(nc), std::vector<cplx>(nc - 1), p, 0.1));
        CHECK_THROWS(estimate_channel_lms(std::vector<cplx>(nc + 1), std::vector<cplx>(nc + 1), p, 0.1));
    }
}

TEST_CASE("erasures") {
    const auto p = wifi_params();
    const auto sym = random_qpsk(52, 41);
    auto rx = ofdm_demodulate(ofdm_modulate(sym, p), p);
    ChannelEstimate est;
    est.h.assign(52, cplx(1, 0));
    est.h[10] = cplx(1e-9, 0);  // below the erasure floor

    auto eq = one_tap_equalize(rx, est);
    CHECK(eq.erased[10]);
    CHECK(eq.symbols[10] == cplx(0, 0));
    for (std::size_t c = 0; c < 52; ++c)
        if (c != 10) CHECK(!eq.erased[c]);
    // the erased carrier does not poison the EVM
    CHECK(evm_db_excluding_erasures(sym, eq) <= -120.0 + 1e-9);
}

TEST_CASE("doppler offset") {
    SUBCASE("zero offset is the identity") {
        auto p = wifi_params();
        auto sig = ofdm_modulate(random_qpsk(52, 51), p);
        auto moved = apply_doppler_offset(sig, 0.0);
        CHECK(moved.samples == sig.samples);
    }
    SUBCASE("a one-bin offset moves a tone to the next carrier") {
        OfdmParams p{64, 0, contiguous_carriers(52), 20e6};
        std::vector<cplx> sym(52, cplx(0, 0));
        sym[10] = cplx(1, 0);  // carrier index used_carriers[10]
        auto sig = ofdm_modulate(sym, p);
        auto moved = apply_doppler_offset(sig, p.subcarrier_spacing());
        auto rx = ofdm_demodulate(moved, p);
        const int k = p.used_carriers[10];
        for (std::size_t c = 0; c < 52; ++c) {
            const double mag = std::abs(rx[c]);
            if (p.used_carriers[c] == k + 1)
                CHECK(mag == doctest::Approx(1.0).epsilon(1e-9));
            else
                CHECK(mag < 1e-9);
        }
    }
    SUBCASE("a fractional offset degrades EVM monotonically") {
        auto p = wifi_params();
        auto sym = random_qpsk(52 * 4, 61);
        auto sig = ofdm_modulate(sym, p);
        double last = -200.0;
        for (double frac : {0.005, 0.02, 0.08}) {
            auto rx = ofdm_demodulate(apply_doppler_offset(sig, frac * p.subcarrier_spacing()), p);
            const double evm = measure_evm_db(sym, rx);
            CHECK(evm > last);
            last = evm;
        }
    }
}
