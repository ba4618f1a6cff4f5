#pragma once

// Scenario execution: runs a validated ScenarioConfig end-to-end, writes CSV
// artifacts plus a JSON manifest, and returns the summary metrics. Identical
// (config, seed) pairs emit identical bytes; per-point RNG streams are
// derived with splitmix so evaluation order cannot leak into the output.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "airlink/adapteq.hpp"
#include "airlink/channel.hpp"
#include "airlink/ofdm.hpp"
#include "airlink/rake.hpp"
#include "airlink/sigcore.hpp"
#include "airlink/workbench/config.hpp"
#include "airlink/workbench/csv.hpp"

namespace airlink::workbench {

namespace fs = std::filesystem;

struct RunReport {
    std::string name;
    std::string config_hash_hex;
    std::uint64_t seed = 0;
    std::vector<std::string> files;  // relative to the run directory
    std::map<std::string, double> metrics;
};

struct PointResult {
    double snr_db = 0.0;
    double ber = 0.0;
    double evm_before_db = 0.0;
    double evm_after_db = 0.0;
    double effective_snr_db = 0.0;
};

namespace detail_run {

inline std::string hash_hex(std::uint64_t h) {
    char buf[20];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

inline channel::TapSet resolve_taps(const ScenarioConfig& cfg) {
    if (cfg.taps) return *cfg.taps;
    if (cfg.scene) return channel::scene_to_taps(*cfg.scene);
    throw ValidationError("scenario has neither scene nor taps");
}

inline std::vector<cplx> pilot_pattern(std::size_t n) { return rake::pilot_sequence(n); }

// fixed +-1 preamble pattern on the used carriers
inline std::vector<cplx> ofdm_preamble_pattern(std::size_t n_carriers) {
    std::vector<cplx> p(n_carriers);
    for (std::size_t c = 0; c < n_carriers; ++c)
        p[c] = (detail::mix_seed(0xA11CE5EEDULL, c) & 1u) ? cplx(-1, 0) : cplx(1, 0);
    return p;
}

inline void dump_ir_fr(const channel::IrAnalysis& an, const fs::path& dir,
                       const std::string& ir_name, const std::string& fr_name,
                       std::vector<std::string>& files) {
    CsvWriter ir(dir / ir_name, "time_s,re,im,mag_db");
    for (std::size_t i = 0; i < an.ir.samples.size(); ++i) {
        const double t = an.ir_start_time + static_cast<double>(i) / an.ir.sample_rate;
        const cplx v = an.ir.samples[i];
        const double mag = std::abs(v);
        ir.row({t, v.real(), v.imag(), 20.0 * std::log10(std::max(mag, 1e-30))});
    }
    files.push_back(ir_name);
    CsvWriter fr(dir / fr_name, "freq_hz,re,im,mag_db");
    for (std::size_t i = 0; i < an.fr.size(); ++i) {
        const cplx v = an.fr[i];
        const double mag = std::abs(v);
        fr.row({an.fr_freq[i], v.real(), v.imag(), 20.0 * std::log10(std::max(mag, 1e-30))});
    }
    files.push_back(fr_name);
}

inline channel::TapSet two_tap(double sep) {
    channel::TapSet ts;
    ts.taps.push_back({0.0, cplx(1, 0), 0.0});
    ts.taps.push_back({sep, cplx(1, 0), 0.0});
    return ts;
}

// ---------------------------------------------------------------- channel --

inline void run_channel_analysis(const ScenarioConfig& cfg, const fs::path& dir, RunReport& rep) {
    const auto& a = cfg.analysis;
    if (a.mode == "ir") {
        auto taps = resolve_taps(cfg);
        const double span = std::max(a.span, taps.max_delay());
        auto an = channel::impulse_response(taps, a.bandwidth, a.fs, span);
        dump_ir_fr(an, dir, "ir.csv", "fr.csv", rep.files);
        rep.metrics["mainlobe_width_s"] = an.mainlobe_width;
        rep.metrics["n_taps"] = static_cast<double>(taps.taps.size());
    } else if (a.mode == "broadening_sweep") {
        channel::TapSet base;
        base.taps.push_back({0.0, cplx(1, 0), 0.0});
        const auto base_an = channel::impulse_response(base, a.bandwidth, a.fs, a.span);
        const auto width_at = [&](double sep) {
            return channel::impulse_response(two_tap(sep), a.bandwidth, a.fs, a.span + sep)
                .mainlobe_width;
        };
        CsvWriter sweep(dir / "broadening.csv", "separation_s,mainlobe_width_s,broadening_pct");
        double prev_b = 0.0;
        double lo = 0.0, hi = 0.0;
        for (std::size_t i = 0; i < a.sweep_steps; ++i) {
            const double sep = a.sep_min + (a.sep_max - a.sep_min) * static_cast<double>(i) /
                                               static_cast<double>(a.sweep_steps - 1);
            const double w = width_at(sep);
            const double b = 100.0 * (w - base_an.mainlobe_width) / base_an.mainlobe_width;
            sweep.row({sep, w, b});
            if (prev_b < a.target_broadening_pct && b >= a.target_broadening_pct && hi == 0.0) {
                lo = a.sep_min + (a.sep_max - a.sep_min) * static_cast<double>(i - 1) /
                                     static_cast<double>(a.sweep_steps - 1);
                hi = sep;
            }
            prev_b = b;
        }
        rep.files.push_back("broadening.csv");
        rep.metrics["base_mainlobe_width_s"] = base_an.mainlobe_width;
        if (hi > 0.0) {
            // bisection for the separation that reproduces the target broadening
            for (int it = 0; it < 60; ++it) {
                const double mid = 0.5 * (lo + hi);
                const double b = 100.0 * (width_at(mid) - base_an.mainlobe_width) /
                                 base_an.mainlobe_width;
                (b < a.target_broadening_pct ? lo : hi) = mid;
            }
            const double sep_star = 0.5 * (lo + hi);
            rep.metrics["target_broadening_pct"] = a.target_broadening_pct;
            rep.metrics["separation_at_target_s"] = sep_star;
            rep.metrics["broadening_at_target_pct"] =
                100.0 * (width_at(sep_star) - base_an.mainlobe_width) / base_an.mainlobe_width;
            auto an = channel::impulse_response(two_tap(sep_star), a.bandwidth, a.fs,
                                                a.span + sep_star);
            dump_ir_fr(an, dir, "ir_broadened.csv", "fr_broadened.csv", rep.files);
        }
    } else {  // scatterer_sweep
        if (!cfg.scene) throw ValidationError("scatterer_sweep requires a scene");
        if (cfg.scene->scatterers.empty()) throw ValidationError("scatterer_sweep: scene has no scatterer");
        const auto base = *cfg.scene;
        const channel::Vec2 mid{(base.tx_pos.x + base.rx_pos.x) / 2.0,
                                (base.tx_pos.y + base.rx_pos.y) / 2.0};
        // perpendicular direction to the LOS axis
        const double dlos = channel::dist(base.tx_pos, base.rx_pos);
        const channel::Vec2 perp{-(base.rx_pos.y - base.tx_pos.y) / dlos,
                                 (base.rx_pos.x - base.tx_pos.x) / dlos};
        CsvWriter sweep(dir / "scatterer_sweep.csv",
                        "offset_m,delay_s,excess_delay_s,gain_mag,gain_db");
        const std::size_t steps = cfg.analysis.sweep_steps;
        for (std::size_t i = 0; i < steps; ++i) {
            const double off = cfg.analysis.offset_min +
                               (cfg.analysis.offset_max - cfg.analysis.offset_min) *
                                   static_cast<double>(i) / static_cast<double>(steps - 1);
            auto scene = base;
            scene.scatterers[0].pos = {mid.x + perp.x * off, mid.y + perp.y * off};
            auto taps = channel::scene_to_taps(scene);
            const auto& sc_tap = taps.taps.back();  // scatterer path has the larger delay
            const double los_delay = dlos / channel::speed_of_light;
            const double mag = std::abs(sc_tap.gain);
            sweep.row({off, sc_tap.delay, sc_tap.delay - los_delay, mag,
                       20.0 * std::log10(std::max(mag, 1e-30))});
        }
        rep.files.push_back("scatterer_sweep.csv");
    }
}

// ------------------------------------------------------------------- rake --

struct RakePointOutput {
    PointResult point;
    rake::RakeResult full;      // with configured finger count
    rake::RakeResult single;    // single-finger reference
    double tx_amplitude = 1.0;
};

inline RakePointOutput rake_point(const ScenarioConfig& cfg, double snr_db, double tx_mag_db,
                                  std::uint64_t sub_seed) {
    const auto& rc = cfg.rake;
    const auto alphabet = SymbolAlphabet::by_name(cfg.modulation);
    const auto pn = pn_generate(rc.code_degree, default_primitive_poly(rc.code_degree), rc.code_seed);
    const rake::SpreadingCode code{pn, rc.chip_rate, rc.spreading_factor};

    std::mt19937_64 rng(sub_seed);
    const auto bits = random_bits(rc.data_symbols * static_cast<std::size_t>(alphabet.bits_per_symbol), rng);
    const auto data = modulate(bits, alphabet);
    const auto pilot = pilot_pattern(rc.pilot_symbols);

    const double amp = std::pow(10.0, tx_mag_db / 20.0);
    std::vector<cplx> frame;
    frame.reserve(pilot.size() + data.size());
    for (const auto& s : pilot) frame.push_back(amp * s);
    for (const auto& s : data) frame.push_back(amp * s);

    auto taps = resolve_taps(cfg);
    auto rx = channel::apply_channel(rake::spread(frame, code), taps);
    rx = add_awgn(rx, snr_db, rng);

    rake::RakeConfig rcfg;
    rcfg.n_fingers = rc.n_fingers;
    rcfg.max_delay_chips = rc.max_delay_chips;
    rcfg.threshold_factor = rc.threshold_factor;
    rcfg.use_mmse_fingers = rc.use_mmse;
    if (rc.use_mmse) rcfg.mmse_noise_var = std::pow(10.0, -snr_db / 10.0);

    const std::size_t n_symbols = frame.size();
    RakePointOutput out;
    out.tx_amplitude = amp;
    out.full = rake::rake_receive(rx, code, pilot, n_symbols, rcfg);
    auto rcfg1 = rcfg;
    rcfg1.n_fingers = 1;
    out.single = rake::rake_receive(rx, code, pilot, n_symbols, rcfg1);

    out.point.snr_db = snr_db;
    if (out.full.locked) {
        std::vector<cplx> rx_data(out.full.symbols.begin() + static_cast<std::ptrdiff_t>(pilot.size()),
                                  out.full.symbols.end());
        // undo the tx scaling before slicing/EVM
        for (auto& s : rx_data) s /= amp;
        out.point.ber = measure_ber(bits, demodulate(rx_data, alphabet));
        out.point.evm_after_db = measure_evm_db(data, rx_data);
        out.point.effective_snr_db =
            10.0 * std::log10(std::max(out.full.combined.combined_snr_linear, 1e-30));
    } else {
        out.point.ber = 0.5;
        out.point.evm_after_db = 0.0;
        out.point.effective_snr_db = -std::numeric_limits<double>::infinity();
    }
    out.point.evm_before_db = out.point.evm_after_db;  // no pre-equalization constellation here
    return out;
}

inline std::vector<PointResult> run_rake(const ScenarioConfig& cfg, const fs::path& dir,
                                         RunReport& rep) {
    std::vector<PointResult> points;
    if (!cfg.rake.tx_mag_db.empty()) {
        // finger-table mode: sweep tx magnitude at a fixed SNR
        CsvWriter table(dir / "rake_table.csv",
                        "tx_mag_db,fing1_db,fing2_db,fing3_db,fing4_db,total_db");
        double worst_dev = 0.0;
        for (std::size_t i = 0; i < cfg.rake.tx_mag_db.size(); ++i) {
            const double mag = cfg.rake.tx_mag_db[i];
            auto out = rake_point(cfg, cfg.rake.table_snr_db, mag, detail::mix_seed(cfg.seed, i));
            std::vector<double> row{mag};
            double total = 0.0;
            for (std::size_t f = 0; f < 4; ++f) {
                const double v = f < out.full.fingers.size() ? out.full.fingers[f].magnitude_db
                                                             : -std::numeric_limits<double>::infinity();
                row.push_back(v);
                total += v;
                worst_dev = std::max(worst_dev, std::abs(v - mag));
            }
            row.push_back(total);
            table.row(row);
        }
        rep.files.push_back("rake_table.csv");
        rep.metrics["max_finger_deviation_db"] = worst_dev;
    }
    if (!cfg.snr_db.empty()) {
        CsvWriter ber(dir / "ber.csv", "snr_db,ber,ber_single_finger,evm_db,effective_snr_db");
        for (std::size_t i = 0; i < cfg.snr_db.size(); ++i) {
            auto out = rake_point(cfg, cfg.snr_db[i], 0.0, detail::mix_seed(cfg.seed, 1000 + i));
            double ber1 = 0.5;
            if (out.single.locked) {
                std::vector<cplx> d(out.single.symbols.begin() +
                                        static_cast<std::ptrdiff_t>(cfg.rake.pilot_symbols),
                                    out.single.symbols.end());
                // recompute single-finger BER against the same payload
                std::mt19937_64 rng(detail::mix_seed(cfg.seed, 1000 + i));
                const auto alphabet = SymbolAlphabet::by_name(cfg.modulation);
                const auto bits = random_bits(
                    cfg.rake.data_symbols * static_cast<std::size_t>(alphabet.bits_per_symbol), rng);
                ber1 = measure_ber(bits, demodulate(d, alphabet));
            }
            ber.row({out.point.snr_db, out.point.ber, ber1, out.point.evm_after_db,
                     out.point.effective_snr_db});
            points.push_back(out.point);
            if (i + 1 == cfg.snr_db.size()) {
                CsvWriter fing(dir / "fingers.csv", "finger_id,delay_chips,magnitude_db,snr_linear");
                for (std::size_t f = 0; f < out.full.fingers.size(); ++f)
                    fing.row({static_cast<double>(out.full.fingers[f].finger_id),
                              static_cast<double>(out.full.fingers[f].delay_chips),
                              out.full.fingers[f].magnitude_db,
                              f < out.full.combined.finger_snr_linear.size()
                                  ? out.full.combined.finger_snr_linear[f]
                                  : 0.0});
                rep.files.push_back("fingers.csv");
                rep.metrics["combined_snr_db"] = out.point.effective_snr_db;
                rep.metrics["single_finger_snr_db"] =
                    10.0 * std::log10(std::max(out.single.combined.combined_snr_linear, 1e-30));
            }
        }
        rep.files.push_back("ber.csv");
        rep.metrics["ber_max_snr"] = points.back().ber;
    }
    return points;
}

// --------------------------------------------------------------- adapteq --

inline PointResult adapteq_point(const ScenarioConfig& cfg, double snr_db, std::uint64_t sub_seed,
                                 std::vector<double>* mse_out = nullptr,
                                 std::vector<cplx>* taps_out = nullptr,
                                 std::vector<cplx>* soft_out = nullptr,
                                 std::vector<cplx>* ref_out = nullptr) {
    const auto& ec = cfg.eq;
    const auto alphabet = SymbolAlphabet::by_name(cfg.modulation);
    std::mt19937_64 rng(sub_seed);
    const auto bps = static_cast<std::size_t>(alphabet.bits_per_symbol);
    const auto train_bits = random_bits(ec.training_symbols * bps, rng);
    const auto data_bits = random_bits(ec.data_symbols * bps, rng);
    const auto training = modulate(train_bits, alphabet);
    const auto data = modulate(data_bits, alphabet);

    std::vector<cplx> tx = training;
    tx.insert(tx.end(), data.begin(), data.end());
    ComplexSignal sig(tx, ec.symbol_rate);
    auto taps = resolve_taps(cfg);
    auto rx = add_awgn(channel::apply_channel(sig, taps), snr_db, rng);

    auto st = adapteq::train(rx, training, ec.length, ec.mu, ec.reference_delay);
    const std::size_t dd_start = ec.training_symbols + ec.reference_delay;
    auto dd = adapteq::equalize_dd(rx, st, alphabet, dd_start);

    PointResult p;
    p.snr_db = snr_db;
    const std::size_t n = std::min(ec.data_symbols, dd.symbols.size());
    std::vector<cplx> soft(dd.soft.begin(), dd.soft.begin() + static_cast<std::ptrdiff_t>(n));
    std::vector<cplx> hard(dd.symbols.begin(), dd.symbols.begin() + static_cast<std::ptrdiff_t>(n));
    std::vector<cplx> ref(data.begin(), data.begin() + static_cast<std::ptrdiff_t>(n));
    std::vector<int> ref_bits(data_bits.begin(),
                              data_bits.begin() + static_cast<std::ptrdiff_t>(n * bps));
    p.ber = measure_ber(ref_bits, demodulate(hard, alphabet));
    p.evm_after_db = measure_evm_db(ref, soft);
    // "before": the raw channel output sample against the symbol sent then
    std::vector<cplx> raw(rx.samples.begin() + static_cast<std::ptrdiff_t>(ec.training_symbols),
                          rx.samples.begin() + static_cast<std::ptrdiff_t>(ec.training_symbols + n));
    p.evm_before_db = measure_evm_db(ref, raw);
    p.effective_snr_db = -p.evm_after_db;
    if (mse_out) *mse_out = dd.state.mse_history;
    if (taps_out) *taps_out = dd.state.taps;
    if (soft_out) *soft_out = soft;
    if (ref_out) *ref_out = raw;
    return p;
}

inline std::vector<PointResult> run_adapteq(const ScenarioConfig& cfg, const fs::path& dir,
                                            RunReport& rep) {
    std::vector<PointResult> points;
    CsvWriter ber(dir / "ber.csv", "snr_db,ber,evm_before_db,evm_after_db");
    for (std::size_t i = 0; i < cfg.snr_db.size(); ++i) {
        const bool last = i + 1 == cfg.snr_db.size();
        std::vector<double> mse;
        std::vector<cplx> taps, soft, raw;
        auto p = adapteq_point(cfg, cfg.snr_db[i], detail::mix_seed(cfg.seed, i), last ? &mse : nullptr,
                               last ? &taps : nullptr, last ? &soft : nullptr, last ? &raw : nullptr);
        ber.row({p.snr_db, p.ber, p.evm_before_db, p.evm_after_db});
        points.push_back(p);
        if (last) {
            CsvWriter mcsv(dir / "mse.csv", "step,mse");
            for (std::size_t s = 0; s < mse.size(); ++s) mcsv.row({static_cast<double>(s), mse[s]});
            rep.files.push_back("mse.csv");
            CsvWriter tcsv(dir / "taps.csv", "index,re,im");
            for (std::size_t t = 0; t < taps.size(); ++t)
                tcsv.row({static_cast<double>(t), taps[t].real(), taps[t].imag()});
            rep.files.push_back("taps.csv");
            CsvWriter crx(dir / "constellation_rx.csv", "symbol_index,carrier,re,im");
            CsvWriter ceq(dir / "constellation_eq.csv", "symbol_index,carrier,re,im");
            const std::size_t n_dump = std::min<std::size_t>(2000, soft.size());
            for (std::size_t s = 0; s < n_dump; ++s) {
                crx.row({static_cast<double>(s), 0.0, raw[s].real(), raw[s].imag()});
                ceq.row({static_cast<double>(s), 0.0, soft[s].real(), soft[s].imag()});
            }
            rep.files.push_back("constellation_rx.csv");
            rep.files.push_back("constellation_eq.csv");
            rep.metrics["evm_before_db"] = p.evm_before_db;
            rep.metrics["evm_after_db"] = p.evm_after_db;
            rep.metrics["evm_improvement_db"] = p.evm_before_db - p.evm_after_db;
        }
    }
    rep.files.push_back("ber.csv");
    return points;
}

// ------------------------------------------------------------------ ofdm --

inline ofdm::OfdmParams ofdm_params_of(const OfdmCfg& oc) {
    ofdm::OfdmParams p;
    p.n_fft = oc.n_fft;
    p.cp_len = oc.cp_len;
    p.used_carriers = ofdm::contiguous_carriers(oc.used_carriers);
    p.sample_rate = oc.sample_rate;
    return p;
}

inline PointResult ofdm_point(const ScenarioConfig& cfg, double snr_db, double doppler_hz,
                              std::uint64_t sub_seed, std::vector<cplx>* rx_dump = nullptr,
                              std::vector<cplx>* eq_dump = nullptr) {
    const auto& oc = cfg.ofdm;
    const auto params = ofdm_params_of(oc);
    const auto alphabet = SymbolAlphabet::by_name(cfg.modulation);
    const std::size_t nc = params.used_carriers.size();
    const auto bps = static_cast<std::size_t>(alphabet.bits_per_symbol);

    std::mt19937_64 rng(sub_seed);
    const auto bits = random_bits(oc.data_symbols * nc * bps, rng);
    const auto data = modulate(bits, alphabet);
    const auto pattern = detail_run::ofdm_preamble_pattern(nc);

    std::vector<cplx> frame;
    frame.reserve((oc.training_symbols + oc.data_symbols) * nc);
    for (std::size_t s = 0; s < oc.training_symbols; ++s)
        frame.insert(frame.end(), pattern.begin(), pattern.end());
    frame.insert(frame.end(), data.begin(), data.end());

    auto sig = ofdm::ofdm_modulate(frame, params);
    auto taps = resolve_taps(cfg);
    auto rx = channel::apply_channel(sig, taps);
    if (doppler_hz != 0.0) rx = ofdm::apply_doppler_offset(rx, doppler_hz);
    rx = add_awgn(rx, snr_db, rng);

    const auto carriers = ofdm::ofdm_demodulate(rx, params);
    const std::size_t train_n = oc.training_symbols * nc;

    ofdm::ChannelEstimate est;
    if (oc.estimator == "lms") {
        std::vector<cplx> ref;
        for (std::size_t s = 0; s < oc.training_symbols; ++s)
            ref.insert(ref.end(), pattern.begin(), pattern.end());
        est = ofdm::estimate_channel_lms(
            std::vector<cplx>(carriers.begin(), carriers.begin() + static_cast<std::ptrdiff_t>(train_n)),
            ref, params, oc.lms_mu);
    } else {
        // LS averaged over the training symbols
        est.source = ofdm::EstimateSource::least_squares_preamble;
        est.h.assign(nc, cplx(0, 0));
        for (std::size_t s = 0; s < oc.training_symbols; ++s)
            for (std::size_t c = 0; c < nc; ++c) est.h[c] += carriers[s * nc + c] / pattern[c];
        for (auto& h : est.h) h /= static_cast<double>(oc.training_symbols);
    }

    const std::size_t avail = carriers.size() > train_n ? carriers.size() - train_n : 0;
    const std::size_t n_data = std::min(oc.data_symbols * nc, avail);
    std::vector<cplx> rx_data(carriers.begin() + static_cast<std::ptrdiff_t>(train_n),
                              carriers.begin() + static_cast<std::ptrdiff_t>(train_n + n_data));
    std::vector<cplx> ref(data.begin(), data.begin() + static_cast<std::ptrdiff_t>(n_data));
    auto eq = ofdm::one_tap_equalize(rx_data, est);

    PointResult p;
    p.snr_db = snr_db;
    p.evm_before_db = measure_evm_db(ref, rx_data);
    p.evm_after_db = ofdm::evm_db_excluding_erasures(ref, eq);
    std::vector<int> ref_bits(bits.begin(), bits.begin() + static_cast<std::ptrdiff_t>(n_data * bps));
    p.ber = measure_ber(ref_bits, demodulate(eq.symbols, alphabet));
    p.effective_snr_db = -p.evm_after_db;
    if (rx_dump) *rx_dump = rx_data;
    if (eq_dump) *eq_dump = eq.symbols;
    return p;
}

inline std::vector<PointResult> run_ofdm(const ScenarioConfig& cfg, const fs::path& dir,
                                         RunReport& rep) {
    std::vector<PointResult> points;
    CsvWriter ber(dir / "ber.csv", "snr_db,ber,evm_before_db,evm_after_db");
    const double dop = cfg.doppler_enabled ? cfg.doppler_hz : 0.0;
    std::unique_ptr<CsvWriter> dcsv;
    if (cfg.doppler_enabled)
        dcsv = std::make_unique<CsvWriter>(dir / "doppler.csv",
                                           "snr_db,evm_doppler_db,evm_no_doppler_db");
    for (std::size_t i = 0; i < cfg.snr_db.size(); ++i) {
        const bool last = i + 1 == cfg.snr_db.size();
        std::vector<cplx> rx_dump, eq_dump;
        auto p = ofdm_point(cfg, cfg.snr_db[i], dop, detail::mix_seed(cfg.seed, i),
                            last ? &rx_dump : nullptr, last ? &eq_dump : nullptr);
        ber.row({p.snr_db, p.ber, p.evm_before_db, p.evm_after_db});
        if (cfg.doppler_enabled) {
            // paired run with the same sub-seed and no Doppler
            auto p0 = ofdm_point(cfg, cfg.snr_db[i], 0.0, detail::mix_seed(cfg.seed, i));
            dcsv->row({p.snr_db, p.evm_after_db, p0.evm_after_db});
        }
        points.push_back(p);
        if (last) {
            const std::size_t nc = cfg.ofdm.used_carriers;
            CsvWriter crx(dir / "constellation_rx.csv", "symbol_index,carrier,re,im");
            CsvWriter ceq(dir / "constellation_eq.csv", "symbol_index,carrier,re,im");
            const std::size_t n_dump = std::min<std::size_t>(8 * nc, rx_dump.size());
            for (std::size_t k = 0; k < n_dump; ++k) {
                const double si = static_cast<double>(k / nc);
                const double ci = static_cast<double>(k % nc);
                crx.row({si, ci, rx_dump[k].real(), rx_dump[k].imag()});
                ceq.row({si, ci, eq_dump[k].real(), eq_dump[k].imag()});
            }
            rep.files.push_back("constellation_rx.csv");
            rep.files.push_back("constellation_eq.csv");
            rep.metrics["evm_before_db"] = p.evm_before_db;
            rep.metrics["evm_after_db"] = p.evm_after_db;
            rep.metrics["evm_improvement_db"] = p.evm_before_db - p.evm_after_db;
        }
    }
    rep.files.push_back("ber.csv");
    if (cfg.doppler_enabled) rep.files.push_back("doppler.csv");
    return points;
}

}  // namespace detail_run

inline RunReport run_scenario(const ScenarioConfig& cfg, const fs::path& out_root) {
    const fs::path dir = out_root / cfg.name;
    fs::create_directories(dir);

    RunReport rep;
    rep.name = cfg.name;
    rep.seed = cfg.seed;
    rep.config_hash_hex = detail_run::hash_hex(config_hash(cfg.raw));

    std::string error;
    try {
        if (cfg.system == "channel_analysis") {
            detail_run::run_channel_analysis(cfg, dir, rep);
        } else if (cfg.system == "wcdma_rake") {
            detail_run::run_rake(cfg, dir, rep);
        } else if (cfg.system == "wifi_adapteq") {
            detail_run::run_adapteq(cfg, dir, rep);
        } else if (cfg.system == "wimax_ofdm") {
            detail_run::run_ofdm(cfg, dir, rep);
        } else {
            throw ValidationError("unknown system: " + cfg.system);
        }
    } catch (const ValidationError&) {
        throw;
    } catch (const std::exception& e) {
        error = e.what();  // partial manifest plus the error record
    }

    json manifest;
    manifest["config_hash"] = rep.config_hash_hex;
    manifest["seed"] = rep.seed;
    manifest["files"] = rep.files;
    json metrics = json::object();
    for (const auto& [k, v] : rep.metrics) metrics[k] = v;
    manifest["metrics"] = metrics;
    if (!error.empty()) manifest["error"] = error;
    std::ofstream mf(dir / "manifest.json");
    mf << manifest.dump(2) << "\n";
    rep.files.push_back("manifest.json");
    if (!error.empty()) throw std::runtime_error("scenario '" + cfg.name + "' failed: " + error);
    return rep;
}

// All configs must share the channel, the seed and the SNR grid; emits one
// CSV of BER/EVM per system per SNR point plus an effective-SNR summary.
inline RunReport compare_systems(const std::vector<ScenarioConfig>& configs,
                                 const fs::path& out_root) {
    if (configs.empty()) throw ValidationError("compare: no configs");
    for (const auto& c : configs) {
        if (!c.taps) throw ValidationError("compare: every config needs an explicit TapSet");
        if (c.seed != configs.front().seed) throw ValidationError("compare: seeds differ");
        if (c.snr_db != configs.front().snr_db) throw ValidationError("compare: SNR grids differ");
        if (c.taps->taps.size() != configs.front().taps->taps.size())
            throw ValidationError("compare: channels differ");
        for (std::size_t t = 0; t < c.taps->taps.size(); ++t) {
            const auto& a = c.taps->taps[t];
            const auto& b = configs.front().taps->taps[t];
            if (a.delay != b.delay || a.gain != b.gain || a.doppler != b.doppler)
                throw ValidationError("compare: channels differ");
        }
    }
    const fs::path dir = out_root / "comparison";
    fs::create_directories(dir);

    RunReport rep;
    rep.name = "comparison";
    rep.seed = configs.front().seed;
    json all = json::array();
    for (const auto& c : configs) all.push_back(c.raw);
    rep.config_hash_hex = detail_run::hash_hex(config_hash(all));

    CsvWriter cmp(dir / "comparison.csv", "system,snr_db,ber,evm_db,effective_snr_db");
    for (const auto& c : configs) {
        std::vector<PointResult> pts;
        const fs::path subdir = dir / c.name;
        fs::create_directories(subdir);
        RunReport sub;
        if (c.system == "wcdma_rake") pts = detail_run::run_rake(c, subdir, sub);
        else if (c.system == "wifi_adapteq") pts = detail_run::run_adapteq(c, subdir, sub);
        else if (c.system == "wimax_ofdm") pts = detail_run::run_ofdm(c, subdir, sub);
        else throw ValidationError("compare: unsupported system " + c.system);
        double eff_mean = 0.0;
        for (const auto& p : pts) {
            cmp.row(c.system, {p.snr_db, p.ber, p.evm_after_db, p.effective_snr_db});
            eff_mean += p.effective_snr_db;
        }
        if (!pts.empty()) eff_mean /= static_cast<double>(pts.size());
        rep.metrics["effective_snr_db_mean." + c.system] = eff_mean;
    }
    rep.files.push_back("comparison.csv");

    json manifest;
    manifest["config_hash"] = rep.config_hash_hex;
    manifest["seed"] = rep.seed;
    manifest["files"] = rep.files;
    json metrics = json::object();
    for (const auto& [k, v] : rep.metrics) metrics[k] = v;
    manifest["metrics"] = metrics;
    json systems = json::array();
    for (const auto& c : configs) systems.push_back(c.system);
    manifest["systems"] = systems;
    std::ofstream mf(dir / "manifest.json");
    mf << manifest.dump(2) << "\n";
    return rep;
}

}  // namespace airlink::workbench
