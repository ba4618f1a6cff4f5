#pragma once

// Declarative scenario configuration: JSON in, validated structs out.
// A scenario names one system chain (or a channel analysis), a channel
// (scatterer scene xor explicit taps), the SNR grid and a mandatory seed.

#include <cstdint>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "airlink/channel.hpp"
#include "airlink/sigcore.hpp"

namespace airlink::workbench {

using json = nlohmann::json;

inline constexpr int schema_version = 1;

struct ValidationError : std::runtime_error {
    explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct RakeCfg {
    double chip_rate = 3.84e6;
    std::size_t spreading_factor = 16;
    int code_degree = 6;
    std::uint32_t code_seed = 1;
    std::size_t n_fingers = 4;
    std::size_t max_delay_chips = 32;
    double threshold_factor = 0.5;
    std::size_t pilot_symbols = 16;
    std::size_t data_symbols = 4000;
    std::vector<double> tx_mag_db;  // non-empty selects finger-table mode
    double table_snr_db = 25.0;
    bool use_mmse = false;
};

struct OfdmCfg {
    std::string preset = "wifi";  // wifi | wimax | custom
    std::size_t n_fft = 64;
    std::size_t cp_len = 16;
    std::size_t used_carriers = 52;
    double sample_rate = 20e6;
    std::size_t training_symbols = 4;
    std::size_t data_symbols = 40;
    std::string estimator = "ls";  // ls | lms
    double lms_mu = 0.2;
};

struct EqCfg {
    std::size_t length = 11;
    double mu = 0.01;
    std::size_t reference_delay = 5;
    std::size_t training_symbols = 2000;
    std::size_t data_symbols = 10000;
    double symbol_rate = 1e6;
};

struct AnalysisCfg {
    std::string mode = "ir";  // ir | broadening_sweep | scatterer_sweep
    double bandwidth = 5e6;
    double fs = 40e6;
    double span = 2e-6;
    // broadening_sweep
    double sep_min = 5e-9;
    double sep_max = 100e-9;
    std::size_t sweep_steps = 20;
    double target_broadening_pct = 5.90;
    // scatterer_sweep: perpendicular offset of the first scatterer from the
    // LOS midpoint
    double offset_min = 1.0;
    double offset_max = 200.0;
};

struct ScenarioConfig {
    std::string name = "scenario";
    std::string system;  // wcdma_rake | wifi_adapteq | wimax_ofdm | channel_analysis
    std::uint64_t seed = 0;
    bool seed_set = false;
    std::string modulation = "QPSK";
    std::vector<double> snr_db;
    std::optional<channel::ScattererScene> scene;
    std::optional<channel::TapSet> taps;
    bool doppler_enabled = false;
    double doppler_hz = 0.0;
    RakeCfg rake;
    OfdmCfg ofdm;
    EqCfg eq;
    AnalysisCfg analysis;
    json raw;  // canonical source, used for hashing and re-emission
};

inline channel::ScattererScene scene_from_json(const json& j) {
    channel::ScattererScene s;
    s.tx_pos = {j.at("tx").at(0).get<double>(), j.at("tx").at(1).get<double>()};
    s.rx_pos = {j.at("rx").at(0).get<double>(), j.at("rx").at(1).get<double>()};
    if (j.contains("scatterers"))
        for (const auto& sc : j.at("scatterers")) {
            channel::Scatterer out;
            out.pos = {sc.at("pos").at(0).get<double>(), sc.at("pos").at(1).get<double>()};
            if (sc.contains("reflectivity"))
                out.reflectivity = cplx(sc.at("reflectivity").at(0).get<double>(),
                                        sc.at("reflectivity").at(1).get<double>());
            s.scatterers.push_back(out);
        }
    s.los_blocked = j.value("los_blocked", false);
    s.rx_velocity = j.value("rx_velocity_mps", 0.0);
    s.carrier_freq = j.value("carrier_freq_hz", 0.0);
    s.path_loss_exponent = j.value("path_loss_exponent", 1.0);
    return s;
}

inline json scene_to_json(const channel::ScattererScene& s) {
    json j;
    j["tx"] = {s.tx_pos.x, s.tx_pos.y};
    j["rx"] = {s.rx_pos.x, s.rx_pos.y};
    json scs = json::array();
    for (const auto& sc : s.scatterers)
        scs.push_back({{"pos", {sc.pos.x, sc.pos.y}},
                       {"reflectivity", {sc.reflectivity.real(), sc.reflectivity.imag()}}});
    j["scatterers"] = scs;
    j["los_blocked"] = s.los_blocked;
    j["rx_velocity_mps"] = s.rx_velocity;
    j["carrier_freq_hz"] = s.carrier_freq;
    j["path_loss_exponent"] = s.path_loss_exponent;
    return j;
}

inline channel::TapSet taps_from_json(const json& j) {
    channel::TapSet ts;
    for (const auto& t : j) {
        channel::Tap tap;
        tap.delay = t.at("delay_s").get<double>();
        tap.gain = cplx(t.at("gain").at(0).get<double>(), t.at("gain").at(1).get<double>());
        tap.doppler = t.value("doppler_hz", 0.0);
        ts.taps.push_back(tap);
    }
    ts.sort_by_delay();
    return ts;
}

inline json taps_to_json(const channel::TapSet& ts) {
    json j = json::array();
    for (const auto& t : ts.taps)
        j.push_back({{"delay_s", t.delay},
                     {"gain", {t.gain.real(), t.gain.imag()}},
                     {"doppler_hz", t.doppler}});
    return j;
}

inline ScenarioConfig parse_config(const json& j) {
    std::vector<std::string> errs;
    ScenarioConfig c;
    c.raw = j;

    if (j.value("schema_version", 0) != schema_version)
        errs.push_back("schema_version: expected " + std::to_string(schema_version));
    c.name = j.value("name", std::string("scenario"));
    c.system = j.value("system", std::string());
    if (c.system != "wcdma_rake" && c.system != "wifi_adapteq" && c.system != "wimax_ofdm" &&
        c.system != "channel_analysis")
        errs.push_back("system: must be one of wcdma_rake|wifi_adapteq|wimax_ofdm|channel_analysis");
    if (j.contains("seed")) {
        c.seed = j.at("seed").get<std::uint64_t>();
        c.seed_set = true;
    } else {
        errs.push_back("seed: mandatory, no implicit entropy");
    }
    c.modulation = j.value("modulation", std::string("QPSK"));
    try {
        SymbolAlphabet::by_name(c.modulation);
    } catch (const std::exception&) {
        errs.push_back("modulation: unknown alphabet " + c.modulation);
    }
    if (j.contains("snr_db")) c.snr_db = j.at("snr_db").get<std::vector<double>>();

    const bool has_scene = j.contains("scene");
    const bool has_taps = j.contains("taps");
    if (has_scene == has_taps && c.system != "channel_analysis")
        errs.push_back("channel: exactly one of scene / taps must be present");
    if (has_scene && has_taps) errs.push_back("channel: scene and taps are mutually exclusive");
    try {
        if (has_scene) c.scene = scene_from_json(j.at("scene"));
        if (has_taps) c.taps = taps_from_json(j.at("taps"));
    } catch (const std::exception& e) {
        errs.push_back(std::string("channel: ") + e.what());
    }
    if (c.taps) {
        for (const auto& t : c.taps->taps)
            if (t.delay < 0.0) errs.push_back("taps: negative delay");
        if (c.taps->taps.empty()) errs.push_back("taps: at least one tap required");
    }

    if (j.contains("doppler")) {
        c.doppler_enabled = j.at("doppler").value("enabled", false);
        c.doppler_hz = j.at("doppler").value("hz", 0.0);
    }

    if (j.contains("rake")) {
        const auto& r = j.at("rake");
        c.rake.chip_rate = r.value("chip_rate", c.rake.chip_rate);
        c.rake.spreading_factor = r.value("spreading_factor", c.rake.spreading_factor);
        c.rake.code_degree = r.value("code_degree", c.rake.code_degree);
        c.rake.code_seed = r.value("code_seed", c.rake.code_seed);
        c.rake.n_fingers = r.value("n_fingers", c.rake.n_fingers);
        c.rake.max_delay_chips = r.value("max_delay_chips", c.rake.max_delay_chips);
        c.rake.threshold_factor = r.value("threshold_factor", c.rake.threshold_factor);
        c.rake.pilot_symbols = r.value("pilot_symbols", c.rake.pilot_symbols);
        c.rake.data_symbols = r.value("data_symbols", c.rake.data_symbols);
        if (r.contains("tx_mag_db")) c.rake.tx_mag_db = r.at("tx_mag_db").get<std::vector<double>>();
        c.rake.table_snr_db = r.value("table_snr_db", c.rake.table_snr_db);
        c.rake.use_mmse = r.value("use_mmse", c.rake.use_mmse);
        if (c.rake.spreading_factor > ((1u << c.rake.code_degree) - 1u))
            errs.push_back("rake: spreading_factor exceeds code period");
    }
    if (j.contains("ofdm")) {
        const auto& o = j.at("ofdm");
        c.ofdm.preset = o.value("preset", c.ofdm.preset);
        if (c.ofdm.preset == "wifi") {
            c.ofdm.n_fft = 64; c.ofdm.cp_len = 16; c.ofdm.used_carriers = 52; c.ofdm.sample_rate = 20e6;
        } else if (c.ofdm.preset == "wimax") {
            c.ofdm.n_fft = 256; c.ofdm.cp_len = 32; c.ofdm.used_carriers = 200; c.ofdm.sample_rate = 8e6;
        } else if (c.ofdm.preset != "custom") {
            errs.push_back("ofdm.preset: must be wifi|wimax|custom");
        }
        c.ofdm.n_fft = o.value("n_fft", c.ofdm.n_fft);
        c.ofdm.cp_len = o.value("cp_len", c.ofdm.cp_len);
        c.ofdm.used_carriers = o.value("used_carriers", c.ofdm.used_carriers);
        c.ofdm.sample_rate = o.value("sample_rate", c.ofdm.sample_rate);
        c.ofdm.training_symbols = o.value("training_symbols", c.ofdm.training_symbols);
        c.ofdm.data_symbols = o.value("data_symbols", c.ofdm.data_symbols);
        c.ofdm.estimator = o.value("estimator", c.ofdm.estimator);
        c.ofdm.lms_mu = o.value("lms_mu", c.ofdm.lms_mu);
        if (c.ofdm.estimator != "ls" && c.ofdm.estimator != "lms")
            errs.push_back("ofdm.estimator: must be ls|lms");
    }
    if (j.contains("equalizer")) {
        const auto& e = j.at("equalizer");
        c.eq.length = e.value("length", c.eq.length);
        c.eq.mu = e.value("mu", c.eq.mu);
        c.eq.reference_delay = e.value("reference_delay", c.eq.reference_delay);
        c.eq.training_symbols = e.value("training_symbols", c.eq.training_symbols);
        c.eq.data_symbols = e.value("data_symbols", c.eq.data_symbols);
        c.eq.symbol_rate = e.value("symbol_rate", c.eq.symbol_rate);
        if (c.eq.reference_delay >= c.eq.length)
            errs.push_back("equalizer: reference_delay must be < length");
        if (c.eq.training_symbols < 10 * c.eq.length)
            errs.push_back("equalizer: training_symbols below 10x filter length");
    }
    if (j.contains("analysis")) {
        const auto& a = j.at("analysis");
        c.analysis.mode = a.value("mode", c.analysis.mode);
        c.analysis.bandwidth = a.value("bandwidth_hz", c.analysis.bandwidth);
        c.analysis.fs = a.value("fs_hz", c.analysis.fs);
        c.analysis.span = a.value("span_s", c.analysis.span);
        c.analysis.sep_min = a.value("sep_min_s", c.analysis.sep_min);
        c.analysis.sep_max = a.value("sep_max_s", c.analysis.sep_max);
        c.analysis.sweep_steps = a.value("sweep_steps", c.analysis.sweep_steps);
        c.analysis.target_broadening_pct = a.value("target_broadening_pct", c.analysis.target_broadening_pct);
        c.analysis.offset_min = a.value("offset_min_m", c.analysis.offset_min);
        c.analysis.offset_max = a.value("offset_max_m", c.analysis.offset_max);
        if (c.analysis.mode != "ir" && c.analysis.mode != "broadening_sweep" &&
            c.analysis.mode != "scatterer_sweep")
            errs.push_back("analysis.mode: must be ir|broadening_sweep|scatterer_sweep");
        if (!(c.analysis.fs >= 4.0 * c.analysis.bandwidth))
            errs.push_back("analysis: fs must be >= 4x bandwidth");
    }

    if (c.system == "channel_analysis" && !c.scene && !c.taps &&
        c.analysis.mode != "broadening_sweep")
        errs.push_back("channel_analysis: scene or taps required unless mode is broadening_sweep");
    if ((c.system == "wcdma_rake" || c.system == "wifi_adapteq" || c.system == "wimax_ofdm") &&
        c.snr_db.empty() && c.rake.tx_mag_db.empty())
        errs.push_back("snr_db: at least one SNR point required");

    if (!errs.empty()) {
        std::ostringstream msg;
        msg << "invalid scenario config (" << errs.size() << " problem(s)):";
        for (const auto& e : errs) msg << "\n  - " << e;
        throw ValidationError(msg.str());
    }
    return c;
}

inline ScenarioConfig parse_config_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const std::exception& e) {
        throw ValidationError(std::string("config is not valid JSON: ") + e.what());
    }
    return parse_config(j);
}

// FNV-1a over the canonical (key-sorted) dump.
inline std::uint64_t config_hash(const json& j) {
    const std::string s = j.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : s) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace airlink::workbench
