#pragma once

// Named, seeded scenario presets, one per reproduced exhibit. Each emits a
// plain JSON config; `presets emit <name>` writes it to disk unchanged.

#include <cmath>
#include <string>
#include <vector>

#include "airlink/workbench/config.hpp"

namespace airlink::workbench {

inline json base_config(const std::string& name, const std::string& system, std::uint64_t seed) {
    json j;
    j["schema_version"] = schema_version;
    j["name"] = name;
    j["system"] = system;
    j["seed"] = seed;
    return j;
}

inline json tap(double delay_s, double re, double im, double doppler_hz = 0.0) {
    return {{"delay_s", delay_s}, {"gain", {re, im}}, {"doppler_hz", doppler_hz}};
}

// four equal-power chip-spaced paths at 3.84 Mcps, phases spread over the circle
inline json four_path_taps(double chip_rate = 3.84e6) {
    const double tc = 1.0 / chip_rate;
    return json::array({tap(0.0, 1.0, 0.0),
                        tap(2.0 * tc, std::cos(0.7), std::sin(0.7)),
                        tap(5.0 * tc, std::cos(1.9), std::sin(1.9)),
                        tap(9.0 * tc, std::cos(3.1), std::sin(3.1))});
}

inline json preset_config(const std::string& name) {
    if (name == "fig2_ir_ideal") {
        json j = base_config(name, "channel_analysis", 2);
        j["taps"] = json::array({tap(0.0, 1.0, 0.0)});
        j["analysis"] = {{"mode", "ir"}, {"bandwidth_hz", 5e6}, {"fs_hz", 40e6}, {"span_s", 2e-6}};
        return j;
    }
    if (name == "fig3_ir_broadened") {
        json j = base_config(name, "channel_analysis", 3);
        j["analysis"] = {{"mode", "broadening_sweep"}, {"bandwidth_hz", 5e6}, {"fs_hz", 40e6},
                         {"span_s", 2e-6},  {"sep_min_s", 5e-9},  {"sep_max_s", 100e-9},
                         {"sweep_steps", 20}, {"target_broadening_pct", 5.90}};
        return j;
    }
    if (name == "table1") {
        json j = base_config(name, "wcdma_rake", 1);
        j["modulation"] = "QPSK";
        j["taps"] = four_path_taps();
        j["rake"] = {{"chip_rate", 3.84e6}, {"spreading_factor", 64}, {"code_degree", 7},
                     {"n_fingers", 4},      {"max_delay_chips", 16},  {"pilot_symbols", 16},
                     {"data_symbols", 256}, {"table_snr_db", 25.0},
                     {"tx_mag_db", {1.0, 3.0, 6.0, 7.0, 10.0, 15.0, 20.0, 25.0}}};
        return j;
    }
    if (name == "fig8_scatterer") {
        json j = base_config(name, "channel_analysis", 8);
        j["scene"] = {{"tx", {0.0, 0.0}},
                      {"rx", {300.0, 0.0}},
                      {"scatterers", json::array({{{"pos", {150.0, 80.0}}, {"reflectivity", {0.7, 0.0}}}})},
                      {"carrier_freq_hz", 2.4e9}};
        j["analysis"] = {{"mode", "ir"}, {"bandwidth_hz", 5e6}, {"fs_hz", 40e6}, {"span_s", 3e-6}};
        return j;
    }
    if (name == "fig9_scatterer_sweep") {
        json j = base_config(name, "channel_analysis", 9);
        j["scene"] = {{"tx", {0.0, 0.0}},
                      {"rx", {300.0, 0.0}},
                      {"scatterers", json::array({{{"pos", {150.0, 10.0}}, {"reflectivity", {0.7, 0.0}}}})},
                      {"carrier_freq_hz", 2.4e9}};
        j["analysis"] = {{"mode", "scatterer_sweep"}, {"offset_min_m", 1.0}, {"offset_max_m", 200.0},
                         {"sweep_steps", 50}};
        return j;
    }
    if (name == "fig11_wimax_eq") {
        json j = base_config(name, "wimax_ofdm", 11);
        j["modulation"] = "QPSK";
        j["snr_db"] = {15.0, 20.0, 25.0, 30.0};
        // delays inside the 32-sample CP at 8 MHz (4 us)
        j["taps"] = json::array({tap(0.0, 1.0, 0.0), tap(1.0e-6, 0.45, 0.3), tap(2.5e-6, -0.2, 0.25)});
        j["ofdm"] = {{"preset", "wimax"}, {"training_symbols", 16}, {"data_symbols", 40},
                     {"estimator", "lms"}, {"lms_mu", 0.4}};
        return j;
    }
    if (name == "fig12_doppler") {
        json j = base_config(name, "wimax_ofdm", 12);
        j["modulation"] = "QPSK";
        j["snr_db"] = {10.0, 15.0, 20.0, 25.0, 30.0};
        j["taps"] = json::array({tap(0.0, 1.0, 0.0), tap(1.0e-6, 0.45, 0.3)});
        // 125 km/h at 2.4 GHz: f_d = v*f_c/c = 277.8 Hz
        j["doppler"] = {{"enabled", true}, {"hz", 277.8}};
        j["ofdm"] = {{"preset", "wimax"}, {"training_symbols", 4}, {"data_symbols", 40}};
        return j;
    }
    if (name == "fig13_constellation") {
        json j = base_config(name, "wifi_adapteq", 13);
        j["modulation"] = "QPSK";
        j["snr_db"] = {25.0, 35.0};
        j["taps"] = json::array({tap(0.0, 1.0, 0.0), tap(1.0e-6, 0.45, 0.28), tap(2.0e-6, -0.25, 0.15)});
        j["equalizer"] = {{"length", 21}, {"mu", 0.001}, {"reference_delay", 10},
                          {"training_symbols", 20000}, {"data_symbols", 10000}, {"symbol_rate", 1e6}};
        return j;
    }
    if (name == "fig14_cell_edge") {
        // cell boundary: a strong cluster plus a weak delayed copy; the RAKE
        // picks the weak copy up as extra multipath fingers
        json j = base_config(name, "wcdma_rake", 14);
        j["modulation"] = "QPSK";
        j["snr_db"] = {5.0, 10.0};
        const double tc = 1.0 / 3.84e6;
        j["taps"] = json::array({tap(0.0, 1.0, 0.0), tap(2.0 * tc, 0.8 * std::cos(1.1), 0.8 * std::sin(1.1)),
                                 tap(10.0 * tc, 0.4, 0.0), tap(12.0 * tc, 0.3 * std::cos(2.3), 0.3 * std::sin(2.3))});
        j["rake"] = {{"chip_rate", 3.84e6}, {"spreading_factor", 16}, {"code_degree", 5},
                     {"n_fingers", 4}, {"max_delay_chips", 20}, {"pilot_symbols", 32},
                     {"data_symbols", 4000}};
        return j;
    }
    throw ValidationError("unknown preset: " + name);
}

inline std::vector<std::string> preset_names() {
    return {"fig2_ir_ideal",  "fig3_ir_broadened", "table1",
            "fig8_scatterer", "fig9_scatterer_sweep", "fig11_wimax_eq",
            "fig12_doppler",  "fig13_constellation", "fig14_cell_edge"};
}

}  // namespace airlink::workbench
