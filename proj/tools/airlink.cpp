// airlink command-line workbench: run scenarios, emit presets, compare
// systems over a shared channel. Exit codes: 0 success, 1 validation/usage,
// 2 runtime failure.

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "airlink/workbench/presets.hpp"
#include "airlink/workbench/runner.hpp"

namespace wb = airlink::workbench;

namespace {

std::string default_out_root() {
    if (const char* env = std::getenv("AIRLINK_OUT")) return env;
    return "out";
}

wb::ScenarioConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw wb::ValidationError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return wb::parse_config_string(buf.str());
}

void print_report(const wb::RunReport& rep) {
    std::cout << "run " << rep.name << " (config " << rep.config_hash_hex << ", seed " << rep.seed
              << ")\n";
    for (const auto& [k, v] : rep.metrics) std::cout << "  " << k << " = " << v << "\n";
    for (const auto& f : rep.files) std::cout << "  wrote " << f << "\n";
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"airlink: link-level baseband simulation workbench"};
    app.require_subcommand(1);

    std::string out_root = default_out_root();
    std::string config_path;
    long long seed_override = -1;

    auto* run = app.add_subcommand("run", "run a scenario config end-to-end");
    run->add_option("config", config_path, "scenario JSON file")->required();
    run->add_option("--out", out_root, "output root directory");
    run->add_option("--seed", seed_override, "override the config seed");

    auto* presets = app.add_subcommand("presets", "list or emit named presets");
    auto* plist = presets->add_subcommand("list", "list preset names");
    std::string preset_name, preset_out;
    auto* pemit = presets->add_subcommand("emit", "write a preset config file");
    pemit->add_option("name", preset_name, "preset name")->required();
    pemit->add_option("--out", preset_out, "output file (default <name>.json)");

    std::vector<std::string> compare_paths;
    auto* compare = app.add_subcommand("compare", "run several configs over one shared channel");
    compare->add_option("configs", compare_paths, "scenario JSON files")->required()->expected(-1);
    compare->add_option("--out", out_root, "output root directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    try {
        if (*run) {
            auto cfg = load_config(config_path);
            if (seed_override >= 0) {
                cfg.seed = static_cast<std::uint64_t>(seed_override);
                cfg.raw["seed"] = cfg.seed;
            }
            print_report(wb::run_scenario(cfg, out_root));
        } else if (*plist) {
            for (const auto& n : wb::preset_names()) std::cout << n << "\n";
        } else if (*pemit) {
            const auto j = wb::preset_config(preset_name);
            const std::string path = preset_out.empty() ? preset_name + ".json" : preset_out;
            std::ofstream out(path);
            if (!out) throw std::runtime_error("cannot write " + path);
            out << j.dump(2) << "\n";
            std::cout << "wrote " << path << "\n";
        } else if (*compare) {
            std::vector<wb::ScenarioConfig> cfgs;
            for (const auto& p : compare_paths) cfgs.push_back(load_config(p));
            print_report(wb::compare_systems(cfgs, out_root));
        }
    } catch (const wb::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    return 0;
}
