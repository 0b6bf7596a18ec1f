#include <cstdlib>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cavityqc/errors.hpp"
#include "cavityqc/runner.hpp"

namespace {

struct CommonArgs {
    std::string config_path;
    std::vector<std::string> overrides;
    std::string output_dir = ".";
    bool strict = false;
};

void add_common(CLI::App* cmd, CommonArgs& common) {
    cmd->add_option("--config", common.config_path,
                    "JSON configuration file (default: $CAVITYQC_CONFIG if set)");
    cmd->add_option("--set", common.overrides,
                    "Override a configuration key, e.g. --set omega0_rad_per_s=4.2e5");
    cmd->add_option("--output-dir", common.output_dir, "Directory for artifact files");
    cmd->add_flag("--strict", common.strict,
                  "Return nonzero when an acceptance threshold is violated");
}

cavityqc::ExperimentConfig build_config(const CommonArgs& common) {
    cavityqc::ExperimentConfig config;
    std::string path = common.config_path;
    if (path.empty()) {
        if (const char* env = std::getenv("CAVITYQC_CONFIG")) path = env;
    }
    if (!path.empty()) config = cavityqc::ExperimentConfig::load(path);
    for (const auto& assignment : common.overrides) config.apply_override(assignment);
    if (common.strict) config.strict = true;
    config.validate();
    return config;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Cavity-QED quantum computing simulator: dressed-state spectra, pulse "
                 "calibration, protocol execution and gate tomography"};
    app.require_subcommand(1);

    struct Sub {
        CLI::App* cmd;
        CommonArgs common;
        std::map<std::string, std::string> args;
    };
    std::map<std::string, Sub> subs;

    const auto add_sub = [&](const std::string& name, const std::string& desc,
                             const std::vector<std::pair<std::string, std::string>>& options) {
        auto& sub = subs[name];
        sub.cmd = app.add_subcommand(name, desc);
        add_common(sub.cmd, sub.common);
        for (const auto& [key, help] : options) {
            sub.cmd->add_option_function<std::string>(
                "--" + key, [&sub, key = key](const std::string& v) { sub.args[key] = v; }, help);
        }
    };

    add_sub("dressed-spectrum", "Instantaneous dressed energies over the transit (CSV)",
            {{"samples", "time samples (default 401)"}, {"csv", "output CSV file name"}});
    add_sub("adiabaticity", "Scan of the adiabaticity measure for one sector",
            {{"n", "photon number of the g-branch state (default 1)"}});
    add_sub("trace", "Population trace of a single-visit protocol (CSV)",
            {{"protocol", "cnot-atom-to-cavity | hadamard"},
             {"initial", "initial pair state, e.g. g,0"},
             {"csv", "output CSV file name"}});
    add_sub("calibrate", "Solve one classical pulse amplitude",
            {{"pulse",
              "cavity-to-atom | atom-to-cavity | hadamard | ground-upper | engineered"}});
    add_sub("gate", "Run a named protocol over the logical basis and report the gate",
            {{"protocol",
              "cnot-inv | cnot | cnot-inv-measured | qpg | toffoli | toffoli-4 | ghz-encode | "
              "not | hadamard"},
             {"matrix-csv", "also write the cleaned matrix as CSV"}});
    add_sub("deutsch", "Run the two-cavity function-classification pipeline",
            {{"f", "function index 1..4"}});
    add_sub("schedule-dump", "Emit the calibrated pulse program as JSON",
            {{"protocol", "protocol name (see gate)"},
             {"f", "function index for deutsch"},
             {"json", "output JSON file name"}});

    CLI11_PARSE(app, argc, argv);

    for (auto& [name, sub] : subs) {
        if (!sub.cmd->parsed()) continue;
        try {
            const auto config = build_config(sub.common);
            cavityqc::RunRequest request;
            request.subcommand = name;
            request.args = sub.args;
            request.output_dir = sub.common.output_dir;
            return cavityqc::run(request, config, std::cout, std::cerr);
        } catch (const cavityqc::Error& e) {
            nlohmann::json j;
            j["error"] = e.code();
            j["message"] = e.what();
            std::cerr << j.dump(2) << '\n';
            return e.code() == "config_error" ? 2 : 3;
        }
    }
    return 5;
}
