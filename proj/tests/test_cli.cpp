#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sstream>

#include <nlohmann/json.hpp>

#include "cavityqc/runner.hpp"

using namespace cavityqc;
using nlohmann::json;

TEST_CASE("config: defaults validate and round-trip through JSON") {
    ExperimentConfig config;
    config.validate();
    const json j = config.to_json();
    CHECK(j.at("omega0_rad_per_s").get<double>() == doctest::Approx(4.2e5));
    CHECK(j.at("delta_rad_per_s").get<double>() == doctest::Approx(0.18 * 4.2e5));
    CHECK(j.at("transit_tau_s").get<double>() == doctest::Approx(1e-4));
    const auto back = ExperimentConfig::from_json(j);
    CHECK(back.to_json() == j);
}

TEST_CASE("config: unknown keys and bad values are rejected") {
    CHECK_THROWS_AS(ExperimentConfig::from_json(json{{"omega0_rad_per_sec", 1.0}}), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_json(json{{"omega0_rad_per_s", -1.0}}), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_json(json{{"omega0_rad_per_s", "fast"}}), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_json(json{{"fock_cutoff", 1}}), ConfigError);
    CHECK_THROWS_AS(ExperimentConfig::from_json(json::array()), ConfigError);

    ExperimentConfig config;
    CHECK_THROWS_AS(config.apply_override("nonsense"), ConfigError);
    CHECK_THROWS_AS(config.apply_override("no_such_key=1"), ConfigError);
    config.apply_override("fock_cutoff=5");
    CHECK(config.params.fock_cutoff == 5);
    config.apply_override("gate_idle_crossings=false");
    CHECK_FALSE(config.params.gate_idle_crossings);
}

TEST_CASE("runner: unknown subcommand returns a machine-readable error") {
    RunRequest request;
    request.subcommand = "frobnicate";
    std::ostringstream out, err;
    const int rc = run(request, ExperimentConfig{}, out, err);
    CHECK(rc == 2);
    const json j = json::parse(err.str());
    CHECK(j.at("error") == "config_error");
}

TEST_CASE("runner: invalid trace initial state reports config error") {
    RunRequest request;
    request.subcommand = "trace";
    request.args["initial"] = "bogus";
    std::ostringstream out, err;
    const int rc = run(request, ExperimentConfig{}, out, err);
    CHECK(rc == 2);
}

TEST_CASE("determinism: identical requests produce byte-identical output") {
    ExperimentConfig config;
    config.trace_samples = 40;

    const auto render = [&](const std::string& sub,
                            std::map<std::string, std::string> args = {}) {
        RunRequest request;
        request.subcommand = sub;
        request.args = std::move(args);
        std::ostringstream out, err;
        const int rc = run(request, config, out, err);
        REQUIRE(rc == 0);
        return out.str();
    };

    CHECK(render("dressed-spectrum") == render("dressed-spectrum"));
    CHECK(render("adiabaticity") == render("adiabaticity"));
    CHECK(render("trace") == render("trace"));
    CHECK(render("calibrate", {{"pulse", "hadamard"}}) ==
          render("calibrate", {{"pulse", "hadamard"}}));
}

TEST_CASE("gate subcommand emits the full report for a one-qubit protocol") {
    ExperimentConfig config;
    RunRequest request;
    request.subcommand = "gate";
    request.args["protocol"] = "not";
    std::ostringstream out, err;
    const int rc = run(request, config, out, err);
    REQUIRE(rc == 0);
    const json j = json::parse(out.str());
    CHECK(j.at("protocol") == "not");
    CHECK(j.at("min_truth_table").get<double>() >= 0.99);
    CHECK(j.at("process_fidelity").get<double>() >= 0.995);
    CHECK(j.at("unitarity_defect").get<double>() < 1e-2);
    CHECK(j.at("raw").size() == 2);
    CHECK(j.at("atoms_used") == 1);
}

TEST_CASE("schedule-dump lists the calibrated pulse program") {
    ExperimentConfig config;
    RunRequest request;
    request.subcommand = "schedule-dump";
    request.args["protocol"] = "cnot-inv";
    std::ostringstream out, err;
    const int rc = run(request, config, out, err);
    REQUIRE(rc == 0);
    const json j = json::parse(out.str());
    CHECK(j.at("name") == "cnot-inv");
    CHECK(j.at("memory_cavity") == "M");
    CHECK(j.at("atoms_used") == 2);
    CHECK(j.at("cavities").size() == 3);

    int visits = 0, injects = 0, retires = 0;
    bool saw_drive = false, saw_undo = false;
    for (const auto& item : j.at("items")) {
        const std::string type = item.at("type");
        if (type == "visit") {
            ++visits;
            if (item.contains("drives") && !item["drives"].empty()) {
                saw_drive = true;
                const auto& d = item["drives"][0];
                CHECK(d.contains("xi0_rad_per_s"));
                CHECK(d.contains("omega_s_rad_per_s"));
                CHECK(d.contains("tau_s_s"));
            }
            if (item.contains("adiabatic_undo_phases_rad")) saw_undo = true;
        }
        if (type == "inject") ++injects;
        if (type == "retire") ++retires;
    }
    CHECK(visits == 6);
    CHECK(injects == 2);
    CHECK(retires == 2);
    CHECK(saw_drive);
    CHECK(saw_undo);
}

TEST_CASE("strict mode: adiabaticity over threshold fails when scanned globally") {
    ExperimentConfig config;
    config.strict = true;
    config.adiabaticity_threshold = 1e-6;  // force a violation even in transit
    RunRequest request;
    request.subcommand = "adiabaticity";
    std::ostringstream out, err;
    CHECK(run(request, config, out, err) == 4);
}
