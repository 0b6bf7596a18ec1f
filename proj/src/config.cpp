#include "cavityqc/config.hpp"

#include <cmath>
#include <fstream>
#include <set>

#include <nlohmann/json.hpp>

#include "cavityqc/errors.hpp"

namespace cavityqc {

namespace {

struct KeyBinding {
    const char* key;
    enum class Kind { Double, Int, Bool, Unsigned } kind;
    void* target;
};

std::vector<KeyBinding> bindings(ExperimentConfig& c) {
    using K = KeyBinding::Kind;
    auto& p = c.params;
    return {
        {"omega0_rad_per_s", K::Double, &p.omega0},
        {"delta_rad_per_s", K::Double, &p.delta},
        {"transit_tau_s", K::Double, &p.tau},
        {"cavity_omega_rad_per_s", K::Double, &p.carrier_omega},
        {"tau_s_cavity_to_atom_s", K::Double, &p.tau_s_cavity_to_atom},
        {"tau_s_atom_to_cavity_s", K::Double, &p.tau_s_atom_to_cavity},
        {"tau_s_ground_upper_s", K::Double, &p.tau_s_ground_upper},
        {"tau_s_engineered_s", K::Double, &p.tau_s_engineered},
        {"stark_factor", K::Double, &p.stark_factor},
        {"gate_idle_crossings", K::Bool, &p.gate_idle_crossings},
        {"idle_gate_factor", K::Double, &p.idle_gate_factor},
        {"fock_cutoff", K::Int, &p.fock_cutoff},
        {"rel_tol", K::Double, &p.rel_tol},
        {"selectivity_margin", K::Double, &p.selectivity_margin},
        {"min_pi_transfer", K::Double, &p.min_pi_transfer},
        {"min_retire_purity", K::Double, &p.min_retire_purity},
        {"jobs", K::Int, &p.jobs},
        {"trace_samples", K::Int, &c.trace_samples},
        {"adiabaticity_threshold", K::Double, &c.adiabaticity_threshold},
        {"seed", K::Unsigned, &c.seed},
        {"strict", K::Bool, &c.strict},
    };
}

void assign(const KeyBinding& binding, const nlohmann::json& value) {
    using K = KeyBinding::Kind;
    try {
        switch (binding.kind) {
            case K::Double:
                *static_cast<double*>(binding.target) = value.get<double>();
                break;
            case K::Int:
                *static_cast<int*>(binding.target) = value.get<int>();
                break;
            case K::Bool:
                *static_cast<bool*>(binding.target) = value.get<bool>();
                break;
            case K::Unsigned:
                *static_cast<unsigned*>(binding.target) =
                    static_cast<unsigned>(value.get<unsigned long>());
                break;
        }
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("bad value for '") + binding.key + "': " + e.what());
    }
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
    ExperimentConfig config;
    if (!j.is_object()) throw ConfigError("configuration must be a JSON object");
    auto table = bindings(config);
    std::set<std::string> known;
    for (const auto& b : table) known.insert(b.key);
    for (const auto& [key, value] : j.items()) {
        if (!known.count(key)) throw ConfigError("unknown configuration key '" + key + "'");
        for (auto& b : table) {
            if (key == b.key) assign(b, value);
        }
    }
    config.validate();
    return config;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError("config parse error: " + std::string(e.what()));
    }
    return from_json(j);
}

nlohmann::json ExperimentConfig::to_json() const {
    nlohmann::json j;
    auto table = bindings(const_cast<ExperimentConfig&>(*this));
    for (const auto& b : table) {
        using K = KeyBinding::Kind;
        switch (b.kind) {
            case K::Double: j[b.key] = *static_cast<const double*>(b.target); break;
            case K::Int: j[b.key] = *static_cast<const int*>(b.target); break;
            case K::Bool: j[b.key] = *static_cast<const bool*>(b.target); break;
            case K::Unsigned: j[b.key] = *static_cast<const unsigned*>(b.target); break;
        }
    }
    return j;
}

void ExperimentConfig::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos) {
        throw ConfigError("override must look like key=value: '" + assignment + "'");
    }
    const std::string key = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);
    nlohmann::json parsed;
    try {
        parsed = nlohmann::json::parse(value);
    } catch (const nlohmann::json::exception&) {
        parsed = value;  // plain string
    }
    auto table = bindings(*this);
    for (auto& b : table) {
        if (key == b.key) {
            assign(b, parsed);
            validate();
            return;
        }
    }
    throw ConfigError("unknown configuration key '" + key + "'");
}

void ExperimentConfig::validate() const {
    const auto& p = params;
    const auto positive = [](double v, const char* name) {
        if (!(v > 0.0) || !std::isfinite(v)) {
            throw ConfigError(std::string(name) + " must be a positive finite number");
        }
    };
    positive(p.omega0, "omega0_rad_per_s");
    positive(p.delta, "delta_rad_per_s");
    positive(p.tau, "transit_tau_s");
    positive(p.carrier_omega, "cavity_omega_rad_per_s");
    positive(p.tau_s_cavity_to_atom, "tau_s_cavity_to_atom_s");
    positive(p.tau_s_atom_to_cavity, "tau_s_atom_to_cavity_s");
    positive(p.tau_s_ground_upper, "tau_s_ground_upper_s");
    positive(p.tau_s_engineered, "tau_s_engineered_s");
    positive(p.rel_tol, "rel_tol");
    if (p.fock_cutoff < 2) throw ConfigError("fock_cutoff must be >= 2");
    if (p.stark_factor <= 0.0) throw ConfigError("stark_factor must be > 0");
    if (p.jobs < 0) throw ConfigError("jobs must be >= 0");
    if (trace_samples < 2) throw ConfigError("trace_samples must be >= 2");
    if (adiabaticity_threshold <= 0.0) throw ConfigError("adiabaticity_threshold must be > 0");
}

}  // namespace cavityqc
