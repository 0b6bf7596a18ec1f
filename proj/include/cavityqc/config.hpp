#ifndef CAVITYQC_CONFIG_HPP
#define CAVITYQC_CONFIG_HPP

#include <optional>
#include <string>

#include <nlohmann/json_fwd.hpp>

#include "cavityqc/protocol.hpp"

namespace cavityqc {

// Experiment configuration exposed at the CLI boundary. Every physical
// quantity carries an explicit unit suffix in its key name; defaults are the
// published operating point. Unknown keys are rejected.
struct ExperimentConfig {
    PhysicalParams params;
    int trace_samples = 2000;
    double adiabaticity_threshold = 0.05;
    unsigned seed = 20240811;
    bool strict = false;

    static ExperimentConfig from_json(const nlohmann::json& j);
    static ExperimentConfig load(const std::string& path);
    nlohmann::json to_json() const;

    // Applies one "key=value" override using the JSON key names.
    void apply_override(const std::string& assignment);

    void validate() const;  // throws ConfigError
};

}  // namespace cavityqc

#endif
