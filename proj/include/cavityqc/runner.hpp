#ifndef CAVITYQC_RUNNER_HPP
#define CAVITYQC_RUNNER_HPP

#include <map>
#include <ostream>
#include <string>

#include "cavityqc/config.hpp"

namespace cavityqc {

// One CLI invocation: subcommand plus its named arguments. Artifact files go
// under output_dir; anything without an explicit path lands on stdout.
struct RunRequest {
    std::string subcommand;
    std::map<std::string, std::string> args;
    std::string output_dir = ".";
};

// Exit codes: 0 success, 2 configuration, 3 numerical/calibration failure,
// 4 acceptance threshold violated in strict mode, 5 usage.
int run(const RunRequest& request, const ExperimentConfig& config, std::ostream& out,
        std::ostream& err);

// Pulse-program serialization of a schedule (documented in the README).
nlohmann::json schedule_to_json(const Schedule& schedule, int fock_cutoff);

}  // namespace cavityqc

#endif
