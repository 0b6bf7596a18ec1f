#ifndef CAVITYQC_ERRORS_HPP
#define CAVITYQC_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace cavityqc {

// Base error carrying a stable machine-readable code alongside the message.
class Error : public std::runtime_error {
public:
    Error(std::string code, const std::string& message)
        : std::runtime_error(message), code_(std::move(code)) {}
    const std::string& code() const noexcept { return code_; }

private:
    std::string code_;
};

struct OutOfTruncation : Error {
    explicit OutOfTruncation(const std::string& msg) : Error("out_of_truncation", msg) {}
};

struct LayoutMismatch : Error {
    explicit LayoutMismatch(const std::string& msg) : Error("layout_mismatch", msg) {}
};

struct NumericalFailure : Error {
    explicit NumericalFailure(const std::string& msg) : Error("numerical_failure", msg) {}
};

struct SelectivityViolation : Error {
    explicit SelectivityViolation(const std::string& msg) : Error("selectivity_violation", msg) {}
};

struct CalibrationFailure : Error {
    explicit CalibrationFailure(const std::string& msg) : Error("calibration_failure", msg) {}
};

struct EntanglementResidue : Error {
    explicit EntanglementResidue(const std::string& msg) : Error("entanglement_residue", msg) {}
};

struct OptimizationFailure : Error {
    explicit OptimizationFailure(const std::string& msg) : Error("optimization_failure", msg) {}
};

struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error("config_error", msg) {}
};

}  // namespace cavityqc

#endif
