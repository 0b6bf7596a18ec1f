#ifndef CAVITYQC_TOMOGRAPHY_HPP
#define CAVITYQC_TOMOGRAPHY_HPP

#include <map>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cavityqc/statespace.hpp"

namespace cavityqc {

// One diagonal phase degree of freedom: contributes exp(i * alpha * values(k))
// to basis state k. Values are small integers (qubit occupancy, photon
// number, atom-level indicator), which is what source phases and Stark shifts
// can realize.
struct PhaseGenerator {
    std::string name;
    Eigen::VectorXd values;
};

struct PhaseFit {
    double global = 0.0;
    std::vector<double> out_phases;
    std::vector<double> in_phases;
    double objective = 0.0;
    double gradient_norm = 0.0;
    int sweeps = 0;
};

// Maximizes Re< target, e^{i gamma} D_out * raw * D_in > over the given
// diagonal-phase gauge by cyclic coordinate ascent with deterministic
// restarts. Throws OptimizationFailure if the gradient norm does not reach
// grad_tol * ||target||_1.
PhaseFit fit_phases(const Eigen::MatrixXcd& target, const Eigen::MatrixXcd& raw,
                    const std::vector<PhaseGenerator>& out_gens,
                    const std::vector<PhaseGenerator>& in_gens, double grad_tol = 1e-10);

Eigen::MatrixXcd apply_phase_fit(const Eigen::MatrixXcd& raw, const PhaseFit& fit,
                                 const std::vector<PhaseGenerator>& out_gens,
                                 const std::vector<PhaseGenerator>& in_gens);

// Extracted unitary on the logical cavity-qubit subspace.
struct GateMatrix {
    int dimension = 0;
    int qubits = 0;
    Eigen::MatrixXcd raw;      // as simulated
    Eigen::MatrixXcd cleaned;  // after phase_cleanup (empty before)
    double unitarity_defect = 0.0;       // max |raw+ raw - I|
    Eigen::VectorXd column_leak;         // population outside the logical subspace per input
    std::vector<double> atom_purities;   // purity of every retired/final atom, all inputs
    double global_phase = 0.0;
    std::vector<double> out_qubit_phases;  // one per qubit, applied on the output side
    std::vector<double> in_qubit_phases;
    std::map<std::string, double> residual_params;  // named phases surviving cleanup
};

// Gauge-fixes one global phase plus one diagonal phase per qubit per side
// against the target pattern (Frobenius-optimal), pinning the first row's
// phase to zero. When the target has the C-NOT support pattern the surviving
// antidiagonal phase lambda is extracted into residual_params.
GateMatrix phase_cleanup(const GateMatrix& g, const Eigen::MatrixXcd& target_shape,
                         double grad_tol = 1e-10);

struct FidelityReport {
    double process_fidelity = 0.0;        // |Tr(T+ C)|^2 / d^2
    double max_element_deviation = 0.0;   // max |C - T|
    Eigen::VectorXd truth_table;          // per input: population on the target output
    double min_truth_table = 0.0;
};

// Compares the cleaned matrix (raw when no cleanup ran) against a target.
FidelityReport fidelity(const GateMatrix& g, const Eigen::MatrixXcd& target);

// State fidelity |<ref|psi>|^2 maximized over per-subsystem phases (photon
// number rotation per cavity, level shifts per atom) - the numerically solved
// stand-in for the Stark phase corrections the protocols are allowed.
double gauge_fixed_fidelity(const StateVector& state, const StateVector& reference);

// Ideal single- and multi-qubit targets, basis {|0..0>, |0..1>, ...} with
// qubit 0 as the most significant digit.
namespace targets {
Eigen::MatrixXcd identity(int dim);
Eigen::MatrixXcd not_phase(double theta);         // antidiag(e^{-i theta}, e^{i theta})
Eigen::MatrixXcd hadamard_phase(double theta);    // [[1, e^{-i theta}], [e^{i theta}, -1]]/sqrt(2)
Eigen::MatrixXcd cnot_inv(double lambda = 0.0);   // NOT on B when A = 0
Eigen::MatrixXcd cnot();                          // NOT on B when A = 1
Eigen::MatrixXcd qpg();                           // diag(1, 1, 1, -1)
Eigen::MatrixXcd toffoli(int qubits = 3);         // |1..10> <-> |1..11|
}  // namespace targets

}  // namespace cavityqc

#endif
