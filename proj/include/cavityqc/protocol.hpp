#ifndef CAVITYQC_PROTOCOL_HPP
#define CAVITYQC_PROTOCOL_HPP

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "cavityqc/dressed.hpp"
#include "cavityqc/hamiltonian.hpp"
#include "cavityqc/integrator.hpp"
#include "cavityqc/statespace.hpp"
#include "cavityqc/tomography.hpp"

namespace cavityqc {

// Operating point and numerical policy shared by every protocol. Defaults are
// the published microwave operating point with all quoted kHz magnitudes read
// as angular frequencies.
struct PhysicalParams {
    double omega0 = 4.2e5;            // peak vacuum Rabi coupling, rad/s
    double delta = 0.18 * 4.2e5;      // atom-cavity detuning, rad/s
    double tau = 100e-6;              // transit half-width, s
    double carrier_omega = 2.0 * M_PI * 51.1e9;  // cavity frequency, rad/s
    double tau_s_cavity_to_atom = 14e-6;
    double tau_s_atom_to_cavity = 25e-6;
    double tau_s_ground_upper = 19e-6;   // |g,0> <-> V+(0) pulse (three-qubit gates)
    double tau_s_engineered = 10e-6;     // |g,0> <-> V+(2) effective pulse
    double stark_factor = 50.0;          // gating offset in units of omega0
    // Crossings with no classical pulse applied are Stark-gated by default so
    // the transit tails stay far from the avoided crossing (the same fields
    // the conditional-2pi scheme uses for its undisturbed crossings).
    bool gate_idle_crossings = true;
    double idle_gate_factor = 4.0;       // offset in units of omega0
    int fock_cutoff = 4;
    double rel_tol = 1e-9;
    double selectivity_margin = 0.99;    // fraction of the 4/tau_s width enforced
    double min_pi_transfer = 0.99;       // hard floor for calibrated pi pulses
    double min_retire_purity = 0.98;
    int jobs = 1;

    // Resonant crossings (conditional 2pi Rabi) need pulse area
    // integral(Omega) dt = pi, fixing the transit width at given omega0.
    double qpg_tau() const { return std::sqrt(M_PI) / omega0; }
    // Memory swap: resonant vacuum-Rabi area integral(2 Omega) dt = pi at the
    // atom's own transit width.
    double memory_omega0(double atom_tau) const { return 0.5 * std::sqrt(M_PI) / atom_tau; }
    double stark_offset() const { return stark_factor * omega0; }
};

// ---------------------------------------------------------------------------
// Schedule items
// ---------------------------------------------------------------------------

enum class PulseKind {
    DressedPi,      // calibrated pi pulse between two dressed/bare levels
    DressedHalfPi,  // calibrated pi/2 pulse
    ResonantRabi,   // resonant crossing (memory swap or conditional 2pi)
    StarkGate,      // crossing with the transition gated far off resonance
    Idle,           // plain detuned crossing, no classical field
};

std::string to_string(PulseKind kind);

// One atom transit through one cavity. All physical numbers are baked in at
// build time so a dumped schedule is a complete pulse program.
struct CavityVisit {
    std::string atom;
    std::string cavity;
    PulseKind kind = PulseKind::Idle;
    std::string intent;             // named transition or role
    double omega0 = 0.0;            // coupling peak for this visit
    double tau = 0.0;               // transit half-width
    double delta_eff = 0.0;         // effective detuning during the visit
    double carrier_omega = 0.0;
    std::vector<DriveSpec> drives;  // calibrated classical pulses (t_center 0)
    std::vector<DressedDrive> dressed_drives;
    Eigen::VectorXcd pre_correction;   // pair diagonal, size 3*cutoff (may be empty)
    Eigen::VectorXcd post_correction;  // applied after the adiabatic-phase undo
    double window_half = 0.0;          // 4*tau unless overridden

    double t_start() const { return -window_half; }
    double t_end() const { return window_half; }
};

// Ideal classical rotation on two atom levels, applied between cavities.
struct AtomRotation {
    std::string atom;
    AtomLevel a = AtomLevel::I;
    AtomLevel b = AtomLevel::G;
    Eigen::Matrix2cd u;  // on span{a, b}
    std::string intent;
};

struct InjectAtom {
    std::string atom;
    AtomLevel level = AtomLevel::G;
};

struct RetireAtomItem {
    std::string atom;
    std::optional<AtomLevel> expected;
};

struct Checkpoint {
    std::string name;
};

struct ScheduleItem;

// Projective atom detection with per-outcome continuations.
struct MeasureAtom {
    std::string atom;
    std::vector<ScheduleItem> if_g;
    std::vector<ScheduleItem> if_e;
};

struct ScheduleItem {
    std::variant<CavityVisit, AtomRotation, InjectAtom, RetireAtomItem, Checkpoint, MeasureAtom> v;
};

// Ordered pulse program over a fixed cavity chain. Atoms enter and leave via
// Inject/Retire items; phase corrections ride on the visits.
struct Schedule {
    std::string name;
    SystemLayout layout;                       // cavities only
    std::vector<std::string> logical_cavities; // qubit order for extraction
    std::vector<ScheduleItem> items;
    int atoms_used = 0;
};

// ---------------------------------------------------------------------------
// Calibration
// ---------------------------------------------------------------------------

struct PulseIntentSpec {
    LevelRef from;
    LevelRef to;
    std::string name;
};

struct CalibrationResult {
    DriveSpec drive;          // solved amplitude, lab frequency, phi_s = 0
    std::optional<DressedDrive> dressed_drive;  // engineered pulses only
    double transfer = 0.0;    // achieved population transfer
    double residual_phase = 0.0;
    SelectivityReport selectivity;
};

// Diagonal phase corrections that turn one simulated fragment into its ideal
// target on the pair subspace (the numerically solved Stark adjustments).
struct FragmentCorrection {
    Eigen::VectorXcd pre;
    Eigen::VectorXcd post;
    double fit_error = 0.0;  // Frobenius distance to the target after fixing
};

enum class PulseArea { Pi, HalfPi };

// Solves the drive amplitude for a pi or pi/2 pulse on the given transition
// by full integration of the pair dynamics (the Gaussian-area estimate seeds
// the search). Throws SelectivityViolation / CalibrationFailure.
CalibrationResult calibrate_pulse(const PhysicalParams& params, const PulseIntentSpec& intent,
                                  double tau_s, PulseArea area);

// ---------------------------------------------------------------------------
// Execution
// ---------------------------------------------------------------------------

struct ExecutionOptions {
    double rel_tol = 1e-9;
    double min_retire_purity = 0.98;
    double min_extract_purity = 0.98;  // strict mode raises this to 0.999
    bool capture_checkpoints = true;
    // Record a Fig.2-style trace of the visit with this index (counted over
    // executed CavityVisit items); projectors default to the dressed set.
    int trace_visit = -1;
    TraceRequest trace_request;
};

struct RetireRecord {
    std::string atom;
    AtomLevel level = AtomLevel::G;
    double purity = 0.0;
    double projection_loss = 0.0;
};

struct BranchResult {
    std::string outcomes;  // concatenated measurement outcomes, e.g. "g"
    double probability = 1.0;
    StateVector state;     // cavities-only composite after all retirements
    std::map<std::string, StateVector> checkpoints;
    std::vector<RetireRecord> retired;
    long steps = 0;
};

struct ExecutionResult {
    std::vector<BranchResult> branches;
    TraceLog trace;
};

ExecutionResult execute(const Schedule& schedule, const StateVector& initial,
                        const ExecutionOptions& options);

// Runs the schedule over every logical basis input and assembles the gate
// matrix on the cavity-qubit subspace. Throws EntanglementResidue when any
// atom exits with purity below 0.999.
GateMatrix extract_gate(const Schedule& schedule, const ExecutionOptions& options, int jobs = 1);

// Initial cavity-only state with the logical qubits set to `bits` (qubit 0 =
// first logical cavity = most significant) and every other cavity in vacuum.
StateVector logical_basis_state(const Schedule& schedule, int bits);

// ---------------------------------------------------------------------------
// Protocol compiler
// ---------------------------------------------------------------------------

// Builds calibrated schedules for the named protocols. Calibrations and
// fragment corrections are solved on demand and cached per operating point.
class ProtocolCompiler {
public:
    explicit ProtocolCompiler(PhysicalParams params);

    const PhysicalParams& params() const { return params_; }

    // Two-qubit gates between cavities A (control) and B (target).
    Schedule cnot_inv();
    Schedule cnot();
    Schedule cnot_inv_measured();

    Schedule qpg();

    // Single-qubit gates on one cavity.
    Schedule one_qubit_not(double theta);
    Schedule one_qubit_hadamard(double theta_prime);

    Schedule toffoli();                 // cavities A, B, C
    Schedule toffoli_n(int qubits);     // n-1 controls, target last
    Schedule ghz_encode(int qubits);    // data cavity A plus n-1 ancillas
    Schedule deutsch(int f_index);      // 1..4

    // Schedule fragments (appended to `items`) for composing pipelines.
    void append_cnot_cavity_to_atom(std::vector<ScheduleItem>& items, const std::string& atom,
                                    const std::string& cavity);
    void append_cnot_atom_to_cavity(std::vector<ScheduleItem>& items, const std::string& atom,
                                    const std::string& cavity);
    void append_memory_swap(std::vector<ScheduleItem>& items, const std::string& atom,
                            const std::string& cavity, double atom_tau);
    void append_not_pulse(std::vector<ScheduleItem>& items, const std::string& atom,
                          const std::string& cavity, double theta);
    void append_hadamard_pulse(std::vector<ScheduleItem>& items, const std::string& atom,
                               const std::string& cavity, double theta_prime);

    // Solved calibrations (exposed for reporting and tests).
    const CalibrationResult& pulse_calibration(const std::string& key);
    const FragmentCorrection& fragment_correction(const std::string& key);
    // Affine map theta(phi_s) = slope * phi_s for the not / hadamard pulses.
    double not_phase_slope();
    double hadamard_phase_slope();

    ExecutionOptions execution_options() const;

private:
    struct PulseTable;
    CavityVisit make_visit(const std::string& atom, const std::string& cavity, PulseKind kind,
                           std::string intent, double omega0, double tau, double delta_eff);
    // Crossing with the classical source off, Stark-gated when configured.
    CavityVisit undisturbed_visit(const std::string& atom, const std::string& cavity, double tau);
    CavityVisit dressed_pulse_visit(const std::string& atom, const std::string& cavity,
                                    const std::string& kind_key, double phi_s);
    Schedule make_schedule(std::string name, std::vector<std::string> cavities,
                           std::vector<std::string> logical);

    PhysicalParams params_;
    std::map<std::string, CalibrationResult> calibrations_;
    std::map<std::string, FragmentCorrection> corrections_;
    std::map<std::string, double> slopes_;
};

// Single-atom preparation statistics: probability of exactly one atom in a
// Poissonian beam section and the mean number of discarded sections.
struct AtomSourceStats {
    double p_exactly_one = 0.0;
    double expected_delay_cycles = 0.0;
};
AtomSourceStats atom_source_statistics(double mean);

// The adiabatic dynamical phase accumulated by each (level, photon) pair
// state over a visit, as a pair diagonal that undoes it. Exposed for tests
// and for schedule serialization.
Eigen::VectorXcd adiabatic_undo_diagonal(const CavityVisit& visit, int cutoff);

namespace detail {

PairHamiltonian visit_hamiltonian(const CavityVisit& visit);

// The single implementation of visit semantics: pre correction, integration,
// adiabatic-phase undo, post correction. Used by the executor and by
// calibration alike.
EvolveResult run_visit(const CavityVisit& visit, const StateVector& state, double rel_tol,
                       const TraceRequest* trace = nullptr);

// Fragment target on a bare (level, photon) subset of the pair space.
struct FragmentSpec {
    std::vector<std::pair<AtomLevel, int>> subset;
    Eigen::MatrixXcd target;
};

// Raw fragment matrix on the subset (columns = evolved bare inputs).
Eigen::MatrixXcd fragment_matrix(const CavityVisit& visit, const FragmentSpec& spec,
                                 double rel_tol, int cutoff);

// Solves the diagonal product-phase corrections that map the simulated
// fragment onto its target.
FragmentCorrection solve_fragment_correction(const CavityVisit& visit, const FragmentSpec& spec,
                                             const PhysicalParams& params);

}  // namespace detail

}  // namespace cavityqc

#endif
