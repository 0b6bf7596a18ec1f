#ifndef CAVITYQC_STATESPACE_HPP
#define CAVITYQC_STATESPACE_HPP

#include <array>
#include <complex>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "cavityqc/errors.hpp"

namespace cavityqc {

using Complex = std::complex<double>;

// Three-level atom: i is a lower circular level that never couples to a cavity
// mode, g/e are the working transition. Basis order is fixed (I, G, E).
enum class AtomLevel : int { I = 0, G = 1, E = 2 };

constexpr int kAtomLevels = 3;

char to_char(AtomLevel level);
AtomLevel atom_level_from_char(char c);

struct CavitySpec {
    std::string label;
    int fock_cutoff = 4;
    double omega = 0.0;  // bare mode angular frequency, rad/s (lab frame bookkeeping)
};

struct BasisLabel {
    std::vector<int> fock;             // one occupation per cavity, layout order
    std::vector<AtomLevel> atoms;      // one level per atom, layout order

    std::string str() const;           // e.g. "1,0;g" for two cavities and one atom
};

// Composite Hilbert space bookkeeping: truncated Fock ladder per cavity plus
// three-level atoms. Index order is lexicographic with cavities first (layout
// order, most significant) and atoms last, so serialized amplitude orders are
// stable across runs.
class SystemLayout {
public:
    SystemLayout() = default;
    SystemLayout(std::vector<CavitySpec> cavities, std::vector<std::string> atoms,
                 std::optional<std::string> memory_cavity = std::nullopt);

    int dimension() const { return dimension_; }
    const std::vector<CavitySpec>& cavities() const { return cavities_; }
    const std::vector<std::string>& atoms() const { return atoms_; }
    const std::optional<std::string>& memory_cavity() const { return memory_cavity_; }

    int cavity_index(const std::string& label) const;  // throws LayoutMismatch
    int atom_index(const std::string& label) const;
    bool has_cavity(const std::string& label) const;
    bool has_atom(const std::string& label) const;

    int cavity_stride(int cavity) const { return cavity_strides_.at(cavity); }
    int atom_stride(int atom) const { return atom_strides_.at(atom); }

    int index_of(const BasisLabel& label) const;       // throws OutOfTruncation
    BasisLabel label_of(int index) const;

    // Layout with one more / one fewer atom, used when atoms enter and leave
    // the apparatus sequentially.
    SystemLayout with_atom_appended(const std::string& label) const;
    SystemLayout without_atom(const std::string& label) const;

    bool operator==(const SystemLayout& other) const;
    bool operator!=(const SystemLayout& other) const { return !(*this == other); }

private:
    void rebuild_strides();

    std::vector<CavitySpec> cavities_;
    std::vector<std::string> atoms_;
    std::optional<std::string> memory_cavity_;
    std::vector<int> cavity_strides_;
    std::vector<int> atom_strides_;
    int dimension_ = 1;
};

// Normalized complex amplitude vector over a SystemLayout. Construction
// enforces unit norm to 1e-9; evolution monitors drift instead of silently
// renormalizing.
class StateVector {
public:
    StateVector() = default;
    StateVector(SystemLayout layout, Eigen::VectorXcd amplitudes);

    static StateVector basis_state(const SystemLayout& layout, const BasisLabel& label);
    // Normalizes the given amplitudes (for building superpositions).
    static StateVector superposition(SystemLayout layout, Eigen::VectorXcd amplitudes);
    // Skips the construction-time norm check; reserved for evolution results
    // whose drift has already been audited against the integrator budget.
    static StateVector unchecked(SystemLayout layout, Eigen::VectorXcd amplitudes);

    const SystemLayout& layout() const { return layout_; }
    const Eigen::VectorXcd& amplitudes() const { return amplitudes_; }
    Eigen::VectorXcd& mutable_amplitudes() { return amplitudes_; }

    double norm() const { return amplitudes_.norm(); }
    Complex amplitude(const BasisLabel& label) const;

private:
    SystemLayout layout_;
    Eigen::VectorXcd amplitudes_;
};

std::complex<double> overlap(const StateVector& a, const StateVector& b);

// Marginal probabilities of one subsystem (a cavity label or an atom label).
// Cavity marginals have fock_cutoff entries; atom marginals three (I, G, E).
Eigen::VectorXd reduced_populations(const StateVector& state, const std::string& subsystem);

// Tr(rho^2) of the reduced density operator of one subsystem; 1 iff the
// subsystem is disentangled from the rest.
double subsystem_purity(const StateVector& state, const std::string& subsystem);

// Reduced density matrix of one subsystem (helper for the two above and for
// dominant-level extraction when an atom is retired from the composite).
Eigen::MatrixXcd reduced_density(const StateVector& state, const std::string& subsystem);

// --- In-place local operations -------------------------------------------

// Applies a diagonal phase per atom level.
void apply_atom_diagonal(StateVector& state, const std::string& atom,
                         const std::array<Complex, kAtomLevels>& phases);

// Applies diag over photon number of one cavity.
void apply_cavity_diagonal(StateVector& state, const std::string& cavity,
                           const Eigen::VectorXcd& per_photon);

// Applies an arbitrary 3x3 unitary on one atom.
void apply_atom_unitary(StateVector& state, const std::string& atom,
                        const Eigen::Matrix3cd& u);

// Applies a diagonal defined on the joint (atom level, photon number) basis of
// one atom-cavity pair; diag(l, n) indexed as l * cutoff + n.
void apply_pair_diagonal(StateVector& state, const std::string& atom, const std::string& cavity,
                         const Eigen::VectorXcd& diag);

// --- Composite-space surgery ----------------------------------------------

// Tensor-appends a fresh atom in the given level (becomes the least
// significant index digit).
StateVector inject_atom(const StateVector& state, const std::string& label, AtomLevel level);

struct RetiredAtom {
    StateVector state;       // remaining composite, renormalized
    AtomLevel level;         // dominant level projected on
    double purity;           // subsystem purity before projection
    double projection_loss;  // 1 - |projected amplitude|^2
};

// Projects one atom onto its dominant level and removes it from the layout.
// The purity before projection and the discarded population are reported so
// imperfect disentanglement is never silently hidden.
RetiredAtom retire_atom(const StateVector& state, const std::string& label);

// --- Pair-structured access -----------------------------------------------

// Precomputed index map for one (atom, cavity) pair embedded in a composite
// layout: every composite index decomposes as spectator_base + offset(l, n).
// Pair index convention: p = l * cutoff + n.
class PairIndexer {
public:
    PairIndexer(const SystemLayout& layout, const std::string& atom, const std::string& cavity);

    int pair_dim() const { return pair_dim_; }
    int cutoff() const { return cutoff_; }
    int spectator_count() const { return static_cast<int>(spectator_base_.size()); }
    int offset(int pair_index) const { return offsets_[pair_index]; }
    int spectator_base(int r) const { return spectator_base_[r]; }
    int index(int pair_index, int r) const { return spectator_base_[r] + offsets_[pair_index]; }

private:
    int pair_dim_ = 0;
    int cutoff_ = 0;
    std::vector<int> offsets_;
    std::vector<int> spectator_base_;
};

// Population of a (possibly time-dependent) pair-space vector within the
// composite state: sum over spectators of |<pair_vec (x) spectator | state>|^2.
// pair_vec is indexed p = l * cutoff + n.
double pair_projection_population(const StateVector& state, const PairIndexer& indexer,
                                  const Eigen::VectorXcd& pair_vec);

}  // namespace cavityqc

#endif
