#ifndef CAVITYQC_HAMILTONIAN_HPP
#define CAVITYQC_HAMILTONIAN_HPP

#include <cmath>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cavityqc/statespace.hpp"

namespace cavityqc {

enum class Branch : int { Minus = 0, Plus = 1 };

inline double branch_sign(Branch b) { return b == Branch::Plus ? 1.0 : -1.0; }
inline char branch_char(Branch b) { return b == Branch::Plus ? '+' : '-'; }

// Gaussian transit envelope of the vacuum Rabi coupling: the atom crosses the
// Fabry-Perot waist, Omega(t) = Omega0 * exp(-((t - t_center)/tau)^2).
struct CouplingProfile {
    double omega0 = 0.0;   // peak coupling, rad/s
    double tau = 1.0;      // transit half-width, s (2*tau is the transit time)
    double t_center = 0.0;

    double value(double t) const {
        const double x = (t - t_center) / tau;
        return omega0 * std::exp(-x * x);
    }
    double derivative(double t) const {
        const double x = (t - t_center) / tau;
        return -2.0 * x / tau * value(t);
    }
};

// Atom-cavity detuning delta = omega_eg - omega, with an optional additive
// Stark offset (models gating the transition in and out of resonance). The
// offset applies inside stark_window when one is given, otherwise always.
struct DetuningSpec {
    double delta = 0.0;
    double stark_offset = 0.0;
    std::optional<std::pair<double, double>> stark_window;

    double effective(double t) const {
        if (stark_offset == 0.0) return delta;
        if (stark_window && (t < stark_window->first || t > stark_window->second)) return delta;
        return delta + stark_offset;
    }
};

// Classical field S driving the g<->e transition with a Gaussian envelope.
// With rwa=true only the co-rotating half survives in the cavity rotating
// frame; rwa=false keeps the full cosine (verification oracle).
struct DriveSpec {
    double xi0 = 0.0;      // coupling constant Xi_0, rad/s
    double omega_s = 0.0;  // lab drive frequency, rad/s
    double phi_s = 0.0;    // drive phase, rad
    double tau_s = 1.0;    // envelope half-width, s
    double t_center = 0.0;
    bool rwa = true;

    double envelope(double t) const {
        const double x = (t - t_center) / tau_s;
        return std::exp(-x * x);
    }
};

// Engineered effective coupling between the bare |g,0> level and one
// instantaneous dressed level V_branch^(n)(t) of the same pair. Stands in for
// a multiphoton classical pulse that addresses a dressed transition the plain
// sigma_x drive cannot reach at first order.
struct DressedDrive {
    double xi0 = 0.0;         // effective two-level coupling, rad/s
    double detuning_rot = 0.0;  // rotating-frame drive frequency (target splitting at t=0)
    double phi = 0.0;
    double tau_s = 1.0;
    double t_center = 0.0;
    int n = 0;                // dressed sector (spans |e,n>, |g,n+1>)
    Branch branch = Branch::Plus;

    double envelope(double t) const {
        const double x = (t - t_center) / tau_s;
        return std::exp(-x * x);
    }
};

// Time-dependent Hamiltonian of one atom-cavity pair in the frame rotating at
// the cavity frequency, identity on every spectator subsystem:
//   H(t) = (delta_eff(t)/2)(|e><e| - |g><g|) + Omega(t)(|e><g| b + |g><e| b+)
//          + drive terms,  hbar = 1.
// Level i is strictly decoupled from the JC term and from all drives.
struct PairHamiltonian {
    std::string atom;
    std::string cavity;
    CouplingProfile coupling;
    DetuningSpec detuning;
    std::vector<DriveSpec> drives;
    std::vector<DressedDrive> dressed_drives;
    double carrier_omega = 0.0;  // cavity angular frequency (frame bookkeeping)
};

// Drive term on the {g, e} subspace in the rotating frame; index 0 = g, 1 = e.
Eigen::Matrix2cd drive_term(const DriveSpec& d, double t, double carrier_omega);

// Pair Hamiltonian compiled against a layout: builds the (3*cutoff)^2 pair
// block at a given time and applies it across all spectator configurations.
class CompiledPairHamiltonian {
public:
    CompiledPairHamiltonian(const SystemLayout& layout, const PairHamiltonian& ham);

    const PairIndexer& indexer() const { return indexer_; }
    const PairHamiltonian& spec() const { return ham_; }
    int pair_dim() const { return indexer_.pair_dim(); }

    // Fills `block` (pair_dim x pair_dim, Hermitian) with H_pair(t).
    void build_block(double t, Eigen::MatrixXcd& block) const;

    // out = H(t) * in on the composite space; `block` is caller scratch.
    void apply(double t, const Eigen::VectorXcd& in, Eigen::VectorXcd& out,
               Eigen::MatrixXcd& block) const;

    // Dense composite matrix (test and verification path).
    Eigen::MatrixXcd dense(double t) const;

    // Magnitude scale of H used to seed adaptive step sizes.
    double rate_scale() const;

private:
    PairHamiltonian ham_;
    PairIndexer indexer_;
    int cutoff_;
    int dim_;
};

}  // namespace cavityqc

#endif
