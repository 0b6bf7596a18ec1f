#ifndef CAVITYQC_DRESSED_HPP
#define CAVITYQC_DRESSED_HPP

#include <complex>
#include <string>

#include <Eigen/Dense>

#include "cavityqc/hamiltonian.hpp"

namespace cavityqc {

// Instantaneous eigenpair of the coupled atom-cavity pair in sector n, which
// spans {|e,n>, |g,n+1>}. Coefficients follow the closed-form dressed-state
// expression with the |e,n> coefficient of the + branch taken >= 0, so the
// decoupled limit at delta > 0 connects + -> |e,n> and - -> |g,n+1>.
struct DressedLevel {
    int n = 0;
    Branch branch = Branch::Plus;
    double t = 0.0;
    double coeff_e = 0.0;      // coefficient of |e,n>
    double coeff_g = 0.0;      // coefficient of |g,n+1>
    double energy_rot = 0.0;   // rotating frame: +-sqrt((delta/2)^2 + Omega^2(n+1))

    // Lab-frame eigenvalue, i.e. rotating-frame energy plus omega*(n+1).
    double lab_energy(double omega) const { return energy_rot + omega * (n + 1); }

    // Embeds into the (level, photon) pair space, index p = l * cutoff + n.
    Eigen::VectorXcd pair_vector(int cutoff) const;
};

DressedLevel dressed_level(const CouplingProfile& coupling, double delta, int n, Branch branch,
                           double t);

// Adiabaticity measure |dOmega/dt| * delta * sqrt(n) / (4 [ (delta/2)^2 +
// Omega^2(t) n ]^(3/2)); n counts the photons of the g-branch state, so the
// sector spanning {|e,n-1>, |g,n>} is probed with argument n.
double adiabaticity_measure(const CouplingProfile& coupling, double delta, int n, double t);

// Dense scan of the measure over [t0, t1]; returns the maximum and its time.
struct AdiabaticityScan {
    double max_value = 0.0;
    double argmax_t = 0.0;
};
AdiabaticityScan max_adiabaticity(const CouplingProfile& coupling, double delta, int n, double t0,
                                  double t1, int samples = 4001);

// A pulse endpoint: either the uncoupled ground |g,0> or a dressed level at
// the cavity center (t = t_center of the coupling profile).
struct LevelRef {
    bool is_g0 = false;
    int n = 0;
    Branch branch = Branch::Plus;

    static LevelRef g0() { return LevelRef{true, 0, Branch::Plus}; }
    static LevelRef dressed(int n, Branch b) { return LevelRef{false, n, b}; }
    bool operator==(const LevelRef& o) const {
        return is_g0 == o.is_g0 && (is_g0 || (n == o.n && branch == o.branch));
    }
    std::string str() const;
};

// Rotating-frame energy of a level at the cavity center. |g,0> sits at
// -delta/2, dressed levels at +-sqrt((delta/2)^2 + Omega0^2 (n+1)).
double level_energy_rot(const LevelRef& level, const CouplingProfile& coupling, double delta);

// Signed rotating-frame transition frequency E(a) - E(b); a drive resonant on
// a <- b has omega_s = carrier omega + this value.
double transition_frequency_rot(const LevelRef& a, const LevelRef& b,
                                const CouplingProfile& coupling, double delta);

// Lab-frame |Delta E| between two levels at t = 0 with the frame shift
// restored. Throws on identical levels.
double transition_frequency(const LevelRef& a, const LevelRef& b, const CouplingProfile& coupling,
                            double delta, double omega);

// <to| (|e><g| + |g><e|) |from> evaluated at the cavity center; zero by
// selection rules when the photon ladders do not meet.
std::complex<double> sigma_x_element(const LevelRef& from, const LevelRef& to,
                                     const CouplingProfile& coupling, double delta);

// Same matrix element weighted by the drive amplitude Xi0/2.
std::complex<double> drive_matrix_element(const DriveSpec& d, const LevelRef& from,
                                          const LevelRef& to, const CouplingProfile& coupling,
                                          double delta);

// Frequency-selectivity audit of a planned pulse: enumerates every dressed
// transition reachable by sigma+- within the truncated space and requires the
// drive to sit further than the Fourier width 4/tau_s from each parasitic
// line.
struct SelectivityReport {
    bool ok = true;
    double min_separation = 0.0;  // rad/s, over parasitic lines
    double required = 0.0;        // 4 / tau_s
    std::string worst_line;
};

SelectivityReport check_pulse_selectivity(const CouplingProfile& coupling, double delta, int cutoff,
                                          double drive_rot_freq, double tau_s,
                                          const LevelRef& from, const LevelRef& to);

}  // namespace cavityqc

#endif
