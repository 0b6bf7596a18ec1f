#include "cavityqc/dressed.hpp"

#include <cmath>
#include <sstream>
#include <vector>

#include "cavityqc/errors.hpp"

namespace cavityqc {

Eigen::VectorXcd DressedLevel::pair_vector(int cutoff) const {
    if (n + 1 >= cutoff) {
        throw OutOfTruncation("dressed sector " + std::to_string(n) + " needs |g," +
                              std::to_string(n + 1) + "> below the cutoff");
    }
    Eigen::VectorXcd v = Eigen::VectorXcd::Zero(kAtomLevels * cutoff);
    v(static_cast<int>(AtomLevel::E) * cutoff + n) = coeff_e;
    v(static_cast<int>(AtomLevel::G) * cutoff + n + 1) = coeff_g;
    return v;
}

DressedLevel dressed_level(const CouplingProfile& coupling, double delta, int n, Branch branch,
                           double t) {
    if (n < 0) throw Error("bad_sector", "dressed sector index must be >= 0");
    const double g = coupling.value(t) * std::sqrt(static_cast<double>(n + 1));
    const double splitting = std::sqrt(0.25 * delta * delta + g * g);
    // Mixing angle theta in [0, pi]: tan(theta) = 2g/delta. The half-angle
    // form reproduces the closed-form dressed coefficients without the
    // cancellation the raw expression suffers for the - branch at small g.
    const double theta = std::atan2(2.0 * g, delta);
    DressedLevel level;
    level.n = n;
    level.branch = branch;
    level.t = t;
    if (branch == Branch::Plus) {
        level.coeff_e = std::cos(0.5 * theta);
        level.coeff_g = std::sin(0.5 * theta);
        level.energy_rot = splitting;
    } else {
        level.coeff_e = -std::sin(0.5 * theta);
        level.coeff_g = std::cos(0.5 * theta);
        level.energy_rot = -splitting;
    }
    return level;
}

double adiabaticity_measure(const CouplingProfile& coupling, double delta, int n, double t) {
    if (n <= 0) return 0.0;
    const double omega = coupling.value(t);
    const double gap2 = 0.25 * delta * delta + omega * omega * n;
    if (gap2 <= 0.0) return 0.0;
    const double numerator = std::abs(coupling.derivative(t) * delta) * std::sqrt(static_cast<double>(n));
    return numerator / (4.0 * std::pow(gap2, 1.5));
}

AdiabaticityScan max_adiabaticity(const CouplingProfile& coupling, double delta, int n, double t0,
                                  double t1, int samples) {
    AdiabaticityScan scan;
    scan.argmax_t = t0;
    for (int i = 0; i < samples; ++i) {
        const double t = t0 + (t1 - t0) * i / (samples - 1);
        const double m = adiabaticity_measure(coupling, delta, n, t);
        if (m > scan.max_value) {
            scan.max_value = m;
            scan.argmax_t = t;
        }
    }
    return scan;
}

std::string LevelRef::str() const {
    if (is_g0) return "g0";
    std::ostringstream os;
    os << 'V' << branch_char(branch) << '(' << n << ')';
    return os.str();
}

double level_energy_rot(const LevelRef& level, const CouplingProfile& coupling, double delta) {
    if (level.is_g0) return -0.5 * delta;
    return dressed_level(coupling, delta, level.n, level.branch, coupling.t_center).energy_rot;
}

double transition_frequency_rot(const LevelRef& a, const LevelRef& b,
                                const CouplingProfile& coupling, double delta) {
    return level_energy_rot(a, coupling, delta) - level_energy_rot(b, coupling, delta);
}

double transition_frequency(const LevelRef& a, const LevelRef& b, const CouplingProfile& coupling,
                            double delta, double omega) {
    if (a == b) throw Error("identical_levels", "transition frequency of a level with itself");
    const auto lab = [&](const LevelRef& l) {
        if (l.is_g0) return -0.5 * delta;  // omega/2 - omega_eg/2 relative to the n-photon ladder
        return dressed_level(coupling, delta, l.n, l.branch, coupling.t_center).lab_energy(omega);
    };
    return std::abs(lab(a) - lab(b));
}

namespace {

struct BareTerm {
    AtomLevel level;
    int photons;
    double coeff;
};

std::vector<BareTerm> bare_terms(const LevelRef& ref, const CouplingProfile& coupling,
                                 double delta) {
    if (ref.is_g0) return {{AtomLevel::G, 0, 1.0}};
    const DressedLevel d = dressed_level(coupling, delta, ref.n, ref.branch, coupling.t_center);
    return {{AtomLevel::E, ref.n, d.coeff_e}, {AtomLevel::G, ref.n + 1, d.coeff_g}};
}

double sigma_plus_element(const std::vector<BareTerm>& from, const std::vector<BareTerm>& to) {
    // sigma+ = sum_n |e,n><g,n|
    double acc = 0.0;
    for (const auto& f : from) {
        if (f.level != AtomLevel::G) continue;
        for (const auto& t : to) {
            if (t.level == AtomLevel::E && t.photons == f.photons) acc += t.coeff * f.coeff;
        }
    }
    return acc;
}

}  // namespace

std::complex<double> sigma_x_element(const LevelRef& from, const LevelRef& to,
                                     const CouplingProfile& coupling, double delta) {
    const auto f = bare_terms(from, coupling, delta);
    const auto t = bare_terms(to, coupling, delta);
    return sigma_plus_element(f, t) + sigma_plus_element(t, f);
}

std::complex<double> drive_matrix_element(const DriveSpec& d, const LevelRef& from,
                                          const LevelRef& to, const CouplingProfile& coupling,
                                          double delta) {
    return 0.5 * d.xi0 * sigma_x_element(from, to, coupling, delta);
}

SelectivityReport check_pulse_selectivity(const CouplingProfile& coupling, double delta, int cutoff,
                                          double drive_rot_freq, double tau_s,
                                          const LevelRef& from, const LevelRef& to) {
    SelectivityReport report;
    report.required = 4.0 / tau_s;
    report.min_separation = std::numeric_limits<double>::infinity();

    std::vector<LevelRef> levels;
    levels.push_back(LevelRef::g0());
    for (int n = 0; n + 1 < cutoff; ++n) {
        levels.push_back(LevelRef::dressed(n, Branch::Minus));
        levels.push_back(LevelRef::dressed(n, Branch::Plus));
    }

    const auto intended = [&](const LevelRef& a, const LevelRef& b) {
        return (a == from && b == to) || (a == to && b == from);
    };

    for (const auto& lower : levels) {
        for (const auto& upper : levels) {
            if (lower == upper || intended(lower, upper)) continue;
            const auto lo = bare_terms(lower, coupling, delta);
            const auto up = bare_terms(upper, coupling, delta);
            const double element = sigma_plus_element(lo, up);
            if (std::abs(element) < 1e-9) continue;
            // sigma+ line: resonant when drive_rot_freq = E(upper) - E(lower).
            const double line = level_energy_rot(upper, coupling, delta) -
                                level_energy_rot(lower, coupling, delta);
            const double separation = std::abs(line - drive_rot_freq);
            if (separation < report.min_separation) {
                report.min_separation = separation;
                report.worst_line = lower.str() + "->" + upper.str();
            }
        }
    }
    report.ok = report.min_separation > report.required;
    return report;
}

}  // namespace cavityqc
