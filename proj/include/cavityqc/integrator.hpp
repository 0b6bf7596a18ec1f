#ifndef CAVITYQC_INTEGRATOR_HPP
#define CAVITYQC_INTEGRATOR_HPP

#include <cmath>
#include <functional>
#include <limits>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cavityqc/dressed.hpp"
#include "cavityqc/errors.hpp"
#include "cavityqc/hamiltonian.hpp"
#include "cavityqc/statespace.hpp"

namespace cavityqc {

// Observable sampled along a trace: a composite basis population, the bare
// (level, photon) population of the active pair, or the instantaneous dressed
// projector of the active pair.
struct TraceProjector {
    enum class Kind { CompositeBasis, PairBare, PairDressed };
    Kind kind = Kind::CompositeBasis;
    std::string label;
    BasisLabel basis;                 // CompositeBasis
    AtomLevel level = AtomLevel::G;   // PairBare
    int photons = 0;                  // PairBare
    int n = 0;                        // PairDressed
    Branch branch = Branch::Minus;    // PairDressed

    static TraceProjector composite(std::string label, BasisLabel basis);
    static TraceProjector pair_bare(AtomLevel level, int photons);
    static TraceProjector pair_dressed(int n, Branch branch);
};

struct TraceRequest {
    int samples = 2000;
    std::vector<TraceProjector> projectors;
};

struct EvolutionWindow {
    double t_start = 0.0;
    double t_end = 0.0;
    double rel_tol = 1e-9;
    double max_step = std::numeric_limits<double>::infinity();
    std::optional<TraceRequest> record;
};

struct TraceLog {
    std::vector<double> times;
    std::vector<std::string> labels;
    Eigen::MatrixXd populations;  // row per sample, column per projector
    std::vector<double> norms;
    double norm_drift = 0.0;

    // CSV with header "t,<labels...>,norm", 12 significant digits.
    void to_csv(std::ostream& os) const;
};

struct EvolveResult {
    StateVector state;
    TraceLog trace;
    long steps = 0;
    long rejected = 0;
    double norm_drift = 0.0;
};

// Schroedinger propagation of the composite state under one pair Hamiltonian.
// Norm is never renormalized; the drift is a diagnostic and exceeding its
// budget raises NumericalFailure.
EvolveResult evolve(const StateVector& state, const CompiledPairHamiltonian& ham,
                    const EvolutionWindow& window);

// Column-by-column unitary accumulated over one window; columns are
// independent evolutions and run concurrently when jobs > 1.
struct PropagatorResult {
    Eigen::MatrixXcd matrix;
    double unitarity_defect = 0.0;  // max |U+U - I|
};
PropagatorResult propagator(const SystemLayout& layout, const PairHamiltonian& ham,
                            const EvolutionWindow& window, const std::vector<BasisLabel>& subspace,
                            int jobs = 1);

namespace detail {

// Dormand-Prince 5(4) embedded pair on dy/dt = -i H(t) y. The local error
// budget is scaled per unit time so the accumulated error over a window
// tracks the requested tolerance rather than tolerance-per-step.
//
// ApplyH:   void(double t, const VectorXcd& in, VectorXcd& out)  [out = H in]
// Sampler:  must provide next_time() and record(double t, const VectorXcd&).
template <typename ApplyH, typename Sampler>
std::pair<long, long> rk45_complex(ApplyH&& apply_h, Eigen::VectorXcd& y, double t0, double t1,
                                   double rel_tol, double max_step, double rate_scale,
                                   Sampler& sampler) {
    static const double c2 = 1.0 / 5, c3 = 3.0 / 10, c4 = 4.0 / 5, c5 = 8.0 / 9;
    static const double a21 = 1.0 / 5;
    static const double a31 = 3.0 / 40, a32 = 9.0 / 40;
    static const double a41 = 44.0 / 45, a42 = -56.0 / 15, a43 = 32.0 / 9;
    static const double a51 = 19372.0 / 6561, a52 = -25360.0 / 2187, a53 = 64448.0 / 6561,
                        a54 = -212.0 / 729;
    static const double a61 = 9017.0 / 3168, a62 = -355.0 / 33, a63 = 46732.0 / 5247,
                        a64 = 49.0 / 176, a65 = -5103.0 / 18656;
    static const double b1 = 35.0 / 384, b3 = 500.0 / 1113, b4 = 125.0 / 192,
                        b5 = -2187.0 / 6784, b6 = 11.0 / 84;
    static const double e1 = b1 - 5179.0 / 57600, e3 = b3 - 7571.0 / 16695, e4 = b4 - 393.0 / 640,
                        e5 = b5 + 92097.0 / 339200, e6 = b6 - 187.0 / 2100, e7 = -1.0 / 40;

    const double span = t1 - t0;
    if (!(span > 0.0)) throw Error("bad_window", "t_end must exceed t_start");
    const std::complex<double> mi(0.0, -1.0);

    const Eigen::Index dim = y.size();
    Eigen::VectorXcd k1(dim), k2(dim), k3(dim), k4(dim), k5(dim), k6(dim), k7(dim);
    Eigen::VectorXcd ytmp(dim), ynew(dim), err(dim), hy(dim);

    const auto rhs = [&](double t, const Eigen::VectorXcd& in, Eigen::VectorXcd& out) {
        apply_h(t, in, hy);
        out = mi * hy;
    };

    double t = t0;
    sampler.record(t, y);
    double next_stop = std::min(t1, sampler.next_time());

    rhs(t, y, k1);
    long accepted = 0, rejected = 0;
    const long max_steps = 200000000L;
    double h_prop = std::min({span, max_step, 0.1 / rate_scale});

    while (t < t1) {
        if (accepted + rejected > max_steps) {
            throw NumericalFailure("step budget exhausted (stiffness?) at t = " +
                                   std::to_string(t));
        }
        if (next_stop <= t) next_stop = std::min(t1, sampler.next_time());
        const double reach = std::min(next_stop, t1);
        double h = std::min({h_prop, max_step, reach - t});
        const bool clamped = h < h_prop;
        if (!(h > 0.0) || t + h == t) {
            throw NumericalFailure("step size underflow at t = " + std::to_string(t));
        }

        ytmp = y + h * (a21 * k1);
        rhs(t + c2 * h, ytmp, k2);
        ytmp = y + h * (a31 * k1 + a32 * k2);
        rhs(t + c3 * h, ytmp, k3);
        ytmp = y + h * (a41 * k1 + a42 * k2 + a43 * k3);
        rhs(t + c4 * h, ytmp, k4);
        ytmp = y + h * (a51 * k1 + a52 * k2 + a53 * k3 + a54 * k4);
        rhs(t + c5 * h, ytmp, k5);
        ytmp = y + h * (a61 * k1 + a62 * k2 + a63 * k3 + a64 * k4 + a65 * k5);
        rhs(t + h, ytmp, k6);
        ynew = y + h * (b1 * k1 + b3 * k3 + b4 * k4 + b5 * k5 + b6 * k6);
        rhs(t + h, ynew, k7);
        err = h * (e1 * k1 + e3 * k3 + e4 * k4 + e5 * k5 + e6 * k6 + e7 * k7);

        const double scale = (1e-14 + rel_tol * std::max(1.0, y.norm())) * (h / span);
        const double ratio = err.norm() / scale;
        const double grow = std::min(5.0, std::max(0.2, 0.9 * std::pow(std::max(ratio, 1e-10), -0.2)));
        if (ratio <= 1.0) {
            t += h;
            y.swap(ynew);
            k1.swap(k7);  // first-same-as-last
            ++accepted;
            sampler.record(t, y);
            if (clamped) {
                h_prop = std::max(h_prop, h * grow);
            } else {
                h_prop = h * grow;
            }
        } else {
            ++rejected;
            h_prop = h * grow;
        }
    }
    return {accepted, rejected};
}

struct NullSampler {
    double next_time() const { return std::numeric_limits<double>::infinity(); }
    void record(double, const Eigen::VectorXcd&) {}
};

}  // namespace detail

}  // namespace cavityqc

#endif
