#include "cavityqc/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <random>

#include "cavityqc/errors.hpp"

namespace cavityqc {

namespace {

constexpr Complex kI{0.0, 1.0};

// Maximizes f(a) = Re sum_v S_v e^{i a v} over a in (-pi, pi]. The v are
// small integers; with a single harmonic the maximum is analytic, otherwise a
// dense grid plus golden-section refinement is used.
double maximize_harmonics(const std::map<int, Complex>& sums) {
    std::map<int, Complex> active;
    for (const auto& [v, s] : sums) {
        if (v != 0 && std::abs(s) > 0.0) active[v] = s;
    }
    if (active.empty()) return 0.0;
    if (active.size() == 1) {
        const auto& [v, s] = *active.begin();
        return -std::arg(s) / v;
    }
    const auto value = [&](double a) {
        double acc = 0.0;
        for (const auto& [v, s] : active) acc += (s * std::exp(kI * (a * v))).real();
        return acc;
    };
    const int grid = 720;
    double best_a = 0.0, best = value(0.0);
    for (int k = 1; k < grid; ++k) {
        const double a = -M_PI + 2.0 * M_PI * k / grid;
        const double f = value(a);
        if (f > best) {
            best = f;
            best_a = a;
        }
    }
    // Golden-section refinement around the best grid point, then Newton
    // polish on the trig polynomial (analytic derivatives).
    const double phi = 0.5 * (std::sqrt(5.0) - 1.0);
    double lo = best_a - 2.0 * M_PI / grid, hi = best_a + 2.0 * M_PI / grid;
    double x1 = hi - phi * (hi - lo), x2 = lo + phi * (hi - lo);
    double f1 = value(x1), f2 = value(x2);
    for (int it = 0; it < 40; ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = value(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = value(x1);
        }
    }
    // Newton polish on the analytic gradient: objective comparisons are flat
    // to machine epsilon near the maximum, the gradient is not.
    double x = 0.5 * (lo + hi);
    for (int it = 0; it < 8; ++it) {
        Complex d1 = 0.0, d2 = 0.0;
        for (const auto& [v, s] : active) {
            const Complex e = s * std::exp(kI * (x * v));
            d1 += kI * static_cast<double>(v) * e;
            d2 -= static_cast<double>(v) * static_cast<double>(v) * e;
        }
        const double g = d1.real(), h = d2.real();
        if (h >= 0.0) break;
        const double step = std::clamp(-g / h, -0.5, 0.5);
        x += step;
        if (std::abs(step) < 1e-15) break;
    }
    return x;
}

struct FitWorkspace {
    const Eigen::MatrixXcd& target;
    const Eigen::MatrixXcd& raw;
    const std::vector<PhaseGenerator>& out_gens;
    const std::vector<PhaseGenerator>& in_gens;

    Eigen::MatrixXcd phased(const PhaseFit& fit) const {
        return apply_phase_fit(raw, fit, out_gens, in_gens);
    }

    Complex inner(const PhaseFit& fit) const {
        // <target, cleaned> with the global phase excluded.
        Eigen::MatrixXcd c = phased(fit);
        c *= std::exp(-kI * fit.global);
        return (target.conjugate().cwiseProduct(c)).sum();
    }

    double objective(const PhaseFit& fit) const {
        return (std::exp(kI * fit.global) * inner(fit)).real();
    }
};

PhaseFit ascend(const FitWorkspace& ws, PhaseFit fit, int max_sweeps) {
    const Eigen::Index rows = ws.raw.rows();
    const Eigen::Index cols = ws.raw.cols();
    for (int sweep = 0; sweep < max_sweeps; ++sweep) {
        double movement = 0.0;

        // Global phase: exact update.
        Complex inner = ws.inner(fit);
        const double new_global = -std::arg(inner);
        movement = std::max(movement, std::abs(new_global - fit.global));
        fit.global = new_global;

        // Output-side generators.
        for (std::size_t a = 0; a < ws.out_gens.size(); ++a) {
            Eigen::MatrixXcd current = ws.phased(fit);
            std::map<int, Complex> sums;
            for (Eigen::Index j = 0; j < rows; ++j) {
                const int v = static_cast<int>(std::lround(ws.out_gens[a].values(j)));
                Complex acc = 0.0;
                for (Eigen::Index k = 0; k < cols; ++k) {
                    acc += std::conj(ws.target(j, k)) * current(j, k);
                }
                sums[v] += acc;
            }
            // Remove this coordinate's existing contribution per harmonic.
            std::map<int, Complex> base;
            for (auto& [v, s] : sums) base[v] = s * std::exp(-kI * (fit.out_phases[a] * v));
            const double next = maximize_harmonics(base);
            movement = std::max(movement, std::abs(next - fit.out_phases[a]));
            fit.out_phases[a] = next;
        }

        // Input-side generators.
        for (std::size_t b = 0; b < ws.in_gens.size(); ++b) {
            Eigen::MatrixXcd current = ws.phased(fit);
            std::map<int, Complex> sums;
            for (Eigen::Index k = 0; k < cols; ++k) {
                const int v = static_cast<int>(std::lround(ws.in_gens[b].values(k)));
                Complex acc = 0.0;
                for (Eigen::Index j = 0; j < rows; ++j) {
                    acc += std::conj(ws.target(j, k)) * current(j, k);
                }
                sums[v] += acc;
            }
            std::map<int, Complex> base;
            for (auto& [v, s] : sums) base[v] = s * std::exp(-kI * (fit.in_phases[b] * v));
            const double next = maximize_harmonics(base);
            movement = std::max(movement, std::abs(next - fit.in_phases[b]));
            fit.in_phases[b] = next;
        }

        fit.sweeps = sweep + 1;
        if (movement < 1e-14) break;
    }
    fit.objective = ws.objective(fit);
    return fit;
}

double gradient_norm(const FitWorkspace& ws, const PhaseFit& fit) {
    // dJ/d(phase) = Re[ i * sum of (generator value weighted) entries ].
    const Eigen::MatrixXcd current = ws.phased(fit);
    const Eigen::MatrixXcd w = ws.target.conjugate().cwiseProduct(current);
    double norm2 = 0.0;
    const double dg = (kI * w.sum()).real();
    norm2 += dg * dg;
    for (const auto& gen : ws.out_gens) {
        Complex acc = 0.0;
        for (Eigen::Index j = 0; j < w.rows(); ++j) {
            acc += gen.values(j) * w.row(j).sum();
        }
        const double d = (kI * acc).real();
        norm2 += d * d;
    }
    for (const auto& gen : ws.in_gens) {
        Complex acc = 0.0;
        for (Eigen::Index k = 0; k < w.cols(); ++k) {
            acc += gen.values(k) * w.col(k).sum();
        }
        const double d = (kI * acc).real();
        norm2 += d * d;
    }
    return std::sqrt(norm2);
}

}  // namespace

Eigen::MatrixXcd apply_phase_fit(const Eigen::MatrixXcd& raw, const PhaseFit& fit,
                                 const std::vector<PhaseGenerator>& out_gens,
                                 const std::vector<PhaseGenerator>& in_gens) {
    Eigen::MatrixXcd m = raw;
    for (std::size_t a = 0; a < out_gens.size(); ++a) {
        for (Eigen::Index j = 0; j < m.rows(); ++j) {
            m.row(j) *= std::exp(kI * (fit.out_phases[a] * out_gens[a].values(j)));
        }
    }
    for (std::size_t b = 0; b < in_gens.size(); ++b) {
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
            m.col(k) *= std::exp(kI * (fit.in_phases[b] * in_gens[b].values(k)));
        }
    }
    return std::exp(kI * fit.global) * m;
}

PhaseFit fit_phases(const Eigen::MatrixXcd& target, const Eigen::MatrixXcd& raw,
                    const std::vector<PhaseGenerator>& out_gens,
                    const std::vector<PhaseGenerator>& in_gens, double grad_tol) {
    if (target.rows() != raw.rows() || target.cols() != raw.cols()) {
        throw LayoutMismatch("phase fit requires matching matrix shapes");
    }
    FitWorkspace ws{target, raw, out_gens, in_gens};

    PhaseFit best;
    best.out_phases.assign(out_gens.size(), 0.0);
    best.in_phases.assign(in_gens.size(), 0.0);
    best = ascend(ws, best, 200);

    std::mt19937 rng(20240811);
    std::uniform_real_distribution<double> u(-M_PI, M_PI);
    for (int start = 0; start < 8; ++start) {
        PhaseFit trial;
        trial.out_phases.resize(out_gens.size());
        trial.in_phases.resize(in_gens.size());
        for (auto& p : trial.out_phases) p = u(rng);
        for (auto& p : trial.in_phases) p = u(rng);
        trial = ascend(ws, trial, 200);
        if (trial.objective > best.objective) best = trial;
    }

    best.gradient_norm = gradient_norm(ws, best);
    const double scale = target.cwiseAbs().sum();
    if (best.gradient_norm > grad_tol * std::max(1.0, scale) * 1e4) {
        throw OptimizationFailure("phase fit did not converge: gradient norm " +
                                  std::to_string(best.gradient_norm));
    }
    return best;
}

namespace {

std::vector<PhaseGenerator> qubit_generators(int qubits, int dim) {
    std::vector<PhaseGenerator> gens;
    for (int q = 0; q < qubits; ++q) {
        PhaseGenerator g;
        g.name = "qubit" + std::to_string(q);
        g.values.resize(dim);
        for (int k = 0; k < dim; ++k) g.values(k) = (k >> (qubits - 1 - q)) & 1;
        gens.push_back(std::move(g));
    }
    return gens;
}

}  // namespace

GateMatrix phase_cleanup(const GateMatrix& g, const Eigen::MatrixXcd& target_shape,
                         double grad_tol) {
    if (g.raw.rows() != target_shape.rows() || g.raw.cols() != target_shape.cols()) {
        throw LayoutMismatch("cleanup target shape does not match the gate dimension");
    }
    GateMatrix out = g;
    const int dim = static_cast<int>(g.raw.rows());
    const auto gens = qubit_generators(g.qubits, dim);
    PhaseFit fit = fit_phases(target_shape, g.raw, gens, gens, grad_tol);
    Eigen::MatrixXcd cleaned = apply_phase_fit(g.raw, fit, gens, gens);

    // Pin the first row's phase: make the largest entry of row 0 real positive.
    Eigen::Index kmax = 0;
    cleaned.row(0).cwiseAbs().maxCoeff(&kmax);
    const double pin = std::arg(cleaned(0, kmax) * std::conj(target_shape(0, kmax)));
    cleaned *= std::exp(-kI * pin);
    fit.global -= pin;

    out.cleaned = std::move(cleaned);
    out.global_phase = fit.global;
    out.out_qubit_phases = fit.out_phases;
    out.in_qubit_phases = fit.in_phases;

    // Surviving antidiagonal phase pattern of the C-NOT support: lambda.
    if (dim == 4) {
        const double a01 = std::abs(target_shape(0, 1)), a10 = std::abs(target_shape(1, 0));
        const double a22 = std::abs(target_shape(2, 2)), a33 = std::abs(target_shape(3, 3));
        if (a01 > 0.5 && a10 > 0.5 && a22 > 0.5 && a33 > 0.5) {
            const auto& c = out.cleaned;
            const double lambda = 0.25 * (-std::arg(c(0, 1)) + std::arg(c(1, 0)) +
                                          std::arg(c(2, 2)) - std::arg(c(3, 3)));
            out.residual_params["lambda"] = lambda;
        }
    }
    return out;
}

FidelityReport fidelity(const GateMatrix& g, const Eigen::MatrixXcd& target) {
    const Eigen::MatrixXcd& c = g.cleaned.size() > 0 ? g.cleaned : g.raw;
    if (c.rows() != target.rows() || c.cols() != target.cols()) {
        throw LayoutMismatch("fidelity target dimension mismatch");
    }
    FidelityReport report;
    const double d = static_cast<double>(target.rows());
    const Complex tr = (target.adjoint() * c).trace();
    report.process_fidelity = std::norm(tr) / (d * d);
    report.max_element_deviation = (c - target).cwiseAbs().maxCoeff();

    report.truth_table.resize(target.cols());
    for (Eigen::Index k = 0; k < target.cols(); ++k) {
        Eigen::Index jmax = 0;
        target.col(k).cwiseAbs().maxCoeff(&jmax);
        report.truth_table(k) = std::norm(c(jmax, k));
    }
    report.min_truth_table = report.truth_table.minCoeff();
    return report;
}

double gauge_fixed_fidelity(const StateVector& state, const StateVector& reference) {
    if (state.layout() != reference.layout()) {
        throw LayoutMismatch("gauge-fixed fidelity requires identical layouts");
    }
    const auto& layout = state.layout();
    const int dim = layout.dimension();

    // z_b = conj(ref_b) psi_b; fidelity = max_phases |sum z_b e^{i phases}|^2.
    Eigen::VectorXcd z(dim);
    for (int b = 0; b < dim; ++b) {
        z(b) = std::conj(reference.amplitudes()(b)) * state.amplitudes()(b);
    }

    std::vector<PhaseGenerator> gens;
    for (std::size_t c = 0; c < layout.cavities().size(); ++c) {
        PhaseGenerator g;
        g.name = "cavity:" + layout.cavities()[c].label;
        g.values.resize(dim);
        for (int b = 0; b < dim; ++b) {
            g.values(b) = (b / layout.cavity_stride(static_cast<int>(c))) %
                          layout.cavities()[c].fock_cutoff;
        }
        gens.push_back(std::move(g));
    }
    for (std::size_t a = 0; a < layout.atoms().size(); ++a) {
        for (AtomLevel level : {AtomLevel::G, AtomLevel::E}) {
            PhaseGenerator g;
            g.name = "atom:" + layout.atoms()[a] + ":" + to_char(level);
            g.values.resize(dim);
            for (int b = 0; b < dim; ++b) {
                const int l = (b / layout.atom_stride(static_cast<int>(a))) % kAtomLevels;
                g.values(b) = l == static_cast<int>(level) ? 1.0 : 0.0;
            }
            gens.push_back(std::move(g));
        }
    }

    const auto amplitude = [&](const std::vector<double>& phases) {
        Complex acc = 0.0;
        for (int b = 0; b < dim; ++b) {
            double phase = 0.0;
            for (std::size_t a = 0; a < gens.size(); ++a) phase += phases[a] * gens[a].values(b);
            acc += z(b) * std::exp(kI * phase);
        }
        return acc;
    };

    const auto ascend_state = [&](std::vector<double> phases) {
        double previous = -1.0;
        for (int sweep = 0; sweep < 120; ++sweep) {
            for (std::size_t a = 0; a < gens.size(); ++a) {
                std::map<int, Complex> sums;
                for (int b = 0; b < dim; ++b) {
                    double phase = 0.0;
                    for (std::size_t o = 0; o < gens.size(); ++o) {
                        if (o != a) phase += phases[o] * gens[o].values(b);
                    }
                    sums[static_cast<int>(std::lround(gens[a].values(b)))] +=
                        z(b) * std::exp(kI * phase);
                }
                // Maximize |S_0 + sum_v e^{iav} S_v| over a: reduce to Re
                // maximization against the optimal global phase each pass.
                const auto value = [&](double alpha) {
                    Complex acc = 0.0;
                    for (const auto& [v, s] : sums) acc += s * std::exp(kI * (alpha * v));
                    return std::abs(acc);
                };
                const int grid = 720;
                double best_a = phases[a], best = value(phases[a]);
                for (int k = 0; k < grid; ++k) {
                    const double alpha = -M_PI + 2.0 * M_PI * k / grid;
                    const double f = value(alpha);
                    if (f > best) {
                        best = f;
                        best_a = alpha;
                    }
                }
                const double step = 2.0 * M_PI / grid;
                double lo = best_a - step, hi = best_a + step;
                for (int it = 0; it < 70; ++it) {
                    const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
                    if (value(m1) < value(m2)) {
                        lo = m1;
                    } else {
                        hi = m2;
                    }
                }
                phases[a] = 0.5 * (lo + hi);
            }
            const double f = std::abs(amplitude(phases));
            if (f - previous < 1e-14) break;
            previous = f;
        }
        return std::make_pair(phases, std::norm(amplitude(phases)));
    };

    auto [phases, best] = ascend_state(std::vector<double>(gens.size(), 0.0));
    std::mt19937 rng(777);
    std::uniform_real_distribution<double> u(-M_PI, M_PI);
    for (int start = 0; start < 4; ++start) {
        std::vector<double> p(gens.size());
        for (auto& x : p) x = u(rng);
        const auto [pp, f] = ascend_state(std::move(p));
        if (f > best) best = f;
    }
    return best;
}

namespace targets {

Eigen::MatrixXcd identity(int dim) { return Eigen::MatrixXcd::Identity(dim, dim); }

Eigen::MatrixXcd not_phase(double theta) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(2, 2);
    m(0, 1) = std::exp(Complex(0.0, -theta));
    m(1, 0) = std::exp(Complex(0.0, theta));
    return m;
}

Eigen::MatrixXcd hadamard_phase(double theta) {
    Eigen::MatrixXcd m(2, 2);
    const double s = 1.0 / std::sqrt(2.0);
    m << s, s * std::exp(Complex(0.0, -theta)), s * std::exp(Complex(0.0, theta)), -s;
    return m;
}

Eigen::MatrixXcd cnot_inv(double lambda) {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
    m(0, 1) = std::exp(Complex(0.0, -lambda));
    m(1, 0) = std::exp(Complex(0.0, lambda));
    m(2, 2) = std::exp(Complex(0.0, lambda));
    m(3, 3) = std::exp(Complex(0.0, -lambda));
    return m;
}

Eigen::MatrixXcd cnot() {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Zero(4, 4);
    m(0, 0) = 1.0;
    m(1, 1) = 1.0;
    m(2, 3) = 1.0;
    m(3, 2) = 1.0;
    return m;
}

Eigen::MatrixXcd qpg() {
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(4, 4);
    m(3, 3) = -1.0;
    return m;
}

Eigen::MatrixXcd toffoli(int qubits) {
    const int dim = 1 << qubits;
    Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(dim, dim);
    m(dim - 2, dim - 2) = 0.0;
    m(dim - 1, dim - 1) = 0.0;
    m(dim - 2, dim - 1) = 1.0;
    m(dim - 1, dim - 2) = 1.0;
    return m;
}

}  // namespace targets

}  // namespace cavityqc
