#include <algorithm>
#include <cmath>
#include <future>

#include "cavityqc/errors.hpp"
#include "cavityqc/protocol.hpp"

namespace cavityqc {

std::string to_string(PulseKind kind) {
    switch (kind) {
        case PulseKind::DressedPi: return "dressed-pi";
        case PulseKind::DressedHalfPi: return "dressed-half-pi";
        case PulseKind::ResonantRabi: return "resonant-rabi";
        case PulseKind::StarkGate: return "stark-gate";
        case PulseKind::Idle: return "idle";
    }
    return "?";
}

namespace {

double adaptive_simpson(const std::function<double(double)>& f, double a, double b, double fa,
                        double fm, double fb, double whole, double tol, int depth) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    if (depth <= 0 || std::abs(left + right - whole) < 15.0 * tol) {
        return left + right + (left + right - whole) / 15.0;
    }
    return adaptive_simpson(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
           adaptive_simpson(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
}

double integrate(const std::function<double(double)>& f, double a, double b, double tol) {
    const double fa = f(a), fb = f(b), fm = f(0.5 * (a + b));
    const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    return adaptive_simpson(f, a, b, fa, fm, fb, whole, tol, 28);
}

}  // namespace

Eigen::VectorXcd adiabatic_undo_diagonal(const CavityVisit& visit, int cutoff) {
    Eigen::VectorXcd diag = Eigen::VectorXcd::Ones(kAtomLevels * cutoff);
    const double delta = visit.delta_eff;
    if (delta == 0.0) return diag;
    if (delta < 0.0) {
        throw Error("bad_visit", "adiabatic phase bookkeeping assumes delta_eff >= 0");
    }
    const CouplingProfile coupling{visit.omega0, visit.tau, 0.0};
    const double t0 = visit.t_start(), t1 = visit.t_end();
    const double span = t1 - t0;
    const double abs_tol = 1e-13 * std::max(1.0, 0.5 * delta * span);

    std::vector<double> sector_integral(cutoff, 0.0);  // integral of R_k over the window
    for (int k = 0; k + 1 < cutoff; ++k) {
        sector_integral[k] = integrate(
            [&](double t) {
                const double g = coupling.value(t) * std::sqrt(static_cast<double>(k + 1));
                return std::sqrt(0.25 * delta * delta + g * g);
            },
            t0, t1, abs_tol * std::max(1.0, 0.5 * delta * span));
    }

    const Complex i1{0.0, 1.0};
    const auto p = [cutoff](AtomLevel l, int n) { return static_cast<int>(l) * cutoff + n; };
    for (int n = 0; n < cutoff; ++n) {
        // (g,0) stays bare at -delta/2; (g,n>=1) follows the lower branch of
        // sector n-1; (e,n) the upper branch of sector n (bare +delta/2 at the
        // truncation edge); level i carries no energy in this frame.
        double phase_g = n == 0 ? -0.5 * delta * span : -sector_integral[n - 1];
        double phase_e = n + 1 < cutoff ? sector_integral[n] : 0.5 * delta * span;
        diag(p(AtomLevel::G, n)) = std::exp(i1 * phase_g);
        diag(p(AtomLevel::E, n)) = std::exp(i1 * phase_e);
    }
    return diag;
}

namespace detail {

PairHamiltonian visit_hamiltonian(const CavityVisit& visit) {
    PairHamiltonian h;
    h.atom = visit.atom;
    h.cavity = visit.cavity;
    h.coupling = {visit.omega0, visit.tau, 0.0};
    h.detuning = {visit.delta_eff, 0.0, std::nullopt};
    h.drives = visit.drives;
    h.dressed_drives = visit.dressed_drives;
    h.carrier_omega = visit.carrier_omega;
    return h;
}

EvolveResult run_visit(const CavityVisit& visit, const StateVector& state, double rel_tol,
                       const TraceRequest* trace) {
    StateVector work = state;
    const auto& layout = work.layout();
    const int cutoff = layout.cavities()[layout.cavity_index(visit.cavity)].fock_cutoff;

    if (visit.pre_correction.size() > 0) {
        apply_pair_diagonal(work, visit.atom, visit.cavity, visit.pre_correction);
    }

    const CompiledPairHamiltonian ham(layout, visit_hamiltonian(visit));
    EvolutionWindow window;
    window.t_start = visit.t_start();
    window.t_end = visit.t_end();
    window.rel_tol = rel_tol;
    double envelope_scale = visit.tau;
    for (const auto& d : visit.drives) envelope_scale = std::min(envelope_scale, d.tau_s);
    for (const auto& d : visit.dressed_drives) envelope_scale = std::min(envelope_scale, d.tau_s);
    window.max_step = envelope_scale / 50.0;
    if (trace) window.record = *trace;

    EvolveResult result = evolve(work, ham, window);

    const Eigen::VectorXcd undo = adiabatic_undo_diagonal(visit, cutoff);
    apply_pair_diagonal(result.state, visit.atom, visit.cavity, undo);
    if (visit.post_correction.size() > 0) {
        apply_pair_diagonal(result.state, visit.atom, visit.cavity, visit.post_correction);
    }
    return result;
}

Eigen::MatrixXcd fragment_matrix(const CavityVisit& visit, const FragmentSpec& spec,
                                 double rel_tol, int cutoff) {
    // Pair-only layout carrying just this visit's cavity and atom.
    const SystemLayout layout({{visit.cavity, cutoff, 0.0}}, {visit.atom});
    const int n = static_cast<int>(spec.subset.size());
    Eigen::MatrixXcd u(n, n);
    for (int col = 0; col < n; ++col) {
        const auto [level, photons] = spec.subset[col];
        const auto in = StateVector::basis_state(layout, {{photons}, {level}});
        const auto out = run_visit(visit, in, rel_tol);
        for (int row = 0; row < n; ++row) {
            const auto [l2, n2] = spec.subset[row];
            u(row, col) = out.state.amplitudes()(layout.index_of({{n2}, {l2}}));
        }
    }
    return u;
}

FragmentCorrection solve_fragment_correction(const CavityVisit& visit, const FragmentSpec& spec,
                                             const PhysicalParams& params) {
    const int n = static_cast<int>(spec.subset.size());
    const Eigen::MatrixXcd raw = fragment_matrix(visit, spec, params.rel_tol, params.fock_cutoff);

    // One phase per populated (level, photon) state per side: the corrections
    // are pair diagonals, the same class of object as the adiabatic-phase
    // undo, so nothing restricts them to product (atom) x (cavity) form.
    std::vector<PhaseGenerator> gens;
    for (int k = 0; k < n; ++k) {
        PhaseGenerator g;
        g.name = std::string(1, to_char(spec.subset[k].first)) + "," +
                 std::to_string(spec.subset[k].second);
        g.values = Eigen::VectorXd::Zero(n);
        g.values(k) = 1.0;
        gens.push_back(std::move(g));
    }

    const PhaseFit fit = fit_phases(spec.target, raw, gens, gens, 1e-10);

    FragmentCorrection correction;
    const int cutoff = params.fock_cutoff;
    correction.pre = Eigen::VectorXcd::Ones(kAtomLevels * cutoff);
    correction.post = Eigen::VectorXcd::Ones(kAtomLevels * cutoff);
    const Complex i1{0.0, 1.0};
    for (int k = 0; k < n; ++k) {
        const int p = static_cast<int>(spec.subset[k].first) * cutoff + spec.subset[k].second;
        correction.pre(p) = std::exp(i1 * fit.in_phases[k]);
        correction.post(p) = std::exp(i1 * fit.out_phases[k]);
    }
    // Fold the global phase into the post-correction uniformly.
    correction.post *= std::exp(i1 * fit.global);
    correction.fit_error = (apply_phase_fit(raw, fit, gens, gens) - spec.target).norm();
    return correction;
}

}  // namespace detail

namespace {

struct ExecContext {
    const ExecutionOptions& options;
    int visit_counter = 0;
    TraceLog trace;
};

Eigen::Matrix3cd embed_two_level(const AtomRotation& rotation) {
    Eigen::Matrix3cd u = Eigen::Matrix3cd::Identity();
    const int a = static_cast<int>(rotation.a);
    const int b = static_cast<int>(rotation.b);
    u(a, a) = rotation.u(0, 0);
    u(a, b) = rotation.u(0, 1);
    u(b, a) = rotation.u(1, 0);
    u(b, b) = rotation.u(1, 1);
    return u;
}

// Projects one atom on a level and removes it from the composite; returns the
// branch probability.
std::pair<StateVector, double> project_atom_level(const StateVector& state,
                                                  const std::string& label, AtomLevel level) {
    const auto& layout = state.layout();
    const int stride = layout.atom_stride(layout.atom_index(label));
    const SystemLayout reduced = layout.without_atom(label);
    Eigen::VectorXcd out(reduced.dimension());
    const auto& amp = state.amplitudes();
    const int block = kAtomLevels * stride;
    int k = 0;
    for (int high = 0; high < layout.dimension() / block; ++high) {
        const int base = high * block + static_cast<int>(level) * stride;
        for (int low = 0; low < stride; ++low) out(k++) = amp(base + low);
    }
    const double p = out.squaredNorm();
    if (p > 0.0) out /= std::sqrt(p);
    return {StateVector::unchecked(reduced, std::move(out)), p};
}

void run_sequence(const std::vector<ScheduleItem>& items, std::size_t pos, StateVector state,
                  BranchResult partial, ExecContext& ctx, std::vector<BranchResult>& out) {
    for (std::size_t i = pos; i < items.size(); ++i) {
        const auto& item = items[i];
        if (std::holds_alternative<CavityVisit>(item.v)) {
            const auto& visit = std::get<CavityVisit>(item.v);
            const bool traced = ctx.visit_counter == ctx.options.trace_visit;
            const EvolveResult r = detail::run_visit(
                visit, state, ctx.options.rel_tol,
                traced ? &ctx.options.trace_request : nullptr);
            if (traced) ctx.trace = r.trace;
            partial.steps += r.steps;
            state = r.state;
            ++ctx.visit_counter;
        } else if (std::holds_alternative<AtomRotation>(item.v)) {
            const auto& rotation = std::get<AtomRotation>(item.v);
            apply_atom_unitary(state, rotation.atom, embed_two_level(rotation));
        } else if (std::holds_alternative<InjectAtom>(item.v)) {
            const auto& inject = std::get<InjectAtom>(item.v);
            state = inject_atom(state, inject.atom, inject.level);
        } else if (std::holds_alternative<RetireAtomItem>(item.v)) {
            const auto& retire = std::get<RetireAtomItem>(item.v);
            RetiredAtom result = retire_atom(state, retire.atom);
            if (result.purity < ctx.options.min_retire_purity) {
                throw EntanglementResidue("atom '" + retire.atom + "' retires with purity " +
                                          std::to_string(result.purity));
            }
            if (retire.expected && result.level != *retire.expected) {
                throw Error("unexpected_exit_level",
                            "atom '" + retire.atom + "' exits in level '" +
                                std::string(1, to_char(result.level)) + "'");
            }
            partial.retired.push_back(
                {retire.atom, result.level, result.purity, result.projection_loss});
            state = std::move(result.state);
        } else if (std::holds_alternative<Checkpoint>(item.v)) {
            if (ctx.options.capture_checkpoints) {
                partial.checkpoints.emplace(std::get<Checkpoint>(item.v).name, state);
            }
        } else {
            const auto& measure = std::get<MeasureAtom>(item.v);
            for (AtomLevel level : {AtomLevel::G, AtomLevel::E}) {
                auto [projected, p] = project_atom_level(state, measure.atom, level);
                if (p < 1e-12) continue;
                BranchResult next = partial;
                next.outcomes += to_char(level);
                next.probability *= p;
                const auto& branch_items =
                    level == AtomLevel::G ? measure.if_g : measure.if_e;
                std::vector<ScheduleItem> continuation = branch_items;
                continuation.insert(continuation.end(), items.begin() + i + 1, items.end());
                run_sequence(continuation, 0, projected, std::move(next), ctx, out);
            }
            return;
        }
    }
    partial.state = std::move(state);
    out.push_back(std::move(partial));
}

}  // namespace

ExecutionResult execute(const Schedule& schedule, const StateVector& initial,
                        const ExecutionOptions& options) {
    if (initial.layout() != schedule.layout) {
        throw LayoutMismatch("initial state must live on the schedule's cavity layout");
    }
    ExecContext ctx{options, 0, {}};
    ExecutionResult result;
    BranchResult seed;
    seed.state = initial;
    run_sequence(schedule.items, 0, initial, std::move(seed), ctx, result.branches);
    result.trace = std::move(ctx.trace);
    return result;
}

StateVector logical_basis_state(const Schedule& schedule, int bits) {
    const auto& layout = schedule.layout;
    BasisLabel label;
    label.fock.assign(layout.cavities().size(), 0);
    const int m = static_cast<int>(schedule.logical_cavities.size());
    for (int q = 0; q < m; ++q) {
        const int bit = (bits >> (m - 1 - q)) & 1;
        label.fock[layout.cavity_index(schedule.logical_cavities[q])] = bit;
    }
    return StateVector::basis_state(layout, label);
}

GateMatrix extract_gate(const Schedule& schedule, const ExecutionOptions& options, int jobs) {
    const int m = static_cast<int>(schedule.logical_cavities.size());
    const int dim = 1 << m;
    GateMatrix gate;
    gate.dimension = dim;
    gate.qubits = m;
    gate.raw.resize(dim, dim);
    gate.column_leak.resize(dim);

    ExecutionOptions run_options = options;
    run_options.capture_checkpoints = false;
    run_options.trace_visit = -1;

    struct Column {
        Eigen::VectorXcd amplitudes;
        double leak;
        std::vector<double> purities;
    };
    const auto run_column = [&](int bits) {
        const auto initial = logical_basis_state(schedule, bits);
        const ExecutionResult result = execute(schedule, initial, run_options);
        if (result.branches.size() != 1) {
            throw Error("branching_gate", "gate extraction requires a measurement-free schedule");
        }
        const auto& final_state = result.branches[0].state;
        Column column;
        column.amplitudes.resize(dim);
        for (int out = 0; out < dim; ++out) {
            BasisLabel label;
            label.fock.assign(schedule.layout.cavities().size(), 0);
            for (int q = 0; q < m; ++q) {
                label.fock[schedule.layout.cavity_index(schedule.logical_cavities[q])] =
                    (out >> (m - 1 - q)) & 1;
            }
            column.amplitudes(out) = final_state.amplitudes()(schedule.layout.index_of(label));
        }
        column.leak = 1.0 - column.amplitudes.squaredNorm();
        for (const auto& record : result.branches[0].retired) {
            column.purities.push_back(record.purity);
        }
        return column;
    };

    std::vector<Column> columns(dim);
    if (jobs > 1) {
        std::vector<std::future<Column>> futures(dim);
        for (int k = 0; k < dim; ++k) futures[k] = std::async(std::launch::async, run_column, k);
        for (int k = 0; k < dim; ++k) columns[k] = futures[k].get();
    } else {
        for (int k = 0; k < dim; ++k) columns[k] = run_column(k);
    }

    for (int k = 0; k < dim; ++k) {
        gate.raw.col(k) = columns[k].amplitudes;
        gate.column_leak(k) = columns[k].leak;
        for (double p : columns[k].purities) gate.atom_purities.push_back(p);
    }

    Eigen::MatrixXcd gram = gate.raw.adjoint() * gate.raw;
    gram -= Eigen::MatrixXcd::Identity(dim, dim);
    gate.unitarity_defect = gram.cwiseAbs().maxCoeff();

    for (double p : gate.atom_purities) {
        if (p < options.min_extract_purity) {
            throw EntanglementResidue("atom exits with purity " + std::to_string(p));
        }
    }
    return gate;
}

AtomSourceStats atom_source_statistics(double mean) {
    if (mean < 0.0) throw Error("bad_mean", "Poisson mean must be >= 0");
    AtomSourceStats stats;
    stats.p_exactly_one = mean * std::exp(-mean);
    stats.expected_delay_cycles = stats.p_exactly_one > 0.0
                                      ? 1.0 / stats.p_exactly_one - 1.0
                                      : std::numeric_limits<double>::infinity();
    return stats;
}

}  // namespace cavityqc
