#include <cmath>
#include <sstream>

#include "cavityqc/errors.hpp"
#include "cavityqc/format.hpp"
#include "cavityqc/protocol.hpp"

namespace cavityqc {

namespace {

Eigen::Matrix2cd hadamard_rotation() {
    Eigen::Matrix2cd h;
    const double s = 1.0 / std::sqrt(2.0);
    h << s, s, s, -s;
    return h;
}

Eigen::Matrix2cd exchange_rotation() {
    Eigen::Matrix2cd x;
    x << 0.0, 1.0, 1.0, 0.0;
    return x;
}

detail::FragmentSpec swap_fragment(const std::vector<std::pair<AtomLevel, int>>& subset, int a,
                                   int b) {
    detail::FragmentSpec spec;
    spec.subset = subset;
    const int n = static_cast<int>(subset.size());
    spec.target = Eigen::MatrixXcd::Identity(n, n);
    spec.target(a, a) = 0.0;
    spec.target(b, b) = 0.0;
    spec.target(a, b) = 1.0;
    spec.target(b, a) = 1.0;
    return spec;
}

}  // namespace

ProtocolCompiler::ProtocolCompiler(PhysicalParams params) : params_(std::move(params)) {}

ExecutionOptions ProtocolCompiler::execution_options() const {
    ExecutionOptions options;
    options.rel_tol = params_.rel_tol;
    options.min_retire_purity = params_.min_retire_purity;
    return options;
}

const CalibrationResult& ProtocolCompiler::pulse_calibration(const std::string& key) {
    if (auto it = calibrations_.find(key); it != calibrations_.end()) return it->second;

    PulseIntentSpec intent;
    double tau_s = 0.0;
    PulseArea area = PulseArea::Pi;
    if (key == "cavity-to-atom") {
        intent = {LevelRef::dressed(0, Branch::Minus), LevelRef::dressed(1, Branch::Plus),
                  "V-(0)<->V+(1)"};
        tau_s = params_.tau_s_cavity_to_atom;
    } else if (key == "atom-to-cavity") {
        intent = {LevelRef::g0(), LevelRef::dressed(0, Branch::Minus), "g0<->V-(0)"};
        tau_s = params_.tau_s_atom_to_cavity;
    } else if (key == "hadamard") {
        intent = {LevelRef::g0(), LevelRef::dressed(0, Branch::Minus), "g0<->V-(0)"};
        tau_s = params_.tau_s_atom_to_cavity;
        area = PulseArea::HalfPi;
    } else if (key == "ground-upper") {
        intent = {LevelRef::g0(), LevelRef::dressed(0, Branch::Plus), "g0<->V+(0)"};
        tau_s = params_.tau_s_ground_upper;
    } else if (key == "engineered") {
        intent = {LevelRef::g0(), LevelRef::dressed(2, Branch::Plus), "g0<->V+(2)"};
        tau_s = params_.tau_s_engineered;
    } else {
        throw Error("bad_pulse_key", "unknown pulse '" + key + "'");
    }
    auto [it, inserted] = calibrations_.emplace(key, calibrate_pulse(params_, intent, tau_s, area));
    (void)inserted;
    return it->second;
}

CavityVisit ProtocolCompiler::make_visit(const std::string& atom, const std::string& cavity,
                                         PulseKind kind, std::string intent, double omega0,
                                         double tau, double delta_eff) {
    CavityVisit visit;
    visit.atom = atom;
    visit.cavity = cavity;
    visit.kind = kind;
    visit.intent = std::move(intent);
    visit.omega0 = omega0;
    visit.tau = tau;
    visit.delta_eff = delta_eff;
    visit.carrier_omega = params_.carrier_omega;
    visit.window_half = 4.0 * tau;
    return visit;
}

const FragmentCorrection& ProtocolCompiler::fragment_correction(const std::string& key) {
    if (auto it = corrections_.find(key); it != corrections_.end()) return it->second;

    using Subset = std::vector<std::pair<AtomLevel, int>>;
    const Subset ge01 = {{AtomLevel::G, 0}, {AtomLevel::G, 1}, {AtomLevel::E, 0}, {AtomLevel::E, 1}};

    CavityVisit visit;
    detail::FragmentSpec spec;
    if (key == "cavity-to-atom") {
        const auto& cal = pulse_calibration(key);
        visit = make_visit("atom", "frag", PulseKind::DressedPi, key, params_.omega0, params_.tau,
                           params_.delta);
        visit.drives.push_back(cal.drive);
        spec = swap_fragment(ge01, 1, 3);  // |g,1> <-> |e,1>
    } else if (key == "atom-to-cavity") {
        const auto& cal = pulse_calibration(key);
        visit = make_visit("atom", "frag", PulseKind::DressedPi, key, params_.omega0, params_.tau,
                           params_.delta);
        visit.drives.push_back(cal.drive);
        spec = swap_fragment(ge01, 0, 1);  // |g,0> <-> |g,1>
    } else if (key == "hadamard") {
        // Atoms are always in g during a Hadamard-phase pulse, so the fit
        // covers only the g-levels; including the (never populated) e-levels
        // would over-constrain the photon-phase parameters.
        const auto& cal = pulse_calibration(key);
        visit = make_visit("atom", "frag", PulseKind::DressedHalfPi, key, params_.omega0,
                           params_.tau, params_.delta);
        visit.drives.push_back(cal.drive);
        spec.subset = {{AtomLevel::G, 0}, {AtomLevel::G, 1}};
        spec.target = targets::hadamard_phase(0.0);
    } else if (key == "ground-upper") {
        const auto& cal = pulse_calibration(key);
        visit = make_visit("atom", "frag", PulseKind::DressedPi, key, params_.omega0, params_.tau,
                           params_.delta);
        visit.drives.push_back(cal.drive);
        spec = swap_fragment(ge01, 0, 2);  // |g,0> <-> |e,0>
    } else if (key == "engineered") {
        const auto& cal = pulse_calibration(key);
        visit = make_visit("atom", "frag", PulseKind::DressedPi, key, params_.omega0, params_.tau,
                           params_.delta);
        visit.dressed_drives.push_back(*cal.dressed_drive);
        Subset subset = ge01;
        subset.push_back({AtomLevel::E, 2});
        spec = swap_fragment(subset, 0, 4);  // |g,0> <-> |e,2>
    } else if (key.rfind("memory-swap:", 0) == 0) {
        const double tau = std::stod(key.substr(12));
        visit = make_visit("atom", "frag", PulseKind::ResonantRabi, "memory-swap",
                           params_.memory_omega0(tau), tau, 0.0);
        spec = swap_fragment({{AtomLevel::G, 0}, {AtomLevel::G, 1}, {AtomLevel::E, 0}}, 1, 2);
    } else if (key == "qpg-crossing") {
        visit = make_visit("atom", "frag", PulseKind::ResonantRabi, "conditional-2pi",
                           params_.omega0, params_.qpg_tau(), 0.0);
        spec.subset = {{AtomLevel::I, 0}, {AtomLevel::I, 1}, {AtomLevel::G, 0}, {AtomLevel::G, 1}};
        spec.target = Eigen::MatrixXcd::Identity(4, 4);
        spec.target(3, 3) = -1.0;
    } else {
        throw Error("bad_fragment_key", "unknown fragment '" + key + "'");
    }

    auto correction = detail::solve_fragment_correction(visit, spec, params_);
    if (correction.fit_error > 0.2) {
        throw CalibrationFailure("fragment '" + key + "' correction fit error " +
                                 std::to_string(correction.fit_error));
    }
    auto [it, inserted] = corrections_.emplace(key, std::move(correction));
    (void)inserted;
    return it->second;
}

CavityVisit ProtocolCompiler::undisturbed_visit(const std::string& atom,
                                                const std::string& cavity, double tau) {
    if (params_.gate_idle_crossings) {
        return make_visit(atom, cavity, PulseKind::StarkGate, "cross-undisturbed-gated",
                          params_.omega0, tau,
                          params_.delta + params_.idle_gate_factor * params_.omega0);
    }
    return make_visit(atom, cavity, PulseKind::Idle, "cross-undisturbed", params_.omega0, tau,
                      params_.delta);
}

CavityVisit ProtocolCompiler::dressed_pulse_visit(const std::string& atom,
                                                  const std::string& cavity,
                                                  const std::string& kind_key, double phi_s) {
    const auto& cal = pulse_calibration(kind_key);
    const auto& correction = fragment_correction(kind_key);
    const PulseKind kind =
        kind_key == "hadamard" ? PulseKind::DressedHalfPi : PulseKind::DressedPi;
    CavityVisit visit =
        make_visit(atom, cavity, kind, kind_key, params_.omega0, params_.tau, params_.delta);
    if (cal.dressed_drive) {
        DressedDrive d = *cal.dressed_drive;
        d.phi = phi_s;
        visit.dressed_drives.push_back(d);
    } else {
        DriveSpec d = cal.drive;
        d.phi_s = phi_s;
        visit.drives.push_back(d);
    }
    visit.pre_correction = correction.pre;
    visit.post_correction = correction.post;
    return visit;
}

namespace {

double wrap_angle(double a) {
    while (a > M_PI) a -= 2.0 * M_PI;
    while (a <= -M_PI) a += 2.0 * M_PI;
    return a;
}

}  // namespace

double ProtocolCompiler::not_phase_slope() {
    if (auto it = slopes_.find("not"); it != slopes_.end()) return it->second;
    const double probe_phi = 0.7;
    CavityVisit visit = dressed_pulse_visit("atom", "frag", "atom-to-cavity", probe_phi);
    detail::FragmentSpec spec;
    spec.subset = {{AtomLevel::G, 0}, {AtomLevel::G, 1}};
    spec.target = targets::not_phase(0.0);
    const Eigen::MatrixXcd u =
        detail::fragment_matrix(visit, spec, params_.rel_tol, params_.fock_cutoff);
    const double theta = std::arg(u(1, 0));
    const double slope = wrap_angle(theta) / probe_phi;
    slopes_["not"] = slope;
    return slope;
}

double ProtocolCompiler::hadamard_phase_slope() {
    if (auto it = slopes_.find("hadamard"); it != slopes_.end()) return it->second;
    const double probe_phi = 0.7;
    CavityVisit visit = dressed_pulse_visit("atom", "frag", "hadamard", probe_phi);
    detail::FragmentSpec spec;
    spec.subset = {{AtomLevel::G, 0}, {AtomLevel::G, 1}};
    spec.target = targets::hadamard_phase(0.0).block(0, 0, 2, 2);
    const Eigen::MatrixXcd u =
        detail::fragment_matrix(visit, spec, params_.rel_tol, params_.fock_cutoff);
    const double slope = wrap_angle(std::arg(u(1, 0))) / probe_phi;
    slopes_["hadamard"] = slope;
    return slope;
}

Schedule ProtocolCompiler::make_schedule(std::string name, std::vector<std::string> cavities,
                                         std::vector<std::string> logical) {
    Schedule schedule;
    schedule.name = std::move(name);
    std::vector<CavitySpec> specs;
    for (const auto& label : cavities) {
        specs.push_back({label, params_.fock_cutoff, params_.carrier_omega});
    }
    std::optional<std::string> memory;
    if (!cavities.empty() && cavities.back() == "M") memory = "M";
    schedule.layout = SystemLayout(std::move(specs), {}, memory);
    schedule.logical_cavities = std::move(logical);
    return schedule;
}

void ProtocolCompiler::append_cnot_cavity_to_atom(std::vector<ScheduleItem>& items,
                                                  const std::string& atom,
                                                  const std::string& cavity) {
    items.push_back({dressed_pulse_visit(atom, cavity, "cavity-to-atom", 0.0)});
}

void ProtocolCompiler::append_cnot_atom_to_cavity(std::vector<ScheduleItem>& items,
                                                  const std::string& atom,
                                                  const std::string& cavity) {
    items.push_back({dressed_pulse_visit(atom, cavity, "atom-to-cavity", 0.0)});
}

void ProtocolCompiler::append_memory_swap(std::vector<ScheduleItem>& items,
                                          const std::string& atom, const std::string& cavity,
                                          double atom_tau) {
    const std::string key = "memory-swap:" + format_g12(atom_tau);
    const auto& correction = fragment_correction(key);
    CavityVisit visit = make_visit(atom, cavity, PulseKind::ResonantRabi, "memory-swap",
                                   params_.memory_omega0(atom_tau), atom_tau, 0.0);
    visit.pre_correction = correction.pre;
    visit.post_correction = correction.post;
    items.push_back({visit});
}

void ProtocolCompiler::append_not_pulse(std::vector<ScheduleItem>& items, const std::string& atom,
                                        const std::string& cavity, double theta) {
    const double phi_s = wrap_angle(theta / not_phase_slope());
    items.push_back({dressed_pulse_visit(atom, cavity, "atom-to-cavity", phi_s)});
}

void ProtocolCompiler::append_hadamard_pulse(std::vector<ScheduleItem>& items,
                                             const std::string& atom, const std::string& cavity,
                                             double theta_prime) {
    const double phi_s = wrap_angle(theta_prime / hadamard_phase_slope());
    items.push_back({dressed_pulse_visit(atom, cavity, "hadamard", phi_s)});
}

namespace {

ScheduleItem inject(const std::string& atom, AtomLevel level) {
    return {InjectAtom{atom, level}};
}

ScheduleItem retire(const std::string& atom, std::optional<AtomLevel> expected = std::nullopt) {
    return {RetireAtomItem{atom, expected}};
}

ScheduleItem checkpoint(std::string name) { return {Checkpoint{std::move(name)}}; }

ScheduleItem rotation(const std::string& atom, AtomLevel a, AtomLevel b,
                      const Eigen::Matrix2cd& u, std::string intent) {
    return {AtomRotation{atom, a, b, u, std::move(intent)}};
}

}  // namespace

Schedule ProtocolCompiler::cnot_inv() {
    Schedule s = make_schedule("cnot-inv", {"A", "B", "M"}, {"A", "B"});
    auto& items = s.items;
    items.push_back(inject("a1", AtomLevel::G));
    append_cnot_cavity_to_atom(items, "a1", "A");
    append_cnot_atom_to_cavity(items, "a1", "B");
    items.push_back(checkpoint("pre-mirror"));
    append_memory_swap(items, "a1", "M", params_.tau);
    items.push_back(checkpoint("mirror-released"));
    items.push_back(retire("a1", AtomLevel::G));
    items.push_back(inject("a2", AtomLevel::G));
    append_memory_swap(items, "a2", "M", params_.tau);
    items.push_back(checkpoint("mirror-absorbed"));
    items.push_back({undisturbed_visit("a2", "B", params_.tau)});
    append_cnot_cavity_to_atom(items, "a2", "A");
    items.push_back(retire("a2", AtomLevel::G));
    s.atoms_used = 2;
    return s;
}

Schedule ProtocolCompiler::cnot() {
    Schedule s = make_schedule("cnot", {"A", "B", "M"}, {"A", "B"});
    auto& items = s.items;
    items.push_back(inject("a1", AtomLevel::E));
    append_cnot_cavity_to_atom(items, "a1", "A");
    append_cnot_atom_to_cavity(items, "a1", "B");
    append_memory_swap(items, "a1", "M", params_.tau);
    items.push_back(retire("a1", AtomLevel::G));
    items.push_back(inject("a2", AtomLevel::G));
    append_memory_swap(items, "a2", "M", params_.tau);
    items.push_back({undisturbed_visit("a2", "B", params_.tau)});
    append_cnot_cavity_to_atom(items, "a2", "A");
    items.push_back(retire("a2", AtomLevel::E));
    s.atoms_used = 2;
    return s;
}

Schedule ProtocolCompiler::cnot_inv_measured() {
    Schedule s = make_schedule("cnot-inv-measured", {"A", "B"}, {"A", "B"});
    auto& items = s.items;
    items.push_back(inject("a1", AtomLevel::G));
    append_cnot_cavity_to_atom(items, "a1", "A");
    append_cnot_atom_to_cavity(items, "a1", "B");
    items.push_back(
        rotation("a1", AtomLevel::G, AtomLevel::E, hadamard_rotation(), "half-pi-before-detection"));

    MeasureAtom measure;
    measure.atom = "a1";
    // Outcome e: pi-phase fix on A with two not-phase gates.
    measure.if_e.push_back(inject("a2", AtomLevel::G));
    append_not_pulse(measure.if_e, "a2", "A", 0.5 * M_PI);
    measure.if_e.push_back(retire("a2", AtomLevel::G));
    measure.if_e.push_back(inject("a3", AtomLevel::G));
    append_not_pulse(measure.if_e, "a3", "A", 0.0);
    measure.if_e.push_back(retire("a3", AtomLevel::G));
    items.push_back({std::move(measure)});
    s.atoms_used = 3;
    return s;
}

Schedule ProtocolCompiler::qpg() {
    Schedule s = make_schedule("qpg", {"A", "B", "M"}, {"A", "B"});
    const double tau_q = params_.qpg_tau();
    const auto& crossing = fragment_correction("qpg-crossing");
    const auto resonant_visit = [&](const std::string& atom, const std::string& cavity) {
        CavityVisit visit = make_visit(atom, cavity, PulseKind::ResonantRabi, "conditional-2pi",
                                       params_.omega0, tau_q, 0.0);
        visit.pre_correction = crossing.pre;
        visit.post_correction = crossing.post;
        return ScheduleItem{visit};
    };
    const auto gated_visit = [&](const std::string& atom, const std::string& cavity) {
        return ScheduleItem{make_visit(atom, cavity, PulseKind::StarkGate, "cross-gated",
                                       params_.omega0, tau_q, params_.stark_offset())};
    };

    auto& items = s.items;
    items.push_back(inject("a1", AtomLevel::I));
    items.push_back(rotation("a1", AtomLevel::I, AtomLevel::G, hadamard_rotation(), "half-pi-1"));
    items.push_back(resonant_visit("a1", "A"));
    items.push_back(checkpoint("psi2"));
    items.push_back(rotation("a1", AtomLevel::I, AtomLevel::G, hadamard_rotation(), "half-pi-2"));
    items.push_back(checkpoint("psi2bis"));
    items.push_back(resonant_visit("a1", "B"));
    items.push_back(checkpoint("psi3"));
    // Map the (i,g) coherence onto (g,e) so the atomic mirror can act.
    items.push_back(rotation("a1", AtomLevel::G, AtomLevel::E, exchange_rotation(), "map-g-to-e"));
    items.push_back(rotation("a1", AtomLevel::I, AtomLevel::G, exchange_rotation(), "map-i-to-g"));
    append_memory_swap(items, "a1", "M", tau_q);
    items.push_back(retire("a1", AtomLevel::G));

    items.push_back(inject("a2", AtomLevel::G));
    append_memory_swap(items, "a2", "M", tau_q);
    items.push_back(rotation("a2", AtomLevel::I, AtomLevel::G, exchange_rotation(), "map-g-to-i"));
    items.push_back(rotation("a2", AtomLevel::G, AtomLevel::E, exchange_rotation(), "map-e-to-g"));
    items.push_back(rotation("a2", AtomLevel::I, AtomLevel::G, hadamard_rotation(), "half-pi-3"));
    items.push_back(checkpoint("psi4"));
    items.push_back(gated_visit("a2", "B"));
    items.push_back(resonant_visit("a2", "A"));
    items.push_back(checkpoint("psi5"));
    items.push_back(
        rotation("a2", AtomLevel::I, AtomLevel::G, hadamard_rotation(), "collapse-superposition"));
    items.push_back(retire("a2", AtomLevel::I));
    s.atoms_used = 2;
    return s;
}

Schedule ProtocolCompiler::one_qubit_not(double theta) {
    Schedule s = make_schedule("not", {"Q"}, {"Q"});
    s.items.push_back(inject("a1", AtomLevel::G));
    append_not_pulse(s.items, "a1", "Q", theta);
    s.items.push_back(retire("a1", AtomLevel::G));
    s.atoms_used = 1;
    return s;
}

Schedule ProtocolCompiler::one_qubit_hadamard(double theta_prime) {
    Schedule s = make_schedule("hadamard", {"Q"}, {"Q"});
    s.items.push_back(inject("a1", AtomLevel::G));
    append_hadamard_pulse(s.items, "a1", "Q", theta_prime);
    s.items.push_back(retire("a1", AtomLevel::G));
    s.atoms_used = 1;
    return s;
}

Schedule ProtocolCompiler::toffoli() { return toffoli_n(3); }

Schedule ProtocolCompiler::toffoli_n(int qubits) {
    if (qubits < 3) throw Error("bad_toffoli", "generalized Toffoli needs >= 3 qubits");
    std::vector<std::string> cavities;
    for (int q = 0; q < qubits; ++q) cavities.push_back(std::string(1, static_cast<char>('A' + q)));
    std::vector<std::string> logical = cavities;
    cavities.push_back("M");
    Schedule s = make_schedule(qubits == 3 ? "toffoli" : "toffoli-" + std::to_string(qubits),
                               cavities, logical);
    const std::string target = logical.back();

    auto& items = s.items;
    items.push_back(inject("a1", AtomLevel::G));
    items.push_back({dressed_pulse_visit("a1", logical[0], "ground-upper", 0.0)});
    if (qubits == 3) items.push_back(checkpoint("ok3"));
    for (int q = 1; q + 1 < qubits; ++q) {
        items.push_back({dressed_pulse_visit("a1", logical[q], "engineered", 0.0)});
    }
    if (qubits == 3) items.push_back(checkpoint("ok5"));
    append_cnot_atom_to_cavity(items, "a1", target);
    if (qubits == 3) items.push_back(checkpoint("ok6"));
    append_memory_swap(items, "a1", "M", params_.tau);
    items.push_back(retire("a1", AtomLevel::G));

    items.push_back(inject("a2", AtomLevel::G));
    append_memory_swap(items, "a2", "M", params_.tau);
    items.push_back({undisturbed_visit("a2", target, params_.tau)});
    for (int q = qubits - 2; q >= 1; --q) {
        items.push_back({dressed_pulse_visit("a2", logical[q], "engineered", 0.0)});
    }
    if (qubits == 3) items.push_back(checkpoint("ok7"));
    items.push_back({dressed_pulse_visit("a2", logical[0], "ground-upper", 0.0)});
    if (qubits == 3) items.push_back(checkpoint("ok8"));
    items.push_back(retire("a2", AtomLevel::G));
    s.atoms_used = 2;
    return s;
}

Schedule ProtocolCompiler::ghz_encode(int qubits) {
    if (qubits < 2) throw Error("bad_ghz", "encoding needs >= 2 cavities");
    std::vector<std::string> cavities;
    for (int q = 0; q < qubits; ++q) cavities.push_back(std::string(1, static_cast<char>('A' + q)));
    std::vector<std::string> logical = cavities;
    cavities.push_back("M");
    Schedule s = make_schedule("ghz-encode-" + std::to_string(qubits), cavities, logical);

    auto& items = s.items;
    items.push_back(inject("a1", AtomLevel::E));
    append_cnot_cavity_to_atom(items, "a1", logical[0]);
    for (int q = 1; q < qubits; ++q) append_cnot_atom_to_cavity(items, "a1", logical[q]);
    items.push_back(checkpoint("pre-mirror"));
    append_memory_swap(items, "a1", "M", params_.tau);
    items.push_back(retire("a1", AtomLevel::G));

    items.push_back(inject("a2", AtomLevel::G));
    append_memory_swap(items, "a2", "M", params_.tau);
    for (int q = qubits - 1; q >= 1; --q) {
        items.push_back({undisturbed_visit("a2", logical[q], params_.tau)});
    }
    append_cnot_cavity_to_atom(items, "a2", logical[0]);
    items.push_back(retire("a2", AtomLevel::E));
    s.atoms_used = 2;
    return s;
}

Schedule ProtocolCompiler::deutsch(int f_index) {
    if (f_index < 1 || f_index > 4) throw Error("bad_f_index", "f index must be 1..4");
    Schedule s = make_schedule("deutsch-" + std::to_string(f_index), {"A", "B", "M"}, {"A", "B"});
    auto& items = s.items;
    int atoms = 0;

    // Stage a: Hadamard-phase on A (theta'=0) and B (theta'=pi), one atom.
    items.push_back(inject("d1", AtomLevel::G));
    append_hadamard_pulse(items, "d1", "A", 0.0);
    append_hadamard_pulse(items, "d1", "B", M_PI);
    items.push_back(retire("d1", AtomLevel::G));
    ++atoms;
    items.push_back(checkpoint("after-stage-a"));

    const auto idle_visit = [&](const std::string& atom, const std::string& cavity) {
        return ScheduleItem{undisturbed_visit(atom, cavity, params_.tau)};
    };

    // Stage b (the f gate) merged with stage c (Hadamard on A) where the two
    // commute, matching the atom counts of the appendix.
    if (f_index == 1) {
        items.push_back(inject("d2", AtomLevel::G));
        append_hadamard_pulse(items, "d2", "A", 0.0);
        items.push_back(idle_visit("d2", "B"));
        items.push_back(retire("d2", AtomLevel::G));
        ++atoms;
    } else if (f_index == 2) {
        items.push_back(inject("d2", AtomLevel::G));
        append_hadamard_pulse(items, "d2", "A", 0.0);  // stage c, commutes with the B gate
        append_not_pulse(items, "d2", "B", 0.0);       // stage b: NOT on B
        items.push_back(retire("d2", AtomLevel::G));
        ++atoms;
    } else {
        const bool inv = f_index == 4;
        items.push_back(inject("a1", inv ? AtomLevel::G : AtomLevel::E));
        append_cnot_cavity_to_atom(items, "a1", "A");
        append_cnot_atom_to_cavity(items, "a1", "B");
        append_memory_swap(items, "a1", "M", params_.tau);
        items.push_back(retire("a1", AtomLevel::G));
        items.push_back(inject("a2", AtomLevel::G));
        append_memory_swap(items, "a2", "M", params_.tau);
        items.push_back(idle_visit("a2", "B"));
        append_cnot_cavity_to_atom(items, "a2", "A");
        items.push_back(retire("a2", inv ? AtomLevel::G : AtomLevel::E));
        atoms += 2;
        items.push_back(checkpoint("after-f-gate"));

        items.push_back(inject("d2", AtomLevel::G));
        append_hadamard_pulse(items, "d2", "A", 0.0);
        items.push_back(idle_visit("d2", "B"));
        items.push_back(retire("d2", AtomLevel::G));
        ++atoms;
    }
    s.atoms_used = atoms;
    return s;
}

}  // namespace cavityqc
