#include "cavityqc/runner.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cavityqc/errors.hpp"
#include "cavityqc/format.hpp"

namespace cavityqc {

namespace {

using nlohmann::json;

json complex_to_json(const Complex& z) { return json::array({z.real(), z.imag()}); }

json matrix_to_json(const Eigen::MatrixXcd& m) {
    json rows = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        json row = json::array();
        for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(complex_to_json(m(i, j)));
        rows.push_back(std::move(row));
    }
    return rows;
}

void matrix_to_csv(const Eigen::MatrixXcd& m, std::ostream& os) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            if (j) os << ',';
            os << format_g12(m(i, j).real()) << ',' << format_g12(m(i, j).imag());
        }
        os << '\n';
    }
}

json diagonal_phases(const Eigen::VectorXcd& diag) {
    json out = json::array();
    for (Eigen::Index i = 0; i < diag.size(); ++i) out.push_back(std::arg(diag(i)));
    return out;
}

std::string arg_or(const RunRequest& request, const std::string& key, const std::string& dflt) {
    auto it = request.args.find(key);
    return it == request.args.end() ? dflt : it->second;
}

void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("io_error", "cannot write '" + path + "'");
    out << content;
}

json gate_report(ProtocolCompiler& compiler, const Schedule& schedule, const GateMatrix& gate,
                 const GateMatrix& cleaned, const Eigen::MatrixXcd& target,
                 const FidelityReport& fid) {
    json j;
    j["protocol"] = schedule.name;
    j["logical_cavities"] = schedule.logical_cavities;
    j["atoms_used"] = schedule.atoms_used;
    j["raw"] = matrix_to_json(gate.raw);
    j["cleaned"] = matrix_to_json(cleaned.cleaned);
    j["target"] = matrix_to_json(target);
    j["unitarity_defect"] = gate.unitarity_defect;
    j["process_fidelity"] = fid.process_fidelity;
    j["max_element_deviation"] = fid.max_element_deviation;
    json tt = json::array();
    for (Eigen::Index k = 0; k < fid.truth_table.size(); ++k) tt.push_back(fid.truth_table(k));
    j["truth_table"] = tt;
    j["min_truth_table"] = fid.min_truth_table;
    json leak = json::array();
    for (Eigen::Index k = 0; k < gate.column_leak.size(); ++k) leak.push_back(gate.column_leak(k));
    j["column_leak"] = leak;
    j["atom_purities"] = gate.atom_purities;
    double min_purity = 1.0;
    for (double p : gate.atom_purities) min_purity = std::min(min_purity, p);
    j["min_atom_purity"] = min_purity;
    j["global_phase"] = cleaned.global_phase;
    j["out_qubit_phases"] = cleaned.out_qubit_phases;
    j["in_qubit_phases"] = cleaned.in_qubit_phases;
    for (const auto& [name, value] : cleaned.residual_params) {
        j["residual_params"][name] = value;
    }
    (void)compiler;
    return j;
}

struct GateSpec {
    Eigen::MatrixXcd target;
    Schedule schedule;
};

GateSpec named_gate(ProtocolCompiler& compiler, const std::string& name) {
    if (name == "cnot-inv") return {targets::cnot_inv(0.0), compiler.cnot_inv()};
    if (name == "cnot") return {targets::cnot(), compiler.cnot()};
    if (name == "qpg") return {targets::qpg(), compiler.qpg()};
    if (name == "toffoli") return {targets::toffoli(3), compiler.toffoli()};
    if (name == "toffoli-4") return {targets::toffoli(4), compiler.toffoli_n(4)};
    if (name == "not") return {targets::not_phase(0.0), compiler.one_qubit_not(0.0)};
    if (name == "hadamard") return {targets::hadamard_phase(0.0), compiler.one_qubit_hadamard(0.0)};
    if (name == "ghz-encode") {
        // Reported against the ideal encoder truth table on basis inputs.
        Eigen::MatrixXcd enc = Eigen::MatrixXcd::Zero(8, 8);
        for (int bits = 0; bits < 8; ++bits) {
            enc(bits == 4 ? 7 : bits, bits) = 1.0;  // |100> -> |111>, else data passthrough
        }
        return {enc, compiler.ghz_encode(3)};
    }
    throw ConfigError("unknown protocol '" + name + "'");
}

int run_gate(const RunRequest& request, const ExperimentConfig& config, std::ostream& out) {
    ProtocolCompiler compiler(config.params);
    const std::string name = arg_or(request, "protocol", "cnot-inv");

    if (name == "cnot-inv-measured") {
        const auto schedule = compiler.cnot_inv_measured();
        ExecutionOptions options = compiler.execution_options();
        Eigen::VectorXcd in = Eigen::VectorXcd::Zero(4);
        in << std::sqrt(0.5), 0.0, std::sqrt(0.5), 0.0;
        Eigen::VectorXcd amp = Eigen::VectorXcd::Zero(schedule.layout.dimension());
        for (int bits = 0; bits < 4; ++bits) {
            BasisLabel label;
            label.fock.assign(schedule.layout.cavities().size(), 0);
            label.fock[schedule.layout.cavity_index("A")] = (bits >> 1) & 1;
            label.fock[schedule.layout.cavity_index("B")] = bits & 1;
            amp(schedule.layout.index_of(label)) = in(bits);
        }
        const auto result = execute(schedule, StateVector::superposition(schedule.layout, amp),
                                    options);
        json j;
        j["protocol"] = schedule.name;
        j["atoms_used"] = schedule.atoms_used;
        for (const auto& branch : result.branches) {
            json b;
            b["probability"] = branch.probability;
            b["outcome"] = branch.outcomes;
            json pops = json::array();
            for (int bits = 0; bits < 4; ++bits) {
                BasisLabel label;
                label.fock.assign(schedule.layout.cavities().size(), 0);
                label.fock[schedule.layout.cavity_index("A")] = (bits >> 1) & 1;
                label.fock[schedule.layout.cavity_index("B")] = bits & 1;
                pops.push_back(
                    std::norm(branch.state.amplitudes()(schedule.layout.index_of(label))));
            }
            b["logical_populations"] = pops;
            j["branches"].push_back(b);
        }
        if (result.branches.size() == 2) {
            j["branch_agreement"] = std::norm(result.branches[0].state.amplitudes().dot(
                result.branches[1].state.amplitudes()));
        }
        out << j.dump(2) << '\n';
        return 0;
    }

    auto spec = named_gate(compiler, name);
    ExecutionOptions options = compiler.execution_options();
    if (config.strict) options.min_extract_purity = 0.999;
    const auto gate = extract_gate(spec.schedule, options,
                                   config.params.jobs > 0 ? config.params.jobs : 2);
    const auto cleaned = phase_cleanup(gate, spec.target);
    const auto fid = fidelity(cleaned, spec.target);
    json j = gate_report(compiler, spec.schedule, gate, cleaned, spec.target, fid);

    const std::string csv_path = arg_or(request, "matrix-csv", "");
    if (!csv_path.empty()) {
        std::ostringstream os;
        matrix_to_csv(cleaned.cleaned, os);
        write_file(request.output_dir + "/" + csv_path, os.str());
        j["matrix_csv"] = csv_path;
    }
    out << j.dump(2) << '\n';

    if (config.strict) {
        double min_purity = 1.0;
        for (double p : gate.atom_purities) min_purity = std::min(min_purity, p);
        if (fid.min_truth_table < 0.99 || min_purity < 0.999) return 4;
    }
    return 0;
}

int run_dressed_spectrum(const RunRequest& request, const ExperimentConfig& config,
                         std::ostream& out) {
    const auto& p = config.params;
    const CouplingProfile coupling{p.omega0, p.tau, 0.0};
    const int samples = std::stoi(arg_or(request, "samples", "401"));
    std::ostringstream os;
    os << "t,n,branch,energy_rad_per_s\n";
    for (int i = 0; i < samples; ++i) {
        const double t = -4.0 * p.tau + 8.0 * p.tau * i / (samples - 1);
        for (int n = 0; n + 1 < p.fock_cutoff; ++n) {
            for (Branch branch : {Branch::Minus, Branch::Plus}) {
                const auto level = dressed_level(coupling, p.delta, n, branch, t);
                os << format_g12(t) << ',' << n << ',' << branch_char(branch) << ','
                   << format_g12(level.lab_energy(p.carrier_omega)) << '\n';
            }
        }
    }
    const std::string path = arg_or(request, "csv", "");
    if (path.empty()) {
        out << os.str();
    } else {
        write_file(request.output_dir + "/" + path, os.str());
    }
    return 0;
}

int run_adiabaticity(const RunRequest& request, const ExperimentConfig& config,
                     std::ostream& out) {
    const auto& p = config.params;
    const CouplingProfile coupling{p.omega0, p.tau, 0.0};
    const int n = std::stoi(arg_or(request, "n", "1"));
    const auto global = max_adiabaticity(coupling, p.delta, n, -4.0 * p.tau, 4.0 * p.tau, 40001);
    const auto transit = max_adiabaticity(coupling, p.delta, n, -p.tau, p.tau, 20001);
    json j;
    j["n"] = n;
    j["threshold"] = config.adiabaticity_threshold;
    j["transit_window_max"] = transit.max_value;
    j["transit_window_argmax_t"] = transit.argmax_t;
    j["global_max"] = global.max_value;
    j["global_argmax_t"] = global.argmax_t;
    j["transit_within_threshold"] = transit.max_value < config.adiabaticity_threshold;
    j["global_within_threshold"] = global.max_value < config.adiabaticity_threshold;
    out << j.dump(2) << '\n';
    if (config.strict && transit.max_value >= config.adiabaticity_threshold) return 4;
    return 0;
}

int run_trace(const RunRequest& request, const ExperimentConfig& config, std::ostream& out) {
    ProtocolCompiler compiler(config.params);
    const std::string protocol = arg_or(request, "protocol", "cnot-atom-to-cavity");
    Schedule schedule;
    if (protocol == "cnot-atom-to-cavity" || protocol == "not") {
        schedule = compiler.one_qubit_not(0.0);
    } else if (protocol == "hadamard") {
        schedule = compiler.one_qubit_hadamard(0.0);
    } else {
        throw ConfigError("trace supports the single-visit protocols, not '" + protocol + "'");
    }

    const std::string initial = arg_or(request, "initial", "g,0");
    const auto comma = initial.find(',');
    if (comma == std::string::npos) throw ConfigError("initial must look like g,0");
    const int photons = std::stoi(initial.substr(comma + 1));
    if (atom_level_from_char(initial[0]) != AtomLevel::G) {
        throw ConfigError("trace initial atom level must be g (the atom is injected in g)");
    }

    ExecutionOptions options = compiler.execution_options();
    options.trace_visit = 0;
    options.trace_request.samples = config.trace_samples;
    options.trace_request.projectors = {
        TraceProjector::pair_bare(AtomLevel::G, 0),
        TraceProjector::pair_dressed(0, Branch::Minus),
        TraceProjector::pair_dressed(0, Branch::Plus),
        TraceProjector::pair_dressed(1, Branch::Plus),
    };
    const auto result = execute(schedule, logical_basis_state(schedule, photons), options);
    std::ostringstream os;
    result.trace.to_csv(os);
    const std::string path = arg_or(request, "csv", "");
    if (path.empty()) {
        out << os.str();
    } else {
        write_file(request.output_dir + "/" + path, os.str());
    }
    if (config.strict && result.trace.norm_drift > 1e-8) return 4;
    return 0;
}

int run_calibrate(const RunRequest& request, const ExperimentConfig& config, std::ostream& out) {
    ProtocolCompiler compiler(config.params);
    const std::string pulse = arg_or(request, "pulse", "atom-to-cavity");
    const auto& cal = compiler.pulse_calibration(pulse);
    json j;
    j["pulse"] = pulse;
    if (cal.dressed_drive) {
        j["xi0_rad_per_s"] = cal.dressed_drive->xi0;
        j["detuning_rot_rad_per_s"] = cal.dressed_drive->detuning_rot;
        j["tau_s_s"] = cal.dressed_drive->tau_s;
        j["engineered"] = true;
    } else {
        j["xi0_rad_per_s"] = cal.drive.xi0;
        j["omega_s_rad_per_s"] = cal.drive.omega_s;
        j["tau_s_s"] = cal.drive.tau_s;
        j["engineered"] = false;
    }
    j["transfer"] = cal.transfer;
    j["residual_phase_rad"] = cal.residual_phase;
    j["selectivity_ok"] = cal.selectivity.ok;
    j["selectivity_min_separation_rad_per_s"] = cal.selectivity.min_separation;
    j["selectivity_required_rad_per_s"] = cal.selectivity.required;
    j["selectivity_worst_line"] = cal.selectivity.worst_line;
    out << j.dump(2) << '\n';
    return 0;
}

int run_deutsch(const RunRequest& request, const ExperimentConfig& config, std::ostream& out) {
    ProtocolCompiler compiler(config.params);
    const int f_index = std::stoi(arg_or(request, "f", "1"));
    const auto schedule = compiler.deutsch(f_index);
    const auto result =
        execute(schedule, logical_basis_state(schedule, 0), compiler.execution_options());
    const auto pops = reduced_populations(result.branches[0].state, "A");
    json j;
    j["f_index"] = f_index;
    j["constant_expected"] = f_index <= 2;
    j["atoms_used"] = schedule.atoms_used;
    j["p_cavity_A_0"] = pops(0);
    j["p_cavity_A_1"] = pops(1);
    j["verdict"] = pops(0) >= pops(1) ? "constant" : "balanced";
    j["verdict_probability"] = std::max(pops(0), pops(1));
    out << j.dump(2) << '\n';
    if (config.strict && std::max(pops(0), pops(1)) < 0.99) return 4;
    return 0;
}

int run_schedule_dump(const RunRequest& request, const ExperimentConfig& config,
                      std::ostream& out) {
    ProtocolCompiler compiler(config.params);
    const std::string name = arg_or(request, "protocol", "cnot-inv");
    Schedule schedule;
    if (name == "cnot-inv-measured") {
        schedule = compiler.cnot_inv_measured();
    } else if (name == "deutsch") {
        schedule = compiler.deutsch(std::stoi(arg_or(request, "f", "1")));
    } else {
        schedule = named_gate(compiler, name).schedule;
    }
    const json j = schedule_to_json(schedule, config.params.fock_cutoff);
    const std::string path = arg_or(request, "json", "");
    if (path.empty()) {
        out << j.dump(2) << '\n';
    } else {
        write_file(request.output_dir + "/" + path, j.dump(2) + "\n");
    }
    return 0;
}

json items_to_json(const std::vector<ScheduleItem>& items, int cutoff);

json item_to_json(const ScheduleItem& item, int cutoff) {
    json j;
    if (std::holds_alternative<CavityVisit>(item.v)) {
        const auto& v = std::get<CavityVisit>(item.v);
        j["type"] = "visit";
        j["atom"] = v.atom;
        j["cavity"] = v.cavity;
        j["kind"] = to_string(v.kind);
        j["intent"] = v.intent;
        j["omega0_rad_per_s"] = v.omega0;
        j["tau_s"] = v.tau;
        j["delta_eff_rad_per_s"] = v.delta_eff;
        j["carrier_omega_rad_per_s"] = v.carrier_omega;
        j["window_s"] = json::array({v.t_start(), v.t_end()});
        for (const auto& d : v.drives) {
            json dj;
            dj["xi0_rad_per_s"] = d.xi0;
            dj["omega_s_rad_per_s"] = d.omega_s;
            dj["phi_s_rad"] = d.phi_s;
            dj["tau_s_s"] = d.tau_s;
            dj["t_center_s"] = d.t_center;
            dj["rwa"] = d.rwa;
            j["drives"].push_back(dj);
        }
        for (const auto& d : v.dressed_drives) {
            json dj;
            dj["xi0_rad_per_s"] = d.xi0;
            dj["detuning_rot_rad_per_s"] = d.detuning_rot;
            dj["phi_rad"] = d.phi;
            dj["tau_s_s"] = d.tau_s;
            dj["sector"] = d.n;
            dj["branch"] = std::string(1, branch_char(d.branch));
            j["dressed_drives"].push_back(dj);
        }
        if (v.pre_correction.size() > 0) {
            j["pre_correction_phases_rad"] = diagonal_phases(v.pre_correction);
        }
        if (v.post_correction.size() > 0) {
            j["post_correction_phases_rad"] = diagonal_phases(v.post_correction);
        }
        j["adiabatic_undo_phases_rad"] = diagonal_phases(adiabatic_undo_diagonal(v, cutoff));
    } else if (std::holds_alternative<AtomRotation>(item.v)) {
        const auto& r = std::get<AtomRotation>(item.v);
        j["type"] = "rotation";
        j["atom"] = r.atom;
        j["levels"] = std::string(1, to_char(r.a)) + std::string(1, to_char(r.b));
        j["intent"] = r.intent;
        j["matrix"] = matrix_to_json(r.u);
    } else if (std::holds_alternative<InjectAtom>(item.v)) {
        const auto& i = std::get<InjectAtom>(item.v);
        j["type"] = "inject";
        j["atom"] = i.atom;
        j["level"] = std::string(1, to_char(i.level));
    } else if (std::holds_alternative<RetireAtomItem>(item.v)) {
        const auto& r = std::get<RetireAtomItem>(item.v);
        j["type"] = "retire";
        j["atom"] = r.atom;
        if (r.expected) j["expected_level"] = std::string(1, to_char(*r.expected));
    } else if (std::holds_alternative<Checkpoint>(item.v)) {
        j["type"] = "checkpoint";
        j["name"] = std::get<Checkpoint>(item.v).name;
    } else {
        const auto& m = std::get<MeasureAtom>(item.v);
        j["type"] = "measure";
        j["atom"] = m.atom;
        j["if_g"] = items_to_json(m.if_g, cutoff);
        j["if_e"] = items_to_json(m.if_e, cutoff);
    }
    return j;
}

json items_to_json(const std::vector<ScheduleItem>& items, int cutoff) {
    json out = json::array();
    for (const auto& item : items) out.push_back(item_to_json(item, cutoff));
    return out;
}

}  // namespace

json schedule_to_json(const Schedule& schedule, int fock_cutoff) {
    json j;
    j["name"] = schedule.name;
    j["atoms_used"] = schedule.atoms_used;
    j["logical_cavities"] = schedule.logical_cavities;
    json cavities = json::array();
    for (const auto& c : schedule.layout.cavities()) {
        json cj;
        cj["label"] = c.label;
        cj["fock_cutoff"] = c.fock_cutoff;
        cj["omega_rad_per_s"] = c.omega;
        cavities.push_back(cj);
    }
    j["cavities"] = cavities;
    if (schedule.layout.memory_cavity()) j["memory_cavity"] = *schedule.layout.memory_cavity();
    j["items"] = items_to_json(schedule.items, fock_cutoff);
    return j;
}

int run(const RunRequest& request, const ExperimentConfig& config, std::ostream& out,
        std::ostream& err) {
    try {
        if (request.subcommand == "dressed-spectrum") {
            return run_dressed_spectrum(request, config, out);
        }
        if (request.subcommand == "adiabaticity") return run_adiabaticity(request, config, out);
        if (request.subcommand == "trace") return run_trace(request, config, out);
        if (request.subcommand == "calibrate") return run_calibrate(request, config, out);
        if (request.subcommand == "gate") return run_gate(request, config, out);
        if (request.subcommand == "deutsch") return run_deutsch(request, config, out);
        if (request.subcommand == "schedule-dump") return run_schedule_dump(request, config, out);
        throw ConfigError("unknown subcommand '" + request.subcommand + "'");
    } catch (const ConfigError& e) {
        json j;
        j["error"] = e.code();
        j["message"] = e.what();
        err << j.dump(2) << '\n';
        return 2;
    } catch (const Error& e) {
        json j;
        j["error"] = e.code();
        j["message"] = e.what();
        err << j.dump(2) << '\n';
        return 3;
    }
}

}  // namespace cavityqc
