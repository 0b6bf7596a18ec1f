#include "cavityqc/statespace.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cavityqc {

char to_char(AtomLevel level) {
    switch (level) {
        case AtomLevel::I: return 'i';
        case AtomLevel::G: return 'g';
        case AtomLevel::E: return 'e';
    }
    return '?';
}

AtomLevel atom_level_from_char(char c) {
    switch (c) {
        case 'i': case 'I': return AtomLevel::I;
        case 'g': case 'G': return AtomLevel::G;
        case 'e': case 'E': return AtomLevel::E;
    }
    throw Error("bad_atom_level", std::string("unknown atom level '") + c + "'");
}

std::string BasisLabel::str() const {
    std::ostringstream os;
    for (std::size_t i = 0; i < fock.size(); ++i) {
        if (i) os << ',';
        os << fock[i];
    }
    if (!atoms.empty()) {
        os << ';';
        for (std::size_t i = 0; i < atoms.size(); ++i) {
            if (i) os << ',';
            os << to_char(atoms[i]);
        }
    }
    return os.str();
}

SystemLayout::SystemLayout(std::vector<CavitySpec> cavities, std::vector<std::string> atoms,
                           std::optional<std::string> memory_cavity)
    : cavities_(std::move(cavities)), atoms_(std::move(atoms)),
      memory_cavity_(std::move(memory_cavity)) {
    for (const auto& c : cavities_) {
        if (c.fock_cutoff < 2) {
            throw Error("bad_layout", "cavity '" + c.label + "' needs fock_cutoff >= 2");
        }
    }
    for (std::size_t i = 0; i < cavities_.size(); ++i) {
        for (std::size_t j = i + 1; j < cavities_.size(); ++j) {
            if (cavities_[i].label == cavities_[j].label) {
                throw Error("bad_layout", "duplicate cavity label '" + cavities_[i].label + "'");
            }
        }
    }
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        for (std::size_t j = i + 1; j < atoms_.size(); ++j) {
            if (atoms_[i] == atoms_[j]) {
                throw Error("bad_layout", "duplicate atom label '" + atoms_[i] + "'");
            }
        }
    }
    if (memory_cavity_ && !has_cavity(*memory_cavity_)) {
        throw Error("bad_layout", "memory cavity '" + *memory_cavity_ + "' not in layout");
    }
    rebuild_strides();
}

void SystemLayout::rebuild_strides() {
    cavity_strides_.assign(cavities_.size(), 0);
    atom_strides_.assign(atoms_.size(), 0);
    int stride = 1;
    for (int a = static_cast<int>(atoms_.size()) - 1; a >= 0; --a) {
        atom_strides_[a] = stride;
        stride *= kAtomLevels;
    }
    for (int c = static_cast<int>(cavities_.size()) - 1; c >= 0; --c) {
        cavity_strides_[c] = stride;
        stride *= cavities_[c].fock_cutoff;
    }
    dimension_ = stride;
}

int SystemLayout::cavity_index(const std::string& label) const {
    for (std::size_t i = 0; i < cavities_.size(); ++i) {
        if (cavities_[i].label == label) return static_cast<int>(i);
    }
    throw LayoutMismatch("no cavity '" + label + "' in layout");
}

int SystemLayout::atom_index(const std::string& label) const {
    for (std::size_t i = 0; i < atoms_.size(); ++i) {
        if (atoms_[i] == label) return static_cast<int>(i);
    }
    throw LayoutMismatch("no atom '" + label + "' in layout");
}

bool SystemLayout::has_cavity(const std::string& label) const {
    return std::any_of(cavities_.begin(), cavities_.end(),
                       [&](const CavitySpec& c) { return c.label == label; });
}

bool SystemLayout::has_atom(const std::string& label) const {
    return std::find(atoms_.begin(), atoms_.end(), label) != atoms_.end();
}

int SystemLayout::index_of(const BasisLabel& label) const {
    if (label.fock.size() != cavities_.size() || label.atoms.size() != atoms_.size()) {
        throw LayoutMismatch("basis label arity does not match layout");
    }
    int index = 0;
    for (std::size_t c = 0; c < cavities_.size(); ++c) {
        const int n = label.fock[c];
        if (n < 0 || n >= cavities_[c].fock_cutoff) {
            throw OutOfTruncation("occupation " + std::to_string(n) + " exceeds cutoff of cavity '" +
                                  cavities_[c].label + "'");
        }
        index += n * cavity_strides_[c];
    }
    for (std::size_t a = 0; a < atoms_.size(); ++a) {
        index += static_cast<int>(label.atoms[a]) * atom_strides_[a];
    }
    return index;
}

BasisLabel SystemLayout::label_of(int index) const {
    if (index < 0 || index >= dimension_) {
        throw Error("bad_index", "basis index out of range");
    }
    BasisLabel label;
    label.fock.resize(cavities_.size());
    label.atoms.resize(atoms_.size());
    for (std::size_t c = 0; c < cavities_.size(); ++c) {
        label.fock[c] = (index / cavity_strides_[c]) % cavities_[c].fock_cutoff;
    }
    for (std::size_t a = 0; a < atoms_.size(); ++a) {
        label.atoms[a] = static_cast<AtomLevel>((index / atom_strides_[a]) % kAtomLevels);
    }
    return label;
}

SystemLayout SystemLayout::with_atom_appended(const std::string& label) const {
    auto atoms = atoms_;
    atoms.push_back(label);
    return SystemLayout(cavities_, std::move(atoms), memory_cavity_);
}

SystemLayout SystemLayout::without_atom(const std::string& label) const {
    auto atoms = atoms_;
    atoms.erase(atoms.begin() + atom_index(label));
    return SystemLayout(cavities_, std::move(atoms), memory_cavity_);
}

bool SystemLayout::operator==(const SystemLayout& other) const {
    if (atoms_ != other.atoms_ || cavities_.size() != other.cavities_.size()) return false;
    for (std::size_t i = 0; i < cavities_.size(); ++i) {
        if (cavities_[i].label != other.cavities_[i].label ||
            cavities_[i].fock_cutoff != other.cavities_[i].fock_cutoff) {
            return false;
        }
    }
    return true;
}

StateVector::StateVector(SystemLayout layout, Eigen::VectorXcd amplitudes)
    : layout_(std::move(layout)), amplitudes_(std::move(amplitudes)) {
    if (amplitudes_.size() != layout_.dimension()) {
        throw LayoutMismatch("amplitude vector length does not match layout dimension");
    }
    if (std::abs(amplitudes_.norm() - 1.0) > 1e-9) {
        throw Error("not_normalized", "state vector norm deviates from 1 by more than 1e-9");
    }
}

StateVector StateVector::basis_state(const SystemLayout& layout, const BasisLabel& label) {
    Eigen::VectorXcd amp = Eigen::VectorXcd::Zero(layout.dimension());
    amp(layout.index_of(label)) = 1.0;
    return StateVector(layout, std::move(amp));
}

StateVector StateVector::superposition(SystemLayout layout, Eigen::VectorXcd amplitudes) {
    const double n = amplitudes.norm();
    if (n <= 0.0) throw Error("not_normalized", "cannot normalize a zero vector");
    amplitudes /= n;
    return StateVector(std::move(layout), std::move(amplitudes));
}

StateVector StateVector::unchecked(SystemLayout layout, Eigen::VectorXcd amplitudes) {
    StateVector s;
    if (amplitudes.size() != layout.dimension()) {
        throw LayoutMismatch("amplitude vector length does not match layout dimension");
    }
    s.layout_ = std::move(layout);
    s.amplitudes_ = std::move(amplitudes);
    return s;
}

Complex StateVector::amplitude(const BasisLabel& label) const {
    return amplitudes_(layout_.index_of(label));
}

std::complex<double> overlap(const StateVector& a, const StateVector& b) {
    if (a.layout() != b.layout()) {
        throw LayoutMismatch("overlap requires identical layouts");
    }
    return a.amplitudes().dot(b.amplitudes());  // Eigen dot conjugates the left side
}

namespace {

struct SubsystemView {
    int dim;     // subsystem dimension
    int stride;  // index stride of the subsystem digit
};

SubsystemView subsystem_view(const SystemLayout& layout, const std::string& subsystem) {
    if (layout.has_cavity(subsystem)) {
        const int c = layout.cavity_index(subsystem);
        return {layout.cavities()[c].fock_cutoff, layout.cavity_stride(c)};
    }
    const int a = layout.atom_index(subsystem);  // throws if absent
    return {kAtomLevels, layout.atom_stride(a)};
}

}  // namespace

Eigen::MatrixXcd reduced_density(const StateVector& state, const std::string& subsystem) {
    const auto view = subsystem_view(state.layout(), subsystem);
    const auto& amp = state.amplitudes();
    const int dim = state.layout().dimension();
    const int block = view.dim * view.stride;
    Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(view.dim, view.dim);
    for (int high = 0; high < dim / block; ++high) {
        for (int s = 0; s < view.dim; ++s) {
            for (int sp = 0; sp < view.dim; ++sp) {
                Complex acc = 0.0;
                const int base_s = high * block + s * view.stride;
                const int base_sp = high * block + sp * view.stride;
                for (int low = 0; low < view.stride; ++low) {
                    acc += amp(base_s + low) * std::conj(amp(base_sp + low));
                }
                rho(s, sp) += acc;
            }
        }
    }
    return rho;
}

Eigen::VectorXd reduced_populations(const StateVector& state, const std::string& subsystem) {
    const auto view = subsystem_view(state.layout(), subsystem);
    const auto& amp = state.amplitudes();
    const int dim = state.layout().dimension();
    const int block = view.dim * view.stride;
    Eigen::VectorXd pops = Eigen::VectorXd::Zero(view.dim);
    for (int high = 0; high < dim / block; ++high) {
        for (int s = 0; s < view.dim; ++s) {
            const int base = high * block + s * view.stride;
            for (int low = 0; low < view.stride; ++low) {
                pops(s) += std::norm(amp(base + low));
            }
        }
    }
    return pops;
}

double subsystem_purity(const StateVector& state, const std::string& subsystem) {
    const Eigen::MatrixXcd rho = reduced_density(state, subsystem);
    return (rho * rho).trace().real();
}

void apply_atom_diagonal(StateVector& state, const std::string& atom,
                         const std::array<Complex, kAtomLevels>& phases) {
    const auto& layout = state.layout();
    const int stride = layout.atom_stride(layout.atom_index(atom));
    auto& amp = state.mutable_amplitudes();
    const int dim = layout.dimension();
    const int block = kAtomLevels * stride;
    for (int high = 0; high < dim / block; ++high) {
        for (int s = 0; s < kAtomLevels; ++s) {
            const int base = high * block + s * stride;
            for (int low = 0; low < stride; ++low) amp(base + low) *= phases[s];
        }
    }
}

void apply_cavity_diagonal(StateVector& state, const std::string& cavity,
                           const Eigen::VectorXcd& per_photon) {
    const auto& layout = state.layout();
    const int c = layout.cavity_index(cavity);
    const int cutoff = layout.cavities()[c].fock_cutoff;
    if (per_photon.size() != cutoff) {
        throw LayoutMismatch("cavity diagonal length must equal fock cutoff");
    }
    const int stride = layout.cavity_stride(c);
    auto& amp = state.mutable_amplitudes();
    const int dim = layout.dimension();
    const int block = cutoff * stride;
    for (int high = 0; high < dim / block; ++high) {
        for (int n = 0; n < cutoff; ++n) {
            const int base = high * block + n * stride;
            for (int low = 0; low < stride; ++low) amp(base + low) *= per_photon(n);
        }
    }
}

void apply_atom_unitary(StateVector& state, const std::string& atom, const Eigen::Matrix3cd& u) {
    const auto& layout = state.layout();
    const int stride = layout.atom_stride(layout.atom_index(atom));
    auto& amp = state.mutable_amplitudes();
    const int dim = layout.dimension();
    const int block = kAtomLevels * stride;
    Eigen::Vector3cd in, out;
    for (int high = 0; high < dim / block; ++high) {
        for (int low = 0; low < stride; ++low) {
            const int base = high * block + low;
            for (int s = 0; s < kAtomLevels; ++s) in(s) = amp(base + s * stride);
            out = u * in;
            for (int s = 0; s < kAtomLevels; ++s) amp(base + s * stride) = out(s);
        }
    }
}

void apply_pair_diagonal(StateVector& state, const std::string& atom, const std::string& cavity,
                         const Eigen::VectorXcd& diag) {
    const PairIndexer indexer(state.layout(), atom, cavity);
    if (diag.size() != indexer.pair_dim()) {
        throw LayoutMismatch("pair diagonal length must equal 3 * fock cutoff");
    }
    auto& amp = state.mutable_amplitudes();
    for (int r = 0; r < indexer.spectator_count(); ++r) {
        for (int p = 0; p < indexer.pair_dim(); ++p) {
            amp(indexer.index(p, r)) *= diag(p);
        }
    }
}

StateVector inject_atom(const StateVector& state, const std::string& label, AtomLevel level) {
    const SystemLayout layout = state.layout().with_atom_appended(label);
    const auto& amp = state.amplitudes();
    Eigen::VectorXcd out = Eigen::VectorXcd::Zero(layout.dimension());
    const int l = static_cast<int>(level);
    for (int i = 0; i < amp.size(); ++i) {
        out(i * kAtomLevels + l) = amp(i);
    }
    return StateVector(layout, std::move(out));
}

RetiredAtom retire_atom(const StateVector& state, const std::string& label) {
    const auto& layout = state.layout();
    const Eigen::MatrixXcd rho = reduced_density(state, label);
    double purity = (rho * rho).trace().real();
    int dominant = 0;
    for (int s = 1; s < kAtomLevels; ++s) {
        if (rho(s, s).real() > rho(dominant, dominant).real()) dominant = s;
    }

    const int stride = layout.atom_stride(layout.atom_index(label));
    const SystemLayout reduced = layout.without_atom(label);
    Eigen::VectorXcd out(reduced.dimension());
    const auto& amp = state.amplitudes();
    const int block = kAtomLevels * stride;
    int k = 0;
    for (int high = 0; high < layout.dimension() / block; ++high) {
        const int base = high * block + dominant * stride;
        for (int low = 0; low < stride; ++low) out(k++) = amp(base + low);
    }
    const double kept = out.squaredNorm();
    if (kept <= 0.0) throw EntanglementResidue("atom '" + label + "' has no population in its dominant level");
    out /= std::sqrt(kept);
    RetiredAtom result{StateVector(reduced, std::move(out)), static_cast<AtomLevel>(dominant),
                       purity, 1.0 - kept};
    return result;
}

PairIndexer::PairIndexer(const SystemLayout& layout, const std::string& atom,
                         const std::string& cavity) {
    const int ci = layout.cavity_index(cavity);
    const int ai = layout.atom_index(atom);
    cutoff_ = layout.cavities()[ci].fock_cutoff;
    pair_dim_ = kAtomLevels * cutoff_;
    const int sc = layout.cavity_stride(ci);
    const int sa = layout.atom_stride(ai);

    offsets_.resize(pair_dim_);
    for (int l = 0; l < kAtomLevels; ++l) {
        for (int n = 0; n < cutoff_; ++n) {
            offsets_[l * cutoff_ + n] = l * sa + n * sc;
        }
    }

    spectator_base_.reserve(layout.dimension() / pair_dim_);
    for (int i = 0; i < layout.dimension(); ++i) {
        const bool zero_pair = ((i / sc) % cutoff_) == 0 && ((i / sa) % kAtomLevels) == 0;
        if (zero_pair) spectator_base_.push_back(i);
    }
}

double pair_projection_population(const StateVector& state, const PairIndexer& indexer,
                                  const Eigen::VectorXcd& pair_vec) {
    if (pair_vec.size() != indexer.pair_dim()) {
        throw LayoutMismatch("pair vector length must equal 3 * fock cutoff");
    }
    const auto& amp = state.amplitudes();
    double total = 0.0;
    for (int r = 0; r < indexer.spectator_count(); ++r) {
        Complex acc = 0.0;
        for (int p = 0; p < indexer.pair_dim(); ++p) {
            acc += std::conj(pair_vec(p)) * amp(indexer.index(p, r));
        }
        total += std::norm(acc);
    }
    return total;
}

}  // namespace cavityqc
