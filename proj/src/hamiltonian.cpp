#include "cavityqc/hamiltonian.hpp"

#include <cmath>

#include "cavityqc/dressed.hpp"
#include "cavityqc/errors.hpp"

namespace cavityqc {

namespace {
constexpr Complex kI{0.0, 1.0};
}

Eigen::Matrix2cd drive_term(const DriveSpec& d, double t, double carrier_omega) {
    Eigen::Matrix2cd m = Eigen::Matrix2cd::Zero();
    if (d.xi0 == 0.0) return m;
    const double env = d.envelope(t);
    Complex c_eg;  // coefficient of |e><g|
    if (d.rwa) {
        const double rot = (d.omega_s - carrier_omega) * t + d.phi_s;
        c_eg = -0.5 * d.xi0 * env * std::exp(-kI * rot);
    } else {
        // Full cosine transformed into the rotating frame: the atomic raising
        // operator carries e^{+i omega t}.
        c_eg = -d.xi0 * std::cos(d.omega_s * t + d.phi_s) * env *
               std::exp(kI * (carrier_omega * t));
    }
    m(1, 0) = c_eg;
    m(0, 1) = std::conj(c_eg);
    return m;
}

CompiledPairHamiltonian::CompiledPairHamiltonian(const SystemLayout& layout,
                                                 const PairHamiltonian& ham)
    : ham_(ham), indexer_(layout, ham.atom, ham.cavity),
      cutoff_(layout.cavities()[layout.cavity_index(ham.cavity)].fock_cutoff),
      dim_(layout.dimension()) {}

void CompiledPairHamiltonian::build_block(double t, Eigen::MatrixXcd& block) const {
    const int pd = indexer_.pair_dim();
    block.resize(pd, pd);
    block.setZero();

    constexpr int I = static_cast<int>(AtomLevel::I);
    constexpr int G = static_cast<int>(AtomLevel::G);
    constexpr int E = static_cast<int>(AtomLevel::E);
    const auto p = [this](int level, int n) { return level * cutoff_ + n; };
    (void)I;

    const double delta = ham_.detuning.effective(t);
    for (int n = 0; n < cutoff_; ++n) {
        block(p(E, n), p(E, n)) = 0.5 * delta;
        block(p(G, n), p(G, n)) = -0.5 * delta;
    }

    const double omega_t = ham_.coupling.value(t);
    for (int n = 0; n + 1 < cutoff_; ++n) {
        const double g = omega_t * std::sqrt(static_cast<double>(n + 1));
        block(p(E, n), p(G, n + 1)) += g;
        block(p(G, n + 1), p(E, n)) += g;
    }

    for (const auto& d : ham_.drives) {
        const Eigen::Matrix2cd m = drive_term(d, t, ham_.carrier_omega);
        for (int n = 0; n < cutoff_; ++n) {
            block(p(E, n), p(G, n)) += m(1, 0);
            block(p(G, n), p(E, n)) += m(0, 1);
        }
    }

    for (const auto& dd : ham_.dressed_drives) {
        if (dd.xi0 == 0.0) continue;
        if (dd.n + 1 >= cutoff_) {
            throw OutOfTruncation("dressed drive sector exceeds the fock cutoff");
        }
        CouplingProfile c = ham_.coupling;
        const DressedLevel level = dressed_level(c, delta, dd.n, dd.branch, t);
        const Complex amp =
            -0.5 * dd.xi0 * dd.envelope(t) * std::exp(-kI * (dd.detuning_rot * t + dd.phi));
        // -(xi/2) env e^{-i(...)} |V(t)><g,0| + h.c.
        const int g0 = p(G, 0);
        block(p(E, dd.n), g0) += amp * level.coeff_e;
        block(p(G, dd.n + 1), g0) += amp * level.coeff_g;
        block(g0, p(E, dd.n)) += std::conj(amp * level.coeff_e);
        block(g0, p(G, dd.n + 1)) += std::conj(amp * level.coeff_g);
    }
}

void CompiledPairHamiltonian::apply(double t, const Eigen::VectorXcd& in, Eigen::VectorXcd& out,
                                    Eigen::MatrixXcd& block) const {
    build_block(t, block);
    const int pd = indexer_.pair_dim();
    out.setZero(dim_);
    Eigen::VectorXcd pin(pd), pout(pd);
    for (int r = 0; r < indexer_.spectator_count(); ++r) {
        const int base = indexer_.spectator_base(r);
        for (int q = 0; q < pd; ++q) pin(q) = in(base + indexer_.offset(q));
        pout.noalias() = block * pin;
        for (int q = 0; q < pd; ++q) out(base + indexer_.offset(q)) = pout(q);
    }
}

Eigen::MatrixXcd CompiledPairHamiltonian::dense(double t) const {
    Eigen::MatrixXcd block;
    build_block(t, block);
    Eigen::MatrixXcd h = Eigen::MatrixXcd::Zero(dim_, dim_);
    const int pd = indexer_.pair_dim();
    for (int r = 0; r < indexer_.spectator_count(); ++r) {
        const int base = indexer_.spectator_base(r);
        for (int q = 0; q < pd; ++q) {
            for (int q2 = 0; q2 < pd; ++q2) {
                h(base + indexer_.offset(q), base + indexer_.offset(q2)) = block(q, q2);
            }
        }
    }
    return h;
}

double CompiledPairHamiltonian::rate_scale() const {
    double rate = std::abs(ham_.detuning.delta) + std::abs(ham_.detuning.stark_offset) +
                  ham_.coupling.omega0 * std::sqrt(static_cast<double>(cutoff_));
    for (const auto& d : ham_.drives) {
        rate += d.xi0 + std::abs(d.omega_s - ham_.carrier_omega);
        if (!d.rwa) rate += std::abs(d.omega_s + ham_.carrier_omega);
    }
    for (const auto& dd : ham_.dressed_drives) rate += dd.xi0 + std::abs(dd.detuning_rot);
    return std::max(rate, 1.0);
}

}  // namespace cavityqc
