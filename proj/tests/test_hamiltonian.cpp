#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "cavityqc/dressed.hpp"
#include "cavityqc/hamiltonian.hpp"

using namespace cavityqc;

namespace {

constexpr double kOmega0 = 4.2e5;        // rad/s
constexpr double kDelta = 0.18 * kOmega0;
constexpr double kTau = 100e-6;

SystemLayout pair_layout(int cutoff) {
    return SystemLayout({{"A", cutoff, 0.0}}, {"a1"});
}

PairHamiltonian paper_pair(int cutoff, double omega0 = kOmega0, double delta = kDelta) {
    (void)cutoff;
    PairHamiltonian h;
    h.atom = "a1";
    h.cavity = "A";
    h.coupling = {omega0, kTau, 0.0};
    h.detuning = {delta, 0.0, std::nullopt};
    return h;
}

}  // namespace

TEST_CASE("free-atom limit is diagonal with +-delta/2 and zero on level i") {
    const auto layout = pair_layout(2);
    auto spec = paper_pair(2);
    spec.coupling.omega0 = 0.0;
    const CompiledPairHamiltonian ham(layout, spec);
    const Eigen::MatrixXcd h = ham.dense(0.0);
    for (int i = 0; i < layout.dimension(); ++i) {
        const auto label = layout.label_of(i);
        double expected = 0.0;
        if (label.atoms[0] == AtomLevel::E) expected = 0.5 * kDelta;
        if (label.atoms[0] == AtomLevel::G) expected = -0.5 * kDelta;
        CHECK(std::abs(h(i, i) - Complex(expected, 0.0)) < 1e-12);
        for (int j = 0; j < layout.dimension(); ++j) {
            if (i != j) CHECK(std::abs(h(i, j)) == 0.0);
        }
    }
}

TEST_CASE("JC coupling vanishes in the Gaussian tail") {
    const auto layout = pair_layout(2);
    const auto spec = paper_pair(2);
    const CompiledPairHamiltonian ham(layout, spec);
    const Eigen::MatrixXcd h = ham.dense(-10.0 * kTau);
    double offdiag = 0.0;
    for (int i = 0; i < layout.dimension(); ++i) {
        for (int j = 0; j < layout.dimension(); ++j) {
            if (i != j) offdiag = std::max(offdiag, std::abs(h(i, j)));
        }
    }
    CHECK(offdiag < kOmega0 * std::exp(-100.0) + 1e-30);
}

TEST_CASE("pair block eigenvalues match the 2x2 eigensolve oracle") {
    const auto layout = pair_layout(2);
    const CompiledPairHamiltonian ham(layout, paper_pair(2));
    Eigen::MatrixXcd block;
    ham.build_block(0.0, block);

    // {|e,0>, |g,1>} sector extracted from the pair block.
    const int e0 = static_cast<int>(AtomLevel::E) * 2 + 0;
    const int g1 = static_cast<int>(AtomLevel::G) * 2 + 1;
    Eigen::Matrix2cd sector;
    sector << block(e0, e0), block(e0, g1), block(g1, e0), block(g1, g1);
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> solver(sector);
    const double expected = std::sqrt(0.25 * kDelta * kDelta + kOmega0 * kOmega0);
    CHECK(solver.eigenvalues()(0) == doctest::Approx(-expected).epsilon(1e-12));
    CHECK(solver.eigenvalues()(1) == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("drive term basics") {
    DriveSpec d;
    d.xi0 = 0.0;
    CHECK(drive_term(d, 0.0, 1.0).norm() == 0.0);

    d.xi0 = 1.4e5;
    d.omega_s = 2.0e9;
    d.phi_s = 0.0;
    d.tau_s = 19e-6;
    d.rwa = true;
    const Eigen::Matrix2cd m = drive_term(d, 0.0, 2.0e9);
    CHECK(std::abs(m(1, 0)) == doctest::Approx(0.5 * d.xi0));
    CHECK(std::abs(m(1, 0) - std::conj(m(0, 1))) < 1e-12);
}

TEST_CASE("hermiticity for randomized parameters and times") {
    std::mt19937 rng(21);
    std::uniform_real_distribution<double> u(0.1, 2.0);
    for (int trial = 0; trial < 30; ++trial) {
        const auto layout = pair_layout(4);
        PairHamiltonian spec = paper_pair(4, kOmega0 * u(rng), kDelta * u(rng));
        spec.carrier_omega = 2.0e9;
        DriveSpec d;
        d.xi0 = 1e5 * u(rng);
        d.omega_s = spec.carrier_omega + 4e5 * (u(rng) - 1.0);
        d.phi_s = 3.0 * (u(rng) - 1.0);
        d.tau_s = 19e-6;
        d.rwa = trial % 2 == 0;
        spec.drives.push_back(d);
        DressedDrive dd;
        dd.xi0 = 9e4 * u(rng);
        dd.detuning_rot = 7e5;
        dd.tau_s = 10e-6;
        dd.n = 2;
        dd.branch = Branch::Plus;
        spec.dressed_drives.push_back(dd);

        const CompiledPairHamiltonian ham(layout, spec);
        const double t = (u(rng) - 1.0) * 2.0 * kTau;
        const Eigen::MatrixXcd h = ham.dense(t);
        CHECK((h - h.adjoint()).cwiseAbs().maxCoeff() < 1e-12 * h.cwiseAbs().maxCoeff());
    }
}

TEST_CASE("level i stays decoupled and drives only touch g<->e") {
    const auto layout = pair_layout(3);
    PairHamiltonian spec = paper_pair(3);
    spec.carrier_omega = 2.0e9;
    DriveSpec d;
    d.xi0 = 1.4e5;
    d.omega_s = spec.carrier_omega - 3.9e5;
    d.tau_s = 19e-6;
    spec.drives.push_back(d);
    const CompiledPairHamiltonian ham(layout, spec);
    const Eigen::MatrixXcd h = ham.dense(0.3 * kTau);
    for (int i = 0; i < layout.dimension(); ++i) {
        const auto li = layout.label_of(i);
        for (int j = 0; j < layout.dimension(); ++j) {
            if (i == j) continue;
            const auto lj = layout.label_of(j);
            if (li.atoms[0] == AtomLevel::I || lj.atoms[0] == AtomLevel::I) {
                CHECK(std::abs(h(i, j)) == 0.0);
            }
        }
    }
    // The i diagonal carries no detuning either.
    const int i_idx = layout.index_of({{0}, {AtomLevel::I}});
    CHECK(std::abs(h(i_idx, i_idx)) == 0.0);
}

TEST_CASE("frame consistency: pair eigenvalues equal lab values minus omega(n+1)") {
    const int cutoff = 4;
    const auto layout = pair_layout(cutoff);
    const CompiledPairHamiltonian ham(layout, paper_pair(cutoff));
    Eigen::MatrixXcd block;
    for (double t : {-0.7 * kTau, 0.0, 0.4 * kTau}) {
        ham.build_block(t, block);
        for (int n = 0; n + 1 < cutoff; ++n) {
            const int e_n = static_cast<int>(AtomLevel::E) * cutoff + n;
            const int g_n1 = static_cast<int>(AtomLevel::G) * cutoff + n + 1;
            Eigen::Matrix2cd sector;
            sector << block(e_n, e_n), block(e_n, g_n1), block(g_n1, e_n), block(g_n1, g_n1);
            Eigen::SelfAdjointEigenSolver<Eigen::Matrix2cd> solver(sector);
            const double omega_lab = 2.0e9;
            for (int b = 0; b < 2; ++b) {
                const auto branch = b == 0 ? Branch::Minus : Branch::Plus;
                const auto level = dressed_level(ham.spec().coupling, kDelta, n, branch, t);
                CHECK(solver.eigenvalues()(b) ==
                      doctest::Approx(level.lab_energy(omega_lab) - omega_lab * (n + 1))
                          .epsilon(1e-10));
            }
        }
    }
}

TEST_CASE("stark-gated detuning turns on inside the window") {
    DetuningSpec det{kDelta, 50.0 * kOmega0, std::make_pair(-1e-5, 1e-5)};
    CHECK(det.effective(0.0) == doctest::Approx(kDelta + 50.0 * kOmega0));
    CHECK(det.effective(2e-5) == doctest::Approx(kDelta));
    DetuningSpec always{kDelta, 50.0 * kOmega0, std::nullopt};
    CHECK(always.effective(123.0) == doctest::Approx(kDelta + 50.0 * kOmega0));
}

TEST_CASE("compiled apply matches the dense composite matrix with spectators") {
    const SystemLayout layout({{"A", 3, 0.0}, {"B", 2, 0.0}}, {"a1"});
    PairHamiltonian spec = paper_pair(3);
    spec.carrier_omega = 2.0e9;
    DriveSpec d;
    d.xi0 = 2.4e5;
    d.omega_s = spec.carrier_omega + 1.0e6;
    d.tau_s = 14e-6;
    spec.drives.push_back(d);
    const CompiledPairHamiltonian ham(layout, spec);

    std::mt19937 rng(5);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::VectorXcd in(layout.dimension());
    for (int i = 0; i < in.size(); ++i) in(i) = Complex(gauss(rng), gauss(rng));

    const double t = 0.2 * kTau;
    Eigen::MatrixXcd block;
    Eigen::VectorXcd fast;
    ham.apply(t, in, fast, block);
    const Eigen::VectorXcd slow = ham.dense(t) * in;
    CHECK((fast - slow).cwiseAbs().maxCoeff() < 1e-9 * slow.cwiseAbs().maxCoeff());

    // Spectator cavity B amplitudes are untouched: H has no B support.
    const Eigen::MatrixXcd h = ham.dense(t);
    for (int i = 0; i < layout.dimension(); ++i) {
        const auto li = layout.label_of(i);
        for (int j = 0; j < layout.dimension(); ++j) {
            const auto lj = layout.label_of(j);
            if (li.fock[1] != lj.fock[1]) CHECK(std::abs(h(i, j)) == 0.0);
        }
    }
}
