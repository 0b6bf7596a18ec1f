#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <chrono>
#include <random>

#include "cavityqc/dressed.hpp"
#include "cavityqc/hamiltonian.hpp"

using namespace cavityqc;

namespace {

constexpr double kOmega0 = 4.2e5;
constexpr double kDelta = 0.18 * kOmega0;
constexpr double kTau = 100e-6;

CouplingProfile paper_coupling() { return {kOmega0, kTau, 0.0}; }

// Literal closed-form dressed coefficients, written exactly as the raw
// formula (verification oracle for the half-angle implementation).
void literal_dressed(double delta, double omega, int n, int sign, double& ce, double& cg) {
    const double root = std::sqrt(0.25 * delta * delta + omega * omega * (n + 1));
    const double num_e = 0.5 * delta + sign * root;
    const double num_g = omega * std::sqrt(static_cast<double>(n + 1));
    const double norm = std::sqrt(0.5 * delta * delta + 2.0 * omega * omega * (n + 1) +
                                  sign * delta * root);
    ce = num_e / norm;
    cg = num_g / norm;
}

}  // namespace

TEST_CASE("decoupled limit: branch - is |g,n+1> with energy omega - delta/2") {
    CouplingProfile c = paper_coupling();
    c.omega0 = 0.0;
    const auto level = dressed_level(c, kDelta, 0, Branch::Minus, 0.0);
    CHECK(level.coeff_e == doctest::Approx(0.0));
    CHECK(level.coeff_g == doctest::Approx(1.0));
    const double omega_lab = 2.0e9;
    CHECK(level.lab_energy(omega_lab) == doctest::Approx(omega_lab - 0.5 * kDelta));

    const auto plus = dressed_level(c, kDelta, 0, Branch::Plus, 0.0);
    CHECK(plus.coeff_e == doctest::Approx(1.0));
    CHECK(plus.coeff_g == doctest::Approx(0.0));
}

TEST_CASE("resonant symmetry: equal-weight superpositions split by 2 Omega sqrt(n+1)") {
    const CouplingProfile c = paper_coupling();
    for (int n : {0, 1, 2}) {
        for (double t : {-0.5 * kTau, 0.0, 0.8 * kTau}) {
            const auto plus = dressed_level(c, 0.0, n, Branch::Plus, t);
            const auto minus = dressed_level(c, 0.0, n, Branch::Minus, t);
            const double rt = 1.0 / std::sqrt(2.0);
            CHECK(plus.coeff_e == doctest::Approx(rt));
            CHECK(plus.coeff_g == doctest::Approx(rt));
            CHECK(minus.coeff_e == doctest::Approx(-rt));
            CHECK(minus.coeff_g == doctest::Approx(rt));
            CHECK(plus.energy_rot - minus.energy_rot ==
                  doctest::Approx(2.0 * c.value(t) * std::sqrt(n + 1.0)));
        }
    }
}

TEST_CASE("paper point: splitting 2 sqrt((delta/2)^2 + Omega0^2)") {
    const CouplingProfile c = paper_coupling();
    const auto plus = dressed_level(c, kDelta, 0, Branch::Plus, 0.0);
    const auto minus = dressed_level(c, kDelta, 0, Branch::Minus, 0.0);
    CHECK(plus.energy_rot - minus.energy_rot ==
          doctest::Approx(2.0 * std::sqrt(0.25 * kDelta * kDelta + kOmega0 * kOmega0)));
}

TEST_CASE("1000 random sectors match the 2x2 eigensolve to 1e-10 in under a second") {
    std::mt19937 rng(2024);
    std::uniform_real_distribution<double> uo(1e4, 1e6);
    std::uniform_real_distribution<double> ud(-5e5, 5e5);
    std::uniform_int_distribution<int> un(0, 5);
    std::uniform_real_distribution<double> ut(-2.0, 2.0);

    const auto start = std::chrono::steady_clock::now();
    for (int trial = 0; trial < 1000; ++trial) {
        const CouplingProfile c{uo(rng), kTau, 0.0};
        const double delta = ud(rng);
        const int n = un(rng);
        const double t = ut(rng) * kTau;

        const double g = c.value(t) * std::sqrt(n + 1.0);
        Eigen::Matrix2d sector;  // basis {|e,n>, |g,n+1>}
        sector << 0.5 * delta, g, g, -0.5 * delta;
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> solver(sector);

        for (int b = 0; b < 2; ++b) {
            const Branch branch = b == 0 ? Branch::Minus : Branch::Plus;
            const auto level = dressed_level(c, delta, n, branch, t);
            CHECK(std::abs(level.energy_rot - solver.eigenvalues()(b)) <=
                  1e-10 * std::max(1.0, std::abs(solver.eigenvalues()(b))));
            Eigen::Vector2d v = solver.eigenvectors().col(b);
            const double ov = std::abs(v(0) * level.coeff_e + v(1) * level.coeff_g);
            CHECK(ov == doctest::Approx(1.0).epsilon(1e-10));
        }

        // Against the literal closed form where it is well conditioned.
        if (delta > 1e4 && c.value(t) > 1e3) {
            double ce, cg;
            literal_dressed(delta, c.value(t), n, +1, ce, cg);
            const auto plus = dressed_level(c, delta, n, Branch::Plus, t);
            CHECK(plus.coeff_e == doctest::Approx(ce).epsilon(1e-10));
            CHECK(plus.coeff_g == doctest::Approx(cg).epsilon(1e-10));
        }
    }
    const auto elapsed = std::chrono::steady_clock::now() - start;
    CHECK(std::chrono::duration_cast<std::chrono::milliseconds>(elapsed).count() < 1000);
}

TEST_CASE("orthonormality and eigen-residual of dressed pairs") {
    std::mt19937 rng(77);
    std::uniform_real_distribution<double> u(0.2, 1.8);
    const SystemLayout layout({{"A", 4, 0.0}}, {"a1"});
    for (int trial = 0; trial < 25; ++trial) {
        PairHamiltonian spec;
        spec.atom = "a1";
        spec.cavity = "A";
        spec.coupling = {kOmega0 * u(rng), kTau, 0.0};
        spec.detuning = {kDelta * u(rng)};
        const CompiledPairHamiltonian ham(layout, spec);
        const double t = (u(rng) - 1.0) * kTau;
        Eigen::MatrixXcd block;
        ham.build_block(t, block);
        for (int n = 0; n < 3; ++n) {
            const auto plus = dressed_level(spec.coupling, spec.detuning.delta, n, Branch::Plus, t);
            const auto minus = dressed_level(spec.coupling, spec.detuning.delta, n, Branch::Minus, t);
            const Eigen::VectorXcd vp = plus.pair_vector(4);
            const Eigen::VectorXcd vm = minus.pair_vector(4);
            CHECK(std::abs(vp.dot(vm)) < 1e-12);
            CHECK((block * vp - plus.energy_rot * vp).norm() < 1e-10 * std::abs(plus.energy_rot));
            CHECK((block * vm - minus.energy_rot * vm).norm() < 1e-10 * std::abs(minus.energy_rot));
        }
    }
}

TEST_CASE("adiabaticity measure zeroes and paper-point maxima") {
    const CouplingProfile c = paper_coupling();
    for (double t : {-kTau, 0.3 * kTau, 2.0 * kTau}) {
        CHECK(adiabaticity_measure(c, kDelta, 0, t) == 0.0);
        CHECK(adiabaticity_measure(c, 0.0, 1, t) == 0.0);
    }
    // Dense-scan oracle values at the paper operating point. Over the transit
    // time 2*tau the measure stays well below the 0.05 feasibility threshold;
    // the global maximum sits in the Gaussian tails where the gap collapses
    // to delta, and reaches 0.171.
    const auto transit = max_adiabaticity(c, kDelta, 1, -kTau, kTau, 40001);
    CHECK(transit.max_value == doctest::Approx(0.014512).epsilon(1e-3));
    CHECK(transit.max_value < 0.05);
    const auto global = max_adiabaticity(c, kDelta, 1, -4.0 * kTau, 4.0 * kTau, 40001);
    CHECK(global.max_value == doctest::Approx(0.171065).epsilon(1e-3));
    CHECK(std::abs(global.argmax_t) == doctest::Approx(1.70 * kTau).epsilon(1e-2));
}

TEST_CASE("adiabaticity measure reduces to the weak-coupling form as Omega0 -> 0") {
    const double t = 0.7 * kTau;
    double previous_ratio = 0.0;
    for (int k = 0; k < 6; ++k) {
        const double omega0 = kOmega0 * std::pow(10.0, -k);
        const CouplingProfile c{omega0, kTau, 0.0};
        const double weak = std::abs(c.derivative(t)) * kDelta * 1.0 /
                            (4.0 * std::pow(0.25 * kDelta * kDelta, 1.5));
        const double ratio = adiabaticity_measure(c, kDelta, 1, t) / weak;
        if (k > 0) CHECK(std::abs(ratio - 1.0) < std::abs(previous_ratio - 1.0) + 1e-12);
        previous_ratio = ratio;
    }
    CHECK(std::abs(previous_ratio - 1.0) < 1e-6);
}

TEST_CASE("transition frequencies match the closed-form eigenvalues") {
    const CouplingProfile c = paper_coupling();
    const double omega_lab = 2.0e9;
    const double r0 = std::sqrt(0.25 * kDelta * kDelta + kOmega0 * kOmega0);
    const double r1 = std::sqrt(0.25 * kDelta * kDelta + 2.0 * kOmega0 * kOmega0);

    CHECK(transition_frequency(LevelRef::dressed(1, Branch::Plus),
                               LevelRef::dressed(0, Branch::Minus), c, kDelta, omega_lab) ==
          doctest::Approx(omega_lab + r1 + r0).epsilon(1e-12));
    CHECK(transition_frequency(LevelRef::dressed(0, Branch::Minus), LevelRef::g0(), c, kDelta,
                               omega_lab) ==
          doctest::Approx(omega_lab - r0 + 0.5 * kDelta).epsilon(1e-12));

    CouplingProfile off = c;
    off.omega0 = 0.0;
    CHECK(transition_frequency(LevelRef::dressed(0, Branch::Minus), LevelRef::g0(), off, kDelta,
                               omega_lab) == doctest::Approx(omega_lab).epsilon(1e-12));

    CHECK_THROWS(transition_frequency(LevelRef::g0(), LevelRef::g0(), c, kDelta, omega_lab));
}

TEST_CASE("sigma_x selection rules and dressed matrix elements") {
    const CouplingProfile c = paper_coupling();

    // Bare |g,1> is the Omega -> 0 limit of V-(0); no sigma_x path to |g,0>.
    CouplingProfile off = c;
    off.omega0 = 0.0;
    CHECK(std::abs(sigma_x_element(LevelRef::dressed(0, Branch::Minus), LevelRef::g0(), off,
                                   kDelta)) == 0.0);

    // Resonant case: <g,0| sigma_x |V-(0)> = -1/sqrt(2).
    CHECK(sigma_x_element(LevelRef::dressed(0, Branch::Minus), LevelRef::g0(), c, 0.0).real() ==
          doctest::Approx(-1.0 / std::sqrt(2.0)));

    // Paper point: magnitude equals sin(theta/2) and decreases with Omega0/delta.
    const double expected =
        std::sin(0.5 * std::atan2(2.0 * kOmega0, kDelta));
    CHECK(std::abs(sigma_x_element(LevelRef::dressed(0, Branch::Minus), LevelRef::g0(), c,
                                   kDelta)) == doctest::Approx(expected).epsilon(1e-12));
    const CouplingProfile weaker{0.5 * kOmega0, kTau, 0.0};
    CHECK(std::abs(sigma_x_element(LevelRef::dressed(0, Branch::Minus), LevelRef::g0(), weaker,
                                   kDelta)) < expected);

    DriveSpec d;
    d.xi0 = 1.415e5;
    CHECK(std::abs(drive_matrix_element(d, LevelRef::dressed(0, Branch::Minus), LevelRef::g0(), c,
                                        kDelta)) == doctest::Approx(0.5 * d.xi0 * expected));
}

TEST_CASE("pulse selectivity accepts the paper pulses and rejects colliding drives") {
    const CouplingProfile c = paper_coupling();
    const double r0 = std::sqrt(0.25 * kDelta * kDelta + kOmega0 * kOmega0);
    const double r1 = std::sqrt(0.25 * kDelta * kDelta + 2.0 * kOmega0 * kOmega0);

    // C-NOT(cavity->atom): V+(1) <- V-(0) at rotating frequency r1 + r0.
    auto report = check_pulse_selectivity(c, kDelta, 4, r1 + r0, 14e-6,
                                          LevelRef::dressed(0, Branch::Minus),
                                          LevelRef::dressed(1, Branch::Plus));
    CHECK(report.ok);

    // C-NOT(atom->cavity): V-(0) <- g0 at delta/2 - r0. The paper's own
    // tau_s = 19 us sits 0.05% inside the 4/tau_s width on the
    // V-(0)->V-(1) line, so the strict check is borderline-negative there;
    // the protocol layer admits it through a configurable margin factor.
    report = check_pulse_selectivity(c, kDelta, 4, 0.5 * kDelta - r0, 19e-6, LevelRef::g0(),
                                     LevelRef::dressed(0, Branch::Minus));
    CHECK(report.min_separation / report.required > 0.99);
    CHECK(report.min_separation / report.required < 1.01);
    CHECK(report.worst_line == "V-(0)->V-(1)");
    report = check_pulse_selectivity(c, kDelta, 4, 0.5 * kDelta - r0, 20e-6, LevelRef::g0(),
                                     LevelRef::dressed(0, Branch::Minus));
    CHECK(report.ok);

    // A drive parked right on a parasitic line must be rejected.
    report = check_pulse_selectivity(c, kDelta, 4, r1 - r0, 19e-6, LevelRef::g0(),
                                     LevelRef::dressed(0, Branch::Minus));
    CHECK_FALSE(report.ok);
}
