#include "doctest.h"
#include "sbr/fock.hpp"
#include "sbr/model.hpp"

#include <numeric>

using namespace sbr;

namespace {

// independent enumeration oracle for the basis dimension
long count_occupations(int modes, int n_max) {
    if (modes == 0) return n_max >= 0 ? 1 : 0;
    long acc = 0;
    for (int n = 0; n <= n_max; ++n) acc += count_occupations(modes - 1, n_max - n);
    return acc;
}

ModeGrid grid6() { return make_grid(6, QuadScheme::gauss_legendre, 1.0, true); }

}  // namespace

TEST_CASE("basis dimensions") {
    ModeGrid g1 = make_grid(1, QuadScheme::midpoint);
    FockBasis b0 = build_basis(g1, 0);
    CHECK(b0.size() == 1);
    CHECK(b0.states[0] == std::vector<int>{0});

    ModeGrid g2 = make_grid(2, QuadScheme::midpoint, 1.0, true);
    FockBasis b1 = build_basis(g2, 1);
    CHECK(b1.size() == 3);

    FockBasis b = build_basis(grid6(), 3);
    CHECK(b.size() == 84);
    CHECK(b.size() == count_occupations(6, 3));
    // vacuum is state 0
    CHECK(b.states[0] == std::vector<int>(6, 0));
}

TEST_CASE("grid quadrature approximates the ball volume") {
    // sum of weights ~ 2 * int_{|k|<=1} d^3k = 2 * 4 pi / 3 (two polarizations)
    for (auto scheme : {QuadScheme::midpoint, QuadScheme::gauss_legendre}) {
        ModeGrid g = make_grid(24, scheme, 1.0, true);
        double total = grid_integral(g, [](double, int) { return 1.0; });
        CHECK(total == doctest::Approx(2.0 * 4.0 * M_PI / 3.0).epsilon(1e-3));
    }
}

TEST_CASE("creation operator matrix elements") {
    ModeGrid g1 = make_grid(1, QuadScheme::midpoint);
    FockBasis b = build_basis(g1, 2);
    OperatorMatrix adag = creation_op(b, 0);
    int i0 = b.index_of({0}), i1 = b.index_of({1}), i2 = b.index_of({2});
    CHECK(std::abs(adag.mat(i1, i0) - 1.0) < 1e-15);
    CHECK(std::abs(adag.mat(i2, i1) - std::sqrt(2.0)) < 1e-15);
    // truncation: nothing leaves the basis
    CHECK(adag.mat.col(i2).norm() == 0.0);

    // adjointness is exact
    OperatorMatrix a = annihilation_op(b, 0);
    CHECK((a.mat - adag.mat.adjoint()).norm() == 0.0);
}

TEST_CASE("CCR on the interior sub-basis") {
    ModeGrid g = make_grid(3, QuadScheme::midpoint, 1.0, true);
    FockBasis b = build_basis(g, 2);
    for (int q = 0; q < 3; ++q) {
        for (int p = 0; p < 3; ++p) {
            Mat comm = annihilation_op(b, q).mat * creation_op(b, p).mat -
                       creation_op(b, p).mat * annihilation_op(b, q).mat;
            Mat expect = (q == p) ? Mat(Mat::Identity(b.size(), b.size()))
                                  : Mat(Mat::Zero(b.size(), b.size()));
            // restrict to states with total bosons <= n_max - 1
            for (int s = 0; s < b.size(); ++s) {
                int tot = std::accumulate(b.states[s].begin(), b.states[s].end(), 0);
                if (tot > b.max_total_bosons - 1) continue;
                for (int t = 0; t < b.size(); ++t)
                    CHECK(std::abs(comm(t, s) - expect(t, s)) < 1e-14);
            }
        }
    }
}

TEST_CASE("field energy diagonal") {
    ModeGrid g = make_grid(2, QuadScheme::midpoint, 1.0, true);
    FockBasis b = build_basis(g, 2);
    OperatorMatrix hf = field_energy_op(b, g);
    CHECK(std::abs(hf.mat(0, 0)) == 0.0);
    int s = b.index_of({1, 1});
    double expect = g.modes[0].frequency + g.modes[1].frequency;
    CHECK(std::abs(hf.mat(s, s).real() - expect) < 1e-15);
}

TEST_CASE("smeared operators: vacuum pairing matches the quadrature sum") {
    ModeGrid g = grid6();
    FockBasis b = build_basis(g, 2);
    Mat amp(1, 1);
    amp << 1.0;
    CouplingFunction cf = power_law_coupling(amp, 0.7, 0.9, 0.75);
    auto [a, astar] = smeared_ops(b, g, cf, 1);
    CHECK((astar.mat - a.mat.adjoint()).norm() == 0.0);

    // <Omega, a(G) a*(G) Omega> = sum_q w_q |G(k_q)|^2
    Vec vac = Vec::Zero(b.size());
    vac(0) = 1.0;
    cplx got = vac.adjoint() * (a.mat * astar.mat) * vac;
    double want = 0;
    for (const auto& m : g.modes)
        want += m.weight * std::norm(cf(m.frequency, m.polarization)(0, 0));
    CHECK(std::abs(got.real() - want) < 1e-14 * std::max(1.0, want));
    CHECK(std::abs(got.imag()) < 1e-15);
}

TEST_CASE("interaction operator is Hermitian and has the right vacuum element") {
    ModeGrid g1 = make_grid(1, QuadScheme::midpoint);
    FockBasis b = build_basis(g1, 1);
    Mat amp(1, 1);
    amp << 0.8;
    CouplingFunction cf = power_law_coupling(amp, 1.0, 0.0, 0.75);  // G = 0.8 |k|... sigma 0
    cf = power_law_coupling(amp, 1.0, 0.0, 0.75);
    OperatorMatrix w = interaction_op(b, g1, cf, 1);
    CHECK((w.mat - w.mat.adjoint()).norm() < 1e-14);
    // <1|W|Omega> = sqrt(w_1) * G(k_1) / sqrt(omega_1)
    const Mode& m = g1.modes[0];
    double expect = std::sqrt(m.weight) * 0.8 / std::sqrt(m.frequency);
    CHECK(std::abs(w.mat(1, 0).real() - expect) < 1e-14);

    // G == 0 -> W == 0
    OperatorMatrix w0 = interaction_op(b, g1, zero_coupling(1, 0.75), 1);
    CHECK(w0.mat.norm() == 0.0);
}

TEST_CASE("parity conjugation flips the interaction") {
    ModeGrid g = make_grid(3, QuadScheme::gauss_legendre, 1.0, true);
    FockBasis b = build_basis(g, 2);
    Mat amp(2, 2);
    amp << 0.3, 0.5, 0.5, -0.2;
    CouplingFunction cf = power_law_coupling(amp, 1.0, 0.8, 0.75);
    OperatorMatrix w = interaction_op(b, g, cf, 2);
    Mat parity = lift_fock_mat(2, b, parity_op(b).mat);
    CHECK((parity * w.mat * parity + w.mat).norm() < 1e-13);

    CHECK(parity_op(b).mat(0, 0) == cplx(1.0));
    int s = b.index_of({1, 0, 0});
    CHECK(parity_op(b).mat(s, s) == cplx(-1.0));
}

TEST_CASE("pull-through residual vanishes on the interior") {
    ModeGrid g = grid6();
    FockBasis b = build_basis(g, 3);
    CHECK(pull_through_check(b, g, [](double) { return 1.0; }, 2) == 0.0);
    CHECK(pull_through_check(b, g, [](double r) { return r; }, 0) < 1e-13);
    // smooth cutoff function of r
    auto f = [](double r) { return 1.0 / (1.0 + r); };
    CHECK(pull_through_check(b, g, f, 4) < 1e-13);
}

TEST_CASE("dimension cap raises a resource error") {
    ModeGrid g = make_grid(40, QuadScheme::midpoint, 1.0, false);
    CHECK_THROWS_AS(build_basis(g, 4), resource_error);
}
