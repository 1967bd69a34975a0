#include "dicke/operators.hpp"

#include <gtest/gtest.h>

#include <numeric>

using namespace dicke;

namespace {

double max_abs(const Operator& a) { return a.cwiseAbs().maxCoeff(); }

} // namespace

TEST(SingleAtom, PauliAlgebra) {
    const Operator sz = single_atom_op(1, SpinKind::z, 1);
    const Operator lower = single_atom_op(1, SpinKind::lower, 1);
    const Operator raise = single_atom_op(1, SpinKind::raise, 1);
    // |e> is index 0
    EXPECT_DOUBLE_EQ(sz(0, 0).real(), 1.0);
    EXPECT_DOUBLE_EQ(sz(1, 1).real(), -1.0);
    EXPECT_DOUBLE_EQ(lower(1, 0).real(), 1.0);
    EXPECT_LT(max_abs(raise - lower.adjoint()), 1e-15);
    EXPECT_LT(max_abs(commutator(raise, lower) - sz), 1e-15);
}

TEST(SingleAtom, EmbeddingActsOnOneFactor) {
    const int n = 3;
    const Operator sz2 = single_atom_op(2, SpinKind::z, n);
    for (int s = 0; s < 8; ++s) {
        const double expected = ((s >> 1) & 1) == 0 ? 1.0 : -1.0;
        EXPECT_DOUBLE_EQ(sz2(s, s).real(), expected) << s;
    }
    EXPECT_THROW(single_atom_op(0, SpinKind::z, n), std::invalid_argument);
    EXPECT_THROW(single_atom_op(4, SpinKind::z, n), std::invalid_argument);
}

TEST(Collective, AngularMomentumCommutators) {
    for (int n = 1; n <= 5; ++n) {
        const auto ops = collective_ops(n);
        EXPECT_LT(max_abs(commutator(ops.jx, ops.jy) - I_unit * ops.jz), 1e-12) << n;
        EXPECT_LT(max_abs(commutator(ops.jy, ops.jz) - I_unit * ops.jx), 1e-12) << n;
        EXPECT_LT(max_abs(commutator(ops.jz, ops.jx) - I_unit * ops.jy), 1e-12) << n;
        EXPECT_LT(max_abs(ops.jx - 0.5 * (ops.jplus() + ops.jminus)), 1e-12) << n;
    }
}

TEST(Collective, JSquaredSpectrum) {
    const auto ops = collective_ops(4);
    Eigen::SelfAdjointEigenSolver<Operator> es(ops.j_squared());
    // j(j+1) with multiplicity (2j+1) d_j: 0 x2, 2 x9, 6 x5
    std::vector<double> ev(es.eigenvalues().data(), es.eigenvalues().data() + 16);
    EXPECT_NEAR(ev[0], 0.0, 1e-10);
    EXPECT_NEAR(ev[1], 0.0, 1e-10);
    EXPECT_NEAR(ev[2], 2.0, 1e-10);
    EXPECT_NEAR(ev[10], 2.0, 1e-10);
    EXPECT_NEAR(ev[11], 6.0, 1e-10);
    EXPECT_NEAR(ev[15], 6.0, 1e-10);
}

TEST(Hamiltonian, EquidistantRule) {
    const auto w = equidistant_detunings(4, 2.0);
    ASSERT_EQ(w.size(), 4u);
    EXPECT_NEAR(w[0], -2.0, 1e-15);
    EXPECT_NEAR(w[1], -2.0 / 3.0, 1e-15);
    EXPECT_NEAR(w[2], 2.0 / 3.0, 1e-15);
    EXPECT_NEAR(w[3], 2.0, 1e-15);
    EXPECT_EQ(equidistant_detunings(1, 3.0), std::vector<double>{0.0});
}

TEST(Hamiltonian, TermsAndHermiticity) {
    ModelParams p;
    p.atom_count = 3;
    p.drive = 1.5;
    p.detunings = {0.3, -0.7, 1.1};
    p.dd_strength = 0.4;
    p.boundary = Boundary::open;
    const Operator h = hamiltonian(p);
    EXPECT_LT(max_abs(h - h.adjoint()), 1e-14);
    const auto ops = collective_ops(3);
    Operator expected = 2.0 * 1.5 * ops.jx;
    for (int n = 1; n <= 3; ++n) expected += p.detunings[n - 1] * single_atom_op(n, SpinKind::z, 3);
    for (auto [a, b] : std::vector<std::pair<int, int>>{{1, 2}, {2, 3}}) {
        const Operator hop = single_atom_op(a, SpinKind::raise, 3) * single_atom_op(b, SpinKind::lower, 3);
        expected += 0.4 * (hop + hop.adjoint());
    }
    EXPECT_LT(max_abs(h - expected), 1e-14);
}

TEST(Hamiltonian, Bonds) {
    EXPECT_EQ(dipole_bonds(4, Boundary::periodic).size(), 4u);
    EXPECT_EQ(dipole_bonds(4, Boundary::open).size(), 3u);
    EXPECT_EQ(dipole_bonds(2, Boundary::periodic).size(), 1u);
    EXPECT_TRUE(dipole_bonds(4, Boundary::none).empty());
}

TEST(ModelParams, Validation) {
    ModelParams p;
    p.atom_count = 2;
    p.detunings = {0.0, 0.0};
    EXPECT_NO_THROW(p.validate());
    p.detunings = {0.0};
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p.detunings = {0.0, 0.0};
    p.drive = -1.0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p.drive = 1.0;
    p.dd_strength = 1.0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
    p.boundary = Boundary::periodic;
    EXPECT_NO_THROW(p.validate());
    p.atom_count = 0;
    EXPECT_THROW(p.validate(), std::invalid_argument);
}

TEST(Degeneracy, KnownValues) {
    EXPECT_EQ(degeneracy_dj(4, HalfInt::from_int(2)), 1u);
    EXPECT_EQ(degeneracy_dj(4, HalfInt::from_int(1)), 3u);
    EXPECT_EQ(degeneracy_dj(4, HalfInt::from_int(0)), 2u);
    EXPECT_EQ(degeneracy_dj(5, HalfInt::from_twice(5)), 1u);
    EXPECT_EQ(degeneracy_dj(5, HalfInt::from_twice(3)), 4u);
    EXPECT_EQ(degeneracy_dj(5, HalfInt::from_twice(1)), 5u);
}

TEST(Degeneracy, CompletenessUpToEight) {
    for (int n = 1; n <= 8; ++n) {
        std::uint64_t total = 0;
        for (HalfInt j : spin_values(n)) total += degeneracy_dj(n, j) * static_cast<std::uint64_t>(j.twice + 1);
        EXPECT_EQ(total, static_cast<std::uint64_t>(hilbert_dim(n))) << n;
    }
}

class DickeBasisTest : public ::testing::TestWithParam<std::tuple<int, Axis>> {};

TEST_P(DickeBasisTest, OrthonormalEigenbasis) {
    const auto [n, axis] = GetParam();
    const auto basis = dicke_basis(n, axis);
    const auto ops = collective_ops(n);
    const Operator j2 = ops.j_squared();
    const Operator& jaxis = axis == Axis::z ? ops.jz : ops.jx;
    ASSERT_EQ(static_cast<int>(basis.states.size()), hilbert_dim(n));
    const Operator u = basis.matrix();
    EXPECT_LT(max_abs(u.adjoint() * u - Operator::Identity(u.cols(), u.cols())), 1e-10);
    for (const auto& st : basis.states) {
        const double jj = st.j.value() * (st.j.value() + 1.0);
        EXPECT_LT((j2 * st.vec - jj * st.vec).norm(), 1e-9);
        EXPECT_LT((jaxis * st.vec - st.m.value() * st.vec).norm(), 1e-9);
    }
    for (HalfInt j : spin_values(n)) EXPECT_EQ(basis.multiplicity(j), static_cast<int>(degeneracy_dj(n, j)));
}

TEST_P(DickeBasisTest, LadderConsistency) {
    const auto [n, axis] = GetParam();
    const auto basis = dicke_basis(n, axis);
    const auto ops = collective_ops(n);
    const Operator rot = detail::rotation_z_to_x(n);
    const Operator lower = axis == Axis::z ? ops.jminus : Operator(rot * ops.jminus * rot.adjoint());
    for (const auto& st : basis.states) {
        if (st.m.twice == -st.j.twice) continue;
        const auto& next = basis.find(st.j, HalfInt::from_twice(st.m.twice - 2), st.nu);
        const double j = st.j.value(), m = st.m.value();
        const double c = std::sqrt(j * (j + 1) - m * (m - 1));
        EXPECT_LT((lower * st.vec - c * next.vec).norm(), 1e-9);
    }
}

INSTANTIATE_TEST_SUITE_P(Sizes, DickeBasisTest,
                         ::testing::Combine(::testing::Values(1, 2, 3, 4, 5), ::testing::Values(Axis::z, Axis::x)));

TEST(DickeBasis, RejectsOutOfRange) {
    EXPECT_THROW(dicke_basis(0), std::invalid_argument);
    EXPECT_THROW(dicke_basis(9), std::invalid_argument);
}

TEST(DarkMixture, CommutesWithDriveAndIsNormalized) {
    const auto basis = dicke_basis(4, Axis::x);
    const auto ops = collective_ops(4);
    for (HalfInt j : spin_values(4))
        for (int a = 1; a <= basis.multiplicity(j); ++a)
            for (int b = 1; b <= basis.multiplicity(j); ++b) {
                const Operator rho = dark_mixture(j, a, b, basis);
                EXPECT_LT(max_abs(commutator(ops.jx, rho)), 1e-10);
                EXPECT_NEAR(std::abs(rho.trace()), a == b ? 1.0 : 0.0, 1e-10);
            }
    EXPECT_THROW(dark_mixture(HalfInt::from_int(1), 4, 1, basis), std::invalid_argument);
    EXPECT_THROW(dark_mixture(HalfInt::from_int(1), 1, 1, dicke_basis(4, Axis::z)), std::invalid_argument);
}
