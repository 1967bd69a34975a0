#include "dicke/liouvillian.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <random>

using namespace dicke;

namespace {

const std::vector<double> kTableS2Detunings{-0.62448819, 5.93539815, -1.53186917, 3.04670911};

ModelParams table_s2_model(double dd = 0.0, Boundary b = Boundary::none) {
    ModelParams p;
    p.atom_count = 4;
    p.drive = 200.0;
    p.detunings = kTableS2Detunings;
    p.dd_strength = dd;
    p.boundary = b;
    return p;
}

std::vector<double> sorted_decays(const LiouvillianSpectrum& s, std::size_t k) {
    std::vector<double> d;
    for (Eigen::Index i = 0; i < s.size(); ++i) d.push_back(s.decay(i));
    std::sort(d.begin(), d.end());
    d.resize(k);
    return d;
}

} // namespace

TEST(Vectorization, RoundTripAndColumnStacking) {
    Operator a(2, 2);
    a << 1.0, 2.0, 3.0, 4.0;
    const Vector v = vectorize(a);
    EXPECT_EQ(v(1), cplx(3.0));
    EXPECT_EQ(v(2), cplx(2.0));
    EXPECT_EQ(unvectorize(v), a);
}

TEST(Liouvillian, SingleAtomClosedForm) {
    // −γ/2, −3γ/4 ± i√(4Ω² − γ²/16), 0
    ModelParams p;
    p.atom_count = 1;
    p.drive = 1.0;
    p.detunings = {0.0};
    const auto s = spectrum(build_liouvillian(p));
    ASSERT_EQ(s.size(), 4);
    EXPECT_LT(std::abs(s.eigenvalues(0)), 1e-12);
    const double w = std::sqrt(4.0 - 1.0 / 16.0);
    std::vector<cplx> expected{{-0.5, 0.0}, {-0.75, w}, {-0.75, -w}};
    for (cplx e : expected) {
        double best = 1e9;
        for (Eigen::Index i = 1; i < 4; ++i) best = std::min(best, std::abs(s.eigenvalues(i) - e));
        EXPECT_LT(best, 1e-10) << e;
    }
}

TEST(Liouvillian, MatrixFreeAgreesWithAssembled) {
    ModelParams p;
    p.atom_count = 3;
    p.drive = 0.7;
    p.detunings = {0.1, -0.4, 0.9};
    p.dd_strength = 0.3;
    p.boundary = Boundary::periodic;
    const auto L = build_liouvillian(p);
    const Operator h = hamiltonian(p);
    const Operator jm = collective_ops(3).jminus;
    std::mt19937_64 rng(11);
    std::normal_distribution<double> nd;
    for (int trial = 0; trial < 10; ++trial) {
        Operator rho(8, 8);
        for (Eigen::Index i = 0; i < rho.size(); ++i) rho(i) = cplx(nd(rng), nd(rng));
        const Operator direct = unvectorize(L.matrix * vectorize(rho));
        const Operator free = apply_liouvillian(h, jm, 1.0, rho);
        EXPECT_LT((direct - free).cwiseAbs().maxCoeff(), 1e-12);
    }
}

TEST(Liouvillian, RejectsNegativeDecay) {
    const auto ops = collective_ops(1);
    EXPECT_THROW(build_liouvillian(ops.jz, ops.jminus, -1.0), std::invalid_argument);
}

TEST(Liouvillian, OversizedModelRejected) {
    ModelParams p;
    p.atom_count = kMaxDenseAtoms + 1;
    p.detunings.assign(static_cast<std::size_t>(p.atom_count), 0.0);
    EXPECT_THROW(build_liouvillian(p), std::invalid_argument);
}

// Reference decay rates from an independent dense numpy diagonalization.
TEST(Spectrum, TableS2RunMatchesReference) {
    const auto s = spectrum(build_liouvillian(table_s2_model()));
    const std::vector<double> ref{0.0,
                                  1.304851622219e-04,
                                  1.914823903107e-03,
                                  2.599632880173e-03,
                                  2.724268797231e-03,
                                  2.309879149246e-02,
                                  2.334975444302e-02,
                                  3.300294728863e-02,
                                  3.504472724261e-02,
                                  3.551281111255e-02,
                                  3.869005385428e-02,
                                  4.150766105511e-02,
                                  4.281524327241e-02,
                                  5.572925464463e-02,
                                  4.590253350540e-01,
                                  4.677004510170e-01};
    const auto got = sorted_decays(s, ref.size());
    for (std::size_t i = 0; i < ref.size(); ++i) EXPECT_NEAR(got[i], ref[i], 1e-9) << i;
    EXPECT_LT(s.residuals.maxCoeff(), 1e-8);
    EXPECT_LT(s.biorth_error, 1e-6);
}

TEST(Spectrum, DipoleGeometriesMatchReference) {
    const std::vector<double> periodic{0.0, 6.971665219131e-05, 4.843907253014e-03, 8.159401266217e-03,
                                       1.980783793342e-02, 1.980783793346e-02, 2.375877267534e-02,
                                       3.646234356391e-02, 3.646234356400e-02, 6.462721626755e-02};
    const std::vector<double> open{0.0, 8.478920811419e-03, 3.711704450060e-02, 4.635827152810e-02,
                                   4.635827152810e-02, 4.731407561755e-02, 4.731407561757e-02,
                                   6.029481507689e-02, 6.589608312924e-02, 6.589608312930e-02};
    const auto sp = sorted_decays(spectrum(build_liouvillian(table_s2_model(1.0, Boundary::periodic))), 10);
    const auto so = sorted_decays(spectrum(build_liouvillian(table_s2_model(1.0, Boundary::open))), 10);
    for (std::size_t i = 0; i < 10; ++i) {
        EXPECT_NEAR(sp[i], periodic[i], 1e-9) << i;
        EXPECT_NEAR(so[i], open[i], 1e-9) << i;
    }
}

TEST(Spectrum, SortOrder) {
    const auto s = spectrum(build_liouvillian(table_s2_model()));
    EXPECT_LT(std::abs(s.eigenvalues(0)), 1e-9);
    // equal decay rates within the tie tolerance are ordered by |Im|
    const double tie = 1e-10 * std::max(1.0, s.norm);
    for (Eigen::Index i = 2; i < s.size(); ++i) EXPECT_LE(s.decay(i - 1), s.decay(i) + tie);
}

TEST(Spectrum, UniqueSteadyStateForGenericParameters) {
    const auto s = spectrum(build_liouvillian(table_s2_model()));
    EXPECT_EQ(zero_eigenvalue_count(s), 1);
    const Operator rho = steady_state(s);
    EXPECT_NEAR(rho.trace().real(), 1.0, 1e-12);
    EXPECT_LT((rho - rho.adjoint()).norm(), 1e-12);
    Eigen::SelfAdjointEigenSolver<Operator> es(rho);
    EXPECT_GT(es.eigenvalues().minCoeff(), -1e-10);
}

TEST(Spectrum, NonstationaryEigenmatricesAreTraceless) {
    const auto s = spectrum(build_liouvillian(table_s2_model()));
    for (Eigen::Index i = 1; i < s.size(); ++i) EXPECT_LT(std::abs(s.eigenmatrix(i).trace()), 1e-8) << i;
}

TEST(Spectrum, DegenerateSteadyStateReported) {
    // no drive, no disorder: the singlet and |gg> are both stationary
    ModelParams p;
    p.atom_count = 2;
    p.detunings = {0.0, 0.0};
    const auto s = spectrum(build_liouvillian(p));
    EXPECT_GE(zero_eigenvalue_count(s), 2);
    try {
        steady_state(s);
        FAIL() << "expected DegenerateSteadyState";
    } catch (const DegenerateSteadyState& e) {
        EXPECT_GE(e.multiplicity(), 2);
        EXPECT_EQ(e.subspace().cols(), e.multiplicity());
    }
}

TEST(Classification, TableS2Run) {
    const auto s = spectrum(build_liouvillian(table_s2_model()));
    const auto r = classify_subradiant(s);
    EXPECT_NEAR(r.lambda1.real(), -1.304851622219e-04, 1e-9);
    EXPECT_EQ(r.count_inclusive, 13);
    EXPECT_EQ(r.count_exclusive, 12);
    EXPECT_GT(cluster_gap_ratio(s, 14), 5.0);
}

TEST(Classification, DriveLimitCounts) {
    EXPECT_EQ(drive_limit_dark_count(table_s2_model()).inclusive, 14);
    const auto periodic = drive_limit_dark_count(table_s2_model(1.0, Boundary::periodic));
    EXPECT_EQ(periodic.inclusive, 7);
    EXPECT_EQ(periodic.exclusive, 6);
    const auto open = drive_limit_dark_count(table_s2_model(1.0, Boundary::open));
    EXPECT_EQ(open.inclusive, 2);
    EXPECT_EQ(open.exclusive, 1);
    EXPECT_THROW(drive_limit_dark_count(table_s2_model(), 1.0), std::invalid_argument);
}

TEST(Classification, ClusterFrequenciesOpenChain) {
    const auto s = spectrum(build_liouvillian(table_s2_model(1.0, Boundary::open)));
    const auto f = cluster_frequencies(s, 14);
    ASSERT_EQ(f.size(), 4u);
    EXPECT_NEAR(f[0], 0.950222, 1e-5);
    EXPECT_NEAR(f[3], 2.32519, 1e-5);
}

TEST(Classification, DistinctValues) {
    const auto d = distinct_values({1.0, 1.0 + 1e-8, 2.0, 0.5}, 1e-6);
    ASSERT_EQ(d.size(), 3u);
    EXPECT_DOUBLE_EQ(d[0], 0.5);
}

TEST(Decomposition, ReconstructsInitialState) {
    const auto s = spectrum(build_liouvillian(table_s2_model()));
    Operator rho0 = Operator::Zero(16, 16);
    rho0(15, 15) = 1.0;
    const Vector c = decompose_initial(s, rho0);
    EXPECT_LT((s.right * c - vectorize(rho0)).norm(), 1e-8);
    EXPECT_NEAR(std::abs(c(0) * s.eigenmatrix(0).trace()), 1.0, 1e-8);
}
