#include "property_checks.hpp"

#include <gtest/gtest.h>

using namespace dicke;

class RandomInstances : public ::testing::TestWithParam<int> {};

TEST_P(RandomInstances, InvariantsHold) {
    const int n = GetParam();
    std::mt19937_64 rng(1000 + static_cast<std::uint64_t>(n));
    const int samples = n <= 3 ? 8 : 3;
    for (int k = 0; k < samples; ++k) {
        const ModelParams p = dicke::testing::random_instance(rng, n);
        const auto report = dicke::testing::check_properties(p);
        for (const auto& c : report.checks)
            EXPECT_TRUE(c.ok) << "N=" << n << " sample " << k << " boundary " << to_string(p.boundary) << ": "
                              << c.name << " = " << c.value;
    }
}

INSTANTIATE_TEST_SUITE_P(Sizes, RandomInstances, ::testing::Values(1, 2, 3, 4));

TEST(Properties, LindbladDissipatorIsCollective) {
    // exchanging two atoms leaves L invariant when they carry equal detunings
    ModelParams p;
    p.atom_count = 3;
    p.drive = 1.1;
    p.detunings = {0.4, 0.4, -0.9};
    const Operator h = hamiltonian(p);
    const Operator swap = permutation_operator(Permutation{{1, 0, 2}});
    EXPECT_LT((swap * h * swap.adjoint() - h).cwiseAbs().maxCoeff(), 1e-14);
    const Operator jm = collective_ops(3).jminus;
    EXPECT_LT((swap * jm * swap.adjoint() - jm).cwiseAbs().maxCoeff(), 1e-14);
}
