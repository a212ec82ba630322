#include <gtest/gtest.h>

#include <random>

#include "mbrw/expectation.hpp"
#include "test_util.hpp"

using namespace mbrw;
using testutil::graph;

namespace {

struct Instance {
    TypeGraph g;
    SpatialChain chain;
    Environment env;
};

Instance random_instance(std::mt19937_64& rng, std::size_t nt, std::size_t nx, std::uint64_t seed)
{
    auto g = build_graph(testutil::random_edges(nt, rng, 0.5));
    auto chain = SpatialChain::from_matrix(testutil::random_stochastic(nx, rng));
    auto env = sample_environment(g, nx, seed);
    return {std::move(g), std::move(chain), std::move(env)};
}

} // namespace

TEST(MeanMatrix, Examples)
{
    const auto g1 = graph({{0, 0, 1.0}});
    const auto b1 = mean_matrix(Environment::constant(g1, 1, 2.0), SpatialChain::trivial(), g1);
    EXPECT_EQ(b1(0, 0), 2.0);

    const auto g2 = graph({{0, 1, 1.0}, {1, 0, 1.0}});
    const auto env2 = Environment::from_means(g2, 1, {0.0, 2.0, 3.0, 0.0});
    const auto b2 = mean_matrix(env2, SpatialChain::trivial(), g2);
    EXPECT_EQ(b2(0, 0), 0.0);
    EXPECT_EQ(b2(0, 1), 2.0);
    EXPECT_EQ(b2(1, 0), 3.0);
    EXPECT_EQ(b2(1, 1), 0.0);

    Eigen::MatrixXd p(2, 2);
    p << 0.5, 0.5, 0.5, 0.5;
    EXPECT_THROW(mean_matrix(env2, SpatialChain::from_matrix(p), g2), Error);
}

TEST(ExpectedPopulation, Examples)
{
    Eigen::MatrixXd b(1, 1);
    b << 2;
    EXPECT_EQ(expected_population(b, 0, 3), 8.0);
    EXPECT_EQ(expected_population(b, 0, 0), 1.0);
    Eigen::MatrixXd c(2, 2);
    c << 0, 2, 3, 0;
    EXPECT_EQ(expected_population(c, 0, 2), 6.0);
    EXPECT_EQ(expected_population(c, 1, 2), 6.0);
}

TEST(ExpectedPopulation, LogDomainPastOverflow)
{
    Eigen::MatrixXd b(1, 1);
    b << 1e10;
    EXPECT_NEAR(log_expected_population(b, 0, 100), 1000 * std::log(10.0), 1e-9);
    const auto table = log_expected_population_table(b, 100);
    EXPECT_NEAR(table[100](0), 1000 * std::log(10.0), 1e-9);
    EXPECT_NEAR(table[7](0), 70 * std::log(10.0), 1e-12);
}

TEST(ExpectedLocalPopulation, BaseCaseAndSummation)
{
    const auto g = graph({{0, 1, 1.0}, {1, 0, 1.0}});
    Eigen::MatrixXd p(2, 2);
    p << 0.5, 0.5, 0.5, 0.5;
    const auto chain = SpatialChain::from_matrix(p);
    const auto env = Environment::from_means(g, 2, {0, 0, 2, 2, 1.5, 0.5, 0, 0});
    EXPECT_EQ(expected_local_population(env, chain, g, {0, 0}, {1, 1}, 1), 1.0);
    EXPECT_THROW(expected_local_population(env, chain, g, {0, 0}, {1, 1}, 0), Error);

    std::mt19937_64 rng(2);
    for (int t = 0; t < 20; ++t) {
        const auto inst = random_instance(rng, 1 + t % 3, 1 + t % 3, 100 + t);
        const std::size_t n = 1 + t % 5;
        const ProductState s{0, 0};
        double total = 0.0;
        for (std::size_t j = 0; j < inst.g.num_types(); ++j) {
            for (std::size_t y = 0; y < inst.chain.num_sites(); ++y) {
                total += expected_local_population(inst.env, inst.chain, inst.g, s, {j, y}, n);
            }
        }
        const double u = expected_population(inst.env, inst.chain, inst.g, s, n);
        EXPECT_NEAR(total / u, 1.0, 1e-12);
    }
}

TEST(ExpectedLocalPopulation, MatchesSitePathEnumeration)
{
    // E_x[(M(X_0) ... M(X_{n-1}))_ij 1{X_n = y}] by brute force over site paths
    std::mt19937_64 rng(21);
    for (int t = 0; t < 10; ++t) {
        const auto inst = random_instance(rng, 2 + t % 2, 3, 300 + t);
        const std::size_t n = 3;
        const std::size_t nx = 3;
        for (std::size_t x = 0; x < nx; ++x) {
            for (std::size_t y = 0; y < nx; ++y) {
                Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(inst.g.num_types(), inst.g.num_types());
                for (std::size_t a = 0; a < nx; ++a) {
                    for (std::size_t b = 0; b < nx; ++b) {
                        const double prob = inst.chain(x, a) * inst.chain(a, b) * inst.chain(b, y);
                        acc += prob * inst.env.site_matrix(x) * inst.env.site_matrix(a) * inst.env.site_matrix(b);
                    }
                }
                for (std::size_t i = 0; i < inst.g.num_types(); ++i) {
                    for (std::size_t j = 0; j < inst.g.num_types(); ++j) {
                        const double got = expected_local_population(inst.env, inst.chain, inst.g, {i, x}, {j, y}, n);
                        EXPECT_NEAR(got, acc(i, j), 1e-12 * std::max(1.0, acc(i, j)));
                    }
                }
            }
        }
    }
}

TEST(PathSum, ExamplesAndBothForms)
{
    const auto g = graph({{0, 0, 1.0}});
    const auto s = feynman_kac_path_sum(Environment::constant(g, 1, 2.0), SpatialChain::trivial(), g, {0, 0}, 3);
    EXPECT_EQ(s.raw, 8.0);
    EXPECT_EQ(s.degree_weighted, 8.0);

    // mixed outdegrees
    const auto gm = graph({{0, 0, 1.0}, {0, 1, 1.0}, {0, 2, 1.0}, {1, 0, 1.0}, {2, 1, 1.0}, {2, 2, 1.0}});
    Eigen::MatrixXd p(2, 2);
    p << 0.3, 0.7, 0.9, 0.1;
    const auto chain = SpatialChain::from_matrix(p);
    const auto env = sample_environment(gm, 2, 4);
    const auto ps = feynman_kac_path_sum(env, chain, gm, {0, 1}, 5);
    EXPECT_NEAR(ps.degree_weighted / ps.raw, 1.0, 1e-12);
    EXPECT_NEAR(expected_population(env, chain, gm, {0, 1}, 5) / ps.raw, 1.0, 1e-10);
}

TEST(PathSum, Guard)
{
    const auto g = graph({{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}});
    const auto env = Environment::constant(g, 1, 1.0);
    try {
        feynman_kac_path_sum(env, SpatialChain::trivial(), g, {0, 0}, 30);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::TooLarge);
    }
}

TEST(ExpectedPopulation, RepresentationSweep)
{
    std::mt19937_64 rng(77);
    for (int t = 0; t < 60; ++t) {
        const auto inst = random_instance(rng, 1 + t % 3, 1 + (t / 3) % 3, 500 + t);
        const std::size_t n = t % 6;
        const auto ps = feynman_kac_path_sum(inst.env, inst.chain, inst.g, {0, 0}, n);
        const double u = expected_population(inst.env, inst.chain, inst.g, {0, 0}, n);
        EXPECT_NEAR(ps.raw / u, 1.0, 1e-10);
        EXPECT_NEAR(ps.degree_weighted / u, 1.0, 1e-10);
    }
}

TEST(ExpectedPopulation, MonotoneInEachMeanAndOneStepRecursion)
{
    std::mt19937_64 rng(9);
    const auto inst = random_instance(rng, 3, 2, 8);
    const auto b = mean_matrix(inst.env, inst.chain, inst.g);
    const std::size_t n = 6;
    const auto table = log_expected_population_table(b, n);
    for (Eigen::Index s = 0; s < b.rows(); ++s) {
        double next = 0.0;
        for (Eigen::Index t = 0; t < b.cols(); ++t) {
            next += b(s, t) * std::exp(table[n - 1](t));
        }
        EXPECT_NEAR(std::log(next), table[n](s), 1e-12);
    }
    for (const Edge& e : inst.g.edges()) {
        std::vector<double> means = inst.env.means();
        means[(e.from * 3 + e.to) * 2 + 1] *= 1.5;
        const auto bumped = Environment::from_means(inst.g, 2, means);
        for (std::size_t i = 0; i < 3; ++i) {
            EXPECT_GE(expected_population(bumped, inst.chain, inst.g, {i, 0}, n),
                      expected_population(inst.env, inst.chain, inst.g, {i, 0}, n));
        }
    }
}

TEST(Simulator, TrivialAndCap)
{
    const auto g = graph({{0, 0, 1.0}});
    const auto env = Environment::constant(g, 1, 2.0);
    const auto init = single_particle(g, SpatialChain::trivial(), {0, 0});
    const auto r0 = simulate_branching(env, SpatialChain::trivial(), g, init, 0, 1);
    ASSERT_EQ(r0.trajectory.size(), 1u);
    EXPECT_EQ(r0.trajectory[0].total(), 1u);
    const auto big = simulate_branching(Environment::constant(g, 1, 50.0), SpatialChain::trivial(), g, init, 10, 1, 1000);
    EXPECT_TRUE(big.cap_exceeded);
    EXPECT_LT(big.trajectory.size(), 11u);
    EXPECT_THROW(simulate_branching(env, SpatialChain::trivial(), g, init, 1, 1, 0), Error);
    const auto a = simulate_branching(env, SpatialChain::trivial(), g, init, 5, 3);
    const auto b2 = simulate_branching(env, SpatialChain::trivial(), g, init, 5, 3);
    for (std::size_t k = 0; k < a.trajectory.size(); ++k) {
        EXPECT_EQ(a.trajectory[k].counts, b2.trajectory[k].counts);
    }
}

TEST(Simulator, SingleTypeMeanWithinThreeSigma)
{
    const auto g = graph({{0, 0, 1.0}});
    const auto env = Environment::constant(g, 1, 2.0);
    const auto init = single_particle(g, SpatialChain::trivial(), {0, 0});
    const int runs = 10000;
    double s = 0.0, s2 = 0.0;
    for (int r = 0; r < runs; ++r) {
        const double v = static_cast<double>(
            simulate_branching(env, SpatialChain::trivial(), g, init, 5, stream_seed(1, r)).trajectory.back().total());
        s += v;
        s2 += v * v;
    }
    const double mean = s / runs;
    const double sd = std::sqrt((s2 / runs - mean * mean) / runs);
    EXPECT_LE(std::abs(mean - 32.0), 3 * sd);
}

TEST(Simulator, LocalCountsMatchMatrixPowerWithinThreeSigma)
{
    const auto g = graph({{0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}});
    Eigen::MatrixXd p(2, 2);
    p << 0.6, 0.4, 0.3, 0.7;
    const auto chain = SpatialChain::from_matrix(p);
    const auto env = sample_environment(g, 2, 13);
    const auto init = single_particle(g, chain, {0, 0});
    const int runs = 10000;
    const std::size_t n = 3;
    Eigen::VectorXd s = Eigen::VectorXd::Zero(4), s2 = Eigen::VectorXd::Zero(4);
    for (int r = 0; r < runs; ++r) {
        const auto res = simulate_branching(env, chain, g, init, n, stream_seed(2, r));
        const auto& last = res.trajectory.back();
        for (std::size_t c = 0; c < 4; ++c) {
            const double v = static_cast<double>(last.counts[c]);
            s(c) += v;
            s2(c) += v * v;
        }
    }
    for (std::size_t c = 0; c < 4; ++c) {
        const double mean = s(c) / runs;
        const double sd = std::sqrt((s2(c) / runs - mean * mean) / runs);
        const double exact = expected_local_population(env, chain, g, {0, 0}, {c / 2, c % 2}, n);
        EXPECT_LE(std::abs(mean - exact), 3 * sd + 1e-12) << "cell " << c;
    }
}
