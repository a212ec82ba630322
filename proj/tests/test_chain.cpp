#include <gtest/gtest.h>

#include <random>

#include "mbrw/chain.hpp"
#include "test_util.hpp"

using namespace mbrw;
using testutil::graph;

TEST(SpatialChain, ValidatesRowsAndIrreducibility)
{
    Eigen::MatrixXd p(2, 2);
    p << 0.5, 0.5, 0.2, 0.8;
    EXPECT_EQ(SpatialChain::from_matrix(p).num_sites(), 2u);

    p << 0.5, 0.6, 0.2, 0.8;
    try {
        SpatialChain::from_matrix(p);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotStochastic);
        EXPECT_NE(std::string(e.what()).find("row 0"), std::string::npos);
    }
    p << 1.0, 0.0, 0.3, 0.7;
    try {
        SpatialChain::from_matrix(p);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotIrreducible);
    }
    p << 1.2, -0.2, 0.3, 0.7;
    EXPECT_THROW(SpatialChain::from_matrix(p), Error);
}

TEST(TypeKernel, Examples)
{
    EXPECT_EQ(type_kernel(graph({{0, 0, 1.0}}))(0, 0), 1.0);
    const auto k2 = type_kernel(graph({{0, 1, 1.0}, {1, 0, 1.0}}));
    EXPECT_EQ(k2(0, 1), 1.0);
    EXPECT_EQ(k2(0, 0), 0.0);
    const auto k3 = type_kernel(graph({{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}}));
    EXPECT_EQ(k3(0, 0), 0.5);
    EXPECT_EQ(k3(0, 1), 0.5);
    EXPECT_EQ(k3(1, 0), 1.0);
    EXPECT_EQ(k3(1, 1), 0.0);
}

TEST(TypeKernel, RowsSumToOneExactlyForSmallDegrees)
{
    std::mt19937_64 rng(1);
    for (int t = 0; t < 50; ++t) {
        const auto g = build_graph(testutil::random_edges(1 + t % 6, rng, 0.5));
        const auto k = type_kernel(g);
        for (Eigen::Index i = 0; i < k.rows(); ++i) {
            // deg <= 6; 1/deg summed deg times is exact for deg in {1,2,4}, within 1 ulp otherwise
            EXPECT_NEAR(k.row(i).sum(), 1.0, 4e-16);
            for (Eigen::Index j = 0; j < k.cols(); ++j) {
                EXPECT_EQ(k(i, j) > 0.0, g.has_edge(i, j));
            }
        }
    }
}

TEST(ProductPath, Examples)
{
    const auto g = graph({{0, 1, 1.0}, {1, 0, 1.0}});
    const auto chain = SpatialChain::trivial();
    const auto p0 = sample_product_path(g, chain, {0, 0}, 0, 1);
    ASSERT_EQ(p0.steps.size(), 1u);
    EXPECT_EQ(p0.steps[0], (ProductState{0, 0}));
    const auto p3 = sample_product_path(g, chain, {0, 0}, 3, 1);
    ASSERT_EQ(p3.steps.size(), 4u);
    for (std::size_t l = 0; l < 4; ++l) {
        EXPECT_EQ(p3.steps[l].type, l % 2);
    }
    const auto again = sample_product_path(g, chain, {0, 0}, 3, 1);
    EXPECT_EQ(again.steps, p3.steps);
}

TEST(ProductPath, TransitionFrequenciesMatchKernelWithinThreeSigma)
{
    const auto g = graph({{0, 0, 1.0}, {0, 1, 1.0}, {0, 2, 1.0}, {1, 0, 1.0}, {2, 1, 1.0}, {2, 2, 1.0}});
    Eigen::MatrixXd p(2, 2);
    p << 0.3, 0.7, 0.6, 0.4;
    const auto chain = SpatialChain::from_matrix(p);
    const std::size_t n = 100000;
    const auto path = sample_product_path(g, chain, {0, 0}, n, 99);
    const Eigen::MatrixXd pt = type_kernel(g);
    Eigen::MatrixXd from = Eigen::MatrixXd::Zero(6, 1);
    Eigen::MatrixXd trans = Eigen::MatrixXd::Zero(6, 6);
    for (std::size_t l = 1; l <= n; ++l) {
        const auto a = path.steps[l - 1].type * 2 + path.steps[l - 1].site;
        const auto b = path.steps[l].type * 2 + path.steps[l].site;
        from(a) += 1;
        trans(a, b) += 1;
    }
    for (std::size_t a = 0; a < 6; ++a) {
        for (std::size_t b = 0; b < 6; ++b) {
            const double prob = pt(a / 2, b / 2) * p(a % 2, b % 2);
            const double cnt = from(a);
            const double sigma = std::sqrt(cnt * prob * (1 - prob));
            EXPECT_LE(std::abs(trans(a, b) - cnt * prob), 3.0 * sigma + 1e-9) << a << "->" << b;
        }
    }
}

TEST(EmpiricalPairMeasure, ClosedAndOpenPaths)
{
    ProductPath closed{{{0, 0}, {1, 0}, {0, 0}}};
    const auto c = empirical_pair_measure(closed, 2, 1);
    EXPECT_TRUE(c.closed);
    EXPECT_EQ(c.measure(0, 0, 1, 0), 0.5);
    EXPECT_EQ(c.measure(1, 0, 0, 0), 0.5);
    EXPECT_TRUE(c.measure.is_shift_invariant(0.0));

    ProductPath open{{{0, 0}, {1, 0}, {2, 0}}};
    const auto o = empirical_pair_measure(open, 3, 1);
    EXPECT_FALSE(o.closed);
    EXPECT_EQ(o.measure(0, 0, 1, 0), 0.5);
    EXPECT_EQ(o.measure(1, 0, 2, 0), 0.5);
    EXPECT_DOUBLE_EQ(o.measure.marginal_gap(), 0.5);
    EXPECT_FALSE(o.measure.is_shift_invariant(1e-12));

    EXPECT_THROW(empirical_pair_measure(ProductPath{{{0, 0}}}, 1, 1), Error);
}

TEST(EmpiricalPairMeasure, RandomPathGapAndProjections)
{
    std::mt19937_64 rng(4);
    const auto g = build_graph(testutil::random_edges(3, rng, 0.5));
    const auto chain = SpatialChain::from_matrix(testutil::random_stochastic(3, rng));
    const auto path = sample_product_path(g, chain, {0, 1}, 1000, 17);
    const auto e = empirical_pair_measure(path, 3, 3);
    EXPECT_LE(e.measure.marginal_gap(), 2.0 / 1000 + 1e-15);
    const auto& nu = e.measure;
    for (std::size_t i = 0; i < 3; ++i) {
        double bi = 0.0;
        for (std::size_t j = 0; j < 3; ++j) {
            double bij = 0.0;
            for (std::size_t x = 0; x < 3; ++x) {
                double s = 0.0;
                for (std::size_t y = 0; y < 3; ++y) {
                    s += nu(i, x, j, y);
                }
                EXPECT_NEAR(nu.bar(i, j, x), s, 1e-12);
                bij += s;
            }
            EXPECT_NEAR(nu.bar_pair(i, j), bij, 1e-12);
            bi += bij;
        }
        EXPECT_NEAR(nu.bar_type(i), bi, 1e-12);
        for (std::size_t x = 0; x < 3; ++x) {
            double s = 0.0;
            for (std::size_t j = 0; j < 3; ++j) {
                s += nu.bar(i, j, x);
            }
            EXPECT_NEAR(nu.bar_site(i, x), s, 1e-12);
        }
    }
}

TEST(Stationary, GthMatchesPowerIteration)
{
    std::mt19937_64 rng(8);
    for (int t = 0; t < 20; ++t) {
        const Eigen::MatrixXd p = testutil::random_stochastic(4, rng);
        const Eigen::VectorXd pi = stationary_distribution(p);
        // lazy chain avoids periodicity in the power iteration
        const Eigen::MatrixXd lazy = 0.5 * (p + Eigen::MatrixXd::Identity(4, 4));
        Eigen::RowVectorXd v = Eigen::RowVectorXd::Constant(4, 0.25);
        for (int k = 0; k < 5000; ++k) {
            v = v * lazy;
        }
        EXPECT_NEAR((v.transpose() - pi).cwiseAbs().maxCoeff(), 0.0, 1e-12);
    }
}

TEST(Stationary, PairMeasureIsShiftInvariant)
{
    std::mt19937_64 rng(12);
    for (int t = 0; t < 20; ++t) {
        const auto g = build_graph(testutil::random_edges(1 + t % 4, rng, 0.5));
        const auto chain = SpatialChain::from_matrix(testutil::random_stochastic(1 + t % 3, rng));
        EXPECT_TRUE(stationary_pair_measure(g, chain).is_shift_invariant(1e-12));
    }
}
