#include <gtest/gtest.h>

#include <random>
#include <set>

#include "mbrw/typegraph.hpp"
#include "test_util.hpp"

using namespace mbrw;
using testutil::graph;

namespace {

ErrorKind kind_of(const std::function<void()>& f)
{
    try {
        f();
    } catch (const Error& e) {
        return e.kind();
    }
    ADD_FAILURE() << "no error thrown";
    return ErrorKind::ParseError;
}

} // namespace

TEST(BuildGraph, SelfLoopAndTwoCycle)
{
    const auto loop = graph({{0, 0, 2.0}});
    EXPECT_EQ(loop.num_types(), 1u);
    EXPECT_EQ(loop.outdeg(0), 1u);
    const auto two = graph({{0, 1, 1.0}, {1, 0, 3.0}});
    EXPECT_EQ(two.outdeg(0), 1u);
    EXPECT_EQ(two.outdeg(1), 1u);
    EXPECT_EQ(two.rho(1, 0), 3.0);
    EXPECT_EQ(two.rho(0, 0), 0.0);
    EXPECT_TRUE(two.strongly_connected());
}

TEST(BuildGraph, ValidationErrors)
{
    EXPECT_EQ(kind_of([] { graph({{0, 1, 1.0}}); }), ErrorKind::DanglingType);
    EXPECT_EQ(kind_of([] { graph({{0, 0, 1.0}, {0, 0, 2.0}}); }), ErrorKind::DuplicateEdge);
    EXPECT_EQ(kind_of([] { graph({{0, 0, 1.0}, {1, 1, 1.0}}); }), ErrorKind::Disconnected);
    EXPECT_EQ(kind_of([] { graph({{0, 0, 0.0}}); }), ErrorKind::NonpositiveRho);
    EXPECT_EQ(kind_of([] { graph({{0, 0, -1.0}}); }), ErrorKind::NonpositiveRho);
    std::vector<Edge> es{{0, 3, 1.0}, {3, 0, 1.0}};
    EXPECT_EQ(kind_of([&] { build_graph(es, 2); }), ErrorKind::IndexOutOfRange);
}

TEST(BuildGraph, WeakButNotStrongConnectivityIsFlagged)
{
    const auto g = graph({{0, 0, 1.0}, {0, 1, 1.0}, {1, 1, 1.0}});
    EXPECT_FALSE(g.strongly_connected());
    EXPECT_EQ(g.outdeg(0), 2u);
}

TEST(Cycles, SmallExamples)
{
    const auto loop = enumerate_simple_cycles(graph({{0, 0, 2.0}}));
    ASSERT_EQ(loop.size(), 1u);
    EXPECT_EQ(loop[0].vertices, (std::vector<std::size_t>{0, 0}));
    EXPECT_EQ(loop[0].length(), 1u);

    const auto two = enumerate_simple_cycles(graph({{0, 1, 1.0}, {1, 0, 1.0}}));
    ASSERT_EQ(two.size(), 1u);
    EXPECT_EQ(two[0].vertices, (std::vector<std::size_t>{0, 1, 0}));

    std::vector<Edge> complete;
    for (std::size_t i = 0; i < 3; ++i) {
        for (std::size_t j = 0; j < 3; ++j) {
            complete.push_back({i, j, 1.0});
        }
    }
    const auto all = enumerate_simple_cycles(build_graph(complete));
    EXPECT_EQ(all.size(), 8u);
    EXPECT_TRUE(std::is_sorted(all.begin(), all.end()));
}

TEST(Cycles, CountMatchesDfsOracleAndInvariantsHold)
{
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + trial % 5;
        const auto edges = testutil::random_edges(n, rng, 0.45);
        const auto g = build_graph(edges);
        std::set<std::pair<std::size_t, std::size_t>> es;
        for (const auto& e : edges) {
            es.insert({e.from, e.to});
        }
        const auto cycles = enumerate_simple_cycles(g);
        EXPECT_EQ(cycles.size(), testutil::dfs_cycle_count(n, es));
        std::set<std::vector<std::size_t>> distinct;
        std::size_t min_len = n + 1;
        for (const auto& c : cycles) {
            distinct.insert(c.vertices);
            min_len = std::min(min_len, c.length());
            EXPECT_GE(c.length(), 1u);
            EXPECT_LE(c.length(), n);
            EXPECT_EQ(c.vertices.front(), *std::min_element(c.vertices.begin(), c.vertices.end()));
            std::set<std::size_t> seen(c.vertices.begin(), c.vertices.end() - 1);
            EXPECT_EQ(seen.size(), c.length());
            for (auto [i, j] : c.edges()) {
                EXPECT_TRUE(g.has_edge(i, j));
            }
            EXPECT_TRUE(cycle_measure(c, n).is_shift_invariant_on(g, 1e-12));
        }
        EXPECT_EQ(distinct.size(), cycles.size());
        EXPECT_TRUE(std::is_sorted(cycles.begin(), cycles.end()));
        if (!cycles.empty()) {
            EXPECT_EQ(girth(g), min_len);
        }
    }
}

TEST(Cycles, EnumerationLimit)
{
    std::vector<Edge> complete;
    for (std::size_t i = 0; i < 6; ++i) {
        for (std::size_t j = 0; j < 6; ++j) {
            complete.push_back({i, j, 1.0});
        }
    }
    EXPECT_THROW(enumerate_simple_cycles(build_graph(complete), 10), Error);
}

TEST(CycleMeasure, Examples)
{
    const auto m1 = cycle_measure(SimpleCycle{{0, 0}}, 1);
    EXPECT_EQ(m1.weights(0, 0), 1.0);
    const auto m2 = cycle_measure(SimpleCycle{{0, 1, 0}}, 2);
    EXPECT_EQ(m2.weights(0, 1), 0.5);
    EXPECT_EQ(m2.weights(1, 0), 0.5);
    EXPECT_EQ(m2.weights(0, 0), 0.0);
    const auto m3 = cycle_measure(SimpleCycle{{0, 1, 2, 0}}, 3);
    EXPECT_DOUBLE_EQ(m3.weights(1, 2), 1.0 / 3.0);
    EXPECT_DOUBLE_EQ(m3.weights(2, 0), 1.0 / 3.0);
    EXPECT_NEAR(m3.total(), 1.0, 1e-15);
    EXPECT_EQ(m3.marginal_defect(), 0.0);
}

TEST(Girth, Examples)
{
    EXPECT_EQ(girth(graph({{0, 0, 1.0}})), 1u);
    EXPECT_EQ(girth(graph({{0, 1, 1.0}, {1, 0, 1.0}})), 2u);
    EXPECT_EQ(girth(graph({{0, 1, 1.0}, {1, 2, 1.0}, {2, 3, 1.0}, {3, 0, 1.0}, {0, 2, 1.0}})), 3u);
    EXPECT_EQ(girth(graph({{0, 1, 1.0}, {1, 0, 1.0}, {1, 1, 1.0}})), 1u);
}

TEST(CycleDecomposition, Examples)
{
    const auto g = graph({{0, 0, 1.0}, {0, 1, 1.0}, {1, 0, 1.0}});
    const SimpleCycle two{{0, 1, 0}};
    const auto d1 = cycle_decomposition(cycle_measure(two, 2), g);
    ASSERT_EQ(d1.size(), 1u);
    EXPECT_NEAR(d1[0].weight, 1.0, 1e-15);
    EXPECT_EQ(d1[0].cycle, two);

    TypePairMeasure mix{0.5 * cycle_measure(SimpleCycle{{0, 0}}, 2).weights + 0.5 * cycle_measure(two, 2).weights};
    const auto d2 = cycle_decomposition(mix, g);
    Eigen::MatrixXd rebuilt = Eigen::MatrixXd::Zero(2, 2);
    double total = 0.0;
    for (const auto& wc : d2) {
        rebuilt += wc.weight * cycle_measure(wc.cycle, 2).weights;
        total += wc.weight;
    }
    EXPECT_NEAR((rebuilt - mix.weights).cwiseAbs().maxCoeff(), 0.0, 1e-12);
    EXPECT_NEAR(total, 1.0, 1e-12);

    TypePairMeasure bad{Eigen::MatrixXd::Zero(2, 2)};
    bad.weights(0, 1) = 1.0;
    try {
        cycle_decomposition(bad, g);
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.kind(), ErrorKind::NotShiftInvariant);
    }
}

TEST(CycleDecomposition, RandomMixturesReconstruct)
{
    std::mt19937_64 rng(5);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double tol = 1e-9;
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + trial % 4;
        const auto g = build_graph(testutil::random_edges(n, rng, 0.5));
        const auto cycles = enumerate_simple_cycles(g);
        Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
        double z = 0.0;
        for (const auto& c : cycles) {
            const double a = u(rng) < 0.5 ? 0.0 : u(rng);
            w += a * cycle_measure(c, n).weights;
            z += a;
        }
        if (z == 0.0) {
            w = cycle_measure(cycles.front(), n).weights;
            z = 1.0;
        }
        const TypePairMeasure mu{w / z};
        const auto dec = cycle_decomposition(mu, g, tol);
        Eigen::MatrixXd rebuilt = Eigen::MatrixXd::Zero(n, n);
        for (const auto& wc : dec) {
            EXPECT_GE(wc.weight, 0.0);
            rebuilt += wc.weight * cycle_measure(wc.cycle, n).weights;
        }
        EXPECT_LE((rebuilt - mu.weights).cwiseAbs().maxCoeff(), 10 * tol);
    }
}
