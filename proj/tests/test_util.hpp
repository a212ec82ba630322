#ifndef MBRW_TEST_UTIL_HPP
#define MBRW_TEST_UTIL_HPP

// Random instance generators and brute-force oracles shared by the tests.
// Oracles here deliberately avoid the library's own algorithms.

#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <set>
#include <vector>

#include <Eigen/Dense>

#include "mbrw/mbrw.hpp"

namespace testutil {

using mbrw::Edge;

/// Random valid edge list on n types: weakly connected, every outdegree >= 1.
inline std::vector<Edge> random_edges(std::size_t n, std::mt19937_64& rng, double density = 0.4,
                                      double rho_lo = 0.1, double rho_hi = 4.0)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_real_distribution<double> rho(rho_lo, rho_hi);
    std::uniform_int_distribution<std::size_t> pick(0, n - 1);
    std::set<std::pair<std::size_t, std::size_t>> es;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            if (u(rng) < density) {
                es.insert({i, j});
            }
        }
    }
    for (std::size_t i = 1; i < n; ++i) {
        std::uniform_int_distribution<std::size_t> earlier(0, i - 1);
        const std::size_t j = earlier(rng);
        if (u(rng) < 0.5) {
            es.insert({i, j});
        } else {
            es.insert({j, i});
        }
    }
    for (std::size_t i = 0; i < n; ++i) {
        bool has = false;
        for (auto [a, b] : es) {
            has = has || a == i;
        }
        if (!has) {
            es.insert({i, pick(rng)});
        }
    }
    std::vector<Edge> out;
    for (auto [a, b] : es) {
        out.push_back({a, b, rho(rng)});
    }
    return out;
}

/// Random irreducible stochastic matrix, with some zero entries.
inline Eigen::MatrixXd random_stochastic(std::size_t n, std::mt19937_64& rng, double zero_prob = 0.3)
{
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Eigen::MatrixXd p(n, n);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = 0; j < n; ++j) {
            p(i, j) = u(rng) < zero_prob ? 0.0 : 0.05 + u(rng);
        }
        p(i, (i + 1) % n) += 0.1;  // keeps the chain irreducible
        p.row(i) /= p.row(i).sum();
    }
    return p;
}

/// Counts simple cycles by plain DFS from each start vertex, only through
/// vertices larger than the start (one rotation per cycle).
inline std::size_t dfs_cycle_count(std::size_t n, const std::set<std::pair<std::size_t, std::size_t>>& edges)
{
    std::size_t count = 0;
    std::vector<bool> on(n, false);
    std::function<void(std::size_t, std::size_t)> dfs = [&](std::size_t start, std::size_t v) {
        for (std::size_t w = 0; w < n; ++w) {
            if (!edges.count({v, w})) {
                continue;
            }
            if (w == start) {
                ++count;
            } else if (w > start && !on[w]) {
                on[w] = true;
                dfs(start, w);
                on[w] = false;
            }
        }
    };
    for (std::size_t s = 0; s < n; ++s) {
        on[s] = true;
        dfs(s, s);
        on[s] = false;
    }
    return count;
}

/// Max cycle mean by DFS over all simple cycles.
inline double dfs_max_cycle_mean(const mbrw::TypeGraph& g)
{
    const std::size_t n = g.num_types();
    double best = -1.0;
    std::vector<bool> on(n, false);
    std::function<void(std::size_t, std::size_t, double, std::size_t)> dfs =
        [&](std::size_t start, std::size_t v, double sum, std::size_t len) {
            for (std::size_t w = 0; w < n; ++w) {
                if (!g.has_edge(v, w)) {
                    continue;
                }
                if (w == start) {
                    best = std::max(best, (sum + g.rho(v, w)) / static_cast<double>(len + 1));
                } else if (w > start && !on[w]) {
                    on[w] = true;
                    dfs(start, w, sum + g.rho(v, w), len + 1);
                    on[w] = false;
                }
            }
        };
    for (std::size_t s = 0; s < n; ++s) {
        on[s] = true;
        dfs(s, s, 0.0, 0);
        on[s] = false;
    }
    return best;
}

/// Brute-force annealed moment: every (type, site) path of length n, each
/// contributing prod P * prod_{(k,j,z)} Gamma(rho_kj c + 1) (std::lgamma).
inline double brute_annealed_log_moment(const mbrw::TypeGraph& g, const Eigen::MatrixXd& p,
                                        std::size_t start_type, std::size_t start_site, std::size_t n)
{
    const std::size_t nt = g.num_types();
    const std::size_t nx = static_cast<std::size_t>(p.rows());
    double total = 0.0;
    std::map<std::tuple<std::size_t, std::size_t, std::size_t>, int> counts;
    std::function<void(std::size_t, std::size_t, std::size_t, double)> rec =
        [&](std::size_t depth, std::size_t t, std::size_t x, double prob) {
            if (depth == n) {
                double log_mom = 0.0;
                for (const auto& [key, c] : counts) {
                    if (c > 0) {
                        const double rho = g.rho(std::get<0>(key), std::get<1>(key));
                        log_mom += std::lgamma(rho * c + 1.0);
                    }
                }
                total += prob * std::exp(log_mom);
                return;
            }
            for (std::size_t j = 0; j < nt; ++j) {
                if (!g.has_edge(t, j)) {
                    continue;
                }
                for (std::size_t y = 0; y < nx; ++y) {
                    if (p(x, y) == 0.0) {
                        continue;
                    }
                    ++counts[{t, j, x}];
                    rec(depth + 1, j, y, prob * p(x, y));
                    --counts[{t, j, x}];
                }
            }
        };
    rec(0, start_type, start_site, 1.0);
    return std::log(total);
}

/// I(nu) - S(nu) written out directly from the definitions.
inline double direct_chi_objective(const Eigen::MatrixXd& nu, std::size_t nt, std::size_t nx,
                                   const mbrw::TypeGraph& g, const Eigen::MatrixXd& p)
{
    auto at = [&](std::size_t i, std::size_t x, std::size_t j, std::size_t y) { return nu(i * nx + x, j * nx + y); };
    double obj = 0.0;
    for (std::size_t i = 0; i < nt; ++i) {
        for (std::size_t x = 0; x < nx; ++x) {
            double row = 0.0;
            for (std::size_t j = 0; j < nt; ++j) {
                for (std::size_t y = 0; y < nx; ++y) {
                    row += at(i, x, j, y);
                }
            }
            for (std::size_t j = 0; j < nt; ++j) {
                double pair_site = 0.0;
                for (std::size_t y = 0; y < nx; ++y) {
                    const double w = at(i, x, j, y);
                    pair_site += w;
                    if (w > 0.0) {
                        if (!g.has_edge(i, j) || p(x, y) == 0.0) {
                            return INFINITY;
                        }
                        obj += w * std::log(w / (row * p(x, y)));
                    }
                }
                if (g.has_edge(i, j) && pair_site > 0.0) {
                    obj -= g.rho(i, j) * pair_site * std::log(pair_site);
                }
            }
        }
    }
    for (std::size_t i = 0; i < nt; ++i) {
        for (std::size_t j = 0; j < nt; ++j) {
            if (!g.has_edge(i, j)) {
                continue;
            }
            double pair = 0.0;
            for (std::size_t x = 0; x < nx; ++x) {
                for (std::size_t y = 0; y < nx; ++y) {
                    pair += at(i, x, j, y);
                }
            }
            obj -= pair * g.rho(i, j) * std::log(g.rho(i, j));
        }
    }
    return obj;
}

inline mbrw::TypeGraph graph(std::initializer_list<Edge> edges)
{
    std::vector<Edge> v(edges);
    return mbrw::build_graph(v);
}

} // namespace testutil

#endif
