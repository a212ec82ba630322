#ifndef MBRW_EXPECTATION_HPP
#define MBRW_EXPECTATION_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mbrw/chain.hpp"
#include "mbrw/environment.hpp"
#include "mbrw/error.hpp"
#include "mbrw/rng.hpp"
#include "mbrw/typegraph.hpp"

namespace mbrw {

/// B_{(i,x),(j,y)} = m_ij(x) P_xy 1{(i,j) in A}; rows/cols indexed type * |X| + site.
inline Eigen::MatrixXd mean_matrix(const Environment& env, const SpatialChain& chain, const TypeGraph& g)
{
    if (env.num_types() != g.num_types() || env.num_sites() != chain.num_sites()) {
        fail(ErrorKind::DimensionMismatch, "environment, chain and graph disagree on |T| or |X|");
    }
    const std::size_t nt = g.num_types();
    const std::size_t nx = chain.num_sites();
    const auto dim = static_cast<Eigen::Index>(nt * nx);
    Eigen::MatrixXd b = Eigen::MatrixXd::Zero(dim, dim);
    for (const Edge& e : g.edges()) {
        for (std::size_t x = 0; x < nx; ++x) {
            for (std::size_t y = 0; y < nx; ++y) {
                b(e.from * nx + x, e.to * nx + y) = env.mean(e.from, e.to, x) * chain(x, y);
            }
        }
    }
    return b;
}

namespace detail {

// Vector with a separate log scale: value = v * exp(log_scale).
struct ScaledVector {
    Eigen::VectorXd v;
    double log_scale = 0.0;

    void rescale()
    {
        const double hi = v.cwiseAbs().maxCoeff();
        if (hi > 1e100 || (hi > 0.0 && hi < 1e-100)) {
            v /= hi;
            log_scale += std::log(hi);
        }
    }
};

} // namespace detail

/// log u_k(s) for every start state s and k = 0..n, where u_k = B^k 1.
inline std::vector<Eigen::VectorXd> log_expected_population_table(const Eigen::MatrixXd& b, std::size_t n)
{
    std::vector<Eigen::VectorXd> out;
    out.reserve(n + 1);
    detail::ScaledVector u{Eigen::VectorXd::Ones(b.rows()), 0.0};
    for (std::size_t k = 0;; ++k) {
        out.push_back(u.v.array().log() + u.log_scale);
        if (k == n) {
            break;
        }
        u.v = b * u.v;
        u.rescale();
    }
    return out;
}

/// log u_n(i,x): n matrix-vector products against the all-ones vector,
/// rescaled whenever magnitudes leave [1e-100, 1e100].
inline double log_expected_population(const Eigen::MatrixXd& b, std::size_t state, std::size_t n)
{
    detail::ScaledVector u{Eigen::VectorXd::Ones(b.rows()), 0.0};
    for (std::size_t k = 0; k < n; ++k) {
        u.v = b * u.v;
        u.rescale();
    }
    return std::log(u.v(state)) + u.log_scale;
}

/// u_n(i,x) = sum_{j,y} (B^n)_{(i,x),(j,y)}; +inf when it overflows a double.
inline double expected_population(const Eigen::MatrixXd& b, std::size_t state, std::size_t n)
{
    detail::ScaledVector u{Eigen::VectorXd::Ones(b.rows()), 0.0};
    for (std::size_t k = 0; k < n; ++k) {
        u.v = b * u.v;
        u.rescale();
    }
    return u.log_scale == 0.0 ? u.v(state) : u.v(state) * std::exp(u.log_scale);
}

inline double expected_population(const Environment& env, const SpatialChain& chain, const TypeGraph& g,
                                  ProductState start, std::size_t n)
{
    return expected_population(mean_matrix(env, chain, g), start.type * chain.num_sites() + start.site, n);
}

/// E_(i,x)[eta_n(j,y)] = (B^n)_{(i,x),(j,y)}.
inline double expected_local_population(const Environment& env, const SpatialChain& chain,
                                        const TypeGraph& g, ProductState from, ProductState to,
                                        std::size_t n)
{
    if (n == 0) {
        fail(ErrorKind::DomainError, "expected_local_population requires n >= 1");
    }
    if (from.type >= g.num_types() || to.type >= g.num_types() || from.site >= chain.num_sites()
        || to.site >= chain.num_sites()) {
        fail(ErrorKind::IndexOutOfRange, "state out of range");
    }
    if (n == 1) {
        return env.mean(from.type, to.type, from.site) * chain(from.site, to.site);
    }
    const Eigen::MatrixXd b = mean_matrix(env, chain, g);
    const std::size_t nx = chain.num_sites();
    detail::ScaledVector row{Eigen::VectorXd::Zero(b.rows()), 0.0};
    row.v(from.type * nx + from.site) = 1.0;
    for (std::size_t k = 0; k < n; ++k) {
        row.v = b.transpose() * row.v;
        row.rescale();
    }
    const double v = row.v(to.type * nx + to.site);
    return row.log_scale == 0.0 ? v : v * std::exp(row.log_scale);
}

inline constexpr double kPathSumGuard = 1e7;

/// The two path-sum forms of u_n(i,x).
struct PathSums {
    /// sum over type strings and site paths of prod m_{k_{l-1} k_l}(x_{l-1}) P_{x_{l-1} x_l}
    double raw = 0.0;
    /// E^{(T,X)}[prod m_{T_{l-1} T_l}(X_{l-1}) deg+(T_{l-1})] under the product chain
    double degree_weighted = 0.0;
};

/// Exhaustive enumeration of both forms; TooLarge beyond 1e7 paths.
inline PathSums feynman_kac_path_sum(const Environment& env, const SpatialChain& chain, const TypeGraph& g,
                                     ProductState start, std::size_t n)
{
    const std::size_t nt = g.num_types();
    const std::size_t nx = chain.num_sites();
    const double paths = std::pow(static_cast<double>(nt * nx), static_cast<double>(n));
    if (paths > kPathSumGuard) {
        fail(ErrorKind::TooLarge, "path enumeration would visit " + std::to_string(paths) + " paths");
    }
    PathSums out;

    // raw form: every type string k_1..k_n in T^n, zero weight off A
    std::function<void(std::size_t, std::size_t, std::size_t, double)> raw =
        [&](std::size_t depth, std::size_t t, std::size_t x, double w) {
            if (depth == n) {
                out.raw += w;
                return;
            }
            for (std::size_t k = 0; k < nt; ++k) {
                const double m = env.mean(t, k, x);
                for (std::size_t y = 0; y < nx; ++y) {
                    raw(depth + 1, k, y, w * m * chain(x, y));
                }
            }
        };

    // product-chain expectation with p_ij = 1/deg+(i)
    const Eigen::MatrixXd p = type_kernel(g);
    std::function<void(std::size_t, std::size_t, std::size_t, double, double)> expect =
        [&](std::size_t depth, std::size_t t, std::size_t x, double prob, double w) {
            if (depth == n) {
                out.degree_weighted += prob * w;
                return;
            }
            for (std::size_t k = 0; k < nt; ++k) {
                if (p(t, k) == 0.0) {
                    continue;
                }
                const double factor = env.mean(t, k, x) * static_cast<double>(g.outdeg(t));
                for (std::size_t y = 0; y < nx; ++y) {
                    if (chain(x, y) == 0.0) {
                        continue;
                    }
                    expect(depth + 1, k, y, prob * p(t, k) * chain(x, y), w * factor);
                }
            }
        };

    raw(0, start.type, start.site, 1.0);
    expect(0, start.type, start.site, 1.0, 1.0);
    return out;
}

/// eta_n: particle counts per cell (type * |X| + site).
struct PopulationState {
    std::vector<std::uint64_t> counts;
    std::size_t generation = 0;

    std::uint64_t total() const
    {
        std::uint64_t s = 0;
        for (auto c : counts) {
            s += c;
        }
        return s;
    }
};

inline PopulationState single_particle(const TypeGraph& g, const SpatialChain& chain, ProductState at)
{
    PopulationState s;
    s.counts.assign(g.num_types() * chain.num_sites(), 0);
    s.counts[at.type * chain.num_sites() + at.site] = 1;
    return s;
}

struct SimulationResult {
    std::vector<PopulationState> trajectory;
    bool cap_exceeded = false;
};

inline constexpr std::uint64_t kDefaultPopulationCap = 10'000'000;

/// One generation: every (i,x)-particle is replaced by independent
/// Poisson(m_ij(x)) offspring of each type j with (i,j) in A, born at x;
/// each newborn then jumps x -> y with probability P_xy. Counts are
/// aggregated per cell (a sum of c independent Poisson(m) is Poisson(c m),
/// and the jumps of k newborns are multinomial).
inline SimulationResult simulate_branching(const Environment& env, const SpatialChain& chain,
                                           const TypeGraph& g, const PopulationState& init, std::size_t n,
                                           std::uint64_t seed, std::uint64_t cap = kDefaultPopulationCap)
{
    const std::size_t nt = g.num_types();
    const std::size_t nx = chain.num_sites();
    if (init.counts.size() != nt * nx) {
        fail(ErrorKind::DimensionMismatch, "initial population has wrong number of cells");
    }
    if (cap < init.total()) {
        fail(ErrorKind::PreconditionViolated, "cap is below the initial population");
    }
    Rng rng = make_rng(seed);
    SimulationResult out;
    out.trajectory.push_back(init);
    PopulationState cur = init;
    for (std::size_t gen = 0; gen < n; ++gen) {
        PopulationState next;
        next.counts.assign(nt * nx, 0);
        next.generation = cur.generation + 1;
        for (std::size_t i = 0; i < nt; ++i) {
            for (std::size_t x = 0; x < nx; ++x) {
                const std::uint64_t c = cur.counts[i * nx + x];
                if (c == 0) {
                    continue;
                }
                for (std::size_t j : g.successors(i)) {
                    std::uint64_t born = std::poisson_distribution<std::uint64_t>(
                        static_cast<double>(c) * env.mean(i, j, x))(rng);
                    double remaining_p = 1.0;
                    for (std::size_t y = 0; y < nx && born > 0; ++y) {
                        const double pxy = chain(x, y);
                        std::uint64_t moved;
                        if (y + 1 == nx || pxy >= remaining_p) {
                            moved = born;
                        } else {
                            moved = std::binomial_distribution<std::uint64_t>(born, pxy / remaining_p)(rng);
                        }
                        next.counts[j * nx + y] += moved;
                        born -= moved;
                        remaining_p -= pxy;
                    }
                }
            }
        }
        if (next.total() > cap) {
            out.cap_exceeded = true;
            break;
        }
        out.trajectory.push_back(next);
        cur = std::move(next);
    }
    return out;
}

} // namespace mbrw

#endif
