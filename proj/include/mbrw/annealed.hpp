#ifndef MBRW_ANNEALED_HPP
#define MBRW_ANNEALED_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "mbrw/chain.hpp"
#include "mbrw/environment.hpp"
#include "mbrw/error.hpp"
#include "mbrw/expectation.hpp"
#include "mbrw/parallel.hpp"
#include "mbrw/special.hpp"
#include "mbrw/typegraph.hpp"

namespace mbrw {

inline constexpr std::size_t kDefaultDpBudget = 50'000'000;

/// Occupation counts c(k,j,z) over A x X; slot = edge_index(k,j) * |X| + z.
struct CountVector {
    std::vector<std::uint16_t> counts;

    std::size_t total() const
    {
        std::size_t s = 0;
        for (auto c : counts) {
            s += c;
        }
        return s;
    }
};

namespace detail {

struct KeyHash {
    std::size_t operator()(const std::vector<std::uint16_t>& k) const noexcept
    {
        std::uint64_t h = 1469598103934665603ULL;
        for (auto v : k) {
            h ^= v;
            h *= 1099511628211ULL;
        }
        return static_cast<std::size_t>(h);
    }
};

// key[0] = product state, key[1..] = counts
using Layer = std::unordered_map<std::vector<std::uint16_t>, double, KeyHash>;

inline void log_accumulate(Layer& layer, std::vector<std::uint16_t>&& key, double logw)
{
    auto [it, inserted] = layer.try_emplace(std::move(key), logw);
    if (!inserted) {
        it->second = log_add_exp(it->second, logw);
    }
}

} // namespace detail

/// Result of the exact annealed computation on an n-grid.
struct AnnealedExact {
    std::vector<std::size_t> ns;           ///< grid points actually computed
    std::vector<double> log_moments;       ///< log <u_n(i,x)>
    bool budget_exceeded = false;          ///< the DP stopped before the last grid point
    std::size_t attempted_entries = 0;     ///< layer size that tripped the budget
};

/// Evaluates sum over terminal count vectors c of w(c) prod exp(H_kj(c(k,j,z))).
inline double annealed_terminal(const detail::Layer& layer, const TypeGraph& g, std::size_t num_sites)
{
    // group by counts only
    detail::Layer by_counts;
    for (const auto& [key, logw] : layer) {
        std::vector<std::uint16_t> counts(key.begin() + 1, key.end());
        detail::log_accumulate(by_counts, std::move(counts), logw);
    }
    std::vector<double> terms;
    terms.reserve(by_counts.size());
    for (const auto& [counts, logw] : by_counts) {
        double s = logw;
        for (std::size_t slot = 0; slot < counts.size(); ++slot) {
            if (counts[slot] > 0) {
                const Edge& e = g.edges()[slot / num_sites];
                s += log_mgf(e.rho, static_cast<double>(counts[slot]));
            }
        }
        terms.push_back(s);
    }
    return log_sum_exp(terms);
}

/// Exact log <u_n(i,x)> under the canonical environment (m = E^rho) for
/// every n in `ns` (ascending). Dynamic program over (product state,
/// occupation counts): each type step carries weight 1, each site step
/// P_xy, and a terminal count vector c contributes prod_{k,j,z}
/// Gamma(rho_kj c(k,j,z) + 1). A layer larger than `budget` stops the DP.
inline AnnealedExact annealed_moment_exact_grid(const TypeGraph& g, const SpatialChain& chain,
                                                ProductState start, const std::vector<std::size_t>& ns,
                                                std::size_t budget = kDefaultDpBudget)
{
    if (start.type >= g.num_types() || start.site >= chain.num_sites()) {
        fail(ErrorKind::IndexOutOfRange, "start state out of range");
    }
    for (std::size_t k = 1; k < ns.size(); ++k) {
        if (ns[k] <= ns[k - 1]) {
            fail(ErrorKind::PreconditionViolated, "n-grid must be strictly increasing");
        }
    }
    AnnealedExact out;
    if (ns.empty()) {
        return out;
    }
    if (ns.back() > std::numeric_limits<std::uint16_t>::max()) {
        fail(ErrorKind::TooLarge, "n exceeds the count width of the DP");
    }
    const std::size_t nx = chain.num_sites();
    const std::size_t slots = g.num_edges() * nx;

    detail::Layer layer;
    {
        std::vector<std::uint16_t> key(1 + slots, 0);
        key[0] = static_cast<std::uint16_t>(start.type * nx + start.site);
        layer.emplace(std::move(key), 0.0);
    }
    std::size_t next_grid = 0;
    for (std::size_t step = 0;; ++step) {
        while (next_grid < ns.size() && ns[next_grid] == step) {
            out.ns.push_back(step);
            out.log_moments.push_back(annealed_terminal(layer, g, nx));
            ++next_grid;
        }
        if (next_grid == ns.size()) {
            break;
        }
        detail::Layer next;
        for (const auto& [key, logw] : layer) {
            const std::size_t t = key[0] / nx;
            const std::size_t x = key[0] % nx;
            for (std::size_t j : g.successors(t)) {
                const std::size_t slot = 1 + g.edge_index(t, j) * nx + x;
                for (std::size_t y = 0; y < nx; ++y) {
                    const double pxy = chain(x, y);
                    if (pxy == 0.0) {
                        continue;
                    }
                    auto nkey = key;
                    nkey[0] = static_cast<std::uint16_t>(j * nx + y);
                    ++nkey[slot];
                    detail::log_accumulate(next, std::move(nkey), logw + std::log(pxy));
                }
            }
            if (next.size() > budget) {
                out.budget_exceeded = true;
                out.attempted_entries = next.size();
                return out;
            }
        }
        layer = std::move(next);
    }
    return out;
}

/// Single-n convenience wrapper; throws DPBudgetExceeded.
inline double annealed_moment_exact(const TypeGraph& g, const SpatialChain& chain, ProductState start,
                                    std::size_t n, std::size_t budget = kDefaultDpBudget)
{
    const auto r = annealed_moment_exact_grid(g, chain, start, {n}, budget);
    if (r.budget_exceeded) {
        fail(ErrorKind::DPBudgetExceeded,
             "DP layer reached " + std::to_string(r.attempted_entries) + " (state, count) entries");
    }
    return r.log_moments.front();
}

struct AnnealedEstimate {
    double log_moment = 0.0;   ///< log of the sample mean of u_n over environments
    double stderr_log = 0.0;   ///< jackknife standard error of log_moment
    double top_share = 0.0;    ///< largest single-environment share of the total
    bool heavy_tail = false;   ///< top_share > 0.5
    std::vector<double> log_samples;
};

/// Monte Carlo <u_n(i,x)>: environment k is drawn with stream_seed(seed, k)
/// and u_n computed exactly for it. Averaging is done in the linear domain
/// after scaling by the largest sample.
inline AnnealedEstimate annealed_moment_mc(const TypeGraph& g, const SpatialChain& chain, ProductState start,
                                           std::size_t n, std::size_t num_envs, std::uint64_t seed,
                                           std::size_t threads = 1)
{
    if (num_envs < 2) {
        fail(ErrorKind::PreconditionViolated, "num_envs must be at least 2");
    }
    if (start.type >= g.num_types() || start.site >= chain.num_sites()) {
        fail(ErrorKind::IndexOutOfRange, "start state out of range");
    }
    const std::size_t state = start.type * chain.num_sites() + start.site;
    AnnealedEstimate est;
    est.log_samples.assign(num_envs, 0.0);
    parallel_for_index(num_envs, threads, [&](std::size_t k) {
        const Environment env = sample_environment(g, chain.num_sites(), stream_seed(seed, k));
        est.log_samples[k] = log_expected_population(mean_matrix(env, chain, g), state, n);
    });

    const auto& ls = est.log_samples;
    double hi = -std::numeric_limits<double>::infinity();
    for (double l : ls) {
        hi = std::max(hi, l);
    }
    std::vector<double> scaled(num_envs);
    for (std::size_t k = 0; k < num_envs; ++k) {
        scaled[k] = std::exp(ls[k] - hi);
    }
    // prefix/suffix sums give leave-one-out totals without cancellation
    std::vector<double> prefix(num_envs + 1, 0.0), suffix(num_envs + 1, 0.0);
    for (std::size_t k = 0; k < num_envs; ++k) {
        prefix[k + 1] = prefix[k] + scaled[k];
    }
    for (std::size_t k = num_envs; k-- > 0;) {
        suffix[k] = suffix[k + 1] + scaled[k];
    }
    const double total = prefix[num_envs];
    const auto nn = static_cast<double>(num_envs);
    est.log_moment = hi + std::log(total / nn);
    est.top_share = 1.0 / total;
    est.heavy_tail = est.top_share > 0.5;

    std::vector<double> loo(num_envs);
    double loo_mean = 0.0;
    for (std::size_t k = 0; k < num_envs; ++k) {
        loo[k] = hi + std::log((prefix[k] + suffix[k + 1]) / (nn - 1.0));
        loo_mean += loo[k];
    }
    loo_mean /= nn;
    double ss = 0.0;
    for (double v : loo) {
        ss += (v - loo_mean) * (v - loo_mean);
    }
    est.stderr_log = std::sqrt((nn - 1.0) / nn * ss);
    return est;
}

/// r_n = (log <u_n> - lambda log Gamma(n+1)) / n over an n-grid.
struct AsymFit {
    std::vector<std::size_t> ns;
    std::vector<double> log_moments;
    double lambda = 0.0;
    std::vector<double> r;
    double r_last = 0.0;
    double slope = 0.0;  ///< least-squares slope of r_n against n
};

inline AsymFit asymptotic_fit(const std::vector<std::size_t>& ns, const std::vector<double>& log_moments,
                              double lambda)
{
    if (ns.size() != log_moments.size()) {
        fail(ErrorKind::LengthMismatch, "n-grid and log-moments differ in length");
    }
    if (ns.empty()) {
        fail(ErrorKind::PreconditionViolated, "empty n-grid");
    }
    for (std::size_t k = 0; k < ns.size(); ++k) {
        if (ns[k] == 0 || (k > 0 && ns[k] <= ns[k - 1])) {
            fail(ErrorKind::PreconditionViolated, "n-grid must be positive and strictly increasing");
        }
    }
    AsymFit fit{ns, log_moments, lambda, {}, 0.0, 0.0};
    for (std::size_t k = 0; k < ns.size(); ++k) {
        const auto n = static_cast<double>(ns[k]);
        fit.r.push_back((log_moments[k] - lambda * log_factorial(n)) / n);
    }
    fit.r_last = fit.r.back();
    if (ns.size() >= 2) {
        double mx = 0.0, my = 0.0;
        for (std::size_t k = 0; k < ns.size(); ++k) {
            mx += static_cast<double>(ns[k]);
            my += fit.r[k];
        }
        mx /= static_cast<double>(ns.size());
        my /= static_cast<double>(ns.size());
        double sxy = 0.0, sxx = 0.0;
        for (std::size_t k = 0; k < ns.size(); ++k) {
            const double dx = static_cast<double>(ns[k]) - mx;
            sxy += dx * (fit.r[k] - my);
            sxx += dx * dx;
        }
        fit.slope = sxy / sxx;
    }
    return fit;
}

} // namespace mbrw

#endif
