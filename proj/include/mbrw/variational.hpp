#ifndef MBRW_VARIATIONAL_HPP
#define MBRW_VARIATIONAL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mbrw/chain.hpp"
#include "mbrw/digraph.hpp"
#include "mbrw/error.hpp"
#include "mbrw/optimize.hpp"
#include "mbrw/rng.hpp"
#include "mbrw/simplex.hpp"
#include "mbrw/special.hpp"
#include "mbrw/typegraph.hpp"

namespace mbrw {

// ---------------------------------------------------------------------------
// Leading term: maximum mean cycle
// ---------------------------------------------------------------------------

inline constexpr std::size_t kMaxEnumerationTypes = 12;
inline constexpr double kCycleTieTol = 1e-9;

namespace detail {

struct KarpResult {
    double min_mean = std::numeric_limits<double>::infinity();
    SimpleCycle witness;
};

// Karp's minimum mean cycle on one strongly connected component, with edge
// weights weight(u, v). The witness is the best cycle on the critical walk.
template <class Weight>
KarpResult karp_min_mean(const TypeGraph& g, const std::vector<std::size_t>& comp, Weight weight)
{
    const std::size_t k = comp.size();
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<std::size_t> local(g.num_types(), k);
    for (std::size_t a = 0; a < k; ++a) {
        local[comp[a]] = a;
    }
    std::vector<std::vector<double>> d(k + 1, std::vector<double>(k, inf));
    std::vector<std::vector<std::size_t>> pred(k + 1, std::vector<std::size_t>(k, k));
    d[0][0] = 0.0;
    for (std::size_t m = 1; m <= k; ++m) {
        for (std::size_t a = 0; a < k; ++a) {
            if (d[m - 1][a] == inf) {
                continue;
            }
            for (std::size_t w : g.successors(comp[a])) {
                const std::size_t b = local[w];
                if (b == k) {
                    continue;
                }
                const double cand = d[m - 1][a] + weight(comp[a], w);
                if (cand < d[m][b]) {
                    d[m][b] = cand;
                    pred[m][b] = a;
                }
            }
        }
    }
    KarpResult res;
    std::size_t best_v = k;
    for (std::size_t v = 0; v < k; ++v) {
        if (d[k][v] == inf) {
            continue;
        }
        double worst = -inf;
        for (std::size_t m = 0; m < k; ++m) {
            if (d[m][v] != inf) {
                worst = std::max(worst, (d[k][v] - d[m][v]) / static_cast<double>(k - m));
            }
        }
        if (worst < res.min_mean) {
            res.min_mean = worst;
            best_v = v;
        }
    }
    if (best_v == k) {
        return res;
    }
    // walk back k steps, then cut the walk into simple cycles
    std::vector<std::size_t> walk(k + 1);
    walk[k] = best_v;
    for (std::size_t m = k; m > 0; --m) {
        walk[m - 1] = pred[m][walk[m]];
    }
    std::vector<std::size_t> stack;
    std::vector<std::size_t> pos(k, k + 1);
    double best_mean = inf;
    for (std::size_t v : walk) {
        if (pos[v] <= k) {
            std::vector<std::size_t> closed;
            for (std::size_t p = pos[v]; p < stack.size(); ++p) {
                closed.push_back(comp[stack[p]]);
            }
            closed.push_back(comp[v]);
            SimpleCycle c = canonical_cycle(closed);
            double mean = 0.0;
            for (auto [i, j] : c.edges()) {
                mean += weight(i, j);
            }
            mean /= static_cast<double>(c.length());
            if (mean < best_mean) {
                best_mean = mean;
                res.witness = std::move(c);
            }
            while (stack.size() > pos[v] + 1) {
                pos[stack.back()] = k + 1;
                stack.pop_back();
            }
            continue;
        }
        pos[v] = stack.size();
        stack.push_back(v);
    }
    return res;
}

} // namespace detail

struct MaxMeanCycle {
    double lambda = 0.0;                    ///< mean of rho along the witness cycle
    double karp_value = 0.0;                ///< Karp's value before witness evaluation
    SimpleCycle witness;
    std::vector<SimpleCycle> optimal_cycles;  ///< Gamma(rho); just the witness if not exhaustive
    bool exhaustive = false;
    std::size_t total_cycles = 0;           ///< |Gamma| when exhaustive
};

/// lambda(rho) = max over simple cycles of the mean of rho, by Karp's
/// algorithm on -rho in each strongly connected component.
inline MaxMeanCycle lambda_max_mean_cycle(const TypeGraph& g)
{
    const auto scc = digraph::strongly_connected_components(g.adjacency());
    MaxMeanCycle out;
    out.karp_value = -std::numeric_limits<double>::infinity();
    for (const auto& comp : scc.components) {
        bool has_edge = false;
        for (std::size_t v : comp) {
            for (std::size_t w : g.successors(v)) {
                has_edge = has_edge || scc.id[w] == scc.id[v];
            }
        }
        if (!has_edge) {
            continue;
        }
        const auto r = detail::karp_min_mean(g, comp, [&](std::size_t i, std::size_t j) { return -g.rho(i, j); });
        if (-r.min_mean > out.karp_value) {
            out.karp_value = -r.min_mean;
            out.witness = r.witness;
        }
    }
    out.lambda = cycle_mean(g.rho_matrix(), out.witness);
    out.optimal_cycles = {out.witness};
    if (g.num_types() <= kMaxEnumerationTypes) {
        try {
            const auto all = enumerate_simple_cycles(g);
            out.total_cycles = all.size();
            out.optimal_cycles.clear();
            for (const auto& c : all) {
                if (std::abs(cycle_mean(g.rho_matrix(), c) - out.lambda) <= kCycleTieTol * std::abs(out.lambda)) {
                    out.optimal_cycles.push_back(c);
                }
            }
            out.exhaustive = true;
        } catch (const Error& e) {
            if (e.kind() != ErrorKind::EnumerationTooLarge) {
                throw;
            }
        }
    }
    return out;
}

/// Equality constraints of the shift-invariant probability measures on A:
/// one balance row per type plus the total-mass row. Columns follow g.edges().
inline Eigen::MatrixXd shift_invariance_constraints(const TypeGraph& g)
{
    const auto n = static_cast<Eigen::Index>(g.num_types());
    const auto m = static_cast<Eigen::Index>(g.num_edges());
    Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n + 1, m);
    for (Eigen::Index e = 0; e < m; ++e) {
        const Edge& ed = g.edges()[e];
        a(ed.from, e) += 1.0;
        a(ed.to, e) -= 1.0;
        a(n, e) = 1.0;
    }
    return a;
}

struct LinearOptimum {
    double value = 0.0;
    TypePairMeasure vertex;
};

/// max <mu, f> over shift-invariant probability measures on A (simplex).
inline LinearOptimum maximize_over_shift_invariant(const TypeGraph& g, const Eigen::MatrixXd& f)
{
    const Eigen::MatrixXd a = shift_invariance_constraints(g);
    Eigen::VectorXd b = Eigen::VectorXd::Zero(a.rows());
    b(a.rows() - 1) = 1.0;
    Eigen::VectorXd c(g.num_edges());
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
        c(e) = f(g.edges()[e].from, g.edges()[e].to);
    }
    const auto sol = lp::maximize(a, b, c);
    if (sol.status != lp::Status::Optimal) {
        fail(ErrorKind::PreconditionViolated, "shift-invariant LP has no optimum");
    }
    LinearOptimum out{sol.objective, {Eigen::MatrixXd::Zero(g.num_types(), g.num_types())}};
    for (std::size_t e = 0; e < g.num_edges(); ++e) {
        out.vertex.weights(g.edges()[e].from, g.edges()[e].to) = sol.x(e);
    }
    return out;
}

/// lambda(rho) as the linear program sup <mu, rho> over shift-invariant mu.
inline double lambda_lp_oracle(const TypeGraph& g)
{
    return maximize_over_shift_invariant(g, g.rho_matrix()).value;
}

inline constexpr std::size_t kMaxVertexEnumerationEdges = 24;

/// Every vertex of the shift-invariant polytope, by exhaustive basis
/// enumeration: supports of at most |T| edges whose columns are independent
/// and whose unique solution is strictly positive.
inline std::vector<TypePairMeasure> lp_vertices(const TypeGraph& g)
{
    const std::size_t m = g.num_edges();
    const std::size_t n = g.num_types();
    if (m > kMaxVertexEnumerationEdges) {
        fail(ErrorKind::EnumerationTooLarge, "vertex enumeration limited to 24 edges");
    }
    const Eigen::MatrixXd a = shift_invariance_constraints(g);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(a.rows());
    rhs(a.rows() - 1) = 1.0;
    std::vector<TypePairMeasure> out;
    std::vector<std::size_t> chosen;

    auto test_support = [&]() {
        // every vertex touched must both emit and receive mass
        std::vector<int> out_deg(n, 0), in_deg(n, 0);
        for (std::size_t e : chosen) {
            ++out_deg[g.edges()[e].from];
            ++in_deg[g.edges()[e].to];
        }
        for (std::size_t v = 0; v < n; ++v) {
            if ((out_deg[v] > 0) != (in_deg[v] > 0)) {
                return;
            }
        }
        Eigen::MatrixXd sub(a.rows(), chosen.size());
        for (std::size_t k = 0; k < chosen.size(); ++k) {
            sub.col(k) = a.col(chosen[k]);
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(sub);
        if (lu.rank() != static_cast<Eigen::Index>(chosen.size())) {
            return;
        }
        const Eigen::VectorXd w = lu.solve(rhs);
        if ((sub * w - rhs).cwiseAbs().maxCoeff() > 1e-9 || (w.array() <= 1e-12).any()) {
            return;
        }
        TypePairMeasure mu{Eigen::MatrixXd::Zero(n, n)};
        for (std::size_t k = 0; k < chosen.size(); ++k) {
            mu.weights(g.edges()[chosen[k]].from, g.edges()[chosen[k]].to) = w(k);
        }
        out.push_back(std::move(mu));
    };

    std::function<void(std::size_t)> recurse = [&](std::size_t next) {
        if (!chosen.empty()) {
            test_support();
        }
        if (chosen.size() == n) {
            return;
        }
        for (std::size_t e = next; e < m; ++e) {
            chosen.push_back(e);
            recurse(e + 1);
            chosen.pop_back();
        }
    };
    recurse(0);
    return out;
}

/// Whether `target` is a convex combination of `points` (LP feasibility).
inline bool in_convex_hull(const TypePairMeasure& target, const std::vector<TypePairMeasure>& points)
{
    if (points.empty()) {
        return false;
    }
    const Eigen::Index n = target.weights.size();
    const auto k = static_cast<Eigen::Index>(points.size());
    Eigen::MatrixXd a(n + 1, k);
    Eigen::VectorXd b(n + 1);
    for (Eigen::Index c = 0; c < k; ++c) {
        a.col(c).head(n) = points[c].weights.reshaped();
        a(n, c) = 1.0;
    }
    b.head(n) = target.weights.reshaped();
    b(n) = 1.0;
    return lp::feasible(a, b);
}

// ---------------------------------------------------------------------------
// Energy, entropy and degree functionals on (T x X)^2
// ---------------------------------------------------------------------------

/// S(nu) = sum_{(i,j) in A} rho_ij sum_x bar(i,j,x) log bar(i,j,x) + sum bar(i,j) rho_ij log rho_ij.
inline double energy_S(const PairMeasure& nu, const TypeGraph& g)
{
    double s = 0.0;
    for (const Edge& e : g.edges()) {
        for (std::size_t x = 0; x < nu.num_sites(); ++x) {
            s += e.rho * xlogx(nu.bar(e.from, e.to, x));
        }
        s += nu.bar_pair(e.from, e.to) * e.rho * std::log(e.rho);
    }
    return s;
}

/// I(nu) = sum nu log(nu / (bar(i,x) P_xy 1{(i,j) in A})); +inf when nu is
/// not absolutely continuous with respect to that reference measure.
inline double entropy_I(const PairMeasure& nu, const SpatialChain& chain, const TypeGraph& g)
{
    double s = 0.0;
    const std::size_t nt = nu.num_types();
    const std::size_t nx = nu.num_sites();
    for (std::size_t i = 0; i < nt; ++i) {
        for (std::size_t x = 0; x < nx; ++x) {
            for (std::size_t j = 0; j < nt; ++j) {
                for (std::size_t y = 0; y < nx; ++y) {
                    const double w = nu(i, x, j, y);
                    if (w <= 0.0) {
                        continue;
                    }
                    const double ref = g.has_edge(i, j) ? nu.bar_site(i, x) * chain(x, y) : 0.0;
                    if (ref <= 0.0) {
                        return std::numeric_limits<double>::infinity();
                    }
                    s += w * std::log(w / ref);
                }
            }
        }
    }
    return s;
}

/// D(nu) = sum_k bar(k) log deg+(k).
inline double deg_D(const PairMeasure& nu, const TypeGraph& g)
{
    double s = 0.0;
    for (std::size_t k = 0; k < g.num_types(); ++k) {
        s += nu.bar_type(k) * std::log(static_cast<double>(g.outdeg(k)));
    }
    return s;
}

/// I'(nu) = I(nu) + D(nu) on shift-invariant measures, +inf otherwise.
inline double rate_I_prime(const PairMeasure& nu, const SpatialChain& chain, const TypeGraph& g,
                           double tol = 1e-9)
{
    if (!nu.is_shift_invariant(tol)) {
        return std::numeric_limits<double>::infinity();
    }
    return entropy_I(nu, chain, g) + deg_D(nu, g);
}

// ---------------------------------------------------------------------------
// Stationary-kernel parametrisation of shift-invariant pair measures
// ---------------------------------------------------------------------------

/// Shift-invariant measures nu = pi (x) Q on a strongly connected set of
/// product states, where Q is a softmax kernel over allowed transitions and
/// pi its stationary law. In each row the first allowed logit is pinned at 0.
class KernelFamily {
public:
    KernelFamily(std::size_t num_types, std::size_t num_sites, std::vector<std::size_t> states,
                 std::vector<std::vector<std::size_t>> allowed)
        : nt_(num_types), nx_(num_sites), states_(std::move(states)), allowed_(std::move(allowed))
    {
        for (const auto& row : allowed_) {
            offset_.push_back(dim_);
            dim_ += row.size() - 1;
        }
    }

    std::size_t dim() const noexcept { return dim_; }
    const std::vector<std::size_t>& states() const noexcept { return states_; }
    const std::vector<std::vector<std::size_t>>& allowed() const noexcept { return allowed_; }

    Eigen::MatrixXd kernel(const Eigen::VectorXd& theta) const
    {
        const auto k = static_cast<Eigen::Index>(states_.size());
        Eigen::MatrixXd q = Eigen::MatrixXd::Zero(k, k);
        for (std::size_t a = 0; a < allowed_.size(); ++a) {
            const auto& row = allowed_[a];
            double hi = 0.0;
            for (std::size_t c = 1; c < row.size(); ++c) {
                hi = std::max(hi, theta(offset_[a] + c - 1));
            }
            double z = 0.0;
            for (std::size_t c = 0; c < row.size(); ++c) {
                const double logit = c == 0 ? 0.0 : theta(offset_[a] + c - 1);
                const double w = std::exp(logit - hi);
                q(a, row[c]) = w;
                z += w;
            }
            q.row(a) /= z;
        }
        return q;
    }

    /// The full (T x X)^2 measure for parameters theta.
    PairMeasure measure(const Eigen::VectorXd& theta) const
    {
        const Eigen::MatrixXd q = kernel(theta);
        const Eigen::VectorXd pi = stationary_distribution(q);
        const auto dim = static_cast<Eigen::Index>(nt_ * nx_);
        Eigen::MatrixXd w = Eigen::MatrixXd::Zero(dim, dim);
        for (std::size_t a = 0; a < states_.size(); ++a) {
            for (std::size_t b : allowed_[a]) {
                w(states_[a], states_[b]) = pi(a) * q(a, b);
            }
        }
        return PairMeasure(nt_, nx_, std::move(w));
    }

    /// Parameters from desired per-transition logits (any row offset).
    Eigen::VectorXd from_logits(const std::vector<std::vector<double>>& logits) const
    {
        Eigen::VectorXd theta(dim_);
        for (std::size_t a = 0; a < allowed_.size(); ++a) {
            for (std::size_t c = 1; c < allowed_[a].size(); ++c) {
                theta(offset_[a] + c - 1) = logits[a][c] - logits[a][0];
            }
        }
        return theta;
    }

private:
    std::size_t nt_, nx_;
    std::vector<std::size_t> states_;
    std::vector<std::vector<std::size_t>> allowed_;
    std::vector<std::size_t> offset_;
    std::size_t dim_ = 0;
};

/// Splits the directed state graph `adj` into strongly connected components
/// that carry at least one internal transition, each as a KernelFamily.
inline std::vector<KernelFamily> kernel_families(std::size_t num_types, std::size_t num_sites,
                                                 const digraph::Adjacency& adj)
{
    const auto scc = digraph::strongly_connected_components(adj);
    std::vector<KernelFamily> out;
    for (std::size_t c = 0; c < scc.components.size(); ++c) {
        const auto& members = scc.components[c];
        std::vector<std::size_t> local(adj.size(), adj.size());
        for (std::size_t a = 0; a < members.size(); ++a) {
            local[members[a]] = a;
        }
        std::vector<std::vector<std::size_t>> allowed(members.size());
        bool internal = false;
        for (std::size_t a = 0; a < members.size(); ++a) {
            for (std::size_t w : adj[members[a]]) {
                if (scc.id[w] == c) {
                    allowed[a].push_back(local[w]);
                    internal = true;
                }
            }
        }
        if (internal) {
            out.emplace_back(num_types, num_sites, members, std::move(allowed));
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Second-order constant chi(rho)
// ---------------------------------------------------------------------------

struct ChiOptions {
    std::size_t restarts = 20;   ///< random starts per component
    std::uint64_t seed = 1;
    double near_tol = 1e-6;      ///< restarts within this of the best are reported
    opt::Options optimizer{};
};

struct RestartRecord {
    std::string start;           ///< "cycle:0-1-0", "uniform" or "random"
    std::size_t component = 0;
    double objective = 0.0;
    std::vector<double> trace;
};

struct ChiResult {
    double chi = 0.0;
    double lambda = 0.0;
    std::vector<SimpleCycle> optimal_cycles;
    std::optional<PairMeasure> minimizer;
    std::vector<RestartRecord> restarts;
    std::size_t best_restart = 0;
    std::vector<std::size_t> near_optimal;
};

inline std::string cycle_label(const SimpleCycle& c)
{
    std::string s;
    for (std::size_t k = 0; k < c.vertices.size(); ++k) {
        s += (k ? "-" : "") + std::to_string(c.vertices[k]);
    }
    return s;
}

/// chi(rho) = inf { I(nu) - S(nu) : nu shift invariant on (T x X)^2, bar(nu) in Lambda(rho) }.
///
/// Lambda(rho) is the face of the shift-invariant polytope spanned by the
/// optimal cycles, i.e. the measures supported on edges of Gamma(rho).
/// The search runs over stationary kernels on the product states allowed
/// by those edges and P, one strongly connected component at a time. Each
/// component gets a start at every optimal cycle, a uniform start and
/// `restarts` random starts; each is polished by the box quasi-Newton
/// minimiser. The objective is nonconvex, so the result is the best local
/// optimum found.
inline ChiResult chi_solve(const TypeGraph& g, const SpatialChain& chain, const ChiOptions& options = {})
{
    const MaxMeanCycle mm = lambda_max_mean_cycle(g);
    if (!mm.exhaustive) {
        fail(ErrorKind::EnumerationTooLarge, "chi_solve needs every optimal cycle enumerated");
    }
    const std::size_t nt = g.num_types();
    const std::size_t nx = chain.num_sites();
    std::vector<bool> optimal_edge(nt * nt, false);
    for (const auto& c : mm.optimal_cycles) {
        for (auto [i, j] : c.edges()) {
            optimal_edge[i * nt + j] = true;
        }
    }
    digraph::Adjacency adj(nt * nx);
    for (std::size_t i = 0; i < nt; ++i) {
        for (std::size_t j = 0; j < nt; ++j) {
            if (!optimal_edge[i * nt + j]) {
                continue;
            }
            for (std::size_t x = 0; x < nx; ++x) {
                for (std::size_t y = 0; y < nx; ++y) {
                    if (chain(x, y) > 0.0) {
                        adj[i * nx + x].push_back(j * nx + y);
                    }
                }
            }
        }
    }
    const auto families = kernel_families(nt, nx, adj);

    ChiResult out;
    out.lambda = mm.lambda;
    out.optimal_cycles = mm.optimal_cycles;
    out.chi = std::numeric_limits<double>::infinity();
    Rng rng = make_rng(options.seed);
    std::uniform_real_distribution<double> unif(-3.0, 3.0);
    constexpr double kSuppressed = -30.0;

    for (std::size_t f = 0; f < families.size(); ++f) {
        const KernelFamily& fam = families[f];
        auto objective = [&](const Eigen::VectorXd& theta) {
            const PairMeasure nu = fam.measure(theta);
            return entropy_I(nu, chain, g) - energy_S(nu, g);
        };

        std::vector<std::pair<std::string, Eigen::VectorXd>> starts;
        for (const auto& c : mm.optimal_cycles) {
            std::vector<std::vector<double>> logits(fam.states().size());
            for (std::size_t a = 0; a < fam.states().size(); ++a) {
                const std::size_t ti = fam.states()[a] / nx;
                for (std::size_t b : fam.allowed()[a]) {
                    const std::size_t tj = fam.states()[b] / nx;
                    logits[a].push_back(c.contains_edge(ti, tj) ? 0.0 : kSuppressed);
                }
            }
            starts.emplace_back("cycle:" + cycle_label(c), fam.from_logits(logits));
        }
        starts.emplace_back("uniform", Eigen::VectorXd::Zero(fam.dim()));
        for (std::size_t r = 0; r < options.restarts; ++r) {
            Eigen::VectorXd theta(fam.dim());
            for (Eigen::Index k = 0; k < theta.size(); ++k) {
                theta(k) = unif(rng);
            }
            starts.emplace_back("random", std::move(theta));
        }

        for (auto& [label, theta0] : starts) {
            const opt::Result res = opt::minimize(objective, theta0, options.optimizer);
            out.restarts.push_back({label, f, res.value, res.trace});
            // ties keep the earlier restart
            if (res.value < out.chi) {
                out.chi = res.value;
                out.best_restart = out.restarts.size() - 1;
                out.minimizer = fam.measure(res.x);
            }
        }
    }
    if (families.empty() || !out.minimizer) {
        fail(ErrorKind::PreconditionViolated, "no admissible product-state component");
    }
    for (std::size_t r = 0; r < out.restarts.size(); ++r) {
        if (out.restarts[r].objective <= out.chi + options.near_tol) {
            out.near_optimal.push_back(r);
        }
    }
    return out;
}

struct NoMigrationChi {
    double chi = 0.0;
    std::vector<SimpleCycle> minimizers;
};

/// Closed form for one site and rho_ij = rho_i >= 1:
///   chi = min over gamma in Gamma(rho) of lambda log|gamma| - (1/|gamma|) sum_m rho_{i_m} log rho_{i_m},
/// and rho log(girth) - rho log rho when rho is constant.
inline NoMigrationChi chi_no_migration(const TypeGraph& g)
{
    const std::size_t nt = g.num_types();
    std::vector<double> rho_i(nt, 0.0);
    for (std::size_t i = 0; i < nt; ++i) {
        rho_i[i] = g.rho(i, g.successors(i).front());
        for (std::size_t j : g.successors(i)) {
            if (std::abs(g.rho(i, j) - rho_i[i]) > 1e-12 * rho_i[i]) {
                fail(ErrorKind::PreconditionViolated, "rho varies with the target type at " + std::to_string(i));
            }
        }
        if (rho_i[i] < 1.0) {
            fail(ErrorKind::PreconditionViolated, "rho_" + std::to_string(i) + " < 1");
        }
    }
    NoMigrationChi out;
    const bool uniform = std::all_of(rho_i.begin(), rho_i.end(), [&](double r) { return r == rho_i.front(); });
    if (uniform) {
        const double rho = rho_i.front();
        const std::size_t lmin = girth(g);
        out.chi = rho * std::log(static_cast<double>(lmin)) - rho * std::log(rho);
        if (nt <= kMaxEnumerationTypes) {
            try {
                for (auto& c : enumerate_simple_cycles(g)) {
                    if (c.length() == lmin) {
                        out.minimizers.push_back(std::move(c));
                    }
                }
            } catch (const Error& e) {
                if (e.kind() != ErrorKind::EnumerationTooLarge) {
                    throw;
                }
            }
        }
        return out;
    }
    const MaxMeanCycle mm = lambda_max_mean_cycle(g);
    if (!mm.exhaustive) {
        fail(ErrorKind::EnumerationTooLarge, "closed form needs every optimal cycle");
    }
    std::vector<double> values;
    out.chi = std::numeric_limits<double>::infinity();
    for (const auto& c : mm.optimal_cycles) {
        const auto l = static_cast<double>(c.length());
        double ent = 0.0;
        for (std::size_t m = 0; m < c.length(); ++m) {
            ent += xlogx(rho_i[c.vertices[m]]);
        }
        const double v = mm.lambda * std::log(l) - ent / l;
        values.push_back(v);
        out.chi = std::min(out.chi, v);
    }
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (values[k] <= out.chi + 1e-12 * std::max(1.0, std::abs(out.chi))) {
            out.minimizers.push_back(mm.optimal_cycles[k]);
        }
    }
    return out;
}

// ---------------------------------------------------------------------------
// Frobenius eigenvalue
// ---------------------------------------------------------------------------

namespace detail {
inline void check_irreducible(const Eigen::MatrixXd& a)
{
    if (a.rows() == 0 || a.rows() != a.cols()) {
        fail(ErrorKind::DimensionMismatch, "matrix must be square and non-empty");
    }
    if ((a.array() < 0.0).any() || !a.allFinite()) {
        fail(ErrorKind::DomainError, "matrix must be nonnegative and finite");
    }
    if (!digraph::strongly_connected(SpatialChain::support(a))) {
        fail(ErrorKind::NotIrreducible, "matrix is not irreducible");
    }
}
} // namespace detail

struct FrobeniusResult {
    double mu = 0.0;        ///< log spectral radius, iteration started at row 0
    double mu_alt = 0.0;    ///< same, started at the last row
    std::size_t iterations = 0;
};

/// mu(A) = lim (1/k) log sum_j (A^k)_ij = log of the Perron root. Power
/// iteration on A + cI (c = half the smallest row sum, which makes the
/// iteration aperiodic without swamping the root); stops when successive
/// growth ratios agree to 1e-13 relative.
inline FrobeniusResult frobenius_power(const Eigen::MatrixXd& a)
{
    detail::check_irreducible(a);
    const Eigen::Index n = a.rows();
    const double shift = 0.5 * a.rowwise().sum().minCoeff();
    const Eigen::MatrixXd m = a + shift * Eigen::MatrixXd::Identity(n, n);

    auto run = [&](Eigen::Index start, std::size_t& iters) {
        Eigen::VectorXd v = Eigen::VectorXd::Zero(n);
        v(start) = 1.0;
        double prev = std::numeric_limits<double>::infinity();
        double r = 0.0;
        int stable = 0;
        for (iters = 0; iters < 1'000'000; ++iters) {
            const Eigen::VectorXd w = m * v;
            r = w.sum();
            v = w / r;
            stable = std::abs(r - prev) < 1e-13 * r ? stable + 1 : 0;
            if (stable >= 3) {
                break;
            }
            prev = r;
        }
        return std::log(r - shift);
    };
    FrobeniusResult out;
    std::size_t it_alt = 0;
    out.mu = run(0, out.iterations);
    out.mu_alt = run(n - 1, it_alt);
    return out;
}

inline double frobenius_mu(const Eigen::MatrixXd& a) { return frobenius_power(a).mu; }

struct FrobeniusDual {
    double mu = 0.0;
    TypePairMeasure maximizer;
};

/// mu(A) = sup over shift-invariant nu of <nu, log A> - sum nu log(nu / bar(nu)),
/// searched over stationary kernels on the support of A.
inline FrobeniusDual frobenius_variational(const Eigen::MatrixXd& a, std::size_t restarts = 4,
                                           std::uint64_t seed = 1)
{
    detail::check_irreducible(a);
    const auto n = static_cast<std::size_t>(a.rows());
    const digraph::Adjacency adj = SpatialChain::support(a);
    std::vector<std::size_t> states(n);
    for (std::size_t i = 0; i < n; ++i) {
        states[i] = i;
    }
    const KernelFamily fam(n, 1, states, adj);
    auto neg_value = [&](const Eigen::VectorXd& theta) {
        const Eigen::MatrixXd q = fam.kernel(theta);
        const Eigen::VectorXd pi = stationary_distribution(q);
        double v = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j : adj[i]) {
                const double w = pi(i) * q(i, j);
                if (w > 0.0) {
                    v += w * (std::log(a(i, j)) - std::log(q(i, j)));
                }
            }
        }
        return -v;
    };
    Rng rng = make_rng(seed);
    std::uniform_real_distribution<double> unif(-2.0, 2.0);
    opt::Options o;
    o.max_iter = 1000;
    o.grad_tol = 1e-10;
    FrobeniusDual best{-std::numeric_limits<double>::infinity(), {}};
    for (std::size_t r = 0; r <= restarts; ++r) {
        Eigen::VectorXd theta = Eigen::VectorXd::Zero(fam.dim());
        if (r > 0) {
            for (Eigen::Index k = 0; k < theta.size(); ++k) {
                theta(k) = unif(rng);
            }
        }
        const auto res = opt::minimize(neg_value, theta, o);
        if (-res.value > best.mu) {
            best.mu = -res.value;
            best.maximizer = fam.measure(res.x).type_marginal();
        }
    }
    return best;
}

inline double frobenius_mu_variational(const Eigen::MatrixXd& a) { return frobenius_variational(a).mu; }

} // namespace mbrw

#endif
