#ifndef MBRW_TYPEGRAPH_HPP
#define MBRW_TYPEGRAPH_HPP

#include <algorithm>
#include <cmath>
#include <compare>
#include <functional>
#include <cstddef>
#include <limits>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "mbrw/digraph.hpp"
#include "mbrw/error.hpp"

namespace mbrw {

/// A directed type edge (from -> to) carrying its Weibull parameter rho.
struct Edge {
    std::size_t from = 0;
    std::size_t to = 0;
    double rho = 1.0;
};

/// Finite directed type graph G = (T, A) with positive rho on every edge.
///
/// Invariants (checked by build()): no duplicate edges, every type has an
/// outgoing edge, rho > 0 on A, and the graph is connected when directions
/// are ignored. Strong connectivity is recorded but not required.
class TypeGraph {
public:
    /// Validates and builds a graph. The type set is {0, ..., num_types-1};
    /// when `num_types` is empty it is inferred as 1 + the largest index.
    static TypeGraph build(std::span<const Edge> edges, std::optional<std::size_t> num_types = {})
    {
        if (edges.empty()) {
            fail(ErrorKind::DanglingType, "edge list is empty");
        }
        std::size_t n = 0;
        for (const Edge& e : edges) {
            n = std::max({n, e.from + 1, e.to + 1});
        }
        if (num_types) {
            if (n > *num_types) {
                fail(ErrorKind::IndexOutOfRange,
                     "edge index " + std::to_string(n - 1) + " exceeds type count "
                         + std::to_string(*num_types));
            }
            n = *num_types;
        }

        TypeGraph g;
        g.n_ = n;
        g.rho_ = Eigen::MatrixXd::Zero(n, n);
        g.edge_index_.assign(n * n, kNoEdge);
        g.succ_.assign(n, {});
        for (const Edge& e : edges) {
            if (!(e.rho > 0.0) || !std::isfinite(e.rho)) {
                fail(ErrorKind::NonpositiveRho, "rho(" + std::to_string(e.from) + ","
                                                    + std::to_string(e.to) + ") must be positive");
            }
            if (g.rho_(e.from, e.to) != 0.0) {
                fail(ErrorKind::DuplicateEdge,
                     "edge (" + std::to_string(e.from) + "," + std::to_string(e.to) + ") repeated");
            }
            g.rho_(e.from, e.to) = e.rho;
        }
        for (std::size_t i = 0; i < n; ++i) {
            for (std::size_t j = 0; j < n; ++j) {
                if (g.rho_(i, j) > 0.0) {
                    g.edge_index_[i * n + j] = g.edges_.size();
                    g.edges_.push_back({i, j, g.rho_(i, j)});
                    g.succ_[i].push_back(j);
                }
            }
            if (g.succ_[i].empty()) {
                fail(ErrorKind::DanglingType, "type " + std::to_string(i) + " has no outgoing edge");
            }
        }
        if (!digraph::weakly_connected(g.succ_)) {
            fail(ErrorKind::Disconnected, "type graph is not connected");
        }
        g.strongly_connected_ = digraph::strongly_connected(g.succ_);
        return g;
    }

    std::size_t num_types() const noexcept { return n_; }
    std::size_t num_edges() const noexcept { return edges_.size(); }

    /// Edges sorted lexicographically by (from, to).
    const std::vector<Edge>& edges() const noexcept { return edges_; }

    bool has_edge(std::size_t i, std::size_t j) const { return edge_index_[i * n_ + j] != kNoEdge; }

    /// Position of (i,j) in edges(), or npos when (i,j) is not an edge.
    std::size_t edge_index(std::size_t i, std::size_t j) const { return edge_index_[i * n_ + j]; }

    /// rho_ij, zero off A.
    double rho(std::size_t i, std::size_t j) const { return rho_(i, j); }
    const Eigen::MatrixXd& rho_matrix() const noexcept { return rho_; }

    std::size_t outdeg(std::size_t i) const { return succ_[i].size(); }
    const std::vector<std::size_t>& successors(std::size_t i) const { return succ_[i]; }
    const digraph::Adjacency& adjacency() const noexcept { return succ_; }

    bool strongly_connected() const noexcept { return strongly_connected_; }

    static constexpr std::size_t kNoEdge = std::numeric_limits<std::size_t>::max();

private:
    TypeGraph() = default;

    std::size_t n_ = 0;
    Eigen::MatrixXd rho_;
    std::vector<Edge> edges_;
    std::vector<std::size_t> edge_index_;
    digraph::Adjacency succ_;
    bool strongly_connected_ = false;
};

inline TypeGraph build_graph(std::span<const Edge> edges, std::optional<std::size_t> num_types = {})
{
    return TypeGraph::build(edges, num_types);
}

/// Simple cycle stored as (i_1, ..., i_l, i_1), rotated so i_1 is the
/// smallest vertex. Comparison is lexicographic on that sequence.
struct SimpleCycle {
    std::vector<std::size_t> vertices;

    std::size_t length() const noexcept { return vertices.empty() ? 0 : vertices.size() - 1; }

    /// The l edges (i_m, i_{m+1}).
    std::vector<std::pair<std::size_t, std::size_t>> edges() const
    {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        for (std::size_t m = 0; m + 1 < vertices.size(); ++m) {
            out.emplace_back(vertices[m], vertices[m + 1]);
        }
        return out;
    }

    bool contains_edge(std::size_t i, std::size_t j) const
    {
        for (std::size_t m = 0; m + 1 < vertices.size(); ++m) {
            if (vertices[m] == i && vertices[m + 1] == j) {
                return true;
            }
        }
        return false;
    }

    auto operator<=>(const SimpleCycle&) const = default;
    bool operator==(const SimpleCycle&) const = default;
};

/// Rotates a closed vertex walk (first == last) to canonical form.
inline SimpleCycle canonical_cycle(std::vector<std::size_t> closed)
{
    closed.pop_back();
    const auto it = std::min_element(closed.begin(), closed.end());
    std::rotate(closed.begin(), it, closed.end());
    closed.push_back(closed.front());
    return SimpleCycle{std::move(closed)};
}

/// Probability measure on T x T, stored densely; entry (i,j) = mu(i,j).
struct TypePairMeasure {
    Eigen::MatrixXd weights;

    double total() const { return weights.sum(); }

    /// Largest |out-marginal(i) - in-marginal(i)|.
    double marginal_defect() const
    {
        return (weights.rowwise().sum() - weights.colwise().sum().transpose()).cwiseAbs().maxCoeff();
    }

    /// Membership in the equal-marginal probability measures supported on A.
    bool is_shift_invariant_on(const TypeGraph& g, double tol) const
    {
        const auto n = static_cast<Eigen::Index>(g.num_types());
        if (weights.rows() != n || weights.cols() != n) {
            return false;
        }
        for (Eigen::Index i = 0; i < n; ++i) {
            for (Eigen::Index j = 0; j < n; ++j) {
                const double w = weights(i, j);
                if (w < -tol || (w > tol && !g.has_edge(i, j))) {
                    return false;
                }
            }
        }
        return std::abs(total() - 1.0) <= tol && marginal_defect() <= tol;
    }

    double dot(const Eigen::MatrixXd& f) const { return weights.cwiseProduct(f).sum(); }
};

/// Uniform measure 1/|gamma| on the edges of gamma.
inline TypePairMeasure cycle_measure(const SimpleCycle& cycle, std::size_t num_types)
{
    TypePairMeasure mu{Eigen::MatrixXd::Zero(num_types, num_types)};
    const double w = 1.0 / static_cast<double>(cycle.length());
    for (auto [i, j] : cycle.edges()) {
        mu.weights(i, j) = w;
    }
    return mu;
}

/// Mean of rho along a cycle. Computed as min + mean(rho - min) so a cycle
/// with constant rho returns that value exactly.
inline double cycle_mean(const Eigen::MatrixXd& rho, const SimpleCycle& cycle)
{
    const auto es = cycle.edges();
    double lo = std::numeric_limits<double>::infinity();
    for (auto [i, j] : es) {
        lo = std::min(lo, rho(i, j));
    }
    double excess = 0.0;
    for (auto [i, j] : es) {
        excess += rho(i, j) - lo;
    }
    return lo + excess / static_cast<double>(es.size());
}

inline constexpr std::size_t kDefaultCycleLimit = 2'000'000;

/// All simple cycles, each once in canonical rotation, sorted lexicographically.
/// Johnson's algorithm; throws EnumerationTooLarge past `limit` cycles.
inline std::vector<SimpleCycle> enumerate_simple_cycles(const TypeGraph& g,
                                                        std::size_t limit = kDefaultCycleLimit)
{
    const std::size_t n = g.num_types();
    std::vector<SimpleCycle> cycles;
    std::vector<bool> blocked(n, false);
    std::vector<std::vector<std::size_t>> blocked_by(n);
    std::vector<std::size_t> path;
    std::vector<bool> in_comp(n, false);
    std::size_t start = 0;

    std::function<void(std::size_t)> unblock = [&](std::size_t u) {
        blocked[u] = false;
        auto pending = std::move(blocked_by[u]);
        blocked_by[u].clear();
        for (std::size_t w : pending) {
            if (blocked[w]) {
                unblock(w);
            }
        }
    };

    std::function<bool(std::size_t)> circuit = [&](std::size_t v) {
        bool found = false;
        path.push_back(v);
        blocked[v] = true;
        for (std::size_t w : g.successors(v)) {
            if (!in_comp[w]) {
                continue;
            }
            if (w == start) {
                auto closed = path;
                closed.push_back(start);
                cycles.push_back(SimpleCycle{std::move(closed)});
                if (cycles.size() > limit) {
                    fail(ErrorKind::EnumerationTooLarge,
                         "more than " + std::to_string(limit) + " simple cycles");
                }
                found = true;
            } else if (!blocked[w] && circuit(w)) {
                found = true;
            }
        }
        if (found) {
            unblock(v);
        } else {
            for (std::size_t w : g.successors(v)) {
                if (in_comp[w]) {
                    auto& b = blocked_by[w];
                    if (std::find(b.begin(), b.end(), v) == b.end()) {
                        b.push_back(v);
                    }
                }
            }
        }
        path.pop_back();
        return found;
    };

    for (start = 0; start < n; ++start) {
        // SCC of `start` in the subgraph induced by vertices >= start
        digraph::Adjacency sub(n);
        for (std::size_t u = start; u < n; ++u) {
            for (std::size_t v : g.successors(u)) {
                if (v >= start) {
                    sub[u].push_back(v);
                }
            }
        }
        const auto scc = digraph::strongly_connected_components(sub);
        std::fill(in_comp.begin(), in_comp.end(), false);
        for (std::size_t v : scc.components[scc.id[start]]) {
            if (v >= start) {
                in_comp[v] = true;
            }
        }
        for (std::size_t v = 0; v < n; ++v) {
            blocked[v] = false;
            blocked_by[v].clear();
        }
        circuit(start);
    }
    std::sort(cycles.begin(), cycles.end());
    return cycles;
}

/// Length of a shortest directed cycle, by BFS from every vertex.
inline std::size_t girth(const TypeGraph& g)
{
    const std::size_t n = g.num_types();
    std::size_t best = std::numeric_limits<std::size_t>::max();
    for (std::size_t s = 0; s < n; ++s) {
        if (g.has_edge(s, s)) {
            return 1;
        }
        const auto dist = digraph::bfs_distances(g.adjacency(), s);
        for (std::size_t u = 0; u < n; ++u) {
            if (dist[u] != std::numeric_limits<std::size_t>::max() && g.has_edge(u, s)) {
                best = std::min(best, dist[u] + 1);
            }
        }
    }
    return best;
}

struct WeightedCycle {
    double weight = 0.0;
    SimpleCycle cycle;
};

/// Writes mu as a convex combination of cycle measures by greedy peeling:
/// scan the cycles in canonical order and subtract the largest multiple of
/// each whose edges all still carry mass. Entries at or below `tol` count
/// as empty.
inline std::vector<WeightedCycle> cycle_decomposition(const TypePairMeasure& mu, const TypeGraph& g,
                                                      double tol = 1e-9)
{
    const auto n = static_cast<Eigen::Index>(g.num_types());
    if (mu.weights.rows() != n || mu.weights.cols() != n) {
        fail(ErrorKind::DimensionMismatch, "measure does not match the type graph");
    }
    for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
            const double w = mu.weights(i, j);
            if (w < -tol) {
                fail(ErrorKind::DomainError, "negative weight in pair measure");
            }
            if (w > tol && !g.has_edge(i, j)) {
                fail(ErrorKind::DomainError, "pair measure charges a non-edge");
            }
        }
    }
    if (mu.marginal_defect() > tol) {
        fail(ErrorKind::NotShiftInvariant, "marginals differ by " + std::to_string(mu.marginal_defect()));
    }
    if (std::abs(mu.total() - 1.0) > tol) {
        fail(ErrorKind::NotShiftInvariant, "total mass is not 1");
    }

    const auto cycles = enumerate_simple_cycles(g);
    Eigen::MatrixXd residual = mu.weights;
    std::map<std::size_t, double> picked;
    bool progress = true;
    while (progress) {
        progress = false;
        for (std::size_t c = 0; c < cycles.size(); ++c) {
            const auto es = cycles[c].edges();
            double m = std::numeric_limits<double>::infinity();
            for (auto [i, j] : es) {
                m = std::min(m, residual(i, j));
            }
            if (m <= tol) {
                continue;
            }
            for (auto [i, j] : es) {
                residual(i, j) -= m;
            }
            picked[c] += m * static_cast<double>(es.size());
            progress = true;
        }
    }

    std::vector<WeightedCycle> out;
    for (auto [c, w] : picked) {
        out.push_back({w, cycles[c]});
    }
    return out;
}

} // namespace mbrw

#endif
