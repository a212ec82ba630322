#ifndef MBRW_CHAIN_HPP
#define MBRW_CHAIN_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mbrw/digraph.hpp"
#include "mbrw/error.hpp"
#include "mbrw/rng.hpp"
#include "mbrw/typegraph.hpp"

namespace mbrw {

inline constexpr double kRowSumTol = 1e-12;

/// Irreducible row-stochastic matrix P on the site set {0, ..., |X|-1}.
class SpatialChain {
public:
    static SpatialChain from_matrix(Eigen::MatrixXd p)
    {
        if (p.rows() == 0 || p.rows() != p.cols()) {
            fail(ErrorKind::DimensionMismatch, "spatial matrix must be square and non-empty");
        }
        for (Eigen::Index x = 0; x < p.rows(); ++x) {
            if ((p.row(x).array() < 0.0).any() || !p.row(x).allFinite()) {
                fail(ErrorKind::NotStochastic, "row " + std::to_string(x) + " has a negative entry");
            }
            if (std::abs(p.row(x).sum() - 1.0) > kRowSumTol) {
                fail(ErrorKind::NotStochastic, "row " + std::to_string(x) + " does not sum to 1");
            }
        }
        if (!digraph::strongly_connected(support(p))) {
            fail(ErrorKind::NotIrreducible, "spatial chain is not irreducible");
        }
        SpatialChain c;
        c.p_ = std::move(p);
        return c;
    }

    /// The one-site chain P = [1].
    static SpatialChain trivial() { return from_matrix(Eigen::MatrixXd::Ones(1, 1)); }

    std::size_t num_sites() const noexcept { return static_cast<std::size_t>(p_.rows()); }
    double operator()(std::size_t x, std::size_t y) const { return p_(x, y); }
    const Eigen::MatrixXd& matrix() const noexcept { return p_; }

    static digraph::Adjacency support(const Eigen::MatrixXd& m)
    {
        digraph::Adjacency adj(m.rows());
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                if (m(i, j) > 0.0) {
                    adj[i].push_back(j);
                }
            }
        }
        return adj;
    }

private:
    SpatialChain() = default;
    Eigen::MatrixXd p_;
};

/// p_ij = 1{(i,j) in A} / deg+(i).
inline Eigen::MatrixXd type_kernel(const TypeGraph& g)
{
    const auto n = static_cast<Eigen::Index>(g.num_types());
    Eigen::MatrixXd k = Eigen::MatrixXd::Zero(n, n);
    for (const Edge& e : g.edges()) {
        k(e.from, e.to) = 1.0 / static_cast<double>(g.outdeg(e.from));
    }
    return k;
}

/// Stationary distribution of an irreducible stochastic matrix by
/// Grassmann-Taksar-Heyman state reduction (subtraction free).
inline Eigen::VectorXd stationary_distribution(const Eigen::MatrixXd& kernel)
{
    const Eigen::Index n = kernel.rows();
    Eigen::MatrixXd a = kernel;
    for (Eigen::Index k = n - 1; k > 0; --k) {
        const double s = a.row(k).head(k).sum();
        if (!(s > 0.0)) {
            fail(ErrorKind::NotIrreducible, "state reduction hit an absorbing block");
        }
        for (Eigen::Index i = 0; i < k; ++i) {
            a(i, k) /= s;
        }
        for (Eigen::Index i = 0; i < k; ++i) {
            const double aik = a(i, k);
            if (aik == 0.0) {
                continue;
            }
            for (Eigen::Index j = 0; j < k; ++j) {
                a(i, j) += aik * a(k, j);
            }
        }
    }
    Eigen::VectorXd pi = Eigen::VectorXd::Zero(n);
    pi(0) = 1.0;
    for (Eigen::Index j = 1; j < n; ++j) {
        double acc = 0.0;
        for (Eigen::Index i = 0; i < j; ++i) {
            acc += pi(i) * a(i, j);
        }
        pi(j) = acc;
    }
    return pi / pi.sum();
}

/// Product-chain state (type, site); flattened index is type * |X| + site.
struct ProductState {
    std::size_t type = 0;
    std::size_t site = 0;
    bool operator==(const ProductState&) const = default;
};

struct ProductPath {
    std::vector<ProductState> steps;
    std::size_t length() const noexcept { return steps.empty() ? 0 : steps.size() - 1; }
};

namespace detail {
inline std::size_t sample_row(const Eigen::MatrixXd& m, std::size_t row, Rng& rng)
{
    const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
    double acc = 0.0;
    std::size_t last_positive = 0;
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
        const double w = m(row, j);
        if (w <= 0.0) {
            continue;
        }
        last_positive = j;
        acc += w;
        if (u < acc) {
            return j;
        }
    }
    return last_positive;
}
} // namespace detail

/// Independent type chain (p) and site chain (P) run for n steps.
inline ProductPath sample_product_path(const TypeGraph& g, const SpatialChain& chain,
                                       ProductState start, std::size_t n, std::uint64_t seed)
{
    if (start.type >= g.num_types() || start.site >= chain.num_sites()) {
        fail(ErrorKind::IndexOutOfRange, "start state out of range");
    }
    Rng rng = make_rng(seed);
    ProductPath path;
    path.steps.reserve(n + 1);
    path.steps.push_back(start);
    ProductState cur = start;
    for (std::size_t l = 0; l < n; ++l) {
        const auto& succ = g.successors(cur.type);
        const std::size_t pick =
            std::uniform_int_distribution<std::size_t>(0, succ.size() - 1)(rng);
        cur.type = succ[pick];
        cur.site = detail::sample_row(chain.matrix(), cur.site, rng);
        path.steps.push_back(cur);
    }
    return path;
}

/// Probability measure nu on (T x X)^2 with its cached projections
///   bar(i,j,x) = sum_y nu((i,x),(j,y)),  bar(i,x) = sum_j bar(i,j,x),
///   bar(i,j)   = sum_x bar(i,j,x),        bar(i)   = sum_j bar(i,j).
class PairMeasure {
public:
    PairMeasure(std::size_t num_types, std::size_t num_sites, Eigen::MatrixXd weights)
        : t_(num_types), x_(num_sites), w_(std::move(weights))
    {
        const auto dim = static_cast<Eigen::Index>(t_ * x_);
        if (w_.rows() != dim || w_.cols() != dim) {
            fail(ErrorKind::DimensionMismatch, "pair measure has wrong shape");
        }
        bar_ijx_.assign(t_ * t_ * x_, 0.0);
        bar_ix_.assign(t_ * x_, 0.0);
        bar_ij_.assign(t_ * t_, 0.0);
        bar_i_.assign(t_, 0.0);
        for (std::size_t i = 0; i < t_; ++i) {
            for (std::size_t x = 0; x < x_; ++x) {
                for (std::size_t j = 0; j < t_; ++j) {
                    double s = 0.0;
                    for (std::size_t y = 0; y < x_; ++y) {
                        s += w_(index(i, x), index(j, y));
                    }
                    bar_ijx_[(i * t_ + j) * x_ + x] = s;
                    bar_ix_[i * x_ + x] += s;
                    bar_ij_[i * t_ + j] += s;
                    bar_i_[i] += s;
                }
            }
        }
    }

    std::size_t num_types() const noexcept { return t_; }
    std::size_t num_sites() const noexcept { return x_; }
    std::size_t index(std::size_t type, std::size_t site) const noexcept { return type * x_ + site; }

    double operator()(std::size_t i, std::size_t x, std::size_t j, std::size_t y) const
    {
        return w_(index(i, x), index(j, y));
    }
    const Eigen::MatrixXd& weights() const noexcept { return w_; }

    double bar(std::size_t i, std::size_t j, std::size_t x) const { return bar_ijx_[(i * t_ + j) * x_ + x]; }
    double bar_site(std::size_t i, std::size_t x) const { return bar_ix_[i * x_ + x]; }
    double bar_pair(std::size_t i, std::size_t j) const { return bar_ij_[i * t_ + j]; }
    double bar_type(std::size_t i) const { return bar_i_[i]; }

    /// T^2-marginal bar(i,j) as a type pair measure.
    TypePairMeasure type_marginal() const
    {
        TypePairMeasure mu{Eigen::MatrixXd::Zero(t_, t_)};
        for (std::size_t i = 0; i < t_; ++i) {
            for (std::size_t j = 0; j < t_; ++j) {
                mu.weights(i, j) = bar_pair(i, j);
            }
        }
        return mu;
    }

    /// Total variation distance between the two (T x X)-marginals.
    double marginal_gap() const
    {
        return 0.5 * (w_.rowwise().sum() - w_.colwise().sum().transpose()).cwiseAbs().sum();
    }

    bool is_shift_invariant(double tol) const
    {
        return (w_.array() >= -tol).all() && std::abs(w_.sum() - 1.0) <= tol
            && (w_.rowwise().sum() - w_.colwise().sum().transpose()).cwiseAbs().maxCoeff() <= tol;
    }

private:
    std::size_t t_;
    std::size_t x_;
    Eigen::MatrixXd w_;
    std::vector<double> bar_ijx_, bar_ix_, bar_ij_, bar_i_;
};

struct EmpiricalPairMeasure {
    PairMeasure measure;
    bool closed = false;  ///< path returns to its start, so marginals agree exactly
};

/// nu_n = (1/n) sum_l delta_{(s_{l-1}, s_l)} along the path.
inline EmpiricalPairMeasure empirical_pair_measure(const ProductPath& path, std::size_t num_types,
                                                   std::size_t num_sites)
{
    const std::size_t n = path.length();
    if (n == 0) {
        fail(ErrorKind::EmptyPath, "empirical pair measure needs at least one step");
    }
    const auto dim = static_cast<Eigen::Index>(num_types * num_sites);
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(dim, dim);
    std::vector<std::uint64_t> counts(static_cast<std::size_t>(dim * dim), 0);
    auto flat = [&](const ProductState& s) { return s.type * num_sites + s.site; };
    for (std::size_t l = 1; l <= n; ++l) {
        const auto& a = path.steps[l - 1];
        const auto& b = path.steps[l];
        if (a.type >= num_types || b.type >= num_types || a.site >= num_sites || b.site >= num_sites) {
            fail(ErrorKind::IndexOutOfRange, "path leaves the state space");
        }
        ++counts[flat(a) * dim + flat(b)];
    }
    for (Eigen::Index r = 0; r < dim; ++r) {
        for (Eigen::Index c = 0; c < dim; ++c) {
            w(r, c) = static_cast<double>(counts[r * dim + c]) / static_cast<double>(n);
        }
    }
    const bool closed = path.steps.front() == path.steps.back();
    return {PairMeasure(num_types, num_sites, std::move(w)), closed};
}

/// Stationary distribution of the type chain: GTH on the lowest-indexed
/// closed communicating class (the type chain need not be irreducible).
inline Eigen::VectorXd type_stationary_distribution(const TypeGraph& g)
{
    const auto scc = digraph::strongly_connected_components(g.adjacency());
    const Eigen::MatrixXd p = type_kernel(g);
    std::size_t best = scc.components.size();
    for (std::size_t c = 0; c < scc.components.size(); ++c) {
        bool closed = true;
        for (std::size_t v : scc.components[c]) {
            for (std::size_t w : g.successors(v)) {
                closed = closed && scc.id[w] == c;
            }
        }
        if (closed && (best == scc.components.size()
                       || scc.components[c].front() < scc.components[best].front())) {
            best = c;
        }
    }
    const auto& members = scc.components[best];
    const auto m = static_cast<Eigen::Index>(members.size());
    Eigen::MatrixXd sub(m, m);
    for (Eigen::Index a = 0; a < m; ++a) {
        for (Eigen::Index b = 0; b < m; ++b) {
            sub(a, b) = p(members[a], members[b]);
        }
    }
    const Eigen::VectorXd local = stationary_distribution(sub);
    Eigen::VectorXd pi = Eigen::VectorXd::Zero(g.num_types());
    for (Eigen::Index a = 0; a < m; ++a) {
        pi(members[a]) = local(a);
    }
    return pi;
}

/// Stationary pair measure of the product chain (T, X):
/// nu((i,x),(j,y)) = piT(i) p_ij piX(x) P_xy.
inline PairMeasure stationary_pair_measure(const TypeGraph& g, const SpatialChain& chain)
{
    const std::size_t nt = g.num_types();
    const std::size_t nx = chain.num_sites();
    const Eigen::VectorXd pit = type_stationary_distribution(g);
    const Eigen::VectorXd pix = stationary_distribution(chain.matrix());
    const Eigen::MatrixXd p = type_kernel(g);
    const auto dim = static_cast<Eigen::Index>(nt * nx);
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(dim, dim);
    for (std::size_t i = 0; i < nt; ++i) {
        for (std::size_t x = 0; x < nx; ++x) {
            for (std::size_t j = 0; j < nt; ++j) {
                for (std::size_t y = 0; y < nx; ++y) {
                    w(i * nx + x, j * nx + y) = pit(i) * p(i, j) * pix(x) * chain(x, y);
                }
            }
        }
    }
    return PairMeasure(nt, nx, std::move(w));
}

} // namespace mbrw

#endif
