#ifndef MBRW_SIMPLEX_HPP
#define MBRW_SIMPLEX_HPP

#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include <Eigen/Dense>

namespace mbrw::lp {

enum class Status { Optimal, Infeasible, Unbounded };

struct Solution {
    Status status = Status::Infeasible;
    Eigen::VectorXd x;
    double objective = 0.0;
    std::vector<std::size_t> basis;  ///< basic columns at the optimum
};

namespace detail {

// Dense tableau: rows hold B^-1 [A | b]; `cost` holds reduced costs with the
// negated objective value in the last column.
class Tableau {
public:
    Tableau(Eigen::MatrixXd rows, std::vector<std::size_t> basis)
        : t_(std::move(rows)), basis_(std::move(basis))
    {
    }

    Eigen::Index num_rows() const { return t_.rows(); }
    Eigen::Index rhs_col() const { return t_.cols() - 1; }
    const Eigen::MatrixXd& rows() const { return t_; }
    const std::vector<std::size_t>& basis() const { return basis_; }

    void set_costs(const Eigen::VectorXd& c)
    {
        cost_ = Eigen::RowVectorXd::Zero(t_.cols());
        cost_.head(c.size()) = c.transpose();
        for (Eigen::Index i = 0; i < t_.rows(); ++i) {
            cost_ -= c(basis_[i]) * t_.row(i);
        }
    }

    double objective() const { return -cost_(rhs_col()); }

    void pivot(Eigen::Index r, Eigen::Index col)
    {
        t_.row(r) /= t_(r, col);
        for (Eigen::Index i = 0; i < t_.rows(); ++i) {
            if (i != r && t_(i, col) != 0.0) {
                t_.row(i) -= t_(i, col) * t_.row(r);
            }
        }
        if (cost_.size() > 0 && cost_(col) != 0.0) {
            cost_ -= cost_(col) * t_.row(r);
        }
        basis_[r] = static_cast<std::size_t>(col);
    }

    void drop_row(Eigen::Index r)
    {
        const Eigen::Index m = t_.rows() - 1;
        if (r < m) {
            t_.row(r) = t_.row(m);
            basis_[r] = basis_[m];
        }
        t_.conservativeResize(m, Eigen::NoChange);
        basis_.pop_back();
    }

    /// Bland's rule minimisation over columns [0, allowed). Returns false if unbounded.
    bool run(Eigen::Index allowed, double eps)
    {
        while (true) {
            Eigen::Index enter = -1;
            for (Eigen::Index j = 0; j < allowed; ++j) {
                if (cost_(j) < -eps) {
                    enter = j;
                    break;
                }
            }
            if (enter < 0) {
                return true;
            }
            Eigen::Index leave = -1;
            double best = std::numeric_limits<double>::infinity();
            for (Eigen::Index i = 0; i < t_.rows(); ++i) {
                if (t_(i, enter) > eps) {
                    const double ratio = t_(i, rhs_col()) / t_(i, enter);
                    if (ratio < best - eps
                        || (std::abs(ratio - best) <= eps && basis_[i] < basis_[leave])) {
                        best = ratio;
                        leave = i;
                    }
                }
            }
            if (leave < 0) {
                return false;
            }
            pivot(leave, enter);
        }
    }

private:
    Eigen::MatrixXd t_;
    std::vector<std::size_t> basis_;
    Eigen::RowVectorXd cost_;
};

} // namespace detail

/// Two-phase dense simplex with Bland's rule: maximise c.x subject to
/// A x = b, x >= 0. Redundant equality rows are detected and dropped.
inline Solution maximize(const Eigen::MatrixXd& a, const Eigen::VectorXd& b, const Eigen::VectorXd& c,
                         double eps = 1e-11)
{
    const Eigen::Index m = a.rows();
    const Eigen::Index n = a.cols();
    Eigen::MatrixXd rows = Eigen::MatrixXd::Zero(m, n + m + 1);
    std::vector<std::size_t> basis(m);
    for (Eigen::Index i = 0; i < m; ++i) {
        const double sign = b(i) < 0.0 ? -1.0 : 1.0;
        rows.row(i).head(n) = sign * a.row(i);
        rows(i, n + i) = 1.0;
        rows(i, n + m) = sign * b(i);
        basis[i] = static_cast<std::size_t>(n + i);
    }
    detail::Tableau tab(std::move(rows), std::move(basis));

    // phase 1: minimise the sum of artificials
    Eigen::VectorXd phase1 = Eigen::VectorXd::Zero(n + m);
    phase1.tail(m).setOnes();
    tab.set_costs(phase1);
    tab.run(n + m, eps);
    Solution sol;
    const double scale = 1.0 + b.cwiseAbs().maxCoeff();
    if (tab.objective() > 1e-9 * scale) {
        sol.status = Status::Infeasible;
        return sol;
    }
    // drive zero-level artificials out of the basis
    for (Eigen::Index i = tab.num_rows() - 1; i >= 0; --i) {
        if (tab.basis()[i] < static_cast<std::size_t>(n)) {
            continue;
        }
        Eigen::Index col = -1;
        for (Eigen::Index j = 0; j < n; ++j) {
            if (std::abs(tab.rows()(i, j)) > 1e-9) {
                col = j;
                break;
            }
        }
        if (col >= 0) {
            tab.pivot(i, col);
        } else {
            tab.drop_row(i);
        }
    }

    Eigen::VectorXd phase2 = Eigen::VectorXd::Zero(n + m);
    phase2.head(n) = -c;
    tab.set_costs(phase2);
    if (!tab.run(n, eps)) {
        sol.status = Status::Unbounded;
        return sol;
    }
    sol.status = Status::Optimal;
    sol.x = Eigen::VectorXd::Zero(n);
    for (Eigen::Index i = 0; i < tab.num_rows(); ++i) {
        const std::size_t col = tab.basis()[i];
        if (col < static_cast<std::size_t>(n)) {
            sol.x(col) = tab.rows()(i, tab.rhs_col());
        }
        sol.basis.push_back(col);
    }
    sol.objective = c.dot(sol.x);
    return sol;
}

/// Feasibility of A x = b, x >= 0.
inline bool feasible(const Eigen::MatrixXd& a, const Eigen::VectorXd& b)
{
    return maximize(a, b, Eigen::VectorXd::Zero(a.cols())).status != Status::Infeasible;
}

} // namespace mbrw::lp

#endif
