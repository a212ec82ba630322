#ifndef MBRW_OPTIMIZE_HPP
#define MBRW_OPTIMIZE_HPP

#include <algorithm>
#include <cmath>
#include <vector>

#include <Eigen/Dense>

namespace mbrw::opt {

struct Options {
    int max_iter = 400;
    double grad_tol = 1e-9;
    double value_tol = 1e-14;  ///< stop after a step improving f by less than this (relative)
    double fd_step = 1e-6;
    double lower = -45.0;
    double upper = 45.0;
};

struct Result {
    Eigen::VectorXd x;
    double value = 0.0;
    int iterations = 0;
    std::vector<double> trace;  ///< objective after each accepted step
};

/// Central differences, one-sided at the box faces.
template <class F>
Eigen::VectorXd numerical_gradient(F& f, const Eigen::VectorXd& x, const Options& o)
{
    Eigen::VectorXd g(x.size());
    Eigen::VectorXd probe = x;
    for (Eigen::Index k = 0; k < x.size(); ++k) {
        const double h = o.fd_step * std::max(1.0, std::abs(x(k)));
        const double up = std::min(x(k) + h, o.upper);
        const double dn = std::max(x(k) - h, o.lower);
        probe(k) = up;
        const double fu = f(probe);
        probe(k) = dn;
        const double fd = f(probe);
        probe(k) = x(k);
        g(k) = (fu - fd) / (up - dn);
    }
    return g;
}

/// Box-constrained quasi-Newton minimisation (BFGS inverse Hessian,
/// projected Armijo backtracking, numerical gradients). Coordinates pinned
/// at a bound with the gradient pushing outward are frozen for the step.
template <class F>
Result minimize(F&& f, Eigen::VectorXd x, const Options& o = {})
{
    const Eigen::Index n = x.size();
    x = x.cwiseMax(o.lower).cwiseMin(o.upper);
    Result res;
    double fx = f(x);
    res.trace.push_back(fx);
    if (n == 0) {
        res.x = x;
        res.value = fx;
        return res;
    }
    Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n);
    Eigen::VectorXd g = numerical_gradient(f, x, o);

    auto free_mask = [&](const Eigen::VectorXd& xs, const Eigen::VectorXd& gs) {
        Eigen::VectorXd mask = Eigen::VectorXd::Ones(n);
        for (Eigen::Index k = 0; k < n; ++k) {
            if ((xs(k) <= o.lower && gs(k) > 0.0) || (xs(k) >= o.upper && gs(k) < 0.0)) {
                mask(k) = 0.0;
            }
        }
        return mask;
    };

    for (int it = 0; it < o.max_iter; ++it) {
        res.iterations = it + 1;
        const Eigen::VectorXd mask = free_mask(x, g);
        const Eigen::VectorXd gm = g.cwiseProduct(mask);
        if (gm.cwiseAbs().maxCoeff() < o.grad_tol) {
            break;
        }
        Eigen::VectorXd d = -(h * gm).cwiseProduct(mask);
        if (gm.dot(d) >= 0.0) {
            h.setIdentity();
            d = -gm;
        }
        double t = 1.0;
        // keep the first trial step within a sane length
        const double len = d.cwiseAbs().maxCoeff();
        if (len > 10.0) {
            t = 10.0 / len;
        }
        bool accepted = false;
        Eigen::VectorXd xn;
        double fn = fx;
        for (int ls = 0; ls < 60; ++ls) {
            xn = (x + t * d).cwiseMax(o.lower).cwiseMin(o.upper);
            fn = f(xn);
            if (fn <= fx + 1e-4 * g.dot(xn - x)) {
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        if (!accepted) {
            if (!h.isIdentity()) {
                h.setIdentity();
                continue;
            }
            break;
        }
        const Eigen::VectorXd gn = numerical_gradient(f, xn, o);
        const Eigen::VectorXd s = xn - x;
        const Eigen::VectorXd y = gn - g;
        const double sy = s.dot(y);
        if (sy > 1e-14) {
            const double rho = 1.0 / sy;
            const Eigen::MatrixXd eye = Eigen::MatrixXd::Identity(n, n);
            h = (eye - rho * s * y.transpose()) * h * (eye - rho * y * s.transpose()) + rho * s * s.transpose();
        }
        const double improvement = fx - fn;
        x = xn;
        g = gn;
        fx = fn;
        res.trace.push_back(fx);
        if (improvement <= o.value_tol * std::max(1.0, std::abs(fx)) && improvement >= 0.0 && it > 5) {
            // flat step: one more chance with a fresh Hessian, then stop
            if (h.isIdentity()) {
                break;
            }
            h.setIdentity();
        }
    }
    res.x = x;
    res.value = fx;
    return res;
}

} // namespace mbrw::opt

#endif
