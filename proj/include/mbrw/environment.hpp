#ifndef MBRW_ENVIRONMENT_HPP
#define MBRW_ENVIRONMENT_HPP

#include <cmath>
#include <cstdint>
#include <istream>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mbrw/error.hpp"
#include "mbrw/io.hpp"
#include "mbrw/rng.hpp"
#include "mbrw/special.hpp"
#include "mbrw/typegraph.hpp"

namespace mbrw {

/// Mean-offspring field m_ij(y) on A x X (zero off A), plus the rho it was drawn with.
class Environment {
public:
    /// `means` is indexed ((i * |T|) + j) * |X| + y. Entries on A must be
    /// positive and finite; entries off A are forced to zero.
    static Environment from_means(const TypeGraph& g, std::size_t num_sites, std::vector<double> means)
    {
        const std::size_t nt = g.num_types();
        if (num_sites == 0 || means.size() != nt * nt * num_sites) {
            fail(ErrorKind::DimensionMismatch, "environment size does not match graph and sites");
        }
        for (std::size_t i = 0; i < nt; ++i) {
            for (std::size_t j = 0; j < nt; ++j) {
                for (std::size_t y = 0; y < num_sites; ++y) {
                    double& m = means[(i * nt + j) * num_sites + y];
                    if (!g.has_edge(i, j)) {
                        m = 0.0;
                    } else if (!(m > 0.0) || !std::isfinite(m)) {
                        fail(ErrorKind::DomainError, "m(" + std::to_string(i) + "," + std::to_string(j)
                                                         + "," + std::to_string(y) + ") must be positive");
                    }
                }
            }
        }
        Environment env;
        env.t_ = nt;
        env.x_ = num_sites;
        env.means_ = std::move(means);
        env.rho_ = g.rho_matrix();
        return env;
    }

    /// Constant mean on every edge and site.
    static Environment constant(const TypeGraph& g, std::size_t num_sites, double mean)
    {
        return from_means(g, num_sites, std::vector<double>(g.num_types() * g.num_types() * num_sites, mean));
    }

    std::size_t num_types() const noexcept { return t_; }
    std::size_t num_sites() const noexcept { return x_; }
    double mean(std::size_t i, std::size_t j, std::size_t y) const { return means_[(i * t_ + j) * x_ + y]; }
    const std::vector<double>& means() const noexcept { return means_; }
    const Eigen::MatrixXd& rho() const noexcept { return rho_; }

    /// M(y) = (m_ij(y))_{ij}.
    Eigen::MatrixXd site_matrix(std::size_t y) const
    {
        Eigen::MatrixXd m(t_, t_);
        for (std::size_t i = 0; i < t_; ++i) {
            for (std::size_t j = 0; j < t_; ++j) {
                m(i, j) = mean(i, j, y);
            }
        }
        return m;
    }

private:
    Environment() = default;
    std::size_t t_ = 0;
    std::size_t x_ = 0;
    std::vector<double> means_;
    Eigen::MatrixXd rho_;
};

/// Draws m_ij(y) = E^rho_ij with E ~ Exp(1), independently over (i,j,y),
/// so P(m > r) = exp(-r^(1/rho)) exactly. Draw order: edges in (i,j)
/// order, sites ascending.
inline Environment sample_environment(const TypeGraph& g, std::size_t num_sites, std::uint64_t seed)
{
    Rng rng = make_rng(seed);
    std::exponential_distribution<double> expo(1.0);
    const std::size_t nt = g.num_types();
    std::vector<double> means(nt * nt * num_sites, 0.0);
    for (const Edge& e : g.edges()) {
        for (std::size_t y = 0; y < num_sites; ++y) {
            double m = std::pow(expo(rng), e.rho);
            // E = 0 is possible in principle and would give m = 0
            while (!(m > 0.0) || !std::isfinite(m)) {
                m = std::pow(expo(rng), e.rho);
            }
            means[(e.from * nt + e.to) * num_sites + y] = m;
        }
    }
    return Environment::from_means(g, num_sites, std::move(means));
}

/// H(t) = log <m^t> = log Gamma(rho t + 1) for m = E^rho.
inline double log_mgf(double rho, double t)
{
    if (!(rho > 0.0)) {
        fail(ErrorKind::DomainError, "log_mgf requires rho > 0");
    }
    if (!(t > 0.0)) {
        fail(ErrorKind::DomainError, "log_mgf requires t > 0");
    }
    return log_gamma(rho * t + 1.0);
}

/// (H(ct) - c H(t)) / t - rho c log c; vanishes as t grows when the
/// environment has Weibull parameter rho.
inline double assumption_residual(double rho, double c, double t)
{
    if (!(c > 0.0 && c < 1.0)) {
        fail(ErrorKind::DomainError, "assumption_residual requires 0 < c < 1");
    }
    return (log_mgf(rho, c * t) - c * log_mgf(rho, t)) / t - rho * c * std::log(c);
}

/// Offspring count law for one (i,j,y): Poisson with the given mean.
struct OffspringLaw {
    double mean = 1.0;
};

inline OffspringLaw offspring_law(double mean)
{
    if (!(mean > 0.0) || !std::isfinite(mean)) {
        fail(ErrorKind::DomainError, "offspring mean must be positive");
    }
    return OffspringLaw{mean};
}

inline std::uint64_t sample_offspring(const OffspringLaw& law, Rng& rng)
{
    return std::poisson_distribution<std::uint64_t>(law.mean)(rng);
}

inline std::uint64_t sample_offspring(const OffspringLaw& law, std::uint64_t seed)
{
    Rng rng = make_rng(seed);
    return sample_offspring(law, rng);
}

/// CSV `i,j,y,m`, one row per (edge, site).
inline void write_environment_csv(const Environment& env, std::ostream& out)
{
    out << "i,j,y,m\n";
    for (std::size_t i = 0; i < env.num_types(); ++i) {
        for (std::size_t j = 0; j < env.num_types(); ++j) {
            for (std::size_t y = 0; y < env.num_sites(); ++y) {
                const double m = env.mean(i, j, y);
                if (m > 0.0) {
                    out << i << ',' << j << ',' << y << ',' << io::format_real(m) << '\n';
                }
            }
        }
    }
}

/// Reads the CSV written above; every (edge, site) must appear exactly once.
inline Environment read_environment_csv(const TypeGraph& g, std::size_t num_sites, std::istream& in)
{
    const std::size_t nt = g.num_types();
    std::vector<double> means(nt * nt * num_sites, 0.0);
    std::vector<bool> seen(means.size(), false);
    std::string line;
    bool header = false;
    std::size_t rows = 0;
    while (std::getline(in, line)) {
        const std::string t = io::trim(line);
        if (t.empty() || t.front() == '#') {
            continue;
        }
        if (!header) {
            if (t != "i,j,y,m") {
                fail(ErrorKind::ParseError, "environment CSV header must be 'i,j,y,m'");
            }
            header = true;
            continue;
        }
        const auto f = io::split(t, ',');
        if (f.size() != 4) {
            fail(ErrorKind::ParseError, "environment CSV row needs 4 fields: " + t);
        }
        const auto i = io::parse_unsigned(f[0]);
        const auto j = io::parse_unsigned(f[1]);
        const auto y = io::parse_unsigned(f[2]);
        if (i >= nt || j >= nt || y >= num_sites || !g.has_edge(i, j)) {
            fail(ErrorKind::ParseError, "environment row outside A x X: " + t);
        }
        const std::size_t k = (i * nt + j) * num_sites + y;
        if (seen[k]) {
            fail(ErrorKind::ParseError, "duplicate environment row: " + t);
        }
        seen[k] = true;
        means[k] = io::parse_real(f[3]);
        ++rows;
    }
    if (rows != g.num_edges() * num_sites) {
        fail(ErrorKind::ParseError, "environment CSV must list every edge at every site");
    }
    return Environment::from_means(g, num_sites, std::move(means));
}

} // namespace mbrw

#endif
