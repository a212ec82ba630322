#ifndef MBRW_CONFIG_HPP
#define MBRW_CONFIG_HPP

#include <cstdint>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "mbrw/annealed.hpp"
#include "mbrw/chain.hpp"
#include "mbrw/error.hpp"
#include "mbrw/expectation.hpp"
#include "mbrw/io.hpp"
#include "mbrw/typegraph.hpp"

namespace mbrw {

struct RunSettings {
    std::size_t start_type = 0;
    std::size_t start_site = 0;
    std::size_t n = 10;
    std::vector<std::size_t> n_grid{4, 8, 12, 16, 20, 24, 28, 32, 36, 40};
    std::uint64_t seed = 1;
    std::string method = "exact";
    std::size_t num_envs = 1000;
    std::size_t runs = 10000;
    std::uint64_t cap = kDefaultPopulationCap;
    std::size_t dp_budget = kDefaultDpBudget;
    std::size_t restarts = 20;

    bool operator==(const RunSettings&) const = default;
};

/// Plain-text experiment description:
///
///   [edges]      one "i j rho" triple per line
///   [spatial]    row-major transition matrix, one row per line (default [[1]])
///   [matrix]     optional nonnegative matrix for the frobenius command
///   [run]        key = value pairs (see RunSettings)
///
/// '#' starts a comment anywhere on a line.
struct ExperimentConfig {
    std::vector<Edge> edges;
    Eigen::MatrixXd spatial = Eigen::MatrixXd::Ones(1, 1);
    std::optional<Eigen::MatrixXd> matrix;
    RunSettings run;

    TypeGraph graph() const { return build_graph(edges); }
    SpatialChain chain() const { return SpatialChain::from_matrix(spatial); }
    ProductState start() const { return {run.start_type, run.start_site}; }

    /// Runs every module-level validation; throws mbrw::Error.
    void validate() const
    {
        const TypeGraph g = graph();
        const SpatialChain c = chain();
        if (run.start_type >= g.num_types() || run.start_site >= c.num_sites()) {
            fail(ErrorKind::IndexOutOfRange, "start state (" + std::to_string(run.start_type) + ","
                                                 + std::to_string(run.start_site) + ") out of range");
        }
        if (run.method != "exact" && run.method != "mc") {
            fail(ErrorKind::ParseError, "method must be exact or mc");
        }
        for (std::size_t k = 0; k < run.n_grid.size(); ++k) {
            if (run.n_grid[k] == 0 || (k > 0 && run.n_grid[k] <= run.n_grid[k - 1])) {
                fail(ErrorKind::PreconditionViolated, "n_grid must be positive and strictly increasing");
            }
        }
    }

    bool operator==(const ExperimentConfig& o) const
    {
        auto same = [](const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
            return a.rows() == b.rows() && a.cols() == b.cols() && a == b;
        };
        if (edges.size() != o.edges.size() || !same(spatial, o.spatial) || matrix.has_value() != o.matrix.has_value()
            || (matrix && !same(*matrix, *o.matrix)) || !(run == o.run)) {
            return false;
        }
        for (std::size_t k = 0; k < edges.size(); ++k) {
            if (edges[k].from != o.edges[k].from || edges[k].to != o.edges[k].to || edges[k].rho != o.edges[k].rho) {
                return false;
            }
        }
        return true;
    }
};

namespace detail {

inline std::vector<std::string> words(const std::string& line)
{
    std::istringstream in(line);
    std::vector<std::string> out;
    for (std::string w; in >> w;) {
        out.push_back(w);
    }
    return out;
}

inline Eigen::MatrixXd rows_to_matrix(const std::vector<std::vector<double>>& rows, const std::string& section)
{
    if (rows.empty()) {
        fail(ErrorKind::ParseError, "[" + section + "] is empty");
    }
    Eigen::MatrixXd m(rows.size(), rows.front().size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows.front().size()) {
            fail(ErrorKind::ParseError, "[" + section + "] row " + std::to_string(r) + " has "
                                            + std::to_string(rows[r].size()) + " entries, expected "
                                            + std::to_string(rows.front().size()));
        }
        for (std::size_t c = 0; c < rows[r].size(); ++c) {
            m(r, c) = rows[r][c];
        }
    }
    return m;
}

inline std::vector<std::size_t> parse_grid(const std::string& s)
{
    std::vector<std::size_t> out;
    for (const auto& part : io::split(s, ',')) {
        if (!part.empty()) {
            out.push_back(io::parse_unsigned(part));
        }
    }
    return out;
}

} // namespace detail

inline std::vector<std::size_t> parse_n_grid(const std::string& s) { return detail::parse_grid(s); }

inline ExperimentConfig parse_config(std::istream& in)
{
    ExperimentConfig cfg;
    std::string section;
    std::vector<std::vector<double>> spatial_rows, matrix_rows;
    bool saw_edges = false;
    std::size_t lineno = 0;
    for (std::string raw; std::getline(in, raw);) {
        ++lineno;
        const std::string line = io::trim(raw.substr(0, raw.find('#')));
        if (line.empty()) {
            continue;
        }
        const std::string where = "line " + std::to_string(lineno) + ": ";
        if (line.front() == '[') {
            if (line.back() != ']') {
                fail(ErrorKind::ParseError, where + "malformed section header");
            }
            section = io::trim(line.substr(1, line.size() - 2));
            if (section != "edges" && section != "spatial" && section != "matrix" && section != "run") {
                fail(ErrorKind::ParseError, where + "unknown section [" + section + "]");
            }
            saw_edges = saw_edges || section == "edges";
            continue;
        }
        try {
            if (section == "edges") {
                const auto w = detail::words(line);
                if (w.size() != 3) {
                    fail(ErrorKind::ParseError, "expected 'i j rho'");
                }
                cfg.edges.push_back({static_cast<std::size_t>(io::parse_unsigned(w[0])),
                                     static_cast<std::size_t>(io::parse_unsigned(w[1])), io::parse_real(w[2])});
            } else if (section == "spatial" || section == "matrix") {
                std::vector<double> row;
                for (const auto& w : detail::words(line)) {
                    row.push_back(io::parse_real(w));
                }
                (section == "spatial" ? spatial_rows : matrix_rows).push_back(std::move(row));
            } else if (section == "run") {
                const auto eq = line.find('=');
                if (eq == std::string::npos) {
                    fail(ErrorKind::ParseError, "expected 'key = value'");
                }
                const std::string key = io::trim(line.substr(0, eq));
                const std::string val = io::trim(line.substr(eq + 1));
                RunSettings& r = cfg.run;
                if (key == "start_type") {
                    r.start_type = io::parse_unsigned(val);
                } else if (key == "start_site") {
                    r.start_site = io::parse_unsigned(val);
                } else if (key == "n") {
                    r.n = io::parse_unsigned(val);
                } else if (key == "n_grid") {
                    r.n_grid = detail::parse_grid(val);
                } else if (key == "seed") {
                    r.seed = io::parse_unsigned(val);
                } else if (key == "method") {
                    r.method = val;
                } else if (key == "num_envs") {
                    r.num_envs = io::parse_unsigned(val);
                } else if (key == "runs") {
                    r.runs = io::parse_unsigned(val);
                } else if (key == "cap") {
                    r.cap = io::parse_unsigned(val);
                } else if (key == "dp_budget") {
                    r.dp_budget = io::parse_unsigned(val);
                } else if (key == "restarts") {
                    r.restarts = io::parse_unsigned(val);
                } else {
                    fail(ErrorKind::ParseError, "unknown [run] key '" + key + "'");
                }
            } else {
                fail(ErrorKind::ParseError, "content outside any section");
            }
        } catch (const Error& e) {
            fail(ErrorKind::ParseError, where + e.what());
        }
    }
    if (!saw_edges || cfg.edges.empty()) {
        fail(ErrorKind::ParseError, "config has no [edges]");
    }
    if (!spatial_rows.empty()) {
        cfg.spatial = detail::rows_to_matrix(spatial_rows, "spatial");
    }
    if (!matrix_rows.empty()) {
        cfg.matrix = detail::rows_to_matrix(matrix_rows, "matrix");
    }
    return cfg;
}

inline ExperimentConfig parse_config_string(const std::string& text)
{
    std::istringstream in(text);
    return parse_config(in);
}

inline std::string serialize_config(const ExperimentConfig& cfg)
{
    std::ostringstream out;
    auto matrix = [&](const Eigen::MatrixXd& m) {
        for (Eigen::Index r = 0; r < m.rows(); ++r) {
            for (Eigen::Index c = 0; c < m.cols(); ++c) {
                out << (c ? " " : "") << io::format_real(m(r, c));
            }
            out << '\n';
        }
    };
    out << "[edges]\n";
    for (const Edge& e : cfg.edges) {
        out << e.from << ' ' << e.to << ' ' << io::format_real(e.rho) << '\n';
    }
    out << "\n[spatial]\n";
    matrix(cfg.spatial);
    if (cfg.matrix) {
        out << "\n[matrix]\n";
        matrix(*cfg.matrix);
    }
    const RunSettings& r = cfg.run;
    out << "\n[run]\n";
    out << "start_type = " << r.start_type << '\n';
    out << "start_site = " << r.start_site << '\n';
    out << "n = " << r.n << '\n';
    out << "n_grid = ";
    for (std::size_t k = 0; k < r.n_grid.size(); ++k) {
        out << (k ? "," : "") << r.n_grid[k];
    }
    out << '\n';
    out << "seed = " << r.seed << '\n';
    out << "method = " << r.method << '\n';
    out << "num_envs = " << r.num_envs << '\n';
    out << "runs = " << r.runs << '\n';
    out << "cap = " << r.cap << '\n';
    out << "dp_budget = " << r.dp_budget << '\n';
    out << "restarts = " << r.restarts << '\n';
    return out.str();
}

} // namespace mbrw

#endif
