#ifndef MBRW_CLI_HPP
#define MBRW_CLI_HPP

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mbrw/annealed.hpp"
#include "mbrw/config.hpp"
#include "mbrw/environment.hpp"
#include "mbrw/error.hpp"
#include "mbrw/expectation.hpp"
#include "mbrw/io.hpp"
#include "mbrw/rng.hpp"
#include "mbrw/variational.hpp"

namespace mbrw::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInvalid = 2;
inline constexpr int kExitBudget = 3;

/// Directory override for every relative output path.
inline constexpr const char* kOutputDirEnv = "MBRW_OUTPUT_DIR";

struct Options {
    std::string command;
    std::string config_path;
    std::string output;
    std::string trace;
    std::string minimizer;
    std::string env_in;
    std::string env_out;
    std::string input;
    std::string method;
    std::string n_grid;
    std::size_t num_envs = 0;
    std::size_t threads = 1;
    std::size_t n = 0;
    double lambda = 0.0;
    bool lambda_given = false;
    bool no_timestamp = false;
    bool cells = false;
};

namespace detail {

inline std::filesystem::path resolve(const std::string& path)
{
    std::filesystem::path p(path);
    if (const char* dir = std::getenv(kOutputDirEnv); dir != nullptr && *dir != '\0' && p.is_relative()) {
        return std::filesystem::path(dir) / p;
    }
    return p;
}

inline void write_file(const std::string& path, const std::string& text)
{
    const auto p = resolve(path);
    if (p.has_parent_path()) {
        std::filesystem::create_directories(p.parent_path());
    }
    std::ofstream f(p, std::ios::binary);
    if (!f) {
        fail(ErrorKind::ParseError, "cannot open " + p.string() + " for writing");
    }
    f << text;
}

inline std::string read_file(const std::string& path)
{
    std::ifstream f(path, std::ios::binary);
    if (!f) {
        fail(ErrorKind::ParseError, "cannot read " + path);
    }
    std::ostringstream s;
    s << f.rdbuf();
    return s.str();
}

inline std::string timestamp()
{
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream s;
    s << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return s.str();
}

class Report {
public:
    explicit Report(const Options& o) : opts_(o) {}

    void header(const std::string& command, std::optional<std::uint64_t> seed)
    {
        body_ << "# mbrw " << command << '\n';
        if (seed) {
            body_ << "# seed=" << *seed << '\n';
        }
        if (!opts_.no_timestamp) {
            body_ << "# generated_at=" << timestamp() << '\n';
        }
    }

    std::ostringstream& body() { return body_; }

    void finish(std::ostream& out) const
    {
        if (opts_.output.empty()) {
            out << body_.str();
        } else {
            write_file(opts_.output, body_.str());
        }
    }

    /// Header block for a secondary artifact.
    std::string side_header(const std::string& what, std::optional<std::uint64_t> seed) const
    {
        std::ostringstream s;
        s << "# mbrw " << what << '\n';
        if (seed) {
            s << "# seed=" << *seed << '\n';
        }
        if (!opts_.no_timestamp) {
            s << "# generated_at=" << timestamp() << '\n';
        }
        return s.str();
    }

private:
    const Options& opts_;
    std::ostringstream body_;
};

inline nlohmann::json cycles_json(const std::vector<SimpleCycle>& cycles)
{
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& c : cycles) {
        arr.push_back(c.vertices);
    }
    return arr;
}

// nlohmann prints the shortest round-trip form; non-finite values become strings
inline nlohmann::json real(double v)
{
    if (!std::isfinite(v)) {
        return io::format_real(v);
    }
    return v;
}

inline Environment environment_for(const Options& o, const ExperimentConfig& cfg, const TypeGraph& g,
                                   const SpatialChain& chain, const Report& rep)
{
    Environment env = o.env_in.empty()
                          ? sample_environment(g, chain.num_sites(), stream_seed(cfg.run.seed, 0))
                          : [&] {
                                std::istringstream in(read_file(o.env_in));
                                return read_environment_csv(g, chain.num_sites(), in);
                            }();
    if (!o.env_out.empty()) {
        std::ostringstream s;
        s << rep.side_header("environment", cfg.run.seed);
        write_environment_csv(env, s);
        write_file(o.env_out, s.str());
    }
    return env;
}

inline std::vector<std::size_t> grid_for(const Options& o, const ExperimentConfig& cfg)
{
    auto grid = o.n_grid.empty() ? cfg.run.n_grid : parse_n_grid(o.n_grid);
    for (std::size_t k = 0; k < grid.size(); ++k) {
        if (grid[k] == 0 || (k > 0 && grid[k] <= grid[k - 1])) {
            fail(ErrorKind::PreconditionViolated, "n-grid must be positive and strictly increasing");
        }
    }
    if (grid.empty()) {
        fail(ErrorKind::PreconditionViolated, "empty n-grid");
    }
    return grid;
}

// ---------------------------------------------------------------------------

inline int cmd_validate(const Options& o, const ExperimentConfig& cfg, std::ostream& out)
{
    const TypeGraph g = cfg.graph();
    const SpatialChain chain = cfg.chain();
    const MaxMeanCycle mm = lambda_max_mean_cycle(g);
    Report rep(o);
    rep.header("validate", std::nullopt);
    auto& s = rep.body();
    s << "status=ok\n";
    s << "types=" << g.num_types() << '\n';
    s << "edges=" << g.num_edges() << '\n';
    s << "sites=" << chain.num_sites() << '\n';
    s << "strongly_connected=" << (g.strongly_connected() ? "true" : "false") << '\n';
    s << "girth=" << girth(g) << '\n';
    s << "lambda=" << io::format_real(mm.lambda) << '\n';
    rep.finish(out);
    return kExitOk;
}

inline int cmd_lambda(const Options& o, const ExperimentConfig& cfg, std::ostream& out)
{
    const TypeGraph g = cfg.graph();
    cfg.chain();
    const MaxMeanCycle mm = lambda_max_mean_cycle(g);
    nlohmann::json j;
    j["lambda"] = real(mm.lambda);
    j["karp"] = real(mm.karp_value);
    j["lp"] = real(lambda_lp_oracle(g));
    j["cycles"] = cycles_json(mm.optimal_cycles);
    j["num_optimal_cycles"] = mm.optimal_cycles.size();
    j["exhaustive"] = mm.exhaustive;
    if (mm.exhaustive) {
        j["total_cycles"] = mm.total_cycles;
    } else {
        j["total_cycles"] = nullptr;
    }
    j["girth"] = girth(g);
    Report rep(o);
    rep.header("lambda", std::nullopt);
    rep.body() << j.dump() << '\n';
    rep.finish(out);
    return kExitOk;
}

inline int cmd_chi(const Options& o, const ExperimentConfig& cfg, std::ostream& out)
{
    const TypeGraph g = cfg.graph();
    const SpatialChain chain = cfg.chain();
    ChiOptions copt;
    copt.restarts = cfg.run.restarts;
    copt.seed = cfg.run.seed;
    const ChiResult res = chi_solve(g, chain, copt);
    Report rep(o);
    rep.header("chi", cfg.run.seed);

    nlohmann::json j;
    j["lambda"] = real(res.lambda);
    j["cycles"] = cycles_json(res.optimal_cycles);
    j["chi"] = real(res.chi);
    j["seed"] = cfg.run.seed;
    nlohmann::json restarts = nlohmann::json::array();
    for (std::size_t r = 0; r < res.restarts.size(); ++r) {
        const auto& rec = res.restarts[r];
        restarts.push_back({{"index", r},
                            {"start", rec.start},
                            {"component", rec.component},
                            {"objective", real(rec.objective)},
                            {"steps", rec.trace.size()}});
    }
    j["restarts"] = restarts;
    j["best_restart"] = res.best_restart;
    j["near_optimal"] = res.near_optimal;
    j["objective_trace_path"] = o.trace.empty() ? nlohmann::json(nullptr) : nlohmann::json(o.trace);
    j["minimizer_path"] = o.minimizer.empty() ? nlohmann::json(nullptr) : nlohmann::json(o.minimizer);
    rep.body() << j.dump() << '\n';

    if (!o.trace.empty()) {
        std::ostringstream s;
        s << rep.side_header("chi objective trace", cfg.run.seed);
        s << "restart,step,objective\n";
        for (std::size_t r = 0; r < res.restarts.size(); ++r) {
            const auto& tr = res.restarts[r].trace;
            for (std::size_t k = 0; k < tr.size(); ++k) {
                s << r << ',' << k << ',' << io::format_real(tr[k]) << '\n';
            }
        }
        write_file(o.trace, s.str());
    }
    if (!o.minimizer.empty()) {
        std::ostringstream s;
        s << rep.side_header("chi minimizer", cfg.run.seed);
        s << "i,x,j,y,nu\n";
        const PairMeasure& nu = *res.minimizer;
        for (std::size_t i = 0; i < nu.num_types(); ++i) {
            for (std::size_t x = 0; x < nu.num_sites(); ++x) {
                for (std::size_t jj = 0; jj < nu.num_types(); ++jj) {
                    for (std::size_t y = 0; y < nu.num_sites(); ++y) {
                        const double w = nu(i, x, jj, y);
                        if (w > 0.0) {
                            s << i << ',' << x << ',' << jj << ',' << y << ',' << io::format_real(w) << '\n';
                        }
                    }
                }
            }
        }
        write_file(o.minimizer, s.str());
    }
    rep.finish(out);
    return kExitOk;
}

inline int cmd_expect(const Options& o, const ExperimentConfig& cfg, std::ostream& out)
{
    const TypeGraph g = cfg.graph();
    const SpatialChain chain = cfg.chain();
    Report rep(o);
    rep.header("expect", o.env_in.empty() ? std::optional<std::uint64_t>(cfg.run.seed) : std::nullopt);
    const Environment env = environment_for(o, cfg, g, chain, rep);
    const std::size_t n = o.n > 0 ? o.n : cfg.run.n;
    const auto table = log_expected_population_table(mean_matrix(env, chain, g), n);
    auto& s = rep.body();
    s << "n,i,x,u_n\n";
    const std::size_t nx = chain.num_sites();
    for (std::size_t k = 0; k <= n; ++k) {
        for (std::size_t state = 0; state < g.num_types() * nx; ++state) {
            s << k << ',' << state / nx << ',' << state % nx << ',' << io::format_real(std::exp(table[k](state)))
              << '\n';
        }
    }
    rep.finish(out);
    return kExitOk;
}

inline int cmd_simulate(const Options& o, const ExperimentConfig& cfg, std::ostream& out)
{
    const TypeGraph g = cfg.graph();
    const SpatialChain chain = cfg.chain();
    Report rep(o);
    rep.header("simulate", cfg.run.seed);
    const Environment env = environment_for(o, cfg, g, chain, rep);
    const std::size_t n = o.n > 0 ? o.n : cfg.run.n;
    const std::size_t nx = chain.num_sites();
    auto& s = rep.body();
    s << "run,n,total";
    if (o.cells) {
        for (std::size_t state = 0; state < g.num_types() * nx; ++state) {
            s << ",c_" << state / nx << '_' << state % nx;
        }
    }
    s << '\n';
    std::size_t capped = 0;
    const PopulationState init = single_particle(g, chain, cfg.start());
    for (std::size_t run = 0; run < cfg.run.runs; ++run) {
        const auto res = simulate_branching(env, chain, g, init, n, stream_seed(cfg.run.seed, run + 1), cfg.run.cap);
        capped += res.cap_exceeded ? 1 : 0;
        for (const auto& st : res.trajectory) {
            s << run << ',' << st.generation << ',' << st.total();
            if (o.cells) {
                for (auto c : st.counts) {
                    s << ',' << c;
                }
            }
            s << '\n';
        }
    }
    s << "# cap_exceeded_runs=" << capped << '\n';
    rep.finish(out);
    return kExitOk;
}

inline int cmd_anneal(const Options& o, const ExperimentConfig& cfg, std::ostream& out, std::ostream& err)
{
    const TypeGraph g = cfg.graph();
    const SpatialChain chain = cfg.chain();
    const std::string method = o.method.empty() ? cfg.run.method : o.method;
    const auto grid = grid_for(o, cfg);
    Report rep(o);
    if (method == "exact") {
        rep.header("anneal exact", std::nullopt);
        const auto res = annealed_moment_exact_grid(g, chain, cfg.start(), grid, cfg.run.dp_budget);
        if (res.ns.empty()) {
            fail(ErrorKind::DPBudgetExceeded,
                 "DP layer reached " + std::to_string(res.attempted_entries) + " entries before n="
                     + std::to_string(grid.front()));
        }
        auto& s = rep.body();
        if (res.budget_exceeded) {
            s << "# truncated: DP budget " << cfg.run.dp_budget << " exceeded after n=" << res.ns.back() << '\n';
            err << "warning: DP budget exceeded; grid truncated after n=" << res.ns.back() << '\n';
        }
        s << "n,log_moment,stderr\n";
        for (std::size_t k = 0; k < res.ns.size(); ++k) {
            s << res.ns[k] << ',' << io::format_real(res.log_moments[k]) << ",0\n";
        }
    } else if (method == "mc") {
        rep.header("anneal mc", cfg.run.seed);
        const std::size_t envs = o.num_envs > 0 ? o.num_envs : cfg.run.num_envs;
        auto& s = rep.body();
        s << "n,log_moment,stderr\n";
        for (std::size_t n : grid) {
            const auto est = annealed_moment_mc(g, chain, cfg.start(), n, envs, cfg.run.seed, o.threads);
            s << n << ',' << io::format_real(est.log_moment) << ',' << io::format_real(est.stderr_log) << '\n';
            if (est.heavy_tail) {
                s << "# heavy_tail n=" << n << " top_share=" << io::format_real(est.top_share) << '\n';
            }
        }
    } else {
        fail(ErrorKind::ParseError, "method must be exact or mc");
    }
    rep.finish(out);
    return kExitOk;
}

inline int cmd_fit(const Options& o, const ExperimentConfig& cfg, std::ostream& out)
{
    if (o.input.empty()) {
        fail(ErrorKind::ParseError, "fit needs --input <anneal CSV>");
    }
    const double lambda = o.lambda_given ? o.lambda : lambda_max_mean_cycle(cfg.graph()).lambda;
    std::istringstream in(read_file(o.input));
    std::vector<std::size_t> ns;
    std::vector<double> logs;
    bool header = false;
    for (std::string line; std::getline(in, line);) {
        const std::string t = io::trim(line);
        if (t.empty() || t.front() == '#') {
            continue;
        }
        if (!header) {
            if (t.rfind("n,log_moment", 0) != 0) {
                fail(ErrorKind::ParseError, "fit input header must start with 'n,log_moment'");
            }
            header = true;
            continue;
        }
        const auto f = io::split(t, ',');
        if (f.size() < 2) {
            fail(ErrorKind::ParseError, "fit input row needs n and log_moment: " + t);
        }
        ns.push_back(io::parse_unsigned(f[0]));
        logs.push_back(io::parse_real(f[1]));
    }
    const AsymFit fit = asymptotic_fit(ns, logs, lambda);
    Report rep(o);
    rep.header("fit", std::nullopt);
    auto& s = rep.body();
    s << "# lambda=" << io::format_real(lambda) << '\n';
    s << "# r_last=" << io::format_real(fit.r_last) << '\n';
    s << "# slope=" << io::format_real(fit.slope) << '\n';
    s << "n,r_n\n";
    for (std::size_t k = 0; k < fit.ns.size(); ++k) {
        s << fit.ns[k] << ',' << io::format_real(fit.r[k]) << '\n';
    }
    rep.finish(out);
    return kExitOk;
}

inline int cmd_frobenius(const Options& o, const ExperimentConfig& cfg, std::ostream& out)
{
    if (!cfg.matrix) {
        fail(ErrorKind::ParseError, "frobenius needs a [matrix] section");
    }
    const FrobeniusResult pw = frobenius_power(*cfg.matrix);
    const FrobeniusDual dual = frobenius_variational(*cfg.matrix, 4, cfg.run.seed);
    nlohmann::json j;
    j["mu"] = real(pw.mu);
    j["mu_alt_start"] = real(pw.mu_alt);
    j["mu_variational"] = real(dual.mu);
    j["iterations"] = pw.iterations;
    Report rep(o);
    rep.header("frobenius", cfg.run.seed);
    rep.body() << j.dump() << '\n';
    rep.finish(out);
    return kExitOk;
}

} // namespace detail

/// Entry point shared by the executable and the tests. `args` excludes the
/// program name. Returns 0 on success, 2 on usage or validation errors and
/// 3 when a computation budget is exceeded.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
    CLI::App app{"Moment asymptotics of multitype branching random walks in random environment", "mbrw"};
    app.require_subcommand(1);
    Options o;

    auto add = [&](const std::string& name, const std::string& desc) {
        CLI::App* sub = app.add_subcommand(name, desc);
        sub->add_option("config", o.config_path, "experiment config file")->required();
        sub->add_option("--output,-o", o.output, "write the main output here instead of stdout");
        sub->add_flag("--no-timestamp", o.no_timestamp, "omit the generated_at header line");
        sub->add_option("--threads", o.threads, "worker threads (default 1)")->check(CLI::PositiveNumber);
        return sub;
    };
    add("validate", "check a config and print basic graph facts");
    add("lambda", "leading exponent and optimal cycles (JSON line)");
    auto* chi = add("chi", "second-order constant (JSON line)");
    chi->add_option("--trace", o.trace, "CSV of objective values per restart step");
    chi->add_option("--minimizer", o.minimizer, "CSV of the minimizing pair measure");
    for (const char* name : {"expect", "simulate"}) {
        auto* sub = add(name, std::string(name) == "expect" ? "expected populations u_n (CSV)"
                                                            : "branching simulation totals (CSV)");
        sub->add_option("--env", o.env_in, "read the environment from this CSV");
        sub->add_option("--save-env", o.env_out, "write the environment used to this CSV");
        sub->add_option("--n", o.n, "number of generations (overrides [run] n)");
        if (std::string(name) == "simulate") {
            sub->add_flag("--cells", o.cells, "add per-cell counts");
        }
    }
    auto* anneal = add("anneal", "annealed moments on an n-grid (CSV)");
    anneal->add_option("--method", o.method, "exact or mc")->check(CLI::IsMember({"exact", "mc"}));
    anneal->add_option("--n-grid", o.n_grid, "comma-separated n values");
    anneal->add_option("--num-envs", o.num_envs, "environments for --method mc");
    auto* fit = add("fit", "r_n from an anneal CSV (CSV)");
    fit->add_option("--input", o.input, "anneal CSV")->required();
    fit->add_option("--lambda", o.lambda, "override the leading exponent");
    add("frobenius", "Frobenius exponent of the [matrix] section (JSON line)");

    if (!args.empty() && !args.front().empty() && args.front().front() != '-') {
        const auto subs = app.get_subcommands([](CLI::App*) { return true; });
        const bool known = std::any_of(subs.begin(), subs.end(),
                                       [&](const CLI::App* s) { return s->get_name() == args.front(); });
        if (!known) {
            err << "error: unknown command '" << args.front() << "'\n" << app.help();
            return kExitInvalid;
        }
    }
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n' << app.help();
        return kExitInvalid;
    }
    o.command = app.get_subcommands().front()->get_name();
    o.lambda_given = fit->count("--lambda") > 0;

    try {
        const ExperimentConfig cfg = [&] {
            std::istringstream in(detail::read_file(o.config_path));
            return parse_config(in);
        }();
        cfg.validate();
        if (o.command == "validate") {
            return detail::cmd_validate(o, cfg, out);
        }
        if (o.command == "lambda") {
            return detail::cmd_lambda(o, cfg, out);
        }
        if (o.command == "chi") {
            return detail::cmd_chi(o, cfg, out);
        }
        if (o.command == "expect") {
            return detail::cmd_expect(o, cfg, out);
        }
        if (o.command == "simulate") {
            return detail::cmd_simulate(o, cfg, out);
        }
        if (o.command == "anneal") {
            return detail::cmd_anneal(o, cfg, out, err);
        }
        if (o.command == "fit") {
            return detail::cmd_fit(o, cfg, out);
        }
        return detail::cmd_frobenius(o, cfg, out);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return e.is_budget() ? kExitBudget : kExitInvalid;
    } catch (const std::filesystem::filesystem_error& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    }
}

} // namespace mbrw::cli

#endif
