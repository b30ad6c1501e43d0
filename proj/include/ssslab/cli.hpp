#pragma once

#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "ssslab/construction.hpp"
#include "ssslab/montecarlo.hpp"
#include "ssslab/oracle.hpp"
#include "ssslab/report.hpp"
#include "ssslab/seqstep.hpp"
#include "ssslab/version.hpp"

namespace ssslab::cli {

inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 1;
inline constexpr int exit_violation = 2;

inline constexpr const char* threads_env = "SSSLAB_THREADS";

struct Options {
    std::string alpha;
    std::string c;
    std::string t;
    std::optional<std::int64_t> u;
    std::int64_t n = 0;
    std::string n_list;
    std::uint64_t trials = 100000;
    std::uint64_t seed = 0;
    unsigned threads = 0;
    std::string confidence = "99/100";
    std::string out;
    std::string format = "csv";
    int n_max = 12;
    bool canonicalize = false;
};

/// Raised for inconsistent or invalid flag values found after parsing.
class usage_error : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

namespace detail {

inline ProcedureParams resolve_params(const Options& opt)
{
    const Rational alpha = parse_rational(opt.alpha);
    const Rational c = parse_rational(opt.c);
    if (opt.u && !opt.t.empty())
        throw usage_error("give either --t or --u, not both");
    if (opt.u)
        return make_params_u(alpha, c, *opt.u);
    const Rational t = opt.t.empty() ? Rational(1) : parse_rational(opt.t);
    return make_params(alpha, c, t);
}

/// u with t = 1 - u/b, required by the construction checks.
inline std::int64_t resolve_u(const Options& opt, const ProcedureParams& params)
{
    if (opt.u)
        return *opt.u;
    const Rational scaled = (Rational(1) - params.t) * Rational(params.b);
    if (scaled.den() != 1)
        throw usage_error("t = " + params.t.to_string() + " is not of the form 1 - u/b with b = " +
                          std::to_string(params.b));
    return scaled.num();
}

inline std::vector<std::int64_t> parse_n_list(const std::string& text)
{
    std::vector<std::int64_t> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        long long value = 0;
        try {
            value = std::stoll(item, &used);
        } catch (const std::exception&) {
            throw usage_error("--n-list: '" + item + "' is not an integer");
        }
        if (used != item.size() || value < 1)
            throw usage_error("--n-list: '" + item + "' is not a positive integer");
        out.push_back(value);
    }
    if (out.empty())
        throw usage_error("--n-list is empty");
    return out;
}

/// Writes the whole payload at once; files go through a temporary that is
/// renamed into place, so failed runs leave no partial output.
inline void emit(const std::string& payload, const std::string& path, std::ostream& out)
{
    if (path.empty()) {
        out << payload;
        return;
    }
    const std::string tmp = path + ".partial";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f)
            throw std::runtime_error("cannot open " + tmp + " for writing");
        f << payload;
        if (!f.flush())
            throw std::runtime_error("write to " + tmp + " failed");
    }
    std::filesystem::rename(tmp, path);
}

inline void report_canonical(const ProcedureParams& params, std::ostream& err)
{
    const Rational canon = canonical_t(params.t, params.b);
    err << "canonical t: " << params.t << " -> " << canon << " (b = " << params.b
        << "); K_t = K_1: " << (canon == Rational(1) ? "yes" : "no") << '\n';
}

inline ExperimentConfig make_config(const Options& opt, const ProcedureParams& params, std::int64_t n)
{
    params.require_construction_mode();
    if (opt.trials == 0)
        throw usage_error("--trials must be at least 1");
    ExperimentConfig config;
    config.params = params;
    config.spec = build_spec(params.a, params.b, n);
    config.trials = opt.trials;
    config.master_seed = opt.seed;
    config.confidence_level = parse_rational(opt.confidence);
    if (!(config.confidence_level > 0 && config.confidence_level < 1))
        throw usage_error("--confidence must lie in (0, 1)");
    config.thread_hint = opt.threads;
    return config;
}

inline std::string render_estimates(const Options& opt, const ExperimentConfig& config,
                                    std::span<const std::int64_t> n_values, std::span<const FdrEstimate> rows)
{
    if (opt.format == "json") {
        nlohmann::json j;
        j["metadata"] = experiment_metadata(config, n_values);
        j["rows"] = nlohmann::json::array();
        for (const auto& r : rows)
            j["rows"].push_back(to_json(r));
        return j.dump(2) + "\n";
    }
    return format_csv(config, rows);
}

inline int run_estimates(const Options& opt, std::vector<std::int64_t> n_values, std::ostream& out,
                         std::ostream& err)
{
    const auto params = resolve_params(opt);
    if (opt.canonicalize)
        report_canonical(params, err);
    const auto config = make_config(opt, params, n_values.front());
    const auto rows = sweep_n(config, n_values);
    const std::string payload = render_estimates(opt, config, n_values, rows);
    if (opt.format == "csv" && !opt.out.empty())
        emit(experiment_metadata(config, n_values).dump(2) + "\n", opt.out + ".meta.json", out);
    emit(payload, opt.out, out);
    return exit_ok;
}

inline int run_verify(const Options& opt, std::ostream& out, std::ostream& err)
{
    const auto params = resolve_params(opt);
    if (opt.canonicalize)
        report_canonical(params, err);
    params.require_construction_mode();
    const std::int64_t u = resolve_u(opt, params);
    std::vector<ExhaustReport> reports;
    reports.push_back(check_threshold_equivalence(params, opt.n_max));
    reports.push_back(check_decoy_bound(params.a, params.b, u, opt.n));
    reports.push_back(check_k_residues(params.a, params.b, u, opt.n));

    nlohmann::json j;
    j["version"] = version_string;
    j["reports"] = nlohmann::json::array();
    std::size_t violations = 0;
    for (const auto& r : reports) {
        j["reports"].push_back(to_json(r));
        violations += r.violations.size();
    }
    j["total_violations"] = violations;
    emit(j.dump(2) + "\n", opt.out, out);
    if (violations != 0) {
        err << "verify: " << violations << " violation(s) found\n";
        return exit_violation;
    }
    return exit_ok;
}

inline int run_exact(const Options& opt, std::ostream& out, std::ostream& err)
{
    const auto params = resolve_params(opt);
    if (opt.canonicalize)
        report_canonical(params, err);
    params.require_construction_mode();
    const auto spec = build_spec(params.a, params.b, opt.n);
    const auto lab = labels(spec);
    const auto result = exact_fdr(lab, params.a, params.b, params.t, params.c);
    const big_rational alpha(big_int(params.alpha.num()), big_int(params.alpha.den()));

    nlohmann::json j;
    j["version"] = version_string;
    j["alpha"] = params.alpha.to_string();
    j["c"] = params.c.to_string();
    j["t"] = params.t.to_string();
    j["a"] = params.a;
    j["b"] = params.b;
    j["n"] = opt.n;
    j["fdr"] = to_string(result.fdr);
    j["fdr_value"] = result.fdr.convert_to<double>();
    j["exceeds_alpha"] = result.fdr > alpha;
    j["cases"] = result.cases;
    j["total_probability"] = to_string(result.total_probability);
    emit(j.dump(2) + "\n", opt.out, out);
    return exit_ok;
}

inline int run_construct(const Options& opt, std::ostream& out)
{
    const Rational alpha = parse_rational(opt.alpha);
    const Rational c = parse_rational(opt.c);
    ProcedureParams params = make_params(alpha, c, Rational(1));
    params.require_construction_mode();
    const auto spec = build_spec(params.a, params.b, opt.n);
    nlohmann::json j = to_json(spec);
    j["alpha"] = alpha.to_string();
    j["c"] = c.to_string();
    j["true_null_positions"] = true_null_positions(spec);
    emit(j.dump(2) + "\n", opt.out, out);
    return exit_ok;
}

} // namespace detail

/// Entry point shared by the executable and the tests.
inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err)
{
    Options opt;
    CLI::App app{"Simulation laboratory for the SSS_t+ competition procedure", "ssslab"};
    app.set_version_flag("--version", version_string);
    app.require_subcommand(1);

    auto add_procedure = [&](CLI::App* sub, bool with_t) {
        sub->add_option("--alpha", opt.alpha, "target FDR level, e.g. 0.05 or 2/7")->required();
        sub->add_option("--c", opt.c, "competition cutoff c, e.g. 0.5")->required();
        if (with_t) {
            auto t = sub->add_option("--t", opt.t, "additive constant t in (0, 1] (default 1)");
            auto u = sub->add_option("--u", opt.u, "use t = 1 - u/b");
            t->excludes(u);
            sub->add_flag("--canonicalize", opt.canonicalize, "report ceil(t b)/b and whether K_t = K_1");
        }
    };
    auto add_run = [&](CLI::App* sub) {
        sub->add_option("--trials", opt.trials, "number of Monte Carlo trials")->capture_default_str();
        sub->add_option("--seed", opt.seed, "master seed")->capture_default_str();
        sub->add_option("--threads", opt.threads, "worker threads (0: all cores)")->envname(threads_env);
        sub->add_option("--confidence", opt.confidence, "confidence level")->capture_default_str();
        sub->add_option("--format", opt.format, "output format")->check(CLI::IsMember({"csv", "json"}));
    };

    auto* simulate = app.add_subcommand("simulate", "estimate the FDR at one n");
    add_procedure(simulate, true);
    add_run(simulate);
    simulate->add_option("--n", opt.n, "number of hypotheses")->required()->check(CLI::PositiveNumber);

    auto* sweep = app.add_subcommand("sweep", "estimate the FDR over a list of n");
    add_procedure(sweep, true);
    add_run(sweep);
    sweep->add_option("--n-list", opt.n_list, "comma-separated n values (default: 5..100 complete cycles)");

    auto* verify = app.add_subcommand("verify", "exhaustive checks of the threshold properties");
    add_procedure(verify, true);
    verify->add_option("--n", opt.n, "construction length for the decoy bound and residue checks")->required()->check(CLI::PositiveNumber);
    verify->add_option("--n-max", opt.n_max, "longest pattern for the equivalence check")->capture_default_str();

    auto* exact = app.add_subcommand("exact", "exact FDR by full enumeration");
    add_procedure(exact, true);
    exact->add_option("--n", opt.n, "number of hypotheses")->required()->check(CLI::PositiveNumber);

    auto* construct = app.add_subcommand("construct", "dump the adversarial arrangement");
    add_procedure(construct, false);
    construct->add_option("--n", opt.n, "number of hypotheses")->required()->check(CLI::PositiveNumber);

    for (auto* sub : {simulate, sweep, verify, exact, construct})
        sub->add_option("--out", opt.out, "output path (default: standard output)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e, out, err);
        return code == 0 ? exit_ok : exit_usage;
    }

    try {
        if (*simulate)
            return detail::run_estimates(opt, {opt.n}, out, err);
        if (*sweep) {
            std::vector<std::int64_t> grid;
            if (opt.n_list.empty()) {
                const auto params = detail::resolve_params(opt);
                grid = default_n_grid(params.a, params.b);
            } else {
                grid = detail::parse_n_list(opt.n_list);
            }
            return detail::run_estimates(opt, std::move(grid), out, err);
        }
        if (*verify)
            return detail::run_verify(opt, out, err);
        if (*exact)
            return detail::run_exact(opt, out, err);
        if (*construct)
            return detail::run_construct(opt, out);
    } catch (const std::exception& e) {
        err << "error: " << e.what() << '\n';
        return exit_usage;
    }
    return exit_usage;
}

} // namespace ssslab::cli
