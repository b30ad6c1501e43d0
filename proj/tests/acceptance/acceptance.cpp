// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.
//
// SSSLAB_ACCEPTANCE_FULL=1 raises the two excess-FDR sweeps to 400,000 trials per
// point; the pass conditions are unchanged.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include "ssslab/ssslab.hpp"

using namespace ssslab;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void criterion(const std::string& name, const std::function<Outcome()>& body, double budget_seconds = 0)
{
    auto start = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (budget_seconds > 0 && secs > budget_seconds) {
        o.pass = false;
        o.detail += " [over time budget of " + std::to_string(budget_seconds) + " s]";
    }
    if (!o.pass)
        ++failures;
    std::printf("[%s] %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
}

std::vector<double> ranks(const std::vector<double>& x)
{
    std::vector<std::size_t> idx(x.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](auto i, auto j) { return x[i] < x[j]; });
    std::vector<double> r(x.size());
    for (std::size_t i = 0; i < idx.size();) {
        std::size_t j = i;
        while (j + 1 < idx.size() && x[idx[j + 1]] == x[idx[i]])
            ++j;
        double avg = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k)
            r[idx[k]] = avg;
        i = j + 1;
    }
    return r;
}

double spearman(const std::vector<double>& x, const std::vector<double>& y)
{
    auto rx = ranks(x), ry = ranks(y);
    double mx = std::accumulate(rx.begin(), rx.end(), 0.0) / rx.size();
    double my = std::accumulate(ry.begin(), ry.end(), 0.0) / ry.size();
    double sxy = 0, sxx = 0, syy = 0;
    for (std::size_t i = 0; i < rx.size(); ++i) {
        sxy += (rx[i] - mx) * (ry[i] - my);
        sxx += (rx[i] - mx) * (rx[i] - mx);
        syy += (ry[i] - my) * (ry[i] - my);
    }
    return sxy / std::sqrt(sxx * syy);
}

std::string fmt(double x, int digits = 5)
{
    std::ostringstream os;
    os.precision(digits);
    os << x;
    return os.str();
}

ExperimentConfig regime_config(const char* alpha, const char* c, const char* t, std::uint64_t trials,
                               unsigned threads)
{
    ExperimentConfig config;
    config.params = make_params(parse_rational(alpha), parse_rational(c), parse_rational(t));
    config.trials = trials;
    config.master_seed = 20240917;
    config.confidence_level = Rational(99, 100);
    config.thread_hint = threads;
    return config;
}

} // namespace

int main()
{
    const bool full = std::getenv("SSSLAB_ACCEPTANCE_FULL") != nullptr;
    const std::uint64_t sweep_trials = full ? 400000 : 100000;
    std::printf("ssslab acceptance (%s mode, %llu trials per sweep point)\n", full ? "full" : "desk",
                static_cast<unsigned long long>(sweep_trials));

    criterion(
        "threshold equivalence, exhaustive n <= 14",
        [] {
            std::uint64_t cases = 0, violations = 0, t_one_region = 0;
            for (auto [alpha, c] : {std::pair{"1/10", "1/2"}, std::pair{"1/20", "1/2"}, std::pair{"2/7", "2/5"}}) {
                auto params = make_params(parse_rational(alpha), parse_rational(c), Rational(1));
                auto r = check_threshold_equivalence(params, 14);
                cases += r.cases_checked;
                violations += r.violations.size();
                t_one_region += r.details.at("t_one_region_cases").get<std::uint64_t>();
            }
            return Outcome{violations == 0, std::to_string(cases) + " cases (" + std::to_string(t_one_region) +
                                                " in (1-1/b, 1]), " + std::to_string(violations) + " violations"};
        },
        60);

    criterion(
        "decoy lower bound and threshold residues on the construction",
        [] {
            std::size_t violations = 0;
            std::string detail;
            for (auto [a, b, u, n] : {std::tuple{1, 10, 1, 33}, std::tuple{3, 7, 3, 20}}) {
                auto l1 = check_decoy_bound(a, b, u, n);
                auto kr = check_k_residues(a, b, u, n);
                violations += l1.violations.size() + kr.violations.size();
                detail += "(" + std::to_string(a) + "," + std::to_string(b) + ",u=" + std::to_string(u) +
                          ",n=" + std::to_string(n) + "): " + std::to_string(l1.cases_checked) + " cases, residues " +
                          kr.details.at("interior_residues").dump() + "; ";
                if (a == 1 && b == 10) {
                    auto residues = kr.details.at("interior_residues").get<std::vector<std::int64_t>>();
                    for (auto r : residues)
                        if (r != 9 && r != 10)
                            ++violations;
                }
            }
            return Outcome{violations == 0, detail + std::to_string(violations) + " violations"};
        },
        10);

    criterion("exact FDR vs Monte Carlo, (1,10), u=1, n=33, N=10^6", [] {
        auto exact = exact_fdr(1, 10, 1, 33, Rational(1, 2));
        const double exact_value = exact.fdr.convert_to<double>();
        ExperimentConfig config;
        config.params = make_params_u(Rational(1, 10), Rational(1, 2), 1);
        config.spec = build_spec(1, 10, 33);
        config.trials = 1000000;
        config.master_seed = 33;
        auto est = run_experiment(config);
        const double diff = std::abs(est.mean_fdp - exact_value);
        return Outcome{diff <= 4 * est.std_err, "exact " + to_string(exact.fdr) + " = " + fmt(exact_value, 8) +
                                                    ", sampled " + fmt(est.mean_fdp, 8) + ", |diff| " +
                                                    fmt(diff, 3) + " vs 4 se " + fmt(4 * est.std_err, 3)};
    });

    criterion("FDR control at t = 1 on both sweep parameter sets", [] {
        bool ok = true;
        std::string detail;
        for (auto [alpha, c] : {std::pair{"1/20", "1/2"}, std::pair{"2/7", "2/5"}}) {
            auto config = regime_config(alpha, c, "1", 100000, 0);
            const std::int64_t period = config.params.a + config.params.b;
            std::vector<std::int64_t> grid{5 * period, 10 * period, 20 * period, 50 * period};
            auto rows = sweep_n(config, grid);
            const double level = config.params.alpha.to_double();
            for (const auto& r : rows) {
                bool pass = r.mean_fdp <= level + 3 * r.std_err;
                ok = ok && pass;
                detail += "n=" + std::to_string(r.n) + ":" + fmt(r.mean_fdp, 4) + (pass ? "" : "(!)") + " ";
            }
        }
        return Outcome{ok, detail};
    });

    // The c = 1/2 sweep is run twice with different worker counts.
    const std::vector<std::int64_t> left_grid{105, 210, 315, 525, 1050};
    auto left_config = regime_config("0.05", "0.5", "0.95", sweep_trials, 1);
    std::vector<FdrEstimate> left_rows;
    std::string left_csv_single, left_csv_multi;

    criterion(
        "excess FDR, alpha=0.05, c=1/2, t=0.95 exceeds alpha for some n <= 525",
        [&] {
            left_rows = sweep_n(left_config, left_grid);
            left_csv_single = format_csv(left_config, left_rows);
            bool any = false;
            std::string detail;
            for (const auto& r : left_rows) {
                if (r.n <= 525 && r.ci_low > 0.05)
                    any = true;
                detail += "n=" + std::to_string(r.n) + ":" + fmt(r.mean_fdp, 5) + " [" + fmt(r.ci_low, 5) + "," +
                          fmt(r.ci_high, 5) + "] ";
            }
            return Outcome{any, detail};
        },
        300);

    criterion(
        "excess FDR, alpha=2/7, c=2/5, t=4/7 exceeds alpha for some n",
        [&] {
            auto config = regime_config("2/7", "2/5", "4/7", sweep_trials, 0);
            std::vector<std::int64_t> grid;
            for (std::int64_t n = 10; n <= 1000; n += 10)
                grid.push_back(n);
            auto rows = sweep_n(config, grid);
            const Rational alpha(2, 7);
            std::size_t exceed = 0;
            std::int64_t first = -1;
            double best = 0;
            std::int64_t best_n = 0;
            for (const auto& r : rows) {
                if (r.ci_low > alpha.to_double()) {
                    ++exceed;
                    if (first < 0)
                        first = static_cast<std::int64_t>(r.n);
                }
                if (r.ci_low > best) {
                    best = r.ci_low;
                    best_n = static_cast<std::int64_t>(r.n);
                }
            }
            return Outcome{exceed > 0, std::to_string(exceed) + "/" + std::to_string(rows.size()) +
                                           " points with ci_low > 2/7, first at n=" + std::to_string(first) +
                                           ", largest ci_low " + fmt(best, 5) + " at n=" + std::to_string(best_n)};
        },
        300);

    criterion("diagnostics: P(K=n) falls with n, z_hat near c/(1-c) at the largest n", [&] {
        if (left_rows.empty())
            return Outcome{false, "left sweep unavailable"};
        std::vector<double> ns, hits;
        for (const auto& r : left_rows) {
            ns.push_back(static_cast<double>(r.n));
            hits.push_back(r.p_hit_end);
        }
        const double rho = spearman(ns, hits);
        const double z_last = left_rows.back().z_hat;
        const double target = 1.0; // c/(1-c) at c = 1/2
        bool ok = rho < 0 && std::abs(z_last - target) <= 0.15;
        std::string detail = "spearman " + fmt(rho, 4) + ", p_hit_end";
        for (double h : hits)
            detail += " " + fmt(h, 4);
        detail += ", z_hat(n=" + std::to_string(left_rows.back().n) + ") " + fmt(z_last, 5);
        return Outcome{ok, detail};
    });

    criterion("determinism: alpha=0.05 sweep csv identical across worker counts", [&] {
        auto config = left_config;
        config.thread_hint = 4;
        left_csv_multi = format_csv(config, sweep_n(config, left_grid));
        return Outcome{!left_csv_single.empty() && left_csv_single == left_csv_multi,
                       std::to_string(left_csv_single.size()) + " bytes, threads 1 vs 4"};
    });

    std::printf("%s: %d criterion(s) failed\n", failures == 0 ? "ALL PASS" : "FAILED", failures);
    return failures == 0 ? 0 : 1;
}
