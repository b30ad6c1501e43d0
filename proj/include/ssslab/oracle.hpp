#pragma once

#include <algorithm>
#include <cstdint>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>
#include <json.hpp>

#include "ssslab/construction.hpp"
#include "ssslab/seqstep.hpp"

namespace ssslab {

/// Thrown when an exhaustive check would exceed its enumeration budget.
/// Checks refuse instead of silently enumerating a subset.
class budget_error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

inline constexpr int max_pattern_length = 20;
inline constexpr int max_enumerated_nulls = 22;

struct Violation {
    std::uint64_t mask = 0; // bit j set: the j-th enumerated position is a target win
    std::string detail;

    friend bool operator<(const Violation& x, const Violation& y)
    {
        return std::tie(x.mask, x.detail) < std::tie(y.mask, y.detail);
    }
};

struct ExhaustReport {
    std::string property;
    nlohmann::json parameters;
    std::uint64_t n = 0;
    std::uint64_t cases_checked = 0;
    std::vector<Violation> violations;
    nlohmann::json details = nlohmann::json::object();

    bool passed() const noexcept { return violations.empty(); }

    void finalize() { std::sort(violations.begin(), violations.end()); }
};

inline nlohmann::json to_json(const ExhaustReport& r)
{
    nlohmann::json v = nlohmann::json::array();
    for (const auto& x : r.violations)
        v.push_back({{"mask", x.mask}, {"detail", x.detail}});
    return {{"property", r.property},
            {"parameters", r.parameters},
            {"n", r.n},
            {"cases_checked", r.cases_checked},
            {"violations", v},
            {"passed", r.passed()},
            {"details", r.details}};
}

namespace detail {

inline void fill_wins(std::uint64_t mask, std::size_t length, std::vector<Win>& win)
{
    win.resize(length);
    for (std::size_t j = 0; j < length; ++j)
        win[j] = ((mask >> j) & 1U) ? Win::Target : Win::Decoy;
}

/// Enumerates every win assignment of the true nulls of `spec` (false nulls
/// fixed to target wins) and calls visit(mask, wins, outcome). Bit i of mask
/// is the i-th true null in index order.
template <class Visit>
void for_each_null_assignment(const ConstructionSpec& spec, const ThresholdTest& test, Visit visit)
{
    const auto lab = labels(spec);
    std::vector<std::size_t> nulls;
    for (std::size_t j = 0; j < lab.size(); ++j)
        if (lab[j] == Label::TrueNull)
            nulls.push_back(j);
    if (nulls.size() > static_cast<std::size_t>(max_enumerated_nulls))
        throw budget_error("enumeration over " + std::to_string(nulls.size()) + " true nulls exceeds the budget of " +
                           std::to_string(max_enumerated_nulls));
    std::vector<Win> win(lab.size(), Win::Target);
    const std::uint64_t total = std::uint64_t{1} << nulls.size();
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        for (std::size_t i = 0; i < nulls.size(); ++i)
            win[nulls[i]] = ((mask >> i) & 1U) ? Win::Target : Win::Decoy;
        const TrialOutcome out = reject_threshold(win, lab, test);
        visit(mask, std::span<const Win>(win), out);
    }
}

inline void require_construction_u(std::int64_t a, std::int64_t b, std::int64_t u)
{
    if (u < a)
        throw std::invalid_argument("t = 1 - u/b needs u >= a (u = " + std::to_string(u) + ", a = " +
                                    std::to_string(a) + ")");
    if (u >= b)
        throw std::invalid_argument("t = 1 - u/b must be positive (u = " + std::to_string(u) + ", b = " +
                                    std::to_string(b) + ")");
}

} // namespace detail

/// Threshold equivalence under canonicalization of t.
///
/// For every win pattern of every length 1..n_max and, in each interval
/// ((m-1)/b, m/b], for t just above the left end, at the midpoint and at the
/// right end: the prefix inequality at t holds exactly when it holds at m/b,
/// and K_t = K_{m/b}. The interval m = b covers K_t = K_1 on (1 - 1/b, 1].
inline ExhaustReport check_threshold_equivalence(const ProcedureParams& params, int n_max)
{
    if (n_max < 1)
        throw std::invalid_argument("check_threshold_equivalence: n_max must be at least 1");
    if (n_max > max_pattern_length)
        throw budget_error("check_threshold_equivalence: n_max = " + std::to_string(n_max) + " exceeds the budget of " +
                           std::to_string(max_pattern_length));
    const std::int64_t a = params.a, b = params.b;
    const auto length_cap = static_cast<std::uint64_t>(n_max);

    struct Interval {
        Rational endpoint;
        ThresholdTest reference;
        std::vector<std::pair<Rational, ThresholdTest>> probes;
    };
    std::vector<Interval> intervals;
    ExhaustReport report;
    report.property = "threshold-equivalence";
    report.parameters = {{"a", a}, {"b", b}, {"alpha", params.alpha.to_string()}, {"c", params.c.to_string()},
                         {"n_max", n_max}};
    report.n = length_cap;

    for (std::int64_t m = 1; m <= b; ++m) {
        Rational right(m, b);
        Interval iv{right, ThresholdTest(a, b, right, length_cap), {}};
        for (Rational t : {Rational::from_wide(wide_int(1024) * (m - 1) + 1, wide_int(1024) * b),
                           Rational(2 * m - 1, 2 * b), right}) {
            if (canonical_t(t, b) != right)
                report.violations.push_back({0, "canonical_t(" + t.to_string() + ") != " + right.to_string()});
            iv.probes.emplace_back(t, ThresholdTest(a, b, t, length_cap));
        }
        intervals.push_back(std::move(iv));
    }

    std::uint64_t t_one_region_cases = 0;
    std::vector<Win> win;
    std::vector<char> ref_holds, probe_holds;
    for (int length = 1; length <= n_max; ++length) {
        const std::uint64_t total = std::uint64_t{1} << length;
        for (std::uint64_t mask = 0; mask < total; ++mask) {
            detail::fill_wins(mask, static_cast<std::size_t>(length), win);
            for (const auto& iv : intervals) {
                auto prefix_holds = [&](const ThresholdTest& test, std::vector<char>& holds) {
                    holds.assign(win.size(), 0);
                    std::uint64_t T = 0, D = 0, K = 0;
                    for (std::size_t k = 0; k < win.size(); ++k) {
                        (win[k] == Win::Target ? T : D) += 1;
                        holds[k] = test.holds(D, T) ? 1 : 0;
                        if (holds[k])
                            K = k + 1;
                    }
                    return K;
                };
                const std::uint64_t k_ref = prefix_holds(iv.reference, ref_holds);
                for (const auto& [t, test] : iv.probes) {
                    const std::uint64_t k_t = prefix_holds(test, probe_holds);
                    ++report.cases_checked;
                    if (iv.endpoint == Rational(1))
                        ++t_one_region_cases;
                    if (probe_holds != ref_holds)
                        report.violations.push_back({mask, "length " + std::to_string(length) + ", t = " +
                                                               t.to_string() + ": prefix inequality differs from t = " +
                                                               iv.endpoint.to_string()});
                    if (k_t != k_ref)
                        report.violations.push_back({mask, "length " + std::to_string(length) + ", t = " +
                                                               t.to_string() + ": K_t = " + std::to_string(k_t) +
                                                               " but K_canonical = " + std::to_string(k_ref)});
                }
            }
        }
    }
    report.details["probes_per_interval"] = 3;
    report.details["t_one_region_cases"] = t_one_region_cases;
    report.finalize();
    return report;
}

/// On the construction with t = 1 - u/b (u >= a): whenever K < n,
/// (D_K + 1)/(T_K v 1) >= a/b. Also counts assignments where the bound is
/// attained with equality; having none is flagged in the details, not a
/// violation.
inline ExhaustReport check_decoy_bound(std::int64_t a, std::int64_t b, std::int64_t u, std::int64_t n)
{
    detail::require_construction_u(a, b, u);
    const auto spec = build_spec(a, b, n);
    const Rational t = Rational(1) - Rational(u, b);
    const ThresholdTest test(a, b, t, static_cast<std::uint64_t>(n));

    ExhaustReport report;
    report.property = "decoy-estimate-lower-bound";
    report.parameters = {{"a", a}, {"b", b}, {"u", u}, {"t", t.to_string()}, {"n", n}};
    report.n = static_cast<std::uint64_t>(n);
    std::uint64_t tight = 0, below_end = 0;
    std::int64_t first_tight = -1;

    detail::for_each_null_assignment(spec, test, [&](std::uint64_t mask, std::span<const Win>, const TrialOutcome& out) {
        ++report.cases_checked;
        if (out.K >= static_cast<std::uint64_t>(n))
            return;
        ++below_end;
        const wide_int lhs = static_cast<wide_int>(b) * (out.decoys + 1);
        const wide_int rhs = static_cast<wide_int>(a) * std::max<std::uint64_t>(out.discoveries, 1);
        if (lhs < rhs)
            report.violations.push_back({mask, "K = " + std::to_string(out.K) + ", D_K = " + std::to_string(out.decoys) +
                                                   ", T_K = " + std::to_string(out.discoveries)});
        else if (lhs == rhs) {
            ++tight;
            if (first_tight < 0)
                first_tight = static_cast<std::int64_t>(mask);
        }
    });
    report.details["cases_below_end"] = below_end;
    report.details["tight_cases"] = tight;
    if (first_tight >= 0)
        report.details["first_tight_mask"] = first_tight;
    else
        report.details["flag"] = "bound never attained with equality; inspect";
    report.finalize();
    return report;
}

/// On the same enumeration: every realized K with 0 < K < n has K + 1 in the
/// true-null set and a decoy win there, and when u = a, K is never
/// congruent to -3 modulo a + b.
inline ExhaustReport check_k_residues(std::int64_t a, std::int64_t b, std::int64_t u, std::int64_t n)
{
    detail::require_construction_u(a, b, u);
    const auto spec = build_spec(a, b, n);
    const Rational t = Rational(1) - Rational(u, b);
    const ThresholdTest test(a, b, t, static_cast<std::uint64_t>(n));
    const std::int64_t period = a + b;
    const std::int64_t excluded = ((-3 % period) + period) % period;

    ExhaustReport report;
    report.property = "threshold-residues";
    report.parameters = {{"a", a}, {"b", b}, {"u", u}, {"t", t.to_string()}, {"n", n}};
    report.n = static_cast<std::uint64_t>(n);
    std::set<std::uint64_t> realized;

    detail::for_each_null_assignment(spec, test, [&](std::uint64_t mask, std::span<const Win> win, const TrialOutcome& out) {
        ++report.cases_checked;
        realized.insert(out.K);
        const auto K = static_cast<std::int64_t>(out.K);
        if (K == 0 || K == n)
            return;
        if (!spec.is_true_null(K + 1))
            report.violations.push_back({mask, "K = " + std::to_string(K) + ": position K+1 is a false null"});
        else if (win[static_cast<std::size_t>(K)] != Win::Decoy)
            report.violations.push_back({mask, "K = " + std::to_string(K) + ": position K+1 is not a decoy win"});
        if (u == a && K % period == excluded)
            report.violations.push_back({mask, "K = " + std::to_string(K) + " is congruent to -3 mod " +
                                                   std::to_string(period)});
    });

    std::set<std::int64_t> residues;
    for (auto K : realized)
        if (K != 0 && K != static_cast<std::uint64_t>(n))
            residues.insert(static_cast<std::int64_t>(K) % period);
    report.details["realized_K"] = std::vector<std::uint64_t>(realized.begin(), realized.end());
    report.details["interior_residues"] = std::vector<std::int64_t>(residues.begin(), residues.end());
    report.finalize();
    return report;
}

using big_rational = boost::multiprecision::cpp_rational;
using big_int = boost::multiprecision::cpp_int;

struct ExactFdr {
    big_rational fdr;
    big_rational total_probability; // must be exactly 1
    std::uint64_t cases = 0;
};

/// E[FDP] by full enumeration of the true-null outcomes, each true null a
/// target win with probability c independently; false nulls always win.
inline ExactFdr exact_fdr(std::span<const Label> label, std::int64_t a, std::int64_t b, const Rational& t,
                          const Rational& c)
{
    if (!(c > 0 && c < 1))
        throw std::invalid_argument("exact_fdr: c must lie in (0, 1)");
    std::vector<std::size_t> nulls;
    for (std::size_t j = 0; j < label.size(); ++j)
        if (label[j] == Label::TrueNull)
            nulls.push_back(j);
    if (nulls.size() > static_cast<std::size_t>(max_enumerated_nulls))
        throw budget_error("exact_fdr: " + std::to_string(nulls.size()) + " true nulls exceed the budget of " +
                           std::to_string(max_enumerated_nulls));
    const ThresholdTest test(a, b, t, label.size());
    const std::size_t m = nulls.size();
    const std::size_t n = label.size();

    // counts[(w * (n + 1) + T) * (m + 1) + I]: assignments with w null target wins giving T_K = T, I_K = I.
    std::vector<std::uint64_t> counts((m + 1) * (n + 1) * (m + 1), 0);
    std::vector<Win> win(n, Win::Target);
    const std::uint64_t total = std::uint64_t{1} << m;
    for (std::uint64_t mask = 0; mask < total; ++mask) {
        for (std::size_t i = 0; i < m; ++i)
            win[nulls[i]] = ((mask >> i) & 1U) ? Win::Target : Win::Decoy;
        const auto out = reject_threshold(win, label, test);
        const auto w = static_cast<std::size_t>(__builtin_popcountll(mask));
        ++counts[(w * (n + 1) + out.discoveries) * (m + 1) + out.false_discoveries];
    }

    const big_int p = c.num(), q = c.den();
    std::vector<big_int> weight(m + 1);
    for (std::size_t w = 0; w <= m; ++w)
        weight[w] = boost::multiprecision::pow(p, static_cast<unsigned>(w)) *
                    boost::multiprecision::pow(q - p, static_cast<unsigned>(m - w));
    const big_int scale = boost::multiprecision::pow(q, static_cast<unsigned>(m));

    ExactFdr result;
    result.cases = total;
    big_rational fdr_sum = 0;
    big_int mass = 0;
    for (std::size_t w = 0; w <= m; ++w)
        for (std::size_t T = 0; T <= n; ++T)
            for (std::size_t I = 0; I <= m; ++I) {
                auto cnt = counts[(w * (n + 1) + T) * (m + 1) + I];
                if (cnt == 0)
                    continue;
                big_int wt = weight[w] * cnt;
                mass += wt;
                if (I != 0)
                    fdr_sum += big_rational(wt * I, big_int(T == 0 ? 1 : T));
            }
    result.fdr = fdr_sum / big_rational(scale);
    result.total_probability = big_rational(mass, scale);
    return result;
}

/// Exact FDR on the construction with t = 1 - u/b; u = 0 gives t = 1.
inline ExactFdr exact_fdr(std::int64_t a, std::int64_t b, std::int64_t u, std::int64_t n, const Rational& c)
{
    if (u < 0 || u >= b)
        throw std::invalid_argument("exact_fdr: u must satisfy 0 <= u < b");
    const auto spec = build_spec(a, b, n);
    const auto lab = labels(spec);
    return exact_fdr(lab, a, b, Rational(1) - Rational(u, b), c);
}

inline std::string to_string(const big_rational& x)
{
    auto num = boost::multiprecision::numerator(x);
    auto den = boost::multiprecision::denominator(x);
    if (den == 1)
        return num.str();
    return num.str() + "/" + den.str();
}

} // namespace ssslab
