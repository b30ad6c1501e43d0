#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "ssslab/rational.hpp"

namespace ssslab {

/// Outcome of comparing p_j against c: target wins when p_j <= c.
enum class Win : std::uint8_t { Decoy = 0, Target = 1 };

enum class Label : std::uint8_t { FalseNull = 0, TrueNull = 1 };

/// Lowest-terms (a, b) with a/b = (1 - c)/c * alpha.
struct ThresholdRatio {
    std::int64_t a = 0;
    std::int64_t b = 0;
};

inline ThresholdRatio derive_ab(const Rational& alpha, const Rational& c)
{
    if (!(alpha > 0 && alpha < 1))
        throw std::invalid_argument("alpha must lie in (0, 1), got " + alpha.to_string());
    if (!(c > 0 && c < 1))
        throw std::invalid_argument("c must lie in (0, 1), got " + c.to_string());
    Rational ratio = (Rational(1) - c) / c * alpha;
    return {ratio.num(), ratio.den()};
}

/// alpha, c and the additive constant t of the SSS_t+ threshold, plus the
/// derived coprime pair (a, b).
struct ProcedureParams {
    Rational alpha;
    Rational c;
    Rational t{1};
    std::int64_t a = 0;
    std::int64_t b = 0;

    Rational ratio() const { return Rational(a, b); }

    /// Throws unless c <= 1/2 and a < b, the preconditions for building the
    /// periodic adversarial arrangement.
    void require_construction_mode() const
    {
        if (c > Rational(1, 2))
            throw std::invalid_argument("construction requires c <= 1/2, got c = " + c.to_string());
        if (!(a < b))
            throw std::invalid_argument("construction requires a < b, got a/b = " + ratio().to_string());
    }
};

inline ProcedureParams make_params(const Rational& alpha, const Rational& c, const Rational& t)
{
    auto [a, b] = derive_ab(alpha, c);
    if (!(t > 0 && t <= 1))
        throw std::invalid_argument("t must lie in (0, 1], got " + t.to_string());
    return {alpha, c, t, a, b};
}

/// Parameters with t = 1 - u/b.
inline ProcedureParams make_params_u(const Rational& alpha, const Rational& c, std::int64_t u)
{
    auto [a, b] = derive_ab(alpha, c);
    if (u < 0 || u >= b)
        throw std::invalid_argument("u must satisfy 0 <= u < b = " + std::to_string(b) + ", got " +
                                    std::to_string(u));
    return {alpha, c, Rational(1) - Rational(u, b), a, b};
}

struct CompetitionSequence {
    std::vector<Win> win;
    std::vector<Label> label;

    CompetitionSequence() = default;
    CompetitionSequence(std::vector<Win> wins, std::vector<Label> labels)
        : win(std::move(wins)), label(std::move(labels))
    {
        if (win.size() != label.size())
            throw std::invalid_argument("competition sequence: win and label lengths differ");
    }

    std::size_t size() const noexcept { return win.size(); }
};

/// Prefix counts for k = 0..n: target wins T, decoy wins D, false
/// discoveries I (true-null target wins) and true nulls N.
struct ScanCounts {
    std::vector<std::uint64_t> T, D, I, N;
};

struct TrialOutcome {
    std::uint64_t K = 0;
    std::uint64_t discoveries = 0;       // T_K
    std::uint64_t false_discoveries = 0; // I_K
    std::uint64_t decoys = 0;            // D_K
    Rational fdp;
    bool hit_end = false;
};

/// Exact evaluation of (D_k + t)/(T_k v 1) <= a/b.
///
/// With t = u/v this is b*(v*D + u) <= a*v*max(T, 1). All coefficients are
/// precomputed in 128 bits; construction rejects parameter combinations for
/// which (a + b) * v * (n + 1) would reach 2^126.
class ThresholdTest {
public:
    ThresholdTest(std::int64_t a, std::int64_t b, const Rational& t, std::uint64_t n)
    {
        if (a <= 0 || b <= 0)
            throw std::invalid_argument("threshold test: a and b must be positive");
        if (!(t > 0 && t <= 1))
            throw std::invalid_argument("threshold test: t must lie in (0, 1], got " + t.to_string());
        constexpr wide_uint limit = wide_uint(1) << 126;
        wide_uint scale = (static_cast<wide_uint>(a) + static_cast<wide_uint>(b)) * static_cast<wide_uint>(t.den());
        wide_uint steps = static_cast<wide_uint>(n) + 1;
        if (scale >= limit || steps > limit / scale)
            throw std::overflow_error("threshold test: (a+b)*den(t)*(n+1) exceeds 2^126");
        bv_ = static_cast<wide_int>(b) * t.den();
        bu_ = static_cast<wide_int>(b) * t.num();
        av_ = static_cast<wide_int>(a) * t.den();
    }

    ThresholdTest(const ProcedureParams& params, std::uint64_t n) : ThresholdTest(params.a, params.b, params.t, n) {}

    bool holds(std::uint64_t decoys, std::uint64_t targets) const noexcept
    {
        wide_int lhs = bv_ * static_cast<wide_int>(decoys) + bu_;
        wide_int rhs = av_ * static_cast<wide_int>(targets == 0 ? 1 : targets);
        return lhs <= rhs;
    }

private:
    wide_int bv_ = 0;
    wide_int bu_ = 0;
    wide_int av_ = 0;
};

inline Rational fdp(std::uint64_t false_discoveries, std::uint64_t discoveries)
{
    return Rational::from_wide(static_cast<wide_int>(false_discoveries),
                               static_cast<wide_int>(discoveries == 0 ? 1 : discoveries));
}

inline Rational fdp(const TrialOutcome& outcome) { return fdp(outcome.false_discoveries, outcome.discoveries); }

/// K_t: the largest prefix length k whose statistic passes the threshold
/// test, or 0 if none does. Labels are only used for the FDP accounting.
inline TrialOutcome reject_threshold(std::span<const Win> win, std::span<const Label> label, const ThresholdTest& test)
{
    TrialOutcome out;
    std::uint64_t T = 0, D = 0, I = 0;
    const std::size_t n = win.size();
    for (std::size_t k = 0; k < n; ++k) {
        if (win[k] == Win::Target) {
            ++T;
            if (label[k] == Label::TrueNull)
                ++I;
        } else {
            ++D;
        }
        if (test.holds(D, T)) {
            out.K = k + 1;
            out.discoveries = T;
            out.false_discoveries = I;
            out.decoys = D;
        }
    }
    out.fdp = fdp(out);
    out.hit_end = n > 0 && out.K == n;
    return out;
}

inline TrialOutcome reject_threshold(const CompetitionSequence& seq, const ProcedureParams& params)
{
    return reject_threshold(seq.win, seq.label, ThresholdTest(params, seq.size()));
}

/// K_t over wins alone; labels never influence the threshold.
inline std::uint64_t threshold_index(std::span<const Win> win, const ThresholdTest& test)
{
    std::uint64_t T = 0, D = 0, K = 0;
    for (std::size_t k = 0; k < win.size(); ++k) {
        if (win[k] == Win::Target)
            ++T;
        else
            ++D;
        if (test.holds(D, T))
            K = k + 1;
    }
    return K;
}

inline ScanCounts scan_counts(const CompetitionSequence& seq)
{
    const std::size_t n = seq.size();
    ScanCounts s;
    s.T.assign(n + 1, 0);
    s.D.assign(n + 1, 0);
    s.I.assign(n + 1, 0);
    s.N.assign(n + 1, 0);
    for (std::size_t k = 0; k < n; ++k) {
        bool target = seq.win[k] == Win::Target;
        bool null = seq.label[k] == Label::TrueNull;
        s.T[k + 1] = s.T[k] + (target ? 1 : 0);
        s.D[k + 1] = s.D[k] + (target ? 0 : 1);
        s.I[k + 1] = s.I[k] + (target && null ? 1 : 0);
        s.N[k + 1] = s.N[k] + (null ? 1 : 0);
    }
    return s;
}

/// ceil(t*b)/b. Every t in ((m-1)/b, m/b] yields the same threshold as m/b,
/// so for t > 1 - 1/b the result is 1.
inline Rational canonical_t(const Rational& t, std::int64_t b)
{
    if (!(t > 0 && t <= 1))
        throw std::invalid_argument("canonical_t: t must lie in (0, 1], got " + t.to_string());
    if (b <= 0)
        throw std::invalid_argument("canonical_t: b must be positive");
    wide_int scaled = static_cast<wide_int>(t.num()) * b;
    wide_int m = scaled / t.den() + (scaled % t.den() != 0 ? 1 : 0);
    return Rational::from_wide(m, b);
}

/// True when t lies in (1 - 1/b, 1], where K_t coincides with K_1.
inline bool equals_k1_region(const Rational& t, std::int64_t b) { return canonical_t(t, b) == Rational(1); }

/// 1-based indices of the target wins among the first K hypotheses.
inline std::vector<std::size_t> discovery_indices(std::span<const Win> win, std::uint64_t K)
{
    std::vector<std::size_t> out;
    for (std::size_t j = 0; j < K && j < win.size(); ++j)
        if (win[j] == Win::Target)
            out.push_back(j + 1);
    return out;
}

namespace detail {

inline int bit_length(std::uint64_t x) noexcept { return x == 0 ? 0 : 64 - __builtin_clzll(x); }

} // namespace detail

/// Exact test p <= c for a finite double p in [0, 1].
inline bool pvalue_at_most(double p, const Rational& c)
{
    if (!std::isfinite(p) || p < 0.0 || p > 1.0)
        throw std::invalid_argument("p-value must be a finite number in [0, 1]");
    if (c.num() <= 0)
        return p == 0.0 && c.num() == 0;
    if (p == 0.0)
        return true;
    int exponent = 0;
    double frac = std::frexp(p, &exponent);
    auto mantissa = static_cast<std::uint64_t>(std::ldexp(frac, 53));
    int shift = 53 - exponent; // p = mantissa / 2^shift, shift >= 52
    wide_uint lhs = static_cast<wide_uint>(mantissa) * static_cast<std::uint64_t>(c.den());
    auto num = static_cast<std::uint64_t>(c.num());
    if (detail::bit_length(num) + shift > 127)
        return true;
    wide_uint rhs = static_cast<wide_uint>(num) << shift;
    return lhs <= rhs;
}

/// Discretize raw p-values against c into a competition sequence.
inline CompetitionSequence from_pvalues(std::span<const double> pvalues, std::span<const Label> labels,
                                        const Rational& c)
{
    if (pvalues.size() != labels.size())
        throw std::invalid_argument("from_pvalues: p-value and label lengths differ");
    std::vector<Win> win(pvalues.size());
    std::transform(pvalues.begin(), pvalues.end(), win.begin(),
                   [&](double p) { return pvalue_at_most(p, c) ? Win::Target : Win::Decoy; });
    return {std::move(win), std::vector<Label>(labels.begin(), labels.end())};
}

} // namespace ssslab
