#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "ssslab/rng.hpp"
#include "ssslab/seqstep.hpp"

namespace ssslab {

/// Inverse of x modulo `modulus` in [1, modulus - 1], by extended Euclid.
/// Throws std::domain_error when gcd(x, modulus) != 1.
inline std::int64_t mod_inverse(std::int64_t x, std::int64_t modulus)
{
    if (modulus < 2)
        throw std::invalid_argument("mod_inverse: modulus must be at least 2");
    std::int64_t r0 = modulus, r1 = ((x % modulus) + modulus) % modulus;
    std::int64_t s0 = 0, s1 = 1;
    while (r1 != 0) {
        std::int64_t q = r0 / r1;
        std::int64_t r2 = r0 - q * r1;
        r0 = r1;
        r1 = r2;
        std::int64_t s2 = s0 - q * s1;
        s0 = s1;
        s1 = s2;
    }
    if (r0 != 1)
        throw std::domain_error("mod_inverse: " + std::to_string(x) + " is not invertible modulo " +
                                std::to_string(modulus) + " (coprimality violated)");
    return ((s0 % modulus) + modulus) % modulus;
}

/// Periodic arrangement of true and false nulls.
///
/// Position k in [1, n] is a true null iff its residue modulo a + b, with 0
/// written as a + b, is one of the 2a + 1 cycle offsets
/// -j * a^{-1} (mod a + b), j = 0..2a.
struct ConstructionSpec {
    std::int64_t a = 0;
    std::int64_t b = 0;
    std::int64_t n = 0;
    std::int64_t period = 0;
    std::vector<std::int64_t> cycle_null_offsets; // sorted, 1-based, in [1, period]

    bool is_true_null(std::int64_t k) const
    {
        std::int64_t r = k % period;
        if (r == 0)
            r = period;
        return std::binary_search(cycle_null_offsets.begin(), cycle_null_offsets.end(), r);
    }
};

namespace detail {

inline std::int64_t to_cycle_offset(std::int64_t residue, std::int64_t period)
{
    residue %= period;
    if (residue < 0)
        residue += period;
    return residue == 0 ? period : residue;
}

inline void require_coprime_ab(std::int64_t a, std::int64_t b)
{
    if (a <= 0 || b <= 0)
        throw std::invalid_argument("construction: a and b must be positive");
    if (!(a < b))
        throw std::invalid_argument("construction: requires a < b");
    if (std::gcd(a, b) != 1)
        throw std::invalid_argument("construction: a and b must be coprime");
}

} // namespace detail

/// Offsets {-j * a^{-1} mod (a+b)}, sorted.
inline std::vector<std::int64_t> null_offsets_via_a_inverse(std::int64_t a, std::int64_t b)
{
    detail::require_coprime_ab(a, b);
    const std::int64_t period = a + b;
    const std::int64_t a_inv = mod_inverse(a, period);
    std::vector<std::int64_t> out;
    for (std::int64_t j = 0; j <= 2 * a; ++j)
        out.push_back(detail::to_cycle_offset(-(j % period) * a_inv, period));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

/// Offsets {j * b^{-1} mod (a+b)}, sorted. Equal to the a^{-1} form because
/// -a^{-1} = b^{-1} modulo a + b.
inline std::vector<std::int64_t> null_offsets_via_b_inverse(std::int64_t a, std::int64_t b)
{
    detail::require_coprime_ab(a, b);
    const std::int64_t period = a + b;
    const std::int64_t b_inv = mod_inverse(b, period);
    std::vector<std::int64_t> out;
    for (std::int64_t j = 0; j <= 2 * a; ++j)
        out.push_back(detail::to_cycle_offset((j % period) * b_inv, period));
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
}

inline ConstructionSpec build_spec(std::int64_t a, std::int64_t b, std::int64_t n)
{
    detail::require_coprime_ab(a, b);
    if (n < 1)
        throw std::invalid_argument("construction: n must be at least 1");
    ConstructionSpec spec{a, b, n, a + b, null_offsets_via_a_inverse(a, b)};
    if (static_cast<std::int64_t>(spec.cycle_null_offsets.size()) != 2 * a + 1)
        throw std::logic_error("construction: expected 2a+1 distinct null offsets per cycle");
    return spec;
}

inline ConstructionSpec build_spec(const ProcedureParams& params, std::int64_t n)
{
    params.require_construction_mode();
    return build_spec(params.a, params.b, n);
}

inline std::vector<Label> labels(const ConstructionSpec& spec)
{
    std::vector<Label> out(static_cast<std::size_t>(spec.n), Label::FalseNull);
    for (std::int64_t k = 1; k <= spec.n; ++k)
        if (spec.is_true_null(k))
            out[static_cast<std::size_t>(k - 1)] = Label::TrueNull;
    return out;
}

/// 1-based positions of the true nulls.
inline std::vector<std::int64_t> true_null_positions(const ConstructionSpec& spec)
{
    std::vector<std::int64_t> out;
    for (std::int64_t k = 1; k <= spec.n; ++k)
        if (spec.is_true_null(k))
            out.push_back(k);
    return out;
}

/// False nulls always win (their p-value sits exactly at c); each true null
/// wins independently with probability c, consuming one word of `stream`.
template <UniformStream Stream>
CompetitionSequence sample_trial(std::span<const Label> label, const BernoulliCut& target_win, Stream& stream)
{
    std::vector<Win> win(label.size(), Win::Target);
    for (std::size_t j = 0; j < label.size(); ++j)
        if (label[j] == Label::TrueNull && !target_win(stream.next()))
            win[j] = Win::Decoy;
    return {std::move(win), std::vector<Label>(label.begin(), label.end())};
}

template <UniformStream Stream>
CompetitionSequence sample_trial(const ConstructionSpec& spec, const Rational& c, Stream& stream)
{
    if (!(c > 0 && c <= Rational(1, 2)))
        throw std::invalid_argument("sample_trial: c must lie in (0, 1/2], got " + c.to_string());
    auto lab = labels(spec);
    return sample_trial(std::span<const Label>(lab), BernoulliCut(c), stream);
}

inline nlohmann::json to_json(const ConstructionSpec& spec)
{
    return {{"a", spec.a},
            {"b", spec.b},
            {"n", spec.n},
            {"period", spec.period},
            {"cycle_null_offsets", spec.cycle_null_offsets}};
}

inline ConstructionSpec spec_from_json(const nlohmann::json& j)
{
    auto spec = build_spec(j.at("a").get<std::int64_t>(), j.at("b").get<std::int64_t>(), j.at("n").get<std::int64_t>());
    if (j.contains("cycle_null_offsets") &&
        j.at("cycle_null_offsets").get<std::vector<std::int64_t>>() != spec.cycle_null_offsets)
        throw std::invalid_argument("construction record: offsets do not match (a, b)");
    return spec;
}

} // namespace ssslab
