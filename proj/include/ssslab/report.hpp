#pragma once

#include <charconv>
#include <cstdint>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "ssslab/construction.hpp"
#include "ssslab/montecarlo.hpp"
#include "ssslab/version.hpp"

namespace ssslab {

inline constexpr std::string_view csv_header =
    "n,trials,alpha,c,t,a,b,mean_fdp,std_err,ci_low,ci_high,p_hit_end,z_hat,mean_K,seed";

/// Shortest decimal that reads back to the same double.
inline std::string format_double(double x)
{
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof buf, x);
    if (res.ec != std::errc{})
        throw std::runtime_error("format_double: conversion failed");
    return std::string(buf, res.ptr);
}

inline std::string format_csv_row(const ExperimentConfig& config, const FdrEstimate& est)
{
    std::ostringstream os;
    os << est.n << ',' << est.trials << ',' << config.params.alpha << ',' << config.params.c << ','
       << config.params.t << ',' << config.params.a << ',' << config.params.b << ',' << format_double(est.mean_fdp)
       << ',' << format_double(est.std_err) << ',' << format_double(est.ci_low) << ','
       << format_double(est.ci_high) << ',' << format_double(est.p_hit_end) << ',' << format_double(est.z_hat)
       << ',' << format_double(est.mean_K) << ',' << config.master_seed;
    return os.str();
}

/// Header plus one row per estimate, each line newline-terminated.
inline std::string format_csv(const ExperimentConfig& config, std::span<const FdrEstimate> rows)
{
    std::string out(csv_header);
    out += '\n';
    for (const auto& est : rows) {
        out += format_csv_row(config, est);
        out += '\n';
    }
    return out;
}

struct CsvRow {
    FdrEstimate estimate;
    Rational alpha, c, t;
    std::int64_t a = 0, b = 0;
    std::uint64_t seed = 0;
};

namespace detail {

inline std::vector<std::string_view> split_fields(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        auto comma = line.find(',', start);
        out.push_back(line.substr(start, comma - start));
        if (comma == std::string_view::npos)
            break;
        start = comma + 1;
    }
    return out;
}

template <class T>
T parse_number(std::string_view field)
{
    T value{};
    auto res = std::from_chars(field.data(), field.data() + field.size(), value);
    if (res.ec != std::errc{} || res.ptr != field.data() + field.size())
        throw std::invalid_argument("csv: bad numeric field '" + std::string(field) + "'");
    return value;
}

} // namespace detail

inline CsvRow parse_csv_row(std::string_view line)
{
    if (!line.empty() && line.back() == '\r')
        line.remove_suffix(1);
    auto f = detail::split_fields(line);
    if (f.size() != 15)
        throw std::invalid_argument("csv: expected 15 fields, got " + std::to_string(f.size()));
    CsvRow row;
    row.estimate.n = detail::parse_number<std::uint64_t>(f[0]);
    row.estimate.trials = detail::parse_number<std::uint64_t>(f[1]);
    row.alpha = parse_rational(f[2]);
    row.c = parse_rational(f[3]);
    row.t = parse_rational(f[4]);
    row.a = detail::parse_number<std::int64_t>(f[5]);
    row.b = detail::parse_number<std::int64_t>(f[6]);
    row.estimate.mean_fdp = detail::parse_number<double>(f[7]);
    row.estimate.std_err = detail::parse_number<double>(f[8]);
    row.estimate.ci_low = detail::parse_number<double>(f[9]);
    row.estimate.ci_high = detail::parse_number<double>(f[10]);
    row.estimate.p_hit_end = detail::parse_number<double>(f[11]);
    row.estimate.z_hat = detail::parse_number<double>(f[12]);
    row.estimate.mean_K = detail::parse_number<double>(f[13]);
    row.seed = detail::parse_number<std::uint64_t>(f[14]);
    return row;
}

inline std::vector<CsvRow> parse_csv(std::string_view text)
{
    std::vector<CsvRow> rows;
    bool header = true;
    while (!text.empty()) {
        auto nl = text.find('\n');
        auto line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        if (line.empty())
            continue;
        if (header) {
            if (line != csv_header)
                throw std::invalid_argument("csv: unexpected header");
            header = false;
            continue;
        }
        rows.push_back(parse_csv_row(line));
    }
    return rows;
}

inline nlohmann::json to_json(const FdrEstimate& est)
{
    return {{"n", est.n},
            {"trials", est.trials},
            {"mean_fdp", est.mean_fdp},
            {"std_err", est.std_err},
            {"ci_low", est.ci_low},
            {"ci_high", est.ci_high},
            {"p_hit_end", est.p_hit_end},
            {"z_hat", est.z_hat},
            {"mean_K", est.mean_K}};
}

/// Config echo for reproducibility records. The n grid is passed separately
/// because sweeps vary it.
inline nlohmann::json experiment_metadata(const ExperimentConfig& config, std::span<const std::int64_t> n_values)
{
    const auto& p = config.params;
    return {{"version", version_string},
            {"alpha", p.alpha.to_string()},
            {"c", p.c.to_string()},
            {"t", p.t.to_string()},
            {"a", p.a},
            {"b", p.b},
            {"n_values", std::vector<std::int64_t>(n_values.begin(), n_values.end())},
            {"trials", config.trials},
            {"seed", config.master_seed},
            {"confidence_level", config.confidence_level.to_string()},
            {"ci_method", ci_method_name},
            {"rng", "philox2x64-10, key = splitmix64(seed ^ splitmix64(n)), counter = (draw/2, trial)"}};
}

} // namespace ssslab
