#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <stdexcept>
#include <thread>
#include <utility>
#include <vector>

#include <boost/math/distributions/normal.hpp>

#include "ssslab/construction.hpp"
#include "ssslab/rng.hpp"
#include "ssslab/seqstep.hpp"

namespace ssslab {

struct ExperimentConfig {
    ProcedureParams params;
    ConstructionSpec spec;
    std::uint64_t trials = 1;
    std::uint64_t master_seed = 0;
    Rational confidence_level{99, 100};
    unsigned thread_hint = 0; // 0: one worker per hardware thread
};

struct FdrEstimate {
    std::uint64_t n = 0;
    std::uint64_t trials = 0;
    double mean_fdp = 0;
    double std_err = 0;
    double ci_low = 0;
    double ci_high = 0;
    double p_hit_end = 0; // fraction of trials with K = n
    double z_hat = 0;     // mean of I_K / (D_K + 1) * 1{K < n}
    double mean_K = 0;
};

/// Per-trial quantities kept for aggregation.
struct TrialRecord {
    double fdp = 0;
    double z = 0;
    std::uint64_t K = 0;
    bool hit_end = false;
};

inline constexpr const char* ci_method_name = "normal-approximation (mean +/- z*se, clamped to [0,1])";

/// Two-sided standard-normal quantile z* for the given confidence level.
inline double normal_critical_value(const Rational& level)
{
    if (!(level > 0 && level < 1))
        throw std::invalid_argument("confidence level must lie in (0, 1)");
    double tail = (Rational(1) - level).to_double() / 2.0;
    return boost::math::quantile(boost::math::complement(boost::math::normal_distribution<double>(), tail));
}

inline std::pair<double, double> confidence_interval(double mean, double std_err, const Rational& level)
{
    if (std_err < 0)
        throw std::invalid_argument("confidence_interval: negative standard error");
    double z = normal_critical_value(level);
    double low = std::clamp(mean - z * std_err, 0.0, 1.0);
    double high = std::clamp(mean + z * std_err, 0.0, 1.0);
    return {low, high};
}

/// Sample one trial and apply the threshold in a single pass, without
/// materializing the sequence. Consumes stream words exactly as
/// sample_trial does, so the two paths agree draw for draw.
template <UniformStream Stream>
TrialRecord simulate_trial(std::span<const Label> label, const ThresholdTest& test, const BernoulliCut& target_win,
                           Stream& stream)
{
    std::uint64_t T = 0, D = 0, I = 0;
    std::uint64_t K = 0, TK = 0, DK = 0, IK = 0;
    const std::size_t n = label.size();
    for (std::size_t k = 0; k < n; ++k) {
        if (label[k] == Label::TrueNull) {
            if (target_win(stream.next())) {
                ++T;
                ++I;
            } else {
                ++D;
            }
        } else {
            ++T;
        }
        if (test.holds(D, T)) {
            K = k + 1;
            TK = T;
            DK = D;
            IK = I;
        }
    }
    TrialRecord rec;
    rec.K = K;
    rec.hit_end = n > 0 && K == n;
    rec.fdp = fdp(IK, TK).to_double();
    rec.z = rec.hit_end ? 0.0 : static_cast<double>(IK) / static_cast<double>(DK + 1);
    return rec;
}

/// Fixed-order reduction of the trial buffer.
inline FdrEstimate aggregate(std::span<const TrialRecord> records, std::uint64_t n, const Rational& level)
{
    FdrEstimate est;
    est.n = n;
    est.trials = records.size();
    if (records.empty())
        throw std::invalid_argument("aggregate: no trials");
    const double count = static_cast<double>(records.size());
    double sum_fdp = 0, sum_z = 0, sum_hit = 0, sum_k = 0;
    for (const auto& r : records) {
        sum_fdp += r.fdp;
        sum_z += r.z;
        sum_hit += r.hit_end ? 1.0 : 0.0;
        sum_k += static_cast<double>(r.K);
    }
    est.mean_fdp = sum_fdp / count;
    est.z_hat = sum_z / count;
    est.p_hit_end = sum_hit / count;
    est.mean_K = sum_k / count;
    if (records.size() > 1) {
        double ss = 0;
        for (const auto& r : records) {
            double d = r.fdp - est.mean_fdp;
            ss += d * d;
        }
        est.std_err = std::sqrt(ss / (count - 1.0)) / std::sqrt(count);
    }
    std::tie(est.ci_low, est.ci_high) = confidence_interval(est.mean_fdp, est.std_err, level);
    return est;
}

inline unsigned resolve_workers(unsigned thread_hint, std::uint64_t trials)
{
    unsigned workers = thread_hint != 0 ? thread_hint : std::max(1u, std::thread::hardware_concurrency());
    return static_cast<unsigned>(std::min<std::uint64_t>(workers, std::max<std::uint64_t>(trials, 1)));
}

/// Runs `trials` trials over a fixed label template. Trial i draws from
/// make_stream(i); results land in slot i and are reduced in index order, so
/// the estimate does not depend on the number of workers.
template <class StreamFactory>
FdrEstimate run_trials(std::span<const Label> label, const ProcedureParams& params, std::uint64_t trials,
                       const Rational& level, unsigned thread_hint, StreamFactory make_stream)
{
    if (trials == 0)
        throw std::invalid_argument("run_trials: need at least one trial");
    if (!(level > 0 && level < 1))
        throw std::invalid_argument("run_trials: confidence level must lie in (0, 1)");
    if (!(params.c > 0 && params.c <= Rational(1, 2)))
        throw std::invalid_argument("run_trials: c must lie in (0, 1/2], got " + params.c.to_string());
    const ThresholdTest test(params, label.size());
    const BernoulliCut target_win(params.c);

    std::vector<TrialRecord> records(trials);
    auto work = [&](std::uint64_t begin, std::uint64_t end) {
        for (std::uint64_t i = begin; i < end; ++i) {
            auto stream = make_stream(i);
            records[i] = simulate_trial(label, test, target_win, stream);
        }
    };

    const unsigned workers = resolve_workers(thread_hint, trials);
    if (workers == 1) {
        work(0, trials);
    } else {
        std::vector<std::jthread> pool;
        pool.reserve(workers);
        const std::uint64_t chunk = (trials + workers - 1) / workers;
        for (unsigned w = 0; w < workers; ++w) {
            std::uint64_t begin = std::min<std::uint64_t>(trials, w * chunk);
            std::uint64_t end = std::min<std::uint64_t>(trials, begin + chunk);
            pool.emplace_back(work, begin, end);
        }
    }
    return aggregate(records, label.size(), level);
}

inline void validate(const ExperimentConfig& config)
{
    if (config.trials == 0)
        throw std::invalid_argument("experiment: trials must be at least 1");
    if (!(config.confidence_level > 0 && config.confidence_level < 1))
        throw std::invalid_argument("experiment: confidence level must lie in (0, 1)");
    config.params.require_construction_mode();
    if (config.spec.a != config.params.a || config.spec.b != config.params.b)
        throw std::invalid_argument("experiment: construction (a, b) does not match the procedure parameters");
}

template <class StreamFactory>
FdrEstimate run_experiment(const ExperimentConfig& config, StreamFactory make_stream)
{
    validate(config);
    auto lab = labels(config.spec);
    return run_trials(std::span<const Label>(lab), config.params, config.trials, config.confidence_level,
                      config.thread_hint, std::move(make_stream));
}

/// Trial i of an experiment at length n draws from TrialStream(stream_key(seed, n), i).
inline FdrEstimate run_experiment(const ExperimentConfig& config)
{
    const std::uint64_t key = stream_key(config.master_seed, static_cast<std::uint64_t>(config.spec.n));
    return run_experiment(config, [key](std::uint64_t i) { return TrialStream(key, i); });
}

/// One estimate per n, in input order; only spec.n varies from the template.
inline std::vector<FdrEstimate> sweep_n(const ExperimentConfig& base, std::span<const std::int64_t> n_values)
{
    for (auto n : n_values)
        if (n < 1)
            throw std::invalid_argument("sweep: every n must be at least 1");
    std::vector<FdrEstimate> out;
    out.reserve(n_values.size());
    for (auto n : n_values) {
        ExperimentConfig config = base;
        config.spec = build_spec(base.params.a, base.params.b, n);
        out.push_back(run_experiment(config));
    }
    return out;
}

/// Multiples of a + b from 5 to 100 cycles.
inline std::vector<std::int64_t> default_n_grid(std::int64_t a, std::int64_t b)
{
    std::vector<std::int64_t> out;
    for (std::int64_t cycles : {5, 10, 15, 20, 30, 40, 50, 75, 100})
        out.push_back(cycles * (a + b));
    return out;
}

} // namespace ssslab
