// SPDX-License-Identifier: Apache-2.0
//
// Seeded Monte Carlo driver: per-trial block loop, trial averaging and
// paired parameter sweeps.
//
// Seeding: trial i of a scenario with base seed s uses
//   trial_seed = mix64(s ^ mix64(i))
// and every trial owns independent streams derived from trial_seed
// (channel, initial link state, pilots, training noise, data), so changing
// M, cycles, lambda or SNR leaves the channel draws of a trial untouched.

#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>
#include <thread>
#include <vector>

#include "bidir/adapt.hpp"
#include "bidir/maxsinr.hpp"
#include "bidir/scenario.hpp"

namespace bidir {

struct BlockRecord {
    std::size_t block_index = 0;
    double sum_rate_bits = 0.0;
    double throughput_bits = 0.0;
    long overhead_symbols = 0;
    std::vector<double> per_user_sinr;
};

struct TrialResult {
    std::string scenario_id;
    std::uint64_t seed_used = 0;
    double snr_db = 0.0;
    std::vector<BlockRecord> per_block;
};

inline std::uint64_t trial_seed(std::uint64_t base_seed, std::uint64_t trial_index)
{
    return mix64(base_seed ^ mix64(trial_index));
}

namespace detail {

enum class Stream : std::uint64_t { channel = 1, init = 2, pilots = 3, training_noise = 4, data = 5 };

inline Rng stream(std::uint64_t seed, Stream s)
{
    return Rng(mix64(seed + 0x632BE59BD9B4E019ULL * static_cast<std::uint64_t>(s)));
}

} // namespace detail

/// One trial at a single SNR. Deterministic in (cfg, seed, snr_db).
inline TrialResult run_trial(const ScenarioConfig& cfg, std::uint64_t seed, double snr_db)
{
    cfg.validate();
    NetworkConfig net = cfg.network;
    net.noise_var = snr_db_to_noise_var(snr_db);

    Rng channel_rng = detail::stream(seed, detail::Stream::channel);
    Rng init_rng = detail::stream(seed, detail::Stream::init);
    Rng pilot_rng = detail::stream(seed, detail::Stream::pilots);
    Rng noise_rng = detail::stream(seed, detail::Stream::training_noise);
    Rng data_rng = detail::stream(seed, detail::Stream::data);

    TrialResult result{cfg.scenario_id, seed, snr_db, {}};
    result.per_block.reserve(static_cast<std::size_t>(cfg.n_blocks));

    ChannelRealization ch = init_channels(channel_rng, net.K, net.N_R, net.N_T, cfg.fading);
    LinkState state = random_link_state(net, init_rng);
    const std::vector<CVec> initial_beams = state.beams;
    RlsBank bank = RlsBank::initial(net, cfg.lambda, cfg.delta);

    const long overhead = cfg.overhead();
    const Eigen::Index M = cfg.budget.M;

    for (int b = 0; b < cfg.n_blocks; ++b) {
        ch = evolve(ch, cfg.fading, channel_rng);
        if (ch.block_index != static_cast<std::size_t>(b + 1))
            throw Error(ErrorCode::ConfigInvalid, "block schedule out of step with the channel");

        double rate = 0.0;
        switch (cfg.algorithm) {
        case Algorithm::maxsinr_genie: {
            const auto rep = run_maxsinr(ch, initial_beams, net, cfg.maxsinr_iters);
            state.beams = rep.final_state.beams;
            state.filters = update_receivers(ch, state, net);
            break;
        }
        case Algorithm::genie_per_block:
            state = genie_block_update(ch, state, net);
            break;
        case Algorithm::genie_forward_only:
            state.filters = update_receivers(ch, state, net);
            break;
        case Algorithm::bidir_ls: {
            const auto fwd = gen_training(net.K, M, cfg.pilots, pilot_rng);
            const auto bwd = gen_training(net.K, M, cfg.pilots, pilot_rng);
            state = run_ls_block(ch, state, cfg.budget, fwd, bwd, net, noise_rng, cfg.ridge_rel).state;
            break;
        }
        case Algorithm::bidir_rls: {
            const auto fwd = gen_training(net.K, M, cfg.pilots, pilot_rng);
            const auto bwd = gen_training(net.K, M, cfg.pilots, pilot_rng);
            auto out = run_rls_block(ch, state, bank, fwd, bwd, net, noise_rng);
            state = std::move(out.state);
            bank = std::move(out.bank);
            break;
        }
        case Algorithm::forward_only: {
            // The whole per-block budget goes to one forward phase.
            const auto fwd = gen_training(net.K, static_cast<Eigen::Index>(overhead), cfg.pilots, pilot_rng);
            state = run_forward_only_block(ch, state, fwd, net, noise_rng, cfg.ridge_rel).state;
            break;
        }
        }

        BlockRecord rec;
        rec.block_index = ch.block_index;
        rec.per_user_sinr = all_sinr(ch, state, net);
        rate = sum_rate(rec.per_user_sinr);
        rec.sum_rate_bits = rate;
        rec.overhead_symbols = overhead;
        rec.throughput_bits = throughput(rate, overhead, cfg.L);
        result.per_block.push_back(std::move(rec));

        // The refreshed filters only serve the next block.
        const Eigen::Index data_len = cfg.L - overhead;
        if (cfg.decision_directed && charges_training(cfg.algorithm) && data_len > 0) {
            const auto data = bpsk_data(net.K, data_len, data_rng);
            const auto rx = synth_forward(ch, state.beams, data, net, data_rng);
            for (std::size_t k = 0; k < net.K; ++k)
                if (net.is_active(k))
                    state.filters[k] = decision_directed_refresh(rx[k], state.filters[k], net.P_max, cfg.ridge_rel);
        }
    }
    return result;
}

inline TrialResult run_trial(const ScenarioConfig& cfg, std::uint64_t seed)
{
    return run_trial(cfg, seed, cfg.snr_db.front());
}

/// Mean and standard error of the mean.
struct Estimate {
    double mean = 0.0;
    double stderr_ = 0.0;
};

inline Estimate estimate(const std::vector<double>& xs)
{
    Estimate e;
    if (xs.empty())
        return e;
    double s = 0.0;
    for (double x : xs)
        s += x;
    e.mean = s / static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double ss = 0.0;
        for (double x : xs)
            ss += (x - e.mean) * (x - e.mean);
        e.stderr_ = std::sqrt(ss / static_cast<double>(xs.size() - 1) / static_cast<double>(xs.size()));
    }
    return e;
}

/// One emitted row: a per-block mean (block_index set) or the block-averaged
/// mean (block_index empty).
struct CurveRecord {
    std::string scenario_id;
    std::optional<double> axis_value;
    double snr_db = 0.0;
    double alpha = 0.0;
    double lambda = 0.0;
    long M = 0;
    int cycles = 0;
    std::optional<long> block_index;
    double sum_rate_mean = 0.0;
    double sum_rate_stderr = 0.0;
    double throughput_mean = 0.0;
    double throughput_stderr = 0.0;
    int n_trials = 0;
    std::uint64_t seed = 0;

    bool operator==(const CurveRecord&) const = default;
};

/// Worker count from SIM_THREADS (0 or unset: hardware concurrency).
inline unsigned worker_count()
{
    unsigned n = 0;
    if (const char* env = std::getenv("SIM_THREADS"))
        n = static_cast<unsigned>(std::strtoul(env, nullptr, 10));
    if (n == 0)
        n = std::max(1u, std::thread::hardware_concurrency());
    return n;
}

/// Runs trials 0..n_trials-1 in parallel; results are ordered by trial index.
inline std::vector<TrialResult> run_trials(const ScenarioConfig& cfg, double snr_db)
{
    cfg.validate();
    std::vector<TrialResult> results(static_cast<std::size_t>(cfg.n_trials));
    const unsigned workers = std::min<unsigned>(worker_count(), static_cast<unsigned>(cfg.n_trials));
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::atomic<bool> failed{false};
    auto work = [&] {
        for (std::size_t i = next++; i < results.size(); i = next++) {
            if (failed)
                return;
            try {
                results[i] = run_trial(cfg, trial_seed(cfg.seed, i), snr_db);
            } catch (...) {
                if (!failed.exchange(true))
                    failure = std::current_exception();
                return;
            }
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (unsigned w = 0; w < workers; ++w)
            pool.emplace_back(work);
        for (auto& t : pool)
            t.join();
    }
    if (failure)
        std::rethrow_exception(failure);
    return results;
}

/// Reduces trials to per-block rows followed by one block-averaged row.
inline std::vector<CurveRecord> summarize(const ScenarioConfig& cfg, double snr_db,
                                          const std::vector<TrialResult>& trials,
                                          std::optional<double> axis_value = std::nullopt,
                                          bool include_per_block = true)
{
    CurveRecord base;
    base.scenario_id = cfg.scenario_id;
    base.axis_value = axis_value;
    base.snr_db = snr_db;
    base.alpha = cfg.fading.alpha;
    base.lambda = cfg.lambda;
    base.M = charges_training(cfg.algorithm) ? static_cast<long>(cfg.budget.M) : 0;
    base.cycles = charges_training(cfg.algorithm) ? cfg.budget.cycles : 0;
    base.n_trials = static_cast<int>(trials.size());
    base.seed = cfg.seed;

    std::vector<CurveRecord> out;
    const std::size_t blocks = static_cast<std::size_t>(cfg.n_blocks);
    std::vector<double> rates(trials.size()), thr(trials.size());
    if (include_per_block) {
        for (std::size_t b = 0; b < blocks; ++b) {
            for (std::size_t t = 0; t < trials.size(); ++t) {
                rates[t] = trials[t].per_block[b].sum_rate_bits;
                thr[t] = trials[t].per_block[b].throughput_bits;
            }
            CurveRecord r = base;
            r.block_index = static_cast<long>(trials.front().per_block[b].block_index);
            const auto er = estimate(rates), et = estimate(thr);
            r.sum_rate_mean = er.mean;
            r.sum_rate_stderr = er.stderr_;
            r.throughput_mean = et.mean;
            r.throughput_stderr = et.stderr_;
            out.push_back(std::move(r));
        }
    }
    const std::size_t from = static_cast<std::size_t>(cfg.avg_from_block - 1);
    for (std::size_t t = 0; t < trials.size(); ++t) {
        double sr = 0.0, st = 0.0;
        for (std::size_t b = from; b < blocks; ++b) {
            sr += trials[t].per_block[b].sum_rate_bits;
            st += trials[t].per_block[b].throughput_bits;
        }
        rates[t] = sr / static_cast<double>(blocks - from);
        thr[t] = st / static_cast<double>(blocks - from);
    }
    CurveRecord avg = base;
    const auto er = estimate(rates), et = estimate(thr);
    avg.sum_rate_mean = er.mean;
    avg.sum_rate_stderr = er.stderr_;
    avg.throughput_mean = et.mean;
    avg.throughput_stderr = et.stderr_;
    out.push_back(std::move(avg));
    return out;
}

/// All SNR points of the scenario; per-block rows plus a block-averaged row each.
inline std::vector<CurveRecord> run_monte_carlo(const ScenarioConfig& cfg, bool include_per_block = true,
                                                std::optional<double> axis_value = std::nullopt)
{
    cfg.validate();
    std::vector<CurveRecord> out;
    for (double snr : cfg.snr_db) {
        auto rows = summarize(cfg, snr, run_trials(cfg, snr), axis_value, include_per_block);
        out.insert(out.end(), rows.begin(), rows.end());
    }
    return out;
}

enum class SweepAxis { training_length, cycles, snr_db, lambda };

inline SweepAxis sweep_axis_from_string(const std::string& s)
{
    if (s == "training_length") return SweepAxis::training_length;
    if (s == "cycles") return SweepAxis::cycles;
    if (s == "snr_db") return SweepAxis::snr_db;
    if (s == "lambda") return SweepAxis::lambda;
    throw Error(ErrorCode::ConfigInvalid, "unknown sweep axis '" + s + "'");
}

/// Applies one sweep value to a copy of the base scenario.
///  training_length: total training symbols per block T = 2 M cycles (cycles held fixed);
///  cycles: cycles at fixed total training T of the base scenario;
///  snr_db: a single SNR point;
///  lambda: forgetting factor.
inline ScenarioConfig apply_axis(const ScenarioConfig& base, SweepAxis axis, double value)
{
    ScenarioConfig cfg = base;
    auto as_count = [&](double v) {
        if (!(v >= 1.0) || v != std::floor(v))
            throw Error(ErrorCode::ConfigInvalid, "sweep value must be a positive integer");
        return static_cast<long>(v);
    };
    switch (axis) {
    case SweepAxis::training_length: {
        const long total = as_count(value);
        const long per_cycle = 2L * cfg.budget.cycles;
        if (total % per_cycle != 0)
            throw Error(ErrorCode::ConfigInvalid, "training length " + std::to_string(total)
                                                      + " is not a multiple of 2*cycles");
        cfg.budget.M = total / per_cycle;
        break;
    }
    case SweepAxis::cycles: {
        const long c = as_count(value);
        const long total = base.budget.overhead();
        if (total % (2 * c) != 0)
            throw Error(ErrorCode::ConfigInvalid, "total training " + std::to_string(total)
                                                      + " does not split evenly over " + std::to_string(c) + " cycles");
        cfg.budget.cycles = static_cast<int>(c);
        cfg.budget.M = total / (2 * c);
        break;
    }
    case SweepAxis::snr_db:
        cfg.snr_db = {value};
        break;
    case SweepAxis::lambda:
        cfg.lambda = value;
        break;
    }
    cfg.validate();
    return cfg;
}

/// One Monte Carlo run per value with a shared base seed (paired comparison).
/// Emits only block-averaged rows.
inline std::vector<CurveRecord> sweep(const ScenarioConfig& base, SweepAxis axis, const std::vector<double>& values)
{
    if (values.empty())
        throw Error(ErrorCode::ConfigInvalid, "sweep needs at least one value");
    std::vector<CurveRecord> out;
    for (double v : values) {
        auto rows = run_monte_carlo(apply_axis(base, axis, v), false, v);
        out.insert(out.end(), rows.begin(), rows.end());
    }
    return out;
}

} // namespace bidir
