// SPDX-License-Identifier: Apache-2.0
//
// Canned experiment families. Every preset is a list of jobs; a job is either
// a plain Monte Carlo run or a sweep over one axis.
//
//   fig1  constant channel, 30 dB, L = 1000: sum rate / throughput vs total training
//   fig2  i.i.d. blocks, 20 dB: sum rate vs total training for 1, 2, 4, 8 cycles
//   fig3  unlimited training per block: sum rate vs SNR for several alpha,
//         plus a two-active-user comparison
//   fig4  alpha = 0.99, L = 100, 10 dB: RLS (lambda = 0.5) vs LS vs forward-only
//   fig5  alpha = 0.999, L = 1000, 10 dB: RLS (lambda = 0.7) vs LS vs forward-only

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "bidir/harness.hpp"

namespace bidir {

struct PresetJob {
    ScenarioConfig cfg;
    std::optional<SweepAxis> axis;
    std::vector<double> values;
};

inline std::vector<CurveRecord> run_job(const PresetJob& job)
{
    return job.axis ? sweep(job.cfg, *job.axis, job.values) : run_monte_carlo(job.cfg);
}

inline constexpr int kPresetTrials = 500;

namespace detail {

inline ScenarioConfig preset_base(int n_trials)
{
    ScenarioConfig c;
    c.network.K = 3;
    c.network.N_T = 2;
    c.network.N_R = 2;
    c.network.P_max = 1.0;
    c.network.active.assign(3, true);
    c.fading.entry_variance = 1.0;
    c.pilots = PilotScheme::random_qpsk;
    c.decision_directed = true;
    c.n_trials = n_trials;
    c.seed = 20100317;
    c.budget.cycles = 1;
    return c;
}

// 0.999 -> "0p999", for use in file names.
inline std::string format_alpha(double a)
{
    std::string s = std::to_string(a);
    s.erase(s.find_last_not_of('0') + 1);
    if (!s.empty() && s.back() == '.')
        s.pop_back();
    for (auto& c : s)
        if (c == '.')
            c = 'p';
    return s;
}

inline PresetJob with_algorithm(ScenarioConfig c, const std::string& id, Algorithm a,
                                std::optional<SweepAxis> axis = std::nullopt, std::vector<double> values = {})
{
    c.scenario_id = id;
    c.algorithm = a;
    return {std::move(c), axis, std::move(values)};
}

} // namespace detail

/// Total training symbols per block swept by the constant-channel preset (2M = 0.006 L .. 0.2 L).
inline const std::vector<double>& fig1_training_grid()
{
    static const std::vector<double> grid{6, 8, 10, 12, 16, 20, 30, 40, 50, 60, 80, 100, 150, 200};
    return grid;
}

inline std::vector<PresetJob> preset_jobs(const std::string& name, int n_trials = kPresetTrials)
{
    using detail::with_algorithm;
    std::vector<PresetJob> jobs;
    auto base = detail::preset_base(n_trials);

    if (name == "fig1") {
        base.fading.alpha = 1.0;
        base.L = 1000;
        base.snr_db = {30.0};
        base.n_blocks = 100;
        base.avg_from_block = 51;
        const auto& grid = fig1_training_grid();
        jobs.push_back(with_algorithm(base, "fig1_bidir_ls", Algorithm::bidir_ls, SweepAxis::training_length, grid));
        jobs.push_back(
            with_algorithm(base, "fig1_forward_only", Algorithm::forward_only, SweepAxis::training_length, grid));
        auto genie = base;
        genie.n_blocks = 1;
        genie.avg_from_block = 1;
        jobs.push_back(with_algorithm(genie, "fig1_maxsinr_genie", Algorithm::maxsinr_genie));
    } else if (name == "fig2") {
        base.fading.alpha = 0.0;
        base.L = 1000;
        base.snr_db = {20.0};
        base.n_blocks = 5;
        base.avg_from_block = 1;
        const std::vector<double> grid{32, 64, 128, 256, 512};
        for (int c : {1, 2, 4, 8}) {
            auto cfg = base;
            cfg.budget.cycles = c;
            jobs.push_back(with_algorithm(cfg, "fig2_bidir_ls_c" + std::to_string(c), Algorithm::bidir_ls,
                                          SweepAxis::training_length, grid));
        }
        jobs.push_back(
            with_algorithm(base, "fig2_forward_only", Algorithm::forward_only, SweepAxis::training_length, grid));
        auto genie = base;
        genie.n_blocks = 1;
        jobs.push_back(with_algorithm(genie, "fig2_maxsinr_genie", Algorithm::maxsinr_genie));
    } else if (name == "fig3") {
        base.decision_directed = false;
        base.snr_db.clear();
        for (int s = 0; s <= 50; s += 5)
            base.snr_db.push_back(s);
        base.n_blocks = 500;
        base.avg_from_block = 401;
        for (double a : {1.0, 0.999, 0.99, 0.9}) {
            auto cfg = base;
            cfg.fading.alpha = a;
            jobs.push_back(with_algorithm(cfg, "fig3_genie_alpha" + detail::format_alpha(a), Algorithm::genie_per_block));
        }
        auto two = base;
        two.fading.alpha = 0.0;
        two.network.active = {true, true, false};
        two.n_blocks = 50;
        two.avg_from_block = 1;
        jobs.push_back(with_algorithm(two, "fig3_two_user_bidir", Algorithm::genie_per_block));
        jobs.push_back(with_algorithm(two, "fig3_two_user_forward_only", Algorithm::genie_forward_only));
    } else if (name == "fig4" || name == "fig5") {
        const bool fast = name == "fig4";
        base.fading.alpha = fast ? 0.99 : 0.999;
        base.lambda = fast ? 0.5 : 0.7;
        base.L = fast ? 100 : 1000; // L = 1 / (1 - alpha)
        base.snr_db = {10.0};
        base.n_blocks = 60;
        base.avg_from_block = 21;
        const std::vector<double> grid = fast ? std::vector<double>{4, 8, 12, 16, 20, 24, 32, 40}
                                              : std::vector<double>{4, 8, 16, 32, 64, 128};
        jobs.push_back(
            with_algorithm(base, name + "_bidir_rls", Algorithm::bidir_rls, SweepAxis::training_length, grid));
        jobs.push_back(with_algorithm(base, name + "_bidir_ls", Algorithm::bidir_ls, SweepAxis::training_length, grid));
        jobs.push_back(
            with_algorithm(base, name + "_forward_only", Algorithm::forward_only, SweepAxis::training_length, grid));
    } else {
        throw Error(ErrorCode::ConfigInvalid, "unknown preset '" + name + "' (expected fig1..fig5)");
    }
    return jobs;
}

} // namespace bidir
