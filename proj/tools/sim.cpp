// SPDX-License-Identifier: Apache-2.0
//
// sim run    --config <file> [--out <dir>] [--trials N] [--seed S] [--format csv|json]
// sim sweep  --config <file> --axis <name> --values <v1,v2,...> [same options]
// sim preset <fig1|fig2|fig3|fig4|fig5> [--out <dir>] [--trials N] [--format csv|json]
//
// Exit codes: 0 success, 2 configuration error, 1 anything else.

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "bidir/bidir.hpp"

namespace {

constexpr int kExitConfigError = 2;

struct CommonOptions {
    std::string out_dir = ".";
    std::optional<int> trials;
    std::optional<std::uint64_t> seed;
    std::string format = "csv";
};

void add_common(CLI::App* cmd, CommonOptions& o, bool with_seed)
{
    cmd->add_option("--out", o.out_dir, "Output directory")->capture_default_str();
    cmd->add_option("--trials", o.trials, "Override the number of Monte Carlo trials")->check(CLI::PositiveNumber);
    if (with_seed)
        cmd->add_option("--seed", o.seed, "Override the base seed");
    cmd->add_option("--format", o.format, "Output format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
}

bidir::ScenarioConfig apply_overrides(bidir::ScenarioConfig cfg, const CommonOptions& o)
{
    if (o.trials)
        cfg.n_trials = *o.trials;
    if (o.seed)
        cfg.seed = *o.seed;
    cfg.validate();
    return cfg;
}

std::string write(const std::vector<bidir::CurveRecord>& rows, const std::string& scenario_id,
                  const CommonOptions& o)
{
    std::filesystem::create_directories(o.out_dir);
    const auto path = (std::filesystem::path(o.out_dir) / (scenario_id + "." + o.format)).string();
    bidir::emit(rows, bidir::format_from_string(o.format), path);
    return path;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Bi-directional training simulator for MIMO interference networks"};
    app.require_subcommand(1);

    CommonOptions run_opts, sweep_opts, preset_opts;
    std::string run_config, sweep_config, sweep_axis, sweep_values, preset_name;

    auto* run = app.add_subcommand("run", "Monte Carlo run of one scenario");
    run->add_option("--config", run_config, "Scenario config (flat JSON)")->required();
    add_common(run, run_opts, true);

    auto* sw = app.add_subcommand("sweep", "Paired sweep of one scenario axis");
    sw->add_option("--config", sweep_config, "Scenario config (flat JSON)")->required();
    sw->add_option("--axis", sweep_axis, "training_length | cycles | snr_db | lambda")->required();
    sw->add_option("--values", sweep_values, "Comma-separated axis values")->required();
    add_common(sw, sweep_opts, true);

    auto* preset = app.add_subcommand("preset", "Emit one of the canned experiment families");
    preset->add_option("name", preset_name, "fig1 | fig2 | fig3 | fig4 | fig5")->required();
    add_common(preset, preset_opts, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kExitConfigError;
    }

    try {
        if (*run) {
            const auto cfg = apply_overrides(bidir::load_config(run_config), run_opts);
            std::cout << write(bidir::run_monte_carlo(cfg), cfg.scenario_id, run_opts) << '\n';
        } else if (*sw) {
            const auto cfg = apply_overrides(bidir::load_config(sweep_config), sweep_opts);
            std::vector<double> values;
            std::stringstream ss(sweep_values);
            for (std::string tok; std::getline(ss, tok, ',');) {
                try {
                    values.push_back(std::stod(tok));
                } catch (const std::exception&) {
                    throw bidir::Error(bidir::ErrorCode::ConfigInvalid, "bad sweep value '" + tok + "'");
                }
            }
            const auto axis = bidir::sweep_axis_from_string(sweep_axis);
            std::cout << write(bidir::sweep(cfg, axis, values), cfg.scenario_id, sweep_opts) << '\n';
        } else if (*preset) {
            for (auto& job : bidir::preset_jobs(preset_name, preset_opts.trials.value_or(bidir::kPresetTrials))) {
                std::cout << write(bidir::run_job(job), job.cfg.scenario_id, preset_opts) << '\n';
            }
        }
    } catch (const bidir::Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return e.code() == bidir::ErrorCode::ConfigInvalid || e.code() == bidir::ErrorCode::OverheadExceedsBlock
                   ? kExitConfigError
                   : 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 0;
}
