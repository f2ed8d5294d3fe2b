// SPDX-License-Identifier: Apache-2.0
//
// Experiment description and its flat JSON config-file form.

#pragma once

#include <cstdint>
#include <fstream>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "bidir/adapt.hpp"
#include "bidir/channel.hpp"
#include "bidir/phy.hpp"

namespace bidir {

enum class Algorithm {
    maxsinr_genie,      // perfect-CSI Max-SINR run to convergence every block
    bidir_ls,           // bi-directional block LS
    bidir_rls,          // bi-directional block-recursive LS
    forward_only,       // beams fixed, receivers trained
    genie_per_block,    // one exact Max-SINR iteration per block (unlimited training)
    genie_forward_only, // beams fixed, receivers take the exact Max-SINR update
};

inline const char* to_string(Algorithm a)
{
    switch (a) {
    case Algorithm::maxsinr_genie: return "maxsinr_genie";
    case Algorithm::bidir_ls: return "bidir_ls";
    case Algorithm::bidir_rls: return "bidir_rls";
    case Algorithm::forward_only: return "forward_only";
    case Algorithm::genie_per_block: return "genie_per_block";
    case Algorithm::genie_forward_only: return "genie_forward_only";
    }
    return "?";
}

inline Algorithm algorithm_from_string(const std::string& s)
{
    for (auto a : {Algorithm::maxsinr_genie, Algorithm::bidir_ls, Algorithm::bidir_rls, Algorithm::forward_only,
                   Algorithm::genie_per_block, Algorithm::genie_forward_only})
        if (s == to_string(a))
            return a;
    throw Error(ErrorCode::ConfigInvalid, "unknown algorithm '" + s + "'");
}

inline bool charges_training(Algorithm a)
{
    return a == Algorithm::bidir_ls || a == Algorithm::bidir_rls || a == Algorithm::forward_only;
}

struct ScenarioConfig {
    std::string scenario_id = "scenario";
    NetworkConfig network;
    FadingParams fading;
    long L = 1000;
    TrainingBudget budget;
    PilotScheme pilots = PilotScheme::random_qpsk;
    Algorithm algorithm = Algorithm::bidir_ls;
    double lambda = 0.5;
    double delta = 0.01;
    double ridge_rel = kDefaultRidgeRel;
    std::vector<double> snr_db{30.0};
    int n_blocks = 50;
    int n_trials = 100;
    std::uint64_t seed = 1;
    bool decision_directed = true;
    int maxsinr_iters = 100;
    // Blocks [avg_from_block, n_blocks] (1-based) enter the per-trial block average.
    int avg_from_block = 1;

    /// Training symbols charged per block.
    long overhead() const { return charges_training(algorithm) ? budget.overhead() : 0; }

    void validate() const
    {
        network.validate();
        fading.validate();
        if (n_trials < 1 || n_blocks < 1)
            throw Error(ErrorCode::ConfigInvalid, "n_trials and n_blocks must be >= 1");
        if (avg_from_block < 1 || avg_from_block > n_blocks)
            throw Error(ErrorCode::ConfigInvalid, "avg_from_block must lie in [1, n_blocks]");
        if (L < 1)
            throw Error(ErrorCode::ConfigInvalid, "L must be >= 1");
        if (snr_db.empty())
            throw Error(ErrorCode::ConfigInvalid, "snr_db must list at least one value");
        if (maxsinr_iters < 1)
            throw Error(ErrorCode::ConfigInvalid, "maxsinr_iters must be >= 1");
        if (!(ridge_rel > 0.0))
            throw Error(ErrorCode::ConfigInvalid, "ridge_rel must be positive");
        if (charges_training(algorithm)) {
            if (budget.M < 1 || budget.cycles < 1)
                throw Error(ErrorCode::ConfigInvalid, "M and cycles must be >= 1");
            if (overhead() > L)
                throw Error(ErrorCode::ConfigInvalid, "training overhead " + std::to_string(overhead())
                                                          + " exceeds block length L = " + std::to_string(L));
            if (pilots == PilotScheme::orthogonal && budget.M < static_cast<Eigen::Index>(network.K))
                throw Error(ErrorCode::ConfigInvalid, "orthogonal pilots need M >= K");
        }
        if (algorithm == Algorithm::bidir_rls) {
            if (budget.cycles != 1)
                throw Error(ErrorCode::ConfigInvalid, "bidir_rls runs exactly one cycle per block");
            if (!(lambda > 0.0 && lambda <= 1.0))
                throw Error(ErrorCode::ConfigInvalid, "lambda must lie in (0, 1]");
            if (!(delta > 0.0))
                throw Error(ErrorCode::ConfigInvalid, "delta must be positive");
        }
    }
};

namespace detail {

template <typename T>
T get_as(const nlohmann::json& v, const std::string& key)
{
    try {
        return v.get<T>();
    } catch (const nlohmann::json::exception&) {
        throw Error(ErrorCode::ConfigInvalid, "key '" + key + "' has the wrong type");
    }
}

} // namespace detail

/// Parses a flat JSON object. Unknown keys are rejected.
inline ScenarioConfig config_from_json(const nlohmann::json& j, ScenarioConfig cfg = {})
{
    if (!j.is_object())
        throw Error(ErrorCode::ConfigInvalid, "config must be a JSON object");
    using detail::get_as;
    for (const auto& [key, v] : j.items()) {
        if (key == "scenario_id") cfg.scenario_id = get_as<std::string>(v, key);
        else if (key == "K") cfg.network.K = get_as<std::size_t>(v, key);
        else if (key == "N_T") cfg.network.N_T = get_as<Eigen::Index>(v, key);
        else if (key == "N_R") cfg.network.N_R = get_as<Eigen::Index>(v, key);
        else if (key == "P_max") cfg.network.P_max = get_as<double>(v, key);
        else if (key == "active_users") cfg.network.active = get_as<std::vector<bool>>(v, key);
        else if (key == "alpha") cfg.fading.alpha = get_as<double>(v, key);
        else if (key == "entry_variance") cfg.fading.entry_variance = get_as<double>(v, key);
        else if (key == "L") cfg.L = get_as<long>(v, key);
        else if (key == "M") cfg.budget.M = get_as<Eigen::Index>(v, key);
        else if (key == "cycles") cfg.budget.cycles = get_as<int>(v, key);
        else if (key == "schedule") {
            const auto s = get_as<std::string>(v, key);
            if (s == "backward_first") cfg.budget.schedule = Schedule::backward_first;
            else if (s == "forward_first") cfg.budget.schedule = Schedule::forward_first;
            else throw Error(ErrorCode::ConfigInvalid, "unknown schedule '" + s + "'");
        } else if (key == "pilots") {
            const auto s = get_as<std::string>(v, key);
            if (s == "orthogonal") cfg.pilots = PilotScheme::orthogonal;
            else if (s == "random_qpsk") cfg.pilots = PilotScheme::random_qpsk;
            else throw Error(ErrorCode::ConfigInvalid, "unknown pilot scheme '" + s + "'");
        } else if (key == "algorithm") cfg.algorithm = algorithm_from_string(get_as<std::string>(v, key));
        else if (key == "lambda") cfg.lambda = get_as<double>(v, key);
        else if (key == "delta") cfg.delta = get_as<double>(v, key);
        else if (key == "ridge_rel") cfg.ridge_rel = get_as<double>(v, key);
        else if (key == "snr_db") {
            cfg.snr_db = v.is_array() ? get_as<std::vector<double>>(v, key)
                                      : std::vector<double>{get_as<double>(v, key)};
        } else if (key == "n_blocks") cfg.n_blocks = get_as<int>(v, key);
        else if (key == "n_trials") cfg.n_trials = get_as<int>(v, key);
        else if (key == "seed") cfg.seed = get_as<std::uint64_t>(v, key);
        else if (key == "decision_directed") cfg.decision_directed = get_as<bool>(v, key);
        else if (key == "maxsinr_iters") cfg.maxsinr_iters = get_as<int>(v, key);
        else if (key == "avg_from_block") cfg.avg_from_block = get_as<int>(v, key);
        else throw Error(ErrorCode::ConfigInvalid, "unknown config key '" + key + "'");
    }
    if (cfg.network.active.empty())
        cfg.network.active.assign(cfg.network.K, true);
    cfg.validate();
    return cfg;
}

inline ScenarioConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw Error(ErrorCode::ConfigInvalid, "cannot open config file '" + path + "'");
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ConfigInvalid, std::string("malformed JSON: ") + e.what());
    }
    return config_from_json(j);
}

} // namespace bidir
