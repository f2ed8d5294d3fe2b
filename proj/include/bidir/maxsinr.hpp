// SPDX-License-Identifier: Apache-2.0
//
// Perfect-CSI Max-SINR baseline. Each half-step is the closed-form maximizer
// of a generalized Rayleigh quotient with a rank-one numerator:
// (interference-plus-noise covariance)^{-1} x (desired effective channel).

#pragma once

#include <algorithm>
#include <vector>

#include "bidir/phy.hpp"

namespace bidir {

struct MaxSinrReport {
    LinkState final_state;
    int iterations_run = 0;
    double fixed_point_residual = 0.0; // max direction change of the filters in the last cycle
};

/// SINR-maximizing receive filter for user k given all beams, scaled to P_max.
inline CVec optimal_receiver(std::size_t k, const ChannelRealization& ch, const std::vector<CVec>& beams,
                             const NetworkConfig& cfg)
{
    const CMat& direct = ch(k, k);
    CMat cov = CMat::Identity(direct.rows(), direct.rows()) * cfg.noise_var;
    for (std::size_t j = 0; j < ch.users(); ++j) {
        if (j == k || !cfg.is_active(j))
            continue;
        const CVec h = ch(k, j) * beams[j];
        cov.noalias() += h * h.adjoint();
    }
    return normalize_power(hpd_solve(cov, direct * beams[k]), cfg.P_max);
}

/// SINR-maximizing beamformer for user k on the reverse network, scaled to P_max.
/// Uses sigma_0^2 I of dimension N_T as the reverse-link noise covariance.
inline CVec optimal_transmitter(std::size_t k, const ChannelRealization& ch, const std::vector<CVec>& filters,
                                const NetworkConfig& cfg)
{
    const CMat& direct = ch(k, k);
    CMat cov = CMat::Identity(direct.cols(), direct.cols()) * cfg.noise_var;
    for (std::size_t j = 0; j < ch.users(); ++j) {
        if (j == k || !cfg.is_active(j))
            continue;
        const CVec h = ch(j, k).adjoint() * filters[j];
        cov.noalias() += h * h.adjoint();
    }
    return normalize_power(hpd_solve(cov, direct.adjoint() * filters[k]), cfg.P_max);
}

/// Updates every active receiver from the current beams (Jacobi half-step).
inline std::vector<CVec> update_receivers(const ChannelRealization& ch, const LinkState& s, const NetworkConfig& cfg)
{
    std::vector<CVec> out = s.filters;
    out.resize(ch.users());
    for (std::size_t k = 0; k < ch.users(); ++k)
        if (cfg.is_active(k))
            out[k] = optimal_receiver(k, ch, s.beams, cfg);
    return out;
}

inline std::vector<CVec> update_transmitters(const ChannelRealization& ch, const LinkState& s,
                                             const NetworkConfig& cfg)
{
    std::vector<CVec> out = s.beams;
    for (std::size_t k = 0; k < ch.users(); ++k)
        if (cfg.is_active(k))
            out[k] = optimal_transmitter(k, ch, s.filters, cfg);
    return out;
}

/// Alternates receiver and transmitter updates for `max_iters` full cycles.
inline MaxSinrReport run_maxsinr(const ChannelRealization& ch, const std::vector<CVec>& init_beams,
                                 const NetworkConfig& cfg, int max_iters)
{
    if (max_iters < 1)
        throw Error(ErrorCode::ConfigInvalid, "run_maxsinr: max_iters must be >= 1");
    MaxSinrReport rep;
    rep.final_state.beams = init_beams;
    rep.final_state.filters.assign(ch.users(), CVec::Zero(cfg.N_R));
    for (int it = 0; it < max_iters; ++it) {
        auto filters = update_receivers(ch, rep.final_state, cfg);
        double residual = 0.0;
        for (std::size_t k = 0; k < ch.users(); ++k)
            if (cfg.is_active(k))
                residual = std::max(residual, direction_distance(filters[k], rep.final_state.filters[k]));
        rep.final_state.filters = std::move(filters);
        rep.final_state.beams = update_transmitters(ch, rep.final_state, cfg);
        rep.fixed_point_residual = residual;
        rep.iterations_run = it + 1;
    }
    return rep;
}

} // namespace bidir
