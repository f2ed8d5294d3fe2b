// SPDX-License-Identifier: Apache-2.0
//
// Block-fading K-user MIMO channel: i.i.d. initialization, first-order
// Gauss-Markov evolution between coherence blocks and TDD reciprocity.

#pragma once

#include <cstddef>
#include <vector>

#include "bidir/numerics.hpp"

namespace bidir {

struct FadingParams {
    double alpha = 1.0;          // block-to-block correlation, in [0, 1]
    double entry_variance = 1.0; // per-entry E|h|^2

    void validate() const
    {
        if (!(alpha >= 0.0 && alpha <= 1.0))
            throw Error(ErrorCode::ConfigInvalid, "alpha must lie in [0, 1]");
        if (!(entry_variance > 0.0))
            throw Error(ErrorCode::ConfigInvalid, "entry_variance must be positive");
    }
};

/// All direct and cross channels of one coherence block.
/// H[j][k] is the N_R x N_T channel from transmitter k to receiver j.
struct ChannelRealization {
    std::vector<std::vector<CMat>> H;
    std::size_t block_index = 0;

    std::size_t users() const { return H.size(); }
    const CMat& operator()(std::size_t rx, std::size_t tx) const { return H[rx][tx]; }
    CMat& operator()(std::size_t rx, std::size_t tx) { return H[rx][tx]; }
};

inline ChannelRealization init_channels(Rng& rng, std::size_t K, Eigen::Index n_r, Eigen::Index n_t,
                                        const FadingParams& params)
{
    if (K < 1 || n_r < 1 || n_t < 1)
        throw Error(ErrorCode::DimensionMismatch, "init_channels: K, N_R, N_T must be >= 1");
    ChannelRealization ch;
    ch.H.resize(K);
    for (auto& row : ch.H) {
        row.reserve(K);
        for (std::size_t k = 0; k < K; ++k)
            row.push_back(cgauss(rng, n_r, n_t, params.entry_variance));
    }
    return ch;
}

/// One Gauss-Markov step: H <- alpha H + sqrt(1 - alpha^2) W.
inline ChannelRealization evolve(const ChannelRealization& prev, const FadingParams& params, Rng& rng)
{
    ChannelRealization next = prev;
    next.block_index = prev.block_index + 1;
    if (params.alpha == 1.0)
        return next;
    const double innov = std::sqrt(1.0 - params.alpha * params.alpha);
    for (auto& row : next.H)
        for (auto& h : row) {
            CMat w = cgauss(rng, h.rows(), h.cols(), params.entry_variance);
            h = params.alpha * h + innov * w;
        }
    return next;
}

/// Reverse-link channels under ideal reciprocity: H'[j][k] = H[k][j]^T.
inline ChannelRealization reverse(const ChannelRealization& ch)
{
    const std::size_t K = ch.users();
    ChannelRealization out;
    out.block_index = ch.block_index;
    out.H.resize(K);
    for (std::size_t j = 0; j < K; ++j) {
        out.H[j].reserve(K);
        for (std::size_t k = 0; k < K; ++k)
            out.H[j].push_back(ch.H[k][j].transpose());
    }
    return out;
}

} // namespace bidir
