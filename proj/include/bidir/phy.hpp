// SPDX-License-Identifier: Apache-2.0
//
// Signal synthesis over the interference network and the link metrics
// (per-user SINR, sum rate, overhead-adjusted throughput).

#pragma once

#include <cmath>
#include <numbers>
#include <vector>

#include "bidir/channel.hpp"
#include "bidir/numerics.hpp"

namespace bidir {

struct NetworkConfig {
    std::size_t K = 3;
    Eigen::Index N_T = 2;
    Eigen::Index N_R = 2;
    double P_max = 1.0;
    double noise_var = 1e-3; // sigma_0^2, SNR = 1 / sigma_0^2 at unit power
    std::vector<bool> active; // empty means everyone is active

    bool is_active(std::size_t k) const { return active.empty() || active[k]; }

    std::size_t active_count() const
    {
        std::size_t n = 0;
        for (std::size_t k = 0; k < K; ++k)
            n += is_active(k) ? 1 : 0;
        return n;
    }

    void validate() const
    {
        if (K < 1 || N_T < 1 || N_R < 1)
            throw Error(ErrorCode::ConfigInvalid, "K, N_T and N_R must be >= 1");
        if (!(P_max > 0.0))
            throw Error(ErrorCode::ConfigInvalid, "P_max must be positive");
        if (!(noise_var > 0.0))
            throw Error(ErrorCode::ConfigInvalid, "noise_var must be positive");
        if (!active.empty() && active.size() != K)
            throw Error(ErrorCode::ConfigInvalid, "active mask must have K entries");
        if (active_count() == 0)
            throw Error(ErrorCode::ConfigInvalid, "at least one user must be active");
    }
};

inline double snr_db_to_noise_var(double snr_db) { return std::pow(10.0, -snr_db / 10.0); }

/// Beamformers v_k (dim N_T) and receive filters g_k (dim N_R).
struct LinkState {
    std::vector<CVec> beams;
    std::vector<CVec> filters;
};

/// Random isotropic beams and filters scaled to the power budget.
inline LinkState random_link_state(const NetworkConfig& cfg, Rng& rng)
{
    LinkState s;
    for (std::size_t k = 0; k < cfg.K; ++k)
        s.beams.push_back(normalize_power(cgauss_vec(rng, cfg.N_T, 1.0), cfg.P_max));
    for (std::size_t k = 0; k < cfg.K; ++k)
        s.filters.push_back(normalize_power(cgauss_vec(rng, cfg.N_R, 1.0), cfg.P_max));
    return s;
}

enum class PilotScheme { orthogonal, random_qpsk };

/// K x M pilot block; row k holds b_k.
struct TrainingMatrix {
    CMat symbols;

    Eigen::Index length() const { return symbols.cols(); }
    CVec row(std::size_t k) const { return symbols.row(static_cast<Eigen::Index>(k)).transpose(); }
};

inline TrainingMatrix gen_training(std::size_t K, Eigen::Index M, PilotScheme scheme, Rng& rng)
{
    if (M < 1)
        throw Error(ErrorCode::TooShort, "gen_training: M must be >= 1");
    const auto rows = static_cast<Eigen::Index>(K);
    TrainingMatrix t{CMat(rows, M)};
    if (scheme == PilotScheme::orthogonal) {
        if (M < rows)
            throw Error(ErrorCode::TooShort, "orthogonal pilots need M >= K");
        // Rows of the M-point DFT matrix.
        for (Eigen::Index k = 0; k < rows; ++k)
            for (Eigen::Index i = 0; i < M; ++i) {
                const auto phase_index = (k * i) % M;
                if (phase_index == 0) {
                    t.symbols(k, i) = 1.0;
                } else if (2 * phase_index == M) {
                    t.symbols(k, i) = -1.0;
                } else {
                    const double ang = -2.0 * std::numbers::pi * static_cast<double>(phase_index)
                                       / static_cast<double>(M);
                    t.symbols(k, i) = std::polar(1.0, ang);
                }
            }
        return t;
    }
    std::uniform_int_distribution<int> pick(0, 3);
    const double h = std::numbers::sqrt2 / 2.0;
    for (Eigen::Index k = 0; k < rows; ++k)
        for (Eigen::Index i = 0; i < M; ++i) {
            const int q = pick(rng);
            t.symbols(k, i) = cplx((q & 1) ? -h : h, (q & 2) ? -h : h);
        }
    return t;
}

enum class Direction { forward, backward };

/// Columns are the received vectors y(i), i = 1..M.
struct ReceivedBlock {
    CMat samples;
    Direction direction = Direction::forward;
};

enum class NoiseMode { enabled, disabled };

namespace detail {

// out = A x (or A^T x) with a fixed summation order, so that the forward
// synthesis on a reversed channel and the backward synthesis agree bit for bit.
inline CVec apply(const CMat& a, const CVec& x, bool transpose)
{
    const Eigen::Index rows = transpose ? a.cols() : a.rows();
    const Eigen::Index inner = transpose ? a.rows() : a.cols();
    CVec out = CVec::Zero(rows);
    for (Eigen::Index r = 0; r < rows; ++r) {
        cplx acc = 0.0;
        for (Eigen::Index c = 0; c < inner; ++c)
            acc += (transpose ? a(c, r) : a(r, c)) * x(c);
        out(r) = acc;
    }
    return out;
}

inline std::vector<ReceivedBlock> synthesize(const ChannelRealization& ch, const std::vector<CVec>& tx_vectors,
                                             const TrainingMatrix& pilots, const NetworkConfig& cfg, Rng& rng,
                                             NoiseMode noise, Direction dir)
{
    const std::size_t K = ch.users();
    if (tx_vectors.size() != K || static_cast<std::size_t>(pilots.symbols.rows()) != K)
        throw Error(ErrorCode::DimensionMismatch, "synthesize: need one vector and one pilot row per user");
    const Eigen::Index M = pilots.length();
    const bool backward = dir == Direction::backward;
    std::vector<ReceivedBlock> out;
    out.reserve(K);
    for (std::size_t k = 0; k < K; ++k) {
        // Forward: receiver k hears H[k][j] v_j. Backward: transmitter k hears H[j][k]^T g_j^*.
        const Eigen::Index dim = backward ? ch(0, k).cols() : ch(k, 0).rows();
        // Column j is user j's effective channel into this node; silent users stay zero.
        CMat eff = CMat::Zero(dim, static_cast<Eigen::Index>(K));
        for (std::size_t j = 0; j < K; ++j) {
            if (!cfg.is_active(j))
                continue;
            eff.col(static_cast<Eigen::Index>(j)) =
                backward ? apply(ch(j, k), tx_vectors[j], true) : apply(ch(k, j), tx_vectors[j], false);
        }
        CMat y = eff * pilots.symbols;
        if (noise == NoiseMode::enabled)
            y += cgauss(rng, dim, M, cfg.noise_var);
        out.push_back({std::move(y), dir});
    }
    return out;
}

} // namespace detail

/// Forward pilots: Y_k(:, i) = sum_j H[k][j] v_j b_j(i) + n_k(i).
inline std::vector<ReceivedBlock> synth_forward(const ChannelRealization& ch, const std::vector<CVec>& beams,
                                                const TrainingMatrix& pilots, const NetworkConfig& cfg, Rng& rng,
                                                NoiseMode noise = NoiseMode::enabled)
{
    return detail::synthesize(ch, beams, pilots, cfg, rng, noise, Direction::forward);
}

/// Reverse pilots with each receiver beaming along g_j^*:
/// <-Y_k = sum_j H[j][k]^T g_j^* <-b_j + <-N_k.
/// `reverse_beams` are the conjugated, normalized receive filters.
inline std::vector<ReceivedBlock> synth_backward(const ChannelRealization& ch, const std::vector<CVec>& reverse_beams,
                                                 const TrainingMatrix& pilots, const NetworkConfig& cfg, Rng& rng,
                                                 NoiseMode noise = NoiseMode::enabled)
{
    return detail::synthesize(ch, reverse_beams, pilots, cfg, rng, noise, Direction::backward);
}

/// Reverse-link transmit vectors from receive filters: normalize(g_k^*).
/// A zero filter stays zero (that receiver is silent).
inline std::vector<CVec> reverse_beams_from(const std::vector<CVec>& filters, double p_max)
{
    std::vector<CVec> out;
    out.reserve(filters.size());
    for (const auto& g : filters)
        out.push_back(g.norm() < 1e-15 ? CVec(CVec::Zero(g.size())) : normalize_power(g.conjugate(), p_max));
    return out;
}

/// Per-user SINR with receive filter g_k and interference from the active users.
/// A zero filter yields 0.
inline double sinr(std::size_t k, const ChannelRealization& ch, const LinkState& state, const NetworkConfig& cfg)
{
    const CVec& g = state.filters[k];
    if (g.norm() < 1e-15)
        return 0.0;
    const double signal = std::norm(g.dot(ch(k, k) * state.beams[k]));
    double denom = cfg.noise_var * g.squaredNorm();
    for (std::size_t j = 0; j < ch.users(); ++j) {
        if (j == k || !cfg.is_active(j))
            continue;
        denom += std::norm(g.dot(ch(k, j) * state.beams[j]));
    }
    return signal / denom;
}

/// SINR of the reverse link at transmitter k, with v_k acting as the receiver.
inline double reverse_sinr(std::size_t k, const ChannelRealization& ch, const LinkState& state,
                           const NetworkConfig& cfg)
{
    const CVec& v = state.beams[k];
    if (v.norm() < 1e-15)
        return 0.0;
    const double signal = std::norm(v.dot(ch(k, k).adjoint() * state.filters[k]));
    double denom = cfg.noise_var * v.squaredNorm();
    for (std::size_t j = 0; j < ch.users(); ++j) {
        if (j == k || !cfg.is_active(j))
            continue;
        denom += std::norm(v.dot(ch(j, k).adjoint() * state.filters[j]));
    }
    return signal / denom;
}

inline std::vector<double> all_sinr(const ChannelRealization& ch, const LinkState& state, const NetworkConfig& cfg)
{
    std::vector<double> g(ch.users(), 0.0);
    for (std::size_t k = 0; k < ch.users(); ++k)
        if (cfg.is_active(k))
            g[k] = sinr(k, ch, state, cfg);
    return g;
}

/// Sum of log2(1 + gamma) over the given SINRs.
inline double sum_rate(const std::vector<double>& gammas)
{
    double r = 0.0;
    for (double g : gammas)
        r += std::log2(1.0 + g);
    return r;
}

inline double sum_rate(const ChannelRealization& ch, const LinkState& state, const NetworkConfig& cfg)
{
    double r = 0.0;
    for (std::size_t k = 0; k < ch.users(); ++k)
        if (cfg.is_active(k))
            r += std::log2(1.0 + sinr(k, ch, state, cfg));
    return r;
}

inline double throughput(double rate, long training_symbols_used, long block_length)
{
    if (training_symbols_used < 0)
        throw Error(ErrorCode::OverheadExceedsBlock, "negative overhead");
    if (training_symbols_used > block_length)
        throw Error(ErrorCode::OverheadExceedsBlock, "training overhead exceeds the block length");
    const double keep = static_cast<double>(block_length - training_symbols_used) / static_cast<double>(block_length);
    return rate * keep;
}

} // namespace bidir
