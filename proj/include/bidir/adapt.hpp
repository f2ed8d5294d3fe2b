// SPDX-License-Identifier: Apache-2.0
//
// Adaptive training engine. Beamformers and receive filters are estimated
// directly from pilots, without channel estimation:
//
//  * forward phase: transmitters send pilots through v_k, receiver k solves
//    min ||b_k - g^H Y_k||^2;
//  * backward phase: receivers send pilots through normalize(g_k^*),
//    transmitter k solves min ||<-b_k - v^T <-Y_k||^2, i.e. the forward
//    problem for v^* followed by a conjugation;
//  * the block-recursive variant keeps an exponentially weighted, ridge
//    regularized version of the same objectives across blocks.

#pragma once

#include <optional>
#include <vector>

#include "bidir/maxsinr.hpp"
#include "bidir/phy.hpp"

namespace bidir {

/// Relative ridge used when a plain LS phase is rank deficient:
/// ridge = kDefaultRidgeRel * trace(Y Y^H) / d.
inline constexpr double kDefaultRidgeRel = 1e-6;

enum class Schedule { backward_first, forward_first };

struct TrainingBudget {
    Eigen::Index M = 16;
    int cycles = 1;
    Schedule schedule = Schedule::backward_first;

    long overhead() const { return 2L * static_cast<long>(M) * cycles; }

    void validate(long block_length) const
    {
        if (M < 1 || cycles < 1)
            throw Error(ErrorCode::ConfigInvalid, "training budget needs M >= 1 and cycles >= 1");
        if (overhead() > block_length)
            throw Error(ErrorCode::OverheadExceedsBlock,
                        "2*M*cycles = " + std::to_string(overhead()) + " exceeds L = " + std::to_string(block_length));
    }
};

/// Unnormalized LS weight for one phase. Falls back to a small ridge when the
/// unregularized normal equations are singular.
inline CVec ls_weight(const CMat& y, const CVec& b, double ridge_rel = kDefaultRidgeRel)
{
    try {
        return ls_solve(y, b, 0.0);
    } catch (const Error& e) {
        if (e.code() != ErrorCode::Singular)
            throw;
    }
    const double trace = y.squaredNorm();
    if (!(trace > 0.0))
        throw Error(ErrorCode::ZeroVector, "received block is identically zero");
    return ls_solve(y, b, ridge_rel * trace / static_cast<double>(y.rows()));
}

/// Receive-filter update from one forward phase, scaled to P_max.
inline CVec ls_forward_update(const ReceivedBlock& y, const CVec& pilots, double p_max,
                              double ridge_rel = kDefaultRidgeRel)
{
    return normalize_power(ls_weight(y.samples, pilots, ridge_rel), p_max);
}

/// Beamformer update from one backward phase: v = ((Y Y^H)^{-1} Y b^H)^*, scaled to P_max.
inline CVec ls_backward_update(const ReceivedBlock& y, const CVec& pilots, double p_max,
                               double ridge_rel = kDefaultRidgeRel)
{
    return normalize_power(ls_weight(y.samples, pilots, ridge_rel).conjugate(), p_max);
}

struct BlockOutcome {
    LinkState state;
    long overhead = 0;
    int failed_updates = 0; // per-user phase updates that kept the previous vector
};

namespace detail {

inline void backward_phase(const ChannelRealization& ch, LinkState& s, const TrainingMatrix& pilots,
                           const NetworkConfig& cfg, Rng& rng, double ridge_rel, int& failed)
{
    const auto blocks = synth_backward(ch, reverse_beams_from(s.filters, cfg.P_max), pilots, cfg, rng);
    for (std::size_t k = 0; k < cfg.K; ++k) {
        if (!cfg.is_active(k))
            continue;
        try {
            s.beams[k] = ls_backward_update(blocks[k], pilots.row(k), cfg.P_max, ridge_rel);
        } catch (const Error&) {
            ++failed;
        }
    }
}

inline void forward_phase(const ChannelRealization& ch, LinkState& s, const TrainingMatrix& pilots,
                          const NetworkConfig& cfg, Rng& rng, double ridge_rel, int& failed)
{
    const auto blocks = synth_forward(ch, s.beams, pilots, cfg, rng);
    for (std::size_t k = 0; k < cfg.K; ++k) {
        if (!cfg.is_active(k))
            continue;
        try {
            s.filters[k] = ls_forward_update(blocks[k], pilots.row(k), cfg.P_max, ridge_rel);
        } catch (const Error&) {
            ++failed;
        }
    }
}

} // namespace detail

/// Bi-directional LS training for one coherence block: `cycles` iterations of a
/// backward and a forward phase (in the order given by the schedule).
inline BlockOutcome run_ls_block(const ChannelRealization& ch, const LinkState& state, const TrainingBudget& budget,
                                 const TrainingMatrix& forward_pilots, const TrainingMatrix& backward_pilots,
                                 const NetworkConfig& cfg, Rng& rng, double ridge_rel = kDefaultRidgeRel)
{
    if (budget.M < 1 || budget.cycles < 1)
        throw Error(ErrorCode::ConfigInvalid, "run_ls_block: need M >= 1 and cycles >= 1");
    if (forward_pilots.length() != budget.M || backward_pilots.length() != budget.M)
        throw Error(ErrorCode::DimensionMismatch, "run_ls_block: pilot length differs from M");
    BlockOutcome out{state, budget.overhead(), 0};
    for (int c = 0; c < budget.cycles; ++c) {
        if (budget.schedule == Schedule::backward_first) {
            detail::backward_phase(ch, out.state, backward_pilots, cfg, rng, ridge_rel, out.failed_updates);
            detail::forward_phase(ch, out.state, forward_pilots, cfg, rng, ridge_rel, out.failed_updates);
        } else {
            detail::forward_phase(ch, out.state, forward_pilots, cfg, rng, ridge_rel, out.failed_updates);
            detail::backward_phase(ch, out.state, backward_pilots, cfg, rng, ridge_rel, out.failed_updates);
        }
    }
    return out;
}

/// Receivers-only training with the beams held fixed.
inline BlockOutcome run_forward_only_block(const ChannelRealization& ch, const LinkState& state,
                                           const TrainingMatrix& pilots, const NetworkConfig& cfg, Rng& rng,
                                           double ridge_rel = kDefaultRidgeRel)
{
    BlockOutcome out{state, static_cast<long>(pilots.length()), 0};
    detail::forward_phase(ch, out.state, pilots, cfg, rng, ridge_rel, out.failed_updates);
    return out;
}

/// State of one block-recursive, exponentially weighted LS estimator.
/// After n blocks, w minimizes
///   sum_l lambda^{n-l} ||b^{(l)} - w^H Y^{(l)}||^2 + delta lambda^n ||w||^2
/// and P is the inverse of sum_l lambda^{n-l} Y^{(l)} Y^{(l)H} + delta lambda^n I.
struct RlsState {
    CVec w;
    CMat P;
    double lambda = 1.0;
    double delta = 0.01;
    long n = 0;

    static RlsState initial(Eigen::Index dim, double lambda, double delta)
    {
        if (!(lambda > 0.0 && lambda <= 1.0))
            throw Error(ErrorCode::ConfigInvalid, "forgetting factor must lie in (0, 1]");
        if (!(delta > 0.0))
            throw Error(ErrorCode::ConfigInvalid, "delta must be positive");
        return {CVec::Zero(dim), CMat::Identity(dim, dim) / delta, lambda, delta, 0};
    }
};

/// One block of the recursive LS update.
///
///   K = lambda^{-1} P Y (I + lambda^{-1} Y^H P Y)^{-1}
///   w = w + K (b^H - Y^H w)
///   P = lambda^{-1} P - lambda^{-1} K Y^H P
///
/// The innovation enters with a plus sign; this is the sign under which the
/// recursion reproduces the weighted ridge minimizer.
inline RlsState rls_block_update(const RlsState& st, const CMat& y, const CVec& b)
{
    const Eigen::Index d = st.w.size();
    if (y.rows() != d || st.P.rows() != d || st.P.cols() != d || b.size() != y.cols() || y.cols() < 1)
        throw Error(ErrorCode::DimensionMismatch, "rls_block_update: dimensions disagree");
    const CMat py = st.P * y / st.lambda;              // d x M
    CMat s = y.adjoint() * py;                         // M x M, Hermitian PSD
    s.diagonal().array() += 1.0;
    s = 0.5 * (s + s.adjoint()).eval();
    Eigen::LLT<CMat> llt(s);
    if (llt.info() != Eigen::Success)
        throw Error(ErrorCode::NotPositiveDefinite, "rls_block_update: innovation covariance not PD");
    const CMat gain = llt.solve(py.adjoint()).adjoint(); // d x M, equals py * s^{-1}

    RlsState next = st;
    const CVec innovation = b.conjugate() - y.adjoint() * st.w;
    next.w = st.w + gain * innovation;
    next.P = st.P / st.lambda - gain * py.adjoint();
    next.P = 0.5 * (next.P + next.P.adjoint()).eval();
    next.n = st.n + 1;
    return next;
}

/// Per-user recursive estimators. Transmitter-side states track v^*.
struct RlsBank {
    std::vector<RlsState> receivers;
    std::vector<RlsState> transmitters;

    static RlsBank initial(const NetworkConfig& cfg, double lambda, double delta)
    {
        RlsBank bank;
        for (std::size_t k = 0; k < cfg.K; ++k) {
            bank.receivers.push_back(RlsState::initial(cfg.N_R, lambda, delta));
            bank.transmitters.push_back(RlsState::initial(cfg.N_T, lambda, delta));
        }
        return bank;
    }
};

struct RlsBlockOutcome {
    LinkState state;
    RlsBank bank;
    long overhead = 0;
    int failed_updates = 0;
};

/// One bi-directional RLS iteration: backward phase through the normalized
/// current receive filters, then forward phase through the new beams.
inline RlsBlockOutcome run_rls_block(const ChannelRealization& ch, const LinkState& state, const RlsBank& bank,
                                     const TrainingMatrix& forward_pilots, const TrainingMatrix& backward_pilots,
                                     const NetworkConfig& cfg, Rng& rng)
{
    if (forward_pilots.length() != backward_pilots.length())
        throw Error(ErrorCode::DimensionMismatch, "run_rls_block: forward and backward pilot lengths differ");
    RlsBlockOutcome out{state, bank, 2L * static_cast<long>(forward_pilots.length()), 0};

    const auto back = synth_backward(ch, reverse_beams_from(out.state.filters, cfg.P_max), backward_pilots, cfg, rng);
    for (std::size_t k = 0; k < cfg.K; ++k) {
        if (!cfg.is_active(k))
            continue;
        out.bank.transmitters[k] = rls_block_update(out.bank.transmitters[k], back[k].samples, backward_pilots.row(k));
        try {
            out.state.beams[k] = normalize_power(out.bank.transmitters[k].w.conjugate(), cfg.P_max);
        } catch (const Error&) {
            ++out.failed_updates;
        }
    }

    const auto fwd = synth_forward(ch, out.state.beams, forward_pilots, cfg, rng);
    for (std::size_t k = 0; k < cfg.K; ++k) {
        if (!cfg.is_active(k))
            continue;
        out.bank.receivers[k] = rls_block_update(out.bank.receivers[k], fwd[k].samples, forward_pilots.row(k));
        try {
            out.state.filters[k] = normalize_power(out.bank.receivers[k].w, cfg.P_max);
        } catch (const Error&) {
            ++out.failed_updates;
        }
    }
    return out;
}

/// Re-estimates g_k from detected binary data: b_hat(i) = sign(Re(g^H y(i))),
/// then the forward LS update with b_hat as pilots. Returns g unchanged when
/// the filter is zero or the refit fails.
inline CVec decision_directed_refresh(const ReceivedBlock& data, const CVec& g, double p_max,
                                      double ridge_rel = kDefaultRidgeRel)
{
    if (g.norm() < 1e-15 || data.samples.cols() == 0)
        return g;
    const CVec soft = data.samples.adjoint() * g; // conj(g^H y(i))
    CVec detected(soft.size());
    for (Eigen::Index i = 0; i < soft.size(); ++i)
        detected(i) = soft(i).real() >= 0.0 ? 1.0 : -1.0;
    try {
        return ls_forward_update(data, detected, p_max, ridge_rel);
    } catch (const Error&) {
        return g;
    }
}

/// Real BPSK data block, K x length.
inline TrainingMatrix bpsk_data(std::size_t K, Eigen::Index length, Rng& rng)
{
    std::bernoulli_distribution coin(0.5);
    TrainingMatrix t{CMat(static_cast<Eigen::Index>(K), length)};
    for (Eigen::Index k = 0; k < t.symbols.rows(); ++k)
        for (Eigen::Index i = 0; i < length; ++i)
            t.symbols(k, i) = coin(rng) ? 1.0 : -1.0;
    return t;
}

/// Limit of one bi-directional iteration with unlimited training: the beams take
/// the Max-SINR transmit update for the current filters, then the filters take
/// the Max-SINR receive update for the new beams.
inline LinkState genie_block_update(const ChannelRealization& ch, const LinkState& state, const NetworkConfig& cfg)
{
    LinkState s = state;
    s.beams = update_transmitters(ch, s, cfg);
    s.filters = update_receivers(ch, s, cfg);
    return s;
}

/// Sum rate of the given beams when every receiver uses its SINR-optimal filter.
inline double matched_sum_rate(const ChannelRealization& ch, const std::vector<CVec>& beams,
                               const NetworkConfig& cfg)
{
    LinkState s{beams, {}};
    s.filters.assign(ch.users(), CVec::Zero(cfg.N_R));
    s.filters = update_receivers(ch, s, cfg);
    return sum_rate(ch, s, cfg);
}

} // namespace bidir
