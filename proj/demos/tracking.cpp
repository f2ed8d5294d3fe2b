// SPDX-License-Identifier: Apache-2.0
//
// Tracks a slowly fading 3-user network with bi-directional LS and block RLS,
// both with 4 pilots per phase, and prints the per-block sum rate next to
// Max-SINR on the true channel.

#include <cstdio>

#include "bidir/bidir.hpp"

int main()
{
    using namespace bidir;
    Rng rng(11);
    NetworkConfig net;
    net.noise_var = snr_db_to_noise_var(10.0);
    const FadingParams fading{0.99, 1.0};
    const Eigen::Index M = 4;

    auto ch = init_channels(rng, net.K, net.N_R, net.N_T, fading);
    LinkState ls = random_link_state(net, rng);
    LinkState rls = ls;
    auto bank = RlsBank::initial(net, 0.5, 0.01);

    std::printf("block   LS      RLS     Max-SINR\n");
    for (int b = 1; b <= 40; ++b) {
        ch = evolve(ch, fading, rng);
        const auto f = gen_training(net.K, M, PilotScheme::random_qpsk, rng);
        const auto r = gen_training(net.K, M, PilotScheme::random_qpsk, rng);
        ls = run_ls_block(ch, ls, TrainingBudget{M, 1}, f, r, net, rng).state;
        auto out = run_rls_block(ch, rls, bank, f, r, net, rng);
        rls = out.state;
        bank = std::move(out.bank);
        const double genie = matched_sum_rate(ch, run_maxsinr(ch, ls.beams, net, 50).final_state.beams, net);
        if (b % 4 == 0)
            std::printf("%5d  %6.3f  %6.3f  %6.3f\n", b, sum_rate(ch, ls, net), sum_rate(ch, rls, net), genie);
    }
}
