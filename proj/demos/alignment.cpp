// SPDX-License-Identifier: Apache-2.0
//
// Perfect-CSI Max-SINR on one random 3-user 2x2 network at 40 dB.
// Prints per-user SINR and leftover interference-to-noise ratio.

#include <cstdio>

#include "bidir/bidir.hpp"

int main()
{
    using namespace bidir;
    Rng rng(7);
    NetworkConfig net;
    net.noise_var = snr_db_to_noise_var(40.0);

    const auto ch = init_channels(rng, net.K, net.N_R, net.N_T, FadingParams{});
    const auto init = random_link_state(net, rng).beams;

    for (int iters : {1, 10, 100, 500}) {
        auto s = run_maxsinr(ch, init, net, iters).final_state;
        s.filters = update_receivers(ch, s, net);
        std::printf("%4d iterations  sum rate %7.3f bits\n", iters, sum_rate(ch, s, net));
        for (std::size_t k = 0; k < net.K; ++k) {
            double inr = 0.0;
            for (std::size_t j = 0; j < net.K; ++j)
                if (j != k)
                    inr += std::norm(s.filters[k].dot(ch(k, j) * s.beams[j]));
            inr /= net.noise_var * s.filters[k].squaredNorm();
            std::printf("      user %zu  SINR %8.2f dB  INR %8.2f dB\n", k, 10 * std::log10(sinr(k, ch, s, net)),
                        10 * std::log10(inr));
        }
    }
}
