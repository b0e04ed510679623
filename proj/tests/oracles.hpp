// Test-only independent oracles. These deliberately avoid the library's own
// computation paths: brute-force scans, enumerations, and direct formula
// expansions used to freeze expected values.

#ifndef DAMLINK_TEST_ORACLES_HPP
#define DAMLINK_TEST_ORACLES_HPP

#include <cmath>
#include <map>
#include <random>
#include <vector>

#include "dam/channel.hpp"
#include "dam/signal.hpp"

namespace oracles
{

using dam::ChannelSet;
using dam::cplx;
using dam::PathBeamformerSet;
using dam::VectorXcd;

// Scalar-form SINR decomposition: double sums over delay differences with an
// explicit scan over path pairs, no effective-channel matrices involved.
struct ScalarSinr
{
    double desired, isi, iui;
};

inline ScalarSinr scalar_form_sinr(const ChannelSet &ch, const PathBeamformerSet &beams, int k)
{
    const auto &obs = ch.users[k].paths;

    // c[j][tau]: net complex coefficient of s_j[n - n_j,max - tau] in y_k[n].
    std::vector<std::map<int, cplx>> taps(ch.num_users());
    for (int j = 0; j < ch.num_users(); j++)
    {
        const auto &src = ch.users[j].paths;
        for (std::size_t l = 0; l < obs.size(); l++)
            for (std::size_t lp = 0; lp < src.size(); lp++)
            {
                const int tau = obs[l].delay - src[lp].delay;
                taps[j][tau] += obs[l].gain.dot(beams.path_beam(j, static_cast<int>(lp)));
            }
    }

    ScalarSinr out{0., 0., 0.};
    for (int j = 0; j < ch.num_users(); j++)
    {
        for (const auto &[tau, coef] : taps[j])
        {
            const double p = std::norm(coef);
            if (j == k && tau == 0)
                out.desired = p;
            else if (j == k)
                out.isi += p;
            else
                out.iui += p;
        }
    }
    return out;
}

// Exhaustive active-set water-filling for short gain lists: tries every
// nonempty subset, keeps the KKT-consistent one.
inline std::vector<double> water_fill_enumeration(const std::vector<double> &inverse_gains,
                                                  double budget)
{
    const int n = static_cast<int>(inverse_gains.size());
    std::vector<double> best;
    for (unsigned mask = 1; mask < (1u << n); mask++)
    {
        int count = 0;
        double sum_inv = 0.;
        for (int i = 0; i < n; i++)
            if (mask & (1u << i))
            {
                count++;
                sum_inv += inverse_gains[i];
            }
        const double level = (budget + sum_inv) / count;

        bool ok = true;
        std::vector<double> alloc(n, 0.);
        for (int i = 0; i < n; i++)
        {
            if (mask & (1u << i))
            {
                alloc[i] = level - inverse_gains[i];
                if (alloc[i] < 0.)
                    ok = false;
            }
            else if (inverse_gains[i] < level)
            {
                ok = false;  // an excluded channel below the water level
            }
        }
        if (ok)
        {
            best = alloc;
            break;
        }
    }
    return best;
}

// Unit-power QAM stream (uniform draws from the normalized square alphabet).
inline VectorXcd qam_stream(int length, int order, std::uint64_t seed)
{
    const int side = static_cast<int>(std::lround(std::sqrt(double(order))));
    double energy = 0.;
    std::vector<cplx> alphabet;
    for (int i = 0; i < side; i++)
        for (int q = 0; q < side; q++)
        {
            const cplx pt(2 * i - side + 1, 2 * q - side + 1);
            alphabet.push_back(pt);
            energy += std::norm(pt);
        }
    const double scale = std::sqrt(alphabet.size() / energy);

    std::mt19937_64 rng(seed);
    std::uniform_int_distribution<int> pick(0, static_cast<int>(alphabet.size()) - 1);
    VectorXcd s(length);
    for (int i = 0; i < length; i++)
        s(i) = scale * alphabet[pick(rng)];
    return s;
}

} // namespace oracles

#endif
