#include <doctest.h>

#include <cmath>
#include <random>

#include "dam/beamforming.hpp"
#include "dam/channel.hpp"
#include "dam/conic.hpp"
#include "dam/signal.hpp"
#include "oracles.hpp"

using namespace dam;

namespace
{

ChannelSet random_channel(int mt, std::vector<int> paths, std::uint64_t seed, double noise,
                          int delay_max = 12)
{
    GeometryConfig cfg;
    cfg.num_antennas = mt;
    cfg.num_users = static_cast<int>(paths.size());
    cfg.paths_per_user = std::move(paths);
    cfg.delay_max = delay_max;
    cfg.rng_seed = seed;
    return synthesize_channel(cfg, noise);
}

} // namespace

TEST_CASE("mrt_asymptotic basics")
{
    SUBCASE("single path reduces to the matched filter")
    {
        ChannelSet ch = random_channel(6, {1}, 31, 1.);
        auto beams = mrt_asymptotic(ch, {2.});
        const VectorXcd &h = ch.users[0].paths[0].gain;
        CHECK((beams.stacked[0] - std::sqrt(2.) * h / h.norm()).norm() < 1e-12);
    }
    SUBCASE("per-user powers are exact")
    {
        ChannelSet ch = random_channel(4, {2, 3}, 32, 1.);
        auto beams = mrt_asymptotic(ch, {1.2, 0.7});
        CHECK(beams.stacked[0].squaredNorm() == doctest::Approx(1.2).epsilon(1e-12));
        CHECK(beams.stacked[1].squaredNorm() == doctest::Approx(0.7).epsilon(1e-12));
        CHECK(beams.total_power() == doctest::Approx(1.9).epsilon(1e-12));
    }
    SUBCASE("equal channel norms make water-filling split evenly")
    {
        ChannelSet ch = random_channel(4, {1, 1}, 33, 0.5);
        ch.users[1].paths[0].gain *=
            ch.users[0].paths[0].gain.norm() / ch.users[1].paths[0].gain.norm();
        const double g = ch.users[0].paths[0].gain.squaredNorm();
        auto split = water_fill({ch.noise_power / g, ch.noise_power / g}, 3.);
        CHECK(split[0] == doctest::Approx(1.5).epsilon(1e-12));
        CHECK(split[1] == doctest::Approx(1.5).epsilon(1e-12));
    }
    SUBCASE("negative power throws")
    {
        ChannelSet ch = random_channel(4, {1}, 34, 1.);
        CHECK_THROWS_AS(mrt_asymptotic(ch, {-1.}), config_error);
    }
}

TEST_CASE("mrt_per_path closed form and budget")
{
    SUBCASE("single user single path")
    {
        ChannelSet ch = random_channel(5, {1}, 35, 0.3);
        const double p = 1.7;
        auto beams = mrt_per_path(ch, p);
        auto rep = dam_sinr(ch, beams);
        CHECK(rep[0].sinr() ==
              doctest::Approx(p * ch.users[0].paths[0].gain.squaredNorm() / 0.3).epsilon(1e-12));
        CHECK(beams.total_power() == doctest::Approx(p).epsilon(1e-12));
    }
    SUBCASE("closed-form SINR equals the generic evaluator on a random instance")
    {
        ChannelSet ch = random_channel(6, {2, 3}, 36, 0.05);
        const double p = 2.4;
        auto bank = effective_channel_bank(ch);
        auto closed = mrt_per_path_sinr(ch, bank, p);
        auto rep = dam_sinr(ch, bank, mrt_per_path(ch, p));
        for (int k = 0; k < 2; k++)
            CHECK(closed[k] == doctest::Approx(rep[k].sinr()).epsilon(1e-10));
    }
    SUBCASE("channel scaling moves the SINR only through the noise term")
    {
        ChannelSet ch = random_channel(4, {2, 2}, 37, 0.1);
        const double p = 1.;
        const double c2 = 4.;  // |c|^2 for c = 2
        auto bank = effective_channel_bank(ch);
        auto rep = dam_sinr(ch, bank, mrt_per_path(ch, p));

        ChannelSet scaled = ch;
        for (auto &u : scaled.users)
            for (auto &pp : u.paths)
                pp.gain *= 2.;
        auto rep2 = dam_sinr(scaled, mrt_per_path(scaled, p));

        for (int k = 0; k < 2; k++)
        {
            // desired and interference scale by |c|^2; only the noise term moves
            const double expect =
                c2 * rep[k].desired_power /
                (c2 * (rep[k].isi_power + rep[k].iui_power) + ch.noise_power);
            CHECK(rep2[k].sinr() == doctest::Approx(expect).epsilon(1e-9));
        }
    }
}

TEST_CASE("zf_per_path exactness and allocations")
{
    SUBCASE("orthogonal columns reduce to matched directions")
    {
        ChannelSet ch;
        ch.num_antennas = 2;
        ch.noise_power = 1.;
        ch.users.resize(2);
        Path p;
        p.delay = 0;
        p.gain = VectorXcd(2);
        p.gain << cplx(2., 0.), cplx(0., 0.);
        ch.users[0].paths = {p};
        p.gain << cplx(0., 0.), cplx(0., 1.5);
        ch.users[1].paths = {p};

        auto res = zf_per_path(ch, 1.);
        for (int k = 0; k < 2; k++)
        {
            const VectorXcd &h = ch.users[k].paths[0].gain;
            const VectorXcd f = res.beams.stacked[k];
            CHECK(std::abs(h.dot(f)) == doctest::Approx(h.norm() * f.norm()).epsilon(1e-12));
        }
    }
    SUBCASE("single user single path rate")
    {
        ChannelSet ch = random_channel(4, {1}, 38, 0.2);
        auto res = zf_per_path(ch, 2.);
        const double expect =
            std::log2(1. + 2. * ch.users[0].paths[0].gain.squaredNorm() / 0.2);
        CHECK(res.per_user_rate[0] == doctest::Approx(expect).epsilon(1e-10));
    }
    SUBCASE("cancellation and amplitude structure on a random instance")
    {
        ChannelSet ch = random_channel(8, {2, 2}, 39, 0.05);
        const double p = 3.;
        auto res = zf_per_path(ch, p);
        auto rep = dam_sinr(ch, res.beams);
        for (int k = 0; k < 2; k++)
        {
            CHECK(rep[k].isi_power + rep[k].iui_power <= 1e-16 * rep[k].desired_power);
            const double snr = rep[k].desired_power / ch.noise_power;
            CHECK(std::log2(1. + snr) == doctest::Approx(res.per_user_rate[k]).epsilon(1e-9));
        }
        CHECK(res.beams.total_power() <= p * (1. + 1e-9));

        // cross inner products vanish
        const MatrixXcd h = channel_matrix(ch);
        int col = 0;
        for (int k = 0; k < 2; k++)
            for (int l = 0; l < 2; l++)
            {
                const VectorXcd f = res.beams.path_beam(k, l);
                for (int c = 0; c < h.cols(); c++)
                {
                    if (c == col)
                        continue;
                    CHECK(std::abs(cplx(h.col(c).dot(f))) <= 1e-9 * h.col(c).norm() * f.norm());
                }
                col++;
            }
    }
    SUBCASE("power split beats a simplex grid search within 0.1%")
    {
        ChannelSet ch = random_channel(9, {2, 2, 2}, 40, 0.4);
        const double p = 2.;
        auto res = zf_per_path(ch, p);

        // independent oracle: fine simplex sweep over the per-user powers
        const MatrixXcd h = channel_matrix(ch);
        const MatrixXcd gram = h.adjoint() * h;
        const MatrixXcd w = gram.llt().solve(h.adjoint()).adjoint();
        std::vector<double> g(3);
        int col = 0;
        for (int k = 0; k < 3; k++)
        {
            double q2 = 0.;
            for (int l = 0; l < 2; l++)
                q2 += 1. / w.col(col + l).squaredNorm();
            g[k] = q2 / ch.noise_power;
            col += 2;
        }
        const auto sum_rate = [&](double p1, double p2, double p3) {
            return std::log2(1. + p1 * g[0]) + std::log2(1. + p2 * g[1]) +
                   std::log2(1. + p3 * g[2]);
        };
        double best = 0.;
        const int n = 80;
        for (int i = 0; i <= n; i++)
            for (int j = 0; j <= n - i; j++)
                best = std::max(best, sum_rate(p * i / n, p * j / n, p * (n - i - j) / n));

        CHECK(res.sum_rate() >= best * (1. - 1e-3));
    }
    SUBCASE("too few antennas is infeasible")
    {
        ChannelSet ch = random_channel(3, {2, 2}, 41, 1.);
        CHECK_THROWS_AS(zf_per_path(ch, 1.), infeasible_error);
    }
}

TEST_CASE("rzf_per_path single user single path reduces to matched filtering")
{
    ChannelSet ch = random_channel(4, {1}, 42, 0.3);
    const double p = 2.;
    auto res = rzf_per_path(ch, p);

    // ridge does not rotate a single column
    const VectorXcd &h = ch.users[0].paths[0].gain;
    const VectorXcd f = res.beams.stacked[0];
    CHECK(std::abs(h.dot(f)) == doctest::Approx(h.norm() * f.norm()).epsilon(1e-9));
    CHECK(res.per_user_rate[0] ==
          doctest::Approx(std::log2(1. + p * h.squaredNorm() / 0.3)).epsilon(1e-4));
}

TEST_CASE("rzf initialization is feasible and the trace is monotone")
{
    ChannelSet ch = random_channel(8, {2, 2, 2}, 43, 0.2);
    const double p = 2.;
    auto bank = effective_channel_bank(ch);
    auto prob = make_rzf_problem(ch, bank, p);

    const VectorXd init = prob.initial_point();
    const auto amps = prob.unpack_amplitudes(init);
    double power = 0.;
    for (const auto &a : amps)
        power += a.squaredNorm();
    CHECK(power == doctest::Approx(p).epsilon(1e-12));

    auto res = rzf_per_path(ch, p);
    for (std::size_t i = 1; i < res.objective_trace.size(); i++)
        CHECK(res.objective_trace[i] >= res.objective_trace[i - 1] - 1e-8);

    // the SCA start is the equal-power coherent point; the result cannot be worse
    CHECK(res.objective_trace.back() >= res.objective_trace.front() - 1e-8);

    // consistency: beams rescored by the generic evaluator give the same rates
    auto rep = dam_sinr(ch, bank, res.beams);
    for (int k = 0; k < 3; k++)
        CHECK(std::log2(1. + rep[k].sinr()) ==
              doctest::Approx(res.per_user_rate[k]).epsilon(1e-8));
}

TEST_CASE("rzf three-way comparison on a fixed instance")
{
    ChannelSet ch = random_channel(16, {2, 2, 2}, 44, 0.02);
    const double p = 1.;

    auto bank = effective_channel_bank(ch);
    auto mrt_rep = dam_sinr(ch, bank, mrt_per_path(ch, p));
    double mrt_rate = 0.;
    for (const auto &r : mrt_rep)
        mrt_rate += std::log2(1. + r.sinr());

    const double zf_rate = zf_per_path(ch, p).sum_rate();
    const double rzf_rate = rzf_per_path(ch, p).sum_rate();

    CHECK(rzf_rate >= std::max(mrt_rate, zf_rate) * (1. - 0.01));
}

TEST_CASE("rzf multi-start stability")
{
    ChannelSet ch = random_channel(8, {2, 2}, 45, 0.1);
    const double p = 1.5;
    auto bank = effective_channel_bank(ch);
    auto prob = make_rzf_problem(ch, bank, p);

    const auto surrogate = [&prob](const VectorXd &x) { return prob.solve_surrogate(x); };
    const auto objective = [&prob](const VectorXd &x) { return prob.sum_rate_of_point(x); };

    auto run_a = sca_drive(surrogate, objective, prob.initial_point(), {});

    // alternative feasible start: random power split, coherent phases
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.2, 1.);
    std::vector<VectorXcd> amps(prob.num_users());
    double total = 0.;
    for (int k = 0; k < prob.num_users(); k++)
    {
        amps[k].resize(prob.paths(k));
        for (int l = 0; l < prob.paths(k); l++)
        {
            const double mag = u(rng);
            total += mag * mag;
            amps[k](l) = std::polar(mag, -std::arg(prob.response[k](l)));
        }
    }
    for (auto &a : amps)
        a *= std::sqrt(p / total);
    const auto s = prob.sinr(amps);
    VectorXd gbar(prob.num_users());
    for (int k = 0; k < prob.num_users(); k++)
        gbar(k) = s[k];

    auto run_b = sca_drive(surrogate, objective, prob.pack(amps, gbar), {});

    CHECK(run_a.objective_trace.back() ==
          doctest::Approx(run_b.objective_trace.back()).epsilon(0.02));
}
