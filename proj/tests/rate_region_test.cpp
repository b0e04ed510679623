#include <doctest.h>

#include <cmath>

#include "dam/channel.hpp"
#include "dam/conic.hpp"
#include "dam/rate_region.hpp"
#include "dam/signal.hpp"
#include "oracles.hpp"

using namespace dam;

namespace
{

ChannelSet random_channel(int mt, std::vector<int> paths, std::uint64_t seed, double noise,
                          int delay_max = 8)
{
    GeometryConfig cfg;
    cfg.num_antennas = mt;
    cfg.num_users = static_cast<int>(paths.size());
    cfg.paths_per_user = std::move(paths);
    cfg.delay_max = delay_max;
    cfg.rng_seed = seed;
    return synthesize_channel(cfg, noise);
}

ChannelSet orthogonal_two_user(double g1, double g2, double noise)
{
    ChannelSet ch;
    ch.num_antennas = 2;
    ch.noise_power = noise;
    ch.users.resize(2);
    Path p;
    p.delay = 0;
    p.gain = VectorXcd::Zero(2);
    p.gain(0) = g1;
    ch.users[0].paths = {p};
    p.gain = VectorXcd::Zero(2);
    p.gain(1) = g2;
    ch.users[1].paths = {p};
    return ch;
}

RateProfile profile_of(std::initializer_list<double> vals)
{
    RateProfile p;
    p.alpha = VectorXd(static_cast<int>(vals.size()));
    int i = 0;
    for (double v : vals)
        p.alpha(i++) = v;
    return p;
}

} // namespace

TEST_CASE("dam_pareto_point single user hits the matched-filter bound")
{
    ChannelSet ch = random_channel(4, {1}, 71, 0.4);
    const double p = 2.;
    auto point = dam_pareto_point(ch, profile_of({1.}), p);
    REQUIRE(point.converged);
    const double cap = std::log2(1. + p * ch.users[0].paths[0].gain.squaredNorm() / 0.4);
    CHECK(point.r_star == doctest::Approx(cap).epsilon(2e-3));
    CHECK(point.achieved_rates[0] >= point.alpha(0) * point.r_star - 1e-4);
}

TEST_CASE("dam_pareto_point degenerate profile recovers the single-user rate")
{
    ChannelSet ch = random_channel(4, {1, 1}, 72, 0.3);
    const double p = 1.5;
    auto point = dam_pareto_point(ch, profile_of({1., 0.}), p);
    REQUIRE(point.converged);
    const double cap = std::log2(1. + p * ch.users[0].paths[0].gain.squaredNorm() / 0.3);
    CHECK(point.r_star == doctest::Approx(cap).epsilon(2e-3));
    // the silent user gets a zero beam
    CHECK(point.beams_stacked[1].norm() == 0.);
}

TEST_CASE("dam_pareto_point all-zero profile is rejected")
{
    ChannelSet ch = random_channel(4, {1, 1}, 73, 1.);
    RateProfile bad;
    bad.alpha = VectorXd::Zero(2);
    CHECK_THROWS_AS(dam_pareto_point(ch, bad, 1.), config_error);
}

TEST_CASE("dam_pareto_point equal profile on orthogonal channels matches a power sweep")
{
    ChannelSet ch = orthogonal_two_user(1.4, 0.9, 0.25);
    const double p = 2.;
    auto point = dam_pareto_point(ch, profile_of({0.5, 0.5}), p);
    REQUIRE(point.converged);

    // sweep oracle: split the power, each user is a clean matched channel
    const double g1 = ch.users[0].paths[0].gain.squaredNorm() / ch.noise_power;
    const double g2 = ch.users[1].paths[0].gain.squaredNorm() / ch.noise_power;
    double best = 0.;
    const int n = 20000;
    for (int i = 0; i <= n; i++)
    {
        const double p1 = p * i / n;
        const double r = 2. * std::min(std::log2(1. + p1 * g1), std::log2(1. + (p - p1) * g2));
        best = std::max(best, r);
    }
    CHECK(point.r_star == doctest::Approx(best).epsilon(3e-3));
}

TEST_CASE("dam_pareto_point bisection certificate")
{
    ChannelSet ch = random_channel(6, {2, 2}, 74, 0.1);
    const double p = 1.;
    SolverSettings settings;
    auto point = dam_pareto_point(ch, profile_of({0.5, 0.5}), p, settings);
    REQUIRE(point.converged);

    const auto bank = effective_channel_bank(ch);
    const auto probe = [&](double rate) {
        std::vector<double> targets = {std::exp2(0.5 * rate) - 1., std::exp2(0.5 * rate) - 1.};
        return solve_power_min_socp(make_socp_instance(ch, bank, targets), settings);
    };

    auto at_star = probe(point.r_star);
    CHECK(at_star.solved());
    CHECK(at_star.total_power <= p * (1. + 1e-6));

    auto above = probe(point.r_star * (1. + settings.bisection_epsilon));
    const bool over_budget = above.solved() && above.total_power > p;
    const bool infeasible = !above.solved();
    CHECK((over_budget || infeasible));

    // achieved rates match the profile share of R*
    for (int k = 0; k < 2; k++)
        CHECK(point.achieved_rates[k] >= 0.5 * point.r_star - 1e-3);
}

TEST_CASE("sp_pareto_point relations to the DAM point")
{
    SUBCASE("one path total: SP and DAM coincide")
    {
        ChannelSet ch = random_channel(4, {1}, 75, 0.5);
        auto dam_pt = dam_pareto_point(ch, profile_of({1.}), 1.);
        auto sp_pt = sp_pareto_point(ch, profile_of({1.}), 1.);
        CHECK(sp_pt.r_star == doctest::Approx(dam_pt.r_star).epsilon(5e-3));
    }
    SUBCASE("two paths: SP cannot beat DAM")
    {
        ChannelSet ch = random_channel(4, {2}, 76, 0.2);
        auto dam_pt = dam_pareto_point(ch, profile_of({1.}), 1.);
        auto sp_pt = sp_pareto_point(ch, profile_of({1.}), 1.);
        CHECK(sp_pt.r_star <= dam_pt.r_star + 1e-3);
    }
    SUBCASE("degenerate profile")
    {
        ChannelSet ch = random_channel(4, {1, 2}, 77, 0.3);
        auto point = sp_pareto_point(ch, profile_of({1., 0.}), 1.);
        REQUIRE(point.converged);
        const double cap =
            std::log2(1. + ch.users[0].paths[0].gain.squaredNorm() / 0.3);
        CHECK(point.r_star == doctest::Approx(cap).epsilon(2e-3));
    }
}

TEST_CASE("ofdm_pareto_point single user approaches water-filling capacity")
{
    ChannelSet ch = random_channel(3, {2}, 78, 0.15, 4);
    OfdmChannel ofdm = ofdm_channel(ch, 8);
    const double p = 1.;

    auto point = ofdm_pareto_point(ofdm, profile_of({1.}), p);

    // independent water-filling oracle over the per-sub-carrier gains
    std::vector<double> inverse_gains;
    for (int c = 0; c < 8; c++)
        inverse_gains.push_back(ofdm.subcarrier_noise_power /
                                ofdm.freq[0].col(c).squaredNorm());
    const auto alloc = water_fill(inverse_gains, 8 * p);
    double cap = 0.;
    for (int c = 0; c < 8; c++)
        cap += std::log2(1. + alloc[c] / inverse_gains[c]);
    cap /= 8.;

    CHECK(point.r_star == doctest::Approx(cap).epsilon(0.01));
    for (std::size_t i = 1; i < point.objective_trace.size(); i++)
        CHECK(point.objective_trace[i] >= point.objective_trace[i - 1] - 1e-8);
}

TEST_CASE("ofdm_pareto_point flat single-carrier degenerate case")
{
    ChannelSet ch = random_channel(3, {1}, 79, 0.4, 0);
    OfdmChannel ofdm = ofdm_channel(ch, 1);
    const double p = 1.2;
    auto point = ofdm_pareto_point(ofdm, profile_of({1.}), p);
    const double cap = std::log2(1. + p * ch.users[0].paths[0].gain.squaredNorm() / 0.4);
    CHECK(point.r_star == doctest::Approx(cap).epsilon(1e-3));
}

TEST_CASE("ofdm_pareto_point orthogonal flat channels match a sweep")
{
    ChannelSet ch = orthogonal_two_user(1.2, 0.8, 0.2);
    OfdmChannel ofdm = ofdm_channel(ch, 4);
    const double p = 1.5;
    auto point = ofdm_pareto_point(ofdm, profile_of({0.5, 0.5}), p);

    const double g1 = ch.users[0].paths[0].gain.squaredNorm() / ch.noise_power;
    const double g2 = ch.users[1].paths[0].gain.squaredNorm() / ch.noise_power;
    double best = 0.;
    const int n = 20000;
    for (int i = 0; i <= n; i++)
    {
        const double x = static_cast<double>(i) / n;
        const double r =
            2. * std::min(std::log2(1. + x * p * g1), std::log2(1. + (1. - x) * p * g2));
        best = std::max(best, r);
    }
    CHECK(point.r_star == doctest::Approx(best).epsilon(0.01));

    // budget respected
    double used = 0.;
    for (const auto &d : point.beams_ofdm)
        used += d.squaredNorm();
    CHECK(used <= 4 * p * (1. + 1e-6));
}

TEST_CASE("DAM dominates SP on matched instances and profiles")
{
    for (std::uint64_t seed = 0; seed < 4; seed++)
    {
        ChannelSet ch = random_channel(6, {2, 2}, 90 + seed, 0.15);
        for (double a : {0.3, 0.5, 0.7})
        {
            auto dam_pt = dam_pareto_point(ch, profile_of({a, 1. - a}), 1.);
            auto sp_pt = sp_pareto_point(ch, profile_of({a, 1. - a}), 1.);
            CHECK(dam_pt.r_star >= sp_pt.r_star - 1e-3);
        }
    }
}

TEST_CASE("trace_region grids")
{
    ChannelSet ch = random_channel(4, {1, 1}, 80, 0.3);
    const double p = 1.;
    const auto op = [&](const RateProfile &a) { return dam_pareto_point(ch, a, p); };

    SUBCASE("three-point grid endpoints are single-user rates")
    {
        auto grid = two_user_alpha_grid(3);
        auto trace = trace_region(op, grid);
        REQUIRE(trace.points.size() == 3);
        const double cap0 =
            std::log2(1. + p * ch.users[0].paths[0].gain.squaredNorm() / 0.3);
        const double cap1 =
            std::log2(1. + p * ch.users[1].paths[0].gain.squaredNorm() / 0.3);
        CHECK(trace.points[0].r_star == doctest::Approx(cap0).epsilon(2e-3));
        CHECK(trace.points[2].r_star == doctest::Approx(cap1).epsilon(2e-3));
    }
    SUBCASE("finer grids contain the coarse points and trade off monotonically")
    {
        auto grid = two_user_alpha_grid(5);
        CHECK(grid[0].alpha(0) == 1.);
        CHECK(grid[2].alpha(0) == doctest::Approx(0.5));
        CHECK(grid[4].alpha(1) == 1.);

        auto trace = trace_region(op, grid);
        // as alpha_1 grows, r_1 non-increasing and r_2 non-decreasing
        for (std::size_t i = 1; i < trace.points.size(); i++)
        {
            CHECK(trace.points[i].achieved_rates[0] <=
                  trace.points[i - 1].achieved_rates[0] + 1e-3);
            CHECK(trace.points[i].achieved_rates[1] >=
                  trace.points[i - 1].achieved_rates[1] - 1e-3);
        }
    }
}
