#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "dam/channel.hpp"

using namespace dam;

namespace
{

GeometryConfig basic_cfg(int mt, int users, int paths, std::uint64_t seed)
{
    GeometryConfig cfg;
    cfg.num_antennas = mt;
    cfg.num_users = users;
    cfg.paths_per_user.assign(users, paths);
    cfg.delay_min = 0;
    cfg.delay_max = 80;
    cfg.rng_seed = seed;
    return cfg;
}

} // namespace

TEST_CASE("synthesize_channel produces a valid set at the reference geometry")
{
    // M_t=128, K=3, L=5, delays in [0,80], AoD in [-90,90]
    GeometryConfig cfg = basic_cfg(128, 3, 5, 42);
    ChannelSet ch = synthesize_channel(cfg, 1e-3);
    CHECK_NOTHROW(ch.validate());
    CHECK(ch.num_users() == 3);
    for (int k = 0; k < 3; k++)
    {
        CHECK(ch.num_paths(k) == 5);
        for (const Path &p : ch.users[k].paths)
        {
            CHECK(p.gain.size() == 128);
            CHECK(p.delay >= 0);
            CHECK(p.delay <= 80);
        }
        // strongest-first convention
        for (int l = 1; l < 5; l++)
            CHECK(ch.users[k].paths[0].gain.squaredNorm() >=
                  ch.users[k].paths[l].gain.squaredNorm());
    }
}

TEST_CASE("synthesize_channel minimal case")
{
    GeometryConfig cfg = basic_cfg(1, 1, 1, 7);
    ChannelSet ch = synthesize_channel(cfg, 1.);
    CHECK(ch.num_users() == 1);
    CHECK(ch.num_paths(0) == 1);
    CHECK(ch.users[0].paths[0].gain.size() == 1);
}

TEST_CASE("synthesize_channel is deterministic for a fixed seed")
{
    GeometryConfig cfg = basic_cfg(16, 2, 3, 123);
    ChannelSet a = synthesize_channel(cfg, 1e-2);
    ChannelSet b = synthesize_channel(cfg, 1e-2);
    REQUIRE(a.num_users() == b.num_users());
    for (int k = 0; k < a.num_users(); k++)
    {
        REQUIRE(a.num_paths(k) == b.num_paths(k));
        for (int l = 0; l < a.num_paths(k); l++)
        {
            CHECK(a.users[k].paths[l].delay == b.users[k].paths[l].delay);
            CHECK((a.users[k].paths[l].gain - b.users[k].paths[l].gain).norm() == 0.);
        }
    }
}

TEST_CASE("synthesize_channel rejects impossible delay ranges")
{
    GeometryConfig cfg = basic_cfg(4, 1, 5, 1);
    cfg.delay_max = 3;  // only 4 slots for 5 distinct delays
    CHECK_THROWS_AS(synthesize_channel(cfg, 1.), config_error);
}

TEST_CASE("stack_user_channel concatenates blocks")
{
    ChannelSet ch;
    ch.num_antennas = 2;
    ch.noise_power = 1.;
    ch.users.resize(1);
    Path p1, p2;
    p1.gain = VectorXcd::Zero(2);
    p1.gain << cplx(1, 0), cplx(0, 0);
    p1.delay = 0;
    p2.gain = VectorXcd::Zero(2);
    p2.gain << cplx(0, 0), cplx(1, 0);
    p2.delay = 1;
    ch.users[0].paths = {p1, p2};

    VectorXcd stacked = stack_user_channel(ch, 0);
    REQUIRE(stacked.size() == 4);
    CHECK(stacked(0) == cplx(1, 0));
    CHECK(stacked(1) == cplx(0, 0));
    CHECK(stacked(2) == cplx(0, 0));
    CHECK(stacked(3) == cplx(1, 0));
}

TEST_CASE("stack_user_channel single block and norm identity")
{
    GeometryConfig cfg = basic_cfg(8, 2, 4, 5);
    ChannelSet ch = synthesize_channel(cfg, 1.);

    for (int k = 0; k < 2; k++)
    {
        double sum = 0.;
        for (const Path &p : ch.users[k].paths)
            sum += p.gain.squaredNorm();
        const double stacked = stack_user_channel(ch, k).squaredNorm();
        CHECK(std::abs(stacked - sum) <= 1e-12 * sum);
    }

    GeometryConfig single = basic_cfg(8, 1, 1, 5);
    ChannelSet chs = synthesize_channel(single, 1.);
    CHECK((stack_user_channel(chs, 0) - chs.users[0].paths[0].gain).norm() == 0.);
}

TEST_CASE("ofdm_channel flat response for a single zero-delay path")
{
    ChannelSet ch;
    ch.num_antennas = 2;
    ch.noise_power = 0.5;
    ch.users.resize(1);
    Path p;
    p.gain = VectorXcd(2);
    p.gain << cplx(1, 2), cplx(-0.5, 0.25);
    p.delay = 0;
    ch.users[0].paths = {p};

    const int m = 8;
    OfdmChannel f = ofdm_channel(ch, m);
    CHECK(f.subcarrier_noise_power == doctest::Approx(0.5 / m).epsilon(1e-15));
    for (int i = 0; i < m; i++)
        CHECK((f.freq[0].col(i) - p.gain / std::sqrt(double(m))).norm() < 1e-14);
}

TEST_CASE("ofdm_channel matches a direct two-path expansion")
{
    // delays {0,1}, M=4: h_m = (h1 + h2 e^{-j pi m / 2}) / 2
    ChannelSet ch;
    ch.num_antennas = 2;
    ch.noise_power = 1.;
    ch.users.resize(1);
    Path p1, p2;
    p1.gain = VectorXcd(2);
    p1.gain << cplx(0.3, -0.1), cplx(1.5, 0.5);
    p1.delay = 0;
    p2.gain = VectorXcd(2);
    p2.gain << cplx(-0.2, 0.9), cplx(0.1, 0.1);
    p2.delay = 1;
    ch.users[0].paths = {p1, p2};

    OfdmChannel f = ofdm_channel(ch, 4);
    for (int m = 0; m < 4; m++)
    {
        const cplx rot = std::polar(1.0, -std::numbers::pi * m / 2.);
        const VectorXcd expect = (p1.gain + rot * p2.gain) / 2.;
        CHECK((f.freq[0].col(m) - expect).norm() < 1e-14);
    }
}

TEST_CASE("ofdm_channel Parseval identity")
{
    GeometryConfig cfg = basic_cfg(4, 2, 3, 11);
    cfg.delay_max = 12;
    ChannelSet ch = synthesize_channel(cfg, 1.);
    OfdmChannel f = ofdm_channel(ch, 64);
    for (int k = 0; k < 2; k++)
    {
        double freq_energy = 0.;
        for (int m = 0; m < 64; m++)
            freq_energy += f.freq[k].col(m).squaredNorm();
        double time_energy = 0.;
        for (const Path &p : ch.users[k].paths)
            time_energy += p.gain.squaredNorm();
        CHECK(std::abs(freq_energy - time_energy) <= 1e-10 * time_energy);
    }
}

TEST_CASE("ofdm_channel rejects too few sub-carriers")
{
    GeometryConfig cfg = basic_cfg(2, 1, 2, 3);
    cfg.delay_min = 30;
    cfg.delay_max = 40;
    ChannelSet ch = synthesize_channel(cfg, 1.);
    CHECK_THROWS_AS(ofdm_channel(ch, 16), config_error);
}

TEST_CASE("orthogonality_metric extremes")
{
    ChannelSet ch;
    ch.num_antennas = 2;
    ch.noise_power = 1.;
    ch.users.resize(1);
    Path p1, p2;
    p1.gain = VectorXcd(2);
    p1.gain << cplx(1, 0), cplx(0, 1);
    p1.delay = 0;
    p2 = p1;
    p2.delay = 3;

    SUBCASE("identical paths give 1")
    {
        ch.users[0].paths = {p1, p2};
        CHECK(orthogonality_metric(ch) == doctest::Approx(1.).epsilon(1e-12));
    }
    SUBCASE("orthogonal paths give 0")
    {
        p2.gain << cplx(0, 1), cplx(1, 0);  // conj(1)*i + conj(i)*1 = 0
        ch.users[0].paths = {p1, p2};
        CHECK(orthogonality_metric(ch) == doctest::Approx(0.).epsilon(1e-12));
    }
    SUBCASE("single total path is an error")
    {
        ch.users[0].paths = {p1};
        CHECK_THROWS_AS(orthogonality_metric(ch), config_error);
    }
}

TEST_CASE("orthogonality_metric median decreases with array size")
{
    // median over 100 seeds at K=2, L=2 shrinks as M_t grows
    const std::vector<int> sizes = {16, 64, 256, 1024};
    std::vector<double> medians;
    for (int mt : sizes)
    {
        std::vector<double> vals;
        for (std::uint64_t seed = 0; seed < 100; seed++)
        {
            GeometryConfig cfg = basic_cfg(mt, 2, 2, seed);
            vals.push_back(orthogonality_metric(synthesize_channel(cfg, 1.)));
        }
        std::sort(vals.begin(), vals.end());
        medians.push_back((vals[49] + vals[50]) / 2.);
    }
    for (std::size_t i = 1; i < medians.size(); i++)
        CHECK(medians[i] < medians[i - 1]);
}
