#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "dam/metrics.hpp"

using namespace dam;

TEST_CASE("guard interval overhead reference values")
{
    OverheadConfig cfg;
    cfg.coherence_samples = 128000;
    cfg.num_subcarriers = 512;
    cfg.n_max = 80;

    // 2*80/128000 = 0.125% and 80/592
    CHECK(guard_interval_overhead(Scheme::dam, cfg) == doctest::Approx(0.00125).epsilon(1e-12));
    CHECK(guard_interval_overhead(Scheme::sp, cfg) == doctest::Approx(0.000625).epsilon(1e-12));
    CHECK(guard_interval_overhead(Scheme::ofdm, cfg) ==
          doctest::Approx(80. / 592.).epsilon(1e-12));
}

TEST_CASE("effective spectral efficiency formulas")
{
    OverheadConfig cfg;
    cfg.coherence_samples = 128000;
    cfg.num_subcarriers = 512;
    cfg.n_max = 80;

    SUBCASE("single-carrier factor")
    {
        // (128000 - 160)/128000 = 0.99875
        const std::vector<double> sinrs = {1., 3.};
        const double sum = std::log2(2.) + std::log2(4.);
        CHECK(effective_spectral_efficiency(sinrs, Scheme::dam, cfg) ==
              doctest::Approx(0.99875 * sum).epsilon(1e-12));
        CHECK(effective_spectral_efficiency(sinrs, Scheme::sp, cfg) ==
              doctest::Approx((1. - 0.000625) * sum).epsilon(1e-12));
    }
    SUBCASE("ofdm prefactor is 1/(M + G_cp)")
    {
        const std::vector<double> sinrs(512, 1.);  // one user, flat unit SINR
        CHECK(effective_spectral_efficiency(sinrs, Scheme::ofdm, cfg) ==
              doctest::Approx(512. / 592.).epsilon(1e-12));
    }
    SUBCASE("zero SINRs give zero")
    {
        CHECK(effective_spectral_efficiency({0., 0., 0.}, Scheme::dam, cfg) == 0.);
    }
    SUBCASE("invalid configs are rejected")
    {
        OverheadConfig bad = cfg;
        bad.coherence_samples = 100;  // < 2 n_max
        CHECK_THROWS_AS(effective_spectral_efficiency({1.}, Scheme::dam, bad), config_error);
        bad = cfg;
        bad.num_subcarriers = 64;  // <= n_max
        CHECK_THROWS_AS(effective_spectral_efficiency({1.}, Scheme::ofdm, bad), config_error);
    }
}

TEST_CASE("qam symbols have unit average energy")
{
    std::mt19937_64 rng(3);
    for (int order : {4, 16, 64})
    {
        VectorXcd s = qam_symbols(200000, order, rng);
        CHECK(s.cwiseAbs2().mean() == doctest::Approx(1.).epsilon(0.01));
    }
}

TEST_CASE("constant-envelope single-antenna transmission has 0 dB PAPR")
{
    GeometryConfig geo;
    geo.num_antennas = 1;
    geo.num_users = 1;
    geo.paths_per_user = {1};
    geo.delay_max = 0;

    PaprConfig cfg;
    cfg.qam_order = 4;
    cfg.num_trials = 20;
    cfg.samples_per_trial = 512;

    VectorXd grid = VectorXd::LinSpaced(25, -1., 5.);
    auto curve = papr_ccdf(dam_papr_source(geo, 1., 1., 4, cfg.samples_per_trial), cfg, grid);
    for (double v : curve.papr_db)
        CHECK(v == doctest::Approx(0.).epsilon(1e-10));
}

TEST_CASE("ccdf curves are monotone and bounded")
{
    GeometryConfig geo;
    geo.num_antennas = 4;
    geo.num_users = 2;
    geo.paths_per_user = {2, 2};
    geo.delay_max = 8;

    PaprConfig cfg;
    cfg.num_trials = 50;
    cfg.samples_per_trial = 256;

    VectorXd grid = VectorXd::LinSpaced(40, 0., 12.);
    auto curve = papr_ccdf(dam_papr_source(geo, 1., 1., 4, cfg.samples_per_trial), cfg, grid);
    REQUIRE(curve.probability.size() == 40);
    for (int i = 0; i < 40; i++)
    {
        CHECK(curve.probability(i) >= 0.);
        CHECK(curve.probability(i) <= 1.);
        if (i > 0)
            CHECK(curve.probability(i) <= curve.probability(i - 1));
    }
}

TEST_CASE("median PAPR orders SP <= DAM <= OFDM")
{
    GeometryConfig geo;
    geo.num_antennas = 8;
    geo.num_users = 2;
    geo.paths_per_user = {3, 3};
    geo.delay_max = 12;

    PaprConfig cfg;
    cfg.num_trials = 200;
    cfg.samples_per_trial = 512;

    VectorXd grid = VectorXd::LinSpaced(131, 0., 13.);
    auto dam_curve = papr_ccdf(dam_papr_source(geo, 1., 1., 4, cfg.samples_per_trial), cfg, grid);
    auto sp_curve = papr_ccdf(sp_papr_source(geo, 1., 1., 4, cfg.samples_per_trial), cfg, grid);
    auto ofdm_curve =
        papr_ccdf(ofdm_papr_source(geo, 1., 1., 4, 64, cfg.samples_per_trial), cfg, grid);

    const auto median = [](std::vector<double> v) {
        std::sort(v.begin(), v.end());
        return v[v.size() / 2];
    };
    const double sp_med = median(sp_curve.papr_db);
    const double dam_med = median(dam_curve.papr_db);
    const double ofdm_med = median(ofdm_curve.papr_db);
    CHECK(sp_med <= dam_med + 0.1);
    CHECK(dam_med <= ofdm_med);
}
