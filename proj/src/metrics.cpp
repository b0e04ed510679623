// SPDX-License-Identifier: Apache-2.0
//
// damlink - multi-user single-carrier delay alignment modulation toolkit
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "dam/metrics.hpp"

#include <unsupported/Eigen/FFT>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "dam/beamforming.hpp"
#include "dam/benchmarks.hpp"
#include "dam/signal.hpp"

namespace dam
{

const char *scheme_name(Scheme s)
{
    switch (s)
    {
    case Scheme::dam: return "DAM";
    case Scheme::sp: return "SP";
    case Scheme::ofdm: return "OFDM";
    }
    return "unknown";
}

void OverheadConfig::validate(Scheme scheme) const
{
    if (n_max < 0)
        throw config_error("OverheadConfig: negative delay spread");
    if (scheme == Scheme::ofdm)
    {
        if (num_subcarriers <= n_max)
            throw config_error("OverheadConfig: sub-carrier count must exceed the delay spread");
    }
    else
    {
        if (coherence_samples < 2LL * n_max || coherence_samples < 1)
            throw config_error("OverheadConfig: coherence block shorter than the guard interval");
    }
}

double guard_interval_overhead(Scheme scheme, const OverheadConfig &cfg)
{
    cfg.validate(scheme);
    switch (scheme)
    {
    case Scheme::dam:
        return static_cast<double>(2 * cfg.n_max) / static_cast<double>(cfg.coherence_samples);
    case Scheme::sp:
        return static_cast<double>(cfg.n_max) / static_cast<double>(cfg.coherence_samples);
    case Scheme::ofdm:
        return static_cast<double>(cfg.n_max) / static_cast<double>(cfg.n_max + cfg.num_subcarriers);
    }
    return 0.;
}

double effective_spectral_efficiency(const std::vector<double> &sinrs, Scheme scheme,
                                     const OverheadConfig &cfg)
{
    cfg.validate(scheme);
    double sum = 0.;
    for (double g : sinrs)
    {
        if (g < 0.)
            throw config_error("effective_spectral_efficiency: negative SINR");
        sum += std::log2(1. + g);
    }

    if (scheme == Scheme::ofdm)
        return sum / (cfg.num_subcarriers + cfg.n_max);

    const double guard = (scheme == Scheme::dam) ? 2. * cfg.n_max : 1. * cfg.n_max;
    return (cfg.coherence_samples - guard) / cfg.coherence_samples * sum;
}

void PaprConfig::validate() const
{
    const int side = static_cast<int>(std::lround(std::sqrt(double(qam_order))));
    if (side * side != qam_order || qam_order < 4)
        throw config_error("PaprConfig: QAM order must be a perfect square >= 4");
    if (num_trials < 1)
        throw config_error("PaprConfig: need at least one trial");
    if (samples_per_trial < 1)
        throw config_error("PaprConfig: need at least one sample per trial");
}

VectorXcd qam_symbols(int length, int order, std::mt19937_64 &rng)
{
    const int side = static_cast<int>(std::lround(std::sqrt(double(order))));
    // average energy of the +/-1, +/-3, ... grid: 2 (side^2 - 1) / 3
    const double scale = std::sqrt(3. / (2. * (side * side - 1.)));
    std::uniform_int_distribution<int> pick(0, side - 1);
    VectorXcd s(length);
    for (int i = 0; i < length; i++)
    {
        const double re = 2 * pick(rng) - side + 1;
        const double im = 2 * pick(rng) - side + 1;
        s(i) = scale * cplx(re, im);
    }
    return s;
}

CcdfCurve papr_ccdf(const PaprSource &source, const PaprConfig &cfg,
                    const VectorXd &thresholds_db)
{
    cfg.validate();
    if (thresholds_db.size() < 1)
        throw config_error("papr_ccdf: empty threshold grid");

    CcdfCurve curve;
    curve.thresholds_db = thresholds_db;
    curve.papr_db.reserve(cfg.num_trials);

    for (int t = 0; t < cfg.num_trials; t++)
    {
        const PaprTrial trial = source(cfg.rng_seed + static_cast<std::uint64_t>(t));
        const int mt = static_cast<int>(trial.waveform.rows());
        if (trial.mean_power.size() != mt)
            throw contract_error("papr_ccdf: mean power length mismatch");

        double worst = 0.;
        bool any = false;
        for (int a = 0; a < mt; a++)
        {
            if (!(trial.mean_power(a) > 0.))
            {
                curve.excluded_antennas++;
                continue;
            }
            const double peak = trial.waveform.row(a).cwiseAbs2().maxCoeff();
            worst = std::max(worst, peak / trial.mean_power(a));
            any = true;
        }
        if (!any)
            throw contract_error("papr_ccdf: every antenna degenerate in a trial");
        curve.papr_db.push_back(10. * std::log10(worst));
    }

    if (curve.excluded_antennas > 0)
        std::fprintf(stderr, "papr_ccdf: excluded %d zero-power antenna(s)\n",
                     curve.excluded_antennas);

    curve.probability.resize(thresholds_db.size());
    for (int i = 0; i < thresholds_db.size(); i++)
    {
        int count = 0;
        for (double v : curve.papr_db)
            if (v > thresholds_db(i))
                count++;
        curve.probability(i) = static_cast<double>(count) / cfg.num_trials;
    }
    return curve;
}

double ccdf_quantile_db(const CcdfCurve &curve, double exceedance)
{
    for (int i = 0; i < curve.thresholds_db.size(); i++)
        if (curve.probability(i) <= exceedance)
            return curve.thresholds_db(i);
    return curve.thresholds_db(curve.thresholds_db.size() - 1);
}

PaprSource dam_papr_source(GeometryConfig geometry, double noise_power, double total_power,
                           int qam_order, int samples_per_trial)
{
    return [=](std::uint64_t trial_seed) {
        GeometryConfig geo = geometry;
        geo.rng_seed = trial_seed;
        const ChannelSet ch = synthesize_channel(geo, noise_power);
        const PathBeamformerSet beams = mrt_per_path(ch, total_power);

        int max_kappa = 0;
        for (const auto &ks : beams.plan.kappa)
            for (int kap : ks)
                max_kappa = std::max(max_kappa, kap);

        std::mt19937_64 rng(trial_seed ^ 0x9e3779b97f4a7c15ULL);
        std::vector<VectorXcd> symbols;
        const int horizon = samples_per_trial + max_kappa;
        for (int k = 0; k < ch.num_users(); k++)
            symbols.push_back(qam_symbols(horizon, qam_order, rng));

        PaprTrial trial;
        // drop the start-up samples where delayed copies are still filling in
        trial.waveform =
            transmit_waveform(beams, symbols, horizon).rightCols(samples_per_trial);
        trial.mean_power = VectorXd::Zero(ch.num_antennas);
        for (int k = 0; k < ch.num_users(); k++)
            for (int l = 0; l < ch.num_paths(k); l++)
                trial.mean_power += beams.path_beam(k, l).cwiseAbs2();
        return trial;
    };
}

PaprSource sp_papr_source(GeometryConfig geometry, double noise_power, double total_power,
                          int qam_order, int samples_per_trial)
{
    return [=](std::uint64_t trial_seed) {
        GeometryConfig geo = geometry;
        geo.rng_seed = trial_seed;
        const ChannelSet ch = synthesize_channel(geo, noise_power);
        const SpResult sp = sp_mrt(ch, total_power);

        std::mt19937_64 rng(trial_seed ^ 0x9e3779b97f4a7c15ULL);
        std::vector<VectorXcd> symbols;
        for (int k = 0; k < ch.num_users(); k++)
            symbols.push_back(qam_symbols(samples_per_trial, qam_order, rng));

        PaprTrial trial;
        trial.waveform = sp_transmit_waveform(sp.beams, symbols, samples_per_trial);
        trial.mean_power = VectorXd::Zero(ch.num_antennas);
        for (const VectorXcd &f : sp.beams.beams)
            trial.mean_power += f.cwiseAbs2();
        return trial;
    };
}

PaprSource ofdm_papr_source(GeometryConfig geometry, double noise_power, double total_power,
                            int qam_order, int num_subcarriers, int samples_per_trial)
{
    return [=](std::uint64_t trial_seed) {
        GeometryConfig geo = geometry;
        geo.rng_seed = trial_seed;
        const ChannelSet ch = synthesize_channel(geo, noise_power);
        const OfdmChannel ofdm = ofdm_channel(ch, num_subcarriers);
        const OfdmResult mrt = ofdm_mrt(ofdm, total_power);

        const int m = num_subcarriers;
        const int cp = ch.max_delay();
        const int num_symbols = std::max(1, samples_per_trial / (m + cp));

        std::mt19937_64 rng(trial_seed ^ 0x9e3779b97f4a7c15ULL);
        Eigen::FFT<double> fft;

        PaprTrial trial;
        trial.waveform.resize(ch.num_antennas, num_symbols * m);
        std::vector<cplx> freq(m), time(m);
        for (int ns = 0; ns < num_symbols; ns++)
        {
            // fresh frequency-domain symbols, then per-antenna IDFT
            MatrixXcd sym(ch.num_users(), m);
            for (int k = 0; k < ch.num_users(); k++)
                sym.row(k) = qam_symbols(m, qam_order, rng).transpose();

            for (int a = 0; a < ch.num_antennas; a++)
            {
                for (int c = 0; c < m; c++)
                {
                    cplx v = 0.;
                    for (int k = 0; k < ch.num_users(); k++)
                        v += mrt.beams.beams[k](a, c) * sym(k, c);
                    freq[c] = v;
                }
                fft.inv(time, freq);
                for (int c = 0; c < m; c++)
                    trial.waveform(a, ns * m + c) = std::sqrt(double(m)) * time[c];
            }
        }

        trial.mean_power = VectorXd::Zero(ch.num_antennas);
        for (int k = 0; k < ch.num_users(); k++)
            trial.mean_power += mrt.beams.beams[k].cwiseAbs2().rowwise().sum();
        trial.mean_power /= m;
        return trial;
    };
}

} // namespace dam
