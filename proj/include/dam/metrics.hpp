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

#ifndef DAMLINK_METRICS_HPP
#define DAMLINK_METRICS_HPP

#include <cstdint>
#include <functional>
#include <random>
#include <vector>

#include "dam/channel.hpp"
#include "dam/types.hpp"

namespace dam
{

enum class Scheme
{
    dam,
    sp,
    ofdm,
};

const char *scheme_name(Scheme s);

/// Guard-interval bookkeeping. Single-carrier schemes spend one guard per
/// coherence block (twice the delay spread for delay-aligned transmission,
/// once for strongest-path); OFDM spends one cyclic prefix per symbol.
struct OverheadConfig
{
    long long coherence_samples = 0;  ///< G_c
    int num_subcarriers = 0;          ///< M (OFDM only)
    int n_max = 0;                    ///< max over users of n_k,max

    void validate(Scheme scheme) const;
};

/// Fraction of samples lost to guard intervals for the scheme.
double guard_interval_overhead(Scheme scheme, const OverheadConfig &cfg);

/// Overhead-adjusted sum spectral efficiency in bits/s/Hz.
/// Single carrier: ((G_c - G_sc)/G_c) * sum_k log2(1+sinr_k);
/// OFDM: (1/(M+G_cp)) * sum over the flattened per-(user,sub-carrier) list.
double effective_spectral_efficiency(const std::vector<double> &sinrs, Scheme scheme,
                                     const OverheadConfig &cfg);

struct PaprConfig
{
    int qam_order = 4;            ///< square QAM size (4, 16, 64)
    int num_trials = 200;
    int samples_per_trial = 2048;
    std::uint64_t rng_seed = 1;

    void validate() const;
};

/// One PAPR realization: the per-antenna waveform block plus the analytic
/// per-antenna mean power (computed from the beam coefficients, never
/// estimated from the samples).
struct PaprTrial
{
    MatrixXcd waveform;   ///< antennas x samples
    VectorXd mean_power;  ///< per antenna
};

using PaprSource = std::function<PaprTrial(std::uint64_t trial_seed)>;

struct CcdfCurve
{
    VectorXd thresholds_db;
    VectorXd probability;      ///< P(PAPR > threshold)
    std::vector<double> papr_db;  ///< raw per-trial scheme PAPRs
    int excluded_antennas = 0;
};

/// Unit-average-energy square-QAM stream.
VectorXcd qam_symbols(int length, int order, std::mt19937_64 &rng);

/// Monte-Carlo CCDF of the per-trial scheme PAPR (max over antennas of the
/// per-antenna peak over mean). Zero-power antennas are excluded and counted.
CcdfCurve papr_ccdf(const PaprSource &source, const PaprConfig &cfg,
                    const VectorXd &thresholds_db);

/// Smallest threshold at which the CCDF drops to the given exceedance level.
double ccdf_quantile_db(const CcdfCurve &curve, double exceedance);

/// Matched-beam waveform sources for the three schemes: a fresh channel,
/// matched beams, and fresh QAM streams per trial.
PaprSource dam_papr_source(GeometryConfig geometry, double noise_power, double total_power,
                           int qam_order, int samples_per_trial);
PaprSource sp_papr_source(GeometryConfig geometry, double noise_power, double total_power,
                          int qam_order, int samples_per_trial);
PaprSource ofdm_papr_source(GeometryConfig geometry, double noise_power, double total_power,
                            int qam_order, int num_subcarriers, int samples_per_trial);

} // namespace dam

#endif
