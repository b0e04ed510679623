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

#ifndef DAMLINK_BENCHMARKS_HPP
#define DAMLINK_BENCHMARKS_HPP

#include <cstdint>
#include <vector>

#include "dam/channel.hpp"
#include "dam/conic.hpp"
#include "dam/signal.hpp"
#include "dam/types.hpp"

namespace dam
{

/// One transmit beam per user, aimed at the strongest path; no delay
/// pre-compensation. The stream of user k is detected at delay n_k1.
struct SpBeamformerSet
{
    int num_antennas = 0;
    std::vector<VectorXcd> beams;

    int num_users() const { return static_cast<int>(beams.size()); }
    double total_power() const;
};

/// Strongest-path SINR: only the first (strongest) path carries signal, all
/// other paths of the own user are ISI, every path of other users is IUI.
std::vector<SinrReport> sp_sinr(const ChannelSet &ch, const SpBeamformerSet &beams);

struct SpResult
{
    SpBeamformerSet beams;
    std::vector<double> per_user_rate;
    std::vector<double> objective_trace;  ///< SCA trace (RZF only)

    double sum_rate() const;
};

SpResult sp_mrt(const ChannelSet &ch, double total_power);
/// Nulls every other column of the full path matrix (own non-strongest paths
/// included); needs M_t >= L_tot.
SpResult sp_zf(const ChannelSet &ch, double total_power);
/// Ridge directions restricted to the strongest-path columns; power-only SCA
/// (phases provably do not matter for this scheme).
SpResult sp_rzf(const ChannelSet &ch, double total_power, const SolverSettings &settings = {});

/// x[n] = sum_k f_k s_k[n]; output num_antennas x horizon.
MatrixXcd sp_transmit_waveform(const SpBeamformerSet &beams,
                               const std::vector<VectorXcd> &symbols, int horizon);

/// Single-tap extraction at each user's strongest-path delay n_k1.
std::vector<EmpiricalSinrReport> sp_empirical_sinr(const std::vector<VectorXcd> &received,
                                                   const std::vector<VectorXcd> &symbols,
                                                   const ChannelSet &ch);

/// Per-user, per-sub-carrier frequency-domain beams (num_antennas x M each).
struct OfdmBeamformerSet
{
    int num_antennas = 0;
    std::vector<MatrixXcd> beams;

    int num_users() const { return static_cast<int>(beams.size()); }
    double total_power() const;  ///< sum over users and sub-carriers
};

/// Per-(user, sub-carrier) SINR, desired |h_km^H d_km|^2 over IUI plus the
/// per-sub-carrier noise. Rows are users, columns sub-carriers.
MatrixXd ofdm_sinr(const OfdmChannel &ofdm, const OfdmBeamformerSet &beams);

struct OfdmResult
{
    OfdmBeamformerSet beams;
    std::vector<double> per_user_rate;    ///< (1/M) sum_m log2(1+sinr)
    std::vector<double> objective_trace;  ///< SCA trace (RZF only)

    double sum_rate() const;
};

OfdmResult ofdm_mrt(const OfdmChannel &ofdm, double power_per_channel_use);
/// Per-sub-carrier pseudo-inverse nulling; needs M_t >= K.
OfdmResult ofdm_zf(const OfdmChannel &ofdm, double power_per_channel_use);
/// Per-sub-carrier ridge directions with power-only SCA over all (k, m).
OfdmResult ofdm_rzf(const OfdmChannel &ofdm, double power_per_channel_use,
                    const SolverSettings &settings = {});

} // namespace dam

#endif
