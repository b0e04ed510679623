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

#ifndef DAMLINK_SIGNAL_HPP
#define DAMLINK_SIGNAL_HPP

#include <cstdint>
#include <vector>

#include "dam/channel.hpp"
#include "dam/types.hpp"

namespace dam
{

/// Per-path delay pre-compensation. kappa_kl = n_k,max - n_kl, so every
/// delayed copy of user k's stream lands at a common delay n_k,max.
struct DelayPlan
{
    std::vector<std::vector<int>> kappa;  ///< [user][path]
    std::vector<int> max_delay;           ///< n_k,max per user

    int num_users() const { return static_cast<int>(kappa.size()); }
};

/// Stacked per-path transmit beams, one block of num_antennas entries per
/// path, in the same path order as the ChannelSet they were built for.
struct PathBeamformerSet
{
    int num_antennas = 0;
    std::vector<VectorXcd> stacked;  ///< stacked[k] has length num_antennas * L_k
    DelayPlan plan;

    int num_users() const { return static_cast<int>(stacked.size()); }
    /// Beam of path l of user k (block view copy).
    VectorXcd path_beam(int k, int l) const;
    double total_power() const;
};

/// Effective channels grouped by delay difference for one ordered user pair.
///
/// Column c corresponds to delay difference i = delta_min + c and stacks, per
/// path l' of the interfering user, the observer-side path vector h_kl whose
/// delay satisfies n_kl - n_{k'l'} = i (zero block when no path matches).
struct PairBank
{
    MatrixXcd cols;     ///< (num_antennas * L_{k'}) x num_cols
    int delta_min = 0;
    int zero_col = -1;  ///< column index of i = 0, or -1 if out of range

    int num_cols() const { return static_cast<int>(cols.cols()); }
};

/// All ordered user pairs (k, k'): pair(k,k') collects what user k receives
/// through the beams of user k'. For k'=k the i=0 column carries the desired
/// combination and is excluded from the ISI power.
struct EffectiveChannelBank
{
    int num_antennas = 0;
    std::vector<std::vector<PairBank>> pair;  ///< [k][k']

    int num_users() const { return static_cast<int>(pair.size()); }
};

/// Per-user received-power decomposition behind the SINR.
struct SinrReport
{
    double desired_power = 0.;
    double isi_power = 0.;
    double iui_power = 0.;
    double noise_power = 0.;

    double sinr() const { return desired_power / (isi_power + iui_power + noise_power); }
    double interference_ratio() const { return (isi_power + iui_power) / desired_power; }
};

DelayPlan delay_plan(const ChannelSet &ch);

EffectiveChannelBank effective_channel_bank(const ChannelSet &ch);

/// Analytic per-user SINR of a per-path beamformed DAM transmission:
/// desired |hbar_k^H fbar_k|^2, ISI through the i!=0 self-pair columns,
/// IUI through all cross-pair columns, noise sigma^2.
std::vector<SinrReport> dam_sinr(const ChannelSet &ch, const PathBeamformerSet &beams);

/// Same evaluation against a prebuilt bank (avoids rebuilding it per call).
std::vector<SinrReport> dam_sinr(const ChannelSet &ch, const EffectiveChannelBank &bank,
                                 const PathBeamformerSet &beams);

/// Per-antenna transmit sequence x[n] = sum_k sum_l f_kl s_k[n - kappa_kl].
/// Symbols at negative indices are zero. Output is num_antennas x horizon.
MatrixXcd transmit_waveform(const PathBeamformerSet &beams,
                            const std::vector<VectorXcd> &symbols, int horizon);

/// Per-user received sequences y_k[n] = sum_l h_kl^H x[n - n_kl], with
/// optional AWGN of the set's noise power.
std::vector<VectorXcd> received_waveform(const ChannelSet &ch, const MatrixXcd &x,
                                         bool add_noise = false, std::uint64_t noise_seed = 0);

/// Measured single-tap decomposition of a received stream: the power of the
/// best-fit copy of the user's own symbols at delay n_k,max, and everything
/// left over (ISI + IUI, plus noise when it was injected).
struct EmpiricalSinrReport
{
    double desired_power = 0.;
    double residual_power = 0.;
    int sample_count = 0;

    double sinr() const { return desired_power / residual_power; }
    double interference_ratio() const { return residual_power / desired_power; }
};

/// Correlates each user's output against its own stream at delay n_k,max and
/// splits the power into a desired part and a residual. Transient samples at
/// the start are discarded. Requires at least 10^4 usable symbols.
std::vector<EmpiricalSinrReport> empirical_sinr(const std::vector<VectorXcd> &received,
                                                const std::vector<VectorXcd> &symbols,
                                                const ChannelSet &ch,
                                                const PathBeamformerSet &beams);

} // namespace dam

#endif
