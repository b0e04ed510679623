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

#ifndef DAMLINK_BEAMFORMING_HPP
#define DAMLINK_BEAMFORMING_HPP

#include <vector>

#include "dam/channel.hpp"
#include "dam/conic.hpp"
#include "dam/signal.hpp"
#include "dam/types.hpp"

namespace dam
{

/// All path vectors as columns, user-then-path order (M_t x L_tot).
MatrixXcd channel_matrix(const ChannelSet &ch);

/// Per-path matched beams f_kl = xi_k sqrt(p_k) h_kl with the per-user
/// normalization xi_k = (sum_j |h_kj|^2)^{-1/2}, so |fbar_k|^2 = p_k exactly.
/// Throws config_error when the powers are not all nonnegative.
PathBeamformerSet mrt_asymptotic(const ChannelSet &ch, const std::vector<double> &per_user_power);

/// Per-path matched beams under a single global scaling,
/// f_kl = sqrt(P) h_kl / |H|_F; total power is exactly P.
PathBeamformerSet mrt_per_path(const ChannelSet &ch, double total_power);

/// Closed-form SINR of mrt_per_path beams, evaluated directly from the bank
/// norms (cross-check against the generic evaluator).
std::vector<double> mrt_per_path_sinr(const ChannelSet &ch, const EffectiveChannelBank &bank,
                                      double total_power);

struct ZfResult
{
    PathBeamformerSet beams;
    std::vector<double> per_user_power;  ///< water-filling split P_k
    std::vector<double> per_user_rate;   ///< log2(1 + P_k |q_k|^2 / sigma^2)

    double sum_rate() const;
};

/// Per-path zero-forcing: directions from the right pseudo-inverse of H^H,
/// per-user Cauchy-Schwarz amplitude split and water-filling across users.
/// Requires M_t >= L_tot and a full-column-rank H (infeasible_error otherwise).
ZfResult zf_per_path(const ChannelSet &ch, double total_power);

/// Per-path regularized zero-forcing in amplitude space: fixed ridge
/// directions, power/phase amplitudes optimized by monotone SCA.
struct RzfProblem
{
    int num_antennas = 0;
    double budget = 0.;
    double noise_power = 0.;
    std::vector<VectorXcd> directions;        ///< normalized ridge columns per user (stacked)
    std::vector<VectorXcd> response;          ///< u_k: per-path own-channel responses
    std::vector<std::vector<MatrixXcd>> coupling;  ///< [k][k']: L_{k'} x cols response matrix
    std::vector<int> self_zero_col;           ///< i=0 column inside coupling[k][k]
    DelayPlan plan;

    int num_users() const { return static_cast<int>(response.size()); }
    int paths(int k) const { return static_cast<int>(response[k].size()); }

    /// Point packing: [Re a_1, Im a_1, ..., Re a_K, Im a_K, gbar_1..gbar_K].
    int amp_offset(int k) const;
    int dim() const;
    std::vector<VectorXcd> unpack_amplitudes(const VectorXd &point) const;
    VectorXd pack(const std::vector<VectorXcd> &amps, const VectorXd &gbar) const;

    std::vector<double> sinr(const std::vector<VectorXcd> &amps) const;
    double sum_rate_of_point(const VectorXd &point) const;

    /// Equal power split with phases aligning every desired term real-positive.
    VectorXd initial_point() const;
    /// One SCA step: maximize the concave surrogate built at `point`.
    VectorXd solve_surrogate(const VectorXd &point) const;

    /// Expands amplitudes into stacked per-path beams.
    PathBeamformerSet beams(const std::vector<VectorXcd> &amps) const;
};

/// Ridge directions H (H^H H + eps I)^{-1} with eps = L_tot sigma^2 / P,
/// normalized per column, plus the amplitude-space response data.
RzfProblem make_rzf_problem(const ChannelSet &ch, const EffectiveChannelBank &bank,
                            double total_power);

struct RzfResult
{
    PathBeamformerSet beams;
    std::vector<double> per_user_rate;
    std::vector<double> objective_trace;  ///< sum rate per SCA iteration

    double sum_rate() const;
};

RzfResult rzf_per_path(const ChannelSet &ch, double total_power,
                       const SolverSettings &settings = {});

} // namespace dam

#endif
