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

#ifndef DAMLINK_RATE_REGION_HPP
#define DAMLINK_RATE_REGION_HPP

#include <functional>
#include <vector>

#include "dam/benchmarks.hpp"
#include "dam/channel.hpp"
#include "dam/conic.hpp"
#include "dam/signal.hpp"
#include "dam/types.hpp"

namespace dam
{

/// Direction on the rate simplex; entries nonnegative, summing to one.
struct RateProfile
{
    VectorXd alpha;

    void validate() const;
};

/// One Pareto-boundary point: the profile, the achieved scaling R*, the
/// rescored per-user rates of the returned beams, and solver metadata.
struct ParetoPoint
{
    VectorXd alpha;
    double r_star = 0.;
    std::vector<double> achieved_rates;
    bool converged = false;
    socp::Status last_status = socp::Status::numerical_limits;
    int iterations = 0;                   ///< bisection probes or SCA steps
    std::vector<double> objective_trace;  ///< SCA trace (OFDM points)

    // Exactly one of these is populated, depending on the scheme.
    std::vector<VectorXcd> beams_stacked;  ///< DAM: stacked per-path beams
    std::vector<VectorXcd> beams_single;   ///< SP: one beam per user
    std::vector<MatrixXcd> beams_ofdm;     ///< OFDM: per-sub-carrier beams
};

/// Bisection over the rate scaling with an SINR-constrained power
/// minimization probe per step, on the per-path DAM structure.
ParetoPoint dam_pareto_point(const ChannelSet &ch, const RateProfile &profile, double total_power,
                             const SolverSettings &settings = {});

/// Same search with the strongest-path SINR structure (one beam per user).
ParetoPoint sp_pareto_point(const ChannelSet &ch, const RateProfile &profile, double total_power,
                            const SolverSettings &settings = {});

/// Rate-profile point for OFDM via successive convex approximation with
/// slack variables for the per-sub-carrier signal and interference powers.
ParetoPoint ofdm_pareto_point(const OfdmChannel &ofdm, const RateProfile &profile,
                              double power_per_channel_use, const SolverSettings &settings = {});

struct RateRegionTrace
{
    std::vector<ParetoPoint> points;
};

using ParetoPointOp = std::function<ParetoPoint(const RateProfile &)>;

/// Evaluates one Pareto point per profile, preserving grid order.
RateRegionTrace trace_region(const ParetoPointOp &op, const std::vector<RateProfile> &grid);

/// Uniform K=2 simplex grid with the given number of points (endpoints included).
std::vector<RateProfile> two_user_alpha_grid(int num_points);

} // namespace dam

#endif
