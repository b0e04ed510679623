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

#ifndef DAMLINK_CONIC_HPP
#define DAMLINK_CONIC_HPP

#include <functional>
#include <vector>

#include "dam/signal.hpp"
#include "dam/socp.hpp"
#include "dam/types.hpp"

namespace dam
{

/// Shared numeric knobs for the solvers in this module.
struct SolverSettings
{
    double feasibility_tolerance = 1e-8;
    double duality_gap_tolerance = 1e-8;
    double bisection_epsilon = 1e-3;    ///< relative bisection stop
    double sca_relative_stop = 1e-4;    ///< fractional objective increase stop
    int max_iterations = 50;            ///< SCA iteration cap

    void validate() const;
};

/// SINR-constrained transmit power minimization
///
///   minimize    sum_k |f_k|^2
///   subject to  Im(d_k^H f_k) = 0
///               sqrt(target_k) * |(M_{k,1}^H f_1; ...; M_{k,K}^H f_K; sigma)| <= Re(d_k^H f_k)
///
/// for every user with a positive target, where M_{k,j} collects the
/// interference columns through which beam j leaks into user k's detector.
/// Users with target 0 are dropped from the constraints and get zero beams.
struct SinrConstraintSystem
{
    double noise_sigma = 1.0;               ///< sigma (standard deviation)
    std::vector<double> targets;            ///< gamma_k^D >= 0
    std::vector<VectorXcd> desired;         ///< d_k, length = beam dimension of user k
    /// interference[k][j]: columns m giving |m^H f_j|^2 terms in user k's
    /// denominator. A 0-column matrix means no such terms.
    std::vector<std::vector<MatrixXcd>> interference;

    int num_users() const { return static_cast<int>(desired.size()); }
    void validate() const;
};

struct PowerMinResult
{
    socp::Status status = socp::Status::numerical_limits;
    std::vector<VectorXcd> beams;  ///< per-user beam vectors (zero on failure)
    double total_power = 0.;
    int iterations = 0;

    bool solved() const { return socp::is_solved(status); }
};

/// Solves the system above as a second-order cone program.
PowerMinResult solve_sinr_power_min(const SinrConstraintSystem &sys,
                                    const SolverSettings &settings = {});

/// Power-minimization instance for the per-path DAM structure: desired
/// vectors are the stacked user channels and the interference columns come
/// from the effective-channel bank (i=0 self column excluded).
struct SocpInstance
{
    std::vector<double> targets;            ///< gamma_k^D
    std::vector<VectorXcd> stacked_channels;
    EffectiveChannelBank bank;
    double noise_power = 1.0;               ///< sigma^2
};

SocpInstance make_socp_instance(const ChannelSet &ch, const EffectiveChannelBank &bank,
                                const std::vector<double> &targets);

PowerMinResult solve_power_min_socp(const SocpInstance &inst, const SolverSettings &settings = {});

/// Water-filling over parallel channels: allocation_i = (level - inverse_gain_i)^+
/// with the allocations summing to the budget.
std::vector<double> water_fill(const std::vector<double> &inverse_gains, double budget);

struct ScaResult
{
    VectorXd point;
    std::vector<double> objective_trace;  ///< includes the initial objective
    int iterations = 0;
    bool converged = false;
};

/// Monotone successive-convex-approximation driver. `solve_surrogate` maps
/// the current point to the maximizer of the convex surrogate built at that
/// point; `objective` evaluates the true objective. Stops when the
/// fractional objective increase drops below sca_relative_stop or the
/// iteration cap is reached. Throws contract_error when a step decreases the
/// objective beyond the duality-gap tolerance.
ScaResult sca_drive(const std::function<VectorXd(const VectorXd &)> &solve_surrogate,
                    const std::function<double(const VectorXd &)> &objective, const VectorXd &init,
                    const SolverSettings &settings = {});

} // namespace dam

#endif
