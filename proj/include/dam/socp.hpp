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

#ifndef DAMLINK_SOCP_HPP
#define DAMLINK_SOCP_HPP

#include <vector>

#include "dam/types.hpp"

namespace dam::socp
{

/// Standard-form cone program
///
///   minimize    c'x
///   subject to  A x = b
///               G x + s = h,  s in K
///
/// where K is the product of a nonnegative orthant of dimension n_pos and
/// second-order cones of the listed dimensions, in that order.
struct Problem
{
    VectorXd c;
    MatrixXd A;  ///< may have zero rows
    VectorXd b;
    MatrixXd G;
    VectorXd h;
    int n_pos = 0;
    std::vector<int> soc_dims;

    int num_vars() const { return static_cast<int>(c.size()); }
    int num_eq() const { return static_cast<int>(A.rows()); }
    int cone_size() const;
    void validate() const;
};

enum class Status
{
    optimal,
    near_optimal,        ///< converged only to reduced accuracy
    primal_infeasible,
    dual_infeasible,
    max_iterations,
    numerical_limits,
};

bool is_solved(Status s);

const char *status_name(Status s);

struct Settings
{
    int max_iterations = 100;
    double feastol = 1e-8;
    double abstol = 1e-8;
    double reltol = 1e-8;
    double feastol_reduced = 1e-4;
    double abstol_reduced = 5e-5;
    double reltol_reduced = 5e-5;
    double step_damping = 0.99;
    double static_regularization = 1e-10;
    int refinement_steps = 2;
};

struct Solution
{
    Status status = Status::numerical_limits;
    VectorXd x;
    VectorXd s;
    VectorXd z;
    VectorXd y;
    double primal_objective = 0.;
    double dual_objective = 0.;
    double duality_gap = 0.;
    int iterations = 0;
};

/// Homogeneous self-dual primal-dual interior-point method with
/// Nesterov-Todd scaling and Mehrotra predictor-corrector steps.
/// Detects primal/dual infeasibility through the embedding certificates.
Solution solve(const Problem &prob, const Settings &settings = {});

} // namespace dam::socp

#endif
