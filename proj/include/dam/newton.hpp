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

#ifndef DAMLINK_NEWTON_HPP
#define DAMLINK_NEWTON_HPP

#include <memory>
#include <vector>

#include "dam/types.hpp"

namespace dam::newton
{

/// Twice-differentiable convex function of a subset of coordinates.
///
/// `support()` lists the global coordinate indices the function depends on;
/// value and derivatives are evaluated on the compressed sub-vector in that
/// order. A non-finite value marks the point as outside the domain.
class SmoothFunction
{
public:
    virtual ~SmoothFunction() = default;
    virtual const std::vector<int> &support() const = 0;
    virtual double value(const VectorXd &xs) const = 0;
    /// grad and hess are preallocated to the support size and zeroed.
    virtual void derivatives(const VectorXd &xs, VectorXd &grad, MatrixXd &hess) const = 0;
};

/// Convenience base for functions over all coordinates.
class DenseFunction : public SmoothFunction
{
public:
    explicit DenseFunction(int dim)
    {
        support_.resize(dim);
        for (int i = 0; i < dim; i++)
            support_[i] = i;
    }
    const std::vector<int> &support() const override { return support_; }

private:
    std::vector<int> support_;
};

struct Options
{
    double barrier_tol = 1e-9;    ///< target m/t duality bound
    double newton_tol = 1e-11;    ///< Newton decrement^2 / 2 per stage
    double t_initial = 1.0;
    double t_growth = 20.0;
    int max_newton_per_stage = 250;
};

struct Result
{
    VectorXd x;
    double objective = 0.;
    bool converged = false;
    int newton_steps = 0;
};

/// Feasible-start barrier method:
///
///   minimize objective(x) subject to constraints[i](x) <= 0
///
/// x0 must be strictly feasible. Throws config_error otherwise.
Result minimize(const SmoothFunction &objective,
                const std::vector<const SmoothFunction *> &constraints, const VectorXd &x0,
                const Options &opts = {});

} // namespace dam::newton

#endif
