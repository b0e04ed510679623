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

#include "dam/newton.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>

namespace dam::newton
{

namespace
{

VectorXd gather(const VectorXd &x, const std::vector<int> &idx)
{
    VectorXd xs(idx.size());
    for (std::size_t i = 0; i < idx.size(); i++)
        xs(i) = x(idx[i]);
    return xs;
}

// Barrier objective t*f0 + sum -log(-fi); +inf outside the domain.
double barrier_value(const SmoothFunction &f0, const std::vector<const SmoothFunction *> &cons,
                     const VectorXd &x, double t)
{
    const double v0 = f0.value(gather(x, f0.support()));
    if (!std::isfinite(v0))
        return std::numeric_limits<double>::infinity();
    double phi = t * v0;
    for (const SmoothFunction *c : cons)
    {
        const double v = c->value(gather(x, c->support()));
        if (!std::isfinite(v) || v >= 0.)
            return std::numeric_limits<double>::infinity();
        phi -= std::log(-v);
    }
    return phi;
}

} // namespace

Result minimize(const SmoothFunction &objective,
                const std::vector<const SmoothFunction *> &constraints, const VectorXd &x0,
                const Options &opts)
{
    const int n = static_cast<int>(x0.size());
    const int m = static_cast<int>(constraints.size());

    VectorXd x = x0;
    if (!std::isfinite(barrier_value(objective, constraints, x, 1.)))
        throw config_error("newton::minimize: initial point not strictly feasible");

    Result res;
    res.converged = true;

    VectorXd grad(n);
    MatrixXd hess(n, n);
    VectorXd sub_grad;
    MatrixXd sub_hess;

    double t = opts.t_initial;
    while (true)
    {
        for (int step = 0;; step++)
        {
            if (step >= opts.max_newton_per_stage)
            {
                res.converged = false;
                break;
            }

            grad.setZero();
            hess.setZero();

            // Objective contribution.
            {
                const auto &sup = objective.support();
                const int ns = static_cast<int>(sup.size());
                sub_grad.setZero(ns);
                sub_hess.setZero(ns, ns);
                objective.derivatives(gather(x, sup), sub_grad, sub_hess);
                for (int a = 0; a < ns; a++)
                {
                    grad(sup[a]) += t * sub_grad(a);
                    for (int b = 0; b < ns; b++)
                        hess(sup[a], sup[b]) += t * sub_hess(a, b);
                }
            }

            // Barrier contributions: -log(-fi).
            for (const SmoothFunction *c : constraints)
            {
                const auto &sup = c->support();
                const int ns = static_cast<int>(sup.size());
                const VectorXd xs = gather(x, sup);
                const double v = c->value(xs);
                sub_grad.setZero(ns);
                sub_hess.setZero(ns, ns);
                c->derivatives(xs, sub_grad, sub_hess);
                const double inv = -1. / v;  // v < 0
                for (int a = 0; a < ns; a++)
                {
                    grad(sup[a]) += inv * sub_grad(a);
                    for (int b = 0; b < ns; b++)
                        hess(sup[a], sup[b]) +=
                            inv * sub_hess(a, b) + inv * inv * sub_grad(a) * sub_grad(b);
                }
            }

            // Newton direction with a ridge fallback for flat directions.
            VectorXd dir;
            double ridge = 0.;
            for (int attempt = 0;; attempt++)
            {
                MatrixXd h = hess;
                if (ridge > 0.)
                    h.diagonal().array() += ridge;
                Eigen::LDLT<MatrixXd> ldlt(h);
                dir = ldlt.solve(-grad);
                const double decr = -grad.dot(dir);
                if (ldlt.info() == Eigen::Success && std::isfinite(decr) && decr >= 0.)
                    break;
                if (attempt >= 6)
                {
                    res.converged = false;
                    dir.setZero();
                    break;
                }
                ridge = (ridge == 0.) ? 1e-12 * (1. + hess.diagonal().cwiseAbs().maxCoeff())
                                      : ridge * 100.;
            }

            const double decrement = -grad.dot(dir) / 2.;
            if (!(decrement > opts.newton_tol))
                break;

            // Backtracking line search on the barrier value.
            const double f_cur = barrier_value(objective, constraints, x, t);
            double alpha = 1.;
            bool moved = false;
            for (int ls = 0; ls < 60; ls++)
            {
                const VectorXd xn = x + alpha * dir;
                const double f_new = barrier_value(objective, constraints, xn, t);
                if (f_new <= f_cur - 0.25 * alpha * 2. * decrement)
                {
                    x = xn;
                    moved = true;
                    break;
                }
                alpha *= 0.5;
            }
            res.newton_steps++;
            if (!moved)
                break;
        }

        if (m == 0 || static_cast<double>(m) / t < opts.barrier_tol)
            break;
        t *= opts.t_growth;
    }

    res.x = x;
    res.objective = objective.value(gather(x, objective.support()));
    return res;
}

} // namespace dam::newton
