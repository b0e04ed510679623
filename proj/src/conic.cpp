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

#include "dam/conic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace dam
{

void SolverSettings::validate() const
{
    if (!(feasibility_tolerance > 0.) || !(duality_gap_tolerance > 0.) ||
        !(bisection_epsilon > 0.) || !(sca_relative_stop > 0.))
        throw config_error("SolverSettings: tolerances must be positive");
    if (max_iterations < 1)
        throw config_error("SolverSettings: max_iterations must be positive");
}

void SinrConstraintSystem::validate() const
{
    const int nk = num_users();
    if (nk < 1)
        throw config_error("SinrConstraintSystem: no users");
    if (static_cast<int>(targets.size()) != nk ||
        static_cast<int>(interference.size()) != nk)
        throw config_error("SinrConstraintSystem: field length mismatch");
    if (!(noise_sigma > 0.))
        throw config_error("SinrConstraintSystem: noise_sigma must be positive");
    for (int k = 0; k < nk; k++)
    {
        if (targets[k] < 0.)
            throw config_error("SinrConstraintSystem: negative SINR target");
        if (static_cast<int>(interference[k].size()) != nk)
            throw config_error("SinrConstraintSystem: interference row length mismatch");
        for (int j = 0; j < nk; j++)
        {
            const MatrixXcd &mat = interference[k][j];
            if (mat.cols() > 0 && mat.rows() != desired[j].size())
                throw config_error("SinrConstraintSystem: interference block height mismatch");
        }
    }
}

namespace
{

// Real representation offsets: beam k occupies [off_k, off_k + 2 n_k) as
// [Re; Im]; the last variable is the power-bound epigraph t.
struct RealLayout
{
    std::vector<int> offset;
    std::vector<int> cdim;  // complex dimension per user
    int n_beams = 0;        // total real beam coordinates
    int t_index = 0;
};

RealLayout make_layout(const SinrConstraintSystem &sys)
{
    RealLayout lay;
    int off = 0;
    for (const VectorXcd &d : sys.desired)
    {
        lay.offset.push_back(off);
        lay.cdim.push_back(static_cast<int>(d.size()));
        off += 2 * static_cast<int>(d.size());
    }
    lay.n_beams = off;
    lay.t_index = off;
    return lay;
}

// Writes the two real rows of m^H f_j into G starting at row r, negated
// (cone entries satisfy s = h - Gx).
void put_complex_rows(MatrixXd &g, int row, const RealLayout &lay, int j, const VectorXcd &m,
                      double scale)
{
    const int off = lay.offset[j];
    const int nc = lay.cdim[j];
    for (int i = 0; i < nc; i++)
    {
        const double mr = m(i).real();
        const double mi = m(i).imag();
        // Re(m^H f) = mr'u + mi'v ; Im(m^H f) = mr'v - mi'u
        g(row, off + i) = -scale * mr;
        g(row, off + nc + i) = -scale * mi;
        g(row + 1, off + i) = scale * mi;
        g(row + 1, off + nc + i) = -scale * mr;
    }
}

} // namespace

PowerMinResult solve_sinr_power_min(const SinrConstraintSystem &sys, const SolverSettings &settings)
{
    sys.validate();
    settings.validate();

    const int nk = sys.num_users();
    const RealLayout lay = make_layout(sys);

    std::vector<int> active;
    for (int k = 0; k < nk; k++)
        if (sys.targets[k] > 0.)
            active.push_back(k);

    PowerMinResult res;
    res.beams.resize(nk);
    for (int k = 0; k < nk; k++)
        res.beams[k] = VectorXcd::Zero(lay.cdim[k]);

    if (active.empty())
    {
        // No constraints: the optimum is zero power.
        res.status = socp::Status::optimal;
        res.total_power = 0.;
        return res;
    }

    socp::Problem prob;
    const int nvar = lay.n_beams + 1;
    prob.c = VectorXd::Zero(nvar);
    prob.c(lay.t_index) = 1.;

    // Real-rotation equalities Im(d_k^H f_k) = 0.
    prob.A = MatrixXd::Zero(static_cast<int>(active.size()), nvar);
    prob.b = VectorXd::Zero(static_cast<int>(active.size()));
    for (std::size_t r = 0; r < active.size(); r++)
    {
        const int k = active[r];
        const int off = lay.offset[k];
        const int nc = lay.cdim[k];
        for (int i = 0; i < nc; i++)
        {
            prob.A(r, off + i) = -sys.desired[k](i).imag();
            prob.A(r, off + nc + i) = sys.desired[k](i).real();
        }
    }

    // Cone sizes: power epigraph plus one cone per active user.
    std::vector<int> cone_dim;
    cone_dim.push_back(1 + lay.n_beams);
    for (int k : active)
    {
        int cols = 0;
        for (int j = 0; j < nk; j++)
            cols += static_cast<int>(sys.interference[k][j].cols());
        cone_dim.push_back(1 + 2 * cols + 1);
    }
    int mrows = 0;
    for (int d : cone_dim)
        mrows += d;

    prob.G = MatrixXd::Zero(mrows, nvar);
    prob.h = VectorXd::Zero(mrows);
    prob.n_pos = 0;
    prob.soc_dims = cone_dim;

    int row = 0;
    // |(f_1; ...; f_K)| <= t
    prob.G(row, lay.t_index) = -1.;
    row++;
    for (int i = 0; i < lay.n_beams; i++)
        prob.G(row + i, i) = -1.;
    row += lay.n_beams;

    for (int k : active)
    {
        const double root_gamma = std::sqrt(sys.targets[k]);

        // Cone head: Re(d_k^H f_k).
        {
            const int off = lay.offset[k];
            const int nc = lay.cdim[k];
            for (int i = 0; i < nc; i++)
            {
                prob.G(row, off + i) = -sys.desired[k](i).real();
                prob.G(row, off + nc + i) = -sys.desired[k](i).imag();
            }
            row++;
        }

        for (int j = 0; j < nk; j++)
        {
            const MatrixXcd &mat = sys.interference[k][j];
            for (int c = 0; c < mat.cols(); c++)
            {
                put_complex_rows(prob.G, row, lay, j, mat.col(c), root_gamma);
                row += 2;
            }
        }

        prob.h(row) = root_gamma * sys.noise_sigma;
        row++;
    }

    socp::Settings ipm;
    ipm.feastol = settings.feasibility_tolerance;
    ipm.abstol = settings.duality_gap_tolerance;
    ipm.reltol = settings.duality_gap_tolerance;
    const socp::Solution sol = socp::solve(prob, ipm);

    res.status = sol.status;
    res.iterations = sol.iterations;
    if (socp::is_solved(sol.status))
    {
        double power = 0.;
        for (int k = 0; k < nk; k++)
        {
            const int off = lay.offset[k];
            const int nc = lay.cdim[k];
            VectorXcd f(nc);
            for (int i = 0; i < nc; i++)
                f(i) = cplx(sol.x(off + i), sol.x(off + nc + i));
            power += f.squaredNorm();
            res.beams[k] = std::move(f);
        }
        res.total_power = power;
    }
    return res;
}

SocpInstance make_socp_instance(const ChannelSet &ch, const EffectiveChannelBank &bank,
                                const std::vector<double> &targets)
{
    if (static_cast<int>(targets.size()) != ch.num_users())
        throw config_error("make_socp_instance: target count mismatch");
    SocpInstance inst;
    inst.targets = targets;
    inst.bank = bank;
    inst.noise_power = ch.noise_power;
    for (int k = 0; k < ch.num_users(); k++)
        inst.stacked_channels.push_back(stack_user_channel(ch, k));
    return inst;
}

PowerMinResult solve_power_min_socp(const SocpInstance &inst, const SolverSettings &settings)
{
    const int nk = static_cast<int>(inst.stacked_channels.size());
    if (static_cast<int>(inst.targets.size()) != nk || inst.bank.num_users() != nk)
        throw config_error("solve_power_min_socp: inconsistent instance");

    SinrConstraintSystem sys;
    sys.noise_sigma = std::sqrt(inst.noise_power);
    sys.targets = inst.targets;
    sys.desired = inst.stacked_channels;
    sys.interference.assign(nk, std::vector<MatrixXcd>(nk));
    for (int k = 0; k < nk; k++)
    {
        for (int j = 0; j < nk; j++)
        {
            const PairBank &pb = inst.bank.pair[k][j];
            if (j == k)
            {
                // ISI: all delay-difference columns except i = 0.
                MatrixXcd isi(pb.cols.rows(), std::max<int>(pb.num_cols() - 1, 0));
                int c = 0;
                for (int i = 0; i < pb.num_cols(); i++)
                    if (i != pb.zero_col)
                        isi.col(c++) = pb.cols.col(i);
                sys.interference[k][j] = std::move(isi);
            }
            else
            {
                sys.interference[k][j] = pb.cols;
            }
        }
    }
    return solve_sinr_power_min(sys, settings);
}

std::vector<double> water_fill(const std::vector<double> &inverse_gains, double budget)
{
    if (inverse_gains.empty())
        throw config_error("water_fill: empty gain list");
    if (!(budget > 0.))
        throw config_error("water_fill: budget must be positive");
    for (double g : inverse_gains)
        if (!(g > 0.) || !std::isfinite(g))
            throw config_error("water_fill: inverse gains must be finite and positive");

    const int n = static_cast<int>(inverse_gains.size());
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return inverse_gains[a] < inverse_gains[b]; });

    // Shrink the active set until the water level clears its largest member.
    double level = 0.;
    int active = n;
    double prefix = 0.;
    for (int i = 0; i < n; i++)
        prefix += inverse_gains[order[i]];
    for (; active >= 1; active--)
    {
        level = (budget + prefix) / active;
        if (level > inverse_gains[order[active - 1]])
            break;
        prefix -= inverse_gains[order[active - 1]];
    }

    std::vector<double> alloc(n, 0.);
    for (int i = 0; i < active; i++)
        alloc[order[i]] = level - inverse_gains[order[i]];
    return alloc;
}

ScaResult sca_drive(const std::function<VectorXd(const VectorXd &)> &solve_surrogate,
                    const std::function<double(const VectorXd &)> &objective, const VectorXd &init,
                    const SolverSettings &settings)
{
    settings.validate();

    ScaResult res;
    res.point = init;

    double obj = objective(init);
    if (!std::isfinite(obj))
        throw config_error("sca_drive: initial point infeasible");
    res.objective_trace.push_back(obj);

    for (int it = 0; it < settings.max_iterations; it++)
    {
        const VectorXd next = solve_surrogate(res.point);
        const double obj_next = objective(next);
        if (!std::isfinite(obj_next))
            throw contract_error("sca_drive: surrogate produced an infeasible point");

        const double slack = settings.duality_gap_tolerance * std::max(1., std::abs(obj));
        if (obj_next < obj - slack)
            throw contract_error("sca_drive: objective decreased beyond tolerance");

        res.point = next;
        res.objective_trace.push_back(obj_next);
        res.iterations = it + 1;

        const double gain = obj_next - obj;
        obj = obj_next;
        if (gain <= settings.sca_relative_stop * std::max(std::abs(obj), 1e-12))
        {
            res.converged = true;
            break;
        }
    }
    return res;
}

} // namespace dam
