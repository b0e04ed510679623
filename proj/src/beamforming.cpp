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

#include "dam/beamforming.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <limits>
#include <numbers>

#include "dam/newton.hpp"

namespace dam
{

MatrixXcd channel_matrix(const ChannelSet &ch)
{
    MatrixXcd h(ch.num_antennas, ch.total_paths());
    int col = 0;
    for (const UserChannel &u : ch.users)
        for (const Path &p : u.paths)
            h.col(col++) = p.gain;
    return h;
}

PathBeamformerSet mrt_asymptotic(const ChannelSet &ch, const std::vector<double> &per_user_power)
{
    ch.validate();
    if (static_cast<int>(per_user_power.size()) != ch.num_users())
        throw config_error("mrt_asymptotic: power list length mismatch");
    for (double p : per_user_power)
        if (p < 0.)
            throw config_error("mrt_asymptotic: negative per-user power");

    PathBeamformerSet beams;
    beams.num_antennas = ch.num_antennas;
    beams.plan = delay_plan(ch);
    for (int k = 0; k < ch.num_users(); k++)
    {
        const VectorXcd stacked = stack_user_channel(ch, k);
        beams.stacked.push_back(std::sqrt(per_user_power[k]) / stacked.norm() * stacked);
    }
    return beams;
}

PathBeamformerSet mrt_per_path(const ChannelSet &ch, double total_power)
{
    ch.validate();
    if (!(total_power > 0.))
        throw config_error("mrt_per_path: power must be positive");

    double fro2 = 0.;
    for (const UserChannel &u : ch.users)
        for (const Path &p : u.paths)
            fro2 += p.gain.squaredNorm();
    const double scale = std::sqrt(total_power / fro2);

    PathBeamformerSet beams;
    beams.num_antennas = ch.num_antennas;
    beams.plan = delay_plan(ch);
    for (int k = 0; k < ch.num_users(); k++)
        beams.stacked.push_back(scale * stack_user_channel(ch, k));
    return beams;
}

std::vector<double> mrt_per_path_sinr(const ChannelSet &ch, const EffectiveChannelBank &bank,
                                      double total_power)
{
    const int nk = ch.num_users();
    double fro2 = 0.;
    std::vector<VectorXcd> stacked(nk);
    for (int k = 0; k < nk; k++)
    {
        stacked[k] = stack_user_channel(ch, k);
        fro2 += stacked[k].squaredNorm();
    }

    std::vector<double> out(nk);
    for (int k = 0; k < nk; k++)
    {
        const PairBank &self = bank.pair[k][k];
        const VectorXcd proj = self.cols.adjoint() * stacked[k];
        double isi = 0.;
        for (int c = 0; c < self.num_cols(); c++)
            if (c != self.zero_col)
                isi += std::norm(proj(c));

        double iui = 0.;
        for (int kp = 0; kp < nk; kp++)
            if (kp != k)
                iui += (bank.pair[k][kp].cols.adjoint() * stacked[kp]).squaredNorm();

        const double h4 = stacked[k].squaredNorm() * stacked[k].squaredNorm();
        out[k] = h4 / (isi + iui + fro2 * ch.noise_power / total_power);
    }
    return out;
}

double ZfResult::sum_rate() const
{
    double s = 0.;
    for (double r : per_user_rate)
        s += r;
    return s;
}

ZfResult zf_per_path(const ChannelSet &ch, double total_power)
{
    ch.validate();
    if (!(total_power > 0.))
        throw config_error("zf_per_path: power must be positive");

    const int ltot = ch.total_paths();
    if (ch.num_antennas < ltot)
        throw infeasible_error("zf_per_path: needs at least as many antennas as total paths");

    const MatrixXcd h = channel_matrix(ch);
    const MatrixXcd gram = h.adjoint() * h;

    // Rank check through the Gram spectrum: smallest singular value of H
    // must clear 1e-10 of the largest.
    Eigen::SelfAdjointEigenSolver<MatrixXcd> eig(gram);
    const VectorXd ev = eig.eigenvalues();
    if (ev(0) <= 1e-20 * ev(ltot - 1))
        throw infeasible_error("zf_per_path: channel matrix is rank deficient");

    const MatrixXcd w = gram.llt().solve(h.adjoint()).adjoint();  // H (H^H H)^-1

    // Per-user direction quality q_k[l] = 1/|w_kl|, then water-filling over
    // the aggregated gains |q_k|^2.
    const int nk = ch.num_users();
    std::vector<VectorXd> q(nk);
    std::vector<double> inverse_gains(nk);
    int col = 0;
    for (int k = 0; k < nk; k++)
    {
        const int nl = ch.num_paths(k);
        q[k].resize(nl);
        for (int l = 0; l < nl; l++)
            q[k](l) = 1. / w.col(col + l).norm();
        inverse_gains[k] = ch.noise_power / q[k].squaredNorm();
        col += nl;
    }

    ZfResult res;
    res.per_user_power = water_fill(inverse_gains, total_power);
    res.beams.num_antennas = ch.num_antennas;
    res.beams.plan = delay_plan(ch);
    res.per_user_rate.resize(nk);

    col = 0;
    for (int k = 0; k < nk; k++)
    {
        const int nl = ch.num_paths(k);
        const double pk = res.per_user_power[k];
        VectorXcd f(ch.num_antennas * nl);
        for (int l = 0; l < nl; l++)
        {
            // t_kl = sqrt(P_k) q_kl / |q_k|, and f_kl = (t_kl / |w_kl|) w_kl
            const double t = std::sqrt(pk) * q[k](l) / q[k].norm();
            f.segment(l * ch.num_antennas, ch.num_antennas) = t * q[k](l) * w.col(col + l);
        }
        res.beams.stacked.push_back(std::move(f));
        res.per_user_rate[k] = std::log2(1. + pk * q[k].squaredNorm() / ch.noise_power);
        col += nl;
    }
    return res;
}

// ---------------------------------------------------------------------------
// RZF amplitude optimization
// ---------------------------------------------------------------------------

int RzfProblem::amp_offset(int k) const
{
    int off = 0;
    for (int j = 0; j < k; j++)
        off += 2 * paths(j);
    return off;
}

int RzfProblem::dim() const
{
    int d = 0;
    for (int k = 0; k < num_users(); k++)
        d += 2 * paths(k);
    return d + num_users();
}

std::vector<VectorXcd> RzfProblem::unpack_amplitudes(const VectorXd &point) const
{
    std::vector<VectorXcd> amps(num_users());
    for (int k = 0; k < num_users(); k++)
    {
        const int nl = paths(k);
        const int off = amp_offset(k);
        amps[k].resize(nl);
        for (int l = 0; l < nl; l++)
            amps[k](l) = cplx(point(off + l), point(off + nl + l));
    }
    return amps;
}

VectorXd RzfProblem::pack(const std::vector<VectorXcd> &amps, const VectorXd &gbar) const
{
    VectorXd point(dim());
    for (int k = 0; k < num_users(); k++)
    {
        const int nl = paths(k);
        const int off = amp_offset(k);
        for (int l = 0; l < nl; l++)
        {
            point(off + l) = amps[k](l).real();
            point(off + nl + l) = amps[k](l).imag();
        }
    }
    point.tail(num_users()) = gbar;
    return point;
}

std::vector<double> RzfProblem::sinr(const std::vector<VectorXcd> &amps) const
{
    const int nk = num_users();
    std::vector<double> out(nk);
    for (int k = 0; k < nk; k++)
    {
        const cplx z = (amps[k].array() * response[k].array()).sum();
        double denom = noise_power;

        const Eigen::RowVectorXcd self = amps[k].transpose() * coupling[k][k];
        for (int c = 0; c < self.size(); c++)
            if (c != self_zero_col[k])
                denom += std::norm(self(c));

        for (int kp = 0; kp < nk; kp++)
            if (kp != k)
                denom += (amps[kp].transpose() * coupling[k][kp]).squaredNorm();

        out[k] = std::norm(z) / denom;
    }
    return out;
}

double RzfProblem::sum_rate_of_point(const VectorXd &point) const
{
    const auto s = sinr(unpack_amplitudes(point));
    double rate = 0.;
    for (double g : s)
        rate += std::log2(1. + g);
    return rate;
}

VectorXd RzfProblem::initial_point() const
{
    const int nk = num_users();
    int ltot = 0;
    for (int k = 0; k < nk; k++)
        ltot += paths(k);

    std::vector<VectorXcd> amps(nk);
    for (int k = 0; k < nk; k++)
    {
        amps[k].resize(paths(k));
        for (int l = 0; l < paths(k); l++)
        {
            // phase cancels the response phase so every term adds coherently
            const double mag = std::sqrt(budget / ltot);
            amps[k](l) = std::polar(mag, -std::arg(response[k](l)));
        }
    }

    const auto s = sinr(amps);
    VectorXd gbar(nk);
    for (int k = 0; k < nk; k++)
        gbar(k) = s[k];
    return pack(amps, gbar);
}

PathBeamformerSet RzfProblem::beams(const std::vector<VectorXcd> &amps) const
{
    PathBeamformerSet out;
    out.num_antennas = num_antennas;
    out.plan = plan;
    for (int k = 0; k < num_users(); k++)
    {
        const int nl = paths(k);
        VectorXcd f(num_antennas * nl);
        for (int l = 0; l < nl; l++)
            f.segment(l * num_antennas, num_antennas) =
                amps[k](l) * directions[k].segment(l * num_antennas, num_antennas);
        out.stacked.push_back(std::move(f));
    }
    return out;
}

namespace
{

VectorXd gather_support(const VectorXd &x, const std::vector<int> &idx)
{
    VectorXd xs(idx.size());
    for (std::size_t i = 0; i < idx.size(); i++)
        xs(i) = x(idx[i]);
    return xs;
}

// Real PSD form of the column-energy sum |a^T U|^2 over x = [Re a; Im a],
// optionally skipping one column.
MatrixXd real_quadratic_form(const MatrixXcd &u, int skip_col)
{
    const int nl = static_cast<int>(u.rows());
    const int nc = static_cast<int>(u.cols());
    int rows = 0;
    for (int c = 0; c < nc; c++)
        if (c != skip_col)
            rows += 2;

    MatrixXd t = MatrixXd::Zero(rows, 2 * nl);
    int r = 0;
    for (int c = 0; c < nc; c++)
    {
        if (c == skip_col)
            continue;
        for (int l = 0; l < nl; l++)
        {
            t(r, l) = u(l, c).real();
            t(r, nl + l) = -u(l, c).imag();
            t(r + 1, l) = u(l, c).imag();
            t(r + 1, nl + l) = u(l, c).real();
        }
        r += 2;
    }
    return t.transpose() * t;
}

// One user's surrogate constraint: interference quadratic + noise minus the
// first-order expansion of the quadratic-over-linear desired term.
// Support spans every amplitude coordinate plus this user's gbar.
class RzfConstraint : public newton::SmoothFunction
{
public:
    RzfConstraint(const RzfProblem &prob, int user, const VectorXd &point) : prob_(prob)
    {
        const int nk = prob.num_users();
        int na = 0;
        for (int k = 0; k < nk; k++)
            na += 2 * prob.paths(k);
        for (int i = 0; i < na; i++)
            support_.push_back(i);
        support_.push_back(na + user);  // gbar_k
        na_ = na;
        nl_ = prob.paths(user);
        amp_off_ = prob.amp_offset(user);

        quad_.resize(nk);
        for (int kp = 0; kp < nk; kp++)
            quad_[kp] = real_quadratic_form(prob.coupling[user][kp],
                                            kp == user ? prob.self_zero_col[user] : -1);

        // Linearization of f(a_k, g) = |a_k^T u_k|^2 / g at the SCA point.
        const auto amps = prob.unpack_amplitudes(point);
        const double g0 = point(na + user);
        const cplx z0 = (amps[user].array() * prob.response[user].array()).sum();
        const VectorXcd &u = prob.response[user];

        lin_grad_amp_.setZero(2 * nl_);
        for (int l = 0; l < nl_; l++)
        {
            lin_grad_amp_(l) = 2. * (z0.real() * u(l).real() + z0.imag() * u(l).imag()) / g0;
            lin_grad_amp_(nl_ + l) = 2. * (-z0.real() * u(l).imag() + z0.imag() * u(l).real()) / g0;
        }
        lin_grad_g_ = -std::norm(z0) / (g0 * g0);

        lin_const_ = std::norm(z0) / g0 - lin_grad_g_ * g0;
        for (int l = 0; l < nl_; l++)
        {
            lin_const_ -= lin_grad_amp_(l) * amps[user](l).real();
            lin_const_ -= lin_grad_amp_(nl_ + l) * amps[user](l).imag();
        }
    }

    const std::vector<int> &support() const override { return support_; }

    double value(const VectorXd &xs) const override
    {
        double v = prob_.noise_power;
        int off = 0;
        for (int kp = 0; kp < prob_.num_users(); kp++)
        {
            const int d = 2 * prob_.paths(kp);
            v += xs.segment(off, d).dot(quad_[kp] * xs.segment(off, d));
            off += d;
        }
        double lin = lin_const_ + lin_grad_g_ * xs(na_);
        lin += lin_grad_amp_.dot(xs.segment(amp_off_, 2 * nl_));
        return v - lin;
    }

    void derivatives(const VectorXd &xs, VectorXd &grad, MatrixXd &hess) const override
    {
        int off = 0;
        for (int kp = 0; kp < prob_.num_users(); kp++)
        {
            const int d = 2 * prob_.paths(kp);
            grad.segment(off, d) = 2. * (quad_[kp] * xs.segment(off, d));
            hess.block(off, off, d, d) = 2. * quad_[kp];
            off += d;
        }
        grad.segment(amp_off_, 2 * nl_) -= lin_grad_amp_;
        grad(na_) -= lin_grad_g_;
    }

private:
    const RzfProblem &prob_;
    std::vector<int> support_;
    std::vector<MatrixXd> quad_;
    VectorXd lin_grad_amp_;
    double lin_grad_g_ = 0.;
    double lin_const_ = 0.;
    int amp_off_ = 0, nl_ = 0, na_ = 0;
};

class PowerBudget : public newton::SmoothFunction
{
public:
    PowerBudget(int n_amp, double budget) : budget_(budget)
    {
        for (int i = 0; i < n_amp; i++)
            support_.push_back(i);
    }
    const std::vector<int> &support() const override { return support_; }
    double value(const VectorXd &xs) const override { return xs.squaredNorm() - budget_; }
    void derivatives(const VectorXd &xs, VectorXd &grad, MatrixXd &hess) const override
    {
        grad = 2. * xs;
        hess.diagonal().setConstant(2.);
    }

private:
    std::vector<int> support_;
    double budget_;
};

class NonNegative : public newton::SmoothFunction
{
public:
    explicit NonNegative(int index) : support_{index} {}
    const std::vector<int> &support() const override { return support_; }
    double value(const VectorXd &xs) const override { return -xs(0); }
    void derivatives(const VectorXd &, VectorXd &grad, MatrixXd &) const override
    {
        grad(0) = -1.;
    }

private:
    std::vector<int> support_;
};

// -sum log2(1 + g_i) over a trailing block.
class NegSumLogRate : public newton::SmoothFunction
{
public:
    NegSumLogRate(int offset, int count)
    {
        for (int i = 0; i < count; i++)
            support_.push_back(offset + i);
    }
    const std::vector<int> &support() const override { return support_; }
    double value(const VectorXd &xs) const override
    {
        double v = 0.;
        for (int i = 0; i < xs.size(); i++)
        {
            if (xs(i) <= -1.)
                return std::numeric_limits<double>::quiet_NaN();
            v -= std::log2(1. + xs(i));
        }
        return v;
    }
    void derivatives(const VectorXd &xs, VectorXd &grad, MatrixXd &hess) const override
    {
        const double ln2 = std::numbers::ln2;
        for (int i = 0; i < xs.size(); i++)
        {
            grad(i) = -1. / ((1. + xs(i)) * ln2);
            hess(i, i) = 1. / ((1. + xs(i)) * (1. + xs(i)) * ln2);
        }
    }

private:
    std::vector<int> support_;
};

} // namespace

VectorXd RzfProblem::solve_surrogate(const VectorXd &point) const
{
    const int nk = num_users();
    const int na = dim() - nk;

    std::vector<RzfConstraint> user_cons;
    user_cons.reserve(nk);
    for (int k = 0; k < nk; k++)
        user_cons.emplace_back(*this, k, point);
    PowerBudget power(na, budget);
    std::vector<NonNegative> nonneg;
    nonneg.reserve(nk);
    for (int k = 0; k < nk; k++)
        nonneg.emplace_back(na + k);

    std::vector<const newton::SmoothFunction *> cons;
    for (const auto &c : user_cons)
        cons.push_back(&c);
    cons.push_back(&power);
    for (const auto &c : nonneg)
        cons.push_back(&c);

    NegSumLogRate objective(na, nk);

    // Strictly feasible start: shrink the amplitudes a touch, then set each
    // gbar just below the largest value its (linear-in-gbar) constraint allows.
    VectorXd x0 = point;
    x0.head(na) *= (1. - 1e-7);
    for (int k = 0; k < nk; k++)
    {
        VectorXd probe = x0;
        probe(na + k) = 0.;
        const double at_zero = user_cons[k].value(gather_support(probe, user_cons[k].support()));
        probe(na + k) = 1.;
        const double at_one = user_cons[k].value(gather_support(probe, user_cons[k].support()));
        const double slope = at_one - at_zero;  // constraint is affine in gbar
        double gmax = 1e-12;
        if (slope > 0. && at_zero < 0.)
            gmax = -at_zero / slope;
        x0(na + k) = std::max(gmax * (1. - 1e-6), 1e-12);
    }

    auto res = newton::minimize(objective, cons, x0, newton::Options{});

    // Tighten the slack SINRs to their induced values so the next expansion
    // point is exact.
    VectorXd out = res.x;
    const auto s = sinr(unpack_amplitudes(out));
    for (int k = 0; k < nk; k++)
        out(na + k) = s[k];
    return out;
}

RzfProblem make_rzf_problem(const ChannelSet &ch, const EffectiveChannelBank &bank,
                            double total_power)
{
    ch.validate();
    if (!(total_power > 0.))
        throw config_error("make_rzf_problem: power must be positive");

    const int nk = ch.num_users();
    const int ltot = ch.total_paths();
    const MatrixXcd h = channel_matrix(ch);
    const double eps = ltot * ch.noise_power / total_power;

    MatrixXcd gram = h.adjoint() * h;
    gram.diagonal().array() += eps;
    const MatrixXcd tilde = gram.llt().solve(h.adjoint()).adjoint();  // H (H^H H + eps I)^-1

    RzfProblem prob;
    prob.num_antennas = ch.num_antennas;
    prob.budget = total_power;
    prob.noise_power = ch.noise_power;
    prob.plan = delay_plan(ch);
    prob.directions.resize(nk);
    prob.response.resize(nk);
    prob.coupling.assign(nk, std::vector<MatrixXcd>(nk));
    prob.self_zero_col.resize(nk);

    int col = 0;
    for (int k = 0; k < nk; k++)
    {
        const int nl = ch.num_paths(k);
        VectorXcd dir(ch.num_antennas * nl);
        prob.response[k].resize(nl);
        for (int l = 0; l < nl; l++)
        {
            const VectorXcd fhat = tilde.col(col + l) / tilde.col(col + l).norm();
            dir.segment(l * ch.num_antennas, ch.num_antennas) = fhat;
            prob.response[k](l) = ch.users[k].paths[l].gain.dot(fhat);
        }
        prob.directions[k] = std::move(dir);
        col += nl;
    }

    for (int k = 0; k < nk; k++)
    {
        prob.self_zero_col[k] = bank.pair[k][k].zero_col;
        for (int kp = 0; kp < nk; kp++)
        {
            const PairBank &pb = bank.pair[k][kp];
            const int nl = ch.num_paths(kp);
            MatrixXcd u(nl, pb.num_cols());
            for (int lp = 0; lp < nl; lp++)
            {
                const VectorXcd fhat =
                    prob.directions[kp].segment(lp * ch.num_antennas, ch.num_antennas);
                for (int c = 0; c < pb.num_cols(); c++)
                    u(lp, c) = VectorXcd(pb.cols.block(lp * ch.num_antennas, c, ch.num_antennas, 1))
                                   .dot(fhat);
            }
            prob.coupling[k][kp] = std::move(u);
        }
    }
    return prob;
}

double RzfResult::sum_rate() const
{
    double s = 0.;
    for (double r : per_user_rate)
        s += r;
    return s;
}

RzfResult rzf_per_path(const ChannelSet &ch, double total_power, const SolverSettings &settings)
{
    const EffectiveChannelBank bank = effective_channel_bank(ch);
    RzfProblem prob = make_rzf_problem(ch, bank, total_power);

    const auto surrogate = [&prob](const VectorXd &x) { return prob.solve_surrogate(x); };
    const auto objective = [&prob](const VectorXd &x) { return prob.sum_rate_of_point(x); };

    const ScaResult sca = sca_drive(surrogate, objective, prob.initial_point(), settings);

    RzfResult res;
    const auto amps = prob.unpack_amplitudes(sca.point);
    res.beams = prob.beams(amps);
    res.objective_trace = sca.objective_trace;
    const auto s = prob.sinr(amps);
    for (double g : s)
        res.per_user_rate.push_back(std::log2(1. + g));
    return res;
}

} // namespace dam
