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

#include "dam/rate_region.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "dam/newton.hpp"

namespace dam
{

void RateProfile::validate() const
{
    if (alpha.size() < 1)
        throw config_error("RateProfile: empty");
    double sum = 0.;
    for (int i = 0; i < alpha.size(); i++)
    {
        if (alpha(i) < 0.)
            throw config_error("RateProfile: negative entry");
        sum += alpha(i);
    }
    if (std::abs(sum - 1.) > 1e-12)
        throw config_error("RateProfile: entries must sum to one");
    if (alpha.maxCoeff() <= 0.)
        throw config_error("RateProfile: all-zero profile");
}

namespace
{

// Search shared by the DAM and SP regions: bisect the rate scaling, probe
// each candidate with a power-minimization cone program, keep the beams of
// the last within-budget probe.
struct BisectionOutcome
{
    double r_star = 0.;
    std::vector<VectorXcd> beams;
    socp::Status last_status = socp::Status::numerical_limits;
    int probes = 0;
    bool converged = false;
};

BisectionOutcome bisect_rate_scaling(
    const std::function<PowerMinResult(const std::vector<double> &targets)> &probe,
    const VectorXd &alpha, const std::vector<double> &single_user_caps, double total_power,
    const SolverSettings &settings)
{
    const int nk = static_cast<int>(alpha.size());

    double upper = std::numeric_limits<double>::infinity();
    for (int k = 0; k < nk; k++)
        if (alpha(k) > 0.)
            upper = std::min(upper, single_user_caps[k] / alpha(k));

    BisectionOutcome out;
    double lower = 0.;
    const int max_probes = 200;
    while (out.probes < max_probes && (upper - lower) > settings.bisection_epsilon * lower &&
           upper > 1e-12)
    {
        const double rate = (lower + upper) / 2.;
        std::vector<double> targets(nk, 0.);
        for (int k = 0; k < nk; k++)
            if (alpha(k) > 0.)
                targets[k] = std::exp2(alpha(k) * rate) - 1.;

        const PowerMinResult res = probe(targets);
        out.probes++;
        out.last_status = res.status;
        if (res.solved() && res.total_power <= total_power * (1. + 1e-9))
        {
            lower = rate;
            out.beams = res.beams;
        }
        else
        {
            upper = rate;
        }
    }
    out.r_star = lower;
    out.converged = !out.beams.empty();
    return out;
}

SinrConstraintSystem sp_constraint_system(const ChannelSet &ch, const std::vector<double> &targets)
{
    const int nk = ch.num_users();
    SinrConstraintSystem sys;
    sys.noise_sigma = std::sqrt(ch.noise_power);
    sys.targets = targets;
    sys.desired.resize(nk);
    sys.interference.assign(nk, std::vector<MatrixXcd>(nk));
    for (int k = 0; k < nk; k++)
    {
        const auto &paths = ch.users[k].paths;
        sys.desired[k] = paths[0].gain;
        for (int j = 0; j < nk; j++)
        {
            if (j == k)
            {
                // own non-strongest paths are ISI
                MatrixXcd isi(ch.num_antennas, static_cast<int>(paths.size()) - 1);
                for (std::size_t l = 1; l < paths.size(); l++)
                    isi.col(static_cast<int>(l) - 1) = paths[l].gain;
                sys.interference[k][j] = std::move(isi);
            }
            else
            {
                // every path leaks the other user's beam
                MatrixXcd iui(ch.num_antennas, static_cast<int>(paths.size()));
                for (std::size_t l = 0; l < paths.size(); l++)
                    iui.col(static_cast<int>(l)) = paths[l].gain;
                sys.interference[k][j] = std::move(iui);
            }
        }
    }
    return sys;
}

} // namespace

ParetoPoint dam_pareto_point(const ChannelSet &ch, const RateProfile &profile, double total_power,
                             const SolverSettings &settings)
{
    ch.validate();
    profile.validate();
    if (profile.alpha.size() != ch.num_users())
        throw config_error("dam_pareto_point: profile length mismatch");
    if (!(total_power > 0.))
        throw config_error("dam_pareto_point: power must be positive");

    const EffectiveChannelBank bank = effective_channel_bank(ch);
    const int nk = ch.num_users();

    // Interference-free single-user caps set the initial upper bound.
    std::vector<double> caps(nk);
    for (int k = 0; k < nk; k++)
        caps[k] = std::log2(
            1. + total_power * stack_user_channel(ch, k).squaredNorm() / ch.noise_power);

    const auto probe = [&](const std::vector<double> &targets) {
        return solve_power_min_socp(make_socp_instance(ch, bank, targets), settings);
    };

    const BisectionOutcome out =
        bisect_rate_scaling(probe, profile.alpha, caps, total_power, settings);

    ParetoPoint point;
    point.alpha = profile.alpha;
    point.r_star = out.r_star;
    point.converged = out.converged;
    point.last_status = out.last_status;
    point.iterations = out.probes;
    point.achieved_rates.assign(nk, 0.);
    if (out.converged)
    {
        point.beams_stacked = out.beams;
        PathBeamformerSet beams;
        beams.num_antennas = ch.num_antennas;
        beams.plan = delay_plan(ch);
        beams.stacked = out.beams;
        const auto rep = dam_sinr(ch, bank, beams);
        for (int k = 0; k < nk; k++)
            point.achieved_rates[k] = std::log2(1. + rep[k].sinr());
    }
    return point;
}

ParetoPoint sp_pareto_point(const ChannelSet &ch, const RateProfile &profile, double total_power,
                            const SolverSettings &settings)
{
    ch.validate();
    profile.validate();
    if (profile.alpha.size() != ch.num_users())
        throw config_error("sp_pareto_point: profile length mismatch");
    if (!(total_power > 0.))
        throw config_error("sp_pareto_point: power must be positive");

    const int nk = ch.num_users();
    std::vector<double> caps(nk);
    for (int k = 0; k < nk; k++)
        caps[k] = std::log2(
            1. + total_power * ch.users[k].paths[0].gain.squaredNorm() / ch.noise_power);

    const auto probe = [&](const std::vector<double> &targets) {
        return solve_sinr_power_min(sp_constraint_system(ch, targets), settings);
    };

    const BisectionOutcome out =
        bisect_rate_scaling(probe, profile.alpha, caps, total_power, settings);

    ParetoPoint point;
    point.alpha = profile.alpha;
    point.r_star = out.r_star;
    point.converged = out.converged;
    point.last_status = out.last_status;
    point.iterations = out.probes;
    point.achieved_rates.assign(nk, 0.);
    if (out.converged)
    {
        point.beams_single = out.beams;
        SpBeamformerSet beams;
        beams.num_antennas = ch.num_antennas;
        beams.beams = out.beams;
        const auto rep = sp_sinr(ch, beams);
        for (int k = 0; k < nk; k++)
            point.achieved_rates[k] = std::log2(1. + rep[k].sinr());
    }
    return point;
}

// ---------------------------------------------------------------------------
// OFDM rate-profile point by SCA
// ---------------------------------------------------------------------------

namespace
{

// Variable layout of the OFDM surrogate over the active users:
//   [mu | d blocks (2 M_t reals per active (user, sub-carrier)) | S | C]
struct OfdmLayout
{
    int n_active, m, mt;
    int d_off, s_off, c_off, total;

    OfdmLayout(int n_active_, int m_, int mt_) : n_active(n_active_), m(m_), mt(mt_)
    {
        d_off = 1;
        s_off = d_off + n_active * m * 2 * mt;
        c_off = s_off + n_active * n_active * m;
        total = c_off + n_active * (n_active - 1) * m;
    }

    int d_block(int j, int c) const { return d_off + (c * n_active + j) * 2 * mt; }
    int s_index(int k, int kp, int c) const { return s_off + (c * n_active + k) * n_active + kp; }
    int c_index(int k, int kp, int c) const
    {
        const int local = kp < k ? kp : kp - 1;
        return c_off + (c * n_active + k) * (n_active - 1) + local;
    }
};

VectorXcd unpack_beam(const VectorXd &x, int offset, int mt)
{
    VectorXcd d(mt);
    for (int i = 0; i < mt; i++)
        d(i) = cplx(x(offset + i), x(offset + mt + i));
    return d;
}

void pack_beam(VectorXd &x, int offset, const VectorXcd &d)
{
    const int mt = static_cast<int>(d.size());
    for (int i = 0; i < mt; i++)
    {
        x(offset + i) = d(i).real();
        x(offset + mt + i) = d(i).imag();
    }
}

class NegMu : public newton::SmoothFunction
{
public:
    NegMu() : support_{0} {}
    const std::vector<int> &support() const override { return support_; }
    double value(const VectorXd &xs) const override { return -xs(0); }
    void derivatives(const VectorXd &, VectorXd &grad, MatrixXd &) const override
    {
        grad(0) = -1.;
    }

private:
    std::vector<int> support_;
};

// Per-user rate constraint of the surrogate:
//   M alpha_k mu - sum_m log2(shat + sum_kp S) + sum_m TaylorUB_m(C) <= 0
// where the upper bound linearizes log2(shat + sum_{kp!=k} C) at the
// expansion point's interference slacks.
class OfdmRateConstraint : public newton::SmoothFunction
{
public:
    OfdmRateConstraint(const OfdmLayout &lay, int k, double m_alpha, double shat,
                       const std::vector<double> &cref_sum_per_m)
        : lay_(lay), m_alpha_(m_alpha), shat_(shat)
    {
        support_.push_back(0);
        for (int c = 0; c < lay.m; c++)
            for (int kp = 0; kp < lay.n_active; kp++)
                support_.push_back(lay.s_index(k, kp, c));
        for (int c = 0; c < lay.m; c++)
            for (int kp = 0; kp < lay.n_active; kp++)
                if (kp != k)
                    support_.push_back(lay.c_index(k, kp, c));

        coef_.resize(lay.m);
        base_ = 0.;
        const double log2e = 1. / std::numbers::ln2;
        for (int c = 0; c < lay.m; c++)
        {
            const double arg = shat + cref_sum_per_m[c];
            coef_[c] = log2e / arg;
            base_ += std::log2(arg) - coef_[c] * cref_sum_per_m[c];
        }
    }

    const std::vector<int> &support() const override { return support_; }

    // Compressed layout: [mu | S (c-major, n_active each) | C (c-major, n_active-1 each)]
    double value(const VectorXd &xs) const override
    {
        const int na = lay_.n_active;
        double v = m_alpha_ * xs(0) + base_;
        int si = 1;
        for (int c = 0; c < lay_.m; c++)
        {
            double sum = shat_;
            for (int kp = 0; kp < na; kp++)
                sum += xs(si++);
            if (sum <= 0.)
                return std::numeric_limits<double>::quiet_NaN();
            v -= std::log2(sum);
        }
        int ci = si;
        for (int c = 0; c < lay_.m; c++)
            for (int kp = 0; kp < na - 1; kp++)
                v += coef_[c] * xs(ci++);
        return v;
    }

    void derivatives(const VectorXd &xs, VectorXd &grad, MatrixXd &hess) const override
    {
        const int na = lay_.n_active;
        const double log2e = 1. / std::numbers::ln2;
        grad(0) = m_alpha_;
        int si = 1;
        for (int c = 0; c < lay_.m; c++)
        {
            double sum = shat_;
            for (int kp = 0; kp < na; kp++)
                sum += xs(si + kp);
            const double g = -log2e / sum;
            const double h = log2e / (sum * sum);
            for (int a = 0; a < na; a++)
            {
                grad(si + a) = g;
                for (int b = 0; b < na; b++)
                    hess(si + a, si + b) = h;
            }
            si += na;
        }
        int ci = si;
        for (int c = 0; c < lay_.m; c++)
            for (int kp = 0; kp < na - 1; kp++)
                grad(ci++) = coef_[c];
    }

private:
    OfdmLayout lay_;
    double m_alpha_, shat_;
    std::vector<int> support_;
    std::vector<double> coef_;
    double base_ = 0.;
};

// S_{k,kp,m} <= linearized |h^H d|^2 around d0 (affine restriction).
class OfdmSignalLowerBound : public newton::SmoothFunction
{
public:
    OfdmSignalLowerBound(const OfdmLayout &lay, int s_index, int d_block, const VectorXcd &h,
                         const VectorXcd &d0)
    {
        support_.push_back(s_index);
        for (int i = 0; i < 2 * lay.mt; i++)
            support_.push_back(d_block + i);

        const cplx hd0 = h.dot(d0);
        const VectorXcd w = h * hd0;  // h h^H d0
        wr_.resize(2 * lay.mt);
        for (int i = 0; i < lay.mt; i++)
        {
            wr_(i) = w(i).real();
            wr_(lay.mt + i) = w(i).imag();
        }
        offset_ = std::norm(hd0);
    }

    const std::vector<int> &support() const override { return support_; }

    double value(const VectorXd &xs) const override
    {
        // xs = [S; dr; di]; linearization is S - 2 Re(w^H d) + |h^H d0|^2
        return xs(0) - 2. * wr_.dot(xs.tail(wr_.size())) + offset_;
    }

    void derivatives(const VectorXd &, VectorXd &grad, MatrixXd &) const override
    {
        grad(0) = 1.;
        grad.tail(wr_.size()) = -2. * wr_;
    }

private:
    std::vector<int> support_;
    VectorXd wr_;
    double offset_;
};

// |h^H d|^2 <= C, kept exact (convex quadratic).
class OfdmInterferenceCap : public newton::SmoothFunction
{
public:
    OfdmInterferenceCap(const OfdmLayout &lay, int c_index, int d_block, const VectorXcd &h)
    {
        support_.push_back(c_index);
        for (int i = 0; i < 2 * lay.mt; i++)
            support_.push_back(d_block + i);

        vr_.resize(2 * lay.mt);
        vi_.resize(2 * lay.mt);
        for (int i = 0; i < lay.mt; i++)
        {
            vr_(i) = h(i).real();
            vr_(lay.mt + i) = h(i).imag();
            vi_(i) = -h(i).imag();
            vi_(lay.mt + i) = h(i).real();
        }
    }

    const std::vector<int> &support() const override { return support_; }

    double value(const VectorXd &xs) const override
    {
        const auto x = xs.tail(vr_.size());
        const double re = vr_.dot(x);
        const double im = vi_.dot(x);
        return re * re + im * im - xs(0);
    }

    void derivatives(const VectorXd &xs, VectorXd &grad, MatrixXd &hess) const override
    {
        const auto x = xs.tail(vr_.size());
        const double re = vr_.dot(x);
        const double im = vi_.dot(x);
        grad(0) = -1.;
        grad.tail(vr_.size()) = 2. * (re * vr_ + im * vi_);
        hess.block(1, 1, vr_.size(), vr_.size()) =
            2. * (vr_ * vr_.transpose() + vi_ * vi_.transpose());
    }

private:
    std::vector<int> support_;
    VectorXd vr_, vi_;
};

class OfdmPowerBudget : public newton::SmoothFunction
{
public:
    OfdmPowerBudget(const OfdmLayout &lay, double budget) : budget_(budget)
    {
        for (int i = lay.d_off; i < lay.s_off; i++)
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

struct OfdmScaProblem
{
    const OfdmChannel *ofdm;
    OfdmLayout lay;
    std::vector<int> active;  // original user indices
    VectorXd m_alpha;         // M * alpha_k per active user
    double budget;

    double pair_power(const VectorXd &x, int k, int kp, int c) const
    {
        const VectorXcd d = unpack_beam(x, lay.d_block(kp, c), lay.mt);
        return std::norm(cplx(ofdm->freq[active[k]].col(c).dot(d)));
    }

    std::vector<double> user_rate_sums(const VectorXd &x) const
    {
        std::vector<double> sums(lay.n_active, 0.);
        for (int k = 0; k < lay.n_active; k++)
            for (int c = 0; c < lay.m; c++)
            {
                const double desired = pair_power(x, k, k, c);
                double iui = 0.;
                for (int kp = 0; kp < lay.n_active; kp++)
                    if (kp != k)
                        iui += pair_power(x, k, kp, c);
                sums[k] += std::log2(1. + desired / (iui + ofdm->subcarrier_noise_power));
            }
        return sums;
    }

    double true_mu(const VectorXd &x) const
    {
        const auto sums = user_rate_sums(x);
        double mu = std::numeric_limits<double>::infinity();
        for (int k = 0; k < lay.n_active; k++)
            mu = std::min(mu, sums[k] / m_alpha(k));
        return mu;
    }

    // Canonical point: slacks at their induced values, mu at the true value.
    VectorXd tighten(VectorXd x) const
    {
        for (int c = 0; c < lay.m; c++)
            for (int k = 0; k < lay.n_active; k++)
                for (int kp = 0; kp < lay.n_active; kp++)
                {
                    const double p = pair_power(x, k, kp, c);
                    x(lay.s_index(k, kp, c)) = p;
                    if (kp != k)
                        x(lay.c_index(k, kp, c)) = p;
                }
        x(0) = true_mu(x);
        return x;
    }

    VectorXd solve_surrogate(const VectorXd &point) const;
};

VectorXd OfdmScaProblem::solve_surrogate(const VectorXd &point) const
{
    const int na = lay.n_active;
    const double shat = ofdm->subcarrier_noise_power;

    std::vector<OfdmRateConstraint> rate_cons;
    rate_cons.reserve(na);
    for (int k = 0; k < na; k++)
    {
        std::vector<double> cref(lay.m, 0.);
        for (int c = 0; c < lay.m; c++)
            for (int kp = 0; kp < na; kp++)
                if (kp != k)
                    cref[c] += point(lay.c_index(k, kp, c));
        rate_cons.emplace_back(lay, k, m_alpha(k), shat, cref);
    }

    std::vector<OfdmSignalLowerBound> lb_cons;
    std::vector<OfdmInterferenceCap> cap_cons;
    lb_cons.reserve(na * na * lay.m);
    cap_cons.reserve(na * (na - 1) * lay.m);
    for (int c = 0; c < lay.m; c++)
        for (int k = 0; k < na; k++)
            for (int kp = 0; kp < na; kp++)
            {
                const VectorXcd h = ofdm->freq[active[k]].col(c);
                const VectorXcd d0 = unpack_beam(point, lay.d_block(kp, c), lay.mt);
                lb_cons.emplace_back(lay, lay.s_index(k, kp, c), lay.d_block(kp, c), h, d0);
                if (kp != k)
                    cap_cons.emplace_back(lay, lay.c_index(k, kp, c), lay.d_block(kp, c), h);
            }

    OfdmPowerBudget power(lay, budget);
    NegMu objective;

    std::vector<const newton::SmoothFunction *> cons;
    for (const auto &c : rate_cons)
        cons.push_back(&c);
    for (const auto &c : lb_cons)
        cons.push_back(&c);
    for (const auto &c : cap_cons)
        cons.push_back(&c);
    cons.push_back(&power);

    // Strictly feasible start: pull the beams slightly inside the budget,
    // then place the slacks just inside their bounds and mu below its cap.
    VectorXd x0 = point;
    for (int c = 0; c < lay.m; c++)
        for (int j = 0; j < na; j++)
            x0.segment(lay.d_block(j, c), 2 * lay.mt) *= (1. - 1e-7);
    for (int c = 0; c < lay.m; c++)
        for (int k = 0; k < na; k++)
            for (int kp = 0; kp < na; kp++)
            {
                const double hd0 = pair_power(point, k, kp, c);
                const double hd = pair_power(x0, k, kp, c);
                const double lin = (1. - 2e-7) * hd0;
                const double margin = 1e-9 * (shat + hd0);
                x0(lay.s_index(k, kp, c)) = lin - margin;
                if (kp != k)
                    x0(lay.c_index(k, kp, c)) = hd + margin;
            }
    double mu_max = std::numeric_limits<double>::infinity();
    for (int k = 0; k < na; k++)
    {
        const auto &sup = rate_cons[k].support();
        VectorXd xs(sup.size());
        for (std::size_t i = 0; i < sup.size(); i++)
            xs(i) = x0(sup[i]);
        xs(0) = 0.;
        const double at_zero = rate_cons[k].value(xs);
        mu_max = std::min(mu_max, -at_zero / m_alpha(k));
    }
    x0(0) = mu_max - 1e-9 * (1. + std::abs(mu_max));

    const auto res = newton::minimize(objective, cons, x0, newton::Options{});
    return tighten(res.x);
}

} // namespace

ParetoPoint ofdm_pareto_point(const OfdmChannel &ofdm, const RateProfile &profile,
                              double power_per_channel_use, const SolverSettings &settings)
{
    profile.validate();
    if (profile.alpha.size() != ofdm.num_users())
        throw config_error("ofdm_pareto_point: profile length mismatch");
    if (!(power_per_channel_use > 0.))
        throw config_error("ofdm_pareto_point: power must be positive");

    const int nk = ofdm.num_users();
    std::vector<int> active;
    for (int k = 0; k < nk; k++)
        if (profile.alpha(k) > 0.)
            active.push_back(k);
    const int na = static_cast<int>(active.size());

    OfdmScaProblem prob{&ofdm, OfdmLayout(na, ofdm.num_subcarriers, ofdm.num_antennas), active,
                        VectorXd(na), ofdm.num_subcarriers * power_per_channel_use};
    for (int k = 0; k < na; k++)
        prob.m_alpha(k) = ofdm.num_subcarriers * profile.alpha(active[k]);

    // Equal-power per-sub-carrier matched directions as the feasible start.
    VectorXd init = VectorXd::Zero(prob.lay.total);
    const double per_beam = power_per_channel_use / na;
    for (int c = 0; c < prob.lay.m; c++)
        for (int j = 0; j < na; j++)
        {
            const VectorXcd h = ofdm.freq[active[j]].col(c);
            pack_beam(init, prob.lay.d_block(j, c), std::sqrt(per_beam) * h / h.norm());
        }
    init = prob.tighten(init);

    const auto surrogate = [&prob](const VectorXd &x) { return prob.solve_surrogate(x); };
    const auto objective = [&prob](const VectorXd &x) { return prob.true_mu(x); };
    const ScaResult run = sca_drive(surrogate, objective, init, settings);

    ParetoPoint point;
    point.alpha = profile.alpha;
    point.converged = run.converged;
    point.last_status = socp::Status::optimal;
    point.iterations = run.iterations;
    point.objective_trace = run.objective_trace;

    point.r_star = prob.true_mu(run.point);
    point.achieved_rates.assign(nk, 0.);
    const auto sums = prob.user_rate_sums(run.point);
    for (int k = 0; k < na; k++)
        point.achieved_rates[active[k]] = sums[k] / ofdm.num_subcarriers;

    point.beams_ofdm.assign(nk, MatrixXcd::Zero(ofdm.num_antennas, ofdm.num_subcarriers));
    for (int c = 0; c < prob.lay.m; c++)
        for (int j = 0; j < na; j++)
            point.beams_ofdm[active[j]].col(c) =
                unpack_beam(run.point, prob.lay.d_block(j, c), prob.lay.mt);
    return point;
}

RateRegionTrace trace_region(const ParetoPointOp &op, const std::vector<RateProfile> &grid)
{
    if (grid.empty())
        throw config_error("trace_region: empty profile grid");
    RateRegionTrace trace;
    trace.points.reserve(grid.size());
    for (const RateProfile &profile : grid)
        trace.points.push_back(op(profile));
    return trace;
}

std::vector<RateProfile> two_user_alpha_grid(int num_points)
{
    if (num_points < 2)
        throw config_error("two_user_alpha_grid: need at least two points");
    std::vector<RateProfile> grid;
    for (int i = 0; i < num_points; i++)
    {
        RateProfile p;
        p.alpha = VectorXd(2);
        const double a = static_cast<double>(i) / (num_points - 1);
        p.alpha << 1. - a, a;
        grid.push_back(std::move(p));
    }
    return grid;
}

} // namespace dam
