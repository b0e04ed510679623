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

#include "dam/benchmarks.hpp"

#include <Eigen/Cholesky>
#include <cmath>
#include <limits>
#include <numbers>

#include "dam/beamforming.hpp"
#include "dam/newton.hpp"

namespace dam
{

double SpBeamformerSet::total_power() const
{
    double p = 0.;
    for (const VectorXcd &f : beams)
        p += f.squaredNorm();
    return p;
}

double SpResult::sum_rate() const
{
    double s = 0.;
    for (double r : per_user_rate)
        s += r;
    return s;
}

double OfdmBeamformerSet::total_power() const
{
    double p = 0.;
    for (const MatrixXcd &d : beams)
        p += d.squaredNorm();
    return p;
}

double OfdmResult::sum_rate() const
{
    double s = 0.;
    for (double r : per_user_rate)
        s += r;
    return s;
}

std::vector<SinrReport> sp_sinr(const ChannelSet &ch, const SpBeamformerSet &beams)
{
    const int nk = ch.num_users();
    if (beams.num_users() != nk || beams.num_antennas != ch.num_antennas)
        throw contract_error("sp_sinr: beam set mismatch");

    std::vector<SinrReport> out(nk);
    for (int k = 0; k < nk; k++)
    {
        SinrReport &r = out[k];
        r.noise_power = ch.noise_power;
        const auto &paths = ch.users[k].paths;
        r.desired_power = std::norm(cplx(paths[0].gain.dot(beams.beams[k])));
        for (std::size_t l = 1; l < paths.size(); l++)
            r.isi_power += std::norm(cplx(paths[l].gain.dot(beams.beams[k])));
        for (int kp = 0; kp < nk; kp++)
        {
            if (kp == k)
                continue;
            for (const Path &p : paths)
                r.iui_power += std::norm(cplx(p.gain.dot(beams.beams[kp])));
        }
    }
    return out;
}

SpResult sp_mrt(const ChannelSet &ch, double total_power)
{
    ch.validate();
    if (!(total_power > 0.))
        throw config_error("sp_mrt: power must be positive");

    double fro2 = 0.;
    for (const UserChannel &u : ch.users)
        fro2 += u.paths[0].gain.squaredNorm();
    const double scale = std::sqrt(total_power / fro2);

    SpResult res;
    res.beams.num_antennas = ch.num_antennas;
    for (const UserChannel &u : ch.users)
        res.beams.beams.push_back(scale * u.paths[0].gain);

    for (const SinrReport &r : sp_sinr(ch, res.beams))
        res.per_user_rate.push_back(std::log2(1. + r.sinr()));
    return res;
}

SpResult sp_zf(const ChannelSet &ch, double total_power)
{
    ch.validate();
    if (!(total_power > 0.))
        throw config_error("sp_zf: power must be positive");
    if (ch.num_antennas < ch.total_paths())
        throw infeasible_error("sp_zf: needs at least as many antennas as total paths");

    const MatrixXcd h = channel_matrix(ch);
    const MatrixXcd gram = h.adjoint() * h;
    Eigen::LLT<MatrixXcd> llt(gram);
    if (llt.info() != Eigen::Success)
        throw infeasible_error("sp_zf: channel matrix is rank deficient");
    const MatrixXcd w = llt.solve(h.adjoint()).adjoint();  // full right pseudo-inverse

    const int nk = ch.num_users();
    std::vector<int> first_col(nk);
    int col = 0;
    for (int k = 0; k < nk; k++)
    {
        first_col[k] = col;
        col += ch.num_paths(k);
    }

    std::vector<double> inverse_gains(nk);
    for (int k = 0; k < nk; k++)
        inverse_gains[k] = ch.noise_power * w.col(first_col[k]).squaredNorm();
    const std::vector<double> vtil = water_fill(inverse_gains, total_power);

    SpResult res;
    res.beams.num_antennas = ch.num_antennas;
    res.per_user_rate.resize(nk);
    for (int k = 0; k < nk; k++)
    {
        const double w2 = w.col(first_col[k]).squaredNorm();
        const double vhat = vtil[k] / w2;
        res.beams.beams.push_back(std::sqrt(vhat) * w.col(first_col[k]));
        res.per_user_rate[k] = std::log2(1. + vhat / ch.noise_power);
    }
    return res;
}

namespace
{

// Objective of a power-only surrogate step, in minimization form:
//   -sum_t log2(b_t . p[block_t] + sigma_t) + lin . p + const
// where each term reads a contiguous block of the power vector.
class PowerSurrogateObjective : public newton::DenseFunction
{
public:
    struct Term
    {
        int offset;
        VectorXd b;
        double sigma;
    };

    PowerSurrogateObjective(int dim, std::vector<Term> terms, VectorXd lin, double constant)
        : DenseFunction(dim), terms_(std::move(terms)), lin_(std::move(lin)), constant_(constant)
    {
    }

    double value(const VectorXd &p) const override
    {
        double v = constant_ + lin_.dot(p);
        for (const Term &t : terms_)
        {
            const double arg = t.b.dot(p.segment(t.offset, t.b.size())) + t.sigma;
            if (arg <= 0.)
                return std::numeric_limits<double>::quiet_NaN();
            v -= std::log2(arg);
        }
        return v;
    }

    void derivatives(const VectorXd &p, VectorXd &grad, MatrixXd &hess) const override
    {
        grad = lin_;
        const double log2e = 1. / std::numbers::ln2;
        for (const Term &t : terms_)
        {
            const int n = static_cast<int>(t.b.size());
            const double arg = t.b.dot(p.segment(t.offset, n)) + t.sigma;
            grad.segment(t.offset, n) -= (log2e / arg) * t.b;
            hess.block(t.offset, t.offset, n, n) += (log2e / (arg * arg)) * t.b * t.b.transpose();
        }
    }

private:
    std::vector<Term> terms_;
    VectorXd lin_;
    double constant_;
};

class SimplexBudget : public newton::DenseFunction
{
public:
    SimplexBudget(int dim, double budget) : DenseFunction(dim), budget_(budget) {}
    double value(const VectorXd &p) const override { return p.sum() - budget_; }
    void derivatives(const VectorXd &, VectorXd &grad, MatrixXd &) const override
    {
        grad.setConstant(1.);
    }

private:
    double budget_;
};

class CoordinateNonNegative : public newton::SmoothFunction
{
public:
    explicit CoordinateNonNegative(int index) : support_{index} {}
    const std::vector<int> &support() const override { return support_; }
    double value(const VectorXd &xs) const override { return -xs(0); }
    void derivatives(const VectorXd &, VectorXd &grad, MatrixXd &) const override
    {
        grad(0) = -1.;
    }

private:
    std::vector<int> support_;
};

// Shared driver for the power-only RZF schemes: maximize
//   sum_t [log2(b1_t . p + sigma) - log2(b2_t . p + sigma)]
// over p >= 0 under a total budget, by SCA with the subtracted log replaced
// by its tangent at the current point.
struct PowerOnlyScaProblem
{
    struct Term
    {
        int offset;
        VectorXd b1;
        VectorXd b2;
        double sigma;
    };
    std::vector<Term> terms;
    int dim = 0;
    double budget = 0.;
    double rate_scale = 1.;  // 1/M for the per-channel-use OFDM rate

    double objective(const VectorXd &p) const
    {
        double v = 0.;
        for (const Term &t : terms)
        {
            const auto seg = p.segment(t.offset, t.b1.size());
            v += std::log2(t.b1.dot(seg) + t.sigma) - std::log2(t.b2.dot(seg) + t.sigma);
        }
        return rate_scale * v;
    }

    VectorXd solve_surrogate(const VectorXd &point) const
    {
        const double log2e = 1. / std::numbers::ln2;
        std::vector<PowerSurrogateObjective::Term> obj_terms;
        VectorXd lin = VectorXd::Zero(dim);
        double constant = 0.;
        for (const Term &t : terms)
        {
            obj_terms.push_back({t.offset, t.b1, t.sigma});
            const int n = static_cast<int>(t.b2.size());
            const double arg = t.b2.dot(point.segment(t.offset, n)) + t.sigma;
            lin.segment(t.offset, n) += (log2e / arg) * t.b2;
            constant += std::log2(arg) - (log2e / arg) * t.b2.dot(point.segment(t.offset, n));
        }

        PowerSurrogateObjective objective(dim, std::move(obj_terms), std::move(lin), constant);
        SimplexBudget budget_con(dim, budget);
        std::vector<CoordinateNonNegative> nonneg;
        nonneg.reserve(dim);
        for (int i = 0; i < dim; i++)
            nonneg.emplace_back(i);

        std::vector<const newton::SmoothFunction *> cons;
        cons.push_back(&budget_con);
        for (const auto &c : nonneg)
            cons.push_back(&c);

        VectorXd x0 = point * (1. - 1e-9);
        for (int i = 0; i < dim; i++)
            x0(i) = std::max(x0(i), 1e-14 * budget);

        return newton::minimize(objective, cons, x0, newton::Options{}).x;
    }

    ScaResult drive(const VectorXd &init, const SolverSettings &settings) const
    {
        return sca_drive([this](const VectorXd &p) { return solve_surrogate(p); },
                         [this](const VectorXd &p) { return objective(p); }, init, settings);
    }
};

} // namespace

SpResult sp_rzf(const ChannelSet &ch, double total_power, const SolverSettings &settings)
{
    ch.validate();
    if (!(total_power > 0.))
        throw config_error("sp_rzf: power must be positive");

    const int nk = ch.num_users();
    const int ltot = ch.total_paths();
    const MatrixXcd h = channel_matrix(ch);
    const double eps = ltot * ch.noise_power / total_power;

    MatrixXcd gram = h.adjoint() * h;
    gram.diagonal().array() += eps;
    const MatrixXcd tilde = gram.llt().solve(h.adjoint()).adjoint();

    std::vector<VectorXcd> dir(nk);
    int col = 0;
    for (int k = 0; k < nk; k++)
    {
        dir[k] = tilde.col(col) / tilde.col(col).norm();
        col += ch.num_paths(k);
    }

    // Power-only SCA over the per-user gains |h_kl^H dhat_k'|^2.
    PowerOnlyScaProblem sca;
    sca.dim = nk;
    sca.budget = total_power;
    for (int k = 0; k < nk; k++)
    {
        PowerOnlyScaProblem::Term t;
        t.offset = 0;
        t.b1 = VectorXd::Zero(nk);
        t.b2 = VectorXd::Zero(nk);
        t.sigma = ch.noise_power;
        for (int kp = 0; kp < nk; kp++)
        {
            double full = 0., tail = 0.;
            for (std::size_t l = 0; l < ch.users[k].paths.size(); l++)
            {
                const double b = std::norm(cplx(ch.users[k].paths[l].gain.dot(dir[kp])));
                full += b;
                if (l > 0)
                    tail += b;
            }
            t.b1(kp) = full;
            t.b2(kp) = (kp == k) ? tail : full;
        }
        sca.terms.push_back(std::move(t));
    }

    const VectorXd init = VectorXd::Constant(nk, total_power / nk);
    const ScaResult run = sca.drive(init, settings);

    SpResult res;
    res.beams.num_antennas = ch.num_antennas;
    res.objective_trace = run.objective_trace;
    for (int k = 0; k < nk; k++)
        res.beams.beams.push_back(std::sqrt(run.point(k)) * dir[k]);
    for (const SinrReport &r : sp_sinr(ch, res.beams))
        res.per_user_rate.push_back(std::log2(1. + r.sinr()));
    return res;
}

MatrixXcd sp_transmit_waveform(const SpBeamformerSet &beams,
                               const std::vector<VectorXcd> &symbols, int horizon)
{
    const int nk = beams.num_users();
    if (static_cast<int>(symbols.size()) != nk)
        throw contract_error("sp_transmit_waveform: stream count mismatch");

    MatrixXcd x = MatrixXcd::Zero(beams.num_antennas, horizon);
    for (int k = 0; k < nk; k++)
        for (int n = 0; n < horizon; n++)
            x.col(n) += beams.beams[k] * symbols[k](n);
    return x;
}

std::vector<EmpiricalSinrReport> sp_empirical_sinr(const std::vector<VectorXcd> &received,
                                                   const std::vector<VectorXcd> &symbols,
                                                   const ChannelSet &ch)
{
    const int nk = ch.num_users();
    if (static_cast<int>(received.size()) != nk || static_cast<int>(symbols.size()) != nk)
        throw contract_error("sp_empirical_sinr: stream count mismatch");

    const int transient = ch.max_delay();
    std::vector<EmpiricalSinrReport> out(nk);
    for (int k = 0; k < nk; k++)
    {
        const int delay = ch.users[k].paths[0].delay;  // strongest path first
        const int horizon = static_cast<int>(received[k].size());
        const int usable = horizon - transient;
        if (usable < 10000)
            throw estimation_error("sp_empirical_sinr: fewer than 10^4 usable symbols");

        cplx corr = 0.;
        double sym_energy = 0.;
        for (int n = transient; n < horizon; n++)
        {
            const cplx s = symbols[k](n - delay);
            corr += std::conj(s) * received[k](n);
            sym_energy += std::norm(s);
        }
        const cplx amp = corr / sym_energy;

        double resid = 0.;
        for (int n = transient; n < horizon; n++)
            resid += std::norm(received[k](n) - amp * symbols[k](n - delay));

        out[k].desired_power = std::norm(amp) * (sym_energy / usable);
        out[k].residual_power = resid / usable;
        out[k].sample_count = usable;
    }
    return out;
}

MatrixXd ofdm_sinr(const OfdmChannel &ofdm, const OfdmBeamformerSet &beams)
{
    const int nk = ofdm.num_users();
    const int m = ofdm.num_subcarriers;
    if (beams.num_users() != nk || beams.num_antennas != ofdm.num_antennas)
        throw contract_error("ofdm_sinr: beam set mismatch");

    MatrixXd out(nk, m);
    for (int k = 0; k < nk; k++)
        for (int c = 0; c < m; c++)
        {
            const VectorXcd h = ofdm.freq[k].col(c);
            const double desired = std::norm(cplx(h.dot(beams.beams[k].col(c))));
            double iui = 0.;
            for (int kp = 0; kp < nk; kp++)
                if (kp != k)
                    iui += std::norm(cplx(h.dot(beams.beams[kp].col(c))));
            out(k, c) = desired / (iui + ofdm.subcarrier_noise_power);
        }
    return out;
}

namespace
{

std::vector<double> ofdm_rates(const OfdmChannel &ofdm, const OfdmBeamformerSet &beams)
{
    const MatrixXd s = ofdm_sinr(ofdm, beams);
    std::vector<double> rates(ofdm.num_users());
    for (int k = 0; k < ofdm.num_users(); k++)
    {
        double sum = 0.;
        for (int c = 0; c < ofdm.num_subcarriers; c++)
            sum += std::log2(1. + s(k, c));
        rates[k] = sum / ofdm.num_subcarriers;
    }
    return rates;
}

} // namespace

OfdmResult ofdm_mrt(const OfdmChannel &ofdm, double power_per_channel_use)
{
    if (!(power_per_channel_use > 0.))
        throw config_error("ofdm_mrt: power must be positive");

    const int nk = ofdm.num_users();
    const int m = ofdm.num_subcarriers;
    double fro2 = 0.;
    for (const MatrixXcd &h : ofdm.freq)
        fro2 += h.squaredNorm();
    const double scale = std::sqrt(m * power_per_channel_use / fro2);

    OfdmResult res;
    res.beams.num_antennas = ofdm.num_antennas;
    for (int k = 0; k < nk; k++)
        res.beams.beams.push_back(scale * ofdm.freq[k]);
    res.per_user_rate = ofdm_rates(ofdm, res.beams);
    return res;
}

OfdmResult ofdm_zf(const OfdmChannel &ofdm, double power_per_channel_use)
{
    if (!(power_per_channel_use > 0.))
        throw config_error("ofdm_zf: power must be positive");
    const int nk = ofdm.num_users();
    const int m = ofdm.num_subcarriers;
    if (ofdm.num_antennas < nk)
        throw infeasible_error("ofdm_zf: needs at least as many antennas as users");

    // Per-sub-carrier pseudo-inverse directions b_{k,m}.
    std::vector<MatrixXcd> b(m);
    for (int c = 0; c < m; c++)
    {
        MatrixXcd hm(ofdm.num_antennas, nk);
        for (int k = 0; k < nk; k++)
            hm.col(k) = ofdm.freq[k].col(c);
        Eigen::LLT<MatrixXcd> llt{MatrixXcd(hm.adjoint() * hm)};
        if (llt.info() != Eigen::Success)
            throw infeasible_error("ofdm_zf: rank-deficient sub-carrier channel");
        b[c] = llt.solve(hm.adjoint()).adjoint();
    }

    // Water-filling across every (user, sub-carrier) channel.
    std::vector<double> inverse_gains(nk * m);
    for (int c = 0; c < m; c++)
        for (int k = 0; k < nk; k++)
            inverse_gains[c * nk + k] =
                ofdm.subcarrier_noise_power * b[c].col(k).squaredNorm();
    const std::vector<double> alloc = water_fill(inverse_gains, m * power_per_channel_use);

    OfdmResult res;
    res.beams.num_antennas = ofdm.num_antennas;
    for (int k = 0; k < nk; k++)
        res.beams.beams.push_back(MatrixXcd::Zero(ofdm.num_antennas, m));
    for (int c = 0; c < m; c++)
        for (int k = 0; k < nk; k++)
        {
            const double lambda = alloc[c * nk + k] / b[c].col(k).squaredNorm();
            res.beams.beams[k].col(c) = std::sqrt(lambda) * b[c].col(k);
        }
    res.per_user_rate = ofdm_rates(ofdm, res.beams);
    return res;
}

OfdmResult ofdm_rzf(const OfdmChannel &ofdm, double power_per_channel_use,
                    const SolverSettings &settings)
{
    if (!(power_per_channel_use > 0.))
        throw config_error("ofdm_rzf: power must be positive");
    const int nk = ofdm.num_users();
    const int m = ofdm.num_subcarriers;
    const double eps = nk * ofdm.subcarrier_noise_power / power_per_channel_use;

    std::vector<MatrixXcd> dhat(m);
    for (int c = 0; c < m; c++)
    {
        MatrixXcd hm(ofdm.num_antennas, nk);
        for (int k = 0; k < nk; k++)
            hm.col(k) = ofdm.freq[k].col(c);
        MatrixXcd gram = hm.adjoint() * hm;
        gram.diagonal().array() += eps;
        MatrixXcd d = gram.llt().solve(hm.adjoint()).adjoint();
        for (int k = 0; k < nk; k++)
            d.col(k) /= d.col(k).norm();
        dhat[c] = std::move(d);
    }

    PowerOnlyScaProblem sca;
    sca.dim = nk * m;
    sca.budget = m * power_per_channel_use;
    sca.rate_scale = 1. / m;
    for (int c = 0; c < m; c++)
        for (int k = 0; k < nk; k++)
        {
            PowerOnlyScaProblem::Term t;
            t.offset = c * nk;
            t.b1 = VectorXd::Zero(nk);
            t.b2 = VectorXd::Zero(nk);
            t.sigma = ofdm.subcarrier_noise_power;
            for (int kp = 0; kp < nk; kp++)
            {
                const double a = std::norm(cplx(ofdm.freq[k].col(c).dot(dhat[c].col(kp))));
                t.b1(kp) = a;
                t.b2(kp) = (kp == k) ? 0. : a;
            }
            sca.terms.push_back(std::move(t));
        }

    const VectorXd init = VectorXd::Constant(nk * m, power_per_channel_use / nk);
    const ScaResult run = sca.drive(init, settings);

    OfdmResult res;
    res.beams.num_antennas = ofdm.num_antennas;
    res.objective_trace = run.objective_trace;
    for (int k = 0; k < nk; k++)
        res.beams.beams.push_back(MatrixXcd::Zero(ofdm.num_antennas, m));
    for (int c = 0; c < m; c++)
        for (int k = 0; k < nk; k++)
            res.beams.beams[k].col(c) = std::sqrt(run.point(c * nk + k)) * dhat[c].col(k);
    res.per_user_rate = ofdm_rates(ofdm, res.beams);
    return res;
}

} // namespace dam
