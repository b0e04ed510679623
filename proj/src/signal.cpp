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

#include "dam/signal.hpp"

#include <algorithm>
#include <cmath>
#include <random>

namespace dam
{

VectorXcd PathBeamformerSet::path_beam(int k, int l) const
{
    return stacked.at(k).segment(l * num_antennas, num_antennas);
}

double PathBeamformerSet::total_power() const
{
    double p = 0.;
    for (const VectorXcd &f : stacked)
        p += f.squaredNorm();
    return p;
}

DelayPlan delay_plan(const ChannelSet &ch)
{
    ch.validate();
    DelayPlan plan;
    plan.kappa.resize(ch.users.size());
    plan.max_delay.resize(ch.users.size());
    for (int k = 0; k < ch.num_users(); k++)
    {
        const UserChannel &u = ch.users[k];
        const int nmax = u.max_delay();
        plan.max_delay[k] = nmax;
        plan.kappa[k].resize(u.paths.size());
        for (std::size_t l = 0; l < u.paths.size(); l++)
            plan.kappa[k][l] = nmax - u.paths[l].delay;
    }
    return plan;
}

EffectiveChannelBank effective_channel_bank(const ChannelSet &ch)
{
    ch.validate();
    const int mt = ch.num_antennas;
    const int nk = ch.num_users();

    EffectiveChannelBank bank;
    bank.num_antennas = mt;
    bank.pair.resize(nk);
    for (int k = 0; k < nk; k++)
    {
        bank.pair[k].resize(nk);
        for (int kp = 0; kp < nk; kp++)
        {
            const UserChannel &obs = ch.users[k];
            const UserChannel &src = ch.users[kp];
            const int lsrc = static_cast<int>(src.paths.size());

            PairBank &pb = bank.pair[k][kp];
            pb.delta_min = obs.min_delay() - src.max_delay();
            const int delta_max = obs.max_delay() - src.min_delay();
            const int ncols = delta_max - pb.delta_min + 1;
            pb.cols = MatrixXcd::Zero(mt * lsrc, ncols);
            pb.zero_col = (pb.delta_min <= 0 && 0 <= delta_max) ? -pb.delta_min : -1;

            // Within-user delays are distinct, so at most one observer path l
            // matches a given (l', i) slot.
            for (int lp = 0; lp < lsrc; lp++)
            {
                for (const Path &p : obs.paths)
                {
                    const int i = p.delay - src.paths[lp].delay;
                    pb.cols.block(lp * mt, i - pb.delta_min, mt, 1) = p.gain;
                }
            }
        }
    }
    return bank;
}

std::vector<SinrReport> dam_sinr(const ChannelSet &ch, const PathBeamformerSet &beams)
{
    return dam_sinr(ch, effective_channel_bank(ch), beams);
}

std::vector<SinrReport> dam_sinr(const ChannelSet &ch, const EffectiveChannelBank &bank,
                                 const PathBeamformerSet &beams)
{
    const int nk = ch.num_users();
    if (beams.num_users() != nk || bank.num_users() != nk)
        throw contract_error("dam_sinr: user count mismatch");
    if (beams.num_antennas != ch.num_antennas)
        throw contract_error("dam_sinr: antenna count mismatch");
    for (int k = 0; k < nk; k++)
        if (beams.stacked[k].size() != ch.num_antennas * ch.num_paths(k))
            throw contract_error("dam_sinr: beam stack length mismatch");

    std::vector<SinrReport> reports(nk);
    for (int k = 0; k < nk; k++)
    {
        SinrReport &r = reports[k];
        r.noise_power = ch.noise_power;

        const PairBank &self = bank.pair[k][k];
        const VectorXcd proj = self.cols.adjoint() * beams.stacked[k];
        for (int c = 0; c < self.num_cols(); c++)
        {
            const double p = std::norm(proj(c));
            if (c == self.zero_col)
                r.desired_power = p;
            else
                r.isi_power += p;
        }

        for (int kp = 0; kp < nk; kp++)
        {
            if (kp == k)
                continue;
            const PairBank &cross = bank.pair[k][kp];
            r.iui_power += (cross.cols.adjoint() * beams.stacked[kp]).squaredNorm();
        }
    }
    return reports;
}

MatrixXcd transmit_waveform(const PathBeamformerSet &beams,
                            const std::vector<VectorXcd> &symbols, int horizon)
{
    const int nk = beams.num_users();
    if (static_cast<int>(symbols.size()) != nk)
        throw contract_error("transmit_waveform: symbol stream count mismatch");
    for (int k = 0; k < nk; k++)
        if (symbols[k].size() < horizon)
            throw config_error("transmit_waveform: symbol stream shorter than horizon");

    const int mt = beams.num_antennas;
    MatrixXcd x = MatrixXcd::Zero(mt, horizon);
    for (int k = 0; k < nk; k++)
    {
        const int nl = static_cast<int>(beams.plan.kappa[k].size());
        for (int l = 0; l < nl; l++)
        {
            const VectorXcd f = beams.path_beam(k, l);
            const int kap = beams.plan.kappa[k][l];
            for (int n = kap; n < horizon; n++)
                x.col(n) += f * symbols[k](n - kap);
        }
    }
    return x;
}

std::vector<VectorXcd> received_waveform(const ChannelSet &ch, const MatrixXcd &x,
                                         bool add_noise, std::uint64_t noise_seed)
{
    if (x.rows() != ch.num_antennas)
        throw contract_error("received_waveform: antenna count mismatch");
    const int horizon = static_cast<int>(x.cols());
    if (horizon <= ch.max_delay())
        throw config_error("received_waveform: sequence shorter than channel spread");

    std::mt19937_64 rng(noise_seed);
    std::normal_distribution<double> randn(0., 1.);
    const double nsig = std::sqrt(ch.noise_power / 2.);

    std::vector<VectorXcd> y(ch.users.size());
    for (int k = 0; k < ch.num_users(); k++)
    {
        VectorXcd out = VectorXcd::Zero(horizon);
        for (const Path &p : ch.users[k].paths)
        {
            for (int n = p.delay; n < horizon; n++)
                out(n) += p.gain.dot(x.col(n - p.delay));
        }
        if (add_noise)
            for (int n = 0; n < horizon; n++)
                out(n) += cplx(nsig * randn(rng), nsig * randn(rng));
        y[k] = std::move(out);
    }
    return y;
}

std::vector<EmpiricalSinrReport> empirical_sinr(const std::vector<VectorXcd> &received,
                                                const std::vector<VectorXcd> &symbols,
                                                const ChannelSet &ch,
                                                const PathBeamformerSet &beams)
{
    const int nk = ch.num_users();
    if (static_cast<int>(received.size()) != nk || static_cast<int>(symbols.size()) != nk)
        throw contract_error("empirical_sinr: stream count mismatch");

    // Skip the start-up transient where delayed copies are still missing.
    int max_kappa = 0;
    for (const auto &ks : beams.plan.kappa)
        for (int kap : ks)
            max_kappa = std::max(max_kappa, kap);
    const int transient = ch.max_delay() + max_kappa;

    std::vector<EmpiricalSinrReport> reports(nk);
    for (int k = 0; k < nk; k++)
    {
        const int nmax = ch.users[k].max_delay();
        const int horizon = static_cast<int>(received[k].size());
        const int usable = horizon - transient;
        if (usable < 10000)
            throw estimation_error("empirical_sinr: fewer than 10^4 usable symbols");

        // Least-squares single-tap amplitude of s_k[n - n_k,max] in y_k[n].
        cplx corr = 0.;
        double sym_energy = 0.;
        for (int n = transient; n < horizon; n++)
        {
            const cplx s = symbols[k](n - nmax);
            corr += std::conj(s) * received[k](n);
            sym_energy += std::norm(s);
        }
        const cplx amp = corr / sym_energy;

        double resid = 0.;
        for (int n = transient; n < horizon; n++)
            resid += std::norm(received[k](n) - amp * symbols[k](n - nmax));

        EmpiricalSinrReport &r = reports[k];
        r.desired_power = std::norm(amp) * (sym_energy / usable);
        r.residual_power = resid / usable;
        r.sample_count = usable;
    }
    return reports;
}

} // namespace dam
