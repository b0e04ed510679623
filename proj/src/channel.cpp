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

#include "dam/channel.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <set>

namespace dam
{

void GeometryConfig::validate() const
{
    if (num_antennas < 1)
        throw config_error("num_antennas must be positive");
    if (num_users < 1)
        throw config_error("num_users must be positive");
    if (static_cast<int>(paths_per_user.size()) != num_users)
        throw config_error("paths_per_user length must equal num_users");
    for (int l : paths_per_user)
        if (l < 1)
            throw config_error("paths_per_user entries must be positive");
    if (delay_min < 0)
        throw config_error("delay range lower bound must be nonnegative");
    if (delay_max < delay_min)
        throw config_error("delay range is empty");
    if (aod_max_deg < aod_min_deg)
        throw config_error("AoD range is empty");
    if (!(antenna_spacing > 0.))
        throw config_error("antenna_spacing must be positive");
    const int span = delay_max - delay_min + 1;
    for (int l : paths_per_user)
        if (l > span)
            throw config_error("delay range too small for requested distinct delays");
}

int UserChannel::max_delay() const
{
    int d = 0;
    for (const Path &p : paths)
        d = std::max(d, p.delay);
    return d;
}

int UserChannel::min_delay() const
{
    int d = paths.front().delay;
    for (const Path &p : paths)
        d = std::min(d, p.delay);
    return d;
}

int ChannelSet::total_paths() const
{
    int n = 0;
    for (const UserChannel &u : users)
        n += static_cast<int>(u.paths.size());
    return n;
}

int ChannelSet::max_delay() const
{
    int d = 0;
    for (const UserChannel &u : users)
        d = std::max(d, u.max_delay());
    return d;
}

void ChannelSet::validate() const
{
    if (num_antennas < 1)
        throw config_error("ChannelSet: num_antennas must be positive");
    if (!(noise_power > 0.))
        throw config_error("ChannelSet: noise_power must be positive");
    if (users.empty())
        throw config_error("ChannelSet: no users");
    for (const UserChannel &u : users)
    {
        if (u.paths.empty())
            throw config_error("ChannelSet: user without paths");
        std::set<int> delays;
        for (const Path &p : u.paths)
        {
            if (p.delay < 0)
                throw config_error("ChannelSet: negative delay");
            if (p.gain.size() != num_antennas)
                throw config_error("ChannelSet: gain vector length mismatch");
            if (!delays.insert(p.delay).second)
                throw config_error("ChannelSet: duplicate delay within a user");
        }
    }
}

namespace
{

// Uniform linear array steering vector, phase 2*pi*spacing*m*sin(theta).
VectorXcd steering(int num_antennas, double spacing, double theta_rad)
{
    VectorXcd a(num_antennas);
    const double phase_step = 2. * std::numbers::pi * spacing * std::sin(theta_rad);
    for (int m = 0; m < num_antennas; m++)
        a(m) = std::polar(1.0, phase_step * m);
    return a;
}

std::vector<int> draw_distinct_delays(std::mt19937_64 &rng, int lo, int hi, int count)
{
    std::uniform_int_distribution<int> dist(lo, hi);
    std::set<int> seen;
    std::vector<int> out;
    out.reserve(count);
    while (static_cast<int>(out.size()) < count)
    {
        const int d = dist(rng);
        if (seen.insert(d).second)
            out.push_back(d);
    }
    return out;
}

} // namespace

ChannelSet synthesize_channel(const GeometryConfig &cfg, double noise_power)
{
    cfg.validate();
    if (!(noise_power > 0.))
        throw config_error("noise_power must be positive");

    std::mt19937_64 rng(cfg.rng_seed);
    std::uniform_real_distribution<double> aod_deg(cfg.aod_min_deg, cfg.aod_max_deg);
    std::normal_distribution<double> randn(0., 1.);

    ChannelSet ch;
    ch.num_antennas = cfg.num_antennas;
    ch.noise_power = noise_power;
    ch.users.resize(cfg.num_users);

    for (int k = 0; k < cfg.num_users; k++)
    {
        const int nl = cfg.paths_per_user[k];
        const std::vector<int> delays = draw_distinct_delays(rng, cfg.delay_min, cfg.delay_max, nl);
        const double gain_sigma = std::sqrt(1. / (2. * nl));

        UserChannel &u = ch.users[k];
        u.paths.resize(nl);
        for (int l = 0; l < nl; l++)
        {
            const double theta = aod_deg(rng) * std::numbers::pi / 180.;
            const cplx g(gain_sigma * randn(rng), gain_sigma * randn(rng));
            u.paths[l].delay = delays[l];
            u.paths[l].gain = g * steering(cfg.num_antennas, cfg.antenna_spacing, theta);
        }

        // Strongest path first; remaining order preserved.
        std::stable_sort(u.paths.begin(), u.paths.end(),
                         [](const Path &a, const Path &b) { return a.gain.squaredNorm() > b.gain.squaredNorm(); });
    }
    return ch;
}

VectorXcd stack_user_channel(const ChannelSet &ch, int k)
{
    if (k < 0 || k >= ch.num_users())
        throw config_error("stack_user_channel: user index out of range");
    const UserChannel &u = ch.users[k];
    VectorXcd stacked(ch.num_antennas * static_cast<int>(u.paths.size()));
    for (std::size_t l = 0; l < u.paths.size(); l++)
        stacked.segment(static_cast<int>(l) * ch.num_antennas, ch.num_antennas) = u.paths[l].gain;
    return stacked;
}

OfdmChannel ofdm_channel(const ChannelSet &ch, int num_subcarriers)
{
    ch.validate();
    if (num_subcarriers <= ch.max_delay())
        throw config_error("ofdm_channel: number of sub-carriers must exceed the maximum delay");

    OfdmChannel out;
    out.num_antennas = ch.num_antennas;
    out.num_subcarriers = num_subcarriers;
    out.subcarrier_noise_power = ch.noise_power / num_subcarriers;
    out.freq.resize(ch.users.size());

    const double scale = 1. / std::sqrt(static_cast<double>(num_subcarriers));
    for (int k = 0; k < ch.num_users(); k++)
    {
        MatrixXcd h(ch.num_antennas, num_subcarriers);
        h.setZero();
        for (int m = 0; m < num_subcarriers; m++)
        {
            for (const Path &p : ch.users[k].paths)
            {
                const double phase = -2. * std::numbers::pi * m * p.delay / num_subcarriers;
                h.col(m) += std::polar(1.0, phase) * p.gain;
            }
        }
        out.freq[k] = scale * h;
    }
    return out;
}

double orthogonality_metric(const ChannelSet &ch)
{
    ch.validate();
    if (ch.total_paths() < 2)
        throw config_error("orthogonality_metric: needs at least two paths in total");

    std::vector<const VectorXcd *> all;
    for (const UserChannel &u : ch.users)
        for (const Path &p : u.paths)
            all.push_back(&p.gain);

    double worst = 0.;
    for (std::size_t a = 0; a < all.size(); a++)
    {
        for (std::size_t b = a + 1; b < all.size(); b++)
        {
            const double num = std::abs(all[a]->dot(*all[b]));
            const double den = all[a]->norm() * all[b]->norm();
            if (den > 0.)
                worst = std::max(worst, num / den);
        }
    }
    return worst;
}

} // namespace dam
