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

#ifndef DAMLINK_CHANNEL_HPP
#define DAMLINK_CHANNEL_HPP

#include <cstdint>
#include <vector>

#include "dam/types.hpp"

namespace dam
{

/// Geometric sparse multipath channel parameters.
///
/// Each user k gets paths_per_user[k] temporal-resolvable paths. Per-path
/// sample delays are drawn without replacement per user from delay_range,
/// departure angles uniformly from aod_range_deg, and complex gains from a
/// circularly symmetric Gaussian with average power 1/L_k so the expected
/// channel power per user equals the array size.
struct GeometryConfig
{
    int num_antennas = 1;                ///< transmit array size
    int num_users = 1;                   ///< number of single-antenna users
    std::vector<int> paths_per_user;     ///< L_k per user
    int delay_min = 0;                   ///< inclusive, samples
    int delay_max = 0;                   ///< inclusive, samples
    double aod_min_deg = -90.0;          ///< inclusive, degrees
    double aod_max_deg = 90.0;           ///< inclusive, degrees
    double antenna_spacing = 0.5;        ///< element spacing in wavelengths
    std::uint64_t rng_seed = 0;

    void validate() const;
};

/// One resolvable multipath component: spatial signature and sample delay.
struct Path
{
    VectorXcd gain;  ///< length num_antennas
    int delay = 0;   ///< nonnegative, samples
};

struct UserChannel
{
    std::vector<Path> paths;  ///< at least one; delays pairwise distinct

    int max_delay() const;
    int min_delay() const;
};

/// Per-user sparse multipath MIMO channels plus the receiver noise power.
///
/// Paths are ordered strongest-first within each user (path 0 has the
/// largest gain norm).
struct ChannelSet
{
    int num_antennas = 0;
    double noise_power = 1.0;  ///< sigma^2, linear
    std::vector<UserChannel> users;

    int num_users() const { return static_cast<int>(users.size()); }
    int num_paths(int k) const { return static_cast<int>(users.at(k).paths.size()); }
    int total_paths() const;
    /// Largest per-user maximum delay across all users.
    int max_delay() const;

    void validate() const;
};

/// Per-sub-carrier frequency-domain channels obtained from a ChannelSet.
struct OfdmChannel
{
    int num_antennas = 0;
    int num_subcarriers = 0;             ///< M
    double subcarrier_noise_power = 0.;  ///< sigma^2 / M
    /// freq[k] has num_antennas rows and num_subcarriers columns.
    std::vector<MatrixXcd> freq;

    int num_users() const { return static_cast<int>(freq.size()); }
};

/// Draws a ChannelSet from the geometric model. Deterministic for a fixed
/// seed. Throws config_error when the delay range cannot hold the requested
/// number of distinct delays.
ChannelSet synthesize_channel(const GeometryConfig &cfg, double noise_power);

/// Vertical stack of user k's path vectors, length num_antennas * L_k.
VectorXcd stack_user_channel(const ChannelSet &ch, int k);

/// M-point DFT combination of the time-domain paths,
/// h_{k,m} = M^{-1/2} sum_l h_kl exp(-j 2 pi m n_kl / M).
/// Requires M greater than every delay in the set.
OfdmChannel ofdm_channel(const ChannelSet &ch, int num_subcarriers);

/// Worst-case normalized correlation over all distinct path pairs,
/// max |h_a^H h_b| / (|h_a||h_b|). Requires at least two paths in total.
double orthogonality_metric(const ChannelSet &ch);

} // namespace dam

#endif
