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

#ifndef DAMLINK_SCENARIO_HPP
#define DAMLINK_SCENARIO_HPP

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "dam/channel.hpp"
#include "dam/metrics.hpp"
#include "dam/types.hpp"

namespace dam
{

enum class SweepKind
{
    transmit_power,  ///< sweep holds transmit powers in dBm
    path_count,      ///< sweep holds per-user path counts
    num_antennas,    ///< sweep holds array sizes
    alpha_grid,      ///< two-user rate-profile boundary trace
    papr,            ///< CCDF curves per scheme
};

const char *sweep_kind_name(SweepKind k);

double dbm_to_watt(double dbm);

/// Declarative experiment description, loaded from JSON.
struct ScenarioConfig
{
    std::string name;
    SweepKind kind = SweepKind::transmit_power;
    GeometryConfig geometry;
    double power_dbm = 20.;
    double noise_dbm = 0.;
    std::vector<Scheme> schemes;
    std::vector<std::string> beamformers;  ///< subset of MRT, ZF, RZF
    std::vector<double> sweep;             ///< meaning depends on kind
    int alpha_points = 5;
    int num_subcarriers = 64;
    long long coherence_samples = 128000;
    std::vector<std::uint64_t> seeds;
    PaprConfig papr;
    double papr_threshold_max_db = 13.;
    double papr_threshold_step_db = 0.1;
    std::string output = "result.csv";

    static ScenarioConfig from_json_file(const std::string &path);
    static ScenarioConfig from_json_text(const std::string &text, const std::string &origin);
    void validate() const;
};

struct RunOptions
{
    std::string out_dir = ".";
    int jobs = 1;
    std::uint64_t seed_offset = 0;
    bool validate_only = false;
    std::ostream *log = nullptr;
};

struct RunReport
{
    std::string csv_path;
    int rows = 0;
    int infeasible_rows = 0;
};

/// Runs the scenario and writes one CSV (UTF-8, '.' decimals, one header
/// row: sweep_value,scheme,beamformer,metric,seed,status,value). Sweep
/// points are dispatched to a worker pool; rows are merged in deterministic
/// task order regardless of completion order.
RunReport run_scenario(const ScenarioConfig &cfg, const RunOptions &options);

} // namespace dam

#endif
