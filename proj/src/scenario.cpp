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

#include "dam/scenario.hpp"

#include <json.hpp>

#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <mutex>
#include <sstream>
#include <thread>

#include "dam/beamforming.hpp"
#include "dam/benchmarks.hpp"
#include "dam/rate_region.hpp"
#include "dam/signal.hpp"

namespace dam
{

using nlohmann::json;

const char *sweep_kind_name(SweepKind k)
{
    switch (k)
    {
    case SweepKind::transmit_power: return "transmit_power";
    case SweepKind::path_count: return "path_count";
    case SweepKind::num_antennas: return "num_antennas";
    case SweepKind::alpha_grid: return "alpha_grid";
    case SweepKind::papr: return "papr";
    }
    return "unknown";
}

double dbm_to_watt(double dbm)
{
    return std::pow(10., (dbm - 30.) / 10.);
}

namespace
{

SweepKind parse_kind(const std::string &s, const std::string &origin)
{
    if (s == "transmit_power")
        return SweepKind::transmit_power;
    if (s == "path_count")
        return SweepKind::path_count;
    if (s == "num_antennas")
        return SweepKind::num_antennas;
    if (s == "alpha_grid")
        return SweepKind::alpha_grid;
    if (s == "papr")
        return SweepKind::papr;
    throw config_error(origin + ": unknown sweep kind '" + s + "'");
}

Scheme parse_scheme(const std::string &s, const std::string &origin)
{
    if (s == "DAM")
        return Scheme::dam;
    if (s == "SP")
        return Scheme::sp;
    if (s == "OFDM")
        return Scheme::ofdm;
    throw config_error(origin + ": unknown scheme '" + s + "' (expected DAM, SP or OFDM)");
}

template <typename T>
T require_field(const json &j, const std::string &key, const std::string &origin)
{
    if (!j.contains(key))
        throw config_error(origin + ": missing field '" + key + "'");
    try
    {
        return j.at(key).get<T>();
    }
    catch (const json::exception &e)
    {
        throw config_error(origin + ": field '" + key + "': " + e.what());
    }
}

template <typename T>
T optional_field(const json &j, const std::string &key, T fallback, const std::string &origin)
{
    if (!j.contains(key))
        return fallback;
    try
    {
        return j.at(key).get<T>();
    }
    catch (const json::exception &e)
    {
        throw config_error(origin + ": field '" + key + "': " + e.what());
    }
}

} // namespace

ScenarioConfig ScenarioConfig::from_json_file(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw config_error(path + ": cannot open scenario file");
    std::stringstream buf;
    buf << in.rdbuf();
    return from_json_text(buf.str(), path);
}

ScenarioConfig ScenarioConfig::from_json_text(const std::string &text, const std::string &origin)
{
    json j;
    try
    {
        j = json::parse(text);
    }
    catch (const json::parse_error &e)
    {
        throw config_error(origin + ": " + e.what());
    }

    ScenarioConfig cfg;
    cfg.name = require_field<std::string>(j, "name", origin);
    cfg.kind = parse_kind(require_field<std::string>(j, "kind", origin), origin);

    const json &geo = j.contains("geometry") ? j.at("geometry") : json::object();
    const std::string gorigin = origin + ": geometry";
    cfg.geometry.num_antennas = require_field<int>(geo, "num_antennas", gorigin);
    cfg.geometry.num_users = require_field<int>(geo, "num_users", gorigin);
    if (geo.contains("paths_per_user") && geo.at("paths_per_user").is_array())
        cfg.geometry.paths_per_user =
            require_field<std::vector<int>>(geo, "paths_per_user", gorigin);
    else
        cfg.geometry.paths_per_user.assign(cfg.geometry.num_users,
                                           require_field<int>(geo, "paths_per_user", gorigin));
    const auto delay = optional_field<std::vector<int>>(geo, "delay_range", {0, 16}, gorigin);
    if (delay.size() != 2)
        throw config_error(gorigin + ": delay_range must have two entries");
    cfg.geometry.delay_min = delay[0];
    cfg.geometry.delay_max = delay[1];
    const auto aod =
        optional_field<std::vector<double>>(geo, "aod_range_deg", {-90., 90.}, gorigin);
    if (aod.size() != 2)
        throw config_error(gorigin + ": aod_range_deg must have two entries");
    cfg.geometry.aod_min_deg = aod[0];
    cfg.geometry.aod_max_deg = aod[1];
    cfg.geometry.antenna_spacing = optional_field<double>(geo, "antenna_spacing", 0.5, gorigin);

    cfg.power_dbm = optional_field<double>(j, "power_dbm", 20., origin);
    cfg.noise_dbm = require_field<double>(j, "noise_dbm", origin);

    for (const auto &s : require_field<std::vector<std::string>>(j, "schemes", origin))
        cfg.schemes.push_back(parse_scheme(s, origin));
    cfg.beamformers = optional_field<std::vector<std::string>>(
        j, "beamformers", {"MRT", "ZF", "RZF"}, origin);

    cfg.sweep = optional_field<std::vector<double>>(j, "sweep", {}, origin);
    cfg.alpha_points = optional_field<int>(j, "alpha_points", 5, origin);
    cfg.num_subcarriers = optional_field<int>(j, "num_subcarriers", 64, origin);
    cfg.coherence_samples = optional_field<long long>(j, "coherence_samples", 128000LL, origin);

    if (j.contains("seeds") && j.at("seeds").is_array())
    {
        cfg.seeds = require_field<std::vector<std::uint64_t>>(j, "seeds", origin);
    }
    else if (j.contains("seeds"))
    {
        const json &s = j.at("seeds");
        const std::uint64_t base = optional_field<std::uint64_t>(s, "base", 1, origin + ": seeds");
        const int count = require_field<int>(s, "count", origin + ": seeds");
        for (int i = 0; i < count; i++)
            cfg.seeds.push_back(base + static_cast<std::uint64_t>(i));
    }
    else
    {
        cfg.seeds = {1};
    }

    if (j.contains("papr"))
    {
        const json &p = j.at("papr");
        const std::string porigin = origin + ": papr";
        cfg.papr.qam_order = optional_field<int>(p, "qam_order", 4, porigin);
        cfg.papr.num_trials = optional_field<int>(p, "num_trials", 200, porigin);
        cfg.papr.samples_per_trial = optional_field<int>(p, "samples_per_trial", 2048, porigin);
        cfg.papr_threshold_max_db = optional_field<double>(p, "threshold_max_db", 13., porigin);
        cfg.papr_threshold_step_db = optional_field<double>(p, "threshold_step_db", 0.1, porigin);
    }

    cfg.output = optional_field<std::string>(j, "output", cfg.name + ".csv", origin);
    cfg.validate();
    return cfg;
}

void ScenarioConfig::validate() const
{
    geometry.validate();
    if (name.empty())
        throw config_error("scenario: empty name");
    if (schemes.empty())
        throw config_error("scenario '" + name + "': no schemes listed");
    if (seeds.empty())
        throw config_error("scenario '" + name + "': no seeds");
    for (const std::string &b : beamformers)
        if (b != "MRT" && b != "ZF" && b != "RZF")
            throw config_error("scenario '" + name + "': unknown beamformer '" + b + "'");

    const bool needs_sweep = kind == SweepKind::transmit_power ||
                             kind == SweepKind::path_count || kind == SweepKind::num_antennas;
    if (needs_sweep)
    {
        if (sweep.empty())
            throw config_error("scenario '" + name + "': empty sweep list");
        for (std::size_t i = 0; i < sweep.size(); i++)
        {
            if (!std::isfinite(sweep[i]))
                throw config_error("scenario '" + name + "': sweep values must be finite");
            if (i > 0 && sweep[i] <= sweep[i - 1])
                throw config_error("scenario '" + name + "': sweep values must be increasing");
        }
    }
    if (kind == SweepKind::alpha_grid)
    {
        if (geometry.num_users != 2)
            throw config_error("scenario '" + name + "': alpha_grid needs exactly two users");
        if (alpha_points < 2)
            throw config_error("scenario '" + name + "': alpha_points must be at least 2");
    }
    if (kind == SweepKind::papr)
        papr.validate();

    for (Scheme s : schemes)
        if (s == Scheme::ofdm && num_subcarriers <= geometry.delay_max)
            throw config_error("scenario '" + name +
                               "': num_subcarriers must exceed the largest delay");
}

namespace
{

struct Row
{
    double sweep_value = 0.;
    std::string scheme;
    std::string beamformer;
    std::string metric;
    long long seed = -1;
    std::string status = "ok";
    double value = 0.;
    bool has_value = true;
};

void append_csv(std::string &out, const Row &r)
{
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.10g", r.sweep_value);
    out += buf;
    out += ',';
    out += r.scheme;
    out += ',';
    out += r.beamformer;
    out += ',';
    out += r.metric;
    out += ',';
    std::snprintf(buf, sizeof(buf), "%lld", r.seed);
    out += buf;
    out += ',';
    out += r.status;
    out += ',';
    if (r.has_value)
    {
        std::snprintf(buf, sizeof(buf), "%.10g", r.value);
        out += buf;
    }
    out += '\n';
}

std::vector<double> dam_scheme_sinrs(const ChannelSet &ch, const EffectiveChannelBank &bank,
                                     const std::string &beamformer, double power)
{
    PathBeamformerSet beams;
    if (beamformer == "MRT")
        beams = mrt_per_path(ch, power);
    else if (beamformer == "ZF")
        beams = zf_per_path(ch, power).beams;
    else
        beams = rzf_per_path(ch, power).beams;

    std::vector<double> sinrs;
    for (const SinrReport &r : dam_sinr(ch, bank, beams))
        sinrs.push_back(r.sinr());
    return sinrs;
}

std::vector<double> sp_scheme_sinrs(const ChannelSet &ch, const std::string &beamformer,
                                    double power)
{
    SpResult res;
    if (beamformer == "MRT")
        res = sp_mrt(ch, power);
    else if (beamformer == "ZF")
        res = sp_zf(ch, power);
    else
        res = sp_rzf(ch, power);

    std::vector<double> sinrs;
    for (const SinrReport &r : sp_sinr(ch, res.beams))
        sinrs.push_back(r.sinr());
    return sinrs;
}

std::vector<double> ofdm_scheme_sinrs(const OfdmChannel &ofdm, const std::string &beamformer,
                                      double power)
{
    OfdmResult res;
    if (beamformer == "MRT")
        res = ofdm_mrt(ofdm, power);
    else if (beamformer == "ZF")
        res = ofdm_zf(ofdm, power);
    else
        res = ofdm_rzf(ofdm, power);

    const MatrixXd s = ofdm_sinr(ofdm, res.beams);
    std::vector<double> sinrs;
    sinrs.reserve(s.size());
    for (int k = 0; k < s.rows(); k++)
        for (int c = 0; c < s.cols(); c++)
            sinrs.push_back(s(k, c));
    return sinrs;
}

// One (sweep value, seed) evaluation of every scheme/beamformer pair.
std::vector<Row> sweep_point_rows(const ScenarioConfig &cfg, double sweep_value,
                                  std::uint64_t seed)
{
    GeometryConfig geo = cfg.geometry;
    double power_dbm = cfg.power_dbm;
    switch (cfg.kind)
    {
    case SweepKind::transmit_power:
        power_dbm = sweep_value;
        break;
    case SweepKind::path_count:
        geo.paths_per_user.assign(geo.num_users, static_cast<int>(sweep_value));
        break;
    case SweepKind::num_antennas:
        geo.num_antennas = static_cast<int>(sweep_value);
        break;
    default:
        break;
    }
    geo.rng_seed = seed;

    const double power = dbm_to_watt(power_dbm);
    const double noise = dbm_to_watt(cfg.noise_dbm);
    const ChannelSet ch = synthesize_channel(geo, noise);
    const EffectiveChannelBank bank = effective_channel_bank(ch);

    OverheadConfig overhead;
    overhead.coherence_samples = cfg.coherence_samples;
    overhead.num_subcarriers = cfg.num_subcarriers;
    overhead.n_max = ch.max_delay();

    OfdmChannel ofdm;
    bool have_ofdm = false;

    std::vector<Row> rows;
    for (Scheme scheme : cfg.schemes)
    {
        for (const std::string &bf : cfg.beamformers)
        {
            Row row;
            row.sweep_value = sweep_value;
            row.scheme = scheme_name(scheme);
            row.beamformer = bf;
            row.metric = "effective_se_sum";
            row.seed = static_cast<long long>(seed);
            try
            {
                std::vector<double> sinrs;
                if (scheme == Scheme::dam)
                {
                    sinrs = dam_scheme_sinrs(ch, bank, bf, power);
                }
                else if (scheme == Scheme::sp)
                {
                    sinrs = sp_scheme_sinrs(ch, bf, power);
                }
                else
                {
                    if (!have_ofdm)
                    {
                        ofdm = ofdm_channel(ch, cfg.num_subcarriers);
                        have_ofdm = true;
                    }
                    sinrs = ofdm_scheme_sinrs(ofdm, bf, power);
                }
                row.value = effective_spectral_efficiency(sinrs, scheme, overhead);

                if (scheme == Scheme::dam && bf == "MRT" && cfg.kind == SweepKind::num_antennas)
                {
                    Row extra = row;
                    extra.metric = "interference_to_desired";
                    const auto rep = dam_sinr(ch, bank, mrt_per_path(ch, power));
                    double worst = 0.;
                    for (const auto &r : rep)
                        worst = std::max(worst, r.interference_ratio());
                    extra.value = worst;
                    rows.push_back(extra);
                }
            }
            catch (const infeasible_error &)
            {
                row.status = "infeasible";
                row.has_value = false;
            }
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::vector<Row> alpha_point_rows(const ScenarioConfig &cfg, int alpha_index,
                                  std::uint64_t seed)
{
    const auto grid = two_user_alpha_grid(cfg.alpha_points);
    const RateProfile &profile = grid[alpha_index];

    GeometryConfig geo = cfg.geometry;
    geo.rng_seed = seed;
    const double power = dbm_to_watt(cfg.power_dbm);
    const double noise = dbm_to_watt(cfg.noise_dbm);
    const ChannelSet ch = synthesize_channel(geo, noise);

    OverheadConfig overhead;
    overhead.coherence_samples = cfg.coherence_samples;
    overhead.num_subcarriers = cfg.num_subcarriers;
    overhead.n_max = ch.max_delay();

    std::vector<Row> rows;
    for (Scheme scheme : cfg.schemes)
    {
        Row base;
        base.sweep_value = profile.alpha(0);
        base.scheme = scheme_name(scheme);
        base.beamformer = "OPT";
        base.seed = static_cast<long long>(seed);
        try
        {
            ParetoPoint point;
            double scale = 1.;
            if (scheme == Scheme::dam)
            {
                point = dam_pareto_point(ch, profile, power);
                scale = 1. - guard_interval_overhead(Scheme::dam, overhead);
            }
            else if (scheme == Scheme::sp)
            {
                point = sp_pareto_point(ch, profile, power);
                scale = 1. - guard_interval_overhead(Scheme::sp, overhead);
            }
            else
            {
                point = ofdm_pareto_point(ofdm_channel(ch, cfg.num_subcarriers), profile, power);
                scale = 1. - guard_interval_overhead(Scheme::ofdm, overhead);
            }
            if (!point.converged)
                base.status = "infeasible";
            for (int k = 0; k < 2; k++)
            {
                Row row = base;
                row.metric = "effective_rate_user" + std::to_string(k + 1);
                row.value = scale * point.achieved_rates[k];
                rows.push_back(std::move(row));
            }
            Row rstar = base;
            rstar.metric = "r_star_raw";
            rstar.value = point.r_star;
            rows.push_back(std::move(rstar));
        }
        catch (const infeasible_error &)
        {
            base.status = "infeasible";
            base.has_value = false;
            base.metric = "effective_rate_user1";
            rows.push_back(base);
        }
    }
    return rows;
}

std::vector<Row> papr_scheme_rows(const ScenarioConfig &cfg, Scheme scheme)
{
    const double power = dbm_to_watt(cfg.power_dbm);
    const double noise = dbm_to_watt(cfg.noise_dbm);

    const int steps =
        static_cast<int>(std::lround(cfg.papr_threshold_max_db / cfg.papr_threshold_step_db));
    VectorXd thresholds(steps + 1);
    for (int i = 0; i <= steps; i++)
        thresholds(i) = i * cfg.papr_threshold_step_db;

    PaprSource source;
    switch (scheme)
    {
    case Scheme::dam:
        source = dam_papr_source(cfg.geometry, noise, power, cfg.papr.qam_order,
                                 cfg.papr.samples_per_trial);
        break;
    case Scheme::sp:
        source = sp_papr_source(cfg.geometry, noise, power, cfg.papr.qam_order,
                                cfg.papr.samples_per_trial);
        break;
    case Scheme::ofdm:
        source = ofdm_papr_source(cfg.geometry, noise, power, cfg.papr.qam_order,
                                  cfg.num_subcarriers, cfg.papr.samples_per_trial);
        break;
    }

    PaprConfig pc = cfg.papr;
    pc.rng_seed = cfg.seeds.front();
    const CcdfCurve curve = papr_ccdf(source, pc, thresholds);

    std::vector<Row> rows;
    for (int i = 0; i < curve.thresholds_db.size(); i++)
    {
        Row row;
        row.sweep_value = curve.thresholds_db(i);
        row.scheme = scheme_name(scheme);
        row.beamformer = "MRT";
        row.metric = "papr_ccdf";
        row.seed = static_cast<long long>(pc.rng_seed);
        row.value = curve.probability(i);
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace

RunReport run_scenario(const ScenarioConfig &cfg, const RunOptions &options)
{
    cfg.validate();
    if (options.jobs < 1)
        throw config_error("run_scenario: jobs must be at least 1");

    if (options.log)
    {
        *options.log << "scenario '" << cfg.name << "' (" << sweep_kind_name(cfg.kind) << ")\n"
                     << "  power " << cfg.power_dbm << " dBm = " << dbm_to_watt(cfg.power_dbm)
                     << " W, noise " << cfg.noise_dbm << " dBm = " << dbm_to_watt(cfg.noise_dbm)
                     << " W\n";
    }

    RunReport report;
    if (options.validate_only)
        return report;

    std::vector<std::uint64_t> seeds = cfg.seeds;
    for (auto &s : seeds)
        s += options.seed_offset;

    // Task grid in deterministic order.
    struct Task
    {
        int sweep_index;
        int seed_index;
    };
    std::vector<Task> tasks;
    int sweep_count = 0;
    switch (cfg.kind)
    {
    case SweepKind::transmit_power:
    case SweepKind::path_count:
    case SweepKind::num_antennas:
        sweep_count = static_cast<int>(cfg.sweep.size());
        break;
    case SweepKind::alpha_grid:
        sweep_count = cfg.alpha_points;
        break;
    case SweepKind::papr:
        sweep_count = static_cast<int>(cfg.schemes.size());
        break;
    }
    for (int i = 0; i < sweep_count; i++)
    {
        if (cfg.kind == SweepKind::papr)
        {
            tasks.push_back({i, 0});
            continue;
        }
        for (std::size_t s = 0; s < seeds.size(); s++)
            tasks.push_back({i, static_cast<int>(s)});
    }

    std::vector<std::vector<Row>> results(tasks.size());
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::string failure;
    std::mutex failure_mutex;

    const auto worker = [&]() {
        for (;;)
        {
            const std::size_t t = next.fetch_add(1);
            if (t >= tasks.size() || failed.load())
                return;
            try
            {
                const Task task = tasks[t];
                switch (cfg.kind)
                {
                case SweepKind::transmit_power:
                case SweepKind::path_count:
                case SweepKind::num_antennas:
                    results[t] = sweep_point_rows(cfg, cfg.sweep[task.sweep_index],
                                                  seeds[task.seed_index]);
                    break;
                case SweepKind::alpha_grid:
                    results[t] = alpha_point_rows(cfg, task.sweep_index, seeds[task.seed_index]);
                    break;
                case SweepKind::papr:
                    results[t] = papr_scheme_rows(cfg, cfg.schemes[task.sweep_index]);
                    break;
                }
            }
            catch (const std::exception &e)
            {
                std::scoped_lock lock(failure_mutex);
                failed.store(true);
                if (failure.empty())
                    failure = e.what();
            }
        }
    };

    const int jobs = std::min<int>(options.jobs, static_cast<int>(tasks.size()));
    if (jobs <= 1)
    {
        worker();
    }
    else
    {
        std::vector<std::thread> pool;
        for (int i = 0; i < jobs; i++)
            pool.emplace_back(worker);
        for (auto &th : pool)
            th.join();
    }
    if (failed.load())
        throw std::runtime_error("scenario '" + cfg.name + "' failed: " + failure);

    std::string csv = "sweep_value,scheme,beamformer,metric,seed,status,value\n";
    for (const auto &rows : results)
        for (const Row &row : rows)
        {
            append_csv(csv, row);
            report.rows++;
            if (row.status == "infeasible")
                report.infeasible_rows++;
        }

    std::filesystem::create_directories(options.out_dir);
    const std::filesystem::path out = std::filesystem::path(options.out_dir) / cfg.output;
    std::ofstream file(out, std::ios::binary);
    if (!file)
        throw std::runtime_error("cannot write " + out.string());
    file << csv;
    report.csv_path = out.string();

    if (options.log)
        *options.log << "  wrote " << report.rows << " rows to " << report.csv_path << "\n";
    return report;
}

} // namespace dam
