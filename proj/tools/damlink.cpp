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

#include <CLI11.hpp>

#include <iostream>

#include "dam/scenario.hpp"

int main(int argc, char **argv)
{
    CLI::App app{"damlink - multi-user delay alignment modulation experiments"};
    app.require_subcommand(1);

    std::string config_path;
    dam::RunOptions options;
    options.jobs = 1;

    CLI::App *run = app.add_subcommand("run", "run a scenario config and write its CSV");
    run->add_option("config", config_path, "scenario JSON file")->required();
    run->add_flag("--validate-only", options.validate_only,
                  "parse and validate the config, write nothing");
    run->add_option("--seed-offset", options.seed_offset, "shift every seed by this amount");
    run->add_option("--out", options.out_dir, "output directory (default: current)");
    run->add_option("--jobs", options.jobs, "worker threads (default: 1)")
        ->check(CLI::PositiveNumber);

    CLI11_PARSE(app, argc, argv);

    try
    {
        const dam::ScenarioConfig cfg = dam::ScenarioConfig::from_json_file(config_path);
        options.log = &std::cout;
        const dam::RunReport report = dam::run_scenario(cfg, options);
        if (!options.validate_only && report.infeasible_rows > 0)
            std::cout << "  " << report.infeasible_rows << " infeasible row(s)\n";
    }
    catch (const dam::config_error &e)
    {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    }
    catch (const std::exception &e)
    {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
