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

#ifndef DAMLINK_TYPES_HPP
#define DAMLINK_TYPES_HPP

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace dam
{

using cplx = std::complex<double>;
using Eigen::MatrixXcd;
using Eigen::MatrixXd;
using Eigen::VectorXcd;
using Eigen::VectorXd;
using Eigen::VectorXi;

/// Invalid configuration or precondition violation on user-supplied input.
class config_error : public std::invalid_argument
{
public:
    explicit config_error(const std::string &msg) : std::invalid_argument(msg) {}
};

/// Internal consistency violation (dimension mismatch, broken solver contract).
class contract_error : public std::logic_error
{
public:
    explicit contract_error(const std::string &msg) : std::logic_error(msg) {}
};

/// Requested construction is structurally infeasible (e.g. ZF with too few antennas).
class infeasible_error : public std::runtime_error
{
public:
    explicit infeasible_error(const std::string &msg) : std::runtime_error(msg) {}
};

/// Estimate requested from insufficient data.
class estimation_error : public std::runtime_error
{
public:
    explicit estimation_error(const std::string &msg) : std::runtime_error(msg) {}
};

} // namespace dam

#endif
