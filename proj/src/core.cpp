// SPDX-License-Identifier: Apache-2.0
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
// ------------------------------------------------------------------------


#include "hbf/core.hpp"

#include <cmath>
#include <string>

namespace hbf {

std::string to_string(Modulation m)
{
    switch (m) {
    case Modulation::Qpsk:
        return "QPSK";
    case Modulation::Qam16:
        return "QAM16";
    }
    return "QPSK";
}

Modulation parse_modulation(const std::string& name)
{
    if (name == "QPSK")
        return Modulation::Qpsk;
    if (name == "QAM16")
        return Modulation::Qam16;
    throw ConfigError("unknown modulation '" + name + "' (valid: QPSK, QAM16)");
}

namespace {

Index exact_sqrt(Index n)
{
    auto r = static_cast<Index>(std::llround(std::sqrt(static_cast<double>(n))));
    return r * r == n ? r : -1;
}

void require(bool ok, const std::string& what)
{
    if (!ok)
        throw ConfigError("invalid system config: " + what);
}

} // namespace

Index SystemConfig::n_th() const { return exact_sqrt(n_t); }
Index SystemConfig::n_rh() const { return exact_sqrt(n_r); }

void SystemConfig::validate() const
{
    require(n_t >= 1 && n_r >= 1 && n_s >= 1 && k_users >= 1, "dimensions must be positive");
    require(n_th() > 0, "n_t must be a perfect square (square UPA)");
    require(n_rh() > 0, "n_r must be a perfect square (square UPA)");
    require(k_users * n_s <= n_rf_t, "K * n_s <= n_rf_t");
    require(n_rf_t <= n_t, "n_rf_t <= n_t");
    require(n_s <= n_rf_r, "n_s <= n_rf_r");
    require(n_rf_r <= n_r, "n_rf_r <= n_r");
    require(n_paths >= 1, "n_paths >= 1");
    require(noise_var > 0.0 && std::isfinite(noise_var), "noise_var > 0");
}

} // namespace hbf
