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


#include "hbf/channel_io.hpp"

namespace hbf {

namespace {

constexpr const char* kFormat = "hbf-channel/1";

nlohmann::json complex_pair(Complex z) { return nlohmann::json::array({z.real(), z.imag()}); }

Complex pair_complex(const nlohmann::json& j)
{
    if (!j.is_array() || j.size() != 2)
        throw ConfigError("channel dump: complex entries must be [re, im] pairs");
    return {j[0].get<double>(), j[1].get<double>()};
}

} // namespace

nlohmann::json channel_to_json(const ChannelSet& channels, const SystemConfig& cfg, std::uint64_t seed)
{
    nlohmann::json doc;
    doc["format"] = kFormat;
    doc["seed"] = seed;
    doc["n_t"] = cfg.n_t;
    doc["n_r"] = cfg.n_r;
    doc["k_users"] = channels.users();
    doc["n_paths"] = channels.paths.empty() ? 0 : channels.paths.front().size();
    auto& users = doc["users"] = nlohmann::json::array();
    for (Index k = 0; k < channels.users(); ++k) {
        nlohmann::json user;
        auto& paths = user["paths"] = nlohmann::json::array();
        for (const auto& p : channels.paths[k]) {
            paths.push_back({{"alpha", complex_pair(p.alpha)},
                             {"phi_r", p.phi_r},
                             {"theta_r", p.theta_r},
                             {"phi_t", p.phi_t},
                             {"theta_t", p.theta_t}});
        }
        const auto& h = channels.h[k];
        user["rows"] = h.rows();
        user["cols"] = h.cols();
        auto& entries = user["h"] = nlohmann::json::array();
        for (Index r = 0; r < h.rows(); ++r)
            for (Index c = 0; c < h.cols(); ++c)
                entries.push_back(complex_pair(h(r, c)));
        users.push_back(std::move(user));
    }
    return doc;
}

ChannelSet channel_from_json(const nlohmann::json& doc)
{
    try {
        if (doc.at("format").get<std::string>() != kFormat)
            throw ConfigError("channel dump: unsupported format tag");
        ChannelSet out;
        for (const auto& user : doc.at("users")) {
            std::vector<PathComponent> paths;
            for (const auto& p : user.at("paths")) {
                PathComponent c;
                c.alpha = pair_complex(p.at("alpha"));
                c.phi_r = p.at("phi_r").get<double>();
                c.theta_r = p.at("theta_r").get<double>();
                c.phi_t = p.at("phi_t").get<double>();
                c.theta_t = p.at("theta_t").get<double>();
                paths.push_back(c);
            }
            const auto rows = user.at("rows").get<Index>();
            const auto cols = user.at("cols").get<Index>();
            const auto& entries = user.at("h");
            if (entries.size() != static_cast<std::size_t>(rows * cols))
                throw ConfigError("channel dump: entry count does not match dimensions");
            ComplexMatrix h(rows, cols);
            std::size_t i = 0;
            for (Index r = 0; r < rows; ++r)
                for (Index c = 0; c < cols; ++c)
                    h(r, c) = pair_complex(entries[i++]);
            out.h.push_back(std::move(h));
            out.paths.push_back(std::move(paths));
        }
        return out;
    } catch (const nlohmann::json::exception& e) {
        throw ConfigError(std::string("channel dump: ") + e.what());
    }
}

} // namespace hbf
