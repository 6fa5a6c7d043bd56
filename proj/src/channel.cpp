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


#include "hbf/channel.hpp"

#include "hbf/random.hpp"

#include <cstring>

namespace hbf {

namespace {

constexpr std::uint64_t kChannelDomain = 0x43484e4cULL;  // "CHNL"

} // namespace

ComplexMatrix ChannelSet::stacked() const
{
    if (h.empty())
        return {};
    ComplexMatrix out(h.front().rows() * users(), h.front().cols());
    for (Index k = 0; k < users(); ++k)
        out.middleRows(k * h.front().rows(), h.front().rows()) = h[k];
    return out;
}

std::uint64_t ChannelSet::hash() const
{
    std::uint64_t state = 0xcbf29ce484222325ULL;
    auto feed = [&state](const void* data, std::size_t n) {
        const auto* bytes = static_cast<const unsigned char*>(data);
        for (std::size_t i = 0; i < n; ++i) {
            state ^= bytes[i];
            state *= 0x100000001b3ULL;
        }
    };
    for (const auto& m : h) {
        const Index dims[2] = {m.rows(), m.cols()};
        feed(dims, sizeof dims);
        feed(m.data(), sizeof(Complex) * static_cast<std::size_t>(m.size()));
    }
    return state;
}

ComplexMatrix channel_from_paths(const std::vector<PathComponent>& paths, const SystemConfig& cfg)
{
    const Index nth = cfg.n_th();
    const Index nrh = cfg.n_rh();
    if (nth <= 0 || nrh <= 0)
        throw ConfigError("channel: antenna counts must be perfect squares");
    if (paths.empty())
        throw ConfigError("channel: at least one path is required");
    ComplexMatrix h = ComplexMatrix::Zero(cfg.n_r, cfg.n_t);
    for (const auto& p : paths) {
        const ComplexVector ar = upa_response(p.phi_r, p.theta_r, nrh, nrh);
        const ComplexVector at = upa_response(p.phi_t, p.theta_t, nth, nth);
        h.noalias() += p.alpha * ar * at.adjoint();
    }
    h *= std::sqrt(static_cast<double>(cfg.n_t * cfg.n_r) / static_cast<double>(paths.size()));
    return h;
}

ChannelSet generate_channel(const SystemConfig& cfg, std::uint64_t seed)
{
    cfg.validate();
    constexpr double two_pi = 2.0 * std::numbers::pi;
    constexpr double pi = std::numbers::pi;
    ChannelSet out;
    out.h.reserve(cfg.k_users);
    out.paths.resize(cfg.k_users);
    for (Index k = 0; k < cfg.k_users; ++k) {
        auto& paths = out.paths[k];
        paths.reserve(cfg.n_paths);
        for (Index p = 0; p < cfg.n_paths; ++p) {
            CounterRng rng{kChannelDomain, seed, static_cast<std::uint64_t>(k), static_cast<std::uint64_t>(p)};
            PathComponent c;
            c.alpha = rng.complex_normal(1.0);
            c.phi_r = rng.uniform(0.0, two_pi);
            c.theta_r = rng.uniform(0.0, pi);
            c.phi_t = rng.uniform(0.0, two_pi);
            c.theta_t = rng.uniform(0.0, pi);
            paths.push_back(c);
        }
        out.h.push_back(channel_from_paths(paths, cfg));
    }
    return out;
}

} // namespace hbf
