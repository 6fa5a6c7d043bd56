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


#ifndef HBF_CHANNEL_HPP
#define HBF_CHANNEL_HPP

#include "hbf/core.hpp"

#include <cstdint>
#include <numbers>
#include <vector>

namespace hbf {

// One propagation path: gain plus angles of arrival (r) and departure (t).
struct PathComponent {
    Complex alpha;
    double phi_r = 0.0;
    double theta_r = 0.0;
    double phi_t = 0.0;
    double theta_t = 0.0;
};

struct ChannelSet {
    std::vector<ComplexMatrix> h;                   // K matrices, n_r x n_t
    std::vector<std::vector<PathComponent>> paths;  // K x N_p

    Index users() const { return static_cast<Index>(h.size()); }
    // [H_1; ...; H_K]
    ComplexMatrix stacked() const;
    // FNV-1a over the entry bytes; identifies a realization in run records.
    std::uint64_t hash() const;
};

// Uniform linear array response [1, e^{j psi}, ..., e^{j(m-1)psi}] / sqrt(m).
template <typename Real>
ComplexVectorT<Real> ula_response(Real psi, Index m)
{
    if (m < 1)
        throw DomainError("ula_response: antenna count must be >= 1");
    ComplexVectorT<Real> d(m);
    const Real norm = Real(1) / std::sqrt(static_cast<Real>(m));
    for (Index i = 0; i < m; ++i)
        d(i) = std::polar(norm, static_cast<Real>(i) * psi);
    return d;
}

// Half-wavelength UPA response d_h(pi cos(phi) sin(theta)) (x) d_v(pi cos(theta)).
template <typename Real>
ComplexVectorT<Real> upa_response(Real phi, Real theta, Index m_h, Index m_v)
{
    const Real pi = std::numbers::pi_v<Real>;
    const auto dh = ula_response<Real>(pi * std::cos(phi) * std::sin(theta), m_h);
    const auto dv = ula_response<Real>(pi * std::cos(theta), m_v);
    ComplexVectorT<Real> d(m_h * m_v);
    for (Index p = 0; p < m_h; ++p)
        d.segment(p * m_v, m_v) = dh(p) * dv;
    return d;
}

// Geometric channel for every user; a pure function of (cfg, seed).
ChannelSet generate_channel(const SystemConfig& cfg, std::uint64_t seed);

// Rebuilds H_k from stored path parameters.
ComplexMatrix channel_from_paths(const std::vector<PathComponent>& paths, const SystemConfig& cfg);

} // namespace hbf

#endif // HBF_CHANNEL_HPP
