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


#include "hbf/detection.hpp"

#include <array>
#include <limits>

namespace hbf {

namespace {

constexpr std::array kDetectors = {DetectorMode::MDD, DetectorMode::AMDD, DetectorMode::NWMDD,
                                   DetectorMode::NWAMDD, DetectorMode::NWIMDD};

// Gray-coded PAM level for a 2-bit label: 00 -3, 01 -1, 11 +1, 10 +3.
double pam4_level(int label)
{
    static constexpr std::array<double, 4> levels = {-3.0, -1.0, 3.0, 1.0};
    return levels[label];
}

} // namespace

Constellation Constellation::make(Modulation m)
{
    Constellation q;
    switch (m) {
    case Modulation::Qpsk: {
        q.name_ = "QPSK";
        q.bits_ = 2;
        q.points_.resize(4);
        const double s = 1.0 / std::sqrt(2.0);
        for (int i = 0; i < 4; ++i) {
            const int b0 = (i >> 1) & 1;
            const int b1 = i & 1;
            q.points_(i) = Complex(s * (1 - 2 * b0), s * (1 - 2 * b1));
        }
        break;
    }
    case Modulation::Qam16: {
        q.name_ = "QAM16";
        q.bits_ = 4;
        q.points_.resize(16);
        const double s = 1.0 / std::sqrt(10.0);
        for (int i = 0; i < 16; ++i)
            q.points_(i) = Complex(s * pam4_level((i >> 2) & 3), s * pam4_level(i & 3));
        break;
    }
    }
    return q;
}

Index Constellation::index_of(Complex s) const
{
    for (Index i = 0; i < points_.size(); ++i)
        if (std::abs(points_(i) - s) <= 1e-9)
            return i;
    throw DomainError("symbol is not a point of the " + name_ + " constellation");
}

Bits bits_from_symbols(const ComplexVector& symbols, const Constellation& q)
{
    Bits out;
    out.reserve(static_cast<std::size_t>(symbols.size() * q.bits_per_symbol()));
    for (Index i = 0; i < symbols.size(); ++i) {
        const Index label = q.index_of(symbols(i));
        for (int b = q.bits_per_symbol() - 1; b >= 0; --b)
            out.push_back(static_cast<std::uint8_t>((label >> b) & 1));
    }
    return out;
}

ComplexVector symbols_from_bits(std::span<const std::uint8_t> bits, const Constellation& q)
{
    const auto per = static_cast<std::size_t>(q.bits_per_symbol());
    if (bits.size() % per != 0)
        throw DomainError("symbols_from_bits: bit count is not a multiple of bits per symbol");
    ComplexVector out(static_cast<Index>(bits.size() / per));
    for (Index i = 0; i < out.size(); ++i) {
        Index label = 0;
        for (std::size_t b = 0; b < per; ++b) {
            const auto bit = bits[static_cast<std::size_t>(i) * per + b];
            if (bit > 1)
                throw DomainError("symbols_from_bits: bits must be 0 or 1");
            label = (label << 1) | bit;
        }
        out(i) = q.points()(label);
    }
    return out;
}

std::string_view to_string(DetectorMode m)
{
    switch (m) {
    case DetectorMode::MDD:
        return "MDD";
    case DetectorMode::AMDD:
        return "AMDD";
    case DetectorMode::NWMDD:
        return "NWMDD";
    case DetectorMode::NWAMDD:
        return "NWAMDD";
    case DetectorMode::NWIMDD:
        return "NWIMDD";
    }
    return "?";
}

std::optional<DetectorMode> parse_detector(std::string_view name)
{
    for (auto m : kDetectors)
        if (to_string(m) == name)
            return m;
    return std::nullopt;
}

std::span<const DetectorMode> all_detectors() { return kDetectors; }

DetectorMode require_detector(std::string_view name)
{
    if (const auto d = parse_detector(name))
        return *d;
    std::string msg = "unknown detector '" + std::string(name) + "'; valid:";
    for (auto d : kDetectors)
        msg += " " + std::string(to_string(d));
    throw ConfigError(msg);
}

bool uses_effective_matrix(DetectorMode m)
{
    return m == DetectorMode::MDD || m == DetectorMode::NWMDD || m == DetectorMode::NWIMDD;
}

bool uses_whitening(DetectorMode m)
{
    return m == DetectorMode::NWMDD || m == DetectorMode::NWAMDD || m == DetectorMode::NWIMDD;
}

ComplexMatrix effective_matrix(const ChannelSet& channels, const DesignResult& result, Index k)
{
    const auto& c = result.combiners.at(static_cast<std::size_t>(k));
    return c.full().adjoint() * channels.h[k] * result.user_precoder(k);
}

ComplexMatrix noise_covariance(const DesignResult& result, Index k, double noise_var)
{
    const ComplexMatrix w = result.combiners.at(static_cast<std::size_t>(k)).full();
    return noise_var * (w.adjoint() * w);
}

ComplexMatrix interference_covariance(const ChannelSet& channels, const DesignResult& result, Index k,
                                      double noise_var)
{
    const ComplexMatrix w = result.combiners.at(static_cast<std::size_t>(k)).full();
    ComplexMatrix cov = noise_var * (w.adjoint() * w);
    const ComplexMatrix wh = w.adjoint() * channels.h[k];
    for (Index j = 0; j < channels.users(); ++j) {
        if (j == k)
            continue;
        const ComplexMatrix leak = wh * result.user_precoder(j);
        cov.noalias() += leak * leak.adjoint();
    }
    return (0.5 * (cov + cov.adjoint())).eval();
}

Detector::Detector(const ComplexMatrix& a, const ComplexMatrix& k_cov, DetectorMode mode, const Constellation& q,
                   std::uint64_t hypothesis_cap)
    : q_(q), streams_(a.cols())
{
    if (a.rows() != a.cols())
        throw DomainError("detect: effective matrix must be square (n_s x n_s)");
    const auto order = static_cast<std::uint64_t>(q.size());
    std::uint64_t count = 1;
    for (Index s = 0; s < streams_; ++s) {
        count *= order;
        if (count > hypothesis_cap)
            throw DomainError("detect: hypothesis space |Q|^n_s exceeds the cap of " +
                              std::to_string(hypothesis_cap));
    }
    hypotheses_ = static_cast<Index>(count);

    const ComplexMatrix eff = uses_effective_matrix(mode) ? a : ComplexMatrix::Identity(streams_, streams_);
    if (uses_whitening(mode)) {
        if (k_cov.rows() != streams_ || k_cov.cols() != streams_)
            throw DomainError("detect: covariance must be n_s x n_s for whitened modes");
        auto w = hermitian_inv_sqrt(k_cov);
        whitener_ = std::move(w.value);
        regularized_ = w.regularized;
    } else {
        whitener_ = ComplexMatrix::Identity(streams_, streams_);
    }

    ComplexMatrix table(streams_, hypotheses_);
    for (Index h = 0; h < hypotheses_; ++h) {
        Index rest = h;
        for (Index s = 0; s < streams_; ++s) {
            table(s, h) = q.points()(rest % q.size());
            rest /= q.size();
        }
    }
    candidates_ = whitener_ * eff * table;
}

std::vector<Index> Detector::detect_indices(const ComplexVector& y) const
{
    if (y.size() != streams_)
        throw DomainError("detect: received vector length must be n_s");
    const ComplexVector wy = whitener_ * y;
    Index best = 0;
    double best_metric = std::numeric_limits<double>::infinity();
    for (Index h = 0; h < hypotheses_; ++h) {
        const double metric = (wy - candidates_.col(h)).squaredNorm();
        if (metric < best_metric) {
            best_metric = metric;
            best = h;
        }
    }
    std::vector<Index> out(static_cast<std::size_t>(streams_));
    for (Index s = 0; s < streams_; ++s) {
        out[static_cast<std::size_t>(s)] = best % q_.size();
        best /= q_.size();
    }
    return out;
}

ComplexVector Detector::detect(const ComplexVector& y) const
{
    const auto idx = detect_indices(y);
    ComplexVector out(streams_);
    for (Index s = 0; s < streams_; ++s)
        out(s) = q_.points()(idx[static_cast<std::size_t>(s)]);
    return out;
}

ComplexVector detect(const ComplexVector& y, const ComplexMatrix& a, const ComplexMatrix& k_cov, DetectorMode mode,
                     const Constellation& q, std::uint64_t hypothesis_cap)
{
    return Detector(a, k_cov, mode, q, hypothesis_cap).detect(y);
}

} // namespace hbf
