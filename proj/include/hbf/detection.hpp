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


#ifndef HBF_DETECTION_HPP
#define HBF_DETECTION_HPP

#include "hbf/channel.hpp"
#include "hbf/core.hpp"
#include "hbf/schemes.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hbf {

// Unit average energy constellation with a Gray labelling: point i carries
// the bit pattern of i (most significant bit first).
class Constellation {
public:
    static Constellation make(Modulation m);

    const std::string& name() const { return name_; }
    const ComplexVector& points() const { return points_; }
    int bits_per_symbol() const { return bits_; }
    Index size() const { return points_.size(); }

    // Index of the point equal to s (within 1e-9); DomainError otherwise.
    Index index_of(Complex s) const;

private:
    std::string name_;
    ComplexVector points_;
    int bits_ = 0;
};

using Bits = std::vector<std::uint8_t>;

Bits bits_from_symbols(const ComplexVector& symbols, const Constellation& q);
ComplexVector symbols_from_bits(std::span<const std::uint8_t> bits, const Constellation& q);

enum class DetectorMode { MDD, AMDD, NWMDD, NWAMDD, NWIMDD };

std::string_view to_string(DetectorMode m);
std::optional<DetectorMode> parse_detector(std::string_view name);
std::span<const DetectorMode> all_detectors();
DetectorMode require_detector(std::string_view name);

// Whether the mode uses the effective matrix A_k (otherwise A_k = I) and
// which covariance it whitens with.
bool uses_effective_matrix(DetectorMode m);
bool uses_whitening(DetectorMode m);

// A_k = W_BB_k^H W_RF_k^H H_k F_HB_k.
ComplexMatrix effective_matrix(const ChannelSet& channels, const DesignResult& result, Index k);

// sigma^2 W_k^H W_k.
ComplexMatrix noise_covariance(const DesignResult& result, Index k, double noise_var);

// sigma^2 W_k^H W_k + sum_{j != k} W_k^H H_k F_j F_j^H H_k^H W_k.
ComplexMatrix interference_covariance(const ChannelSet& channels, const DesignResult& result, Index k,
                                      double noise_var);

inline constexpr std::uint64_t kDefaultHypothesisCap = std::uint64_t{1} << 20;

// Exhaustive minimum-distance search over Q^{n_s}. The metric and the
// hypothesis table are prepared once, so one detector serves many vectors.
class Detector {
public:
    Detector(const ComplexMatrix& a, const ComplexMatrix& k_cov, DetectorMode mode, const Constellation& q,
             std::uint64_t hypothesis_cap = kDefaultHypothesisCap);

    // Constellation index per stream; ties go to the lowest hypothesis index.
    std::vector<Index> detect_indices(const ComplexVector& y) const;
    ComplexVector detect(const ComplexVector& y) const;

    bool whitening_regularized() const { return regularized_; }

private:
    Constellation q_;
    Index streams_;
    Index hypotheses_;
    ComplexMatrix whitener_;    // identity for unwhitened modes
    ComplexMatrix candidates_;  // whitener * A * d_h, one column per hypothesis
    bool regularized_ = false;
};

// Hypothesis h assigns stream s the point (h / |Q|^s) mod |Q|.
ComplexVector detect(const ComplexVector& y, const ComplexMatrix& a, const ComplexMatrix& k_cov, DetectorMode mode,
                     const Constellation& q, std::uint64_t hypothesis_cap = kDefaultHypothesisCap);

} // namespace hbf

#endif // HBF_DETECTION_HPP
