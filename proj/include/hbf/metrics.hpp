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


#ifndef HBF_METRICS_HPP
#define HBF_METRICS_HPP

#include "hbf/channel.hpp"
#include "hbf/core.hpp"
#include "hbf/detection.hpp"
#include "hbf/schemes.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace hbf {

// log2 of the product of the squared `count` largest singular values of
// h_bb (count defaults to min(rows, cols)). Returns -inf when one of them is
// at or below kRankTolerance times the largest.
double eig_product_metric(const ComplexMatrix& h_bb, std::optional<Index> count = std::nullopt);

// sum_k log2 det(I + W_k^H H_k F_k F_k^H H_k^H W_k K_k^{-1}) with K_k the
// interference-plus-noise covariance.
double sum_rate(const ChannelSet& channels, const DesignResult& result, double noise_var);

struct BerCount {
    std::uint64_t bit_errors = 0;
    std::uint64_t bits_sent = 0;

    BerCount& operator+=(const BerCount& o)
    {
        bit_errors += o.bit_errors;
        bits_sent += o.bits_sent;
        return *this;
    }
    double rate() const { return bits_sent ? double(bit_errors) / double(bits_sent) : 0.0; }
};

// Monte Carlo bit errors over n_vectors transmissions of K n_s symbols,
// counted jointly over all users. Noise is drawn per receive antenna and
// passed through the combiner. Every detector sees the same draws, which
// depend only on rng_seed.
std::vector<BerCount> ber_trial(const ChannelSet& channels, const DesignResult& result, double noise_var,
                                std::span<const DetectorMode> detectors, const Constellation& q,
                                std::uint64_t n_vectors, std::uint64_t rng_seed);

BerCount ber_trial(const ChannelSet& channels, const DesignResult& result, double noise_var, DetectorMode detector,
                   const Constellation& q, std::uint64_t n_vectors, std::uint64_t rng_seed);

struct TrialRecord {
    SchemeId scheme = SchemeId::REF21_SVD_MMSE;
    std::optional<DetectorMode> detector;
    double snr_db = 0.0;
    std::uint64_t seed = 0;
    std::uint64_t channel_hash = 0;
    double eig_metric = 0.0;
    double sum_rate = 0.0;
    std::uint64_t bit_errors = 0;
    std::uint64_t bits_sent = 0;
    bool failed = false;
    bool converged = true;
};

} // namespace hbf

#endif // HBF_METRICS_HPP
