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


#include "hbf/metrics.hpp"

#include "hbf/random.hpp"

#include <Eigen/SVD>

#include <bit>
#include <cmath>
#include <limits>

namespace hbf {

namespace {

constexpr std::uint64_t kBerDomain = 0x42455254ULL;  // "BERT"

double log2_det_hpd(const ComplexMatrix& m)
{
    Eigen::LLT<ComplexMatrix> llt(m);
    if (llt.info() != Eigen::Success)
        throw NumericalError("sum_rate: matrix is not positive definite");
    double acc = 0.0;
    for (Index i = 0; i < m.rows(); ++i)
        acc += std::log2(llt.matrixLLT()(i, i).real());
    return 2.0 * acc;
}

} // namespace

double eig_product_metric(const ComplexMatrix& h_bb, std::optional<Index> count)
{
    const Index n = count.value_or(std::min(h_bb.rows(), h_bb.cols()));
    if (n < 0 || n > std::min(h_bb.rows(), h_bb.cols()))
        throw DomainError("eig_product_metric: count exceeds min(rows, cols)");
    Eigen::JacobiSVD<ComplexMatrix> svd(h_bb);
    const double floor = n > 0 ? kRankTolerance * svd.singularValues()(0) : 0.0;
    double acc = 0.0;
    for (Index i = 0; i < n; ++i) {
        const double s = svd.singularValues()(i);
        if (!(s > floor))
            return -std::numeric_limits<double>::infinity();
        acc += 2.0 * std::log2(s);
    }
    return acc;
}

double sum_rate(const ChannelSet& channels, const DesignResult& result, double noise_var)
{
    double total = 0.0;
    for (Index k = 0; k < channels.users(); ++k) {
        const ComplexMatrix w = result.combiners[static_cast<std::size_t>(k)].full();
        const ComplexMatrix g = w.adjoint() * channels.h[k] * result.user_precoder(k);
        const ComplexMatrix cov = interference_covariance(channels, result, k, noise_var);
        const ComplexMatrix m = hermitian_inv_sqrt(cov).value;
        ComplexMatrix snr = m * g * g.adjoint() * m.adjoint();
        snr = (0.5 * (snr + snr.adjoint())).eval();
        snr.diagonal().array() += 1.0;
        total += log2_det_hpd(snr);
    }
    return total;
}

std::vector<BerCount> ber_trial(const ChannelSet& channels, const DesignResult& result, double noise_var,
                                std::span<const DetectorMode> detectors, const Constellation& q,
                                std::uint64_t n_vectors, std::uint64_t rng_seed)
{
    if (n_vectors < 1)
        throw DomainError("ber_trial: n_vectors must be >= 1");
    const Index k_users = channels.users();
    const ComplexMatrix f = result.precoder.full();
    const Index streams_total = f.cols();
    const Index n_s = streams_total / k_users;
    const Index n_r = channels.h.front().rows();

    struct UserLink {
        ComplexMatrix gain;      // W_k^H H_k F, n_s x K n_s
        ComplexMatrix combiner;  // W_k^H
        std::vector<Detector> detectors;
    };
    std::vector<UserLink> links;
    links.reserve(static_cast<std::size_t>(k_users));
    for (Index k = 0; k < k_users; ++k) {
        UserLink link;
        link.combiner = result.combiners[static_cast<std::size_t>(k)].full().adjoint();
        link.gain = link.combiner * channels.h[k] * f;
        const ComplexMatrix a = link.gain.middleCols(k * n_s, n_s);
        std::optional<ComplexMatrix> k_noise;
        std::optional<ComplexMatrix> k_interf;
        for (auto mode : detectors) {
            ComplexMatrix cov;
            if (mode == DetectorMode::NWIMDD) {
                if (!k_interf)
                    k_interf = interference_covariance(channels, result, k, noise_var);
                cov = *k_interf;
            } else if (uses_whitening(mode)) {
                if (!k_noise)
                    k_noise = noise_covariance(result, k, noise_var);
                cov = *k_noise;
            }
            link.detectors.emplace_back(a, cov, mode, q);
        }
        links.push_back(std::move(link));
    }

    std::vector<BerCount> counts(detectors.size());
    std::vector<Index> sent(static_cast<std::size_t>(streams_total));
    ComplexVector s(streams_total);
    ComplexVector noise(n_r);
    for (std::uint64_t v = 0; v < n_vectors; ++v) {
        CounterRng rng{kBerDomain, rng_seed, v};
        for (Index i = 0; i < streams_total; ++i) {
            sent[static_cast<std::size_t>(i)] = static_cast<Index>(rng.below(static_cast<std::uint64_t>(q.size())));
            s(i) = q.points()(sent[static_cast<std::size_t>(i)]);
        }
        for (Index k = 0; k < k_users; ++k) {
            for (Index a = 0; a < n_r; ++a)
                noise(a) = rng.complex_normal(noise_var);
            const auto& link = links[static_cast<std::size_t>(k)];
            const ComplexVector y = link.gain * s + link.combiner * noise;
            for (std::size_t d = 0; d < detectors.size(); ++d) {
                const auto got = link.detectors[d].detect_indices(y);
                for (Index st = 0; st < n_s; ++st) {
                    const auto truth = static_cast<std::uint64_t>(sent[static_cast<std::size_t>(k * n_s + st)]);
                    counts[d].bit_errors += static_cast<std::uint64_t>(
                        std::popcount(truth ^ static_cast<std::uint64_t>(got[static_cast<std::size_t>(st)])));
                }
                counts[d].bits_sent += static_cast<std::uint64_t>(n_s * q.bits_per_symbol());
            }
        }
    }
    return counts;
}

BerCount ber_trial(const ChannelSet& channels, const DesignResult& result, double noise_var, DetectorMode detector,
                   const Constellation& q, std::uint64_t n_vectors, std::uint64_t rng_seed)
{
    const DetectorMode modes[] = {detector};
    return ber_trial(channels, result, noise_var, modes, q, n_vectors, rng_seed).front();
}

} // namespace hbf
