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


#ifndef HBF_RANDOM_HPP
#define HBF_RANDOM_HPP

#include <complex>
#include <cstdint>
#include <initializer_list>

namespace hbf {

std::uint64_t splitmix64(std::uint64_t x);

// Combines a sequence of integers into one 64-bit key.
std::uint64_t mix_key(std::initializer_list<std::uint64_t> parts);

// Counter-based stream: draw i is a pure function of (key, i), so streams
// keyed by (seed, user, path) do not depend on evaluation order.
class CounterRng {
public:
    explicit CounterRng(std::uint64_t key) : key_(key) {}
    CounterRng(std::initializer_list<std::uint64_t> parts) : key_(mix_key(parts)) {}

    std::uint64_t next_u64();
    // Uniform on [0, 1) with 53 random bits.
    double uniform();
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }
    std::uint64_t below(std::uint64_t n);
    // Circularly symmetric complex Gaussian with E|z|^2 = variance.
    std::complex<double> complex_normal(double variance = 1.0);

private:
    std::uint64_t key_;
    std::uint64_t counter_ = 0;
};

} // namespace hbf

#endif // HBF_RANDOM_HPP
