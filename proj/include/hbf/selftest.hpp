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


#ifndef HBF_SELFTEST_HPP
#define HBF_SELFTEST_HPP

#include <string>
#include <vector>

namespace hbf {

struct SelfTestCheck {
    std::string name;
    bool passed = false;
    std::string detail;
};

// Invariant checks on small configurations: unit-modulus analog entries,
// power normalization, CIA ascent, BD leakage, MMSE energy equality and
// noise-free detection.
std::vector<SelfTestCheck> run_selftest();

} // namespace hbf

#endif // HBF_SELFTEST_HPP
