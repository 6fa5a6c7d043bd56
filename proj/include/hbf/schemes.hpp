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


#ifndef HBF_SCHEMES_HPP
#define HBF_SCHEMES_HPP

#include "hbf/analog.hpp"
#include "hbf/channel.hpp"
#include "hbf/core.hpp"

#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace hbf {

enum class SchemeId {
    REF21_SVD_MMSE,
    REF29_CIA_BD,
    M3_CIA_MMSE,
    P_CIA_STAR_MMSE_STAR,
    P_SVD_MMSE_STAR,
    P_CIA_MMSE_STAR,
    P_SVD_STAR_MMSE_STAR,
};

std::string_view to_string(SchemeId s);
std::optional<SchemeId> parse_scheme(std::string_view name);
std::span<const SchemeId> all_schemes();
// ConfigError listing the valid names when `name` is unknown.
SchemeId require_scheme(std::string_view name);

struct DesignOptions {
    CiaSettings cia;
    int outer_max = 10;
};

struct DesignDiagnostics {
    double eig_metric = 0.0;      // of the analog-only baseband channel
    int cia_runs = 0;
    int cia_sweeps = 0;
    int outer_iterations = 0;
    bool converged = true;
    bool regularized = false;
    std::vector<std::vector<CiaObjective>> cia_traces;
    std::vector<double> outer_trace;
};

// Output of the SNR-independent part of a design: analog matrices, plus the
// digital combiners when they do not depend on the noise level.
struct AnalogStage {
    SchemeId scheme = SchemeId::REF21_SVD_MMSE;
    ComplexMatrix f_rf;
    std::vector<ComplexMatrix> w_rf;
    std::vector<ComplexMatrix> w_bb;  // empty until fixed
    DesignDiagnostics diagnostics;
};

struct DesignResult {
    SchemeId scheme = SchemeId::REF21_SVD_MMSE;
    HybridPrecoder precoder;
    std::vector<UserCombiner> combiners;
    DesignDiagnostics diagnostics;

    // Columns k n_s .. (k+1) n_s - 1 of F_RF F_BB.
    ComplexMatrix user_precoder(Index k) const;
};

// Representative of the schemes that build the same analog stage; design_analog
// gives bit-identical f_rf and w_rf for every member.
SchemeId analog_family(SchemeId scheme);

// Throws ConfigError when the scheme cannot run on cfg.
void check_compatible(SchemeId scheme, const SystemConfig& cfg);

// Stacked W_RF_k^H H_k F_RF.
ComplexMatrix analog_baseband(const ChannelSet& channels, const ComplexMatrix& f_rf,
                              std::span<const ComplexMatrix> w_rf);

AnalogStage design_analog(SchemeId scheme, const ChannelSet& channels, const SystemConfig& cfg,
                          const DesignOptions& options = {});

// Digital stage for cfg.noise_var followed by the power normalization
// ||F_RF F_BB||_F^2 = K n_s.
DesignResult design_digital(const AnalogStage& analog, const ChannelSet& channels, const SystemConfig& cfg);

DesignResult design(SchemeId scheme, const ChannelSet& channels, const SystemConfig& cfg,
                    const DesignOptions& options = {});

} // namespace hbf

#endif // HBF_SCHEMES_HPP
