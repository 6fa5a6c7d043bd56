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


#ifndef HBF_HARNESS_HPP
#define HBF_HARNESS_HPP

#include "hbf/core.hpp"
#include "hbf/detection.hpp"
#include "hbf/metrics.hpp"
#include "hbf/schemes.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace hbf {

struct MetricSet {
    bool eig_metric = true;
    bool sum_rate = true;
    bool ber = true;
};

struct ExperimentSpec {
    SystemConfig cfg;
    std::vector<SchemeId> schemes;
    std::vector<DetectorMode> detectors;
    std::vector<double> snr_grid_db;
    std::uint64_t n_trials = 1000;
    std::uint64_t vectors_per_trial = 100;
    std::uint64_t base_seed = 1;
    std::string output_path;
    unsigned workers = 1;
    DesignOptions design;
    MetricSet metrics;
    bool collect_cia_traces = false;

    void validate() const;
};

// Unknown keys are rejected. Every field is optional and keeps its default.
ExperimentSpec spec_from_json(const nlohmann::json& doc);
nlohmann::json spec_to_json(const ExperimentSpec& spec);

// Hash of everything that determines the numbers (not output path or
// worker count).
std::string config_hash(const ExperimentSpec& spec);

struct CellSummary {
    SchemeId scheme = SchemeId::REF21_SVD_MMSE;
    std::optional<DetectorMode> detector;
    double snr_db = 0.0;
    std::uint64_t trials = 0;  // trials that entered the means
    double eig_metric_mean = 0.0;
    double sum_rate_mean = 0.0;
    std::uint64_t bits_sent = 0;
    std::uint64_t bit_errors = 0;
    double ber = 0.0;
    double ber_ci_low = 0.0;
    double ber_ci_high = 0.0;
    std::uint64_t fail_count = 0;
    std::uint64_t nonconverged_count = 0;
    // trials whose eig metric was -inf; left out of eig_metric_mean
    std::uint64_t eig_degenerate_count = 0;
};

struct CiaTraceRow {
    std::uint64_t trial = 0;
    SchemeId scheme = SchemeId::REF21_SVD_MMSE;
    int run = 0;
    int sweep = 0;
    Index rank = 0;
    double objective = 0.0;
};

struct RunSummary {
    std::string config_hash;
    std::vector<CellSummary> cells;
    std::vector<TrialRecord> records;  // trial-major
    std::vector<CiaTraceRow> cia_traces;
    std::vector<std::string> failures;
};

// Wilson score interval at 95 %.
std::pair<double, double> wilson_interval(std::uint64_t errors, std::uint64_t n);

// Evaluates every (scheme, SNR, detector) cell on the same channel per
// trial; trial t uses seed base_seed + t. Results do not depend on the
// worker count.
RunSummary run(const ExperimentSpec& spec);

inline constexpr const char* kCsvHeader =
    "scheme,detector,snr_db,trials,eig_metric_mean,sum_rate_mean,bits_sent,bit_errors,ber,ber_ci_low,"
    "ber_ci_high,fail_count,config_hash";

std::string summary_csv(const RunSummary& summary);
std::string records_csv(const RunSummary& summary);
std::string cia_trace_csv(const RunSummary& summary);
// Run metadata written next to the CSV: spec, seed range, SNR convention.
nlohmann::json run_metadata(const ExperimentSpec& spec, const RunSummary& summary);

// Writes to a temporary sibling and renames it into place.
void write_file_atomic(const std::string& path, const std::string& content);

} // namespace hbf

#endif // HBF_HARNESS_HPP
