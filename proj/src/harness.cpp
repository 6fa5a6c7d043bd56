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


#include "hbf/harness.hpp"

#include "hbf/channel.hpp"
#include "hbf/random.hpp"

#include <atomic>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace hbf {

namespace {

using nlohmann::json;

constexpr std::uint64_t kBerSeedDomain = 0x53454544ULL;  // "SEED"

void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& where)
{
    if (!obj.is_object())
        throw ConfigError(where + ": expected a JSON object");
    for (const auto& [key, value] : obj.items())
        if (!allowed.contains(key))
            throw ConfigError(where + ": unknown key '" + key + "'");
}

template <typename T>
void read_if(const json& obj, const char* key, T& out)
{
    if (obj.contains(key))
        out = obj.at(key).get<T>();
}

std::string format_double(double v)
{
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

struct TrialOutput {
    std::vector<TrialRecord> records;
    std::vector<CiaTraceRow> cia;
    std::vector<std::string> failures;
};

TrialOutput evaluate_trial(const ExperimentSpec& spec, std::uint64_t trial, const Constellation& q)
{
    TrialOutput out;
    const std::uint64_t seed = spec.base_seed + trial;
    const ChannelSet channels = generate_channel(spec.cfg, seed);
    const std::uint64_t channel_hash = channels.hash();
    const double e_t = static_cast<double>(spec.cfg.total_streams());

    auto push = [&](SchemeId scheme, double snr, std::optional<DetectorMode> det, auto&& fill) {
        TrialRecord r;
        r.scheme = scheme;
        r.detector = det;
        r.snr_db = snr;
        r.seed = seed;
        r.channel_hash = channel_hash;
        fill(r);
        out.records.push_back(r);
    };
    auto fail_all = [&](SchemeId scheme, std::size_t snr_from, const std::string& what) {
        out.failures.push_back("trial " + std::to_string(trial) + " " + std::string(to_string(scheme)) + ": " + what);
        for (std::size_t i = snr_from; i < spec.snr_grid_db.size(); ++i) {
            if (spec.metrics.ber) {
                for (auto d : spec.detectors)
                    push(scheme, spec.snr_grid_db[i], d, [](TrialRecord& r) { r.failed = true; });
            } else {
                push(scheme, spec.snr_grid_db[i], std::nullopt, [](TrialRecord& r) { r.failed = true; });
            }
        }
    };

    std::map<SchemeId, AnalogStage> shared;
    for (const auto scheme : spec.schemes) {
        AnalogStage analog;
        try {
            const SchemeId family = analog_family(scheme);
            auto it = shared.find(family);
            if (it == shared.end())
                it = shared.emplace(family, design_analog(family, channels, spec.cfg, spec.design)).first;
            analog = it->second;
            analog.scheme = scheme;
        } catch (const Error& e) {
            fail_all(scheme, 0, e.what());
            continue;
        }
        if (spec.collect_cia_traces) {
            int run_index = 0;
            for (const auto& tr : analog.diagnostics.cia_traces) {
                for (std::size_t s = 0; s < tr.size(); ++s)
                    out.cia.push_back({trial, scheme, run_index, static_cast<int>(s), tr[s].rank, tr[s].log_pdet});
                ++run_index;
            }
        }
        for (std::size_t si = 0; si < spec.snr_grid_db.size(); ++si) {
            const double snr = spec.snr_grid_db[si];
            SystemConfig cfg = spec.cfg;
            cfg.noise_var = snr_to_noise_var(snr, e_t);
            try {
                const DesignResult result = design_digital(analog, channels, cfg);
                const double eig = spec.metrics.eig_metric ? result.diagnostics.eig_metric
                                                           : std::numeric_limits<double>::quiet_NaN();
                const double rate = spec.metrics.sum_rate ? sum_rate(channels, result, cfg.noise_var)
                                                          : std::numeric_limits<double>::quiet_NaN();
                const bool converged = result.diagnostics.converged;
                if (spec.metrics.ber) {
                    const auto counts = ber_trial(channels, result, cfg.noise_var, spec.detectors, q,
                                                  spec.vectors_per_trial, mix_key({kBerSeedDomain, seed, si}));
                    for (std::size_t d = 0; d < spec.detectors.size(); ++d) {
                        push(scheme, snr, spec.detectors[d], [&](TrialRecord& r) {
                            r.eig_metric = eig;
                            r.sum_rate = rate;
                            r.bit_errors = counts[d].bit_errors;
                            r.bits_sent = counts[d].bits_sent;
                            r.converged = converged;
                        });
                    }
                } else {
                    push(scheme, snr, std::nullopt, [&](TrialRecord& r) {
                        r.eig_metric = eig;
                        r.sum_rate = rate;
                        r.converged = converged;
                    });
                }
            } catch (const Error& e) {
                fail_all(scheme, si, e.what());
                break;
            }
        }
    }
    return out;
}

} // namespace

void ExperimentSpec::validate() const
{
    cfg.validate();
    design.cia.validate();
    if (design.outer_max < 1)
        throw ConfigError("outer_max must be >= 1");
    if (schemes.empty())
        throw ConfigError("at least one scheme is required");
    if (snr_grid_db.empty())
        throw ConfigError("the SNR grid must not be empty");
    if (metrics.ber && detectors.empty())
        throw ConfigError("BER runs need at least one detector");
    if (n_trials < 1)
        throw ConfigError("n_trials must be >= 1");
    if (metrics.ber && vectors_per_trial < 1)
        throw ConfigError("vectors_per_trial must be >= 1");
    if (workers < 1)
        throw ConfigError("workers must be >= 1");
    for (auto s : schemes)
        check_compatible(s, cfg);
}

ExperimentSpec spec_from_json(const json& doc)
{
    ExperimentSpec spec;
    try {
        reject_unknown(doc,
                       {"cfg", "schemes", "detectors", "snr_grid_db", "n_trials", "vectors_per_trial", "base_seed",
                        "output_path", "workers", "cia"},
                       "config");
        if (doc.contains("cfg")) {
            const auto& c = doc.at("cfg");
            reject_unknown(c, {"n_t", "n_r", "n_s", "k_users", "n_rf_t", "n_rf_r", "n_paths", "noise_var", "modulation"},
                           "config.cfg");
            read_if(c, "n_t", spec.cfg.n_t);
            read_if(c, "n_r", spec.cfg.n_r);
            read_if(c, "n_s", spec.cfg.n_s);
            read_if(c, "k_users", spec.cfg.k_users);
            read_if(c, "n_rf_t", spec.cfg.n_rf_t);
            read_if(c, "n_rf_r", spec.cfg.n_rf_r);
            read_if(c, "n_paths", spec.cfg.n_paths);
            read_if(c, "noise_var", spec.cfg.noise_var);
            if (c.contains("modulation"))
                spec.cfg.modulation = parse_modulation(c.at("modulation").get<std::string>());
        }
        if (doc.contains("schemes")) {
            const auto& list = doc.at("schemes");
            if (list.is_string() && list.get<std::string>() == "all")
                spec.schemes.assign(all_schemes().begin(), all_schemes().end());
            else
                for (const auto& name : list)
                    spec.schemes.push_back(require_scheme(name.get<std::string>()));
        }
        if (doc.contains("detectors")) {
            const auto& list = doc.at("detectors");
            if (list.is_string() && list.get<std::string>() == "all")
                spec.detectors.assign(all_detectors().begin(), all_detectors().end());
            else
                for (const auto& name : list)
                    spec.detectors.push_back(require_detector(name.get<std::string>()));
        }
        read_if(doc, "snr_grid_db", spec.snr_grid_db);
        read_if(doc, "n_trials", spec.n_trials);
        read_if(doc, "vectors_per_trial", spec.vectors_per_trial);
        read_if(doc, "base_seed", spec.base_seed);
        read_if(doc, "output_path", spec.output_path);
        read_if(doc, "workers", spec.workers);
        if (doc.contains("cia")) {
            const auto& c = doc.at("cia");
            reject_unknown(c, {"max_sweeps", "conv_tol", "reg_eps", "outer_max"}, "config.cia");
            read_if(c, "max_sweeps", spec.design.cia.max_sweeps);
            read_if(c, "conv_tol", spec.design.cia.conv_tol);
            read_if(c, "reg_eps", spec.design.cia.reg_eps);
            read_if(c, "outer_max", spec.design.outer_max);
        }
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    return spec;
}

json spec_to_json(const ExperimentSpec& spec)
{
    json doc;
    doc["cfg"] = {{"n_t", spec.cfg.n_t},         {"n_r", spec.cfg.n_r},
                  {"n_s", spec.cfg.n_s},         {"k_users", spec.cfg.k_users},
                  {"n_rf_t", spec.cfg.n_rf_t},   {"n_rf_r", spec.cfg.n_rf_r},
                  {"n_paths", spec.cfg.n_paths}, {"noise_var", spec.cfg.noise_var},
                  {"modulation", to_string(spec.cfg.modulation)}};
    auto& schemes = doc["schemes"] = json::array();
    for (auto s : spec.schemes)
        schemes.push_back(std::string(to_string(s)));
    auto& detectors = doc["detectors"] = json::array();
    for (auto d : spec.detectors)
        detectors.push_back(std::string(to_string(d)));
    doc["snr_grid_db"] = spec.snr_grid_db;
    doc["n_trials"] = spec.n_trials;
    doc["vectors_per_trial"] = spec.vectors_per_trial;
    doc["base_seed"] = spec.base_seed;
    doc["output_path"] = spec.output_path;
    doc["workers"] = spec.workers;
    doc["cia"] = {{"max_sweeps", spec.design.cia.max_sweeps},
                  {"conv_tol", spec.design.cia.conv_tol},
                  {"reg_eps", spec.design.cia.reg_eps},
                  {"outer_max", spec.design.outer_max}};
    return doc;
}

std::string config_hash(const ExperimentSpec& spec)
{
    json doc = spec_to_json(spec);
    doc.erase("output_path");
    doc.erase("workers");
    doc["metrics"] = {spec.metrics.eig_metric, spec.metrics.sum_rate, spec.metrics.ber};
    const std::string text = doc.dump();
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016" PRIx64, h);
    return buf;
}

std::pair<double, double> wilson_interval(std::uint64_t errors, std::uint64_t n)
{
    if (n == 0)
        return {std::numeric_limits<double>::quiet_NaN(), std::numeric_limits<double>::quiet_NaN()};
    constexpr double z = 1.959963984540054;
    const double nn = static_cast<double>(n);
    const double p = static_cast<double>(errors) / nn;
    const double denom = 1.0 + z * z / nn;
    const double centre = (p + z * z / (2.0 * nn)) / denom;
    const double half = z * std::sqrt(p * (1.0 - p) / nn + z * z / (4.0 * nn * nn)) / denom;
    const double low = errors == 0 ? 0.0 : std::max(0.0, centre - half);
    const double high = errors == n ? 1.0 : std::min(1.0, centre + half);
    return {low, high};
}

RunSummary run(const ExperimentSpec& spec)
{
    spec.validate();
    const Constellation q = Constellation::make(spec.cfg.modulation);

    std::vector<TrialOutput> outputs(spec.n_trials);
    std::atomic<std::uint64_t> next{0};
    std::mutex error_mutex;
    std::exception_ptr first_error;
    auto worker = [&] {
        for (;;) {
            const std::uint64_t t = next.fetch_add(1);
            if (t >= spec.n_trials)
                return;
            try {
                outputs[t] = evaluate_trial(spec, t, q);
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (!first_error)
                    first_error = std::current_exception();
                next.store(spec.n_trials);
                return;
            }
        }
    };
    const unsigned n_workers = static_cast<unsigned>(std::min<std::uint64_t>(spec.workers, spec.n_trials));
    if (n_workers <= 1) {
        worker();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned i = 0; i < n_workers; ++i)
            pool.emplace_back(worker);
    }
    if (first_error)
        std::rethrow_exception(first_error);

    RunSummary summary;
    summary.config_hash = config_hash(spec);

    // Cell layout: scheme-major, then detector, then SNR.
    const std::size_t n_det = spec.metrics.ber ? spec.detectors.size() : 1;
    const std::size_t n_snr = spec.snr_grid_db.size();
    auto cell_index = [&](std::size_t scheme_i, std::size_t det_i, std::size_t snr_i) {
        return (scheme_i * n_det + det_i) * n_snr + snr_i;
    };
    summary.cells.resize(spec.schemes.size() * n_det * n_snr);
    std::vector<double> eig_sum(summary.cells.size(), 0.0);
    std::vector<std::uint64_t> eig_degenerate(summary.cells.size(), 0);
    std::vector<double> rate_sum(summary.cells.size(), 0.0);
    for (std::size_t si = 0; si < spec.schemes.size(); ++si)
        for (std::size_t di = 0; di < n_det; ++di)
            for (std::size_t ni = 0; ni < n_snr; ++ni) {
                auto& c = summary.cells[cell_index(si, di, ni)];
                c.scheme = spec.schemes[si];
                if (spec.metrics.ber)
                    c.detector = spec.detectors[di];
                c.snr_db = spec.snr_grid_db[ni];
            }

    auto position = [](const auto& list, const auto& value) {
        return static_cast<std::size_t>(std::find(list.begin(), list.end(), value) - list.begin());
    };
    for (auto& out : outputs) {
        for (const auto& r : out.records) {
            const std::size_t si = position(spec.schemes, r.scheme);
            const std::size_t di = r.detector ? position(spec.detectors, *r.detector) : 0;
            const std::size_t ni = position(spec.snr_grid_db, r.snr_db);
            const std::size_t ci = cell_index(si, di, ni);
            auto& c = summary.cells[ci];
            if (r.failed) {
                ++c.fail_count;
                continue;
            }
            ++c.trials;
            if (!r.converged)
                ++c.nonconverged_count;
            if (std::isinf(r.eig_metric)) {
                ++c.eig_degenerate_count;
                ++eig_degenerate[ci];
            } else {
                eig_sum[ci] += r.eig_metric;
            }
            rate_sum[ci] += r.sum_rate;
            c.bits_sent += r.bits_sent;
            c.bit_errors += r.bit_errors;
        }
        summary.records.insert(summary.records.end(), out.records.begin(), out.records.end());
        summary.cia_traces.insert(summary.cia_traces.end(), out.cia.begin(), out.cia.end());
        summary.failures.insert(summary.failures.end(), out.failures.begin(), out.failures.end());
        out = {};
    }
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (std::size_t ci = 0; ci < summary.cells.size(); ++ci) {
        auto& c = summary.cells[ci];
        const double n = static_cast<double>(c.trials);
        const double n_eig = n - static_cast<double>(eig_degenerate[ci]);
        c.eig_metric_mean = n_eig > 0 ? eig_sum[ci] / n_eig : nan;
        c.sum_rate_mean = c.trials ? rate_sum[ci] / n : nan;
        c.ber = c.bits_sent ? static_cast<double>(c.bit_errors) / static_cast<double>(c.bits_sent) : nan;
        std::tie(c.ber_ci_low, c.ber_ci_high) = wilson_interval(c.bit_errors, c.bits_sent);
    }
    return summary;
}

std::string summary_csv(const RunSummary& summary)
{
    std::ostringstream os;
    os << kCsvHeader << '\n';
    for (const auto& c : summary.cells) {
        os << to_string(c.scheme) << ',' << (c.detector ? to_string(*c.detector) : std::string_view("NONE")) << ','
           << format_double(c.snr_db) << ',' << c.trials << ',' << format_double(c.eig_metric_mean) << ','
           << format_double(c.sum_rate_mean) << ',' << c.bits_sent << ',' << c.bit_errors << ','
           << format_double(c.ber) << ',' << format_double(c.ber_ci_low) << ',' << format_double(c.ber_ci_high)
           << ',' << c.fail_count << ',' << summary.config_hash << '\n';
    }
    return os.str();
}

std::string records_csv(const RunSummary& summary)
{
    std::ostringstream os;
    os << "seed,channel_hash,scheme,detector,snr_db,eig_metric,sum_rate,bits_sent,bit_errors,failed,converged\n";
    for (const auto& r : summary.records) {
        char hash[17];
        std::snprintf(hash, sizeof hash, "%016" PRIx64, r.channel_hash);
        os << r.seed << ',' << hash << ',' << to_string(r.scheme) << ','
           << (r.detector ? to_string(*r.detector) : std::string_view("NONE")) << ',' << format_double(r.snr_db)
           << ',' << format_double(r.eig_metric) << ',' << format_double(r.sum_rate) << ',' << r.bits_sent << ','
           << r.bit_errors << ',' << int(r.failed) << ',' << int(r.converged) << '\n';
    }
    return os.str();
}

std::string cia_trace_csv(const RunSummary& summary)
{
    std::ostringstream os;
    os << "trial,scheme,run,sweep,rank,objective\n";
    for (const auto& r : summary.cia_traces)
        os << r.trial << ',' << to_string(r.scheme) << ',' << r.run << ',' << r.sweep << ',' << r.rank << ','
           << format_double(r.objective) << '\n';
    return os.str();
}

json run_metadata(const ExperimentSpec& spec, const RunSummary& summary)
{
    json doc;
    doc["config_hash"] = summary.config_hash;
    doc["spec"] = spec_to_json(spec);
    doc["seed_first"] = spec.base_seed;
    doc["seed_last"] = spec.base_seed + spec.n_trials - 1;
    doc["snr_definition"] = "SNR = E_T / sigma_n^2 with E_T = K * n_s, in dB";
    doc["metrics"] = {{"eig_metric", spec.metrics.eig_metric},
                      {"sum_rate", spec.metrics.sum_rate},
                      {"ber", spec.metrics.ber}};
    doc["failures"] = summary.failures;
    json degenerate = json::array();
    for (const auto& c : summary.cells) {
        if (c.eig_degenerate_count == 0)
            continue;
        degenerate.push_back({{"scheme", to_string(c.scheme)},
                              {"detector", c.detector ? json(to_string(*c.detector)) : json(nullptr)},
                              {"snr_db", c.snr_db},
                              {"count", c.eig_degenerate_count}});
    }
    doc["eig_degenerate"] = degenerate;
    return doc;
}

void write_file_atomic(const std::string& path, const std::string& content)
{
    namespace fs = std::filesystem;
    const fs::path target(path);
    if (target.has_parent_path() && !target.parent_path().empty())
        fs::create_directories(target.parent_path());
    fs::path tmp = target;
    tmp += ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
        if (!f)
            throw Error("cannot open '" + tmp.string() + "' for writing");
        f << content;
        f.flush();
        if (!f)
            throw Error("failed writing '" + tmp.string() + "'");
    }
    std::error_code ec;
    fs::rename(tmp, target, ec);
    if (ec)
        throw Error("cannot move '" + tmp.string() + "' to '" + path + "': " + ec.message());
}

} // namespace hbf
