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


// hbf: Monte Carlo driver for the hybrid precoder/combiner designs.

#include "hbf/channel.hpp"
#include "hbf/channel_io.hpp"
#include "hbf/harness.hpp"
#include "hbf/selftest.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace hbf;

constexpr int kExitConfig = 1;
constexpr int kExitRuntime = 2;

struct Options {
    std::string config;
    std::string out;
    std::optional<std::uint64_t> seed;
    std::optional<std::uint64_t> trials;
    std::string snr;
    std::string schemes;
    std::string detectors;
    std::optional<unsigned> workers;
    bool verbose = false;
};

std::vector<std::string> split(const std::string& text, char sep)
{
    std::vector<std::string> parts;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, sep))
        if (!item.empty())
            parts.push_back(item);
    return parts;
}

double parse_number(const std::string& s)
{
    std::size_t used = 0;
    double v = 0.0;
    try {
        v = std::stod(s, &used);
    } catch (const std::exception&) {
        used = 0;
    }
    if (used != s.size() || s.empty())
        throw ConfigError("not a number: '" + s + "'");
    return v;
}

// "0,5,10" or "start:step:stop" (stop included when hit).
std::vector<double> parse_snr(const std::string& text)
{
    if (text.find(':') != std::string::npos) {
        const auto parts = split(text, ':');
        if (parts.size() != 3)
            throw ConfigError("SNR range must be start:step:stop, got '" + text + "'");
        const double a = parse_number(parts[0]);
        const double step = parse_number(parts[1]);
        const double b = parse_number(parts[2]);
        if (!(step > 0.0) || b < a)
            throw ConfigError("SNR range needs step > 0 and stop >= start");
        std::vector<double> grid;
        for (int i = 0;; ++i) {
            const double v = a + i * step;
            if (v > b + 1e-9 * std::max(1.0, std::abs(b)))
                break;
            grid.push_back(v);
        }
        return grid;
    }
    std::vector<double> grid;
    for (const auto& p : split(text, ','))
        grid.push_back(parse_number(p));
    if (grid.empty())
        throw ConfigError("empty SNR list");
    return grid;
}

ExperimentSpec load_spec(const Options& o)
{
    ExperimentSpec spec;
    if (!o.config.empty()) {
        std::ifstream f(o.config);
        if (!f)
            throw ConfigError("cannot open config '" + o.config + "'");
        nlohmann::json doc;
        try {
            f >> doc;
        } catch (const nlohmann::json::exception& e) {
            throw ConfigError("config '" + o.config + "': " + e.what());
        }
        spec = spec_from_json(doc);
    }
    if (spec.schemes.empty())
        spec.schemes.assign(all_schemes().begin(), all_schemes().end());
    if (spec.detectors.empty())
        spec.detectors = {DetectorMode::MDD, DetectorMode::AMDD};
    if (spec.snr_grid_db.empty())
        spec.snr_grid_db = parse_snr("-10:5:20");

    if (!o.schemes.empty()) {
        spec.schemes.clear();
        if (o.schemes == "all")
            spec.schemes.assign(all_schemes().begin(), all_schemes().end());
        else
            for (const auto& n : split(o.schemes, ','))
                spec.schemes.push_back(require_scheme(n));
    }
    if (!o.detectors.empty()) {
        spec.detectors.clear();
        if (o.detectors == "all")
            spec.detectors.assign(all_detectors().begin(), all_detectors().end());
        else
            for (const auto& n : split(o.detectors, ','))
                spec.detectors.push_back(require_detector(n));
    }
    if (!o.snr.empty())
        spec.snr_grid_db = parse_snr(o.snr);
    if (o.seed)
        spec.base_seed = *o.seed;
    if (o.trials)
        spec.n_trials = *o.trials;
    if (o.workers) {
        spec.workers = *o.workers;
    } else if (const char* env = std::getenv("HBF_WORKERS")) {
        const double w = parse_number(env);
        if (w < 1 || w != std::floor(w))
            throw ConfigError("HBF_WORKERS must be a positive integer");
        spec.workers = static_cast<unsigned>(w);
    }
    if (!o.out.empty())
        spec.output_path = o.out;
    spec.collect_cia_traces = o.verbose;
    return spec;
}

std::string sibling(const std::string& csv_path, const std::string& suffix)
{
    std::filesystem::path p(csv_path);
    const std::string stem = p.stem().string();
    return (p.parent_path() / (stem + suffix)).string();
}

int run_experiment(const Options& o, const std::string& command)
{
    ExperimentSpec spec = load_spec(o);
    spec.metrics.eig_metric = command == "eigmetric" || command == "sumrate" || command == "all";
    spec.metrics.sum_rate = command == "sumrate" || command == "all";
    spec.metrics.ber = command == "ber" || command == "all";
    // The eigen metric does not depend on the noise level.
    if (command == "eigmetric" && o.snr.empty())
        spec.snr_grid_db = {spec.snr_grid_db.front()};
    if (spec.output_path.empty())
        spec.output_path = "hbf_" + command + ".csv";
    spec.validate();

    if (o.verbose)
        std::cerr << "hbf " << command << ": " << spec.n_trials << " trials, " << spec.schemes.size()
                  << " schemes, " << spec.snr_grid_db.size() << " SNR points, " << spec.workers << " workers\n";
    const RunSummary summary = run(spec);

    write_file_atomic(spec.output_path, summary_csv(summary));
    write_file_atomic(sibling(spec.output_path, ".records.csv"), records_csv(summary));
    write_file_atomic(sibling(spec.output_path, ".meta.json"), run_metadata(spec, summary).dump(2) + "\n");
    if (o.verbose)
        write_file_atomic(sibling(spec.output_path, ".cia.csv"), cia_trace_csv(summary));

    for (const auto& f : summary.failures)
        std::cerr << "warning: " << f << '\n';
    std::cout << spec.output_path << '\n';
    return 0;
}

int dump_channel(const Options& o)
{
    ExperimentSpec spec = load_spec(o);
    spec.cfg.validate();
    const std::uint64_t seed = spec.base_seed;
    const ChannelSet ch = generate_channel(spec.cfg, seed);
    const std::string text = channel_to_json(ch, spec.cfg, seed).dump() + "\n";
    if (o.out.empty())
        std::cout << text;
    else
        write_file_atomic(o.out, text);
    return 0;
}

int selftest(bool verbose)
{
    int failed = 0;
    for (const auto& c : run_selftest()) {
        if (!c.passed)
            ++failed;
        if (!c.passed || verbose)
            std::cout << (c.passed ? "PASS " : "FAIL ") << c.name << " (" << c.detail << ")\n";
    }
    std::cout << (failed ? "selftest: " + std::to_string(failed) + " violation(s)\n" : "selftest: ok\n");
    return failed ? kExitRuntime : 0;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Hybrid precoder/combiner Monte Carlo harness"};
    app.require_subcommand(1);
    Options o;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", o.config, "JSON experiment file");
        sub->add_option("--out", o.out, "output path");
        sub->add_option("--seed", o.seed, "base seed");
        sub->add_option("--trials", o.trials, "number of channel realizations");
        sub->add_option("--snr", o.snr, "SNR grid in dB: list a,b,c or range start:step:stop");
        sub->add_option("--schemes", o.schemes, "comma-separated scheme names or 'all'");
        sub->add_option("--detectors", o.detectors, "comma-separated detector names or 'all'");
        sub->add_option("--workers", o.workers, "worker threads (default: HBF_WORKERS or 1)");
        sub->add_flag("--verbose", o.verbose, "progress on stderr and CIA objective traces");
    };
    const std::vector<std::pair<std::string, std::string>> commands = {
        {"eigmetric", "eigenvalue-product metric of the analog baseband channel"},
        {"sumrate", "achievable sum rate over the SNR grid"},
        {"ber", "Monte Carlo bit error rate over the SNR grid"},
        {"all", "every metric"},
        {"dump-channel", "write one channel realization as JSON"},
        {"selftest", "invariant checks on small configurations"},
    };
    for (const auto& [name, help] : commands)
        add_common(app.add_subcommand(name, help));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    const std::string command = app.get_subcommands().front()->get_name();
    try {
        if (command == "selftest")
            return selftest(o.verbose);
        if (command == "dump-channel")
            return dump_channel(o);
        return run_experiment(o, command);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << '\n';
        return kExitConfig;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
}
