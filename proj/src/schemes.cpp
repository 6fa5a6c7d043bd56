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


#include "hbf/schemes.hpp"

#include "hbf/digital.hpp"
#include "hbf/metrics.hpp"

#include <array>

namespace hbf {

namespace {

constexpr std::array kSchemes = {
    SchemeId::REF21_SVD_MMSE,  SchemeId::REF29_CIA_BD,    SchemeId::M3_CIA_MMSE,
    SchemeId::P_CIA_STAR_MMSE_STAR, SchemeId::P_SVD_MMSE_STAR, SchemeId::P_CIA_MMSE_STAR,
    SchemeId::P_SVD_STAR_MMSE_STAR,
};

void require(bool ok, SchemeId s, const std::string& what)
{
    if (!ok)
        throw ConfigError(std::string(to_string(s)) + " requires " + what);
}

void record(DesignDiagnostics& diag, const CiaResult& r)
{
    ++diag.cia_runs;
    diag.cia_sweeps += r.sweeps;
    diag.converged = diag.converged && r.converged;
    diag.regularized = diag.regularized || r.regularized;
    diag.cia_traces.push_back(r.trace);
}

} // namespace

std::string_view to_string(SchemeId s)
{
    switch (s) {
    case SchemeId::REF21_SVD_MMSE:
        return "REF21_SVD_MMSE";
    case SchemeId::REF29_CIA_BD:
        return "REF29_CIA_BD";
    case SchemeId::M3_CIA_MMSE:
        return "M3_CIA_MMSE";
    case SchemeId::P_CIA_STAR_MMSE_STAR:
        return "P_CIA_STAR_MMSE_STAR";
    case SchemeId::P_SVD_MMSE_STAR:
        return "P_SVD_MMSE_STAR";
    case SchemeId::P_CIA_MMSE_STAR:
        return "P_CIA_MMSE_STAR";
    case SchemeId::P_SVD_STAR_MMSE_STAR:
        return "P_SVD_STAR_MMSE_STAR";
    }
    return "?";
}

std::optional<SchemeId> parse_scheme(std::string_view name)
{
    for (auto s : kSchemes)
        if (to_string(s) == name)
            return s;
    return std::nullopt;
}

std::span<const SchemeId> all_schemes() { return kSchemes; }

SchemeId require_scheme(std::string_view name)
{
    if (const auto s = parse_scheme(name))
        return *s;
    std::string msg = "unknown scheme '" + std::string(name) + "'; valid:";
    for (auto s : kSchemes)
        msg += " " + std::string(to_string(s));
    throw ConfigError(msg);
}

ComplexMatrix DesignResult::user_precoder(Index k) const
{
    const Index n_s = precoder.f_bb.cols() / static_cast<Index>(combiners.size());
    return precoder.f_rf * precoder.f_bb.middleCols(k * n_s, n_s);
}

SchemeId analog_family(SchemeId scheme)
{
    switch (scheme) {
    case SchemeId::P_SVD_MMSE_STAR:
        return SchemeId::REF21_SVD_MMSE;
    case SchemeId::M3_CIA_MMSE:
    case SchemeId::P_CIA_MMSE_STAR:
        return SchemeId::REF29_CIA_BD;
    default:
        return scheme;
    }
}

void check_compatible(SchemeId scheme, const SystemConfig& cfg)
{
    cfg.validate();
    const Index ks = cfg.total_streams();
    switch (scheme) {
    case SchemeId::REF21_SVD_MMSE:
    case SchemeId::P_SVD_MMSE_STAR:
        require(cfg.n_rf_t == ks, scheme, "n_rf_t == K * n_s");
        require(cfg.n_rf_r == cfg.n_s, scheme, "n_rf_r == n_s");
        break;
    case SchemeId::M3_CIA_MMSE:
    case SchemeId::P_CIA_MMSE_STAR:
    case SchemeId::P_CIA_STAR_MMSE_STAR:
        require(cfg.n_rf_r == cfg.n_s, scheme, "n_rf_r == n_s (identity digital combiner)");
        break;
    case SchemeId::REF29_CIA_BD:
        require(cfg.n_rf_t - (cfg.k_users - 1) * cfg.n_rf_r >= cfg.n_s, scheme,
                "n_rf_t - (K - 1) * n_rf_r >= n_s (block diagonalization null space)");
        break;
    case SchemeId::P_SVD_STAR_MMSE_STAR:
        break;
    }
}

ComplexMatrix analog_baseband(const ChannelSet& channels, const ComplexMatrix& f_rf,
                              std::span<const ComplexMatrix> w_rf)
{
    Index rows = 0;
    for (const auto& w : w_rf)
        rows += w.cols();
    ComplexMatrix out(rows, f_rf.cols());
    Index r = 0;
    for (Index k = 0; k < channels.users(); ++k) {
        out.middleRows(r, w_rf[k].cols()) = w_rf[k].adjoint() * channels.h[k] * f_rf;
        r += w_rf[k].cols();
    }
    return out;
}

AnalogStage design_analog(SchemeId scheme, const ChannelSet& channels, const SystemConfig& cfg,
                          const DesignOptions& options)
{
    check_compatible(scheme, cfg);
    if (channels.users() != cfg.k_users)
        throw ConfigError("design: channel user count does not match config");

    const Index k_users = cfg.k_users;
    AnalogStage out;
    out.scheme = scheme;
    auto& diag = out.diagnostics;

    switch (scheme) {
    case SchemeId::REF21_SVD_MMSE:
    case SchemeId::P_SVD_MMSE_STAR: {
        out.f_rf.resize(cfg.n_t, cfg.n_rf_t);
        for (Index k = 0; k < k_users; ++k) {
            out.w_rf.push_back(svd_phase_combiner(channels.h[k], cfg.n_s));
            out.f_rf.middleCols(k * cfg.n_s, cfg.n_s) = conjugate_phase_precoder(channels.h[k], out.w_rf.back());
        }
        break;
    }
    case SchemeId::REF29_CIA_BD:
    case SchemeId::M3_CIA_MMSE:
    case SchemeId::P_CIA_MMSE_STAR: {
        for (Index k = 0; k < k_users; ++k) {
            auto res = cia_analog_combiner(channels.h[k], cfg.n_rf_r, options.cia);
            record(diag, res);
            out.w_rf.push_back(std::move(res.b));
        }
        auto res = cia_analog_precoder(channels.stacked(), block_diagonal(out.w_rf), cfg.n_rf_t, options.cia);
        record(diag, res);
        out.f_rf = std::move(res.b);
        break;
    }
    case SchemeId::P_CIA_STAR_MMSE_STAR: {
        auto res = recursive_cia(channels, cfg, options.cia, options.outer_max);
        for (const auto& r : res.last_pass)
            record(diag, r);
        diag.outer_iterations = res.outer_iterations;
        diag.converged = diag.converged && res.converged;
        diag.regularized = diag.regularized || res.regularized;
        diag.cia_sweeps = res.total_sweeps;
        diag.outer_trace = std::move(res.objective_trace);
        out.f_rf = std::move(res.f_rf);
        out.w_rf = std::move(res.w_rf);
        break;
    }
    case SchemeId::P_SVD_STAR_MMSE_STAR: {
        std::vector<ComplexMatrix> w_full;
        for (Index k = 0; k < k_users; ++k) {
            out.w_rf.push_back(svd_phase_combiner(channels.h[k], cfg.n_rf_r));
            out.w_bb.push_back(svd_digital_combiner(out.w_rf.back().adjoint() * channels.h[k], cfg.n_s));
            w_full.push_back(out.w_rf.back() * out.w_bb.back());
        }
        out.f_rf = eig_phase_precoder(channels.stacked(), block_diagonal(w_full), cfg.n_rf_t);
        break;
    }
    }

    diag.eig_metric = eig_product_metric(analog_baseband(channels, out.f_rf, out.w_rf), cfg.total_streams());
    return out;
}

DesignResult design_digital(const AnalogStage& analog, const ChannelSet& channels, const SystemConfig& cfg)
{
    check_compatible(analog.scheme, cfg);
    const Index k_users = cfg.k_users;
    const double noise_var = cfg.noise_var;

    DesignResult out;
    out.scheme = analog.scheme;
    out.diagnostics = analog.diagnostics;
    out.precoder.f_rf = analog.f_rf;

    std::vector<ComplexMatrix> h_bb;
    h_bb.reserve(k_users);
    for (Index k = 0; k < k_users; ++k)
        h_bb.push_back(analog.w_rf[k].adjoint() * channels.h[k] * analog.f_rf);

    std::vector<ComplexMatrix> w_bb = analog.w_bb;
    auto identity_combiners = [&] {
        w_bb.assign(k_users, ComplexMatrix::Identity(cfg.n_rf_r, cfg.n_s));
    };

    switch (analog.scheme) {
    case SchemeId::REF21_SVD_MMSE:
    case SchemeId::M3_CIA_MMSE: {
        identity_combiners();
        out.precoder.f_bb = pseudo_mmse(analog_baseband(channels, analog.f_rf, analog.w_rf), noise_var);
        break;
    }
    case SchemeId::REF29_CIA_BD: {
        auto bd = bd_precoder(h_bb, cfg.n_s);
        out.precoder.f_bb = std::move(bd.f_bb);
        w_bb = std::move(bd.w_bb);
        break;
    }
    case SchemeId::P_CIA_STAR_MMSE_STAR:
    case SchemeId::P_SVD_MMSE_STAR:
    case SchemeId::P_CIA_MMSE_STAR:
    case SchemeId::P_SVD_STAR_MMSE_STAR: {
        if (w_bb.empty())
            identity_combiners();
        ComplexMatrix h_tilde(cfg.total_streams(), cfg.n_rf_t);
        double gamma = 0.0;
        for (Index k = 0; k < k_users; ++k) {
            h_tilde.middleRows(k * cfg.n_s, cfg.n_s) = w_bb[k].adjoint() * h_bb[k];
            const ComplexMatrix w = analog.w_rf[k] * w_bb[k];
            gamma += noise_var * w.squaredNorm();  // tr{sigma^2 W^H W}
        }
        auto f_bb = mmse_bb(h_tilde, analog.f_rf, gamma, static_cast<double>(cfg.total_streams()));
        out.diagnostics.regularized = out.diagnostics.regularized || f_bb.regularized;
        out.precoder.f_bb = std::move(f_bb.value);
        break;
    }
    }

    out.precoder = normalize_power(std::move(out.precoder), static_cast<double>(cfg.total_streams()));
    for (Index k = 0; k < k_users; ++k)
        out.combiners.push_back({analog.w_rf[k], w_bb[k]});
    return out;
}

DesignResult design(SchemeId scheme, const ChannelSet& channels, const SystemConfig& cfg,
                    const DesignOptions& options)
{
    return design_digital(design_analog(scheme, channels, cfg, options), channels, cfg);
}

} // namespace hbf
