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


#include "hbf/channel.hpp"
#include "hbf/metrics.hpp"
#include "hbf/schemes.hpp"
#include "oracles.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <string>

using namespace hbf;

namespace {

SystemConfig small_config(Index k_users)
{
    SystemConfig cfg;
    cfg.n_t = 16;
    cfg.k_users = k_users;
    cfg.n_rf_t = k_users * cfg.n_s;
    cfg.noise_var = 0.4;
    return cfg;
}

double modulus_error(const ComplexMatrix& m, double scale)
{
    return (m.cwiseAbs().array() - scale).abs().maxCoeff() / scale;
}

} // namespace

TEST_CASE("scheme names round trip")
{
    CHECK(all_schemes().size() == 7);
    for (auto s : all_schemes()) {
        CHECK(parse_scheme(to_string(s)) == s);
        CHECK(require_scheme(to_string(s)) == s);
    }
    CHECK_FALSE(parse_scheme("REF21").has_value());
    try {
        require_scheme("BOGUS");
        FAIL("expected ConfigError");
    } catch (const ConfigError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("BOGUS") != std::string::npos);
        CHECK(msg.find("P_SVD_STAR_MMSE_STAR") != std::string::npos);
    }
}

TEST_CASE("every scheme satisfies the hardware and power constraints")
{
    for (Index k_users : {Index(1), Index(2), Index(4)}) {
        const auto cfg = small_config(k_users);
        for (std::uint64_t seed = 0; seed < 4; ++seed) {
            const auto ch = generate_channel(cfg, seed);
            for (auto s : all_schemes()) {
                const auto r = design(s, ch, cfg);
                CAPTURE(to_string(s));
                CHECK(r.scheme == s);
                REQUIRE(r.combiners.size() == std::size_t(k_users));
                CHECK(r.precoder.f_rf.rows() == cfg.n_t);
                CHECK(r.precoder.f_rf.cols() == cfg.n_rf_t);
                CHECK(r.precoder.f_bb.cols() == cfg.total_streams());
                CHECK(modulus_error(r.precoder.f_rf, 1.0 / std::sqrt(double(cfg.n_t))) < 1e-12);
                for (const auto& c : r.combiners) {
                    CHECK(modulus_error(c.w_rf, 1.0 / std::sqrt(double(cfg.n_r))) < 1e-12);
                    CHECK(c.w_bb.cols() == cfg.n_s);
                }
                const double power = r.precoder.full().squaredNorm();
                CHECK(std::abs(power - double(cfg.total_streams())) <= 1e-9 * double(cfg.total_streams()));
                // SNR recomputed from the returned precoder
                CHECK(power / cfg.noise_var == doctest::Approx(cfg.total_streams() / cfg.noise_var).epsilon(1e-9));
                // -inf exactly when the analog baseband loses rank
                const auto sv = oracle::singular_values(analog_baseband(ch, r.precoder.f_rf, [&] {
                    std::vector<ComplexMatrix> w;
                    for (const auto& c : r.combiners)
                        w.push_back(c.w_rf);
                    return w;
                }()));
                // the oracle works on the Gram matrix, so it resolves ratios down to ~1e-8
                const double ratio = sv.back() / sv.front();
                if (ratio > 1e-6)
                    CHECK(std::isfinite(r.diagnostics.eig_metric));
                else
                    CHECK(r.diagnostics.eig_metric == -std::numeric_limits<double>::infinity());
                if (s != SchemeId::P_CIA_STAR_MMSE_STAR)
                    CHECK(ratio > 1e-6);
            }
        }
    }
}

TEST_CASE("design is deterministic")
{
    const auto cfg = small_config(2);
    const auto ch = generate_channel(cfg, 77);
    for (auto s : all_schemes()) {
        const auto a = design(s, ch, cfg);
        const auto b = design(s, ch, cfg);
        CHECK((a.precoder.f_rf - b.precoder.f_rf).norm() == 0.0);
        CHECK((a.precoder.f_bb - b.precoder.f_bb).norm() == 0.0);
    }
}

TEST_CASE("schemes in one analog family share the analog stage")
{
    SystemConfig cfg;
    const auto ch = generate_channel(cfg, 5);
    for (auto s : all_schemes()) {
        const auto fam = analog_family(s);
        const auto a = design_analog(s, ch, cfg);
        const auto b = design_analog(fam, ch, cfg);
        CHECK((a.f_rf - b.f_rf).norm() == 0.0);
        for (Index k = 0; k < cfg.k_users; ++k)
            CHECK((a.w_rf[k] - b.w_rf[k]).norm() == 0.0);
    }
    CHECK(analog_family(SchemeId::P_SVD_MMSE_STAR) == SchemeId::REF21_SVD_MMSE);
    CHECK(analog_family(SchemeId::M3_CIA_MMSE) == SchemeId::REF29_CIA_BD);
    CHECK(analog_family(SchemeId::P_CIA_MMSE_STAR) == SchemeId::REF29_CIA_BD);
    CHECK(analog_family(SchemeId::P_SVD_STAR_MMSE_STAR) == SchemeId::P_SVD_STAR_MMSE_STAR);

    const auto r21 = design(SchemeId::REF21_SVD_MMSE, ch, cfg);
    const auto p21 = design(SchemeId::P_SVD_MMSE_STAR, ch, cfg);
    CHECK((r21.precoder.f_rf - p21.precoder.f_rf).norm() == 0.0);
    CHECK((r21.precoder.f_bb - p21.precoder.f_bb).norm() > 0.0);
}

TEST_CASE("REF29_CIA_BD leaves no cross-user leakage")
{
    SystemConfig cfg;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto ch = generate_channel(cfg, seed);
        const auto r = design(SchemeId::REF29_CIA_BD, ch, cfg);
        for (Index j = 0; j < cfg.k_users; ++j) {
            const ComplexMatrix h_bb = r.combiners[j].w_rf.adjoint() * ch.h[j] * r.precoder.f_rf;
            for (Index k = 0; k < cfg.k_users; ++k) {
                if (j == k)
                    continue;
                const ComplexMatrix leak = h_bb * r.precoder.f_bb.middleCols(k * cfg.n_s, cfg.n_s);
                CHECK(leak.norm() / h_bb.norm() < 1e-9);
            }
        }
    }
}

TEST_CASE("diagnostics carry the analog eigen metric")
{
    SystemConfig cfg;
    const auto ch = generate_channel(cfg, 9);
    for (auto s : all_schemes()) {
        const auto r = design(s, ch, cfg);
        std::vector<ComplexMatrix> w;
        for (const auto& c : r.combiners)
            w.push_back(c.w_rf);
        const ComplexMatrix h_bb = analog_baseband(ch, r.precoder.f_rf, w);
        double expected = 0.0;
        for (double sv : oracle::singular_values(h_bb))
            expected += 2.0 * std::log2(sv);
        CHECK(r.diagnostics.eig_metric == doctest::Approx(expected).epsilon(1e-9));
    }
    const auto cia = design(SchemeId::REF29_CIA_BD, ch, cfg);
    CHECK(cia.diagnostics.cia_runs == cfg.k_users + 1);
    CHECK(cia.diagnostics.cia_traces.size() == std::size_t(cfg.k_users + 1));
    const auto rec = design(SchemeId::P_CIA_STAR_MMSE_STAR, ch, cfg);
    CHECK(rec.diagnostics.outer_iterations >= 1);
    CHECK(rec.diagnostics.outer_trace.size() == std::size_t(rec.diagnostics.outer_iterations));
}

TEST_CASE("incompatible configurations are rejected")
{
    SystemConfig cfg;
    cfg.n_rf_t = 10;
    CHECK_THROWS_AS(check_compatible(SchemeId::REF21_SVD_MMSE, cfg), ConfigError);
    CHECK_THROWS_AS(check_compatible(SchemeId::P_SVD_MMSE_STAR, cfg), ConfigError);
    CHECK_NOTHROW(check_compatible(SchemeId::P_SVD_STAR_MMSE_STAR, cfg));
    CHECK_NOTHROW(check_compatible(SchemeId::REF29_CIA_BD, cfg));

    SystemConfig wide;
    wide.n_rf_r = 4;
    wide.n_rf_t = 8;
    CHECK_THROWS_AS(check_compatible(SchemeId::REF29_CIA_BD, wide), ConfigError);
    CHECK_THROWS_AS(check_compatible(SchemeId::M3_CIA_MMSE, wide), ConfigError);
    CHECK_NOTHROW(check_compatible(SchemeId::P_SVD_STAR_MMSE_STAR, wide));

    SystemConfig k8;
    k8.k_users = 8;
    k8.n_rf_t = 16;
    const auto ch = generate_channel(SystemConfig{}, 1);
    CHECK_THROWS_AS(design(SchemeId::REF21_SVD_MMSE, ch, k8), ConfigError);
}

TEST_CASE("P_SVD_STAR_MMSE_STAR with more RF chains than streams")
{
    SystemConfig cfg;
    cfg.n_rf_r = 4;
    cfg.n_rf_t = 12;
    const auto ch = generate_channel(cfg, 3);
    const auto r = design(SchemeId::P_SVD_STAR_MMSE_STAR, ch, cfg);
    CHECK(r.precoder.f_rf.cols() == 12);
    for (const auto& c : r.combiners) {
        CHECK(c.w_rf.cols() == 4);
        CHECK(c.w_bb.rows() == 4);
        CHECK(c.w_bb.cols() == 2);
    }
    CHECK(r.precoder.full().squaredNorm() == doctest::Approx(8.0).epsilon(1e-9));
}
