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


#include "hbf/selftest.hpp"

#include "hbf/analog.hpp"
#include "hbf/channel.hpp"
#include "hbf/detection.hpp"
#include "hbf/digital.hpp"
#include "hbf/random.hpp"
#include "hbf/schemes.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace hbf {

namespace {

double max_modulus_error(const ComplexMatrix& m, double expected)
{
    double worst = 0.0;
    for (Index j = 0; j < m.cols(); ++j)
        for (Index i = 0; i < m.rows(); ++i)
            worst = std::max(worst, std::abs(std::abs(m(i, j)) - expected) / expected);
    return worst;
}

ComplexMatrix random_matrix(CounterRng& rng, Index rows, Index cols)
{
    ComplexMatrix m(rows, cols);
    for (Index j = 0; j < cols; ++j)
        for (Index i = 0; i < rows; ++i)
            m(i, j) = rng.complex_normal(1.0);
    return m;
}

SystemConfig small_config(Index k_users)
{
    SystemConfig cfg;
    cfg.n_t = 16;
    cfg.n_r = 4;
    cfg.n_s = 2;
    cfg.k_users = k_users;
    cfg.n_rf_t = k_users * cfg.n_s;
    cfg.n_rf_r = 2;
    cfg.n_paths = 4;
    cfg.noise_var = 0.5;
    return cfg;
}

} // namespace

std::vector<SelfTestCheck> run_selftest()
{
    std::vector<SelfTestCheck> out;
    auto record = [&](std::string name, bool ok, std::string detail) {
        out.push_back({std::move(name), ok, std::move(detail)});
    };

    for (const Index k_users : {1, 2}) {
        const SystemConfig cfg = small_config(k_users);
        for (const SchemeId s : all_schemes()) {
            double worst_mod = 0.0;
            double worst_pow = 0.0;
            double worst_leak = 0.0;
            for (std::uint64_t seed = 1; seed <= 5; ++seed) {
                const ChannelSet ch = generate_channel(cfg, seed);
                const DesignResult r = design(s, ch, cfg);
                worst_mod = std::max(worst_mod, max_modulus_error(r.precoder.f_rf, 1.0 / std::sqrt(double(cfg.n_t))));
                for (const auto& c : r.combiners)
                    worst_mod = std::max(worst_mod, max_modulus_error(c.w_rf, 1.0 / std::sqrt(double(cfg.n_r))));
                const double e = r.precoder.full().squaredNorm();
                const double target = double(cfg.total_streams());
                worst_pow = std::max(worst_pow, std::abs(e - target) / target);
                if (s == SchemeId::REF29_CIA_BD) {
                    for (Index j = 0; j < cfg.k_users; ++j) {
                        const ComplexMatrix hbb = r.combiners[j].full().adjoint() * ch.h[j] * r.precoder.f_rf;
                        for (Index k = 0; k < cfg.k_users; ++k) {
                            if (j == k)
                                continue;
                            const double leak =
                                (hbb * r.precoder.f_bb.middleCols(k * cfg.n_s, cfg.n_s)).norm() / hbb.norm();
                            worst_leak = std::max(worst_leak, leak);
                        }
                    }
                }
            }
            const std::string tag = std::string(to_string(s)) + " K=" + std::to_string(k_users);
            record("unit modulus " + tag, worst_mod <= 1e-12, "max rel err " + std::to_string(worst_mod));
            record("power " + tag, worst_pow <= 1e-9, "max rel err " + std::to_string(worst_pow));
            if (s == SchemeId::REF29_CIA_BD)
                record("bd leakage " + tag, worst_leak < 1e-9, "max leakage " + std::to_string(worst_leak));
        }
    }

    {
        bool ok = true;
        for (std::uint64_t seed = 1; seed <= 10 && ok; ++seed) {
            CounterRng rng{0x53454c46, seed};
            const Index n = 4 + Index(seed % 5);
            const ComplexMatrix g = random_matrix(rng, n, n);
            const ComplexMatrix d = g * g.adjoint();
            const CiaResult r = column_iterative(d, std::min<Index>(n, 3));
            for (std::size_t i = 1; i < r.trace.size(); ++i) {
                const auto& a = r.trace[i - 1];
                const auto& b = r.trace[i];
                if (b.rank < a.rank || (b.rank == a.rank && b.log_pdet < a.log_pdet - 1e-9 * std::abs(a.log_pdet) - 1e-12))
                    ok = false;
            }
        }
        record("cia ascent", ok, "10 random PSD inputs");
    }

    {
        double worst = 0.0;
        for (std::uint64_t seed = 1; seed <= 10; ++seed) {
            CounterRng rng{0x4d4d5345, seed};
            MmseProblem p;
            p.h_eff = random_matrix(rng, 3, 4);
            const ComplexMatrix b = random_matrix(rng, 6, 4);
            p.constraint = b.adjoint() * b;
            p.r_x = ComplexMatrix::Identity(3, 3);
            const ComplexMatrix n = random_matrix(rng, 3, 3);
            p.r_n = 0.1 * n * n.adjoint();
            p.e_t = 3.0;
            const MmseSolution s = constrained_mmse(p);
            const double e = (p.constraint * s.f * p.r_x * s.f.adjoint()).trace().real();
            worst = std::max(worst, std::abs(e - p.e_t) / p.e_t);
        }
        record("mmse energy", worst <= 1e-9, "max rel err " + std::to_string(worst));
    }

    {
        const Constellation q = Constellation::make(Modulation::Qpsk);
        bool ok = true;
        for (std::uint64_t seed = 1; seed <= 20 && ok; ++seed) {
            CounterRng rng{0x44455445, seed};
            const ComplexMatrix a = random_matrix(rng, 2, 2);
            ComplexVector d(2);
            for (Index i = 0; i < 2; ++i)
                d(i) = q.points()(Index(rng.below(4)));
            const ComplexVector y = a * d;
            for (auto mode : {DetectorMode::MDD, DetectorMode::NWMDD, DetectorMode::NWIMDD})
                ok = ok && (detect(y, a, ComplexMatrix::Identity(2, 2), mode, q) - d).norm() < 1e-12;
        }
        record("noise-free detection", ok, "20 random 2x2 channels");
    }
    return out;
}

} // namespace hbf
