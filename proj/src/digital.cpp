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


#include "hbf/digital.hpp"

#include <Eigen/SVD>

#include <string>

namespace hbf {

Flagged<ComplexMatrix> solve_hermitian(const ComplexMatrix& m, const ComplexMatrix& rhs)
{
    if (m.rows() != m.cols() || m.rows() != rhs.rows())
        throw DomainError("solve_hermitian: dimension mismatch");
    if (!m.allFinite() || !rhs.allFinite())
        throw NumericalError("solve_hermitian: non-finite input");
    Eigen::LLT<ComplexMatrix> llt(m);
    if (llt.info() == Eigen::Success && llt.rcond() > 1e-13)
        return {llt.solve(rhs), false};

    const auto eig = hermitian_eig(m);
    const double lmax = eig.values.size() ? eig.values(0) : 0.0;
    if (!(lmax > 0.0))
        throw NumericalError("solve_hermitian: system matrix has no positive eigenvalue");
    RealVector inv = eig.values.cwiseMax(kEigenFloor * lmax).cwiseInverse();
    return {eig.vectors * inv.asDiagonal() * (eig.vectors.adjoint() * rhs), true};
}

double mmse_cost(const MmseProblem& p, const ComplexMatrix& f, double beta)
{
    const ComplexMatrix hf = p.h_eff * f;
    const double cross = (hf * p.r_x).trace().real();
    const double signal = (hf * p.r_x * hf.adjoint()).trace().real();
    return p.r_x.trace().real() - 2.0 * beta * cross + beta * beta * (signal + p.r_n.trace().real());
}

MmseSolution constrained_mmse(const MmseProblem& p)
{
    const Index rows = p.h_eff.rows();
    const Index cols = p.h_eff.cols();
    if (p.constraint.rows() != cols || p.constraint.cols() != cols)
        throw DomainError("constrained_mmse: constraint must be cols(H) x cols(H)");
    if (p.r_x.rows() != rows || p.r_x.cols() != rows)
        throw DomainError("constrained_mmse: R_x must be rows(H) x rows(H)");
    if (p.r_n.rows() != rows || p.r_n.cols() != rows)
        throw DomainError("constrained_mmse: R_n must be rows(H) x rows(H)");
    if (!(p.e_t > 0.0))
        throw DomainError("constrained_mmse: E_T must be positive");
    if (!is_hermitian(p.constraint) || !is_hermitian(p.r_x) || !is_hermitian(p.r_n))
        throw DomainError("constrained_mmse: A, R_x and R_n must be Hermitian");

    const double load = p.r_n.trace().real() / p.e_t;
    const ComplexMatrix system = p.h_eff.adjoint() * p.h_eff + load * p.constraint;
    auto solved = solve_hermitian(system, p.h_eff.adjoint());
    const ComplexMatrix& f0 = solved.value;

    const double energy = (p.constraint * f0 * p.r_x * f0.adjoint()).trace().real();
    if (!(energy > 0.0) || !std::isfinite(energy)) {
        const double cond = system.norm() * (solved.regularized ? 1.0 / kEigenFloor : 1.0);
        throw NumericalError("constrained_mmse: degenerate solution (condition estimate " + std::to_string(cond) + ")");
    }
    MmseSolution out;
    out.beta = std::sqrt(energy / p.e_t);
    out.f = f0 / out.beta;
    out.regularized = solved.regularized;
    return out;
}

Flagged<ComplexMatrix> mmse_bb(const ComplexMatrix& h_tilde, const ComplexMatrix& f_rf, double gamma, double e_t)
{
    if (h_tilde.cols() != f_rf.cols())
        throw DomainError("mmse_bb: H~ columns must match F_RF columns");
    if (!(e_t > 0.0) || gamma < 0.0)
        throw DomainError("mmse_bb: need gamma >= 0 and e_t > 0");
    const ComplexMatrix system = h_tilde.adjoint() * h_tilde + (gamma / e_t) * (f_rf.adjoint() * f_rf);
    return solve_hermitian(system, h_tilde.adjoint());
}

ComplexMatrix pseudo_mmse(const ComplexMatrix& h_bb, double noise_var)
{
    if (noise_var < 0.0)
        throw DomainError("pseudo_mmse: noise variance must be >= 0");
    const ComplexMatrix gram = h_bb * h_bb.adjoint() + noise_var * ComplexMatrix::Identity(h_bb.rows(), h_bb.rows());
    return solve_hermitian(gram, h_bb).value.adjoint();
}

BdOutput bd_precoder(std::span<const ComplexMatrix> h_bb, Index n_s)
{
    if (h_bb.empty())
        throw DomainError("bd_precoder: no users");
    const Index k_users = static_cast<Index>(h_bb.size());
    const Index n = h_bb.front().cols();
    Index total_rows = 0;
    for (const auto& h : h_bb) {
        if (h.cols() != n)
            throw DomainError("bd_precoder: all users need the same column count");
        if (h.rows() < n_s)
            throw ConfigError("bd_precoder: each user needs at least n_s rows");
        total_rows += h.rows();
    }

    BdOutput out;
    out.f_bb.resize(n, k_users * n_s);
    for (Index k = 0; k < k_users; ++k) {
        const Index other_rows = total_rows - h_bb[k].rows();
        ComplexMatrix others(other_rows, n);
        Index r = 0;
        for (Index j = 0; j < k_users; ++j) {
            if (j == k)
                continue;
            others.middleRows(r, h_bb[j].rows()) = h_bb[j];
            r += h_bb[j].rows();
        }

        ComplexMatrix null_basis;
        if (other_rows == 0) {
            null_basis = ComplexMatrix::Identity(n, n);
        } else {
            Eigen::JacobiSVD<ComplexMatrix> svd(others, Eigen::ComputeFullV);
            const auto& sv = svd.singularValues();
            Index rank = 0;
            for (Index i = 0; i < sv.size(); ++i)
                if (sv(i) > kRankTolerance * sv(0))
                    ++rank;
            null_basis = svd.matrixV().rightCols(n - rank);
        }
        if (null_basis.cols() < n_s)
            throw ConfigError("bd_precoder: null space of the other users has dimension " +
                              std::to_string(null_basis.cols()) + " < n_s = " + std::to_string(n_s));

        Eigen::JacobiSVD<ComplexMatrix> svd(h_bb[k] * null_basis, Eigen::ComputeThinU | Eigen::ComputeThinV);
        ComplexMatrix u = svd.matrixU().leftCols(n_s);
        ComplexMatrix v = svd.matrixV().leftCols(n_s);
        const RealVector loading = RealVector::Ones(n_s);
        out.f_bb.middleCols(k * n_s, n_s) = null_basis * v * loading.asDiagonal();
        out.w_bb.push_back(std::move(u));
        out.power_loading.push_back(loading);
        out.gains.push_back(svd.singularValues().head(n_s));
    }
    return out;
}

ComplexMatrix svd_digital_combiner(const ComplexMatrix& h_check, Index n_s)
{
    if (n_s < 1 || n_s > h_check.rows())
        throw DomainError("svd_digital_combiner: need 1 <= n_s <= rows");
    const auto eig = hermitian_eig(h_check * h_check.adjoint());
    return eig.vectors.leftCols(n_s);
}

} // namespace hbf
