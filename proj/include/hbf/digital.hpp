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


#ifndef HBF_DIGITAL_HPP
#define HBF_DIGITAL_HPP

#include "hbf/core.hpp"

#include <span>
#include <vector>

namespace hbf {

// Linear precoding through a fixed matrix B: x_rx = H_eff F x + n with
// H_eff = H B, energy constraint tr{A F R_x F^H} <= E_T where A = B^H B.
struct MmseProblem {
    ComplexMatrix h_eff;
    ComplexMatrix constraint;  // A
    ComplexMatrix r_x;
    ComplexMatrix r_n;
    double e_t = 1.0;
};

struct MmseSolution {
    ComplexMatrix f;
    double beta = 1.0;  // receiver scaling
    bool regularized = false;
};

// E||x - beta (H_eff F x + n)||^2
double mmse_cost(const MmseProblem& p, const ComplexMatrix& f, double beta);

// Minimizer of mmse_cost under the energy constraint:
// F = beta^{-1} (H^H H + tr{R_n}/E_T A)^{-1} H^H with beta fixed by
// tr{A F R_x F^H} = E_T.
MmseSolution constrained_mmse(const MmseProblem& p);

// F_BB = (H~^H H~ + gamma/E_T F_RF^H F_RF)^{-1} H~^H, unnormalized.
Flagged<ComplexMatrix> mmse_bb(const ComplexMatrix& h_tilde, const ComplexMatrix& f_rf, double gamma, double e_t);

// F_BB = H^H (H H^H + sigma^2 I)^{-1}
ComplexMatrix pseudo_mmse(const ComplexMatrix& h_bb, double noise_var);

struct BdOutput {
    ComplexMatrix f_bb;                 // n_rf_t x K n_s
    std::vector<ComplexMatrix> w_bb;    // U_k, rows_k x n_s
    std::vector<RealVector> power_loading;  // diag(Lambda_k)
    std::vector<RealVector> gains;      // singular values of H_BB_k F_k^a
};

// Block diagonalization of the per-user baseband channels H_BB_k
// (rows_k x n_rf_t); each user precodes inside the null space of the others.
BdOutput bd_precoder(std::span<const ComplexMatrix> h_bb, Index n_s);

// n_s principal eigenvectors of H_check H_check^H.
ComplexMatrix svd_digital_combiner(const ComplexMatrix& h_check, Index n_s);

// Solves M X = rhs for Hermitian positive (semi)definite M. Falls back to an
// eigenvalue floor of kEigenFloor * lambda_max when M is singular.
Flagged<ComplexMatrix> solve_hermitian(const ComplexMatrix& m, const ComplexMatrix& rhs);

} // namespace hbf

#endif // HBF_DIGITAL_HPP
