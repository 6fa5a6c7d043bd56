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


#ifndef HBF_ANALOG_HPP
#define HBF_ANALOG_HPP

#include "hbf/channel.hpp"
#include "hbf/core.hpp"

#include <compare>
#include <span>
#include <vector>

namespace hbf {

struct CiaSettings {
    int max_sweeps = 100;
    double conv_tol = 1e-6;   // max entrywise change between sweeps
    double reg_eps = 1e-6;    // relative to tr(C_j) / dim when C_j is singular

    void validate() const;
};

// Objective of the column iterative algorithm for B^H D B: a higher rank
// always wins, equal ranks compare by the log of the pseudo-determinant.
// For full-rank B^H D B this is log det(B^H D B).
struct CiaObjective {
    Index rank = 0;
    double log_pdet = 0.0;

    std::partial_ordering operator<=>(const CiaObjective& o) const
    {
        if (rank != o.rank)
            return rank <=> o.rank;
        return log_pdet <=> o.log_pdet;
    }
    bool operator==(const CiaObjective& o) const = default;
};

CiaObjective cia_objective(const ComplexMatrix& d, const ComplexMatrix& b);

struct CiaResult {
    ComplexMatrix b;
    int sweeps = 0;
    bool converged = false;
    bool regularized = false;
    // trace[0] is the all-ones start, trace[s] the state after sweep s.
    std::vector<CiaObjective> trace;
};

// Coordinate ascent on |B^H D B| over n x m matrices with |B_ij| = 1/sqrt(n),
// started from the all-ones matrix. Entries are updated in place, so every
// entry update uses the latest values of the others.
CiaResult column_iterative(const ComplexMatrix& d, Index m, const CiaSettings& settings = {});

// Same iteration on D = L L^H without forming D; cheaper when L has fewer
// columns than rows.
CiaResult column_iterative_factored(const ComplexMatrix& l, Index m, const CiaSettings& settings = {});

// W_RF_k = CIA(H_k H_k^H, n_rf_r).
CiaResult cia_analog_combiner(const ComplexMatrix& h_k, Index n_rf_r, const CiaSettings& settings = {});

// F_RF = CIA(H^H W_RF W_RF^H H, n_rf_t) with W_RF = blkdiag{W_RF_k}.
CiaResult cia_analog_precoder(const ComplexMatrix& h_stack, const ComplexMatrix& w_rf_blkdiag, Index n_rf_t,
                              const CiaSettings& settings = {});

struct RecursiveCiaResult {
    ComplexMatrix f_rf;
    std::vector<ComplexMatrix> w_rf;
    int outer_iterations = 0;
    int total_sweeps = 0;
    bool converged = false;
    bool regularized = false;
    // Per outer pass: sum_k log pdet(W_RF_k^H H_k F_RF_k F_RF_k^H H_k^H W_RF_k)
    // evaluated on the iterate produced by that pass.
    std::vector<double> objective_trace;
    std::vector<CiaResult> last_pass;  // K combiner runs followed by the precoder run
};

// Alternates per-user combiner and joint precoder CIA runs, where user k's
// combiner sees A_k = H_k F_RF_k F_RF_k^H H_k^H and F_RF_k is the k-th n_s
// column block of F_RF.
RecursiveCiaResult recursive_cia(const ChannelSet& channels, const SystemConfig& cfg,
                                 const CiaSettings& settings = {}, int outer_max = 10);

// (1/sqrt(n_r)) Psi of the n_cols principal eigenvectors of H_k H_k^H.
ComplexMatrix svd_phase_combiner(const ComplexMatrix& h_k, Index n_cols);

// (1/sqrt(n_t)) Psi(H_k^H W_RF_k).
ComplexMatrix conjugate_phase_precoder(const ComplexMatrix& h_k, const ComplexMatrix& w_rf_k);

// (1/sqrt(n_t)) Psi of the n_cols principal eigenvectors of H^H W W^H H.
ComplexMatrix eig_phase_precoder(const ComplexMatrix& h_stack, const ComplexMatrix& w_blkdiag, Index n_cols);

} // namespace hbf

#endif // HBF_ANALOG_HPP
