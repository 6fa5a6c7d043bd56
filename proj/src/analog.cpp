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


#include "hbf/analog.hpp"

#include <algorithm>
#include <optional>
#include <string>
#include <type_traits>

namespace hbf {

void CiaSettings::validate() const
{
    if (max_sweeps < 1)
        throw ConfigError("CIA: max_sweeps must be >= 1");
    if (!(conv_tol > 0.0))
        throw ConfigError("CIA: conv_tol must be positive");
    if (!(reg_eps > 0.0))
        throw ConfigError("CIA: reg_eps must be positive");
}

namespace {

ComplexMatrix hermitian_part(const ComplexMatrix& a)
{
    return 0.5 * (a + a.adjoint());
}

CiaObjective objective_from_product(const ComplexMatrix& b, const ComplexMatrix& db)
{
    const ComplexMatrix m = hermitian_part(b.adjoint() * db);
    const auto lp = log_pseudo_det(m);
    return {lp.rank, lp.log_value};
}

double max_abs_diff(const ComplexMatrix& a, const ComplexMatrix& b)
{
    return (a - b).cwiseAbs().maxCoeff();
}

using RowMajorMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// With C = Bbar^H D Bbar, returns Q such that
// G_j = D - D Bbar C^{-1} Bbar^H D = D - Q Q^H.
// C is regularized when lambda_min(C) <= kRankTolerance * lambda_max(C).
RowMajorMatrix schur_factor(const ComplexMatrix& c, const ComplexMatrix& dbbar, double reg_eps, bool& regularized)
{
    const Index k = c.rows();
    if (k == 0)
        return RowMajorMatrix(dbbar.rows(), 0);

    // C = L L^H. Since lambda_max <= ||C||_F and lambda_min >= 1/||L^-1||_F^2,
    // a pass here settles the test without an eigendecomposition.
    const Eigen::LLT<ComplexMatrix> llt(c);
    if (llt.info() == Eigen::Success) {
        const ComplexMatrix l_inv = llt.matrixL().solve(ComplexMatrix::Identity(k, k));
        const double bound = 1.0 / (c.norm() * l_inv.squaredNorm());
        if (std::isfinite(bound) && bound > kRankTolerance)
            return dbbar * l_inv.adjoint();
    }

    auto eig = hermitian_eig(c);
    const double lmax = eig.values(0);
    if (!(lmax > 0.0))
        return RowMajorMatrix::Zero(dbbar.rows(), k);  // D vanishes on span(Bbar)
    const double lmin = eig.values(k - 1);
    if (lmin <= kRankTolerance * lmax) {
        const double shift = reg_eps * c.trace().real() / static_cast<double>(k);
        eig.values.array() += shift;
        regularized = true;
    }
    return dbbar * (eig.vectors * eig.values.cwiseSqrt().cwiseInverse().asDiagonal());
}

ComplexMatrix without_row_column(const ComplexMatrix& a, Index j)
{
    const Index n = a.rows();
    ComplexMatrix out(n - 1, n - 1);
    out.topLeftCorner(j, j) = a.topLeftCorner(j, j);
    out.topRightCorner(j, n - 1 - j) = a.topRightCorner(j, n - 1 - j);
    out.bottomLeftCorner(n - 1 - j, j) = a.bottomLeftCorner(n - 1 - j, j);
    out.bottomRightCorner(n - 1 - j, n - 1 - j) = a.bottomRightCorner(n - 1 - j, n - 1 - j);
    return out;
}

ComplexMatrix without_column(const ComplexMatrix& a, Index j)
{
    ComplexMatrix out(a.rows(), a.cols() - 1);
    out.leftCols(j) = a.leftCols(j);
    out.rightCols(a.cols() - 1 - j) = a.rightCols(a.cols() - 1 - j);
    return out;
}

template <typename Gram>
ComplexVector gram_diagonal(const Gram& gram, Index n)
{
    ComplexVector out(n);
    for (Index i = 0; i < n; ++i)
        out(i) = gram.diag(i);
    return out;
}

} // namespace

CiaObjective cia_objective(const ComplexMatrix& d, const ComplexMatrix& b)
{
    return objective_from_product(b, d * b);
}

namespace {

// D held explicitly.
class DenseGram {
public:
    explicit DenseGram(const ComplexMatrix& d) : d_(d) {}

    Index size() const { return d_.rows(); }
    double max_entry() const { return d_.cwiseAbs().maxCoeff(); }
    Complex diag(Index i) const { return d_(i, i); }
    ComplexMatrix times(const ComplexMatrix& b) const { return d_ * b; }

    // Tracks D b for one column while its entries change.
    void begin(const ComplexMatrix& b, const ComplexMatrix& db, Index j)
    {
        (void)b;
        dcol_ = db.col(j);
    }
    Complex db(Index i) const { return dcol_(i); }
    void update(Index i, Complex delta) { dcol_ += d_.col(i) * delta; }
    ComplexVector column() const { return dcol_; }

private:
    const ComplexMatrix& d_;
    ComplexVector dcol_;
};

// D = L L^H held through its factor.
class FactorGram {
public:
    explicit FactorGram(const ComplexMatrix& l) : l_(l), diag_(l.rowwise().squaredNorm()) {}

    Index size() const { return l_.rows(); }
    Index rank() const { return l_.cols(); }
    double max_entry() const { return diag_.maxCoeff(); }
    Complex diag(Index i) const { return diag_(i); }
    ComplexMatrix times(const ComplexMatrix& b) const { return l_ * (l_.adjoint() * b); }
    const RowMajorMatrix& factor() const { return l_; }

    void begin(const ComplexMatrix& b, const ComplexMatrix&, Index j) { y_ = l_.adjoint() * b.col(j); }
    Complex db(Index i) const { return (l_.row(i) * y_).value(); }
    void update(Index i, Complex delta) { y_ += l_.row(i).adjoint() * delta; }
    ComplexVector column() const { return l_ * y_; }

private:
    RowMajorMatrix l_;
    RealVector diag_;
    ComplexVector y_;
};

// When D = L L^H with L square in the column space (rank r == m) and
// Y = L^H B invertible, the complement of span(L^H Bbar) is spanned by
// u = Y^{-H} e_j, so G_j = q q^H with q = L u / ||u||. Y^{-1} follows the
// column updates through rank-one corrections.
class RankOneColumns {
public:
    explicit RankOneColumns(const FactorGram& gram) : gram_(gram) {}

    void refresh(const ComplexMatrix& b)
    {
        y_ = gram_.factor().adjoint() * b;
        const Eigen::PartialPivLU<ComplexMatrix> lu(y_);
        y_inv_ = lu.inverse();
        valid_ = y_inv_.allFinite();
    }

    // Lower bound on lambda_min / lambda_max of C = Ybar^H Ybar.
    bool well_conditioned() const
    {
        if (!valid_)
            return false;
        const double bound = 1.0 / (y_.squaredNorm() * y_inv_.squaredNorm());
        return std::isfinite(bound) && bound > kRankTolerance;
    }

    // Runs the entry updates of column j; returns the sweep's new column.
    template <typename Column>
    void update(Column col, Index j, double scale, double zero_tol)
    {
        const ComplexVector u = y_inv_.row(j).adjoint();
        const ComplexVector q = gram_.factor() * (u / u.norm());
        Complex t = q.dot(col);  // q^H b
        for (Index i = 0; i < col.size(); ++i) {
            const Complex s = q(i) * (t - std::conj(q(i)) * col(i));
            const double mag = std::abs(s);
            const Complex next = mag <= zero_tol ? Complex(scale, 0.0) : s * (scale / mag);
            const Complex delta = next - col(i);
            if (delta != Complex(0.0, 0.0)) {
                col(i) = next;
                t += std::conj(q(i)) * delta;
            }
        }
    }

    // Y.col(j) <- L^H b_j. Y^{-1} gets a Sherman-Morrison update when it was
    // known to be accurate, otherwise it is recomputed.
    void commit(const ComplexMatrix& b, Index j, bool was_well_conditioned)
    {
        const ComplexVector y_new = gram_.factor().adjoint() * b.col(j);
        const ComplexVector delta = y_new - y_.col(j);
        y_.col(j) = y_new;
        if (!was_well_conditioned) {
            refresh(b);
            return;
        }
        const ComplexVector w = y_inv_ * delta;
        const Complex denom = Complex(1.0, 0.0) + w(j);
        if (std::abs(denom) < 1e-8) {
            refresh(b);
            return;
        }
        const Eigen::Matrix<Complex, 1, Eigen::Dynamic> row = y_inv_.row(j);
        y_inv_.noalias() -= (w / denom) * row;
    }

    ComplexVector y_column(Index j) const { return y_.col(j); }

private:
    const FactorGram& gram_;
    ComplexMatrix y_;
    ComplexMatrix y_inv_;
    bool valid_ = false;
};

template <typename Gram>
CiaResult column_iterative_impl(Gram& gram, Index m, const CiaSettings& settings)
{
    const Index n = gram.size();
    if (m < 1 || m > n)
        throw DomainError("column_iterative: need 1 <= m <= n, got m=" + std::to_string(m) +
                          ", n=" + std::to_string(n));

    const double scale = 1.0 / std::sqrt(static_cast<double>(n));
    // Sums below this are treated as exact zeros (phase-0 convention).
    const double zero_tol = 1e-12 * gram.max_entry() * scale * static_cast<double>(n);

    constexpr bool factored = std::is_same_v<Gram, FactorGram>;
    std::optional<RankOneColumns> rank_one;
    if constexpr (factored) {
        if (gram.rank() == m && m > 1)
            rank_one.emplace(gram);
    }

    CiaResult out;
    out.b = ComplexMatrix::Constant(n, m, Complex(scale, 0.0));
    ComplexMatrix db = gram.times(out.b);
    out.trace.push_back(objective_from_product(out.b, db));

    for (int sweep = 1; sweep <= settings.max_sweeps; ++sweep) {
        const ComplexMatrix previous = out.b;
        ComplexMatrix gram_b = hermitian_part(out.b.adjoint() * db);  // B^H D B
        if (rank_one)
            rank_one->refresh(out.b);
        for (Index j = 0; j < m; ++j) {
            auto col = out.b.col(j);
            const bool fast = rank_one && rank_one->well_conditioned();
            if (fast) {
                rank_one->update(col, j, scale, zero_tol);
            } else {
                const ComplexMatrix dbbar = without_column(db, j);
                const RowMajorMatrix q =
                    schur_factor(without_row_column(gram_b, j), dbbar, settings.reg_eps, out.regularized);
                // (G_j b)_i = (D b)_i - Q(i,:) y with y = Q^H b.
                gram.begin(out.b, db, j);
                ComplexVector y = q.adjoint() * col;
                const ComplexVector g_diag = gram_diagonal(gram, n) - q.rowwise().squaredNorm().cast<Complex>();
                for (Index i = 0; i < n; ++i) {
                    const Complex gb_i = gram.db(i) - (q.row(i) * y).value();
                    const Complex s = gb_i - g_diag(i) * col(i);
                    const double mag = std::abs(s);
                    const Complex next = mag <= zero_tol ? Complex(scale, 0.0) : s * (scale / mag);
                    const Complex delta = next - col(i);
                    if (delta != Complex(0.0, 0.0)) {
                        col(i) = next;
                        gram.update(i, delta);
                        y += q.row(i).adjoint() * delta;
                    }
                }
            }
            if constexpr (factored) {
                if (rank_one) {
                    rank_one->commit(out.b, j, fast);
                    db.col(j) = gram.factor() * rank_one->y_column(j);
                } else {
                    gram.begin(out.b, db, j);
                    db.col(j) = gram.column();
                }
            } else {
                db.col(j) = gram.column();
            }
            gram_b.col(j) = out.b.adjoint() * db.col(j);
            gram_b.row(j) = gram_b.col(j).adjoint();
            gram_b(j, j) = gram_b(j, j).real();
        }
        out.sweeps = sweep;
        db = gram.times(out.b);
        out.trace.push_back(objective_from_product(out.b, db));
        if (max_abs_diff(out.b, previous) < settings.conv_tol) {
            out.converged = true;
            break;
        }
    }
    return out;
}

} // namespace

CiaResult column_iterative(const ComplexMatrix& d, Index m, const CiaSettings& settings)
{
    settings.validate();
    if (d.rows() != d.cols())
        throw DomainError("column_iterative: D must be square");
    if (!is_hermitian(d))
        throw DomainError("column_iterative: D must be Hermitian");
    DenseGram gram(d);
    return column_iterative_impl(gram, m, settings);
}

CiaResult column_iterative_factored(const ComplexMatrix& l, Index m, const CiaSettings& settings)
{
    settings.validate();
    FactorGram gram(l);
    return column_iterative_impl(gram, m, settings);
}

CiaResult cia_analog_combiner(const ComplexMatrix& h_k, Index n_rf_r, const CiaSettings& settings)
{
    const ComplexMatrix a = h_k * h_k.adjoint();
    return column_iterative(a, n_rf_r, settings);
}

CiaResult cia_analog_precoder(const ComplexMatrix& h_stack, const ComplexMatrix& w_rf_blkdiag, Index n_rf_t,
                              const CiaSettings& settings)
{
    if (w_rf_blkdiag.rows() != h_stack.rows())
        throw DomainError("cia_analog_precoder: combiner rows must match stacked channel rows");
    const ComplexMatrix wh = w_rf_blkdiag.adjoint() * h_stack;
    if (wh.rows() < wh.cols())
        return column_iterative_factored(wh.adjoint(), n_rf_t, settings);
    return column_iterative(wh.adjoint() * wh, n_rf_t, settings);
}

RecursiveCiaResult recursive_cia(const ChannelSet& channels, const SystemConfig& cfg, const CiaSettings& settings,
                                 int outer_max)
{
    cfg.validate();
    settings.validate();
    if (outer_max < 1)
        throw ConfigError("recursive_cia: outer_max must be >= 1");
    if (channels.users() != cfg.k_users)
        throw ConfigError("recursive_cia: channel user count does not match config");

    const Index k_users = cfg.k_users;
    const ComplexMatrix h_stack = channels.stacked();
    RecursiveCiaResult out;
    out.f_rf = ComplexMatrix::Constant(cfg.n_t, cfg.n_rf_t, Complex(1.0 / std::sqrt(double(cfg.n_t)), 0.0));
    out.w_rf.assign(k_users, ComplexMatrix::Constant(cfg.n_r, cfg.n_rf_r,
                                                     Complex(1.0 / std::sqrt(double(cfg.n_r)), 0.0)));

    for (int outer = 1; outer <= outer_max; ++outer) {
        out.last_pass.clear();
        std::vector<ComplexMatrix> w_next;
        w_next.reserve(k_users);
        for (Index k = 0; k < k_users; ++k) {
            const ComplexMatrix hf = channels.h[k] * out.f_rf.middleCols(k * cfg.n_s, cfg.n_s);
            const ComplexMatrix a_k = hf * hf.adjoint();
            auto res = column_iterative(a_k, cfg.n_rf_r, settings);
            w_next.push_back(res.b);
            out.last_pass.push_back(std::move(res));
        }
        auto f_res = cia_analog_precoder(h_stack, block_diagonal(w_next), cfg.n_rf_t, settings);

        double change = max_abs_diff(f_res.b, out.f_rf);
        for (Index k = 0; k < k_users; ++k)
            change = std::max(change, max_abs_diff(w_next[k], out.w_rf[k]));

        out.f_rf = f_res.b;
        out.w_rf = std::move(w_next);
        out.last_pass.push_back(std::move(f_res));
        for (const auto& r : out.last_pass) {
            out.total_sweeps += r.sweeps;
            out.regularized = out.regularized || r.regularized;
        }
        out.outer_iterations = outer;

        double objective = 0.0;
        for (Index k = 0; k < k_users; ++k) {
            const ComplexMatrix e = out.w_rf[k].adjoint() * channels.h[k] * out.f_rf.middleCols(k * cfg.n_s, cfg.n_s);
            ComplexMatrix m = e * e.adjoint();
            m = (0.5 * (m + m.adjoint())).eval();
            objective += log_pseudo_det(m).log_value;
        }
        out.objective_trace.push_back(objective);

        if (change < settings.conv_tol) {
            out.converged = true;
            break;
        }
    }
    return out;
}

ComplexMatrix svd_phase_combiner(const ComplexMatrix& h_k, Index n_cols)
{
    if (n_cols < 1 || n_cols > h_k.rows())
        throw DomainError("svd_phase_combiner: need 1 <= n_cols <= n_r");
    const auto eig = hermitian_eig(h_k * h_k.adjoint());
    return phase_project(eig.vectors.leftCols(n_cols), 1.0 / std::sqrt(static_cast<double>(h_k.rows())));
}

ComplexMatrix conjugate_phase_precoder(const ComplexMatrix& h_k, const ComplexMatrix& w_rf_k)
{
    if (w_rf_k.rows() != h_k.rows())
        throw DomainError("conjugate_phase_precoder: combiner rows must match channel rows");
    return phase_project(h_k.adjoint() * w_rf_k, 1.0 / std::sqrt(static_cast<double>(h_k.cols())));
}

ComplexMatrix eig_phase_precoder(const ComplexMatrix& h_stack, const ComplexMatrix& w_blkdiag, Index n_cols)
{
    if (w_blkdiag.rows() != h_stack.rows())
        throw DomainError("eig_phase_precoder: combiner rows must match stacked channel rows");
    if (n_cols < 1 || n_cols > h_stack.cols())
        throw DomainError("eig_phase_precoder: need 1 <= n_cols <= n_t");
    const ComplexMatrix wh = w_blkdiag.adjoint() * h_stack;
    const auto eig = hermitian_eig(wh.adjoint() * wh);
    return phase_project(eig.vectors.leftCols(n_cols), 1.0 / std::sqrt(static_cast<double>(h_stack.cols())));
}

} // namespace hbf
