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

#ifndef HBF_CORE_HPP
#define HBF_CORE_HPP

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>

namespace hbf {

using Index = Eigen::Index;

template <typename Real>
using ComplexMatrixT = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, Eigen::Dynamic>;
template <typename Real>
using ComplexVectorT = Eigen::Matrix<std::complex<Real>, Eigen::Dynamic, 1>;
template <typename Real>
using RealVectorT = Eigen::Matrix<Real, Eigen::Dynamic, 1>;

using Complex = std::complex<double>;
using ComplexMatrix = ComplexMatrixT<double>;
using ComplexVector = ComplexVectorT<double>;
using RealVector = RealVectorT<double>;

class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Invalid dimensions, incompatible scheme/config pairs, bad user input.
class ConfigError : public Error {
public:
    using Error::Error;
};

// A numerical procedure could not produce a usable result.
class NumericalError : public Error {
public:
    using Error::Error;
};

// Argument outside the mathematical domain of the operation.
class DomainError : public Error {
public:
    using Error::Error;
};

enum class Modulation { Qpsk, Qam16 };

std::string to_string(Modulation m);
Modulation parse_modulation(const std::string& name);

// Antenna and RF-chain dimensions of one downlink scenario.
struct SystemConfig {
    Index n_t = 64;
    Index n_r = 4;
    Index n_s = 2;
    Index k_users = 4;
    Index n_rf_t = 8;
    Index n_rf_r = 2;
    Index n_paths = 8;
    double noise_var = 1.0;
    Modulation modulation = Modulation::Qpsk;

    // Square UPA sides.
    Index n_th() const;
    Index n_rh() const;

    // Total streams K * N_s, which is also the transmit energy E_T.
    Index total_streams() const { return k_users * n_s; }

    // Throws ConfigError naming the first violated constraint.
    void validate() const;
};

// Analog part f_rf (n_t x n_rf_t, unit modulus / sqrt(n_t)) and digital part
// f_bb (n_rf_t x K n_s).
struct HybridPrecoder {
    ComplexMatrix f_rf;
    ComplexMatrix f_bb;

    ComplexMatrix full() const { return f_rf * f_bb; }
};

struct UserCombiner {
    ComplexMatrix w_rf;
    ComplexMatrix w_bb;

    ComplexMatrix full() const { return w_rf * w_bb; }
};

// A value together with a flag telling whether an eigenvalue floor or
// regularizer had to be applied to produce it.
template <typename T>
struct Flagged {
    T value;
    bool regularized = false;
};

inline constexpr double kRankTolerance = 1e-10;
inline constexpr double kEigenFloor = 1e-12;

// Entrywise projection onto the circle of radius `scale`. Zero entries map
// to `scale` (phase 0).
template <typename Derived>
typename Derived::PlainObject phase_project(const Eigen::MatrixBase<Derived>& a,
                                            typename Eigen::NumTraits<typename Derived::Scalar>::Real scale)
{
    using Scalar = typename Derived::Scalar;
    using Real = typename Eigen::NumTraits<Scalar>::Real;
    return a.unaryExpr([scale](const Scalar& z) -> Scalar {
        const Real mag = std::abs(z);
        if (mag == Real(0))
            return Scalar(scale);
        return z * (scale / mag);
    });
}

template <typename Real>
struct HermitianEigen {
    RealVectorT<Real> values;    // descending
    ComplexMatrixT<Real> vectors;  // columns match `values`
};

// Rotates each column so its largest-magnitude component (first one on ties)
// is real and positive.
template <typename Derived>
void fix_column_phases(Eigen::MatrixBase<Derived>& v)
{
    using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
    for (Index c = 0; c < v.cols(); ++c) {
        Index best = 0;
        Real best_mag = Real(-1);
        for (Index r = 0; r < v.rows(); ++r) {
            const Real mag = std::abs(v(r, c));
            if (mag > best_mag) {
                best_mag = mag;
                best = r;
            }
        }
        if (best_mag > Real(0))
            v.col(c) *= std::conj(v(best, c)) / best_mag;
    }
}

// Eigendecomposition of a Hermitian matrix (lower triangle is read) with
// eigenvalues in descending order and deterministic eigenvector phases.
template <typename Derived>
HermitianEigen<typename Eigen::NumTraits<typename Derived::Scalar>::Real>
hermitian_eig(const Eigen::MatrixBase<Derived>& a)
{
    using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
    if (a.rows() != a.cols())
        throw DomainError("hermitian_eig: matrix is not square");
    HermitianEigen<Real> out;
    const Index n = a.rows();
    if (n == 0) {
        out.values.resize(0);
        out.vectors.resize(0, 0);
        return out;
    }
    Eigen::SelfAdjointEigenSolver<ComplexMatrixT<Real>> solver(a.eval());
    if (solver.info() != Eigen::Success)
        throw NumericalError("hermitian_eig: eigensolver did not converge");
    out.values = solver.eigenvalues().reverse();
    out.vectors = solver.eigenvectors().rowwise().reverse();
    fix_column_phases(out.vectors);
    return out;
}

template <typename Derived>
bool is_hermitian(const Eigen::MatrixBase<Derived>& a, double rel_tol = 1e-8)
{
    if (a.rows() != a.cols())
        return false;
    const auto scale = a.norm();
    return (a - a.adjoint()).norm() <= rel_tol * (scale > 0 ? scale : 1.0);
}

// Number of eigenvalues above rank_tol * lambda_max and the natural log of
// their product.
struct LogPseudoDet {
    Index rank = 0;
    double log_value = 0.0;
};

template <typename Derived>
LogPseudoDet log_pseudo_det(const Eigen::MatrixBase<Derived>& a, double rank_tol = kRankTolerance)
{
    if (!is_hermitian(a))
        throw DomainError("pseudo_det: matrix is not Hermitian");
    LogPseudoDet out;
    if (a.rows() == 0)
        return out;
    const auto eig = hermitian_eig(a);
    const double lmax = static_cast<double>(eig.values(0));
    if (!(lmax > 0.0)) {
        out.log_value = -std::numeric_limits<double>::infinity();
        return out;
    }
    for (Index i = 0; i < eig.values.size(); ++i) {
        const double l = static_cast<double>(eig.values(i));
        if (l > rank_tol * lmax) {
            ++out.rank;
            out.log_value += std::log(l);
        }
    }
    return out;
}

// Product of the eigenvalues above rank_tol * lambda_max. The empty matrix
// gives 1; a matrix without a positive eigenvalue gives 0.
template <typename Derived>
double pseudo_det(const Eigen::MatrixBase<Derived>& a, double rank_tol = kRankTolerance)
{
    const auto lp = log_pseudo_det(a, rank_tol);
    if (a.rows() > 0 && lp.rank == 0)
        return 0.0;
    return std::exp(lp.log_value);
}

// Inverse principal square root K^{-1/2} of a Hermitian positive definite
// matrix. Eigenvalues below kEigenFloor * lambda_max are floored first.
template <typename Derived>
Flagged<typename Derived::PlainObject> hermitian_inv_sqrt(const Eigen::MatrixBase<Derived>& k)
{
    using Plain = typename Derived::PlainObject;
    using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
    if (!is_hermitian(k))
        throw DomainError("hermitian_inv_sqrt: matrix is not Hermitian");
    const auto eig = hermitian_eig(k);
    if (k.rows() == 0)
        return {Plain(0, 0), false};
    const Real lmax = eig.values(0);
    if (!(lmax > Real(0)) || !std::isfinite(static_cast<double>(lmax)))
        throw NumericalError("hermitian_inv_sqrt: matrix has no positive eigenvalue");
    const Real floor = Real(kEigenFloor) * lmax;
    bool regularized = false;
    RealVectorT<Real> inv_root(eig.values.size());
    for (Index i = 0; i < eig.values.size(); ++i) {
        Real l = eig.values(i);
        if (l < floor) {
            l = floor;
            regularized = true;
        }
        inv_root(i) = Real(1) / std::sqrt(l);
    }
    Plain m = eig.vectors * inv_root.asDiagonal() * eig.vectors.adjoint();
    return {m, regularized};
}

// Scales f_bb by one positive factor so that ||f_rf f_bb||_F^2 == target.
inline HybridPrecoder normalize_power(HybridPrecoder p, double target)
{
    if (!(target > 0.0))
        throw DomainError("normalize_power: target must be positive");
    const double energy = (p.f_rf * p.f_bb).squaredNorm();
    if (!(energy > 0.0) || !std::isfinite(energy))
        throw NumericalError("normalize_power: precoder product is zero or not finite");
    p.f_bb *= std::sqrt(target / energy);
    return p;
}

// sigma_n^2 = E_T / 10^(snr_db / 10).
inline double snr_to_noise_var(double snr_db, double e_t)
{
    if (!(e_t > 0.0))
        throw DomainError("snr_to_noise_var: energy must be positive");
    return e_t / std::pow(10.0, snr_db / 10.0);
}

// blkdiag{blocks...}
template <typename Range>
ComplexMatrix block_diagonal(const Range& blocks)
{
    Index rows = 0;
    Index cols = 0;
    for (const auto& b : blocks) {
        rows += b.rows();
        cols += b.cols();
    }
    ComplexMatrix out = ComplexMatrix::Zero(rows, cols);
    Index r = 0;
    Index c = 0;
    for (const auto& b : blocks) {
        out.block(r, c, b.rows(), b.cols()) = b;
        r += b.rows();
        c += b.cols();
    }
    return out;
}

} // namespace hbf

#endif // HBF_CORE_HPP
