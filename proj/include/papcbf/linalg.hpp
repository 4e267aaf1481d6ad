// SPDX-License-Identifier: Apache-2.0
//
// papcbf: robust MISO downlink beamforming under per-antenna power constraints
// Copyright (C) 2026 The papcbf authors
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

#ifndef PAPCBF_LINALG_HPP
#define PAPCBF_LINALG_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <complex>

namespace papcbf
{

using cdouble = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;
using RMatrix = Eigen::MatrixXd;
using RVector = Eigen::VectorXd;

/// Relative eigenvalue cut-off used for every Moore-Penrose pseudo-inverse.
inline constexpr double kPinvThreshold = 1e-10;

/// (A + A^H)/2
inline CMatrix hermitian_part(const CMatrix &a)
{
    CMatrix h = 0.5 * (a + a.adjoint());
    return h;
}

struct HermitianPinv
{
    CMatrix pinv;
    double lambda_max = 0.0;
    Eigen::Index rank = 0;
};

/// Pseudo-inverse of a Hermitian matrix from its eigendecomposition.
/// Eigenvalues with |lambda| <= threshold * max|lambda| are treated as zero.
inline HermitianPinv hermitian_pinv(const CMatrix &a, double rel_threshold = kPinvThreshold)
{
    HermitianPinv out;
    const Eigen::Index n = a.rows();
    out.pinv = CMatrix::Zero(n, n);
    if (n == 0)
        return out;

    Eigen::SelfAdjointEigenSolver<CMatrix> eig(hermitian_part(a));
    const RVector &lambda = eig.eigenvalues();
    out.lambda_max = lambda.cwiseAbs().maxCoeff();
    if (out.lambda_max == 0.0)
        return out;

    const double cut = rel_threshold * out.lambda_max;
    RVector inv = RVector::Zero(n);
    for (Eigen::Index i = 0; i < n; ++i)
    {
        if (std::abs(lambda(i)) > cut)
        {
            inv(i) = 1.0 / lambda(i);
            ++out.rank;
        }
    }
    const CMatrix &v = eig.eigenvectors();
    out.pinv = v * inv.asDiagonal() * v.adjoint();
    return out;
}

/// Diagonal matrix plus weighted outer products: diag(base) + sum_j w_j h_j h_j^H.
inline CMatrix diag_plus_outer(const RVector &base, const CMatrix &h, const RVector &weights)
{
    CMatrix a = h * weights.cast<cdouble>().asDiagonal() * h.adjoint();
    a.diagonal() += base.cast<cdouble>();
    return hermitian_part(a);
}

inline bool all_equal(const RVector &v, double rel_tol = 1e-12)
{
    if (v.size() == 0)
        return true;
    const double ref = v(0);
    const double scale = std::max(std::abs(ref), 1e-300);
    for (Eigen::Index i = 1; i < v.size(); ++i)
        if (std::abs(v(i) - ref) > rel_tol * scale)
            return false;
    return true;
}

} // namespace papcbf

#endif
