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

// Independent reference computations used only by the tests. None of these
// call into the library's numerical kernels.

#ifndef PAPCBF_TESTS_ORACLES_HPP
#define PAPCBF_TESTS_ORACLES_HPP

#include <Eigen/Dense>

#include <complex>
#include <limits>
#include <random>
#include <vector>

namespace oracle
{

using cd = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using RVec = Eigen::VectorXd;

inline CMat random_complex(std::mt19937_64 &rng, Eigen::Index rows, Eigen::Index cols, double variance = 1.0)
{
    std::normal_distribution<double> n(0.0, std::sqrt(variance / 2.0));
    CMat m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
        {
            const double re = n(rng);
            m(i, j) = cd(re, n(rng));
        }
    return m;
}

inline CMat unit_columns(CMat m)
{
    for (Eigen::Index k = 0; k < m.cols(); ++k)
        m.col(k).normalize();
    return m;
}

inline RVec random_positive(std::mt19937_64 &rng, Eigen::Index n, double lo, double hi)
{
    std::uniform_real_distribution<double> u(lo, hi);
    RVec v(n);
    for (Eigen::Index i = 0; i < n; ++i)
        v(i) = u(rng);
    return v;
}

/// Exhaustive projection onto {q >= 0, sum q_i p_i = sum p_i}: for every
/// support S the equality-constrained projection restricted to S is
/// computed; the closest candidate that is nonnegative wins.
inline RVec brute_force_projection(const RVec &q_raw, const RVec &p)
{
    const Eigen::Index n = q_raw.size();
    const double total = p.sum();
    RVec best;
    double best_dist = std::numeric_limits<double>::infinity();
    for (unsigned long mask = 1; mask < (1ul << n); ++mask)
    {
        double pq = 0.0, pp = 0.0;
        for (Eigen::Index i = 0; i < n; ++i)
            if (mask & (1ul << i))
            {
                pq += p(i) * q_raw(i);
                pp += p(i) * p(i);
            }
        const double z = (pq - total) / pp;
        RVec q = RVec::Zero(n);
        bool ok = true;
        for (Eigen::Index i = 0; i < n; ++i)
            if (mask & (1ul << i))
            {
                q(i) = q_raw(i) - p(i) * z;
                ok &= q(i) >= -1e-14;
            }
        if (!ok)
            continue;
        const double d = (q - q_raw).squaredNorm();
        if (d < best_dist)
        {
            best_dist = d;
            best = q.cwiseMax(0.0);
        }
    }
    return best;
}

/// Q_k by explicit summation of outer products.
inline CMat naive_q(const CMat &w, Eigen::Index k, double gamma)
{
    CMat q = CMat::Zero(w.rows(), w.rows());
    for (Eigen::Index j = 0; j < w.cols(); ++j)
    {
        const CMat outer = w.col(j) * w.col(j).adjoint();
        q += (j == k) ? CMat(outer / gamma) : CMat(-outer);
    }
    return q;
}

/// Q_k from directions and signed powers, without taking square roots.
inline CMat signed_q(const CMat &u, const RVec &beta, Eigen::Index k, double gamma)
{
    CMat q = CMat::Zero(u.rows(), u.rows());
    for (Eigen::Index j = 0; j < u.cols(); ++j)
    {
        const CMat outer = beta(j) * (u.col(j) * u.col(j).adjoint());
        q += (j == k) ? CMat(outer / gamma) : CMat(-outer);
    }
    return q;
}

inline CMat beams(const CMat &u, const RVec &beta)
{
    CMat w = u;
    for (Eigen::Index k = 0; k < u.cols(); ++k)
        w.col(k) *= std::sqrt(std::max(beta(k), 0.0));
    return w;
}

/// Mean and variance of h^H Q h - noise for h = h_e + e, e ~ CN(0, s I),
/// straight from the definition with an explicit Q.
inline void analytic_moments(const CMat &q, const CVec &h_e, double noise, double s, double &mean, double &var)
{
    mean = std::real(h_e.dot(q * h_e)) - noise + s * std::real(q.trace());
    const CMat q2 = q * q;
    var = 2.0 * s * std::real(h_e.dot(q2 * h_e)) + s * s * std::real(q2.trace());
}

struct MonteCarloMoments
{
    double mean = 0.0;
    double var = 0.0;
    double mean_stderr = 0.0;
    double var_stderr = 0.0;
};

inline MonteCarloMoments monte_carlo_moments(std::mt19937_64 &rng, const CMat &q, const CVec &h_e, double noise,
                                             double s, long draws)
{
    std::normal_distribution<double> n(0.0, std::sqrt(s / 2.0));
    double sum = 0.0, sum2 = 0.0, sum3 = 0.0, sum4 = 0.0;
    // shift by the analytic center to keep the sums well conditioned
    const double center = std::real(h_e.dot(q * h_e)) - noise;
    CVec h(h_e.size());
    for (long d = 0; d < draws; ++d)
    {
        for (Eigen::Index i = 0; i < h.size(); ++i)
        {
            const double re = n(rng);
            h(i) = h_e(i) + cd(re, n(rng));
        }
        const double x = std::real(h.dot(q * h)) - noise - center;
        sum += x;
        sum2 += x * x;
        sum3 += x * x * x;
        sum4 += x * x * x * x;
    }
    const double nd = double(draws);
    const double m1 = sum / nd;
    const double m2 = sum2 / nd;
    MonteCarloMoments out;
    out.mean = center + m1;
    out.var = (m2 - m1 * m1) * nd / (nd - 1.0);
    out.mean_stderr = std::sqrt(out.var / nd);
    // fourth central moment for the variance estimator's spread
    const double mu4 = sum4 / nd - 4.0 * m1 * sum3 / nd + 6.0 * m1 * m1 * m2 - 3.0 * m1 * m1 * m1 * m1;
    out.var_stderr = std::sqrt(std::max(mu4 - out.var * out.var, 0.0) / nd);
    return out;
}

/// Moore-Penrose inverse through a complete orthogonal decomposition.
inline CMat pinv(const CMat &a)
{
    Eigen::CompleteOrthogonalDecomposition<CMat> cod(a);
    cod.setThreshold(1e-10);
    return cod.pseudoInverse();
}

} // namespace oracle

#endif
