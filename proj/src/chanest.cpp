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

#include "isac/chanest.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>

#include <Eigen/Eigenvalues>

namespace isac
{

using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

namespace
{

constexpr int kAngleGrid = 512;
constexpr double kAngleTol = 1e-6; // rad

// Khatri-Rao product with rows ordered (row of `fast`) + fast.rows() * (row of `slow`).
MatrixXcd khatri_rao(const MatrixXcd &slow, const MatrixXcd &fast)
{
    const Eigen::Index nf = fast.rows(), ns = slow.rows(), t = fast.cols();
    MatrixXcd out(nf * ns, t);
    for (Eigen::Index s = 0; s < ns; ++s)
        for (Eigen::Index f = 0; f < nf; ++f)
            out.row(f + nf * s) = fast.row(f).cwiseProduct(slow.row(s));
    return out;
}

// Hermitian Gram matrices of the three unfoldings of a tensor.
struct Grams
{
    MatrixXcd g1, g2, g3;
};

Grams unfolding_grams(const Tensor3 &y, bool need12 = true)
{
    const int n1 = y.dim1(), n2 = y.dim2(), n3 = y.dim3();
    const Eigen::Map<const MatrixXcd> x1(y.data().data(), n1, Eigen::Index(n2) * n3);
    const Eigen::Map<const MatrixXcd> m3(y.data().data(), Eigen::Index(n1) * n2, n3);

    Grams g;
    g.g3 = m3.transpose() * m3.conjugate();
    if (need12)
    {
        g.g1 = x1 * x1.adjoint();
        g.g2 = MatrixXcd::Zero(n2, n2);
        for (int k = 0; k < n3; ++k)
        {
            const Eigen::Map<const MatrixXcd> slice(y.data().data() + std::size_t(n1) * n2 * k, n1, n2);
            g.g2.noalias() += slice.transpose() * slice.conjugate();
        }
    }
    return g;
}

// Leading `r` eigenvectors of a Hermitian PSD matrix, in descending eigenvalue order.
MatrixXcd leading_subspace(const MatrixXcd &gram, int r)
{
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(gram);
    const MatrixXcd &v = es.eigenvectors();
    MatrixXcd u(gram.rows(), r);
    for (int i = 0; i < r; ++i)
        u.col(i) = v.col(gram.rows() - 1 - i);
    return u;
}

// Solves X W = M for Hermitian PSD W.
MatrixXcd solve_right(const MatrixXcd &m, const MatrixXcd &w)
{
    return w.completeOrthogonalDecomposition().solve(m.adjoint()).adjoint();
}

void normalize_columns(MatrixXcd &m, MatrixXcd &absorb)
{
    for (Eigen::Index t = 0; t < m.cols(); ++t)
    {
        const double n = m.col(t).norm();
        if (n > 0.0)
        {
            m.col(t) /= n;
            absorb.col(t) *= n;
        }
    }
}

MatrixXcd random_complex(Eigen::Index rows, Eigen::Index cols, std::mt19937_64 &rng)
{
    std::normal_distribution<double> normal(0.0, 1.0);
    MatrixXcd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i)
        {
            const double re = normal(rng);
            const double im = normal(rng);
            m(i, j) = cdouble(re, im);
        }
    return m;
}

// Identity-like start (the truncated SVD basis in compressed coordinates); columns beyond
// the subspace dimension are filled randomly.
MatrixXcd svd_start(Eigen::Index rows, Eigen::Index cols, std::mt19937_64 &rng)
{
    MatrixXcd m = MatrixXcd::Zero(rows, cols);
    const Eigen::Index d = std::min(rows, cols);
    m.topLeftCorner(d, d).setIdentity();
    if (cols > rows)
        m.rightCols(cols - rows) = random_complex(rows, cols - rows, rng);
    return m;
}

struct AlsResult
{
    MatrixXcd a, b, c;
    double error = std::numeric_limits<double>::infinity(); // Frobenius error on the core
    int iterations = 0;
    bool converged = false;
};

// ALS on a small dense tensor given by its three unfoldings.
AlsResult als_core(const MatrixXcd &x1, const MatrixXcd &x2, const MatrixXcd &x3, double norm_sq, MatrixXcd a,
                   MatrixXcd b, MatrixXcd c, const CpdOptions &opt)
{
    AlsResult r;
    double prev = std::numeric_limits<double>::infinity();
    const double floor = 1e-13 * std::sqrt(norm_sq);

    for (int it = 1; it <= opt.max_iterations; ++it)
    {
        MatrixXcd ga = a.adjoint() * a, gb = b.adjoint() * b, gc = c.adjoint() * c;

        a = solve_right(x1 * khatri_rao(c, b).conjugate(), gc.cwiseProduct(gb).conjugate());
        normalize_columns(a, c);
        ga = a.adjoint() * a;
        gc = c.adjoint() * c;

        b = solve_right(x2 * khatri_rao(c, a).conjugate(), gc.cwiseProduct(ga).conjugate());
        normalize_columns(b, c);
        gb = b.adjoint() * b;

        const MatrixXcd m3 = x3 * khatri_rao(b, a).conjugate();
        c = solve_right(m3, gb.cwiseProduct(ga).conjugate());
        gc = c.adjoint() * c;

        const double inner = (c.conjugate().cwiseProduct(m3)).sum().real();
        const double model_sq = ga.cwiseProduct(gb).cwiseProduct(gc).sum().real();
        const double err = std::sqrt(std::max(0.0, norm_sq - 2.0 * inner + model_sq));

        r.iterations = it;
        if (!std::isfinite(err))
            break;
        if (err <= floor || (std::isfinite(prev) && std::abs(prev - err) <= opt.tolerance * std::max(prev, floor)))
        {
            r.converged = true;
            prev = err;
            break;
        }
        prev = err;
    }

    r.a = std::move(a);
    r.b = std::move(b);
    r.c = std::move(c);
    r.error = prev;
    return r;
}

double fit_residual(const Tensor3 &y, const MatrixXcd &a, const MatrixXcd &b, const MatrixXcd &c)
{
    const Eigen::Map<const MatrixXcd> x1(y.data().data(), y.dim1(), Eigen::Index(y.dim2()) * y.dim3());
    const MatrixXcd model = a * khatri_rao(c, b).transpose();
    return (x1 - model).norm();
}

template <typename F>
double golden_max(F &&f, double lo, double hi, double tol)
{
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double x1 = hi - g * (hi - lo), x2 = lo + g * (hi - lo);
    double f1 = f(x1), f2 = f(x2);
    while (hi - lo > tol)
    {
        if (f1 < f2)
        {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + g * (hi - lo);
            f2 = f(x2);
        }
        else
        {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - g * (hi - lo);
            f1 = f(x1);
        }
    }
    return 0.5 * (lo + hi);
}

template <typename F>
double grid_then_golden(F &&f)
{
    const double step = kPi / kAngleGrid;
    int best = 0;
    double best_val = -1.0;
    for (int i = 0; i < kAngleGrid; ++i)
    {
        const double v = f(-kPi / 2.0 + (i + 0.5) * step);
        if (v > best_val)
        {
            best_val = v;
            best = i;
        }
    }
    const double centre = -kPi / 2.0 + (best + 0.5) * step;
    const double lo = std::max(-kPi / 2.0 + 1e-12, centre - step);
    const double hi = std::min(kPi / 2.0 - 1e-12, centre + step);
    return golden_max(f, lo, hi, kAngleTol);
}

// |f^H (a (x) d)|^2 / (|f|^2 |a|^2 |d|^2) with the d index varying fastest.
double kron_correlation(const VectorXcd &factor, const VectorXcd &a, const VectorXcd &d)
{
    cdouble acc(0.0, 0.0);
    const Eigen::Index nd = d.size();
    for (Eigen::Index i = 0; i < a.size(); ++i)
        for (Eigen::Index p = 0; p < nd; ++p)
            acc += std::conj(factor[i * nd + p]) * a[i] * d[p];
    const double denom = factor.squaredNorm() * a.squaredNorm() * d.squaredNorm();
    return denom > 0.0 ? std::norm(acc) / denom : 0.0;
}

} // namespace

Tensor3 spatial_augment(const Tensor3 &y, const SaConfig &sa)
{
    if (sa.aug_x < 0 || sa.aug_z < 0)
        throw std::invalid_argument("augmentation orders must be non-negative");
    const int v = sa.frequency_length(y.dim3());
    if (v < 2)
        throw std::invalid_argument("spatial augmentation leaves fewer than 2 frequency samples");

    const int nz = y.dim1(), nx = y.dim2();
    const int pz = sa.aug_z + 1, px = sa.aug_x + 1;
    Tensor3 out(nz * pz, nx * px, v);
    for (int k = 0; k < v; ++k)
        for (int ix = 0; ix < nx; ++ix)
            for (int q = 0; q < px; ++q)
                for (int iz = 0; iz < nz; ++iz)
                    for (int p = 0; p < pz; ++p)
                        out(iz * pz + p, ix * px + q, k) = y(iz, ix, p + q + k);
    return out;
}

int identifiability_bound(int d1, int d2, int d3)
{
    int best = 0;
    for (int t = 1; t <= d1 + d2 + d3; ++t)
        if (std::min(d1, t) + std::min(d2, t) + std::min(d3, t) >= 2 * t + 2)
            best = t;
    return best;
}

CpdFactors cpd_als(const Tensor3 &y, int rank, const CpdOptions &opt)
{
    const int n1 = y.dim1(), n2 = y.dim2(), n3 = y.dim3();
    if (rank < 1)
        throw std::invalid_argument("CPD rank must be at least 1");
    const int bound = identifiability_bound(n1, n2, n3);
    if (rank > bound)
        throw IdentifiabilityError("CPD rank " + std::to_string(rank) + " exceeds identifiability bound " +
                                   std::to_string(bound));

    const int r1 = std::min(n1, rank), r2 = std::min(n2, rank), r3 = std::min(n3, rank);
    const Grams grams = unfolding_grams(y);
    const MatrixXcd u1 = leading_subspace(grams.g1, r1);
    const MatrixXcd u2 = leading_subspace(grams.g2, r2);
    const MatrixXcd u3 = leading_subspace(grams.g3, r3);

    // Core G = Y x1 U1^H x2 U2^H x3 U3^H, stored column-major r1 x r2 x r3.
    const Eigen::Map<const MatrixXcd> x1(y.data().data(), n1, Eigen::Index(n2) * n3);
    const MatrixXcd t1 = u1.adjoint() * x1; // r1 x (n2 n3)
    MatrixXcd t2(Eigen::Index(r1) * r2, n3);
    for (int k = 0; k < n3; ++k)
    {
        const Eigen::Map<const MatrixXcd> slice(t1.data() + std::size_t(r1) * n2 * k, r1, n2);
        MatrixXcd s = slice * u2.conjugate();
        t2.col(k) = Eigen::Map<const VectorXcd>(s.data(), s.size());
    }
    const MatrixXcd core = t2 * u3.conjugate(); // (r1 r2) x r3

    // Unfoldings of the core.
    const Eigen::Map<const MatrixXcd> c1(core.data(), r1, Eigen::Index(r2) * r3);
    const MatrixXcd c3 = core.transpose();
    MatrixXcd c2(r2, Eigen::Index(r1) * r3);
    for (int k = 0; k < r3; ++k)
        for (int j = 0; j < r2; ++j)
            for (int i = 0; i < r1; ++i)
                c2(j, i + Eigen::Index(r1) * k) = core(i + Eigen::Index(r1) * j, k);
    const double core_sq = core.squaredNorm();

    AlsResult best;
    int restarts = std::max(1, opt.restarts);
    for (int s = 0; s < restarts; ++s)
    {
        std::mt19937_64 rng(mix_seed(opt.seed, static_cast<std::uint64_t>(s)));
        MatrixXcd a, b, c;
        if (s == 0)
        {
            a = svd_start(r1, rank, rng);
            b = svd_start(r2, rank, rng);
            c = svd_start(r3, rank, rng);
        }
        else
        {
            a = random_complex(r1, rank, rng);
            b = random_complex(r2, rank, rng);
            c = random_complex(r3, rank, rng);
        }
        AlsResult r = als_core(c1, c2, c3, core_sq, std::move(a), std::move(b), std::move(c), opt);
        if (r.error < best.error)
            best = std::move(r);
    }
    if (!std::isfinite(best.error))
        throw std::runtime_error("CPD did not produce a finite fit");

    CpdFactors f;
    f.vertical = u1 * best.a;
    f.horizontal = u2 * best.b;
    f.frequency = u3 * best.c;
    normalize_columns(f.vertical, f.frequency);
    normalize_columns(f.horizontal, f.frequency);
    f.iterations = best.iterations;
    f.converged = best.converged;
    const double ny = y.norm();
    f.relative_residual = ny > 0.0 ? fit_residual(y, f.vertical, f.horizontal, f.frequency) / ny : 0.0;
    return f;
}

int estimate_model_order(const Tensor3 &aug, double gamma)
{
    const Grams g = unfolding_grams(aug, false);
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(g.g3, Eigen::EigenvaluesOnly);
    VectorXd sv = es.eigenvalues().cwiseMax(0.0).cwiseSqrt().reverse(); // descending
    const Eigen::Index n = sv.size();
    if (n == 0 || sv[0] <= 0.0)
        return 0;

    const Eigen::Index rank_limit = std::min<Eigen::Index>(n, Eigen::Index(aug.dim1()) * aug.dim2());
    std::vector<double> trailing(sv.data() + rank_limit / 2, sv.data() + rank_limit);
    std::nth_element(trailing.begin(), trailing.begin() + trailing.size() / 2, trailing.end());
    const double median = trailing.empty() ? 0.0 : trailing[trailing.size() / 2];
    const double threshold = std::max(gamma * median, 1e-8 * sv[0]);

    int count = 0;
    for (Eigen::Index i = 0; i < n; ++i)
        if (sv[i] > threshold)
            ++count;
    return std::min(count, identifiability_bound(aug.dim1(), aug.dim2(), aug.dim3()));
}

std::vector<PathParams> extract_path_params(const CpdFactors &f, const SaConfig &sa, const ArrayConfig &array,
                                            const WaveformConfig &waveform)
{
    const int t_count = f.rank();
    const int v = static_cast<int>(f.frequency.rows());
    if (f.vertical.rows() != Eigen::Index(array.n_z) * (sa.aug_z + 1) ||
        f.horizontal.rows() != Eigen::Index(array.n_x) * (sa.aug_x + 1) || v < 2)
        throw std::invalid_argument("CPD factor sizes do not match the augmentation settings");

    const double df = waveform.subcarrier_spacing;
    const double unambiguous = kSpeedOfLight / df;

    std::vector<PathParams> out;
    out.reserve(t_count);
    for (int t = 0; t < t_count; ++t)
    {
        PathParams p;
        const VectorXcd &dcol = f.frequency.col(t);
        const cdouble lag = dcol.head(v - 1).dot(dcol.tail(v - 1)); // (J1 d)^H (J2 d)
        double range = -std::arg(lag) / (2.0 * kPi * df) * kSpeedOfLight;
        if (range < 0.0)
            range += unambiguous;
        // Within one resolution cell of the wrap point the estimate may as well be a slightly
        // negative delay; such paths cannot be placed reliably.
        p.delay_ambiguous = range > unambiguous - kSpeedOfLight / (df * v);
        p.delay_range = range;

        const VectorXcd dz = delay_steering(range, df, sa.aug_z + 1);
        const VectorXcd dx = delay_steering(range, df, sa.aug_x + 1);
        const VectorXcd fz = f.vertical.col(t);
        const VectorXcd fx = f.horizontal.col(t);

        p.aoa.el = grid_then_golden([&](double el) {
            return kron_correlation(fz, steering_vector({0.0, el}, ArrayAxis::vertical, array), dz);
        });
        const double el = p.aoa.el;
        p.aoa.az = grid_then_golden([&](double az) {
            return kron_correlation(fx, steering_vector({az, el}, ArrayAxis::horizontal, array), dx);
        });
        out.push_back(p);
    }
    return out;
}

RankDeficientError::RankDeficientError(int a, int b)
    : std::runtime_error("gain LS is rank deficient: paths " + std::to_string(a) + " and " + std::to_string(b) +
                         " collide"),
      first(a), second(b)
{
}

std::vector<cdouble> estimate_gains(const ObservationTensor &y, std::span<const PathParams> params,
                                    const ArrayConfig &array, const WaveformConfig &waveform)
{
    if (params.empty())
        throw std::invalid_argument("no paths to estimate gains for");
    const int t_count = static_cast<int>(params.size());
    const int nz = y.dim1(), nx = y.dim2(), ns = y.dim3();

    std::vector<VectorXcd> az(t_count), ax(t_count), d(t_count);
    for (int t = 0; t < t_count; ++t)
    {
        az[t] = steering_vector(params[t].aoa, ArrayAxis::vertical, array);
        ax[t] = steering_vector(params[t].aoa, ArrayAxis::horizontal, array);
        d[t] = delay_steering(params[t].delay_range, waveform.subcarrier_spacing, ns);
    }

    // Gram of B = [d (x) a_x (x) a_z] factorises over the Kronecker terms.
    MatrixXcd gram(t_count, t_count);
    for (int t = 0; t < t_count; ++t)
        for (int u = 0; u < t_count; ++u)
            gram(t, u) = az[t].dot(az[u]) * ax[t].dot(ax[u]) * d[t].dot(d[u]);

    int worst_a = -1, worst_b = -1;
    double worst = 0.0;
    for (int t = 0; t < t_count; ++t)
        for (int u = t + 1; u < t_count; ++u)
        {
            const double c = std::abs(gram(t, u)) / std::sqrt(gram(t, t).real() * gram(u, u).real());
            if (c > worst)
            {
                worst = c;
                worst_a = t;
                worst_b = u;
            }
        }
    const Eigen::SelfAdjointEigenSolver<MatrixXcd> es(gram, Eigen::EigenvaluesOnly);
    const double scale = gram.diagonal().real().maxCoeff();
    if (worst > 1.0 - 1e-10 || es.eigenvalues()[0] < 1e-12 * scale)
        throw RankDeficientError(worst_a, worst_b);

    VectorXcd rhs(t_count);
    for (int t = 0; t < t_count; ++t)
    {
        cdouble acc(0.0, 0.0);
        for (int k = 0; k < ns; ++k)
        {
            cdouble row(0.0, 0.0);
            for (int j = 0; j < nx; ++j)
            {
                cdouble col(0.0, 0.0);
                for (int i = 0; i < nz; ++i)
                    col += std::conj(az[t][i]) * y(i, j, k);
                row += std::conj(ax[t][j]) * col;
            }
            acc += std::conj(d[t][k]) * row;
        }
        rhs[t] = acc;
    }

    const VectorXcd rho = gram.ldlt().solve(rhs);
    return {rho.data(), rho.data() + rho.size()};
}

ChannelEstimate estimate_channel(const ObservationTensor &y, const ArrayConfig &array, const WaveformConfig &waveform,
                                 const ChanestConfig &config)
{
    ChannelEstimate out;
    const Tensor3 aug = spatial_augment(y, config.sa);
    const int order = std::min(estimate_model_order(aug, config.order_gamma), config.max_paths);
    out.model_order = order;
    if (order == 0)
        return out;

    const CpdFactors factors = cpd_als(aug, order, config.cpd);
    out.relative_residual = factors.relative_residual;

    std::vector<PathParams> params;
    for (const auto &p : extract_path_params(factors, config.sa, array, waveform))
    {
        if (p.delay_ambiguous)
            ++out.dropped_ambiguous;
        else
            params.push_back(p);
    }

    while (!params.empty())
    {
        try
        {
            const auto gains = estimate_gains(y, params, array, waveform);
            for (std::size_t t = 0; t < params.size(); ++t)
                out.paths.push_back({params[t].delay_range, params[t].aoa, gains[t]});
            break;
        }
        catch (const RankDeficientError &e)
        {
            // Two CPD components collapsed onto the same path; keep the first.
            params.erase(params.begin() + e.second);
        }
    }
    return out;
}

} // namespace isac
