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

#pragma once

#include <cstdint>
#include <span>
#include <stdexcept>
#include <vector>

#include <Eigen/Dense>

#include "isac/signal.hpp"

namespace isac
{

// Spatial augmentation orders. The augmented tensor has shape
// n_z (aug_z + 1) x n_x (aug_x + 1) x V with V = S - aug_x - aug_z.
struct SaConfig
{
    int aug_x = 4;
    int aug_z = 4;

    int frequency_length(int num_subcarriers) const { return num_subcarriers - aug_x - aug_z; }
};

// Folds frequency samples into the spatial modes:
//
//   Y_aug((iz, p), (ix, q), v) = Y(iz, ix, p + q + v)
//
// with composite row index iz (aug_z + 1) + p and column index ix (aug_x + 1) + q. Because
// [d]_p [d]_q [d]_v = [d]_{p+q+v}, a path contributes the rank-1 term
// (a_z (x) d[0..aug_z]) o (a_x (x) d[0..aug_x]) o d[0..V-1], i.e. the Kronecker structure of the
// augmented steering vectors with the delay factor varying fastest.
Tensor3 spatial_augment(const Tensor3 &tensor, const SaConfig &sa);

struct CpdOptions
{
    int restarts = 5;
    int max_iterations = 200;
    double tolerance = 1e-8; // relative change of the fit error
    std::uint64_t seed = 0;
};

// Factor matrices of a rank-T CP model, one column per component.
struct CpdFactors
{
    Eigen::MatrixXcd vertical;   // dim1 x T
    Eigen::MatrixXcd horizontal; // dim2 x T
    Eigen::MatrixXcd frequency;  // dim3 x T
    double relative_residual = 0.0;
    int iterations = 0;
    bool converged = false;

    int rank() const { return static_cast<int>(vertical.cols()); }
};

struct IdentifiabilityError : std::invalid_argument
{
    using std::invalid_argument::invalid_argument;
};

// Largest T with min(I,T) + min(J,T) + min(K,T) >= 2T + 2 (Kruskal's sufficient condition).
int identifiability_bound(int dim1, int dim2, int dim3);

// Alternating least squares fit of a rank-T CP model to `tensor`. The tensor is first
// compressed onto the dominant rank-T subspaces of its unfoldings; ALS then runs on the
// compressed core, starting once from the truncated-SVD basis and then from random points.
// The restart with the lowest residual wins (ties go to the lower restart index).
CpdFactors cpd_als(const Tensor3 &tensor, int rank, const CpdOptions &options = {});

// Number of mode-3 singular values above gamma times the median of the trailing half,
// clamped to the identifiability bound.
int estimate_model_order(const Tensor3 &aug_tensor, double gamma = 3.0);

struct PathParams
{
    double delay_range = 0.0; // m
    Aoa aoa;
    bool delay_ambiguous = false;
};

// Delay from the phase rotation between consecutive frequency-factor entries, wrapped into
// [0, c / subcarrier_spacing); estimates within one range-resolution cell below the wrap point
// are flagged ambiguous. Then
// elevation and azimuth by maximising the normalised correlation with the augmented
// steering vectors (coarse grid followed by golden-section refinement).
std::vector<PathParams> extract_path_params(const CpdFactors &factors, const SaConfig &sa, const ArrayConfig &array,
                                            const WaveformConfig &waveform);

struct RankDeficientError : std::runtime_error
{
    RankDeficientError(int first, int second);
    int first;
    int second;
};

// Least-squares gains for the model vec(Y) = B rho, with columns d (x) a_x (x) a_z.
std::vector<cdouble> estimate_gains(const ObservationTensor &tensor, std::span<const PathParams> params,
                                    const ArrayConfig &array, const WaveformConfig &waveform);

struct EstimatedPath
{
    double delay_range = 0.0; // m
    Aoa aoa;
    cdouble gain{0.0, 0.0};
};

struct ChanestConfig
{
    SaConfig sa;
    CpdOptions cpd;
    double order_gamma = 3.0;
    int max_paths = 50;
};

struct ChannelEstimate
{
    std::vector<EstimatedPath> paths;
    int model_order = 0;
    int dropped_ambiguous = 0;
    double relative_residual = 0.0;
};

// Full estimator: augmentation, model order selection, CPD, parameter extraction and gains.
ChannelEstimate estimate_channel(const ObservationTensor &tensor, const ArrayConfig &array,
                                 const WaveformConfig &waveform, const ChanestConfig &config);

} // namespace isac
