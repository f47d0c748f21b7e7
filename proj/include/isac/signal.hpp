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
#include <vector>

#include <Eigen/Dense>

#include "isac/geometry.hpp"
#include "isac/scene.hpp"

namespace isac
{

// Uniform rectangular array. Element (iz, ix) sits at local coordinates (0, ix * d_x, iz * d_z),
// so the array spans the local y-z plane and looks along local +x.
struct ArrayConfig
{
    int n_x = 8;
    int n_z = 8;
    double d_x = 0.0; // m
    double d_z = 0.0; // m
    double wavelength = 0.0;

    static ArrayConfig half_wavelength(int n_x, int n_z, double carrier_freq);
    void validate() const;
};

// Defaults: 400 MHz active bandwidth sampled by 128 subcarriers. The unambiguous range
// c / subcarrier_spacing is then about 96 m.
struct WaveformConfig
{
    double carrier_freq = 27.2e9;       // Hz
    double subcarrier_spacing = 3.125e6; // Hz
    int num_subcarriers = 128;
    int num_symbols = 12;
    double tx_power_dbm = 10.0;
    double noise_psd_dbm_hz = -174.0;
    double noise_figure_db = 8.0;

    double wavelength() const { return kSpeedOfLight / carrier_freq; }
    double bandwidth() const { return subcarrier_spacing * num_subcarriers; }
    void validate() const;
};

// Dense complex 3-way array stored column-major: element (i, j, k) at i + n1 * (j + n2 * k).
// With this layout the flattened data equals vec() of the tensor.
class Tensor3
{
  public:
    Tensor3() = default;
    Tensor3(int n1, int n2, int n3) : n1_(n1), n2_(n2), n3_(n3), data_(std::size_t(n1) * n2 * n3, cdouble(0.0)) {}

    int dim1() const { return n1_; }
    int dim2() const { return n2_; }
    int dim3() const { return n3_; }
    std::size_t size() const { return data_.size(); }

    cdouble &operator()(int i, int j, int k) { return data_[i + std::size_t(n1_) * (j + std::size_t(n2_) * k)]; }
    const cdouble &operator()(int i, int j, int k) const
    {
        return data_[i + std::size_t(n1_) * (j + std::size_t(n2_) * k)];
    }

    std::vector<cdouble> &data() { return data_; }
    const std::vector<cdouble> &data() const { return data_; }

    double norm() const;
    Tensor3 &operator+=(const Tensor3 &other);
    bool operator==(const Tensor3 &) const = default;

  private:
    int n1_ = 0, n2_ = 0, n3_ = 0;
    std::vector<cdouble> data_;
};

// Received snapshot at one BS indexed (vertical antenna, horizontal antenna, subcarrier).
using ObservationTensor = Tensor3;

enum class ArrayAxis
{
    horizontal,
    vertical
};

// [a_x]_n = exp(j 2pi/lambda d_x n cos(el) sin(az)),  [a_z]_n = exp(j 2pi/lambda d_z n sin(el))
Eigen::VectorXcd steering_vector(const Aoa &aoa, ArrayAxis axis, const ArrayConfig &array);

// [d]_k = exp(-j 2pi k df tau), tau = delay_range / c, for k = 0 .. length-1.
Eigen::VectorXcd delay_steering(double delay_range, double subcarrier_spacing, int length);
Eigen::VectorXcd delay_steering(double delay_range, const WaveformConfig &waveform);

// Per-entry noise variance in mW: noise PSD integrated over one subcarrier, times the noise figure.
double noise_variance(const WaveformConfig &waveform);

struct SynthesisOptions
{
    bool add_noise = true;
    double snr_offset_db = 0.0; // added to the transmit power
};

// Amplitude applied to the channel gains: per-subcarrier transmit amplitude times the
// coherent integration over num_symbols pilot symbols.
double gain_scale(const WaveformConfig &waveform, const SynthesisOptions &options = {});

ObservationTensor synthesize_snapshot(std::span<const TruePath> paths, const ArrayConfig &array,
                                      const WaveformConfig &waveform, std::uint64_t seed,
                                      const SynthesisOptions &options = {});

} // namespace isac
