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

#include "isac/signal.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace isac
{

ArrayConfig ArrayConfig::half_wavelength(int n_x, int n_z, double carrier_freq)
{
    ArrayConfig a;
    a.n_x = n_x;
    a.n_z = n_z;
    a.wavelength = kSpeedOfLight / carrier_freq;
    a.d_x = a.wavelength / 2.0;
    a.d_z = a.wavelength / 2.0;
    return a;
}

void ArrayConfig::validate() const
{
    if (n_x < 2 || n_z < 2)
        throw std::invalid_argument("array needs at least 2 elements per axis");
    if (d_x <= 0.0 || d_z <= 0.0 || wavelength <= 0.0)
        throw std::invalid_argument("array spacings and wavelength must be positive");
}

void WaveformConfig::validate() const
{
    if (num_subcarriers < 2)
        throw std::invalid_argument("at least 2 subcarriers are required");
    if (subcarrier_spacing <= 0.0 || carrier_freq <= 0.0)
        throw std::invalid_argument("subcarrier spacing and carrier must be positive");
    if (num_symbols < 1)
        throw std::invalid_argument("at least one OFDM symbol is required");
}

double Tensor3::norm() const
{
    double s = 0.0;
    for (const auto &v : data_)
        s += std::norm(v);
    return std::sqrt(s);
}

Tensor3 &Tensor3::operator+=(const Tensor3 &other)
{
    if (other.n1_ != n1_ || other.n2_ != n2_ || other.n3_ != n3_)
        throw std::invalid_argument("tensor dimension mismatch");
    for (std::size_t i = 0; i < data_.size(); ++i)
        data_[i] += other.data_[i];
    return *this;
}

Eigen::VectorXcd steering_vector(const Aoa &aoa, ArrayAxis axis, const ArrayConfig &array)
{
    const bool horiz = axis == ArrayAxis::horizontal;
    const int n = horiz ? array.n_x : array.n_z;
    const double spacing = horiz ? array.d_x : array.d_z;
    const double dir = horiz ? std::cos(aoa.el) * std::sin(aoa.az) : std::sin(aoa.el);
    const double step = 2.0 * kPi / array.wavelength * spacing * dir;

    Eigen::VectorXcd v(n);
    for (int i = 0; i < n; ++i)
        v[i] = std::polar(1.0, step * i);
    return v;
}

Eigen::VectorXcd delay_steering(double delay_range, double subcarrier_spacing, int length)
{
    const double step = -2.0 * kPi * subcarrier_spacing * (delay_range / kSpeedOfLight);
    Eigen::VectorXcd v(length);
    for (int k = 0; k < length; ++k)
        v[k] = std::polar(1.0, step * k);
    return v;
}

Eigen::VectorXcd delay_steering(double delay_range, const WaveformConfig &waveform)
{
    return delay_steering(delay_range, waveform.subcarrier_spacing, waveform.num_subcarriers);
}

double noise_variance(const WaveformConfig &w)
{
    const double dbm = w.noise_psd_dbm_hz + 10.0 * std::log10(w.subcarrier_spacing) + w.noise_figure_db;
    return std::pow(10.0, dbm / 10.0);
}

double gain_scale(const WaveformConfig &w, const SynthesisOptions &options)
{
    const double p_mw = std::pow(10.0, (w.tx_power_dbm + options.snr_offset_db) / 10.0);
    return std::sqrt(p_mw / w.num_subcarriers) * std::sqrt(static_cast<double>(w.num_symbols));
}

ObservationTensor synthesize_snapshot(std::span<const TruePath> paths, const ArrayConfig &array,
                                      const WaveformConfig &waveform, std::uint64_t seed,
                                      const SynthesisOptions &options)
{
    array.validate();
    waveform.validate();

    const int nz = array.n_z, nx = array.n_x, ns = waveform.num_subcarriers;
    ObservationTensor y(nz, nx, ns);
    const double scale = gain_scale(waveform, options);

    for (const auto &p : paths)
    {
        const Eigen::VectorXcd az = steering_vector(p.aoa, ArrayAxis::vertical, array);
        const Eigen::VectorXcd ax = steering_vector(p.aoa, ArrayAxis::horizontal, array);
        const Eigen::VectorXcd d = delay_steering(p.delay_range, waveform);
        const cdouble rho = scale * p.gain;
        for (int k = 0; k < ns; ++k)
            for (int j = 0; j < nx; ++j)
            {
                const cdouble c = rho * ax[j] * d[k];
                for (int i = 0; i < nz; ++i)
                    y(i, j, k) += c * az[i];
            }
    }

    if (options.add_noise)
    {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> normal(0.0, std::sqrt(noise_variance(waveform) / 2.0));
        for (auto &v : y.data())
        {
            const double re = normal(rng);
            const double im = normal(rng);
            v += cdouble(re, im);
        }
    }
    return y;
}

} // namespace isac
