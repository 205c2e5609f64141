// SPDX-License-Identifier: Apache-2.0
//
// hmdc - link-level simulator for high-mobility massive MIMO uplink
// transmission with angle-domain Doppler compensation
// Copyright (C) 2026 The hmdc authors
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

// Transmit side of the uplink: ULA steering vectors, matched-filter beams with
// random phases, antenna weighting and per-beam Doppler pre-compensation.
//
// Angle convention: directions are measured from the array axis (which is also
// the direction of motion), broadside is pi/2. A path leaving at angle theta
// sees a Doppler shift of f_d * cos(theta).

#include "hmdc/types.hpp"

#include <cmath>
#include <cstddef>
#include <random>
#include <span>
#include <string>

namespace hmdc
{
    // Uniform linear array: element count and spacing in wavelengths
    struct ArrayGeometry
    {
        std::size_t num_antennas = 64;
        double spacing = 0.45;

        void validate() const
        {
            if (num_antennas < 1)
                throw std::invalid_argument("ArrayGeometry: num_antennas must be >= 1");
            if (!(spacing > 0.0 && spacing <= 1.0))
                throw std::invalid_argument("ArrayGeometry: spacing must lie in (0, 1]");
        }
    };

    // Mobility and sampling. The maximum Doppler shift is derived, never stored.
    struct DopplerParams
    {
        double carrier_hz = 5.5e9;
        double speed_mps = 100.0;
        double symbol_interval_s = 1e-6;

        double max_doppler_hz() const { return speed_mps * carrier_hz / speed_of_light; }
        double omega_d() const { return 2.0 * pi * max_doppler_hz(); }

        // Phase advance per symbol of a unit Doppler factor: omega_d * T_s
        double phase_step() const { return omega_d() * symbol_interval_s; }

        void validate() const
        {
            if (!(carrier_hz > 0.0) || !std::isfinite(carrier_hz))
                throw std::invalid_argument("DopplerParams: carrier_hz must be positive");
            if (!(speed_mps >= 0.0) || !std::isfinite(speed_mps))
                throw std::invalid_argument("DopplerParams: speed_mps must be non-negative");
            if (!(symbol_interval_s > 0.0) || !std::isfinite(symbol_interval_s))
                throw std::invalid_argument("DopplerParams: symbol_interval_s must be positive");
        }
    };

    inline void check_direction(double theta)
    {
        if (!(theta > 0.0 && theta < pi))
            throw std::domain_error("direction " + std::to_string(theta) + " rad is outside (0, pi)");
    }

    // a(theta): element m is exp(j 2 pi d m cos(theta))
    inline cvec steering_vector(double theta, const ArrayGeometry &geom)
    {
        check_direction(theta);
        geom.validate();
        const double step = 2.0 * pi * geom.spacing * std::cos(theta);
        cvec a(geom.num_antennas);
        a[0] = cplx(1.0, 0.0);
        for (std::size_t m = 1; m < a.size(); ++m)
            a[m] = unit_phasor(step * double(m));
        return a;
    }

    // zeta = 1 / sqrt(Q * sum |w_m|^2): unit total transmit power per symbol across all Q beams
    inline double normalization_coefficient(std::size_t num_beams, std::span<const cplx> weights)
    {
        if (num_beams < 1)
            throw std::invalid_argument("normalization_coefficient: need at least one beam");
        double energy = 0.0;
        for (const auto &w : weights)
            energy += std::norm(w);
        if (!(energy > 0.0))
            throw std::invalid_argument("normalization_coefficient: antenna weights are all zero");
        return 1.0 / std::sqrt(double(num_beams) * energy);
    }

    // b = zeta * a(theta) * exp(j pi phase), phase given in units of pi
    inline cvec make_beamformer(double theta, double phase_units_of_pi, double zeta, const ArrayGeometry &geom)
    {
        cvec b = steering_vector(theta, geom);
        const cplx rot = zeta * unit_phasor(pi * phase_units_of_pi);
        for (auto &v : b)
            v *= rot;
        return b;
    }

    // Diagonal of Phi(epsilon): element n is exp(j omega_d T_s (start + n) epsilon).
    // A nonzero start continues the ramp of an earlier segment of the same frame.
    inline cvec phase_ramp(double epsilon, std::size_t length, const DopplerParams &dp, std::size_t start = 0)
    {
        if (length < 1)
            throw std::invalid_argument("phase_ramp: length must be >= 1");
        const double step = dp.phase_step() * epsilon;
        cvec ramp(length);
        for (std::size_t n = 0; n < length; ++n)
        {
            const std::size_t t = start + n;
            ramp[n] = t == 0 ? cplx(1.0, 0.0) : unit_phasor(step * double(t));
        }
        return ramp;
    }

    // Beam directions whose cosines are the centres of Q equal-width bins of (-1, 1)
    inline std::vector<double> select_directions(std::size_t num_beams)
    {
        if (num_beams < 1)
            throw std::invalid_argument("select_directions: Q must be >= 1");
        std::vector<double> dirs(num_beams);
        const double q_total = double(num_beams);
        for (std::size_t q = 0; q < num_beams; ++q)
            dirs[q] = std::acos(-1.0 + (2.0 * double(q) + 1.0) / q_total);
        return dirs;
    }

    // Q matched-filter beams sharing one antenna weighting; the random phases are
    // held as a schedule with one row per signal block and one column per beam.
    class BeamformerBank
    {
    public:
        BeamformerBank() = default;

        BeamformerBank(ArrayGeometry geom, std::vector<double> directions, cvec weights,
                       std::vector<std::vector<double>> phase_schedule)
            : geom_(geom), directions_(std::move(directions)), weights_(std::move(weights)),
              schedule_(std::move(phase_schedule))
        {
            geom_.validate();
            if (directions_.empty())
                throw std::invalid_argument("BeamformerBank: no beam directions");
            for (double theta : directions_)
                check_direction(theta);
            if (weights_.size() != geom_.num_antennas)
                throw std::invalid_argument("BeamformerBank: weight vector length must equal M");
            if (schedule_.empty())
                throw std::invalid_argument("BeamformerBank: phase schedule needs at least one block");
            for (const auto &row : schedule_)
                if (row.size() != directions_.size())
                    throw std::invalid_argument("BeamformerBank: phase schedule row length must equal Q");
            zeta_ = normalization_coefficient(directions_.size(), weights_);
            weight_sum_ = cplx(0.0, 0.0);
            for (const auto &w : weights_)
                weight_sum_ += w;
        }

        const ArrayGeometry &geometry() const { return geom_; }
        std::size_t num_beams() const { return directions_.size(); }
        std::size_t num_blocks() const { return schedule_.size(); }
        double direction(std::size_t q) const { return directions_.at(q); }
        const std::vector<double> &directions() const { return directions_; }
        const cvec &weights() const { return weights_; }
        double zeta() const { return zeta_; }
        cplx weight_sum() const { return weight_sum_; }

        // phi_{k,q}, units of pi
        double phase(std::size_t block, std::size_t beam) const { return schedule_.at(block).at(beam); }
        const std::vector<std::vector<double>> &phase_schedule() const { return schedule_; }

        cvec beamformer(std::size_t block, std::size_t beam) const
        {
            return make_beamformer(direction(beam), phase(block, beam), zeta_, geom_);
        }

    private:
        ArrayGeometry geom_{};
        std::vector<double> directions_;
        cvec weights_;
        std::vector<std::vector<double>> schedule_;
        double zeta_ = 0.0;
        cplx weight_sum_{};
    };

    // Random phases uniform on [0, 2) (units of pi). With per_block = false every
    // row repeats the first draw, i.e. one realization for the whole frame.
    template <typename Rng>
    std::vector<std::vector<double>> draw_phase_schedule(std::size_t num_blocks, std::size_t num_beams,
                                                         bool per_block, Rng &rng)
    {
        if (num_blocks < 1 || num_beams < 1)
            throw std::invalid_argument("draw_phase_schedule: empty schedule requested");
        std::uniform_real_distribution<double> uni(0.0, 2.0);
        std::vector<std::vector<double>> schedule(num_blocks, std::vector<double>(num_beams));
        for (std::size_t k = 0; k < num_blocks; ++k)
        {
            if (k > 0 && !per_block)
            {
                schedule[k] = schedule[0];
                continue;
            }
            for (auto &phi : schedule[k])
                phi = uni(rng);
        }
        return schedule;
    }

    inline cvec uniform_weights(std::size_t num_antennas)
    {
        return cvec(num_antennas, cplx(1.0, 0.0));
    }

    // M x N transmit signal of one beam, column-major (column n = symbol time n)
    struct TransmitMatrix
    {
        std::size_t rows = 0;
        std::size_t cols = 0;
        cvec entries;

        cplx operator()(std::size_t m, std::size_t n) const { return entries[n * rows + m]; }
        cplx &operator()(std::size_t m, std::size_t n) { return entries[n * rows + m]; }
    };

    // X_q = diag(w) conj(b_q) s^T Phi(-cos theta_q); the ramp index starts at start_sample
    inline TransmitMatrix transmit_matrix(const BeamformerBank &bank, std::size_t block, std::size_t beam,
                                          std::span<const cplx> symbols, const DopplerParams &dp,
                                          std::size_t start_sample = 0)
    {
        if (symbols.empty())
            throw std::invalid_argument("transmit_matrix: empty symbol vector");
        if (beam >= bank.num_beams() || block >= bank.num_blocks())
            throw std::out_of_range("transmit_matrix: beam or block index out of range");

        const cvec b = bank.beamformer(block, beam);
        const cvec ramp = phase_ramp(-std::cos(bank.direction(beam)), symbols.size(), dp, start_sample);
        const auto &w = bank.weights();

        TransmitMatrix x;
        x.rows = b.size();
        x.cols = symbols.size();
        x.entries.resize(x.rows * x.cols);
        for (std::size_t n = 0; n < x.cols; ++n)
        {
            const cplx sn = symbols[n] * ramp[n];
            for (std::size_t m = 0; m < x.rows; ++m)
                x(m, n) = w[m] * std::conj(b[m]) * sn;
        }
        return x;
    }
}
