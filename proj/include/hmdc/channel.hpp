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

// Multipath uplink channel from the moving array to a single-antenna receiver.
//
// The received sample at symbol time t is a double sum over paths p and beams q:
//
//     r(t) = sum_q sum_p alpha_p * a(theta_p)^T diag(w) conj(b_q) * s_q(t)
//                  * exp(j omega_d T_s t (cos theta_p - cos vartheta_q))
//
// Three propagation modes are supported:
//  - ideal:     paths sit on the beam directions and only the self-beam terms
//               (p == q) are kept, i.e. the large-array limit applied exactly
//  - aligned:   paths sit on the beam directions, every cross-beam term kept
//  - continuum: P paths with random angles of departure (Jakes-type scattering)

#include "hmdc/array_domain.hpp"
#include "hmdc/rng.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <span>
#include <string>
#include <string_view>

namespace hmdc
{
    enum class PropagationMode
    {
        ideal,
        aligned,
        continuum
    };

    // Angle-of-departure density for continuum scattering
    enum class AodDensity
    {
        uniform_angle,
        uniform_cosine
    };

    inline std::string_view to_string(PropagationMode mode)
    {
        switch (mode)
        {
        case PropagationMode::ideal:
            return "ideal";
        case PropagationMode::aligned:
            return "aligned";
        case PropagationMode::continuum:
            return "continuum";
        }
        return "?";
    }

    inline std::string_view to_string(AodDensity density)
    {
        return density == AodDensity::uniform_angle ? "uniform_angle" : "uniform_cosine";
    }

    struct Path
    {
        double aod = pi / 2; // rad, in (0, pi)
        cplx gain{};
    };

    // One channel realization. In ideal and aligned modes path q belongs to beam q.
    struct PathSet
    {
        std::vector<Path> paths;
        PropagationMode mode = PropagationMode::aligned;

        std::size_t size() const { return paths.size(); }
    };

    struct ReceivedBlock
    {
        cvec samples;
        double noise_variance = 0.0; // per complex sample
    };

    // Draw a channel realization. Ideal/aligned: one path per beam direction with
    // gains CN(0, 1/Q). Continuum: num_paths random AODs with gains CN(0, 1/P).
    template <typename Gen>
    PathSet draw_paths(PropagationMode mode, Gen &rng, const BeamformerBank &bank, std::size_t num_paths,
                       AodDensity density = AodDensity::uniform_angle)
    {
        PathSet set;
        set.mode = mode;
        if (mode == PropagationMode::continuum)
        {
            if (num_paths < 1)
                throw std::invalid_argument("draw_paths: continuum mode needs at least one path");
            std::uniform_real_distribution<double> uni(0.0, 1.0);
            set.paths.resize(num_paths);
            const double var = 1.0 / double(num_paths);
            for (auto &path : set.paths)
            {
                double theta = 0.0;
                do
                {
                    const double u = uni(rng);
                    theta = density == AodDensity::uniform_angle ? pi * u : std::acos(1.0 - 2.0 * u);
                } while (!(theta > 0.0 && theta < pi));
                path.aod = theta;
                path.gain = complex_normal(rng, var);
            }
            return set;
        }

        const std::size_t num_beams = bank.num_beams();
        if (num_beams < 1)
            throw std::invalid_argument("draw_paths: beamformer bank is empty");
        set.paths.resize(num_beams);
        const double var = 1.0 / double(num_beams);
        for (std::size_t q = 0; q < num_beams; ++q)
        {
            set.paths[q].aod = bank.direction(q);
            set.paths[q].gain = complex_normal(rng, var);
        }
        return set;
    }

    // Path-to-beam coupling a(theta_p)^T diag(w) conj(a(vartheta_q)) and the residual
    // Doppler factor cos(theta_p) - cos(vartheta_q) for every (p, q). Depends only on
    // geometry, so it can be reused across realizations that share path angles.
    struct CouplingTable
    {
        std::size_t num_paths = 0;
        std::size_t num_beams = 0;
        cvec coupling;                      // row-major P x Q
        std::vector<double> doppler_factor; // row-major P x Q

        cplx at(std::size_t p, std::size_t q) const { return coupling[p * num_beams + q]; }
        double factor(std::size_t p, std::size_t q) const { return doppler_factor[p * num_beams + q]; }
    };

    inline CouplingTable coupling_table(const std::vector<Path> &paths, const BeamformerBank &bank)
    {
        const auto &geom = bank.geometry();
        const auto &w = bank.weights();
        CouplingTable table;
        table.num_paths = paths.size();
        table.num_beams = bank.num_beams();
        table.coupling.resize(table.num_paths * table.num_beams);
        table.doppler_factor.resize(table.num_paths * table.num_beams);
        for (std::size_t p = 0; p < table.num_paths; ++p)
        {
            check_direction(paths[p].aod);
            const double cp = std::cos(paths[p].aod);
            for (std::size_t q = 0; q < table.num_beams; ++q)
            {
                const double delta = cp - std::cos(bank.direction(q));
                const double step = 2.0 * pi * geom.spacing * delta;
                cplx acc{};
                if (delta == 0.0)
                {
                    for (const auto &wm : w)
                        acc += wm;
                }
                else
                {
                    for (std::size_t m = 0; m < w.size(); ++m)
                        acc += w[m] * unit_phasor(step * double(m));
                }
                table.coupling[p * table.num_beams + q] = acc;
                table.doppler_factor[p * table.num_beams + q] = delta;
            }
        }
        return table;
    }

    inline CouplingTable coupling_table(const PathSet &paths, const BeamformerBank &bank)
    {
        return coupling_table(paths.paths, bank);
    }

    namespace detail
    {
        inline void check_beam_paths(const PathSet &paths, const BeamformerBank &bank)
        {
            if (paths.size() != bank.num_beams())
                throw std::invalid_argument("ideal/aligned path set must hold exactly one path per beam");
        }
    }

    // Noise-free received samples for one transmission segment.
    //
    // Beam q carries streams[stream_of_beam[q]] with phases from row `block` of the
    // bank's schedule. Sample n of the output is symbol time start_sample + n; the
    // Doppler pre-compensation of each beam and the channel Doppler of each path
    // both run on that absolute time axis.
    inline cvec propagate(const PathSet &paths, const BeamformerBank &bank, std::size_t block,
                          std::span<const cvec> streams, std::span<const std::size_t> stream_of_beam,
                          const DopplerParams &dp, std::size_t start_sample = 0,
                          const CouplingTable *coupling = nullptr)
    {
        const std::size_t num_beams = bank.num_beams();
        if (streams.empty())
            throw std::invalid_argument("propagate: no symbol streams");
        if (stream_of_beam.size() != num_beams)
            throw std::invalid_argument("propagate: stream assignment must cover every beam");
        if (block >= bank.num_blocks())
            throw std::out_of_range("propagate: block index out of range");
        const std::size_t length = streams[0].size();
        for (const auto &s : streams)
            if (s.size() != length)
                throw std::invalid_argument("propagate: all streams must share one length");
        for (auto idx : stream_of_beam)
            if (idx >= streams.size())
                throw std::out_of_range("propagate: stream index out of range");
        if (paths.mode != PropagationMode::continuum)
            detail::check_beam_paths(paths, bank);

        CouplingTable local;
        if (coupling == nullptr)
        {
            local = coupling_table(paths, bank);
            coupling = &local;
        }
        else if (coupling->num_paths != paths.size() || coupling->num_beams != num_beams)
            throw std::invalid_argument("propagate: coupling table does not match paths/bank");

        // Per stream, the time-varying gain g_s(t) multiplying s(t)
        std::vector<cvec> gain(streams.size(), cvec(length, cplx{}));
        const double step = dp.phase_step();
        const double zeta = bank.zeta();
        for (std::size_t q = 0; q < num_beams; ++q)
        {
            const cplx beam_phase = zeta * unit_phasor(-pi * bank.phase(block, q));
            cvec &g = gain[stream_of_beam[q]];
            for (std::size_t p = 0; p < paths.size(); ++p)
            {
                if (paths.mode == PropagationMode::ideal && p != q)
                    continue;
                const cplx coef = paths.paths[p].gain * coupling->at(p, q) * beam_phase;
                const double factor = coupling->factor(p, q);
                if (factor == 0.0)
                {
                    for (auto &v : g)
                        v += coef;
                    continue;
                }
                // exp(j step factor t) by recurrence from the segment start
                const cplx rot = unit_phasor(step * factor);
                cplx phasor = coef * unit_phasor(step * factor * double(start_sample));
                for (std::size_t n = 0; n < length; ++n)
                {
                    g[n] += phasor;
                    phasor *= rot;
                }
            }
        }

        cvec r(length, cplx{});
        for (std::size_t s = 0; s < streams.size(); ++s)
            for (std::size_t n = 0; n < length; ++n)
                r[n] += gain[s][n] * streams[s][n];
        return r;
    }

    // Same as above with every beam carrying one stream
    inline cvec propagate(const PathSet &paths, const BeamformerBank &bank, std::size_t block,
                          std::span<const cplx> symbols, const DopplerParams &dp, std::size_t start_sample = 0,
                          const CouplingTable *coupling = nullptr)
    {
        const cvec streams[1] = {cvec(symbols.begin(), symbols.end())};
        const std::vector<std::size_t> assignment(bank.num_beams(), 0);
        return propagate(paths, bank, block, streams, assignment, dp, start_sample, coupling);
    }

    // Received samples from explicit per-beam transmit matrices: the defining double
    // sum evaluated antenna by antenna. Matrix q must belong to beam q; in ideal mode
    // only path q is applied to matrix q.
    inline cvec propagate(const PathSet &paths, std::span<const TransmitMatrix> transmit, const ArrayGeometry &geom,
                          const DopplerParams &dp, std::size_t start_sample = 0)
    {
        if (transmit.empty())
            throw std::invalid_argument("propagate: no transmit matrices");
        const std::size_t length = transmit[0].cols;
        for (const auto &x : transmit)
            if (x.cols != length || x.rows != geom.num_antennas)
                throw std::invalid_argument("propagate: transmit matrix dimensions disagree");
        if (paths.mode != PropagationMode::continuum && paths.size() != transmit.size())
            throw std::invalid_argument("propagate: ideal/aligned path set must hold one path per beam");

        cvec r(length, cplx{});
        for (std::size_t p = 0; p < paths.size(); ++p)
        {
            const cvec a = steering_vector(paths.paths[p].aod, geom);
            const cvec ramp = phase_ramp(std::cos(paths.paths[p].aod), length, dp, start_sample);
            for (std::size_t q = 0; q < transmit.size(); ++q)
            {
                if (paths.mode == PropagationMode::ideal && p != q)
                    continue;
                const auto &x = transmit[q];
                for (std::size_t n = 0; n < length; ++n)
                {
                    cplx acc{};
                    for (std::size_t m = 0; m < x.rows; ++m)
                        acc += a[m] * x(m, n);
                    r[n] += paths.paths[p].gain * acc * ramp[n];
                }
            }
        }
        return r;
    }

    // Large-array equivalent channel of one block: zeta * (sum_m w_m) * sum_{q in beams}
    // alpha_q exp(-j pi phi_{k,q}). An empty subset means all beams.
    inline cplx equivalent_channel_oracle(const PathSet &paths, const BeamformerBank &bank, std::size_t block,
                                          std::span<const std::size_t> beams = {})
    {
        if (paths.mode == PropagationMode::continuum)
            throw unsupported_mode("equivalent_channel_oracle: not defined for continuum scattering");
        detail::check_beam_paths(paths, bank);
        cplx acc{};
        auto add = [&](std::size_t q)
        {
            if (q >= bank.num_beams())
                throw std::out_of_range("equivalent_channel_oracle: beam index out of range");
            acc += paths.paths[q].gain * unit_phasor(-pi * bank.phase(block, q));
        };
        if (beams.empty())
            for (std::size_t q = 0; q < bank.num_beams(); ++q)
                add(q);
        else
            for (auto q : beams)
                add(q);
        return bank.zeta() * bank.weight_sum() * acc;
    }

    // E|h_eq|^2 for a stream served by `subset_size` of the Q beams, under the
    // sum_p E|alpha_p|^2 = 1 gain normalization
    inline double analytic_channel_power(const BeamformerBank &bank, std::size_t subset_size)
    {
        const double z = bank.zeta();
        return z * z * std::norm(bank.weight_sum()) * double(subset_size) / double(bank.num_beams());
    }

    inline constexpr double max_snr_db = 300.0;

    // Adds CN(0, sigma^2) noise with sigma^2 = reference_power * 10^(-snr_db / 10).
    // +inf is capped at max_snr_db.
    template <typename Gen>
    ReceivedBlock add_noise(std::span<const cplx> clean, double snr_db, double reference_power, Gen &rng)
    {
        if (std::isnan(snr_db) || snr_db == -std::numeric_limits<double>::infinity())
            throw std::invalid_argument("add_noise: snr_db must be finite");
        if (!(reference_power > 0.0) || !std::isfinite(reference_power))
            throw std::invalid_argument("add_noise: reference_power must be positive");
        snr_db = std::min(snr_db, max_snr_db);

        ReceivedBlock out;
        out.noise_variance = reference_power * std::pow(10.0, -snr_db / 10.0);
        out.samples.assign(clean.begin(), clean.end());
        std::normal_distribution<double> n01(0.0, 1.0);
        const double s = std::sqrt(0.5 * out.noise_variance);
        for (auto &v : out.samples)
        {
            const double re = n01(rng);
            const double im = n01(rng);
            v += cplx(s * re, s * im);
        }
        return out;
    }

    enum class SpectralWindow
    {
        hann,
        rectangular
    };

    namespace detail
    {
        // fftw planner calls are not re-entrant
        inline std::mutex &fftw_planner_mutex()
        {
            static std::mutex m;
            return m;
        }

        inline cvec fft(const cvec &in)
        {
            cvec out(in.size());
            cvec scratch(in);
            fftw_plan plan;
            {
                std::lock_guard lock(fftw_planner_mutex());
                plan = fftw_plan_dft_1d(int(in.size()), reinterpret_cast<fftw_complex *>(scratch.data()),
                                        reinterpret_cast<fftw_complex *>(out.data()), FFTW_FORWARD, FFTW_ESTIMATE);
            }
            if (plan == nullptr)
                throw std::runtime_error("fftw: failed to create plan");
            fftw_execute(plan);
            {
                std::lock_guard lock(fftw_planner_mutex());
                fftw_destroy_plan(plan);
            }
            return out;
        }
    }

    // RMS Doppler spread (Hz) of a channel time series sampled every T_s seconds:
    // the power-weighted standard deviation of frequency over the periodogram of
    // the mean-removed series. The Hann window keeps leakage of off-bin tones from
    // dominating the second moment.
    inline double doppler_spread_estimate(std::span<const cplx> series, double symbol_interval_s,
                                          SpectralWindow window = SpectralWindow::hann)
    {
        const std::size_t n = series.size();
        if (n < 64)
            throw std::invalid_argument("doppler_spread_estimate: series must hold at least 64 samples");
        if (!(symbol_interval_s > 0.0))
            throw std::invalid_argument("doppler_spread_estimate: sample interval must be positive");

        cplx mean{};
        double total = 0.0;
        for (const auto &v : series)
        {
            mean += v;
            total += std::norm(v);
        }
        mean /= double(n);

        cvec x(n);
        double residual = 0.0;
        for (std::size_t i = 0; i < n; ++i)
        {
            x[i] = series[i] - mean;
            residual += std::norm(x[i]);
        }
        // Constant input: what survives mean removal is rounding noise
        if (!(residual > 1e-24 * total))
            return 0.0;

        if (window == SpectralWindow::hann)
            for (std::size_t i = 0; i < n; ++i)
                x[i] *= 0.5 - 0.5 * std::cos(2.0 * pi * double(i) / double(n));

        const cvec spec = detail::fft(x);
        const double df = 1.0 / (double(n) * symbol_interval_s);
        double p_sum = 0.0, f_sum = 0.0;
        std::vector<double> freq(n), power(n);
        for (std::size_t k = 0; k < n; ++k)
        {
            // bins at and above n/2 are negative frequencies
            freq[k] = (k < (n + 1) / 2 ? double(k) : double(k) - double(n)) * df;
            power[k] = std::norm(spec[k]);
            p_sum += power[k];
            f_sum += freq[k] * power[k];
        }
        if (!(p_sum > 0.0))
            return 0.0;
        const double f_mean = f_sum / p_sum;
        double m2 = 0.0;
        for (std::size_t k = 0; k < n; ++k)
            m2 += (freq[k] - f_mean) * (freq[k] - f_mean) * power[k];
        return std::sqrt(m2 / p_sum);
    }
}
