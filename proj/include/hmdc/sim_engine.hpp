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

// Monte Carlo symbol-error-rate simulation of the three uplink schemes.
//
// A trial is one frame: fresh path gains, fresh beam phases, fresh data and
// noise. Every random number of trial i comes from trial_stream(seed, i), so a
// trial's outcome does not depend on which thread ran it or in which order.
// Trials are consumed in fixed-size batches and the error-target stopping rule
// is evaluated only at batch boundaries, in batch order; the aggregate is then
// identical for any thread count.

#include "hmdc/array_domain.hpp"
#include "hmdc/channel.hpp"
#include "hmdc/diversity_coding.hpp"
#include "hmdc/receiver.hpp"
#include "hmdc/rng.hpp"

#include <algorithm>
#include <cstdint>
#include <exception>
#include <optional>
#include <string>
#include <string_view>
#include <thread>

namespace hmdc
{
    enum class Scheme
    {
        ssd_dc,
        alamouti_dc,
        nodiv_dc
    };

    enum class CsiMode
    {
        estimated, // least-squares from the pilot segments
        perfect    // large-array equivalent channel (ideal/aligned modes only)
    };

    inline std::string_view to_string(Scheme s)
    {
        switch (s)
        {
        case Scheme::ssd_dc:
            return "ssd_dc";
        case Scheme::alamouti_dc:
            return "alamouti_dc";
        case Scheme::nodiv_dc:
            return "nodiv_dc";
        }
        return "?";
    }

    inline std::string_view to_string(CsiMode c)
    {
        return c == CsiMode::estimated ? "estimated" : "perfect";
    }

    struct TrialPolicy
    {
        std::uint64_t max_trials = 2'000'000; // frames per SNR point
        std::uint64_t target_errors = 200;    // symbol errors per SNR point
    };

    inline constexpr std::uint64_t trial_batch = 256;

    struct SimConfig
    {
        std::vector<Scheme> schemes{Scheme::ssd_dc, Scheme::alamouti_dc, Scheme::nodiv_dc};
        std::size_t num_antennas = 64; // M
        double spacing = 0.45;         // d
        std::size_t num_beams = 8;     // Q
        std::size_t num_blocks = 2;    // K
        std::size_t block_data = 64;   // J
        std::size_t pilot_length = 16; // N_p
        std::size_t num_paths = 128;   // P, continuum mode
        PropagationMode mode = PropagationMode::aligned;
        AodDensity aod_density = AodDensity::uniform_angle;
        double carrier_hz = 5.5e9;
        double speed_mps = 100.0;
        double symbol_rate_hz = 1e6;
        std::vector<double> snr_db{0, 5, 10, 15, 20, 25, 30};
        TrialPolicy policy{};
        std::uint64_t seed = 1;
        CsiMode csi = CsiMode::estimated;
        std::vector<double> weights; // real taper, empty = all ones

        ArrayGeometry geometry() const { return {num_antennas, spacing}; }
        DopplerParams doppler() const { return {carrier_hz, speed_mps, 1.0 / symbol_rate_hz}; }

        cvec antenna_weights() const
        {
            if (weights.empty())
                return uniform_weights(num_antennas);
            return cvec(weights.begin(), weights.end());
        }

        // Data symbols carried by one frame (identical across schemes)
        std::size_t data_symbols() const { return num_blocks * block_data; }

        void validate() const
        {
            if (schemes.empty())
                throw std::invalid_argument("scheme: at least one scheme is required");
            geometry().validate();
            doppler().validate();
            if (num_beams < 1)
                throw std::invalid_argument("q: number of beams must be >= 1");
            if (num_blocks < 1 || num_blocks > max_ssd_block)
                throw std::invalid_argument("k: must lie in [1, " + std::to_string(max_ssd_block) + "]");
            if (block_data < 1)
                throw std::invalid_argument("j: must be >= 1");
            if (pilot_length < 1)
                throw std::invalid_argument("np: must be >= 1");
            if (num_paths < 1)
                throw std::invalid_argument("paths: must be >= 1");
            if (snr_db.empty())
                throw std::invalid_argument("snr_db_list: must not be empty");
            for (double s : snr_db)
                if (!std::isfinite(s))
                    throw std::invalid_argument("snr_db_list: values must be finite");
            if (policy.max_trials < 1)
                throw std::invalid_argument("max_trials: must be >= 1");
            if (policy.target_errors < 1)
                throw std::invalid_argument("target_errors: must be >= 1");
            if (!weights.empty())
            {
                if (weights.size() != num_antennas)
                    throw std::invalid_argument("weights: length must equal m");
                double energy = 0.0;
                for (double w : weights)
                {
                    if (!std::isfinite(w))
                        throw std::invalid_argument("weights: values must be finite");
                    energy += w * w;
                }
                if (!(energy > 0.0))
                    throw std::invalid_argument("weights: must not be all zero");
            }
            if (csi == CsiMode::perfect && mode == PropagationMode::continuum)
                throw std::invalid_argument("csi: perfect CSI is undefined in continuum mode");
            for (auto s : schemes)
                if (s == Scheme::alamouti_dc)
                {
                    if (num_beams < 2)
                        throw std::invalid_argument("q: alamouti_dc needs at least 2 beams");
                    if (data_symbols() % 2 != 0)
                        throw std::invalid_argument("j: alamouti_dc needs an even number K*J of data symbols");
                }
        }
    };

    struct TrialOutcome
    {
        std::uint64_t errors = 0;
        std::uint64_t symbols = 0;

        friend bool operator==(const TrialOutcome &, const TrialOutcome &) = default;
    };

    // Everything about one (config, scheme) pair that does not change between
    // trials: beam directions, code tables, pilots and, for beam-aligned paths,
    // the path-to-beam coupling.
    class LinkSimulator
    {
    public:
        LinkSimulator(const SimConfig &config, Scheme scheme)
            : cfg_((config.validate(), config)), scheme_(scheme), geom_(config.geometry()), dp_(config.doppler()),
              directions_(select_directions(config.num_beams)), weights_(config.antenna_weights()),
              code_(ssd_rotation_matrix(config.num_blocks)), detector_(code_),
              pilot_(pilot_sequence(config.pilot_length))
        {
            // zeta, sum(w) and the coupling are independent of the phase schedule
            const BeamformerBank probe(geom_, directions_, weights_,
                                       {std::vector<double>(directions_.size(), 0.0)});
            reference_power_ = analytic_channel_power(probe, probe.num_beams());
            if (cfg_.mode != PropagationMode::continuum)
            {
                std::vector<Path> on_beam(directions_.size());
                for (std::size_t q = 0; q < on_beam.size(); ++q)
                    on_beam[q].aod = directions_[q];
                beam_coupling_ = coupling_table(on_beam, probe);
            }
            if (scheme_ == Scheme::alamouti_dc)
            {
                stream_map_ = alamouti_stream_map(directions_.size());
                const auto a = beamformer_assignment(directions_.size());
                odd_beams_ = to_zero_based(a.odd);
                even_beams_ = to_zero_based(a.even);
            }
        }

        const SimConfig &config() const { return cfg_; }
        Scheme scheme() const { return scheme_; }

        // Mean received symbol power E|h_eq|^2 E_s over all beams; the SNR reference
        double reference_power() const { return reference_power_; }

        TrialOutcome run_trial(double snr_db, std::uint64_t trial_index) const
        {
            Rng rng = trial_stream(cfg_.seed, trial_index);
            return scheme_ == Scheme::alamouti_dc ? alamouti_trial(snr_db, rng) : block_trial(snr_db, rng);
        }

    private:
        bitvec random_bits(std::size_t count, Rng &rng) const
        {
            bitvec bits(count);
            std::uint64_t word = 0;
            for (std::size_t i = 0; i < count; ++i)
            {
                if (i % 64 == 0)
                    word = rng();
                bits[i] = std::uint8_t(word & 1u);
                word >>= 1;
            }
            return bits;
        }

        BeamformerBank draw_bank(std::size_t rows, bool per_block, Rng &rng) const
        {
            return BeamformerBank(geom_, directions_, weights_,
                                  draw_phase_schedule(rows, directions_.size(), per_block, rng));
        }

        struct Channel
        {
            PathSet paths;
            CouplingTable local;
            const CouplingTable *coupling = nullptr;
        };

        Channel draw_channel(const BeamformerBank &bank, Rng &rng) const
        {
            Channel ch;
            ch.paths = draw_paths(cfg_.mode, rng, bank, cfg_.num_paths, cfg_.aod_density);
            if (cfg_.mode == PropagationMode::continuum)
            {
                ch.local = coupling_table(ch.paths, bank);
                ch.coupling = &ch.local;
            }
            else
                ch.coupling = &beam_coupling_;
            return ch;
        }

        // SSD-DC and No-Diversity-DC: K blocks of [pilot; J data]
        TrialOutcome block_trial(double snr_db, Rng &rng) const
        {
            const std::size_t k_blocks = cfg_.num_blocks;
            const std::size_t np = cfg_.pilot_length;
            const std::size_t j = cfg_.block_data;
            const bool ssd = scheme_ == Scheme::ssd_dc;

            const BeamformerBank bank = draw_bank(k_blocks, ssd, rng);
            const Channel ch = draw_channel(bank, rng);
            const bitvec bits = random_bits(2 * k_blocks * j, rng);
            const BlockFrame frame =
                ssd ? build_ssd_frame(bits, code_, j, pilot_) : build_nodiv_frame(bits, k_blocks, j, pilot_);

            std::vector<cvec> rx(k_blocks);
            cvec h(k_blocks);
            for (std::size_t k = 0; k < k_blocks; ++k)
            {
                const cvec clean =
                    propagate(ch.paths, bank, k, frame.blocks[k], dp_, k * frame.block_length(), ch.coupling);
                rx[k] = add_noise(clean, snr_db, reference_power_, rng).samples;
                h[k] = cfg_.csi == CsiMode::perfect
                           ? equivalent_channel_oracle(ch.paths, bank, k)
                           : ls_channel_estimate(std::span<const cplx>(rx[k].data(), np), pilot_);
            }

            TrialOutcome out{0, k_blocks * j};
            if (ssd)
            {
                cvec y(k_blocks);
                for (std::size_t i = 0; i < j; ++i)
                {
                    for (std::size_t k = 0; k < k_blocks; ++k)
                        y[k] = rx[k][np + i];
                    const auto d_hat = detector_.detect(y, h);
                    for (std::size_t k = 0; k < k_blocks; ++k)
                        out.errors += d_hat[k] != frame.truth[i * k_blocks + k] ? 1 : 0;
                }
                return out;
            }

            for (std::size_t k = 0; k < k_blocks; ++k)
            {
                if (h[k] == cplx{})
                {
                    out.errors += j;
                    continue;
                }
                const cvec z = nodiv_equalize(std::span<const cplx>(rx[k].data() + np, j), h[k]);
                for (std::size_t i = 0; i < j; ++i)
                    out.errors += qpsk_decide(z[i]) != frame.truth[i * k_blocks + k] ? 1 : 0;
            }
            return out;
        }

        // Alamouti-DC: odd beams carry stream 1, even beams stream 2, one phase
        // realization for the whole frame
        TrialOutcome alamouti_trial(double snr_db, Rng &rng) const
        {
            const std::size_t np = cfg_.pilot_length;
            const std::size_t n_data = cfg_.data_symbols();

            const BeamformerBank bank = draw_bank(1, false, rng);
            const Channel ch = draw_channel(bank, rng);
            const bitvec bits = random_bits(2 * n_data, rng);
            const AlamoutiFrame frame = build_alamouti_frame(bits, pilot_);

            const cvec streams[2] = {frame.stream1, frame.stream2};
            const cvec clean = propagate(ch.paths, bank, 0, streams, stream_map_, dp_, 0, ch.coupling);
            const cvec r = add_noise(clean, snr_db, reference_power_, rng).samples;

            cplx h1, h2;
            if (cfg_.csi == CsiMode::perfect)
            {
                h1 = equivalent_channel_oracle(ch.paths, bank, 0, odd_beams_);
                h2 = equivalent_channel_oracle(ch.paths, bank, 0, even_beams_);
            }
            else
            {
                h1 = ls_channel_estimate(std::span<const cplx>(r.data(), np), pilot_);
                h2 = ls_channel_estimate(std::span<const cplx>(r.data() + np, np), pilot_);
            }

            TrialOutcome out{0, n_data};
            if (std::norm(h1) + std::norm(h2) == 0.0)
            {
                out.errors = n_data;
                return out;
            }
            const std::size_t half = frame.half();
            const std::span<const cplx> ra(r.data() + frame.data_start(), half);
            const std::span<const cplx> rb(r.data() + frame.data_start() + half, half);
            const auto [x1, x2] = alamouti_combine(ra, rb, h1, h2);
            for (std::size_t i = 0; i < half; ++i)
            {
                out.errors += qpsk_decide(x1[i]) != frame.truth[i] ? 1 : 0;
                out.errors += qpsk_decide(x2[i]) != frame.truth[half + i] ? 1 : 0;
            }
            return out;
        }

        SimConfig cfg_;
        Scheme scheme_;
        ArrayGeometry geom_;
        DopplerParams dp_;
        std::vector<double> directions_;
        cvec weights_;
        SsdCode code_;
        SsdMlDetector detector_;
        PilotBlock pilot_;
        double reference_power_ = 1.0;
        CouplingTable beam_coupling_;
        std::vector<std::size_t> stream_map_;
        std::vector<std::size_t> odd_beams_;
        std::vector<std::size_t> even_beams_;
    };

    inline TrialOutcome run_trial(const SimConfig &config, Scheme scheme, double snr_db, std::uint64_t trial_index)
    {
        return LinkSimulator(config, scheme).run_trial(snr_db, trial_index);
    }

    struct SerPoint
    {
        std::string scheme;
        double snr_db = 0.0;
        std::uint64_t trials = 0;
        std::uint64_t symbols = 0;
        std::uint64_t errors = 0;
        double ser = 0.0;
        double ser_stderr = 0.0;
        bool target_met = false;

        // 95% normal-approximation confidence interval
        double ci_low() const { return std::max(0.0, ser - 1.96 * ser_stderr); }
        double ci_high() const { return std::min(1.0, ser + 1.96 * ser_stderr); }
    };

    struct DiversityFit
    {
        std::string scheme;
        double window_low_db = 15.0;
        double window_high_db = 25.0;
        std::optional<double> order; // empty: fit unavailable
    };

    struct SweepResult
    {
        std::vector<SerPoint> points; // grouped by scheme, ascending SNR within a scheme
        std::vector<DiversityFit> fits;

        std::vector<SerPoint> points_for(std::string_view scheme) const
        {
            std::vector<SerPoint> out;
            for (const auto &p : points)
                if (p.scheme == scheme)
                    out.push_back(p);
            return out;
        }

        const SerPoint *find(std::string_view scheme, double snr_db) const
        {
            for (const auto &p : points)
                if (p.scheme == scheme && p.snr_db == snr_db)
                    return &p;
            return nullptr;
        }
    };

    // Least-squares slope of log10(SER) against SNR in dB over [low, high],
    // reported as decades per 10 dB with the sign flipped so diversity is positive.
    inline double diversity_order_fit(std::span<const SerPoint> points, double window_low_db = 15.0,
                                      double window_high_db = 25.0)
    {
        std::vector<std::pair<double, double>> xy;
        for (const auto &p : points)
            if (p.snr_db >= window_low_db && p.snr_db <= window_high_db && p.ser > 0.0)
                xy.emplace_back(p.snr_db, std::log10(p.ser));
        if (xy.size() < 2)
            throw fit_unavailable("diversity_order_fit: fewer than two points with SER > 0 in the window");
        double mx = 0.0, my = 0.0;
        for (const auto &[x, y] : xy)
        {
            mx += x;
            my += y;
        }
        mx /= double(xy.size());
        my /= double(xy.size());
        double sxx = 0.0, sxy = 0.0;
        for (const auto &[x, y] : xy)
        {
            sxx += (x - mx) * (x - mx);
            sxy += (x - mx) * (y - my);
        }
        if (!(sxx > 0.0))
            throw fit_unavailable("diversity_order_fit: all points share one SNR");
        return -10.0 * sxy / sxx;
    }

    inline DiversityFit fit_scheme(const std::vector<SerPoint> &points, const std::string &scheme,
                                   double window_low_db = 15.0, double window_high_db = 25.0)
    {
        DiversityFit fit{scheme, window_low_db, window_high_db, std::nullopt};
        try
        {
            fit.order = diversity_order_fit(points, window_low_db, window_high_db);
        }
        catch (const fit_unavailable &)
        {
        }
        return fit;
    }

    struct RunOptions
    {
        unsigned threads = 0; // 0: hardware concurrency
        double fit_low_db = 15.0;
        double fit_high_db = 25.0;
        std::string label;    // SER point label, default: scheme name
    };

    namespace detail
    {
        inline unsigned resolve_threads(unsigned requested)
        {
            if (requested > 0)
                return requested;
            const unsigned hw = std::thread::hardware_concurrency();
            return hw == 0 ? 1u : hw;
        }
    }

    // Runs trials at one SNR until the error target is met or max_trials is reached
    inline SerPoint run_point(const LinkSimulator &sim, double snr_db, unsigned threads, std::string label = {})
    {
        const auto &policy = sim.config().policy;
        threads = detail::resolve_threads(threads);
        const std::uint64_t num_batches = (policy.max_trials + trial_batch - 1) / trial_batch;

        SerPoint pt;
        pt.scheme = label.empty() ? std::string(to_string(sim.scheme())) : std::move(label);
        pt.snr_db = snr_db;

        auto batch_range = [&](std::uint64_t b)
        {
            const std::uint64_t first = b * trial_batch;
            return std::pair{first, std::min(first + trial_batch, policy.max_trials)};
        };

        // Groups of up to `threads` batches run concurrently; the stopping rule is
        // then applied batch by batch in index order, discarding any overshoot.
        bool done = false;
        for (std::uint64_t group = 0; group < num_batches && !done; group += threads)
        {
            const std::uint64_t group_end = std::min<std::uint64_t>(group + threads, num_batches);
            std::vector<TrialOutcome> sums(group_end - group);
            std::vector<std::exception_ptr> failures(sums.size());
            auto work = [&](std::size_t slot)
            {
                try
                {
                    const auto [first, last] = batch_range(group + slot);
                    TrialOutcome acc;
                    for (std::uint64_t t = first; t < last; ++t)
                    {
                        const auto o = sim.run_trial(snr_db, t);
                        acc.errors += o.errors;
                        acc.symbols += o.symbols;
                    }
                    sums[slot] = acc;
                }
                catch (...)
                {
                    failures[slot] = std::current_exception();
                }
            };
            if (sums.size() == 1)
                work(0);
            else
            {
                std::vector<std::jthread> pool;
                pool.reserve(sums.size());
                for (std::size_t s = 0; s < sums.size(); ++s)
                    pool.emplace_back(work, s);
            }
            for (auto &f : failures)
                if (f)
                    std::rethrow_exception(f);

            for (std::size_t s = 0; s < sums.size(); ++s)
            {
                const auto [first, last] = batch_range(group + s);
                pt.trials += last - first;
                pt.errors += sums[s].errors;
                pt.symbols += sums[s].symbols;
                if (pt.errors >= policy.target_errors)
                {
                    done = true;
                    break;
                }
            }
        }

        pt.target_met = pt.errors >= policy.target_errors;
        pt.ser = pt.symbols > 0 ? double(pt.errors) / double(pt.symbols) : 0.0;
        pt.ser_stderr = pt.symbols > 0 ? std::sqrt(pt.ser * (1.0 - pt.ser) / double(pt.symbols)) : 0.0;
        return pt;
    }

    // Sweeps every configured scheme over the SNR grid
    inline SweepResult run_sweep(const SimConfig &config, const RunOptions &options = {})
    {
        config.validate();
        std::vector<double> grid = config.snr_db;
        std::sort(grid.begin(), grid.end());
        grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

        SweepResult result;
        for (auto scheme : config.schemes)
        {
            const LinkSimulator sim(config, scheme);
            const std::string label =
                options.label.empty() || config.schemes.size() > 1 ? std::string(to_string(scheme)) : options.label;
            std::vector<SerPoint> points;
            for (double snr : grid)
                points.push_back(run_point(sim, snr, options.threads, label));
            result.fits.push_back(fit_scheme(points, label, options.fit_low_db, options.fit_high_db));
            result.points.insert(result.points.end(), points.begin(), points.end());
        }
        return result;
    }

    inline void append(SweepResult &into, const SweepResult &from)
    {
        into.points.insert(into.points.end(), from.points.begin(), from.points.end());
        into.fits.insert(into.fits.end(), from.fits.begin(), from.fits.end());
    }
}
