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

// End-to-end acceptance checks. One PASS/FAIL line per criterion; exit status
// is nonzero if any criterion fails. Set HMDC_ACCEPT_THREADS to run trials on
// more than one thread (results are identical either way).

#include "hmdc/hmdc.hpp"
#include "oracles.hpp"

#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>

using namespace hmdc;

namespace
{
    struct Verdict
    {
        bool pass = false;
        std::string detail;
    };

    int failures = 0;

    void run(int id, const char *name, const std::function<Verdict()> &check)
    {
        const auto t0 = std::chrono::steady_clock::now();
        Verdict v;
        try
        {
            v = check();
        }
        catch (const std::exception &e)
        {
            v = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        if (!v.pass)
            ++failures;
        std::printf("%s criterion %d (%s): %s [%.1f s]\n", v.pass ? "PASS" : "FAIL", id, name, v.detail.c_str(), secs);
        std::fflush(stdout);
    }

    unsigned threads()
    {
        const char *env = std::getenv("HMDC_ACCEPT_THREADS");
        return env ? unsigned(std::strtoul(env, nullptr, 10)) : 1u;
    }

    std::string sci(double v)
    {
        return format_scientific(v);
    }

    std::string fixed(double v, int digits = 2)
    {
        char buf[32];
        std::snprintf(buf, sizeof(buf), "%.*f", digits, v);
        return buf;
    }

    // 1: ideal propagation, no noise, every scheme error-free
    Verdict noise_free()
    {
        SimConfig cfg;
        cfg.mode = PropagationMode::ideal;
        cfg.seed = 2026;
        std::uint64_t errors = 0, symbols = 0;
        for (auto scheme : {Scheme::ssd_dc, Scheme::alamouti_dc, Scheme::nodiv_dc})
        {
            const LinkSimulator sim(cfg, scheme);
            for (std::uint64_t t = 0; t < 100; ++t)
            {
                const auto o = sim.run_trial(std::numeric_limits<double>::infinity(), t);
                errors += o.errors;
                symbols += o.symbols;
            }
        }
        return {errors == 0, std::to_string(errors) + " errors in " + std::to_string(symbols) + " symbols"};
    }

    // 2: unitarity and nonzero codeword-difference entries
    Verdict code_properties()
    {
        const auto pts = qpsk().points;
        std::vector<cplx> diffs;
        for (const auto &a : pts)
            for (const auto &b : pts)
                diffs.push_back(a - b);
        double worst_unitary = 0.0, min_entry = std::numeric_limits<double>::infinity();
        for (std::size_t k : {1u, 2u, 4u})
        {
            const auto code = ssd_rotation_matrix(k);
            for (std::size_t r = 0; r < k; ++r)
                for (std::size_t c = 0; c < k; ++c)
                {
                    cplx g{};
                    for (std::size_t i = 0; i < k; ++i)
                        g += std::conj(code(i, r)) * code(i, c);
                    worst_unitary = std::max(worst_unitary, std::abs(g - (r == c ? 1.0 : 0.0)));
                }
            std::size_t total = 1;
            for (std::size_t i = 0; i < k; ++i)
                total *= diffs.size();
            cvec e(k);
            for (std::size_t n = 0; n < total; ++n)
            {
                std::size_t rem = n;
                bool nonzero = false;
                for (std::size_t i = 0; i < k; ++i)
                {
                    e[i] = diffs[rem % diffs.size()];
                    rem /= diffs.size();
                    nonzero = nonzero || e[i] != cplx{};
                }
                if (!nonzero)
                    continue;
                for (const auto &v : ssd_encode(code, e))
                    min_entry = std::min(min_entry, std::abs(v));
            }
        }
        return {worst_unitary < 1e-12 && min_entry > 1e-9,
                "max |Theta^H Theta - I| = " + sci(worst_unitary) + ", min |Theta e| entry = " + sci(min_entry)};
    }

    // 3: fast ML versus plain enumeration
    Verdict ml_equivalence()
    {
        Rng rng(303);
        std::uniform_int_distribution<int> pick(0, 3);
        std::uniform_real_distribution<double> snr(0.0, 25.0);
        std::size_t agree = 0, total = 0;
        for (std::size_t k : {2u, 4u})
        {
            const auto code = ssd_rotation_matrix(k);
            const SsdMlDetector det(code);
            const auto theta = oracle::ssd_theta(k);
            const auto alphabet = oracle::qpsk_points();
            for (int t = 0; t < 1000; ++t)
            {
                symbol_indices truth(k);
                for (auto &v : truth)
                    v = std::uint8_t(pick(rng));
                const auto x = ssd_encode(code, symbols_from_indices(truth));
                const double s2 = std::pow(10.0, -snr(rng) / 10.0);
                cvec h(k), y(k);
                for (std::size_t i = 0; i < k; ++i)
                {
                    h[i] = complex_normal(rng, 1.0);
                    y[i] = h[i] * x[i] + complex_normal(rng, s2);
                }
                agree += det.detect(y, h) == oracle::ml_enumerate(y, h, theta, alphabet) ? 1 : 0;
                ++total;
            }
        }
        return {agree == total, std::to_string(agree) + "/" + std::to_string(total) + " agree"};
    }

    // 4: cross-block correlation of the equivalent channel, and its stability within a block
    Verdict block_independence()
    {
        const SimConfig cfg;
        const DopplerParams dp = cfg.doppler();
        const std::size_t len = cfg.pilot_length + cfg.block_data;
        const auto dirs = select_directions(cfg.num_beams);
        const cvec w = uniform_weights(cfg.num_antennas);
        Rng rng(404);
        cplx cross{}, auto_c{};
        double p0 = 0.0, p1 = 0.0, pa = 0.0, pb = 0.0;
        const cvec ones(len, 1.0);
        CouplingTable coupling;
        for (int t = 0; t < 10000; ++t)
        {
            const BeamformerBank bank(cfg.geometry(), dirs, w, draw_phase_schedule(2, dirs.size(), true, rng));
            const auto paths = draw_paths(PropagationMode::aligned, rng, bank, cfg.num_paths);
            if (t == 0)
                coupling = coupling_table(paths, bank);
            const auto g0 = propagate(paths, bank, 0, ones, dp, 0, &coupling);
            const auto g1 = propagate(paths, bank, 1, ones, dp, len, &coupling);
            cross += g0[0] * std::conj(g1[0]);
            p0 += std::norm(g0[0]);
            p1 += std::norm(g1[0]);
            auto_c += g0[0] * std::conj(g0[len - 1]);
            pa += std::norm(g0[0]);
            pb += std::norm(g0[len - 1]);
        }
        const double rho_cross = std::abs(cross) / std::sqrt(p0 * p1);
        const double rho_auto = std::abs(auto_c) / std::sqrt(pa * pb);
        return {rho_cross < 0.05 && rho_auto > 0.95,
                "cross-block " + fixed(rho_cross, 3) + " (< 0.05), same-block " + fixed(rho_auto, 3) + " (> 0.95)"};
    }

    SimConfig slope_config()
    {
        SimConfig cfg;
        cfg.mode = PropagationMode::aligned;
        cfg.snr_db = {0, 5, 10, 15, 20, 25, 30};
        cfg.policy = {2'000'000, 200};
        cfg.seed = 505;
        return cfg;
    }

    struct SlopeRuns
    {
        SweepResult k2;
        SweepResult k4;
        bool done = false;
    };

    SlopeRuns &slope_runs()
    {
        static SlopeRuns runs;
        if (!runs.done)
        {
            RunOptions opt;
            opt.threads = threads();
            SimConfig cfg = slope_config();
            runs.k2 = run_sweep(cfg, opt);
            cfg.num_blocks = 4;
            cfg.schemes = {Scheme::ssd_dc};
            opt.label = "ssd_dc_k4";
            runs.k4 = run_sweep(cfg, opt);
            runs.done = true;
            std::cout << emit_report(runs.k2) << emit_report(runs.k4);
        }
        return runs;
    }

    std::optional<double> order_of(const SweepResult &r, const std::string &scheme)
    {
        for (const auto &f : r.fits)
            if (f.scheme == scheme)
                return f.order;
        return std::nullopt;
    }

    // 5: fitted diversity orders over 15-25 dB
    Verdict slopes()
    {
        const auto &runs = slope_runs();
        const auto nodiv = order_of(runs.k2, "nodiv_dc");
        const auto ala = order_of(runs.k2, "alamouti_dc");
        const auto ssd2 = order_of(runs.k2, "ssd_dc");
        const auto ssd4 = order_of(runs.k4, "ssd_dc_k4");
        auto show = [](std::optional<double> v) { return v ? fixed(*v) : std::string("n/a"); };
        const bool pass = nodiv && ala && ssd2 && ssd4 && *nodiv >= 0.7 && *nodiv <= 1.3 && *ala >= 1.5 &&
                          *ala <= 2.5 && *ssd2 >= 1.5 && *ssd2 <= 2.5 && *ssd4 > *ssd2;
        return {pass, "nodiv " + show(nodiv) + " [0.7,1.3], alamouti " + show(ala) + " [1.5,2.5], ssd K=2 " +
                          show(ssd2) + " [1.5,2.5], ssd K=4 " + show(ssd4) + " (> K=2)"};
    }

    // 6: ordering at 25 dB
    Verdict ordering()
    {
        const auto &runs = slope_runs();
        const SerPoint *ssd = runs.k2.find("ssd_dc", 25.0);
        const SerPoint *ala = runs.k2.find("alamouti_dc", 25.0);
        const SerPoint *nod = runs.k2.find("nodiv_dc", 25.0);
        if (!ssd || !ala || !nod)
            return {false, "25 dB point missing"};
        const bool order = ssd->ser <= ala->ser && ala->ser <= nod->ser;
        const bool disjoint = ssd->ci_high() < nod->ci_low() && ala->ci_high() < nod->ci_low();
        auto ci = [](const SerPoint *p) { return "[" + sci(p->ci_low()) + ", " + sci(p->ci_high()) + "]"; };
        return {order && disjoint, "ssd " + sci(ssd->ser) + " " + ci(ssd) + ", alamouti " + sci(ala->ser) + " " +
                                       ci(ala) + ", nodiv " + sci(nod->ser) + " " + ci(nod) +
                                       (order ? "; order holds" : "; order violated") +
                                       (disjoint ? ", diversity CIs disjoint from nodiv" : ", CIs overlap")};
    }

    // 7: RMS Doppler spread of single-stream transmission, M = 16 against M = 64
    Verdict doppler_scaling()
    {
        // the symbol-rate channel sampled every 16 symbols: 8192 samples cover 131 ms
        DopplerParams dp;
        dp.symbol_interval_s = 16e-6;
        const std::size_t samples = 8192, q = 8, paths = 128;
        const cvec ones(samples, 1.0);
        auto mean_spread = [&](std::size_t m)
        {
            Rng rng(707 + m);
            const auto dirs = select_directions(q);
            double acc = 0.0;
            for (int r = 0; r < 50; ++r)
            {
                const BeamformerBank bank({m, 0.45}, dirs, uniform_weights(m), draw_phase_schedule(1, q, false, rng));
                const auto ps = draw_paths(PropagationMode::continuum, rng, bank, paths);
                acc += doppler_spread_estimate(propagate(ps, bank, 0, ones, dp), dp.symbol_interval_s);
            }
            return acc / 50.0;
        };
        const double s16 = mean_spread(16), s64 = mean_spread(64);
        const double ratio = s16 / s64;
        return {ratio >= 1.4 && ratio <= 2.6, "spread M=16 " + fixed(s16) + " Hz, M=64 " + fixed(s64) +
                                                  " Hz, ratio " + fixed(ratio) + " [1.4, 2.6]"};
    }

    // 8: identical CSV across repeated runs and thread counts
    Verdict determinism()
    {
        SimConfig cfg;
        cfg.snr_db = {0, 10, 20};
        cfg.policy = {4096, 300};
        cfg.seed = 808;
        RunOptions serial, parallel;
        serial.threads = 1;
        parallel.threads = 4;
        const std::string a = emit_csv(run_sweep(cfg, serial));
        const std::string b = emit_csv(run_sweep(cfg, serial));
        const std::string c = emit_csv(run_sweep(cfg, parallel));
        return {a == b && a == c, std::string(a == b ? "repeat identical" : "repeat differs") +
                                      (a == c ? ", 1 vs 4 threads identical" : ", 1 vs 4 threads differ")};
    }
}

int main()
{
    run(1, "noise-free exactness", noise_free);
    run(2, "SSD code properties", code_properties);
    run(3, "ML oracle equivalence", ml_equivalence);
    run(4, "block-channel independence", block_independence);
    run(5, "diversity-order slopes", slopes);
    run(6, "scheme ordering at 25 dB", ordering);
    run(7, "Doppler-spread scaling", doppler_scaling);
    run(8, "determinism", determinism);
    std::printf("%d of 8 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
