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

#include <catch_amalgamated.hpp>

#include "hmdc/receiver.hpp"
#include "hmdc/rng.hpp"
#include "oracles.hpp"

using namespace hmdc;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

namespace
{
    void require_close(cplx a, cplx b, double tol = 1e-12)
    {
        INFO("got " << a << " expected " << b);
        REQUIRE(std::abs(a - b) < tol);
    }

    symbol_indices random_indices(std::size_t n, Rng &rng)
    {
        std::uniform_int_distribution<int> pick(0, 3);
        symbol_indices s(n);
        for (auto &v : s)
            v = std::uint8_t(pick(rng));
        return s;
    }
}

TEST_CASE("least-squares channel estimate", "[receiver]")
{
    const auto pilot = pilot_sequence(16);
    SECTION("noise-free recovers the channel")
    {
        const cplx h(0.3, -1.7);
        cvec r(16);
        for (std::size_t n = 0; n < 16; ++n)
            r[n] = h * pilot.symbols[n];
        require_close(ls_channel_estimate(r, pilot), h);
    }
    SECTION("single pilot")
    {
        const cvec p{cplx(1.0, 0.0)};
        const cvec r{cplx(2.0, 1.0)};
        require_close(ls_channel_estimate(r, p), {2.0, 1.0});
    }
    SECTION("error variance is sigma^2 / Np")
    {
        Rng rng(1);
        const double sigma2 = 0.4;
        const cplx h(1.0, 0.5);
        double acc = 0.0;
        const int trials = 40000;
        for (int t = 0; t < trials; ++t)
        {
            cvec r(16);
            for (std::size_t n = 0; n < 16; ++n)
                r[n] = h * pilot.symbols[n] + complex_normal(rng, sigma2);
            acc += std::norm(ls_channel_estimate(r, pilot) - h);
        }
        REQUIRE_THAT(acc / trials, WithinRel(sigma2 / 16.0, 0.05));
    }
    SECTION("errors")
    {
        REQUIRE_THROWS_AS(ls_channel_estimate(cvec(3), pilot), std::invalid_argument);
        REQUIRE_THROWS_AS(ls_channel_estimate(cvec(2), cvec(2, 0.0)), std::invalid_argument);
    }
}

TEST_CASE("ML detector worked examples", "[receiver]")
{
    const auto code = ssd_rotation_matrix(2);
    const SsdMlDetector det(code);
    REQUIRE(det.num_candidates() == 16);
    SECTION("noise-free codeword is recovered")
    {
        const symbol_indices truth{2, 1};
        const auto x = ssd_encode(code, symbols_from_indices(truth));
        const cvec h{cplx(0.7, 0.2), cplx(-1.1, 0.4)};
        const cvec y{h[0] * x[0], h[1] * x[1]};
        REQUIRE(det.detect(y, h) == truth);
        REQUIRE(ml_detect_ssd(y, h, code) == truth);
    }
    SECTION("one faded block still decodes both symbols")
    {
        const symbol_indices truth{3, 0};
        const auto x = ssd_encode(code, symbols_from_indices(truth));
        const cvec h{cplx(0.0, 0.0), cplx(1.0, 0.0)};
        const cvec y{cplx{}, x[1]};
        REQUIRE(det.detect(y, h) == truth);
    }
    SECTION("all channels zero: tie resolved to the first candidate")
    {
        const cvec y{cplx(1.0, 1.0), cplx(-1.0, 0.0)};
        const cvec h(2, cplx{});
        REQUIRE(det.detect_index(y, h) == 0);
        REQUIRE(det.detect(y, h) == symbol_indices{0, 0});
    }
    SECTION("candidate digits put d(1) first")
    {
        REQUIRE(det.candidate_digits(0) == symbol_indices{0, 0});
        REQUIRE(det.candidate_digits(1) == symbol_indices{0, 1});
        REQUIRE(det.candidate_digits(4) == symbol_indices{1, 0});
        REQUIRE(det.candidate_digits(15) == symbol_indices{3, 3});
    }
    SECTION("K = 1 reduces to a QPSK slicer")
    {
        const auto c1 = ssd_rotation_matrix(1);
        const cvec h{cplx(2.0, 0.0)};
        const cvec y{cplx(-0.3, 0.9)};
        REQUIRE(ml_detect_ssd(y, h, c1) == symbol_indices{2});
    }
    SECTION("length mismatch")
    {
        REQUIRE_THROWS_AS(det.detect(cvec(3), cvec(2)), std::invalid_argument);
    }
}

TEST_CASE("ML detector agrees with exhaustive enumeration", "[receiver][oracle]")
{
    Rng rng(7);
    std::uniform_real_distribution<double> snr(-5.0, 20.0);
    for (std::size_t k : {2u, 3u, 4u})
    {
        const auto code = ssd_rotation_matrix(k);
        const SsdMlDetector det(code);
        const auto theta = oracle::ssd_theta(k);
        const auto alphabet = oracle::qpsk_points();
        for (int t = 0; t < 300; ++t)
        {
            const auto truth = random_indices(k, rng);
            const auto x = ssd_encode(code, symbols_from_indices(truth));
            const double s2 = std::pow(10.0, -snr(rng) / 10.0);
            cvec h(k), y(k);
            for (std::size_t i = 0; i < k; ++i)
            {
                h[i] = complex_normal(rng, 1.0);
                y[i] = h[i] * x[i] + complex_normal(rng, s2);
            }
            REQUIRE(det.detect(y, h) == oracle::ml_enumerate(y, h, theta, alphabet));
        }
    }
}

TEST_CASE("Alamouti combining", "[receiver]")
{
    SECTION("noise-free halves decode exactly")
    {
        Rng rng(8);
        for (int t = 0; t < 100; ++t)
        {
            const cplx h1 = complex_normal(rng, 1.0), h2 = complex_normal(rng, 1.0);
            const auto idx = random_indices(8, rng);
            const auto d = symbols_from_indices(idx);
            cvec ra(4), rb(4);
            for (std::size_t i = 0; i < 4; ++i)
            {
                const auto g = alamouti_code_matrix(d[i], d[4 + i]);
                ra[i] = h1 * g[0][0] + h2 * g[0][1];
                rb[i] = h1 * g[1][0] + h2 * g[1][1];
            }
            const auto [x1, x2] = alamouti_combine(ra, rb, h1, h2);
            for (std::size_t i = 0; i < 4; ++i)
            {
                require_close(x1[i], d[i], 1e-10);
                require_close(x2[i], d[4 + i], 1e-10);
            }
        }
    }
    SECTION("one zero stream channel degrades to single-branch")
    {
        const cplx h1(0.0, 0.0), h2(0.5, -0.5);
        const cplx a(1.0, 1.0), b(-1.0, 1.0);
        const auto g = alamouti_code_matrix(a, b);
        const cvec ra{h2 * g[0][1]}, rb{h2 * g[1][1]};
        const auto [x1, x2] = alamouti_combine(ra, rb, h1, h2);
        require_close(x1[0], a);
        require_close(x2[0], b);
    }
    SECTION("post-combining noise variance is sigma^2 / (|h1|^2 + |h2|^2)")
    {
        Rng rng(9);
        const cplx h1(0.8, 0.3), h2(-0.2, 1.1);
        const double s2 = 0.5, g = std::norm(h1) + std::norm(h2);
        const std::size_t n = 100000;
        cvec ra(n), rb(n);
        for (std::size_t i = 0; i < n; ++i)
        {
            ra[i] = complex_normal(rng, s2);
            rb[i] = complex_normal(rng, s2);
        }
        const auto [x1, x2] = alamouti_combine(ra, rb, h1, h2);
        double p1 = 0.0, p2 = 0.0;
        for (std::size_t i = 0; i < n; ++i)
        {
            p1 += std::norm(x1[i]);
            p2 += std::norm(x2[i]);
        }
        REQUIRE_THAT(p1 / double(n), WithinRel(s2 / g, 0.03));
        REQUIRE_THAT(p2 / double(n), WithinRel(s2 / g, 0.03));
    }
    SECTION("both channels zero")
    {
        REQUIRE_THROWS_AS(alamouti_combine(cvec(2), cvec(2), 0.0, 0.0), detection_infeasible);
        REQUIRE_THROWS_AS(alamouti_combine(cvec(2), cvec(3), 1.0, 0.0), std::invalid_argument);
    }
}

TEST_CASE("single-tap equalizer", "[receiver]")
{
    const cvec r{cplx(2.0, 2.0), cplx(0.0, -4.0)};
    const auto z = nodiv_equalize(r, cplx(2.0, 0.0));
    require_close(z[0], {1.0, 1.0});
    require_close(z[1], {0.0, -2.0});
    REQUIRE_THROWS_AS(nodiv_equalize(r, cplx{}), detection_infeasible);
}

TEST_CASE("symbol error counting", "[receiver]")
{
    const symbol_indices a{0, 1, 2, 3}, b{0, 2, 2, 0};
    const auto c = count_symbol_errors(a, b);
    REQUIRE(c.errors == 2);
    REQUIRE(c.total == 4);
    REQUIRE(count_symbol_errors(a, a).errors == 0);
    REQUIRE_THROWS_AS(count_symbol_errors(a, symbol_indices{0}), std::invalid_argument);
}
