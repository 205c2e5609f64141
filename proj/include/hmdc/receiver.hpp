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

// Base-station receiver: one least-squares scalar estimate per pilot segment,
// then scheme-specific detection.

#include "hmdc/diversity_coding.hpp"

#include <limits>
#include <span>
#include <utility>

namespace hmdc
{
    // h = (p^H r) / (p^H p)
    inline cplx ls_channel_estimate(std::span<const cplx> received_pilot, std::span<const cplx> pilot)
    {
        if (received_pilot.size() != pilot.size())
            throw std::invalid_argument("ls_channel_estimate: pilot and observation lengths differ");
        cplx num{};
        double energy = 0.0;
        for (std::size_t n = 0; n < pilot.size(); ++n)
        {
            num += std::conj(pilot[n]) * received_pilot[n];
            energy += std::norm(pilot[n]);
        }
        if (!(energy > 0.0))
            throw std::invalid_argument("ls_channel_estimate: pilot has zero energy");
        return num / energy;
    }

    inline cplx ls_channel_estimate(std::span<const cplx> received_pilot, const PilotBlock &pilot)
    {
        return ls_channel_estimate(received_pilot, std::span<const cplx>(pilot.symbols));
    }

    // Exhaustive joint ML detection of one SSD codeword observed through K
    // independent scalar channels:
    //
    //     argmin_d || y - diag(h) Theta d ||^2   over all |C|^K candidates.
    //
    // Candidate c enumerates d in base |C| with d(1) as the most significant digit;
    // the first (lowest) index wins ties. Theta d is tabulated once per detector.
    class SsdMlDetector
    {
    public:
        SsdMlDetector(const SsdCode &code, const Constellation &constellation = qpsk())
            : k_(code.block_size), alphabet_(constellation.size())
        {
            num_candidates_ = 1;
            for (std::size_t i = 0; i < k_; ++i)
                num_candidates_ *= alphabet_;
            codewords_.resize(num_candidates_ * k_);
            cvec d(k_);
            for (std::size_t c = 0; c < num_candidates_; ++c)
            {
                std::size_t rem = c;
                for (std::size_t i = k_; i-- > 0;)
                {
                    d[i] = constellation.points[rem % alphabet_];
                    rem /= alphabet_;
                }
                const cvec x = ssd_encode(code, d);
                std::copy(x.begin(), x.end(), codewords_.begin() + std::ptrdiff_t(c * k_));
            }
        }

        std::size_t block_size() const { return k_; }
        std::size_t num_candidates() const { return num_candidates_; }

        // Returns the winning candidate index
        std::size_t detect_index(std::span<const cplx> y, std::span<const cplx> h) const
        {
            if (y.size() != k_ || h.size() != k_)
                throw std::invalid_argument("SsdMlDetector: observation and channel must have length K");
            std::size_t best = 0;
            double best_metric = std::numeric_limits<double>::infinity();
            for (std::size_t c = 0; c < num_candidates_; ++c)
            {
                const cplx *x = codewords_.data() + c * k_;
                double metric = 0.0;
                for (std::size_t k = 0; k < k_ && metric < best_metric; ++k)
                    metric += std::norm(y[k] - h[k] * x[k]);
                if (metric < best_metric)
                {
                    best_metric = metric;
                    best = c;
                }
            }
            return best;
        }

        symbol_indices detect(std::span<const cplx> y, std::span<const cplx> h) const
        {
            return candidate_digits(detect_index(y, h));
        }

        symbol_indices candidate_digits(std::size_t c) const
        {
            symbol_indices d(k_);
            for (std::size_t i = k_; i-- > 0;)
            {
                d[i] = std::uint8_t(c % alphabet_);
                c /= alphabet_;
            }
            return d;
        }

    private:
        std::size_t k_;
        std::size_t alphabet_;
        std::size_t num_candidates_ = 0;
        cvec codewords_; // candidate-major, Theta d for each candidate
    };

    inline symbol_indices ml_detect_ssd(std::span<const cplx> y, std::span<const cplx> h, const SsdCode &code,
                                        const Constellation &constellation = qpsk())
    {
        return SsdMlDetector(code, constellation).detect(y, h);
    }

    // Alamouti combining over the two data halves:
    //   x1 = (h1* ra + h2 rb*) / (|h1|^2 + |h2|^2)
    //   x2 = (h2* ra - h1 rb*) / (|h1|^2 + |h2|^2)
    inline std::pair<cvec, cvec> alamouti_combine(std::span<const cplx> r_a, std::span<const cplx> r_b, cplx h1, cplx h2)
    {
        if (r_a.size() != r_b.size())
            throw std::invalid_argument("alamouti_combine: the two halves must have equal length");
        const double g = std::norm(h1) + std::norm(h2);
        if (!(g > 0.0))
            throw detection_infeasible("alamouti_combine: both stream channels are zero");
        std::pair<cvec, cvec> out{cvec(r_a.size()), cvec(r_a.size())};
        for (std::size_t i = 0; i < r_a.size(); ++i)
        {
            const cplx rb = std::conj(r_b[i]);
            out.first[i] = (std::conj(h1) * r_a[i] + h2 * rb) / g;
            out.second[i] = (std::conj(h2) * r_a[i] - h1 * rb) / g;
        }
        return out;
    }

    // One-tap equalizer
    inline cvec nodiv_equalize(std::span<const cplx> r_data, cplx h)
    {
        if (h == cplx{})
            throw detection_infeasible("nodiv_equalize: channel estimate is zero");
        cvec out(r_data.size());
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = r_data[i] / h;
        return out;
    }

    struct SymbolErrorCount
    {
        std::size_t errors = 0;
        std::size_t total = 0;
    };

    template <typename T>
    SymbolErrorCount count_symbol_errors(std::span<const T> detected, std::span<const T> truth)
    {
        if (detected.size() != truth.size())
            throw std::invalid_argument("count_symbol_errors: length mismatch");
        SymbolErrorCount c{0, truth.size()};
        for (std::size_t i = 0; i < truth.size(); ++i)
            c.errors += detected[i] != truth[i] ? 1 : 0;
        return c;
    }

    inline SymbolErrorCount count_symbol_errors(const symbol_indices &detected, const symbol_indices &truth)
    {
        return count_symbol_errors<std::uint8_t>(detected, truth);
    }

    struct DetectionResult
    {
        symbol_indices symbols;
        bitvec bits;
        SymbolErrorCount count;
    };
}
