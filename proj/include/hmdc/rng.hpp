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

#include "hmdc/types.hpp"

#include <cmath>
#include <cstdint>
#include <random>

namespace hmdc
{
    using Rng = std::mt19937_64;

    // Independent generator for trial `index` under `master_seed`. Trials can be
    // evaluated in any order or on any thread and still draw the same numbers.
    inline Rng trial_stream(std::uint64_t master_seed, std::uint64_t index)
    {
        std::seed_seq seq{std::uint32_t(master_seed), std::uint32_t(master_seed >> 32),
                          std::uint32_t(index), std::uint32_t(index >> 32), std::uint32_t(0x68d1c3a5u)};
        return Rng(seq);
    }

    // Circularly-symmetric complex Gaussian CN(0, variance)
    template <typename Gen>
    cplx complex_normal(Gen &gen, double variance)
    {
        std::normal_distribution<double> n01(0.0, 1.0);
        const double s = std::sqrt(0.5 * variance);
        const double re = n01(gen);
        const double im = n01(gen);
        return {s * re, s * im};
    }
}
