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

#include <complex>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

namespace hmdc
{
    using cplx = std::complex<double>;
    using cvec = std::vector<cplx>;

    inline constexpr double pi = std::numbers::pi;
    inline constexpr double speed_of_light = 299792458.0; // m/s
    inline constexpr cplx j1{0.0, 1.0};

    // Thrown when a receiver cannot form a decision (all channel gains zero)
    class detection_infeasible : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // Thrown when an operation is requested for a propagation mode that cannot support it
    class unsupported_mode : public std::logic_error
    {
    public:
        using std::logic_error::logic_error;
    };

    // Thrown by the diversity-order fit when the window holds fewer than two usable points
    class fit_unavailable : public std::runtime_error
    {
    public:
        using std::runtime_error::runtime_error;
    };

    // exp(j * phase)
    inline cplx unit_phasor(double phase)
    {
        return {std::cos(phase), std::sin(phase)};
    }
}
