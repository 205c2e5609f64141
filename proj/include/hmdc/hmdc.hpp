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

#include "hmdc/types.hpp"            // IWYU pragma: export
#include "hmdc/rng.hpp"              // IWYU pragma: export
#include "hmdc/array_domain.hpp"     // IWYU pragma: export
#include "hmdc/channel.hpp"          // IWYU pragma: export
#include "hmdc/diversity_coding.hpp" // IWYU pragma: export
#include "hmdc/receiver.hpp"         // IWYU pragma: export
#include "hmdc/sim_engine.hpp"       // IWYU pragma: export
#include "hmdc/config_io.hpp"        // IWYU pragma: export
