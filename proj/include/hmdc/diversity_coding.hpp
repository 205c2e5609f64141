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

// Symbol mapping and the three transmit frame layouts:
//
//  - SSD:    data d = [d(1); ...; d(J)] with d(i) of length K, x(i) = Theta d(i),
//            block k carries [pilot; x_k(1) ... x_k(J)]
//  - No-Div: same block layout, block k carries [pilot; d_k(1) ... d_k(J)]
//  - Alamouti: two streams over N data symbols d = [x1; x2]
//              s1 = [p; 0; x1; -conj(x2)],  s2 = [0; p; x2; conj(x1)]
//
// QPSK labeling (bit pair b0 b1 -> symbol index 2*b0 + b1):
//   00 -> ( 1 + j)/sqrt(2)   01 -> ( 1 - j)/sqrt(2)
//   10 -> (-1 + j)/sqrt(2)   11 -> (-1 - j)/sqrt(2)
// b0 selects the sign of the real part and b1 the sign of the imaginary part,
// so neighbouring points differ in one bit (Gray).

#include "hmdc/types.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <string>
#include <utility>

namespace hmdc
{
    using bitvec = std::vector<std::uint8_t>;
    using symbol_indices = std::vector<std::uint8_t>;

    struct Constellation
    {
        cvec points;
        unsigned bits_per_symbol = 0;

        std::size_t size() const { return points.size(); }
    };

    inline const Constellation &qpsk()
    {
        static const Constellation c = []
        {
            const double a = 1.0 / std::sqrt(2.0);
            return Constellation{{{a, a}, {a, -a}, {-a, a}, {-a, -a}}, 2};
        }();
        return c;
    }

    inline symbol_indices qpsk_indices(std::span<const std::uint8_t> bits)
    {
        if (bits.size() % 2 != 0)
            throw std::invalid_argument("qpsk_map: bit count must be even");
        symbol_indices idx(bits.size() / 2);
        for (std::size_t i = 0; i < idx.size(); ++i)
            idx[i] = std::uint8_t(2 * (bits[2 * i] & 1u) + (bits[2 * i + 1] & 1u));
        return idx;
    }

    inline cvec symbols_from_indices(std::span<const std::uint8_t> idx, const Constellation &c = qpsk())
    {
        cvec out(idx.size());
        for (std::size_t i = 0; i < idx.size(); ++i)
            out[i] = c.points.at(idx[i]);
        return out;
    }

    inline cvec qpsk_map(std::span<const std::uint8_t> bits)
    {
        return symbols_from_indices(qpsk_indices(bits));
    }

    // Nearest QPSK point index: quadrant decision (zero counts as positive)
    inline std::uint8_t qpsk_decide(cplx soft)
    {
        return std::uint8_t(2 * (soft.real() < 0.0) + (soft.imag() < 0.0));
    }

    struct SliceResult
    {
        bitvec bits;
        symbol_indices indices;
        cvec symbols;
    };

    inline SliceResult qpsk_slice(std::span<const cplx> soft)
    {
        SliceResult out;
        out.indices.resize(soft.size());
        out.bits.resize(2 * soft.size());
        out.symbols.resize(soft.size());
        for (std::size_t i = 0; i < soft.size(); ++i)
        {
            const auto idx = qpsk_decide(soft[i]);
            out.indices[i] = idx;
            out.bits[2 * i] = std::uint8_t(idx >> 1);
            out.bits[2 * i + 1] = std::uint8_t(idx & 1u);
            out.symbols[i] = qpsk().points[idx];
        }
        return out;
    }

    inline constexpr std::size_t max_ssd_block = 6;

    // Signal-space-diversity rotation: Theta is the leading K x K block of
    // F^H diag(1, e^{j pi/(2K~)}, ..., e^{j pi (K~-1)/(2K~)}) with K~ = 2^ceil(log2 K)
    // and F the unitary K~-point DFT matrix.
    struct SsdCode
    {
        std::size_t block_size = 1;   // K
        std::size_t padded_size = 1;  // K~
        cvec theta;                   // row-major K x K

        cplx operator()(std::size_t r, std::size_t c) const { return theta[r * block_size + c]; }
    };

    inline SsdCode ssd_rotation_matrix(std::size_t block_size)
    {
        if (block_size < 1 || block_size > max_ssd_block)
            throw std::invalid_argument("ssd_rotation_matrix: K must lie in [1, " + std::to_string(max_ssd_block) + "]");
        SsdCode code;
        code.block_size = block_size;
        code.padded_size = 1;
        while (code.padded_size < block_size)
            code.padded_size *= 2;
        const double kt = double(code.padded_size);
        code.theta.resize(block_size * block_size);
        for (std::size_t r = 0; r < block_size; ++r)
            for (std::size_t c = 0; c < block_size; ++c)
            {
                // exponents reduced mod K~ so that e.g. r*c = K~/2 lands exactly on -1
                const auto rc = (r * c) % code.padded_size;
                const cplx dft = rc == 0 ? cplx(1.0, 0.0) : unit_phasor(2.0 * pi * double(rc) / kt);
                const cplx diag = c == 0 ? cplx(1.0, 0.0) : unit_phasor(pi * double(c) / (2.0 * kt));
                code.theta[r * block_size + c] = dft * diag / std::sqrt(kt);
            }
        return code;
    }

    inline cvec ssd_encode(const SsdCode &code, std::span<const cplx> block)
    {
        if (block.size() != code.block_size)
            throw std::invalid_argument("ssd_encode: block length must equal K");
        cvec x(code.block_size, cplx{});
        for (std::size_t r = 0; r < code.block_size; ++r)
            for (std::size_t c = 0; c < code.block_size; ++c)
                x[r] += code(r, c) * block[c];
        return x;
    }

    struct PilotBlock
    {
        cvec symbols;

        std::size_t size() const { return symbols.size(); }
    };

    // Root-1 Zadoff-Chu sequence: exp(-j pi n (n+1) / Np) for odd Np and
    // exp(-j pi n^2 / Np) for even Np
    inline PilotBlock pilot_sequence(std::size_t length)
    {
        if (length < 1)
            throw std::invalid_argument("pilot_sequence: length must be >= 1");
        PilotBlock p;
        p.symbols.resize(length);
        const bool odd = length % 2 == 1;
        for (std::size_t n = 0; n < length; ++n)
        {
            // n(n+1) and n^2 reduced mod 2 Np keep the phase argument small
            const std::size_t e = (odd ? n * (n + 1) : n * n) % (2 * length);
            p.symbols[n] = e == 0 ? cplx(1.0, 0.0) : unit_phasor(-pi * double(e) / double(length));
        }
        return p;
    }

    // K blocks, each [pilot; J data]. Shared by SSD-DC and No-Diversity-DC.
    struct BlockFrame
    {
        std::size_t num_blocks = 0;  // K
        std::size_t block_data = 0;  // J
        PilotBlock pilot;
        std::vector<cvec> blocks;    // s_k, length Np + J
        cvec data;                   // d, length K J, natural order
        symbol_indices truth;        // constellation index of every d(n)

        std::size_t block_length() const { return pilot.size() + block_data; }
        std::size_t frame_length() const { return num_blocks * block_length(); }

        // entry i of block k's data segment
        cplx data_at(std::size_t k, std::size_t i) const { return blocks[k][pilot.size() + i]; }
    };
    using SsdFrame = BlockFrame;

    namespace detail
    {
        inline BlockFrame assemble_blocks(std::span<const std::uint8_t> bits, std::size_t num_blocks,
                                          std::size_t block_data, const PilotBlock &pilot, const SsdCode *code)
        {
            if (num_blocks < 1 || block_data < 1)
                throw std::invalid_argument("frame: K and J must be >= 1");
            if (bits.size() != 2 * num_blocks * block_data)
                throw std::invalid_argument("frame: bit count must equal 2 K J (got " + std::to_string(bits.size()) + ")");
            if (pilot.size() < 1)
                throw std::invalid_argument("frame: empty pilot block");
            if (code != nullptr && code->block_size != num_blocks)
                throw std::invalid_argument("frame: code size differs from K");

            BlockFrame f;
            f.num_blocks = num_blocks;
            f.block_data = block_data;
            f.pilot = pilot;
            f.truth = qpsk_indices(bits);
            f.data = symbols_from_indices(f.truth);
            f.blocks.assign(num_blocks, cvec(pilot.size() + block_data));
            for (auto &b : f.blocks)
                std::copy(pilot.symbols.begin(), pilot.symbols.end(), b.begin());

            for (std::size_t i = 0; i < block_data; ++i)
            {
                const std::span<const cplx> d_i(f.data.data() + i * num_blocks, num_blocks);
                const cvec x_i = code != nullptr ? ssd_encode(*code, d_i) : cvec(d_i.begin(), d_i.end());
                for (std::size_t k = 0; k < num_blocks; ++k)
                    f.blocks[k][pilot.size() + i] = x_i[k];
            }
            return f;
        }
    }

    inline SsdFrame build_ssd_frame(std::span<const std::uint8_t> bits, const SsdCode &code, std::size_t block_data,
                                    const PilotBlock &pilot)
    {
        return detail::assemble_blocks(bits, code.block_size, block_data, pilot, &code);
    }

    inline SsdFrame build_ssd_frame(std::span<const std::uint8_t> bits, std::size_t num_blocks, std::size_t block_data,
                                    const PilotBlock &pilot)
    {
        const SsdCode code = ssd_rotation_matrix(num_blocks);
        return build_ssd_frame(bits, code, block_data, pilot);
    }

    inline BlockFrame build_nodiv_frame(std::span<const std::uint8_t> bits, std::size_t num_blocks,
                                        std::size_t block_data, const PilotBlock &pilot)
    {
        return detail::assemble_blocks(bits, num_blocks, block_data, pilot, nullptr);
    }

    // Per-symbol-pair Alamouti code matrix: rows are time slots, columns streams.
    //   [ a    b  ]
    //   [ -b*  a* ]
    // A higher-order orthogonal design would replace this matrix (and the segment
    // layout in build_alamouti_frame) with its own columns per stream.
    inline std::array<std::array<cplx, 2>, 2> alamouti_code_matrix(cplx a, cplx b)
    {
        return {{{a, b}, {-std::conj(b), std::conj(a)}}};
    }

    struct AlamoutiFrame
    {
        PilotBlock pilot;
        cvec stream1;         // [p; 0; x1; -conj(x2)]
        cvec stream2;         // [0; p; x2; conj(x1)]
        cvec data;            // d = [x1; x2]
        symbol_indices truth;

        std::size_t half() const { return data.size() / 2; }
        std::size_t data_start() const { return 2 * pilot.size(); }
        std::size_t frame_length() const { return stream1.size(); }
    };

    // Guard length equals the pilot length: each pilot goes out while the other
    // stream is silent.
    inline AlamoutiFrame build_alamouti_frame(std::span<const std::uint8_t> bits, const PilotBlock &pilot)
    {
        if (bits.size() % 2 != 0)
            throw std::invalid_argument("build_alamouti_frame: bit count must be even");
        const std::size_t n = bits.size() / 2;
        if (n == 0 || n % 2 != 0)
            throw std::invalid_argument("build_alamouti_frame: data symbol count N must be even and positive");
        if (pilot.size() < 1)
            throw std::invalid_argument("build_alamouti_frame: empty pilot block");

        AlamoutiFrame f;
        f.pilot = pilot;
        f.truth = qpsk_indices(bits);
        f.data = symbols_from_indices(f.truth);
        const std::size_t np = pilot.size();
        const std::size_t h = n / 2;
        f.stream1.assign(2 * np + n, cplx{});
        f.stream2.assign(2 * np + n, cplx{});
        for (std::size_t i = 0; i < np; ++i)
        {
            f.stream1[i] = pilot.symbols[i];
            f.stream2[np + i] = pilot.symbols[i];
        }
        for (std::size_t i = 0; i < h; ++i)
        {
            const cplx x1 = f.data[i];
            const cplx x2 = f.data[h + i];
            const auto g = alamouti_code_matrix(x1, x2);
            f.stream1[2 * np + i] = g[0][0];
            f.stream2[2 * np + i] = g[0][1];
            f.stream1[2 * np + h + i] = g[1][0];
            f.stream2[2 * np + h + i] = g[1][1];
        }
        return f;
    }

    // 1-based beam indices: odd beams carry stream 1, even beams stream 2
    struct BeamAssignment
    {
        std::vector<std::size_t> odd;
        std::vector<std::size_t> even;
    };

    inline BeamAssignment beamformer_assignment(std::size_t num_beams)
    {
        if (num_beams < 2)
            throw std::invalid_argument("beamformer_assignment: Alamouti needs Q >= 2 beams");
        BeamAssignment a;
        for (std::size_t q = 1; q <= num_beams; ++q)
            (q % 2 == 1 ? a.odd : a.even).push_back(q);
        return a;
    }

    // 0-based stream index per 0-based beam, as consumed by propagate()
    inline std::vector<std::size_t> alamouti_stream_map(std::size_t num_beams)
    {
        const auto a = beamformer_assignment(num_beams);
        std::vector<std::size_t> map(num_beams);
        for (auto q : a.odd)
            map[q - 1] = 0;
        for (auto q : a.even)
            map[q - 1] = 1;
        return map;
    }

    inline std::vector<std::size_t> to_zero_based(std::span<const std::size_t> one_based)
    {
        std::vector<std::size_t> out(one_based.size());
        for (std::size_t i = 0; i < out.size(); ++i)
            out[i] = one_based[i] - 1;
        return out;
    }
}
