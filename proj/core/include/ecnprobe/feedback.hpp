/*
 *     Copyright 2026 The ecnprobe Authors
 *
 *   Licensed under the Apache License, Version 2.0 (the "License");
 *   you may not use this file except in compliance with the License.
 *   You may obtain a copy of the License at
 *
 *       http://www.apache.org/licenses/LICENSE-2.0
 *
 *   Unless required by applicable law or agreed to in writing, software
 *   distributed under the License is distributed on an "AS IS" BASIS,
 *   WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 *   See the License for the specific language governing permissions and
 *   limitations under the License.
 */

/*
 * Server-side ECN feedback as a tester sees it.
 *
 *  - AccECN SYN-ACK handshake encoding: the IP-ECN codepoint of the SYN is
 *    reflected in the AE, CWR and ECE flags of the SYN-ACK.
 *  - AccECN byte counters (counter arithmetic only, no option wire format).
 *  - QUIC ACK_ECN packet counts.
 */

#pragma once

#include "ecnprobe/ecn.hpp"

#include <cstdint>
#include <stdexcept>
#include <string>

namespace ecnprobe {

/// The three TCP ECN flags, written here as a 3-bit value ordered AE, CWR, ECE.
struct TcpEcnFlags {
    bool ae = false;
    bool cwr = false;
    bool ece = false;

    static constexpr TcpEcnFlags from_bits(std::uint8_t bits) noexcept {
        return TcpEcnFlags{(bits & 0b100) != 0, (bits & 0b010) != 0, (bits & 0b001) != 0};
    }
    constexpr std::uint8_t bits() const noexcept {
        return static_cast<std::uint8_t>((ae ? 0b100 : 0) | (cwr ? 0b010 : 0) | (ece ? 0b001 : 0));
    }

    friend constexpr bool operator==(TcpEcnFlags, TcpEcnFlags) noexcept = default;
};

class InvalidFeedback : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Not-ECT -> 0b010, ECT(1) -> 0b011, ECT(0) -> 0b100, CE -> 0b110.
TcpEcnFlags encode_handshake(EcnCodepoint received) noexcept;

/// Throws InvalidFeedback for the four patterns encode_handshake never emits.
EcnCodepoint decode_handshake(TcpEcnFlags flags);

/// Wireshark's rendering: 'A', 'C', 'E' for set flags, '.' otherwise.
std::string wireshark_string(TcpEcnFlags flags);

class NotCounted : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// AccECN received-byte counters. Each starts at 1, not zero.
struct EcnByteCounters {
    std::uint64_t ect0 = 1;
    std::uint64_t ect1 = 1;
    std::uint64_t ce = 1;

    friend bool operator==(const EcnByteCounters&, const EcnByteCounters&) = default;
};

/// Adds `payload_bytes` to the counter for `cp`. Not-ECT bytes have no
/// counter, so NotCounted is thrown for them.
EcnByteCounters record_bytes(EcnByteCounters counters, EcnCodepoint cp, std::uint64_t payload_bytes);

/// QUIC ACK_ECN counts. All start at zero; Not-ECT packets are not counted.
struct QuicEcnCounts {
    std::uint64_t ect0_packets = 0;
    std::uint64_t ect1_packets = 0;
    std::uint64_t ce_packets = 0;

    friend bool operator==(const QuicEcnCounts&, const QuicEcnCounts&) = default;
};

QuicEcnCounts record_packet(QuicEcnCounts counts, EcnCodepoint cp) noexcept;

} // namespace ecnprobe
