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

#include "ecnprobe/feedback.hpp"

namespace ecnprobe {

TcpEcnFlags encode_handshake(EcnCodepoint received) noexcept {
    switch (received) {
    case EcnCodepoint::NotEct:
        return TcpEcnFlags::from_bits(0b010);
    case EcnCodepoint::Ect1:
        return TcpEcnFlags::from_bits(0b011);
    case EcnCodepoint::Ect0:
        return TcpEcnFlags::from_bits(0b100);
    case EcnCodepoint::Ce:
        return TcpEcnFlags::from_bits(0b110);
    }
    return {};
}

EcnCodepoint decode_handshake(TcpEcnFlags flags) {
    switch (flags.bits()) {
    case 0b010:
        return EcnCodepoint::NotEct;
    case 0b011:
        return EcnCodepoint::Ect1;
    case 0b100:
        return EcnCodepoint::Ect0;
    case 0b110:
        return EcnCodepoint::Ce;
    default:
        throw InvalidFeedback("SYN-ACK flags " + wireshark_string(flags) +
                              " are not a valid AccECN handshake encoding");
    }
}

std::string wireshark_string(TcpEcnFlags flags) {
    std::string s(3, '.');
    if (flags.ae) {
        s[0] = 'A';
    }
    if (flags.cwr) {
        s[1] = 'C';
    }
    if (flags.ece) {
        s[2] = 'E';
    }
    return s;
}

EcnByteCounters record_bytes(EcnByteCounters counters, EcnCodepoint cp, std::uint64_t payload_bytes) {
    switch (cp) {
    case EcnCodepoint::Ect0:
        counters.ect0 += payload_bytes;
        break;
    case EcnCodepoint::Ect1:
        counters.ect1 += payload_bytes;
        break;
    case EcnCodepoint::Ce:
        counters.ce += payload_bytes;
        break;
    case EcnCodepoint::NotEct:
        throw NotCounted("AccECN keeps no byte counter for Not-ECT");
    }
    return counters;
}

QuicEcnCounts record_packet(QuicEcnCounts counts, EcnCodepoint cp) noexcept {
    switch (cp) {
    case EcnCodepoint::Ect0:
        ++counts.ect0_packets;
        break;
    case EcnCodepoint::Ect1:
        ++counts.ect1_packets;
        break;
    case EcnCodepoint::Ce:
        ++counts.ce_packets;
        break;
    case EcnCodepoint::NotEct:
        break;
    }
    return counts;
}

} // namespace ecnprobe
