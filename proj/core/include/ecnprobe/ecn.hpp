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
 * ECN codepoints, the traffic-class octet that carries them, and the masked
 * overwrite used to rewrite the ECN bits of a header in flight.
 *
 * IPv4 TOS and IPv6 Traffic Class share the same layout (DSCP in the upper
 * six bits, ECN in the lower two), so a single octet type covers both.
 */

#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>

namespace ecnprobe {

/// The four values of the 2-bit ECN field. Enumerator values are the wire bits.
enum class EcnCodepoint : std::uint8_t {
    NotEct = 0b00,
    Ect1 = 0b01,
    Ect0 = 0b10,
    Ce = 0b11,
};

/// All codepoints in wire order (Not-ECT, ECT(1), ECT(0), CE).
inline constexpr std::array<EcnCodepoint, 4> kAllCodepoints = {
    EcnCodepoint::NotEct, EcnCodepoint::Ect1, EcnCodepoint::Ect0, EcnCodepoint::Ce};

/// Only the low two bits of `bits` are significant.
constexpr EcnCodepoint codepoint_from_bits(std::uint8_t bits) noexcept {
    return static_cast<EcnCodepoint>(bits & 0b11);
}

constexpr std::uint8_t codepoint_to_bits(EcnCodepoint cp) noexcept {
    return static_cast<std::uint8_t>(cp);
}

constexpr bool is_ect(EcnCodepoint cp) noexcept {
    return cp == EcnCodepoint::Ect0 || cp == EcnCodepoint::Ect1;
}

/// Conventional names: "Not-ECT", "ECT(1)", "ECT(0)", "CE".
std::string_view to_string(EcnCodepoint cp) noexcept;

/// Accepts the conventional names case-insensitively, plus the compact forms
/// "notect", "not_ect", "ect1", "ect0".
std::optional<EcnCodepoint> parse_codepoint(std::string_view text) noexcept;

/// Mask selecting the ECN bits of a traffic-class octet.
inline constexpr std::uint8_t kEcnMask = 0x03;

/// An IPv4 TOS / IPv6 Traffic Class octet: bits 7..2 DSCP, bits 1..0 ECN.
class TrafficClassOctet {
public:
    constexpr TrafficClassOctet() noexcept = default;
    constexpr explicit TrafficClassOctet(std::uint8_t raw) noexcept : raw_(raw) {}

    static constexpr TrafficClassOctet from_parts(std::uint8_t dscp, EcnCodepoint ecn) noexcept {
        return TrafficClassOctet(static_cast<std::uint8_t>(((dscp & 0x3F) << 2) | codepoint_to_bits(ecn)));
    }

    constexpr std::uint8_t raw() const noexcept { return raw_; }
    constexpr std::uint8_t dscp() const noexcept { return static_cast<std::uint8_t>(raw_ >> 2); }
    constexpr EcnCodepoint ecn() const noexcept { return codepoint_from_bits(raw_ & kEcnMask); }

    constexpr TrafficClassOctet with_ecn(EcnCodepoint cp) const noexcept {
        return TrafficClassOctet(static_cast<std::uint8_t>((raw_ & ~kEcnMask) | codepoint_to_bits(cp)));
    }

    friend constexpr bool operator==(TrafficClassOctet, TrafficClassOctet) noexcept = default;

private:
    std::uint8_t raw_ = 0;
};

/**
 * Masked rewrite of a traffic-class octet, the same operation as
 * `tc ... action pedit ex munge ip dsfield set N retain MASK`.
 *
 * Bits selected by `retain_mask` are taken from `new_bits`; all other bits of
 * the octet are kept. With the default mask of 0x3 this replaces the ECN
 * field and leaves the DSCP untouched.
 */
constexpr TrafficClassOctet overwrite_ecn(TrafficClassOctet octet, std::uint8_t new_bits,
                                          std::uint8_t retain_mask = kEcnMask) noexcept {
    return TrafficClassOctet(
        static_cast<std::uint8_t>((octet.raw() & ~retain_mask) | (new_bits & retain_mask)));
}

/// Position of a header on the client-to-server path, relative to the tunnel.
enum class PathLocation : std::uint8_t {
    Initial, ///< arriving at the tunnel ingress
    Inner,   ///< encapsulated between ingress and egress
    Outer,   ///< encapsulating header between ingress and egress
    Onward,  ///< leaving the tunnel egress
};

inline constexpr std::array<PathLocation, 4> kAllLocations = {
    PathLocation::Initial, PathLocation::Inner, PathLocation::Outer, PathLocation::Onward};

std::string_view to_string(PathLocation loc) noexcept;
std::optional<PathLocation> parse_location(std::string_view text) noexcept;

/// Headers of a packet at one point in a trace. `outer` is only present while
/// the packet is inside the tunnel.
struct HeaderStack {
    TrafficClassOctet inner;
    std::optional<TrafficClassOctet> outer;

    bool encapsulated() const noexcept { return outer.has_value(); }

    friend bool operator==(const HeaderStack&, const HeaderStack&) = default;
};

} // namespace ecnprobe
