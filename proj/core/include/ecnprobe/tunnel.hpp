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
 * Executable models of tunnel encapsulation and decapsulation.
 *
 * Each decapsulator is a total 16-cell table indexed by (Inner, Outer) as the
 * two headers arrive at the egress. The standard lineages are built from the
 * rules of RFC 2003, RFC 3168 (full functionality), RFC 4301 and RFC 6040;
 * anything else is a "mangled" egress.
 */

#pragma once

#include "ecnprobe/ecn.hpp"

#include <array>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ecnprobe {

enum class DecapBehaviorClass : std::uint8_t {
    Rfc6040,
    Rfc4301,
    Rfc3168,
    Rfc2003Simple,
    Mangled,
};

/// The four lineages that have a reference signature, in report column order.
inline constexpr std::array<DecapBehaviorClass, 4> kStandardClasses = {
    DecapBehaviorClass::Rfc6040, DecapBehaviorClass::Rfc4301, DecapBehaviorClass::Rfc3168,
    DecapBehaviorClass::Rfc2003Simple};

/// RFC 6040, RFC 4301 and RFC 3168 egresses propagate ECN correctly.
constexpr bool propagates_correctly(DecapBehaviorClass c) noexcept {
    return c == DecapBehaviorClass::Rfc6040 || c == DecapBehaviorClass::Rfc4301 ||
           c == DecapBehaviorClass::Rfc3168;
}

/// Column labels: "RFC6040", "RFC4301", "RFC3168", "RFC2003", "mangled".
std::string_view to_string(DecapBehaviorClass c) noexcept;
/// Accepts the labels above case-insensitively, and "rfc2003simple".
std::optional<DecapBehaviorClass> parse_behavior_class(std::string_view text) noexcept;

/**
 * Result of egress processing: the Onward codepoint, or a drop.
 *
 * Outcomes are totally ordered as Dropped < Not-ECT < ECT(1) < ECT(0) < CE;
 * vote aggregation uses this order to break ties.
 */
class DecapOutcome {
public:
    /// Dropped.
    constexpr DecapOutcome() noexcept = default;

    static constexpr DecapOutcome forwarded(EcnCodepoint cp) noexcept {
        return DecapOutcome(static_cast<std::uint8_t>(kRankOf[codepoint_to_bits(cp)]));
    }
    static constexpr DecapOutcome dropped() noexcept { return DecapOutcome(0); }

    /// Inverse of rank(); `rank` must be below kOutcomeCount.
    static constexpr DecapOutcome from_rank(std::size_t rank) noexcept {
        return DecapOutcome(static_cast<std::uint8_t>(rank));
    }

    constexpr bool is_dropped() const noexcept { return rank_ == 0; }
    constexpr bool is_forwarded() const noexcept { return rank_ != 0; }

    /// Onward codepoint. Only meaningful when is_forwarded().
    constexpr EcnCodepoint codepoint() const noexcept { return kCodepointOf[rank_]; }

    /// Position in the tie-break order, 0 (Dropped) .. 4 (CE).
    constexpr std::size_t rank() const noexcept { return rank_; }

    friend constexpr auto operator<=>(DecapOutcome, DecapOutcome) noexcept = default;

private:
    constexpr explicit DecapOutcome(std::uint8_t rank) noexcept : rank_(rank) {}

    // wire bits -> rank: Not-ECT=1, ECT(1)=2, ECT(0)=3, CE=4
    static constexpr std::array<std::uint8_t, 4> kRankOf = {1, 2, 3, 4};
    static constexpr std::array<EcnCodepoint, 5> kCodepointOf = {
        EcnCodepoint::NotEct, EcnCodepoint::NotEct, EcnCodepoint::Ect1, EcnCodepoint::Ect0,
        EcnCodepoint::Ce};

    std::uint8_t rank_ = 0;
};

inline constexpr std::size_t kOutcomeCount = 5;

/// "dropped" or the codepoint name.
std::string_view to_string(DecapOutcome o) noexcept;
/// Accepts "dropped"/"drop" or any codepoint name.
std::optional<DecapOutcome> parse_outcome(std::string_view text) noexcept;

/// Total decap map, indexed by cell_index(inner, outer).
using DecapTable = std::array<DecapOutcome, 16>;

constexpr std::size_t cell_index(EcnCodepoint inner, EcnCodepoint outer) noexcept {
    return static_cast<std::size_t>(codepoint_to_bits(inner)) * 4 + codepoint_to_bits(outer);
}

/// Raised when an egress description cannot be turned into a policy.
class PolicyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/**
 * An egress decapsulation behaviour.
 *
 * Immutable once built. Standard lineages carry their RFC table; mangled
 * policies carry an arbitrary table plus a descriptive name.
 */
class DecapPolicy {
public:
    /// Throws PolicyError for DecapBehaviorClass::Mangled.
    static DecapPolicy standard(DecapBehaviorClass c);

    /// Mangled egress that bleaches every forwarded packet to Not-ECT.
    static DecapPolicy zero_all();
    /// Mangled egress that forwards the outer codepoint as the Onward one.
    static DecapPolicy copy_outer();
    /// Mangled egress with a table drawn uniformly from the five outcomes.
    static DecapPolicy random_fixed(std::uint64_t seed);
    /// Arbitrary user-supplied table; always classed as Mangled.
    static DecapPolicy custom(const DecapTable& table);

    DecapBehaviorClass behavior_class() const noexcept { return class_; }
    const std::string& name() const noexcept { return name_; }
    const DecapTable& table() const noexcept { return table_; }

    DecapOutcome decap(EcnCodepoint inner, EcnCodepoint outer) const noexcept {
        return table_[cell_index(inner, outer)];
    }

private:
    DecapPolicy(DecapBehaviorClass c, std::string name, const DecapTable& table)
        : class_(c), name_(std::move(name)), table_(table) {}

    DecapBehaviorClass class_;
    std::string name_;
    DecapTable table_;
};

inline DecapOutcome decap(const DecapPolicy& policy, EcnCodepoint inner, EcnCodepoint outer) noexcept {
    return policy.decap(inner, outer);
}

/// Full 16-cell black-box view of an egress.
inline const DecapTable& behavior_profile(const DecapPolicy& policy) noexcept {
    return policy.table();
}

/// "inner,outer -> outcome" rows separated by "; ", in wire order.
std::string format_decap_table(const DecapTable& table);
/// Inverse of format_decap_table. Rows may be separated by ';' or newlines and
/// must cover each of the 16 (inner, outer) pairs exactly once.
DecapTable parse_decap_table(std::string_view text);

enum class EncapMode : std::uint8_t {
    CopyExact,   ///< outer := initial
    ZeroOuter,   ///< outer := Not-ECT
    Rfc3168Full, ///< outer := initial, except CE is encapsulated as ECT(0)
};

std::string_view to_string(EncapMode m) noexcept;

struct EncapPolicy {
    EncapMode mode = EncapMode::CopyExact;
};

/// Encapsulate a packet whose header arrived at the ingress with `initial`.
/// The inner header is never altered.
HeaderStack encap(EncapPolicy policy, TrafficClassOctet initial) noexcept;
HeaderStack encap(EncapPolicy policy, EcnCodepoint initial) noexcept;

enum class ProbeCapability : std::uint8_t {
    Full,   ///< the outer ECN field can be set to any value
    CeOnly, ///< the outer can only be set to CE
};

std::string_view to_string(ProbeCapability c) noexcept;

/// One main-test probe: the Initial codepoint and the value the outer is set to.
struct ProbeRow {
    EcnCodepoint initial;
    EcnCodepoint outer;
};

/// Main-test probes in report row order. The last row needs a non-CE outer and
/// is skipped under ProbeCapability::CeOnly.
inline constexpr std::array<ProbeRow, 4> kProbeRows = {{
    {EcnCodepoint::NotEct, EcnCodepoint::Ce},
    {EcnCodepoint::Ect1, EcnCodepoint::Ce},
    {EcnCodepoint::Ect0, EcnCodepoint::Ce},
    {EcnCodepoint::Ect0, EcnCodepoint::Ect1},
}};

constexpr std::size_t probe_row_count(ProbeCapability c) noexcept {
    return c == ProbeCapability::Full ? 4 : 3;
}

/// Outcomes of the probe rows, in kProbeRows order.
using ProbeSignature = std::vector<DecapOutcome>;

class NoSignature : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

/// Expected main-test outcomes for a standard lineage. Throws NoSignature for
/// DecapBehaviorClass::Mangled, which has no single signature.
ProbeSignature reference_signature(DecapBehaviorClass c, ProbeCapability capability);

} // namespace ecnprobe
