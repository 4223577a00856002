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
 * Deterministic in-process model of a tunnelled path:
 *
 *   client -> ingress encap -> tester's outer rewrite -> noisy segment
 *          -> egress decap under test -> server -> feedback to client
 *
 * All randomness comes from one seeded SimRng, so a Scenario and a sequence
 * of exchanges fully determine every trace.
 */

#pragma once

#include "ecnprobe/ecn.hpp"
#include "ecnprobe/feedback.hpp"
#include "ecnprobe/tunnel.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <vector>

namespace ecnprobe {

/**
 * Seedable, splittable generator used by the simulator.
 *
 * The engine is std::mt19937_64, whose output sequence is fixed by the C++
 * standard. Doubles are built from the top 53 bits of one draw rather than
 * through std::uniform_real_distribution, whose algorithm is left to the
 * library, so streams are identical across platforms and toolchains.
 * split() seeds a child generator from one draw of the parent.
 */
class SimRng {
public:
    explicit SimRng(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next() { return engine_(); }
    /// Uniform in [0, 1).
    double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }
    SimRng split() { return SimRng(engine_()); }

private:
    std::mt19937_64 engine_;
};

enum class FeedbackTransport : std::uint8_t {
    Tcp,  ///< AccECN SYN-ACK handshake encoding
    Quic, ///< ACK_ECN count deltas
};

std::string_view to_string(FeedbackTransport t) noexcept;

struct PacketMeta {
    std::size_t flow_id = 0; ///< one flow per server
    PathLocation location = PathLocation::Outer;
};

/// The tester's post-encapsulation rewrite of the outer ECN field, as a
/// `tc ... pedit ... ip dsfield set N retain MASK` filter.
struct ManglerRule {
    std::optional<std::size_t> match_flow; ///< nullopt matches every flow
    std::uint8_t set_bits = 0;
    std::uint8_t retain_mask = kEcnMask;

    /// Only the outer header is ever rewritten.
    bool matches(const PacketMeta& meta) const noexcept {
        return meta.location == PathLocation::Outer && (!match_flow || *match_flow == meta.flow_id);
    }
};

inline TrafficClassOctet apply_mangler(const ManglerRule& rule, TrafficClassOctet outer) noexcept {
    return overwrite_ecn(outer, rule.set_bits, rule.retain_mask);
}

/// Codepoint substitutions applied by a buggy server before it reports feedback.
using FeedbackCorruption = std::map<EcnCodepoint, EcnCodepoint>;

struct Scenario {
    EncapPolicy ingress;
    DecapPolicy egress = DecapPolicy::standard(DecapBehaviorClass::Rfc6040);
    /// Filter template for outer overrides; the bits come from each exchange.
    std::optional<ManglerRule> mangler;
    double aqm_ce_probability = 0.0;
    double loss_probability = 0.0;
    std::uint64_t seed = 1;
    std::size_t servers = 3;
    std::map<std::size_t, FeedbackCorruption> server_bugs;
    FeedbackTransport transport = FeedbackTransport::Tcp;
};

struct TraceRecord {
    std::uint64_t exchange = 0;
    std::size_t server = 0;
    PathLocation location = PathLocation::Initial;
    TrafficClassOctet octet;

    friend bool operator==(const TraceRecord&, const TraceRecord&) = default;
};

/**
 * Outcome of one client-to-server exchange.
 *
 * The trace holds Initial, Inner and the Outer as emitted by the ingress. A
 * second Outer record appears when the outer was rewritten or CE-marked before
 * reaching the egress. Onward is present only when the egress forwarded the
 * packet and it was not lost.
 */
struct ExchangeResult {
    std::uint64_t exchange = 0;
    std::size_t server_id = 0;
    std::optional<EcnCodepoint> feedback; ///< nullopt: dropped or lost
    std::optional<TcpEcnFlags> syn_ack;   ///< set on the TCP transport only
    std::vector<TraceRecord> trace;

    /// First Outer record, i.e. the outer as the ingress emitted it.
    std::optional<TrafficClassOctet> emitted_outer() const;
    /// Last Outer record, i.e. the outer as it reached the egress.
    std::optional<TrafficClassOctet> arriving_outer() const;
    std::optional<TrafficClassOctet> at(PathLocation loc) const;

    friend bool operator==(const ExchangeResult&, const ExchangeResult&) = default;
};

/// One line per record, `<exchange#> <server#> <location> <octet-hex> <codepoint>`,
/// then `<exchange#> FEEDBACK <codepoint|ABSENT>`.
std::string format_trace(const ExchangeResult& result);

/**
 * Runs exchanges over one Scenario. Single-threaded; independent Simulators
 * share no state.
 */
class Simulator {
public:
    explicit Simulator(Scenario scenario);

    /// Throws std::out_of_range if `server_id` is not below scenario().servers.
    ExchangeResult run_exchange(EcnCodepoint initial, std::optional<EcnCodepoint> outer_override,
                                std::size_t server_id);

    const Scenario& scenario() const noexcept { return scenario_; }
    std::uint64_t exchanges_run() const noexcept { return next_exchange_; }

private:
    std::optional<EcnCodepoint> server_feedback(std::size_t server_id, EcnCodepoint onward,
                                                ExchangeResult& result);

    Scenario scenario_;
    SimRng path_rng_;
    std::uint64_t next_exchange_ = 0;
    std::vector<QuicEcnCounts> quic_counts_;
};

} // namespace ecnprobe
