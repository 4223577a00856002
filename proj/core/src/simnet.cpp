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

#include "ecnprobe/simnet.hpp"

#include <cstdio>
#include <stdexcept>

namespace ecnprobe {

std::string_view to_string(FeedbackTransport t) noexcept {
    return t == FeedbackTransport::Tcp ? "tcp" : "quic";
}

std::optional<TrafficClassOctet> ExchangeResult::emitted_outer() const {
    return at(PathLocation::Outer);
}

std::optional<TrafficClassOctet> ExchangeResult::arriving_outer() const {
    for (auto it = trace.rbegin(); it != trace.rend(); ++it) {
        if (it->location == PathLocation::Outer) {
            return it->octet;
        }
    }
    return std::nullopt;
}

std::optional<TrafficClassOctet> ExchangeResult::at(PathLocation loc) const {
    for (const auto& r : trace) {
        if (r.location == loc) {
            return r.octet;
        }
    }
    return std::nullopt;
}

std::string format_trace(const ExchangeResult& result) {
    std::string out;
    char buf[96];
    for (const auto& r : result.trace) {
        std::snprintf(buf, sizeof buf, "%llu %zu %s 0x%02x %s\n",
                      static_cast<unsigned long long>(r.exchange), r.server,
                      std::string(to_string(r.location)).c_str(), r.octet.raw(),
                      std::string(to_string(r.octet.ecn())).c_str());
        out += buf;
    }
    std::snprintf(buf, sizeof buf, "%llu FEEDBACK %s\n",
                  static_cast<unsigned long long>(result.exchange),
                  result.feedback ? std::string(to_string(*result.feedback)).c_str() : "ABSENT");
    out += buf;
    return out;
}

Simulator::Simulator(Scenario scenario)
    : scenario_(std::move(scenario)),
      path_rng_(SimRng(scenario_.seed).split()),
      quic_counts_(scenario_.servers) {
    if (scenario_.servers == 0) {
        throw std::invalid_argument("scenario needs at least one server");
    }
}

ExchangeResult Simulator::run_exchange(EcnCodepoint initial, std::optional<EcnCodepoint> outer_override,
                                       std::size_t server_id) {
    if (server_id >= scenario_.servers) {
        throw std::out_of_range("server " + std::to_string(server_id) + " not in scenario with " +
                                std::to_string(scenario_.servers) + " servers");
    }

    ExchangeResult result;
    result.exchange = next_exchange_++;
    result.server_id = server_id;
    auto record = [&](PathLocation loc, TrafficClassOctet octet) {
        result.trace.push_back(TraceRecord{result.exchange, server_id, loc, octet});
    };

    const auto initial_octet = TrafficClassOctet::from_parts(0, initial);
    record(PathLocation::Initial, initial_octet);

    const HeaderStack stack = encap(scenario_.ingress, initial_octet);
    record(PathLocation::Inner, stack.inner);
    record(PathLocation::Outer, *stack.outer);

    TrafficClassOctet outer = *stack.outer;
    if (outer_override) {
        ManglerRule rule = scenario_.mangler.value_or(ManglerRule{});
        rule.set_bits = codepoint_to_bits(*outer_override);
        if (rule.matches(PacketMeta{server_id, PathLocation::Outer})) {
            outer = apply_mangler(rule, outer);
        }
    }

    // Both draws are taken on every exchange so the stream position depends
    // only on the number of exchanges.
    const double aqm_draw = path_rng_.uniform();
    const double loss_draw = path_rng_.uniform();

    // A conforming AQM only marks ECN-capable packets.
    if (is_ect(outer.ecn()) && aqm_draw < scenario_.aqm_ce_probability) {
        outer = outer.with_ecn(EcnCodepoint::Ce);
    }
    if (outer != *stack.outer) {
        record(PathLocation::Outer, outer);
    }

    if (loss_draw < scenario_.loss_probability) {
        return result;
    }

    const DecapOutcome outcome = scenario_.egress.decap(stack.inner.ecn(), outer.ecn());
    if (outcome.is_dropped()) {
        return result;
    }
    const TrafficClassOctet onward = stack.inner.with_ecn(outcome.codepoint());
    record(PathLocation::Onward, onward);

    result.feedback = server_feedback(server_id, onward.ecn(), result);
    return result;
}

std::optional<EcnCodepoint> Simulator::server_feedback(std::size_t server_id, EcnCodepoint onward,
                                                       ExchangeResult& result) {
    EcnCodepoint reported = onward;
    if (auto bug = scenario_.server_bugs.find(server_id); bug != scenario_.server_bugs.end()) {
        if (auto sub = bug->second.find(onward); sub != bug->second.end()) {
            reported = sub->second;
        }
    }

    if (scenario_.transport == FeedbackTransport::Tcp) {
        const TcpEcnFlags flags = encode_handshake(reported);
        result.syn_ack = flags;
        return decode_handshake(flags);
    }

    // QUIC: the client reads which ACK_ECN counter moved. An acknowledged
    // packet that moved none of them arrived as Not-ECT.
    QuicEcnCounts& counts = quic_counts_[server_id];
    const QuicEcnCounts before = counts;
    counts = record_packet(counts, reported);
    if (counts.ect0_packets != before.ect0_packets) {
        return EcnCodepoint::Ect0;
    }
    if (counts.ect1_packets != before.ect1_packets) {
        return EcnCodepoint::Ect1;
    }
    if (counts.ce_packets != before.ce_packets) {
        return EcnCodepoint::Ce;
    }
    return EcnCodepoint::NotEct;
}

} // namespace ecnprobe
