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
 * Probe reports: a text rendering for operators and a versioned JSON document
 * for automation.
 *
 * JSON schema 1 (keys lower_snake_case, enums as names, counts as integers):
 *
 *   schema          1
 *   tool, version   "ecnprobe", tool version string
 *   seed            integer
 *   status          "complete" | "control_failure"
 *   capability      "full" | "ce_only"
 *   config          object of the effective config, string values
 *   control         { ingress_copies, overwrite_fallback_enabled,
 *                     codepoints: [ { codepoint, feedback_matches,
 *                                     outer_matches_initial, matched,
 *                                     mismatched, absent } x4 ] }
 *   observations    [ { row, initial, outer_set, consensus, votes{outcome: n},
 *                       ambiguous, control_verified, syn_ack } ]
 *                   syn_ack is the Wireshark flag string of the consensus, or
 *                   null when the consensus is "dropped"
 *   classification  { kind, classes[], flagged } or null
 *   verdict         "propagates_correctly" | "does_not_propagate" | "unknown"
 *   warnings        [ string ]
 */

#pragma once

#include "ecnprobe/probe.hpp"

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ecnprobe {

std::string_view version() noexcept;

enum class ReportStatus : std::uint8_t { Complete, ControlFailure };

struct ProbeReport {
    std::string tool_version{version()};
    std::uint64_t seed = 0;
    ReportStatus status = ReportStatus::Complete;
    ProbeCapability capability = ProbeCapability::Full;
    std::vector<std::pair<std::string, std::string>> config;
    ControlReport control;
    std::vector<ProbeObservation> observations;
    std::optional<Classification> classification;
    PropagationVerdict verdict = PropagationVerdict::Unknown;
    std::vector<std::string> warnings;

    friend bool operator==(const ProbeReport&, const ProbeReport&) = default;
};

ProbeReport make_report(const ProbeResult& result, std::uint64_t seed, ProbeCapability capability,
                        std::vector<std::pair<std::string, std::string>> config);

class ReportParseError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

enum class ReportFormat : std::uint8_t { Text, Json };

std::string render_report(const ProbeReport& report, ReportFormat format);

/// Inverse of render_report(..., Json).
ProbeReport parse_report_json(std::string_view json);

/// The Table-1 style grid of reference outcomes plus 16-cell profiles of each
/// standard egress, as printed by `ecnprobe tables`.
std::string render_reference_tables();

/// Wireshark flag string of the SYN-ACK a server sends for a forwarded
/// outcome, e.g. ".C." for Not-ECT; "---" for a drop.
std::string syn_ack_string(DecapOutcome outcome);

} // namespace ecnprobe
