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
 * The probe procedure: a control test that checks the path reflects each
 * codepoint end to end, then the main test that rewrites the outer after
 * encapsulation and watches what the egress does with it. Each probe is
 * repeated over several servers and the votes are aggregated before the
 * observed column is matched against the reference signatures.
 */

#pragma once

#include "ecnprobe/simnet.hpp"
#include "ecnprobe/tunnel.hpp"

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

namespace ecnprobe {

/// Called for every exchange the engine runs, in order.
using ExchangeSink = std::function<void(const ExchangeResult&)>;

struct ControlCodepointResult {
    EcnCodepoint codepoint = EcnCodepoint::NotEct;
    bool feedback_matches = false;      ///< strict majority of feedback equalled the Initial
    bool outer_matches_initial = false; ///< every emitted outer equalled the Initial
    std::size_t matched = 0;
    std::size_t mismatched = 0;
    std::size_t absent = 0;

    friend bool operator==(const ControlCodepointResult&, const ControlCodepointResult&) = default;
};

struct ControlReport {
    std::array<ControlCodepointResult, 4> codepoints{}; ///< kAllCodepoints order
    bool ingress_copies = false;
    bool overwrite_fallback_enabled = false;

    const ControlCodepointResult& at(EcnCodepoint cp) const noexcept {
        return codepoints[codepoint_to_bits(cp)];
    }

    friend bool operator==(const ControlReport&, const ControlReport&) = default;
};

/// The path never reflected the Initial codepoint back for any codepoint,
/// even with the outer overwritten to match it.
class ControlFailure : public std::runtime_error {
public:
    ControlFailure(const std::string& what, ControlReport report)
        : std::runtime_error(what), report_(report) {}

    const ControlReport& report() const noexcept { return report_; }

private:
    ControlReport report_;
};

/**
 * Sends each of the four codepoints `repetitions` times with no outer rewrite,
 * cycling through the scenario's servers. If the ingress does not copy the
 * Initial codepoint to the outer, the feedback check is repeated with the
 * outer overwritten to a copy of the Initial.
 *
 * Throws std::invalid_argument if repetitions is zero and ControlFailure if
 * no exchange of any codepoint got matching feedback.
 */
ControlReport run_control_test(Simulator& sim, std::size_t repetitions, const ExchangeSink& sink = {});

using VoteCounts = std::map<DecapOutcome, std::size_t>;

struct Consensus {
    DecapOutcome outcome = DecapOutcome::dropped();
    bool ambiguous = false;

    friend bool operator==(const Consensus&, const Consensus&) = default;
};

/// Strict-majority vote. Without a strict majority the plurality wins, ties
/// going to the outcome lowest in DecapOutcome order, and the result is
/// marked ambiguous. Throws std::invalid_argument when there are no votes.
Consensus aggregate(const VoteCounts& votes);

struct ProbeObservation {
    std::size_t row = 0;
    EcnCodepoint initial = EcnCodepoint::NotEct;
    EcnCodepoint outer_set = EcnCodepoint::NotEct;
    DecapOutcome consensus = DecapOutcome::dropped();
    VoteCounts votes;
    bool ambiguous = false;
    /// False when the control test could not confirm feedback for `initial`.
    bool control_verified = true;

    bool unanimous() const noexcept { return votes.size() == 1; }

    friend bool operator==(const ProbeObservation&, const ProbeObservation&) = default;
};

/// Runs the probe rows for `capability`, each `repetitions` times.
std::vector<ProbeObservation> run_main_test(Simulator& sim, ProbeCapability capability,
                                            std::size_t repetitions, const ControlReport& control,
                                            const ExchangeSink& sink = {});

enum class ClassificationKind : std::uint8_t { Single, AmbiguousSet, Mangled };

std::string_view to_string(ClassificationKind k) noexcept;

struct Classification {
    ClassificationKind kind = ClassificationKind::Mangled;
    /// One class for Single, two or more for AmbiguousSet, none for Mangled.
    /// Kept in DecapBehaviorClass order.
    std::vector<DecapBehaviorClass> classes;
    /// Some row had no strict majority, or the individual votes pointed at a
    /// different set of classes than the consensus column did.
    bool flagged = false;

    static Classification from_matches(std::vector<DecapBehaviorClass> matches);

    friend bool operator==(const Classification&, const Classification&) = default;
};

/// Standard classes whose signature equals `column` exactly.
std::vector<DecapBehaviorClass> matching_classes(const ProbeSignature& column, ProbeCapability capability);

/**
 * Standard classes that explain every individual vote, given that path loss
 * turns any outcome into Dropped and an AQM may CE-mark an ECN-capable outer
 * before it reaches the egress. A class must also have received at least one
 * vote for its own expected outcome in every row.
 */
std::vector<DecapBehaviorClass> noise_consistent_classes(const std::vector<ProbeObservation>& observations,
                                                         ProbeCapability capability);

/**
 * Matches the observed column against the reference signatures.
 *
 * When every row was unanimous this is a plain exact match on the consensus
 * column. When votes disagreed, the noise-consistent classes decide instead;
 * if none exist (e.g. a server reporting bogus feedback) the consensus match
 * is kept and the result is flagged.
 *
 * Throws std::invalid_argument if the row count does not fit `capability`.
 */
Classification classify(const std::vector<ProbeObservation>& observations, ProbeCapability capability);

enum class PropagationVerdict : std::uint8_t { PropagatesCorrectly, DoesNotPropagate, Unknown };

std::string_view to_string(PropagationVerdict v) noexcept;

PropagationVerdict interpret(const Classification& classification) noexcept;

struct ProbeSettings {
    std::size_t repetitions = 5;
    ProbeCapability capability = ProbeCapability::Full;
};

struct ProbeResult {
    ControlReport control;
    std::vector<ProbeObservation> observations;
    Classification classification;
    PropagationVerdict verdict = PropagationVerdict::Unknown;
    std::vector<std::string> warnings;
};

/// Control test, main test, classification and verdict in one go.
ProbeResult run_probe(Simulator& sim, const ProbeSettings& settings, const ExchangeSink& sink = {});

} // namespace ecnprobe
