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

#include "ecnprobe/probe.hpp"

#include <algorithm>
#include <set>

namespace ecnprobe {

namespace {

DecapOutcome vote_of(const ExchangeResult& ex) {
    return ex.feedback ? DecapOutcome::forwarded(*ex.feedback) : DecapOutcome::dropped();
}

void emit(const ExchangeSink& sink, const ExchangeResult& ex) {
    if (sink) {
        sink(ex);
    }
}

void tally_feedback(ControlCodepointResult& r, const ExchangeResult& ex) {
    if (!ex.feedback) {
        ++r.absent;
    } else if (*ex.feedback == r.codepoint) {
        ++r.matched;
    } else {
        ++r.mismatched;
    }
}

// Outcomes a class can produce on one probe row once the path has had its say.
std::set<DecapOutcome> explainable_outcomes(const DecapPolicy& policy, const ProbeRow& row) {
    std::set<DecapOutcome> allowed{policy.decap(row.initial, row.outer), DecapOutcome::dropped()};
    if (is_ect(row.outer)) {
        allowed.insert(policy.decap(row.initial, EcnCodepoint::Ce));
    }
    return allowed;
}

} // namespace

ControlReport run_control_test(Simulator& sim, std::size_t repetitions, const ExchangeSink& sink) {
    if (repetitions == 0) {
        throw std::invalid_argument("control test needs at least one repetition");
    }
    const std::size_t servers = sim.scenario().servers;

    ControlReport report;
    for (EcnCodepoint cp : kAllCodepoints) {
        auto& r = report.codepoints[codepoint_to_bits(cp)];
        r.codepoint = cp;
        r.outer_matches_initial = true;
        for (std::size_t k = 0; k < repetitions; ++k) {
            const ExchangeResult ex = sim.run_exchange(cp, std::nullopt, k % servers);
            emit(sink, ex);
            const auto outer = ex.emitted_outer();
            r.outer_matches_initial = r.outer_matches_initial && outer && outer->ecn() == cp;
            tally_feedback(r, ex);
        }
    }

    report.ingress_copies = std::all_of(report.codepoints.begin(), report.codepoints.end(),
                                        [](const auto& r) { return r.outer_matches_initial; });
    report.overwrite_fallback_enabled = !report.ingress_copies;

    if (report.overwrite_fallback_enabled) {
        // The ingress does not copy, so what reached the egress says nothing
        // about the egress itself. Redo the feedback check with the outer set
        // to a copy of the Initial.
        for (auto& r : report.codepoints) {
            r.matched = r.mismatched = r.absent = 0;
            for (std::size_t k = 0; k < repetitions; ++k) {
                const ExchangeResult ex = sim.run_exchange(r.codepoint, r.codepoint, k % servers);
                emit(sink, ex);
                tally_feedback(r, ex);
            }
        }
    }

    for (auto& r : report.codepoints) {
        r.feedback_matches = 2 * r.matched > repetitions;
    }

    const bool never_matched = std::all_of(report.codepoints.begin(), report.codepoints.end(),
                                           [](const auto& r) { return r.matched == 0; });
    if (never_matched) {
        throw ControlFailure("no codepoint was ever reflected back by any server; "
                             "the tunnel or the servers cannot be used for testing",
                             report);
    }
    return report;
}

Consensus aggregate(const VoteCounts& votes) {
    std::size_t total = 0;
    for (const auto& [outcome, n] : votes) {
        total += n;
    }
    if (total == 0) {
        throw std::invalid_argument("cannot aggregate an empty vote");
    }

    // std::map iterates in DecapOutcome order, so keeping the first maximum
    // implements the tie-break.
    Consensus c;
    std::size_t best = 0;
    for (const auto& [outcome, n] : votes) {
        if (n > best) {
            best = n;
            c.outcome = outcome;
        }
    }
    c.ambiguous = 2 * best <= total;
    return c;
}

std::vector<ProbeObservation> run_main_test(Simulator& sim, ProbeCapability capability,
                                            std::size_t repetitions, const ControlReport& control,
                                            const ExchangeSink& sink) {
    if (repetitions == 0) {
        throw std::invalid_argument("main test needs at least one repetition");
    }
    const std::size_t servers = sim.scenario().servers;

    std::vector<ProbeObservation> observations;
    for (std::size_t i = 0; i < probe_row_count(capability); ++i) {
        const ProbeRow& row = kProbeRows[i];
        ProbeObservation obs;
        obs.row = i;
        obs.initial = row.initial;
        obs.outer_set = row.outer;
        obs.control_verified = control.at(row.initial).feedback_matches;

        for (std::size_t k = 0; k < repetitions; ++k) {
            const ExchangeResult ex = sim.run_exchange(row.initial, row.outer, k % servers);
            emit(sink, ex);
            ++obs.votes[vote_of(ex)];
        }
        const Consensus c = aggregate(obs.votes);
        obs.consensus = c.outcome;
        obs.ambiguous = c.ambiguous;
        observations.push_back(std::move(obs));
    }
    return observations;
}

std::string_view to_string(ClassificationKind k) noexcept {
    switch (k) {
    case ClassificationKind::Single:
        return "single";
    case ClassificationKind::AmbiguousSet:
        return "ambiguous_set";
    case ClassificationKind::Mangled:
        return "mangled";
    }
    return "?";
}

Classification Classification::from_matches(std::vector<DecapBehaviorClass> matches) {
    std::sort(matches.begin(), matches.end());
    Classification c;
    c.kind = matches.empty()      ? ClassificationKind::Mangled
             : matches.size() == 1 ? ClassificationKind::Single
                                   : ClassificationKind::AmbiguousSet;
    c.classes = std::move(matches);
    return c;
}

std::vector<DecapBehaviorClass> matching_classes(const ProbeSignature& column, ProbeCapability capability) {
    std::vector<DecapBehaviorClass> out;
    for (DecapBehaviorClass c : kStandardClasses) {
        if (reference_signature(c, capability) == column) {
            out.push_back(c);
        }
    }
    return out;
}

std::vector<DecapBehaviorClass> noise_consistent_classes(const std::vector<ProbeObservation>& observations,
                                                         ProbeCapability capability) {
    std::vector<DecapBehaviorClass> out;
    for (DecapBehaviorClass c : kStandardClasses) {
        const DecapPolicy policy = DecapPolicy::standard(c);
        const ProbeSignature expected = reference_signature(c, capability);
        bool consistent = true;
        for (const auto& obs : observations) {
            const ProbeRow& row = kProbeRows[obs.row];
            const auto allowed = explainable_outcomes(policy, row);
            const auto own = obs.votes.find(expected[obs.row]);
            const bool every_vote_explained = std::all_of(
                obs.votes.begin(), obs.votes.end(), [&](const auto& v) { return allowed.contains(v.first); });
            if (own == obs.votes.end() || own->second == 0 || !every_vote_explained) {
                consistent = false;
                break;
            }
        }
        if (consistent) {
            out.push_back(c);
        }
    }
    return out;
}

Classification classify(const std::vector<ProbeObservation>& observations, ProbeCapability capability) {
    if (observations.size() != probe_row_count(capability)) {
        throw std::invalid_argument("expected " + std::to_string(probe_row_count(capability)) +
                                    " observations for " + std::string(to_string(capability)) +
                                    " capability, got " + std::to_string(observations.size()));
    }
    for (std::size_t i = 0; i < observations.size(); ++i) {
        if (observations[i].row != i) {
            throw std::invalid_argument("observations are not in probe row order");
        }
    }

    ProbeSignature column;
    for (const auto& obs : observations) {
        column.push_back(obs.consensus);
    }
    const auto matched = matching_classes(column, capability);
    const bool any_ambiguous =
        std::any_of(observations.begin(), observations.end(), [](const auto& o) { return o.ambiguous; });
    const bool all_unanimous =
        std::all_of(observations.begin(), observations.end(), [](const auto& o) { return o.unanimous(); });

    if (all_unanimous) {
        Classification c = Classification::from_matches(matched);
        c.flagged = any_ambiguous;
        return c;
    }

    const auto consistent = noise_consistent_classes(observations, capability);
    if (consistent.empty()) {
        Classification c = Classification::from_matches(matched);
        c.flagged = true;
        return c;
    }
    Classification c = Classification::from_matches(consistent);
    c.flagged = any_ambiguous || consistent != matched;
    return c;
}

std::string_view to_string(PropagationVerdict v) noexcept {
    switch (v) {
    case PropagationVerdict::PropagatesCorrectly:
        return "propagates_correctly";
    case PropagationVerdict::DoesNotPropagate:
        return "does_not_propagate";
    case PropagationVerdict::Unknown:
        return "unknown";
    }
    return "?";
}

PropagationVerdict interpret(const Classification& classification) noexcept {
    switch (classification.kind) {
    case ClassificationKind::Single:
        return propagates_correctly(classification.classes.front()) ? PropagationVerdict::PropagatesCorrectly
                                                                    : PropagationVerdict::DoesNotPropagate;
    case ClassificationKind::Mangled:
        return PropagationVerdict::DoesNotPropagate;
    case ClassificationKind::AmbiguousSet:
        return std::all_of(classification.classes.begin(), classification.classes.end(), propagates_correctly)
                   ? PropagationVerdict::PropagatesCorrectly
                   : PropagationVerdict::Unknown;
    }
    return PropagationVerdict::Unknown;
}

ProbeResult run_probe(Simulator& sim, const ProbeSettings& settings, const ExchangeSink& sink) {
    ProbeResult result;
    result.control = run_control_test(sim, settings.repetitions, sink);

    for (const auto& r : result.control.codepoints) {
        if (!r.feedback_matches) {
            result.warnings.push_back("control: feedback for " + std::string(to_string(r.codepoint)) +
                                      " did not match in a majority of exchanges (" +
                                      std::to_string(r.matched) + " matched, " + std::to_string(r.mismatched) +
                                      " mismatched, " + std::to_string(r.absent) + " absent)");
        }
    }
    if (result.control.overwrite_fallback_enabled) {
        result.warnings.push_back("control: ingress does not copy the Initial ECN to the outer; "
                                  "outer overwrite fallback enabled");
    }

    result.observations =
        run_main_test(sim, settings.capability, settings.repetitions, result.control, sink);
    for (const auto& obs : result.observations) {
        if (!obs.control_verified) {
            result.warnings.push_back("main: row " + std::to_string(obs.row) + " uses Initial " +
                                      std::string(to_string(obs.initial)) +
                                      ", which the control test could not confirm");
        }
        if (obs.ambiguous) {
            result.warnings.push_back("main: row " + std::to_string(obs.row) + " has no strict majority");
        }
    }

    result.classification = classify(result.observations, settings.capability);
    result.verdict = interpret(result.classification);
    return result;
}

} // namespace ecnprobe
