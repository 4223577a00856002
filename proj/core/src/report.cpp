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

#include "ecnprobe/report.hpp"

#include "ecnprobe/feedback.hpp"

#include <json.hpp>

#include <algorithm>
#include <iomanip>
#include <sstream>

#ifndef ECNPROBE_VERSION
#define ECNPROBE_VERSION "0.0.0"
#endif

namespace ecnprobe {

namespace {

using ojson = nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;

std::string str(std::string_view s) { return std::string(s); }

std::string_view to_string(ReportStatus s) noexcept {
    return s == ReportStatus::Complete ? "complete" : "control_failure";
}

template <typename T, typename Parse>
T parse_enum(const ojson& j, const char* what, Parse parse) {
    if (!j.is_string()) {
        throw ReportParseError(std::string(what) + " must be a string");
    }
    const auto v = parse(j.get<std::string>());
    if (!v) {
        throw ReportParseError("unknown " + std::string(what) + " '" + j.get<std::string>() + "'");
    }
    return *v;
}

std::optional<EcnCodepoint> codepoint_named(std::string_view s) { return parse_codepoint(s); }

std::optional<DecapOutcome> outcome_named(std::string_view s) { return parse_outcome(s); }

std::optional<DecapBehaviorClass> class_named(std::string_view s) { return parse_behavior_class(s); }

std::optional<ReportStatus> status_named(std::string_view s) {
    if (s == "complete") {
        return ReportStatus::Complete;
    }
    if (s == "control_failure") {
        return ReportStatus::ControlFailure;
    }
    return std::nullopt;
}

std::optional<ProbeCapability> capability_named(std::string_view s) {
    if (s == "full") {
        return ProbeCapability::Full;
    }
    if (s == "ce_only") {
        return ProbeCapability::CeOnly;
    }
    return std::nullopt;
}

std::optional<ClassificationKind> kind_named(std::string_view s) {
    for (auto k : {ClassificationKind::Single, ClassificationKind::AmbiguousSet, ClassificationKind::Mangled}) {
        if (to_string(k) == s) {
            return k;
        }
    }
    return std::nullopt;
}

std::optional<PropagationVerdict> verdict_named(std::string_view s) {
    for (auto v : {PropagationVerdict::PropagatesCorrectly, PropagationVerdict::DoesNotPropagate,
                   PropagationVerdict::Unknown}) {
        if (to_string(v) == s) {
            return v;
        }
    }
    return std::nullopt;
}

ojson to_json(const ControlReport& control) {
    ojson cps = ojson::array();
    for (const auto& r : control.codepoints) {
        cps.push_back(ojson{{"codepoint", str(to_string(r.codepoint))},
                            {"feedback_matches", r.feedback_matches},
                            {"outer_matches_initial", r.outer_matches_initial},
                            {"matched", r.matched},
                            {"mismatched", r.mismatched},
                            {"absent", r.absent}});
    }
    return ojson{{"ingress_copies", control.ingress_copies},
                 {"overwrite_fallback_enabled", control.overwrite_fallback_enabled},
                 {"codepoints", std::move(cps)}};
}

ojson to_json(const ProbeObservation& obs) {
    ojson votes = ojson::object();
    for (const auto& [outcome, n] : obs.votes) {
        votes[str(to_string(outcome))] = n;
    }
    ojson syn_ack = obs.consensus.is_dropped() ? ojson(nullptr) : ojson(syn_ack_string(obs.consensus));
    return ojson{{"row", obs.row},
                 {"initial", str(to_string(obs.initial))},
                 {"outer_set", str(to_string(obs.outer_set))},
                 {"consensus", str(to_string(obs.consensus))},
                 {"votes", std::move(votes)},
                 {"ambiguous", obs.ambiguous},
                 {"control_verified", obs.control_verified},
                 {"syn_ack", std::move(syn_ack)}};
}

ojson to_json(const Classification& c) {
    ojson classes = ojson::array();
    for (auto cls : c.classes) {
        classes.push_back(str(to_string(cls)));
    }
    return ojson{{"kind", str(to_string(c.kind))}, {"classes", std::move(classes)}, {"flagged", c.flagged}};
}

std::string render_json(const ProbeReport& report) {
    ojson config = ojson::object();
    for (const auto& [k, v] : report.config) {
        if (k == "server_bug") {
            if (!config.contains(k)) {
                config[k] = ojson::array();
            }
            config[k].push_back(v);
        } else {
            config[k] = v;
        }
    }
    ojson observations = ojson::array();
    for (const auto& obs : report.observations) {
        observations.push_back(to_json(obs));
    }

    ojson doc;
    doc["schema"] = kSchemaVersion;
    doc["tool"] = "ecnprobe";
    doc["version"] = report.tool_version;
    doc["seed"] = report.seed;
    doc["status"] = str(to_string(report.status));
    doc["capability"] = str(to_string(report.capability));
    doc["config"] = std::move(config);
    doc["control"] = to_json(report.control);
    doc["observations"] = std::move(observations);
    doc["classification"] = report.classification ? to_json(*report.classification) : ojson(nullptr);
    doc["verdict"] = str(to_string(report.verdict));
    doc["warnings"] = report.warnings;
    return doc.dump(2) + "\n";
}

const ojson& field(const ojson& j, const char* key) {
    if (!j.is_object() || !j.contains(key)) {
        throw ReportParseError(std::string("missing field '") + key + "'");
    }
    return j.at(key);
}

template <typename T>
T get(const ojson& j, const char* key) {
    try {
        return field(j, key).get<T>();
    } catch (const nlohmann::json::exception&) {
        throw ReportParseError(std::string("field '") + key + "' has the wrong type");
    }
}

std::string pad(std::string_view s, std::size_t width) {
    std::string out(s);
    if (out.size() < width) {
        out.append(width - out.size(), ' ');
    }
    return out;
}

std::string trim_line_ends(const std::string& text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        if (c == '\n') {
            while (!out.empty() && out.back() == ' ') {
                out.pop_back();
            }
        }
        out += c;
    }
    return out;
}

std::string render_text(const ProbeReport& report) {
    std::ostringstream os;
    os << "ecnprobe " << report.tool_version << "  seed " << report.seed << "  capability "
       << to_string(report.capability) << "\n\n";

    os << "Control test\n";
    os << "  " << pad("Initial", 9) << pad("outer=initial", 15) << pad("feedback", 10)
       << "matched/mismatched/absent\n";
    for (const auto& r : report.control.codepoints) {
        os << "  " << pad(to_string(r.codepoint), 9) << pad(r.outer_matches_initial ? "yes" : "no", 15)
           << pad(r.feedback_matches ? "ok" : "MISMATCH", 10) << r.matched << '/' << r.mismatched << '/'
           << r.absent << "\n";
    }
    os << "  ingress copies ECN to outer: " << (report.control.ingress_copies ? "yes" : "no") << "\n";
    os << "  outer overwrite fallback:    " << (report.control.overwrite_fallback_enabled ? "enabled" : "off")
       << "\n\n";

    if (report.status == ReportStatus::ControlFailure) {
        os << "Control test failed; main test not run.\n";
    } else {
        std::vector<DecapBehaviorClass> highlighted;
        if (report.classification) {
            highlighted = report.classification->classes;
        }
        auto header = [&](DecapBehaviorClass c) {
            const bool hit = std::find(highlighted.begin(), highlighted.end(), c) != highlighted.end();
            return pad((hit ? "*" : " ") + str(to_string(c)), 10);
        };

        os << "Main test (* marks the matching column)\n";
        os << "  " << pad("Initial", 9) << pad("Outer", 9);
        for (auto c : kStandardClasses) {
            os << header(c);
        }
        os << pad("observed", 10) << pad("SYN-ACK", 9) << "votes\n";
        for (const auto& obs : report.observations) {
            os << "  " << pad(to_string(obs.initial), 9) << pad(to_string(obs.outer_set), 9);
            for (auto c : kStandardClasses) {
                const DecapOutcome ref = DecapPolicy::standard(c).decap(obs.initial, obs.outer_set);
                os << ' ' << pad(to_string(ref), 9);
            }
            os << pad(to_string(obs.consensus), 10) << pad(syn_ack_string(obs.consensus), 9);
            bool first = true;
            for (const auto& [outcome, n] : obs.votes) {
                os << (first ? "" : " ") << to_string(outcome) << ':' << n;
                first = false;
            }
            if (obs.ambiguous) {
                os << "  (no majority)";
            }
            os << "\n";
        }
        os << "\nObserved\n";
        for (const auto& obs : report.observations) {
            os << "  " << to_string(obs.initial) << ' ' << to_string(obs.outer_set) << " -> "
               << to_string(obs.consensus) << "\n";
        }
        os << "\n";
    }

    os << "Classification: ";
    if (!report.classification) {
        os << "none";
    } else {
        const auto& c = *report.classification;
        os << to_string(c.kind);
        for (auto cls : c.classes) {
            os << ' ' << to_string(cls);
        }
        if (c.flagged) {
            os << " (flagged: votes were not conclusive)";
        }
    }
    os << "\nVerdict: " << to_string(report.verdict) << "\n";

    if (!report.warnings.empty()) {
        os << "\nWarnings\n";
        for (const auto& w : report.warnings) {
            os << "  - " << w << "\n";
        }
    }
    return trim_line_ends(os.str());
}

} // namespace

std::string_view version() noexcept { return ECNPROBE_VERSION; }

std::string syn_ack_string(DecapOutcome outcome) {
    return outcome.is_dropped() ? std::string("---") : wireshark_string(encode_handshake(outcome.codepoint()));
}

ProbeReport make_report(const ProbeResult& result, std::uint64_t seed, ProbeCapability capability,
                        std::vector<std::pair<std::string, std::string>> config) {
    ProbeReport r;
    r.seed = seed;
    r.capability = capability;
    r.config = std::move(config);
    r.control = result.control;
    r.observations = result.observations;
    r.classification = result.classification;
    r.verdict = result.verdict;
    r.warnings = result.warnings;
    return r;
}

std::string render_report(const ProbeReport& report, ReportFormat format) {
    return format == ReportFormat::Json ? render_json(report) : render_text(report);
}

ProbeReport parse_report_json(std::string_view json) {
    ojson doc;
    try {
        doc = ojson::parse(json);
    } catch (const nlohmann::json::parse_error& e) {
        throw ReportParseError(std::string("malformed JSON: ") + e.what());
    }
    if (get<int>(doc, "schema") != kSchemaVersion) {
        throw ReportParseError("unsupported report schema");
    }

    ProbeReport r;
    r.tool_version = get<std::string>(doc, "version");
    r.seed = get<std::uint64_t>(doc, "seed");
    r.status = parse_enum<ReportStatus>(field(doc, "status"), "status", status_named);
    r.capability = parse_enum<ProbeCapability>(field(doc, "capability"), "capability", capability_named);

    for (const auto& [k, v] : field(doc, "config").items()) {
        if (v.is_array()) {
            for (const auto& item : v) {
                r.config.emplace_back(k, item.get<std::string>());
            }
        } else {
            r.config.emplace_back(k, v.get<std::string>());
        }
    }

    const ojson& control = field(doc, "control");
    r.control.ingress_copies = get<bool>(control, "ingress_copies");
    r.control.overwrite_fallback_enabled = get<bool>(control, "overwrite_fallback_enabled");
    const ojson& cps = field(control, "codepoints");
    if (!cps.is_array() || cps.size() != 4) {
        throw ReportParseError("control.codepoints must list four codepoints");
    }
    for (std::size_t i = 0; i < 4; ++i) {
        auto& out = r.control.codepoints[i];
        out.codepoint = parse_enum<EcnCodepoint>(field(cps[i], "codepoint"), "codepoint", codepoint_named);
        out.feedback_matches = get<bool>(cps[i], "feedback_matches");
        out.outer_matches_initial = get<bool>(cps[i], "outer_matches_initial");
        out.matched = get<std::size_t>(cps[i], "matched");
        out.mismatched = get<std::size_t>(cps[i], "mismatched");
        out.absent = get<std::size_t>(cps[i], "absent");
    }

    for (const auto& o : field(doc, "observations")) {
        ProbeObservation obs;
        obs.row = get<std::size_t>(o, "row");
        obs.initial = parse_enum<EcnCodepoint>(field(o, "initial"), "codepoint", codepoint_named);
        obs.outer_set = parse_enum<EcnCodepoint>(field(o, "outer_set"), "codepoint", codepoint_named);
        obs.consensus = parse_enum<DecapOutcome>(field(o, "consensus"), "outcome", outcome_named);
        for (const auto& [k, v] : field(o, "votes").items()) {
            obs.votes[parse_enum<DecapOutcome>(ojson(k), "outcome", outcome_named)] = v.get<std::size_t>();
        }
        obs.ambiguous = get<bool>(o, "ambiguous");
        obs.control_verified = get<bool>(o, "control_verified");
        r.observations.push_back(std::move(obs));
    }

    const ojson& cls = field(doc, "classification");
    if (!cls.is_null()) {
        Classification c;
        c.kind = parse_enum<ClassificationKind>(field(cls, "kind"), "classification kind", kind_named);
        for (const auto& name : field(cls, "classes")) {
            c.classes.push_back(parse_enum<DecapBehaviorClass>(name, "class", class_named));
        }
        c.flagged = get<bool>(cls, "flagged");
        r.classification = std::move(c);
    }
    r.verdict = parse_enum<PropagationVerdict>(field(doc, "verdict"), "verdict", verdict_named);
    r.warnings = get<std::vector<std::string>>(doc, "warnings");
    return r;
}

std::string render_reference_tables() {
    std::ostringstream os;
    os << "Main test reference outcomes\n";
    os << "  " << pad("Initial", 9) << pad("Outer", 9);
    for (auto c : kStandardClasses) {
        os << pad(to_string(c), 10);
    }
    os << pad("mangled", 8) << "\n";
    for (const auto& row : kProbeRows) {
        os << "  " << pad(to_string(row.initial), 9) << pad(to_string(row.outer), 9);
        for (auto c : kStandardClasses) {
            os << pad(to_string(DecapPolicy::standard(c).decap(row.initial, row.outer)), 10);
        }
        os << pad("other", 8) << "\n";
    }
    os << "  propagates ECN correctly:";
    const char* sep = " ";
    for (auto c : kStandardClasses) {
        if (propagates_correctly(c)) {
            os << sep << to_string(c);
            sep = ", ";
        }
    }
    os << "\n";

    for (auto c : kStandardClasses) {
        const DecapPolicy policy = DecapPolicy::standard(c);
        os << "\n" << to_string(c) << " decapsulation (rows: Inner, columns: Outer)\n";
        os << "  " << pad("", 9);
        for (auto outer : kAllCodepoints) {
            os << pad(to_string(outer), 9);
        }
        os << "\n";
        for (auto inner : kAllCodepoints) {
            os << "  " << pad(to_string(inner), 9);
            for (auto outer : kAllCodepoints) {
                os << pad(to_string(behavior_profile(policy)[cell_index(inner, outer)]), 9);
            }
            os << "\n";
        }
    }
    return trim_line_ends(os.str());
}

} // namespace ecnprobe
