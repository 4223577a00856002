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

#include "ecnprobe/config.hpp"
#include "ecnprobe/report.hpp"

#include <gtest/gtest.h>

namespace ecnprobe {
namespace {

ProbeReport probe_report(std::string_view config_text) {
    const ScenarioConfig config = parse_config(config_text);
    const ProbeSession session = build_session(config);
    Simulator sim(session.scenario);
    const ProbeResult result = run_probe(sim, session.settings);
    return make_report(result, config.seed, session.settings.capability, config_entries(config));
}

TEST(ReportTest, JsonRoundTripIsByteIdentical) {
    for (const char* text : {"egress = rfc6040\nseed = 42", "ingress = zero\negress = rfc4301\naqm_ce_probability = 0.1\n"
                                                           "loss_probability = 0.05\nseed = 2026",
                             "egress = rfc3168\ncapability = ce_only\nserver_bug = 2: CE -> ECT(1)",
                             "egress = zero-all"}) {
        const ProbeReport report = probe_report(text);
        const std::string json = render_report(report, ReportFormat::Json);
        const ProbeReport parsed = parse_report_json(json);
        EXPECT_EQ(parsed, report) << text;
        EXPECT_EQ(render_report(parsed, ReportFormat::Json), json) << text;
    }
}

TEST(ReportTest, JsonFields) {
    const std::string json = render_report(probe_report("egress = rfc6040\nseed = 42"), ReportFormat::Json);
    for (const char* needle :
         {"\"schema\": 1", "\"tool\": \"ecnprobe\"", "\"seed\": 42", "\"status\": \"complete\"",
          "\"verdict\": \"propagates_correctly\"", "\"consensus\": \"dropped\"", "\"syn_ack\": null",
          "\"syn_ack\": \".CE\"", "\"kind\": \"single\"", "\"classes\": [\n      \"RFC6040\"\n    ]"}) {
        EXPECT_NE(json.find(needle), std::string::npos) << needle;
    }
    EXPECT_EQ(json.back(), '\n');
}

TEST(ReportTest, TextReport) {
    const std::string text = render_report(probe_report("egress = rfc6040\nseed = 42"), ReportFormat::Text);
    EXPECT_NE(text.find("ECT(0) ECT(1) -> ECT(1)"), std::string::npos) << text;
    EXPECT_NE(text.find("*RFC6040"), std::string::npos);
    EXPECT_NE(text.find(".CE"), std::string::npos);
    EXPECT_NE(text.find("AC."), std::string::npos);
    EXPECT_NE(text.find("Classification: single RFC6040"), std::string::npos);
    EXPECT_NE(text.find("Verdict: propagates_correctly"), std::string::npos);

    const std::string bleached = render_report(probe_report("egress = rfc4301"), ReportFormat::Text);
    EXPECT_NE(bleached.find(".C."), std::string::npos);
}

TEST(ReportTest, EmptyReport) {
    ProbeReport report;
    report.status = ReportStatus::ControlFailure;
    const std::string json = render_report(report, ReportFormat::Json);
    EXPECT_NE(json.find("\"observations\": []"), std::string::npos) << json;
    EXPECT_NE(json.find("\"classification\": null"), std::string::npos);
    EXPECT_NE(json.find("\"status\": \"control_failure\""), std::string::npos);
    EXPECT_EQ(parse_report_json(json), report);
    EXPECT_NO_THROW(render_report(report, ReportFormat::Text));
}

TEST(ReportTest, ParseRejectsMalformedInput) {
    EXPECT_THROW(parse_report_json("not json"), ReportParseError);
    EXPECT_THROW(parse_report_json("{}"), ReportParseError);
    std::string json = render_report(probe_report(""), ReportFormat::Json);
    const auto pos = json.find("\"schema\": 1");
    json.replace(pos, 11, "\"schema\": 2");
    EXPECT_THROW(parse_report_json(json), ReportParseError);
}

TEST(ReportTest, SynAckStrings) {
    EXPECT_EQ(syn_ack_string(DecapOutcome::dropped()), "---");
    EXPECT_EQ(syn_ack_string(DecapOutcome::forwarded(EcnCodepoint::NotEct)), ".C.");
    EXPECT_EQ(syn_ack_string(DecapOutcome::forwarded(EcnCodepoint::Ect1)), ".CE");
    EXPECT_EQ(syn_ack_string(DecapOutcome::forwarded(EcnCodepoint::Ect0)), "A..");
    EXPECT_EQ(syn_ack_string(DecapOutcome::forwarded(EcnCodepoint::Ce)), "AC.");
}

TEST(ReportTest, ReferenceTables) {
    const std::string tables = render_reference_tables();
    for (const char* needle : {"RFC6040", "RFC4301", "RFC3168", "RFC2003", "dropped"}) {
        EXPECT_NE(tables.find(needle), std::string::npos) << needle;
    }
}

TEST(ReportTest, VersionString) {
    EXPECT_EQ(version(), ECNPROBE_EXPECTED_VERSION);
}

} // namespace
} // namespace ecnprobe
