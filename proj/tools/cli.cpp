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

#include "cli.hpp"

#include "ecnprobe/config.hpp"
#include "ecnprobe/probe.hpp"
#include "ecnprobe/report.hpp"
#include "ecnprobe/simnet.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <ostream>

namespace ecnprobe::cli {

namespace {

int exit_code_for(PropagationVerdict v) {
    switch (v) {
    case PropagationVerdict::PropagatesCorrectly:
        return kPropagatesCorrectly;
    case PropagationVerdict::DoesNotPropagate:
        return kDoesNotPropagate;
    case PropagationVerdict::Unknown:
        return kUnknown;
    }
    return kUnknown;
}

bool write_file(const std::string& path, const std::string& content, std::ostream& err) {
    std::ofstream f(path, std::ios::binary | std::ios::trunc);
    f << content;
    if (!f) {
        err << "ecnprobe: cannot write '" << path << "'\n";
        return false;
    }
    return true;
}

int run_probe_command(const std::string& config_path, const std::string& json_path,
                      const std::string& trace_path, std::ostream& out, std::ostream& err) {
    ScenarioConfig config;
    ProbeSession session;
    try {
        config = load_config_file(config_path);
        session = build_session(config);
    } catch (const ConfigError& e) {
        for (const auto& issue : e.issues()) {
            err << "ecnprobe: config error: " << issue.field << " " << issue.reason << "\n";
        }
        return kConfigError;
    }

    std::string trace;
    Simulator sim(session.scenario);
    const ExchangeSink sink = [&](const ExchangeResult& ex) { trace += format_trace(ex); };

    ProbeReport report;
    int code = kUnknown;
    try {
        const ProbeResult result = run_probe(sim, session.settings, sink);
        report = make_report(result, config.seed, session.settings.capability, config_entries(config));
        code = exit_code_for(result.verdict);
    } catch (const ControlFailure& e) {
        err << "ecnprobe: control test failed: " << e.what() << "\n";
        report.seed = config.seed;
        report.capability = session.settings.capability;
        report.config = config_entries(config);
        report.status = ReportStatus::ControlFailure;
        report.control = e.report();
        report.warnings.push_back(e.what());
        code = kControlFailure;
    }

    // JSON on stdout replaces the text report.
    if (json_path == "-") {
        out << render_report(report, ReportFormat::Json);
    } else {
        out << render_report(report, ReportFormat::Text);
        if (!json_path.empty() && !write_file(json_path, render_report(report, ReportFormat::Json), err)) {
            return kConfigError;
        }
    }
    if (!trace_path.empty() && !write_file(trace_path, trace, err)) {
        return kConfigError;
    }
    return code;
}

struct SweepCase {
    DecapBehaviorClass egress;
    EncapMode ingress;
    ProbeCapability capability;
};

int run_selftest(std::ostream& out) {
    int failures = 0;
    for (auto capability : {ProbeCapability::Full, ProbeCapability::CeOnly}) {
        for (auto egress : kStandardClasses) {
            for (auto ingress : {EncapMode::CopyExact, EncapMode::ZeroOuter}) {
                Scenario scenario;
                scenario.ingress = EncapPolicy{ingress};
                scenario.egress = DecapPolicy::standard(egress);
                Simulator sim(scenario);
                const ProbeResult result = run_probe(sim, ProbeSettings{5, capability});

                std::vector<DecapBehaviorClass> expected{egress};
                if (capability == ProbeCapability::CeOnly &&
                    (egress == DecapBehaviorClass::Rfc6040 || egress == DecapBehaviorClass::Rfc3168)) {
                    expected = {DecapBehaviorClass::Rfc6040, DecapBehaviorClass::Rfc3168};
                }
                const Classification want = Classification::from_matches(expected);
                const auto want_verdict = propagates_correctly(egress) ? PropagationVerdict::PropagatesCorrectly
                                                                       : PropagationVerdict::DoesNotPropagate;
                const bool fallback_ok = result.control.overwrite_fallback_enabled == (ingress != EncapMode::CopyExact);
                const bool ok = result.classification == want && result.verdict == want_verdict && fallback_ok;
                failures += ok ? 0 : 1;

                out << (ok ? "PASS " : "FAIL ") << to_string(egress) << " ingress=" << to_string(ingress)
                    << " capability=" << to_string(capability) << " -> " << to_string(result.classification.kind);
                for (auto c : result.classification.classes) {
                    out << ' ' << to_string(c);
                }
                out << ", " << to_string(result.verdict) << "\n";
            }
        }
    }
    out << (failures == 0 ? "selftest passed" : "selftest FAILED") << "\n";
    return failures == 0 ? 0 : 1;
}

} // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Classify how a tunnel egress decapsulates the ECN field, over a simulated path"};
    app.name("ecnprobe");
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(version()));

    std::string config_path;
    std::string json_path;
    std::string trace_path;
    auto* probe = app.add_subcommand("probe", "Run the control and main tests for a scenario");
    probe->add_option("--config", config_path, "Scenario config file")->required();
    probe->add_option("--json", json_path, "Write the JSON report here ('-' prints it instead of the text report)");
    probe->add_option("--trace", trace_path, "Write the per-exchange header trace here");

    auto* tables = app.add_subcommand("tables", "Print reference signatures and decapsulation tables");
    auto* selftest = app.add_subcommand("selftest", "Run the clean-path soundness sweep");

    // App::parse(vector) consumes arguments from the back.
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        app.exit(e, out, err);
        return 0;
    } catch (const CLI::CallForVersion& e) {
        app.exit(e, out, err);
        return 0;
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kConfigError;
    }

    if (*probe) {
        return run_probe_command(config_path, json_path, trace_path, out, err);
    }
    if (*tables) {
        out << render_reference_tables();
        return 0;
    }
    if (*selftest) {
        return run_selftest(out);
    }
    return kConfigError;
}

} // namespace ecnprobe::cli
