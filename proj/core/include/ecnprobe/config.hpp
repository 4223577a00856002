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
 * Scenario configuration files: `key = value` lines, `#` starts a comment.
 *
 *   ingress            copy | zero | rfc3168full                  (copy)
 *   egress             rfc6040 | rfc4301 | rfc3168 | rfc2003 |
 *                      zero-all | copy-outer | random:<seed> |
 *                      custom:<16 rows "inner,outer -> outcome"
 *                              separated by ';'>                  (rfc6040)
 *   aqm_ce_probability real in [0, 1]                              (0)
 *   loss_probability   real in [0, 1]                              (0)
 *   seed               unsigned 64-bit                             (1)
 *   servers            integer >= 1                                (3)
 *   repetitions        integer >= 1                                (5)
 *   capability         full | ce_only                              (full)
 *   transport          tcp | quic                                  (tcp)
 *   mangler_flow       server index the outer rewrite applies to   (all)
 *   mangler_retain     retain mask of the outer rewrite            (0x3)
 *   server_bug         <server>: <codepoint> -> <codepoint>        (none)
 *                      may be repeated
 */

#pragma once

#include "ecnprobe/probe.hpp"
#include "ecnprobe/simnet.hpp"

#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace ecnprobe {

struct ConfigIssue {
    std::string field;
    std::string reason;
};

/// Carries one issue per offending field; what() lists them one per line.
class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(std::vector<ConfigIssue> issues);
    ConfigError(std::string field, std::string reason);

    const std::vector<ConfigIssue>& issues() const noexcept { return issues_; }

private:
    std::vector<ConfigIssue> issues_;
};

struct ServerBugEntry {
    std::size_t server = 0;
    EcnCodepoint from = EcnCodepoint::NotEct;
    EcnCodepoint to = EcnCodepoint::NotEct;
};

/// Syntactically valid configuration. Names and ranges are checked by
/// build_scenario() and build_session().
struct ScenarioConfig {
    std::string ingress = "copy";
    std::string egress = "rfc6040";
    double aqm_ce_probability = 0.0;
    double loss_probability = 0.0;
    std::uint64_t seed = 1;
    std::size_t servers = 3;
    std::size_t repetitions = 5;
    std::string capability = "full";
    std::string transport = "tcp";
    std::optional<std::size_t> mangler_flow;
    unsigned mangler_retain = kEcnMask;
    std::vector<ServerBugEntry> server_bugs;
};

ScenarioConfig parse_config(std::string_view text);
/// Throws ConfigError on a missing or unreadable file.
ScenarioConfig load_config_file(const std::string& path);

/// Canonical `key = value` pairs for every field, in a fixed order.
std::vector<std::pair<std::string, std::string>> config_entries(const ScenarioConfig& config);
std::string format_config(const ScenarioConfig& config);

/// Resolves an egress name as accepted in the config file.
DecapPolicy parse_egress(std::string_view name);

Scenario build_scenario(const ScenarioConfig& config);

struct ProbeSession {
    Scenario scenario;
    ProbeSettings settings;
};

ProbeSession build_session(const ScenarioConfig& config);

} // namespace ecnprobe
