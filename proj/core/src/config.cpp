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

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace ecnprobe {

namespace {

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

template <typename T>
std::optional<T> parse_unsigned(std::string_view s) {
    int base = 10;
    if (s.size() > 2 && s[0] == '0' && (s[1] == 'x' || s[1] == 'X')) {
        s.remove_prefix(2);
        base = 16;
    }
    T value{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value, base);
    if (ec != std::errc() || ptr != s.data() + s.size() || s.empty()) {
        return std::nullopt;
    }
    return value;
}

std::optional<double> parse_real(std::string_view s) {
    // std::from_chars for double is unavailable in older libstdc++.
    std::string copy(s);
    std::istringstream is(copy);
    is.imbue(std::locale::classic());
    double v = 0;
    if (!(is >> v) || !is.eof()) {
        return std::nullopt;
    }
    return v;
}

// Shortest precision that reads back to the same double.
std::string format_real(double v) {
    for (int precision = 1; precision <= 17; ++precision) {
        std::ostringstream os;
        os.imbue(std::locale::classic());
        os.precision(precision);
        os << v;
        if (parse_real(os.str()) == v || precision == 17) {
            return os.str();
        }
    }
    return {};
}

const std::set<std::string_view> kKnownKeys = {
    "ingress",     "egress",     "aqm_ce_probability", "loss_probability", "seed",
    "servers",     "repetitions", "capability",        "transport",        "mangler_flow",
    "mangler_retain", "server_bug"};

std::optional<ServerBugEntry> parse_server_bug(std::string_view value) {
    const auto colon = value.find(':');
    const auto arrow = value.find("->");
    if (colon == std::string_view::npos || arrow == std::string_view::npos || arrow < colon) {
        return std::nullopt;
    }
    const auto server = parse_unsigned<std::size_t>(trim(value.substr(0, colon)));
    const auto from = parse_codepoint(trim(value.substr(colon + 1, arrow - colon - 1)));
    const auto to = parse_codepoint(trim(value.substr(arrow + 2)));
    if (!server || !from || !to) {
        return std::nullopt;
    }
    return ServerBugEntry{*server, *from, *to};
}

std::string join_issues(const std::vector<ConfigIssue>& issues) {
    std::string out;
    for (const auto& i : issues) {
        if (!out.empty()) {
            out += '\n';
        }
        out += i.field + " " + i.reason;
    }
    return out;
}

std::optional<EncapMode> parse_ingress(std::string_view name) {
    const std::string s = lower(trim(name));
    if (s == "copy") {
        return EncapMode::CopyExact;
    }
    if (s == "zero") {
        return EncapMode::ZeroOuter;
    }
    if (s == "rfc3168full") {
        return EncapMode::Rfc3168Full;
    }
    return std::nullopt;
}

std::optional<ProbeCapability> parse_capability(std::string_view name) {
    const std::string s = lower(trim(name));
    if (s == "full") {
        return ProbeCapability::Full;
    }
    if (s == "ce_only") {
        return ProbeCapability::CeOnly;
    }
    return std::nullopt;
}

std::optional<FeedbackTransport> parse_transport(std::string_view name) {
    const std::string s = lower(trim(name));
    if (s == "tcp") {
        return FeedbackTransport::Tcp;
    }
    if (s == "quic") {
        return FeedbackTransport::Quic;
    }
    return std::nullopt;
}

} // namespace

ConfigError::ConfigError(std::vector<ConfigIssue> issues)
    : std::runtime_error(join_issues(issues)), issues_(std::move(issues)) {}

ConfigError::ConfigError(std::string field, std::string reason)
    : ConfigError(std::vector<ConfigIssue>{{std::move(field), std::move(reason)}}) {}

ScenarioConfig parse_config(std::string_view text) {
    ScenarioConfig config;
    std::vector<ConfigIssue> issues;
    std::set<std::string> seen;

    std::size_t line_no = 0;
    std::size_t pos = 0;
    while (pos < text.size()) {
        std::size_t end = text.find('\n', pos);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        std::string_view line = text.substr(pos, end - pos);
        pos = end + 1;
        ++line_no;

        if (const auto hash = line.find('#'); hash != std::string_view::npos) {
            line = line.substr(0, hash);
        }
        line = trim(line);
        if (line.empty()) {
            continue;
        }

        const auto eq = line.find('=');
        if (eq == std::string_view::npos) {
            issues.push_back({"line " + std::to_string(line_no), "is not of the form 'key = value'"});
            continue;
        }
        const std::string key = lower(trim(line.substr(0, eq)));
        const std::string_view value = trim(line.substr(eq + 1));

        if (!kKnownKeys.contains(key)) {
            issues.push_back({key, "is not a recognised key"});
            continue;
        }
        if (key != "server_bug" && !seen.insert(key).second) {
            issues.push_back({key, "is set more than once"});
            continue;
        }

        auto bad = [&](const char* why) { issues.push_back({key, why}); };

        if (key == "ingress") {
            config.ingress = std::string(value);
        } else if (key == "egress") {
            config.egress = std::string(value);
        } else if (key == "capability") {
            config.capability = std::string(value);
        } else if (key == "transport") {
            config.transport = std::string(value);
        } else if (key == "aqm_ce_probability" || key == "loss_probability") {
            const auto v = parse_real(value);
            if (!v) {
                bad("is not a number");
            } else {
                (key == "aqm_ce_probability" ? config.aqm_ce_probability : config.loss_probability) = *v;
            }
        } else if (key == "seed") {
            if (const auto v = parse_unsigned<std::uint64_t>(value)) {
                config.seed = *v;
            } else {
                bad("is not an unsigned 64-bit integer");
            }
        } else if (key == "servers" || key == "repetitions") {
            if (const auto v = parse_unsigned<std::size_t>(value)) {
                (key == "servers" ? config.servers : config.repetitions) = *v;
            } else {
                bad("is not a non-negative integer");
            }
        } else if (key == "mangler_flow") {
            if (lower(value) == "all") {
                config.mangler_flow.reset();
            } else if (const auto v = parse_unsigned<std::size_t>(value)) {
                config.mangler_flow = *v;
            } else {
                bad("is not a server index or 'all'");
            }
        } else if (key == "mangler_retain") {
            if (const auto v = parse_unsigned<unsigned>(value)) {
                config.mangler_retain = *v;
            } else {
                bad("is not an integer mask");
            }
        } else if (key == "server_bug") {
            if (const auto v = parse_server_bug(value)) {
                config.server_bugs.push_back(*v);
            } else {
                bad("is not of the form '<server>: <codepoint> -> <codepoint>'");
            }
        }
    }

    if (!issues.empty()) {
        throw ConfigError(std::move(issues));
    }
    return config;
}

ScenarioConfig load_config_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw ConfigError("config", "file '" + path + "' cannot be read");
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

std::vector<std::pair<std::string, std::string>> config_entries(const ScenarioConfig& config) {
    std::vector<std::pair<std::string, std::string>> out = {
        {"ingress", config.ingress},
        {"egress", config.egress},
        {"aqm_ce_probability", format_real(config.aqm_ce_probability)},
        {"loss_probability", format_real(config.loss_probability)},
        {"seed", std::to_string(config.seed)},
        {"servers", std::to_string(config.servers)},
        {"repetitions", std::to_string(config.repetitions)},
        {"capability", config.capability},
        {"transport", config.transport},
        {"mangler_flow", config.mangler_flow ? std::to_string(*config.mangler_flow) : "all"},
        {"mangler_retain", std::to_string(config.mangler_retain)},
    };
    for (const auto& bug : config.server_bugs) {
        out.emplace_back("server_bug", std::to_string(bug.server) + ": " + std::string(to_string(bug.from)) +
                                           " -> " + std::string(to_string(bug.to)));
    }
    return out;
}

std::string format_config(const ScenarioConfig& config) {
    std::string out;
    for (const auto& [k, v] : config_entries(config)) {
        out += k + " = " + v + "\n";
    }
    return out;
}

DecapPolicy parse_egress(std::string_view name) {
    const std::string_view trimmed = trim(name);
    const std::string s = lower(trimmed);
    if (const auto cls = parse_behavior_class(s); cls && *cls != DecapBehaviorClass::Mangled) {
        return DecapPolicy::standard(*cls);
    }
    if (s == "zero-all") {
        return DecapPolicy::zero_all();
    }
    if (s == "copy-outer") {
        return DecapPolicy::copy_outer();
    }
    if (s.starts_with("random:")) {
        const auto seed = parse_unsigned<std::uint64_t>(trim(std::string_view(s).substr(7)));
        if (!seed) {
            throw PolicyError("random egress needs an unsigned seed, e.g. 'random:7'");
        }
        return DecapPolicy::random_fixed(*seed);
    }
    if (s.starts_with("custom:")) {
        return DecapPolicy::custom(parse_decap_table(trimmed.substr(7)));
    }
    throw PolicyError("unknown egress '" + std::string(trimmed) + "'");
}

namespace {

struct Validated {
    std::optional<Scenario> scenario;
    std::optional<ProbeCapability> capability;
};

Validated validate(const ScenarioConfig& config) {
    std::vector<ConfigIssue> issues;

    const auto ingress = parse_ingress(config.ingress);
    if (!ingress) {
        issues.push_back({"ingress", "'" + config.ingress + "' is not one of copy, zero, rfc3168full"});
    }

    std::optional<DecapPolicy> egress;
    try {
        egress = parse_egress(config.egress);
    } catch (const PolicyError& e) {
        issues.push_back({"egress", e.what()});
    }

    auto check_probability = [&](const char* field, double p) {
        if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
            issues.push_back({field, "out of range [0, 1]: " + format_real(p)});
        }
    };
    check_probability("aqm_ce_probability", config.aqm_ce_probability);
    check_probability("loss_probability", config.loss_probability);

    if (config.servers == 0) {
        issues.push_back({"servers", "must be at least 1"});
    }
    if (config.repetitions == 0) {
        issues.push_back({"repetitions", "must be at least 1"});
    }
    const auto capability = parse_capability(config.capability);
    if (!capability) {
        issues.push_back({"capability", "'" + config.capability + "' is not one of full, ce_only"});
    }
    const auto transport = parse_transport(config.transport);
    if (!transport) {
        issues.push_back({"transport", "'" + config.transport + "' is not one of tcp, quic"});
    }
    if (config.mangler_flow && *config.mangler_flow >= config.servers) {
        issues.push_back({"mangler_flow", "refers to server " + std::to_string(*config.mangler_flow) +
                                              " but only " + std::to_string(config.servers) + " exist"});
    }
    if (config.mangler_retain > 0xFF) {
        issues.push_back({"mangler_retain", "does not fit in one octet"});
    }
    for (const auto& bug : config.server_bugs) {
        if (bug.server >= config.servers) {
            issues.push_back({"server_bug", "refers to server " + std::to_string(bug.server) + " but only " +
                                                std::to_string(config.servers) + " exist"});
        }
    }

    if (!issues.empty()) {
        throw ConfigError(std::move(issues));
    }

    Scenario scenario;
    scenario.ingress = EncapPolicy{*ingress};
    scenario.egress = *egress;
    scenario.aqm_ce_probability = config.aqm_ce_probability;
    scenario.loss_probability = config.loss_probability;
    scenario.seed = config.seed;
    scenario.servers = config.servers;
    scenario.transport = *transport;
    scenario.mangler = ManglerRule{config.mangler_flow, 0, static_cast<std::uint8_t>(config.mangler_retain)};
    for (const auto& bug : config.server_bugs) {
        scenario.server_bugs[bug.server][bug.from] = bug.to;
    }
    return Validated{std::move(scenario), capability};
}

} // namespace

Scenario build_scenario(const ScenarioConfig& config) {
    return std::move(*validate(config).scenario);
}

ProbeSession build_session(const ScenarioConfig& config) {
    Validated v = validate(config);
    return ProbeSession{std::move(*v.scenario), ProbeSettings{config.repetitions, *v.capability}};
}

} // namespace ecnprobe
