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

#include "ecnprobe/tunnel.hpp"

#include <algorithm>
#include <cctype>
#include <random>
#include <sstream>

namespace ecnprobe {

namespace {

using Cp = EcnCodepoint;

constexpr DecapOutcome fwd(Cp cp) { return DecapOutcome::forwarded(cp); }
constexpr DecapOutcome drop() { return DecapOutcome::dropped(); }

template <typename Rule>
DecapTable build_table(Rule rule) {
    DecapTable t{};
    for (Cp inner : kAllCodepoints) {
        for (Cp outer : kAllCodepoints) {
            t[cell_index(inner, outer)] = rule(inner, outer);
        }
    }
    return t;
}

// RFC 2003: the outer is discarded, the inner leaves unchanged.
DecapOutcome rfc2003_rule(Cp inner, Cp /*outer*/) { return fwd(inner); }

// RFC 3168 full functionality: a CE outer is copied onto an ECT inner and
// causes a Not-ECT inner to be dropped; any other outer is ignored.
DecapOutcome rfc3168_rule(Cp inner, Cp outer) {
    if (outer != Cp::Ce) {
        return fwd(inner);
    }
    if (inner == Cp::NotEct) {
        return drop();
    }
    return fwd(Cp::Ce);
}

// RFC 4301: a CE outer is copied onto an ECT inner; otherwise no change, so a
// Not-ECT inner is forwarded even when the outer is CE.
DecapOutcome rfc4301_rule(Cp inner, Cp outer) {
    if (outer == Cp::Ce && is_ect(inner)) {
        return fwd(Cp::Ce);
    }
    return fwd(inner);
}

// RFC 6040 decapsulation table:
//
//   inner \ outer   Not-ECT  ECT(0)   ECT(1)   CE
//   Not-ECT         Not-ECT  Not-ECT  Not-ECT  drop
//   ECT(0)          ECT(0)   ECT(0)   ECT(1)   CE
//   ECT(1)          ECT(1)   ECT(1)   ECT(1)   CE
//   CE              CE       CE       CE       CE
DecapOutcome rfc6040_rule(Cp inner, Cp outer) {
    if (inner == Cp::NotEct) {
        return outer == Cp::Ce ? drop() : fwd(Cp::NotEct);
    }
    if (inner == Cp::Ce || outer == Cp::Ce) {
        return fwd(Cp::Ce);
    }
    if (inner == Cp::Ect0 && outer == Cp::Ect1) {
        return fwd(Cp::Ect1);
    }
    return fwd(inner);
}

std::string lower(std::string_view s) {
    std::string out(s);
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

std::string_view trim(std::string_view s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) {
        return {};
    }
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

} // namespace

std::string_view to_string(DecapBehaviorClass c) noexcept {
    switch (c) {
    case DecapBehaviorClass::Rfc6040:
        return "RFC6040";
    case DecapBehaviorClass::Rfc4301:
        return "RFC4301";
    case DecapBehaviorClass::Rfc3168:
        return "RFC3168";
    case DecapBehaviorClass::Rfc2003Simple:
        return "RFC2003";
    case DecapBehaviorClass::Mangled:
        return "mangled";
    }
    return "?";
}

std::optional<DecapBehaviorClass> parse_behavior_class(std::string_view text) noexcept {
    const std::string s = lower(trim(text));
    if (s == "rfc6040") {
        return DecapBehaviorClass::Rfc6040;
    }
    if (s == "rfc4301") {
        return DecapBehaviorClass::Rfc4301;
    }
    if (s == "rfc3168") {
        return DecapBehaviorClass::Rfc3168;
    }
    if (s == "rfc2003" || s == "rfc2003simple") {
        return DecapBehaviorClass::Rfc2003Simple;
    }
    if (s == "mangled") {
        return DecapBehaviorClass::Mangled;
    }
    return std::nullopt;
}

std::string_view to_string(DecapOutcome o) noexcept {
    return o.is_dropped() ? std::string_view("dropped") : to_string(o.codepoint());
}

std::optional<DecapOutcome> parse_outcome(std::string_view text) noexcept {
    const std::string s = lower(trim(text));
    if (s == "dropped" || s == "drop") {
        return DecapOutcome::dropped();
    }
    if (auto cp = parse_codepoint(s)) {
        return DecapOutcome::forwarded(*cp);
    }
    return std::nullopt;
}

DecapPolicy DecapPolicy::standard(DecapBehaviorClass c) {
    switch (c) {
    case DecapBehaviorClass::Rfc6040:
        return DecapPolicy(c, "rfc6040", build_table(rfc6040_rule));
    case DecapBehaviorClass::Rfc4301:
        return DecapPolicy(c, "rfc4301", build_table(rfc4301_rule));
    case DecapBehaviorClass::Rfc3168:
        return DecapPolicy(c, "rfc3168", build_table(rfc3168_rule));
    case DecapBehaviorClass::Rfc2003Simple:
        return DecapPolicy(c, "rfc2003", build_table(rfc2003_rule));
    case DecapBehaviorClass::Mangled:
        break;
    }
    throw PolicyError("mangled egresses have no standard decapsulation table");
}

DecapPolicy DecapPolicy::zero_all() {
    return DecapPolicy(DecapBehaviorClass::Mangled, "zero-all",
                       build_table([](Cp, Cp) { return fwd(Cp::NotEct); }));
}

DecapPolicy DecapPolicy::copy_outer() {
    return DecapPolicy(DecapBehaviorClass::Mangled, "copy-outer",
                       build_table([](Cp, Cp outer) { return fwd(outer); }));
}

DecapPolicy DecapPolicy::random_fixed(std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    DecapTable t{};
    for (auto& cell : t) {
        cell = DecapOutcome::from_rank(rng() % kOutcomeCount);
    }
    return DecapPolicy(DecapBehaviorClass::Mangled, "random:" + std::to_string(seed), t);
}

DecapPolicy DecapPolicy::custom(const DecapTable& table) {
    return DecapPolicy(DecapBehaviorClass::Mangled, "custom:" + format_decap_table(table), table);
}

std::string format_decap_table(const DecapTable& table) {
    std::ostringstream os;
    bool first = true;
    for (Cp inner : kAllCodepoints) {
        for (Cp outer : kAllCodepoints) {
            if (!first) {
                os << "; ";
            }
            first = false;
            os << to_string(inner) << ',' << to_string(outer) << " -> "
               << to_string(table[cell_index(inner, outer)]);
        }
    }
    return os.str();
}

DecapTable parse_decap_table(std::string_view text) {
    DecapTable table{};
    std::array<bool, 16> seen{};
    std::size_t rows = 0;

    std::size_t pos = 0;
    while (pos <= text.size()) {
        std::size_t end = text.find_first_of(";\n", pos);
        if (end == std::string_view::npos) {
            end = text.size();
        }
        const std::string_view row = trim(text.substr(pos, end - pos));
        pos = end + 1;
        if (row.empty()) {
            continue;
        }

        const auto arrow = row.find("->");
        const auto comma = row.find(',');
        if (arrow == std::string_view::npos || comma == std::string_view::npos || comma > arrow) {
            throw PolicyError("malformed decap row '" + std::string(row) +
                              "' (expected 'inner,outer -> outcome')");
        }
        const auto inner = parse_codepoint(trim(row.substr(0, comma)));
        const auto outer = parse_codepoint(trim(row.substr(comma + 1, arrow - comma - 1)));
        const auto outcome = parse_outcome(row.substr(arrow + 2));
        if (!inner || !outer || !outcome) {
            throw PolicyError("unrecognised value in decap row '" + std::string(row) + "'");
        }
        const std::size_t idx = cell_index(*inner, *outer);
        if (seen[idx]) {
            throw PolicyError("duplicate decap row for " + std::string(to_string(*inner)) + "," +
                              std::string(to_string(*outer)));
        }
        seen[idx] = true;
        table[idx] = *outcome;
        ++rows;
    }
    if (rows != 16) {
        throw PolicyError("decap table needs 16 rows, got " + std::to_string(rows));
    }
    return table;
}

std::string_view to_string(EncapMode m) noexcept {
    switch (m) {
    case EncapMode::CopyExact:
        return "copy";
    case EncapMode::ZeroOuter:
        return "zero";
    case EncapMode::Rfc3168Full:
        return "rfc3168full";
    }
    return "?";
}

HeaderStack encap(EncapPolicy policy, TrafficClassOctet initial) noexcept {
    // The outer inherits the DSCP in every mode; only its ECN field differs.
    TrafficClassOctet outer = initial;
    switch (policy.mode) {
    case EncapMode::CopyExact:
        break;
    case EncapMode::ZeroOuter:
        outer = initial.with_ecn(Cp::NotEct);
        break;
    case EncapMode::Rfc3168Full:
        if (initial.ecn() == Cp::Ce) {
            outer = initial.with_ecn(Cp::Ect0);
        }
        break;
    }
    return HeaderStack{initial, outer};
}

HeaderStack encap(EncapPolicy policy, EcnCodepoint initial) noexcept {
    return encap(policy, TrafficClassOctet::from_parts(0, initial));
}

std::string_view to_string(ProbeCapability c) noexcept {
    return c == ProbeCapability::Full ? "full" : "ce_only";
}

ProbeSignature reference_signature(DecapBehaviorClass c, ProbeCapability capability) {
    if (c == DecapBehaviorClass::Mangled) {
        throw NoSignature("mangled egresses have no reference signature");
    }
    const DecapPolicy policy = DecapPolicy::standard(c);
    ProbeSignature sig;
    for (std::size_t i = 0; i < probe_row_count(capability); ++i) {
        // Encapsulation never alters the inner, so the inner is the Initial.
        sig.push_back(policy.decap(kProbeRows[i].initial, kProbeRows[i].outer));
    }
    return sig;
}

} // namespace ecnprobe
