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

#include "ecnprobe/ecn.hpp"

#include <algorithm>
#include <cctype>
#include <string>

namespace ecnprobe {

namespace {

std::string normalize(std::string_view text) {
    std::string out;
    out.reserve(text.size());
    for (char c : text) {
        if (c == ' ' || c == '\t') {
            continue;
        }
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    }
    return out;
}

} // namespace

std::string_view to_string(EcnCodepoint cp) noexcept {
    switch (cp) {
    case EcnCodepoint::NotEct:
        return "Not-ECT";
    case EcnCodepoint::Ect1:
        return "ECT(1)";
    case EcnCodepoint::Ect0:
        return "ECT(0)";
    case EcnCodepoint::Ce:
        return "CE";
    }
    return "?";
}

std::optional<EcnCodepoint> parse_codepoint(std::string_view text) noexcept {
    const std::string s = normalize(text);
    if (s == "not-ect" || s == "notect" || s == "not_ect") {
        return EcnCodepoint::NotEct;
    }
    if (s == "ect(1)" || s == "ect1") {
        return EcnCodepoint::Ect1;
    }
    if (s == "ect(0)" || s == "ect0") {
        return EcnCodepoint::Ect0;
    }
    if (s == "ce") {
        return EcnCodepoint::Ce;
    }
    return std::nullopt;
}

std::string_view to_string(PathLocation loc) noexcept {
    switch (loc) {
    case PathLocation::Initial:
        return "INITIAL";
    case PathLocation::Inner:
        return "INNER";
    case PathLocation::Outer:
        return "OUTER";
    case PathLocation::Onward:
        return "ONWARD";
    }
    return "?";
}

std::optional<PathLocation> parse_location(std::string_view text) noexcept {
    auto it = std::find_if(kAllLocations.begin(), kAllLocations.end(),
                           [&](PathLocation l) { return to_string(l) == text; });
    if (it == kAllLocations.end()) {
        return std::nullopt;
    }
    return *it;
}

} // namespace ecnprobe
