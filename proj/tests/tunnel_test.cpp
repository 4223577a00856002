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

#include <gtest/gtest.h>

#include <map>
#include <random>
#include <set>
#include <string>

namespace ecnprobe {
namespace {

using Cp = EcnCodepoint;
using Cls = DecapBehaviorClass;

DecapOutcome F(Cp cp) { return DecapOutcome::forwarded(cp); }
const DecapOutcome D = DecapOutcome::dropped();

// Expected main-test outcome per class (rows: Initial/Outer probes).
struct ReferenceRow {
    Cp initial;
    Cp outer;
    DecapOutcome rfc6040, rfc4301, rfc3168, rfc2003;
};

const ReferenceRow kReferenceRows[] = {
    {Cp::NotEct, Cp::Ce, D, F(Cp::NotEct), D, F(Cp::NotEct)},
    {Cp::Ect1, Cp::Ce, F(Cp::Ce), F(Cp::Ce), F(Cp::Ce), F(Cp::Ect1)},
    {Cp::Ect0, Cp::Ce, F(Cp::Ce), F(Cp::Ce), F(Cp::Ce), F(Cp::Ect0)},
    {Cp::Ect0, Cp::Ect1, F(Cp::Ect1), F(Cp::Ect0), F(Cp::Ect0), F(Cp::Ect0)},
};

// Full decap matrices transcribed from the RFC decapsulation rules.
// Rows are Inner, columns Outer, both in the order Not-ECT, ECT(1), ECT(0), CE.
const std::map<Cls, std::array<std::array<const char*, 4>, 4>> kRfcMatrices = {
    {Cls::Rfc6040,
     {{{"Not-ECT", "Not-ECT", "Not-ECT", "dropped"},
       {"ECT(1)", "ECT(1)", "ECT(1)", "CE"},
       {"ECT(0)", "ECT(1)", "ECT(0)", "CE"},
       {"CE", "CE", "CE", "CE"}}}},
    {Cls::Rfc4301,
     {{{"Not-ECT", "Not-ECT", "Not-ECT", "Not-ECT"},
       {"ECT(1)", "ECT(1)", "ECT(1)", "CE"},
       {"ECT(0)", "ECT(0)", "ECT(0)", "CE"},
       {"CE", "CE", "CE", "CE"}}}},
    {Cls::Rfc3168,
     {{{"Not-ECT", "Not-ECT", "Not-ECT", "dropped"},
       {"ECT(1)", "ECT(1)", "ECT(1)", "CE"},
       {"ECT(0)", "ECT(0)", "ECT(0)", "CE"},
       {"CE", "CE", "CE", "CE"}}}},
    {Cls::Rfc2003Simple,
     {{{"Not-ECT", "Not-ECT", "Not-ECT", "Not-ECT"},
       {"ECT(1)", "ECT(1)", "ECT(1)", "ECT(1)"},
       {"ECT(0)", "ECT(0)", "ECT(0)", "ECT(0)"},
       {"CE", "CE", "CE", "CE"}}}},
};

TEST(DecapOutcomeTest, OrderIsTieBreakOrder) {
    EXPECT_LT(D, F(Cp::NotEct));
    EXPECT_LT(F(Cp::NotEct), F(Cp::Ect1));
    EXPECT_LT(F(Cp::Ect1), F(Cp::Ect0));
    EXPECT_LT(F(Cp::Ect0), F(Cp::Ce));
    for (std::size_t r = 0; r < kOutcomeCount; ++r) {
        EXPECT_EQ(DecapOutcome::from_rank(r).rank(), r);
    }
    EXPECT_TRUE(DecapOutcome().is_dropped());
}

TEST(DecapOutcomeTest, ForwardedCarriesCodepoint) {
    for (auto cp : kAllCodepoints) {
        EXPECT_TRUE(F(cp).is_forwarded());
        EXPECT_EQ(F(cp).codepoint(), cp);
        EXPECT_EQ(parse_outcome(to_string(F(cp))), F(cp));
    }
    EXPECT_EQ(parse_outcome("dropped"), D);
    EXPECT_EQ(parse_outcome("drop"), D);
    EXPECT_FALSE(parse_outcome("lost").has_value());
}

TEST(DecapTest, MatchesReferenceOutcomes) {
    for (const auto& row : kReferenceRows) {
        EXPECT_EQ(decap(DecapPolicy::standard(Cls::Rfc6040), row.initial, row.outer), row.rfc6040);
        EXPECT_EQ(decap(DecapPolicy::standard(Cls::Rfc4301), row.initial, row.outer), row.rfc4301);
        EXPECT_EQ(decap(DecapPolicy::standard(Cls::Rfc3168), row.initial, row.outer), row.rfc3168);
        EXPECT_EQ(decap(DecapPolicy::standard(Cls::Rfc2003Simple), row.initial, row.outer), row.rfc2003);
    }
}

TEST(DecapTest, Examples) {
    EXPECT_EQ(decap(DecapPolicy::standard(Cls::Rfc6040), Cp::NotEct, Cp::Ce), D);
    EXPECT_EQ(decap(DecapPolicy::standard(Cls::Rfc4301), Cp::NotEct, Cp::Ce), F(Cp::NotEct));
    EXPECT_EQ(decap(DecapPolicy::standard(Cls::Rfc6040), Cp::Ect0, Cp::Ect1), F(Cp::Ect1));
    EXPECT_EQ(decap(DecapPolicy::standard(Cls::Rfc2003Simple), Cp::Ect1, Cp::Ce), F(Cp::Ect1));
}

TEST(BehaviorProfileTest, EveryCellMatchesRfcMatrix) {
    for (const auto& [cls, matrix] : kRfcMatrices) {
        const auto& profile = behavior_profile(DecapPolicy::standard(cls));
        for (std::size_t i = 0; i < 4; ++i) {
            for (std::size_t o = 0; o < 4; ++o) {
                const Cp inner = codepoint_from_bits(static_cast<std::uint8_t>(i));
                const Cp outer = codepoint_from_bits(static_cast<std::uint8_t>(o));
                EXPECT_EQ(to_string(profile[cell_index(inner, outer)]), matrix[i][o])
                    << to_string(cls) << " inner=" << to_string(inner) << " outer=" << to_string(outer);
            }
        }
    }
}

TEST(BehaviorProfileTest, Examples) {
    for (auto inner : kAllCodepoints) {
        for (auto outer : kAllCodepoints) {
            EXPECT_EQ(behavior_profile(DecapPolicy::standard(Cls::Rfc2003Simple))[cell_index(inner, outer)],
                      F(inner));
        }
    }
    EXPECT_EQ(behavior_profile(DecapPolicy::standard(Cls::Rfc6040))[cell_index(Cp::Ce, Cp::Ect0)], F(Cp::Ce));
    EXPECT_EQ(behavior_profile(DecapPolicy::standard(Cls::Rfc3168))[cell_index(Cp::NotEct, Cp::Ce)], D);
}

TEST(BehaviorProfileTest, CeInnerSurvivesExceptSimpleTunnel) {
    for (auto cls : kStandardClasses) {
        for (auto outer : kAllCodepoints) {
            EXPECT_EQ(DecapPolicy::standard(cls).decap(Cp::Ce, outer), F(Cp::Ce));
        }
    }
}

TEST(DecapPolicyTest, MangledHasNoStandardTable) {
    EXPECT_THROW(DecapPolicy::standard(Cls::Mangled), PolicyError);
    EXPECT_EQ(DecapPolicy::zero_all().behavior_class(), Cls::Mangled);
    EXPECT_EQ(DecapPolicy::copy_outer().behavior_class(), Cls::Mangled);
}

TEST(DecapPolicyTest, BuiltInMangledEgresses) {
    const auto zero = DecapPolicy::zero_all();
    const auto copy = DecapPolicy::copy_outer();
    for (auto inner : kAllCodepoints) {
        for (auto outer : kAllCodepoints) {
            EXPECT_EQ(zero.decap(inner, outer), F(Cp::NotEct));
            EXPECT_EQ(copy.decap(inner, outer), F(outer));
        }
    }
}

TEST(DecapPolicyTest, RandomFixedIsSeeded) {
    EXPECT_EQ(DecapPolicy::random_fixed(7).table(), DecapPolicy::random_fixed(7).table());
    EXPECT_NE(DecapPolicy::random_fixed(7).table(), DecapPolicy::random_fixed(8).table());
    EXPECT_EQ(DecapPolicy::random_fixed(7).name(), "random:7");
}

TEST(DecapTableTextTest, RoundTripsRandomTables) {
    std::mt19937_64 rng(12345);
    for (int trial = 0; trial < 200; ++trial) {
        DecapTable t{};
        for (auto& cell : t) {
            cell = DecapOutcome::from_rank(rng() % kOutcomeCount);
        }
        const std::string text = format_decap_table(t);
        EXPECT_EQ(parse_decap_table(text), t);
        EXPECT_EQ(format_decap_table(parse_decap_table(text)), text);
    }
}

TEST(DecapTableTextTest, AcceptsNewlinesAndLooseSpelling) {
    std::string text;
    for (auto inner : kAllCodepoints) {
        for (auto outer : kAllCodepoints) {
            text += std::string(to_string(inner)) + " , " + std::string(to_string(outer)) + " -> drop\n";
        }
    }
    const DecapTable t = parse_decap_table(text);
    for (const auto& cell : t) {
        EXPECT_EQ(cell, D);
    }
}

TEST(DecapTableTextTest, RejectsIncompleteOrDuplicateTables) {
    const std::string full = format_decap_table(DecapPolicy::zero_all().table());
    const std::string fifteen = full.substr(0, full.rfind(';'));
    EXPECT_THROW(parse_decap_table(fifteen), PolicyError);
    EXPECT_THROW(parse_decap_table(full + "; CE,CE -> CE"), PolicyError);
    EXPECT_THROW(parse_decap_table("CE CE CE"), PolicyError);
    EXPECT_THROW(parse_decap_table("CE,XX -> CE"), PolicyError);
    EXPECT_THROW(parse_decap_table(""), PolicyError);
}

TEST(DecapPolicyTest, CustomKeepsTable) {
    const auto p = DecapPolicy::custom(DecapPolicy::standard(Cls::Rfc6040).table());
    EXPECT_EQ(p.behavior_class(), Cls::Mangled);
    EXPECT_EQ(p.table(), DecapPolicy::standard(Cls::Rfc6040).table());
}

TEST(EncapTest, Examples) {
    auto h = encap(EncapPolicy{EncapMode::CopyExact}, Cp::Ce);
    EXPECT_EQ(h.inner.ecn(), Cp::Ce);
    EXPECT_EQ(h.outer->ecn(), Cp::Ce);

    h = encap(EncapPolicy{EncapMode::ZeroOuter}, Cp::Ect0);
    EXPECT_EQ(h.inner.ecn(), Cp::Ect0);
    EXPECT_EQ(h.outer->ecn(), Cp::NotEct);

    h = encap(EncapPolicy{EncapMode::Rfc3168Full}, Cp::NotEct);
    EXPECT_EQ(h.inner.ecn(), Cp::NotEct);
    EXPECT_EQ(h.outer->ecn(), Cp::NotEct);

    h = encap(EncapPolicy{EncapMode::Rfc3168Full}, Cp::Ce);
    EXPECT_EQ(h.outer->ecn(), Cp::Ect0);
}

TEST(EncapTest, InnerIsNeverAltered) {
    for (auto mode : {EncapMode::CopyExact, EncapMode::ZeroOuter, EncapMode::Rfc3168Full}) {
        for (unsigned v = 0; v < 256; ++v) {
            const TrafficClassOctet initial(static_cast<std::uint8_t>(v));
            const HeaderStack h = encap(EncapPolicy{mode}, initial);
            EXPECT_EQ(h.inner, initial);
            ASSERT_TRUE(h.outer.has_value());
            EXPECT_EQ(h.outer->dscp(), initial.dscp());
        }
    }
}

TEST(ReferenceSignatureTest, Examples) {
    EXPECT_EQ(reference_signature(Cls::Rfc6040, ProbeCapability::Full),
              (ProbeSignature{D, F(Cp::Ce), F(Cp::Ce), F(Cp::Ect1)}));
    EXPECT_EQ(reference_signature(Cls::Rfc2003Simple, ProbeCapability::Full),
              (ProbeSignature{F(Cp::NotEct), F(Cp::Ect1), F(Cp::Ect0), F(Cp::Ect0)}));
    EXPECT_EQ(reference_signature(Cls::Rfc3168, ProbeCapability::CeOnly),
              (ProbeSignature{D, F(Cp::Ce), F(Cp::Ce)}));
    EXPECT_THROW(reference_signature(Cls::Mangled, ProbeCapability::Full), NoSignature);
}

TEST(ReferenceSignatureTest, DistinctWithFullCapability) {
    std::set<ProbeSignature> seen;
    for (auto cls : kStandardClasses) {
        EXPECT_TRUE(seen.insert(reference_signature(cls, ProbeCapability::Full)).second) << to_string(cls);
    }
}

TEST(ReferenceSignatureTest, CeOnlyCollidesExactlyForRfc6040AndRfc3168) {
    const auto s6040 = reference_signature(Cls::Rfc6040, ProbeCapability::CeOnly);
    const auto s3168 = reference_signature(Cls::Rfc3168, ProbeCapability::CeOnly);
    const auto s4301 = reference_signature(Cls::Rfc4301, ProbeCapability::CeOnly);
    const auto s2003 = reference_signature(Cls::Rfc2003Simple, ProbeCapability::CeOnly);
    EXPECT_EQ(s6040.size(), 3u);
    EXPECT_EQ(s6040, s3168);
    EXPECT_NE(s6040, s4301);
    EXPECT_NE(s6040, s2003);
    EXPECT_NE(s4301, s2003);
}

TEST(BehaviorClassTest, GreenSubset) {
    EXPECT_TRUE(propagates_correctly(Cls::Rfc6040));
    EXPECT_TRUE(propagates_correctly(Cls::Rfc4301));
    EXPECT_TRUE(propagates_correctly(Cls::Rfc3168));
    EXPECT_FALSE(propagates_correctly(Cls::Rfc2003Simple));
    EXPECT_FALSE(propagates_correctly(Cls::Mangled));
    for (auto c : {Cls::Rfc6040, Cls::Rfc4301, Cls::Rfc3168, Cls::Rfc2003Simple, Cls::Mangled}) {
        EXPECT_EQ(parse_behavior_class(to_string(c)), c);
    }
}

} // namespace
} // namespace ecnprobe
