#include <gtest/gtest.h>

#include <set>

#include "transferlab/errors.hpp"
#include "transferlab/gallery.hpp"

using namespace transferlab;

namespace {

using E = Expectation;

Verdict as_verdict(E e) {
    switch (e) {
        case E::evidence_for: return Verdict::evidence_for;
        case E::evidence_against: return Verdict::evidence_against;
        default: return Verdict::inconclusive;
    }
}

}  // namespace

TEST(Gallery, RosterAndIds) {
    const auto& g = list_gallery();
    EXPECT_GE(g.size(), 13u);
    std::set<std::string> ids;
    for (const auto& e : g) ids.insert(e.id);
    EXPECT_EQ(ids.size(), g.size());
    for (const char* id :
         {"bernoulli_convolution", "expanding_ifs_23", "rotations_irrational_diff", "rotations_rational_diff",
          "rotations_rational", "additive_pinned_zero", "alternating_halves", "mult_contraction", "mult_jump",
          "mult_doubling", "blend_gradient_sinks", "direct_sum_expanding_contracting", "two_sink_additive",
          "deterministic_doubling", "deterministic_rational_rotation"})
        EXPECT_TRUE(ids.count(id)) << id;
    EXPECT_EQ(&list_gallery(), &g);
}

TEST(Gallery, ListExamples) {
    const auto& b = gallery_entry("bernoulli_convolution");
    EXPECT_EQ(b.expectation(ClassTag::AC), E::evidence_for);
    EXPECT_EQ(b.expectation(ClassTag::C), E::evidence_against);
    const auto& p = gallery_entry("additive_pinned_zero");
    EXPECT_EQ(p.expectation(ClassTag::UC), E::evidence_for);
    EXPECT_EQ(p.expectation(ClassTag::D), E::evidence_against);
    const auto& a = gallery_entry("alternating_halves");
    EXPECT_EQ(a.expectation(ClassTag::D), E::evidence_for);
    EXPECT_EQ(a.expectation(ClassTag::Dstar), E::evidence_against);
}

TEST(Gallery, ExpectedReportExamples) {
    const auto ir = expected_report("rotations_irrational_diff");
    EXPECT_EQ(ir.at(ClassTag::C), E::evidence_for);
    const auto rd = expected_report("rotations_rational_diff");
    EXPECT_EQ(rd.at(ClassTag::MC), E::evidence_for);
    EXPECT_EQ(rd.at(ClassTag::AC), E::evidence_against);
    const auto ifs = expected_report("expanding_ifs_23");
    EXPECT_EQ(ifs.at(ClassTag::C), E::evidence_for);
    EXPECT_EQ(ifs.at(ClassTag::UC), E::evidence_against);
    EXPECT_EQ(expected_report("mult_contraction").at(ClassTag::S), E::evidence_against);
    EXPECT_EQ(expected_report("mult_jump").at(ClassTag::S), E::evidence_against);
    EXPECT_EQ(expected_report("mult_doubling").at(ClassTag::C), E::evidence_for);
    const auto ds = expected_report("direct_sum_expanding_contracting");
    EXPECT_EQ(ds.at(ClassTag::S), E::evidence_for);
    EXPECT_EQ(ds.at(ClassTag::WAP), E::evidence_against);
    const auto rr = expected_report("rotations_rational");
    EXPECT_EQ(rr.at(ClassTag::WAP), E::evidence_for);
    EXPECT_EQ(rr.at(ClassTag::MC), E::evidence_against);
    const auto dr = expected_report("deterministic_rational_rotation");
    EXPECT_EQ(dr.at(ClassTag::WAP), E::evidence_for);
    EXPECT_EQ(dr.at(ClassTag::MC), E::evidence_against);
    EXPECT_EQ(gallery_entry("two_sink_additive").expected_components_min, 2);
}

TEST(Gallery, UnknownId) {
    EXPECT_THROW(gallery_entry("no_such_system"), UnknownId);
    EXPECT_THROW(expected_report("no_such_system"), UnknownId);
}

TEST(Gallery, ExpectedMapsAreHierarchyConsistent) {
    for (const auto& e : list_gallery()) {
        ClassificationReport r;
        for (const auto& [t, x] : e.expected) {
            ProbeResult p;
            p.class_tag = t;
            p.verdict = as_verdict(x);
            r.probes.push_back(p);
        }
        EXPECT_TRUE(hierarchy_consistent(r)) << e.id;
    }
}

TEST(Gallery, OnlyGradientSystemIsExploratory) {
    for (const auto& e : list_gallery()) EXPECT_EQ(e.exploratory, e.id == "blend_gradient_sinks") << e.id;
    EXPECT_FALSE(gallery_entry("blend_gradient_sinks").system.exact_maps());
}

TEST(Gallery, EntriesValidateAndRoundTrip) {
    for (const auto& e : list_gallery()) {
        EXPECT_NO_THROW(validate_system(e.system)) << e.id;
        EXPECT_EQ(e.system.id, e.id);
        const auto again = system_from_json(e.spec);
        EXPECT_EQ(system_to_json(again), system_to_json(e.system)) << e.id;
        EXPECT_FALSE(e.notes.empty()) << e.id;
    }
}

TEST(Gallery, IrrationalAnglesStaySymbolic) {
    const auto j = gallery_entry("rotations_irrational_diff").spec.dump();
    EXPECT_NE(j.find("sqrt2_over_2"), std::string::npos);
}

TEST(Gallery, MatchesExpected) {
    const auto& e = gallery_entry("alternating_halves");
    ClassificationReport r;
    ProbeResult d, ds;
    d.class_tag = ClassTag::D;
    d.verdict = Verdict::evidence_for;
    ds.class_tag = ClassTag::Dstar;
    ds.verdict = Verdict::inconclusive;
    r.probes = {d, ds};
    std::string why;
    EXPECT_FALSE(matches_expected(e, r, &why));
    EXPECT_NE(why.find("Dstar"), std::string::npos);
    r.probes[1].verdict = Verdict::evidence_against;
    EXPECT_TRUE(matches_expected(e, r));
}
