#include "transferlab/gallery.hpp"

#include <cmath>
#include <numbers>

#include "transferlab/errors.hpp"

namespace transferlab {

using Json = nlohmann::json;

namespace {

Json affine(double slope, Json intercept, bool wrap = false) {
    return {{"breakpoints", {0.0, 1.0}}, {"pieces", {{slope, intercept}}}, {"wrap", wrap}};
}

Json doubling() {
    return {{"breakpoints", {0.0, 0.5, 1.0}}, {"pieces", {{2.0, 0.0}, {2.0, -1.0}}}, {"wrap", true}};
}

Json tripling() {
    return {{"breakpoints", {0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0}},
            {"pieces", {{3.0, 0.0}, {3.0, -1.0}, {3.0, -2.0}}},
            {"wrap", true}};
}

Json rotation_pair(const std::string& id, Json a, Json b) {
    return {{"id", id},
            {"domain", "circle"},
            {"kind", "finite_ifs"},
            {"branches", {affine(1.0, a, true), affine(1.0, b, true)}},
            {"weights", {0.5, 0.5}}};
}

double potential_slope(double x) {
    const double X = (2.0 / std::numbers::pi) * (x - 0.5);
    if (X == 0.0) return 0.0;
    return (2.0 / std::numbers::pi) * (4.0 * X * X * X * std::sin(1.0 / X) - X * X * std::cos(1.0 / X));
}

double flow_time_one(double x) {
    const int steps = 200;
    const double h = 1.0 / steps;
    for (int k = 0; k < steps; ++k) {
        const double k1 = potential_slope(x - std::floor(x));
        const double k2 = potential_slope(x + 0.5 * h * k1 - std::floor(x + 0.5 * h * k1));
        const double k3 = potential_slope(x + 0.5 * h * k2 - std::floor(x + 0.5 * h * k2));
        const double k4 = potential_slope(x + h * k3 - std::floor(x + h * k3));
        x += h * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0;
    }
    return x;
}

// Time-one map of the gradient flow, tabulated on a uniform knot grid as a lift.
Json gradient_sink_map() {
    const int knots = 1024;
    Json bp = Json::array(), pieces = Json::array();
    std::vector<double> y(knots + 1);
    for (int k = 0; k <= knots; ++k) y[k] = flow_time_one(static_cast<double>(k) / knots);
    for (int k = 0; k <= knots; ++k) bp.push_back(static_cast<double>(k) / knots);
    for (int k = 0; k < knots; ++k) {
        const double x0 = static_cast<double>(k) / knots;
        const double s = (y[k + 1] - y[k]) * knots;
        pieces.push_back({s, y[k] - s * x0});
    }
    return {{"breakpoints", bp}, {"pieces", pieces}, {"wrap", true}, {"exact", false}};
}

using E = Expectation;
constexpr E yes = E::evidence_for;
constexpr E no = E::evidence_against;

GalleryEntry entry(Json spec, std::map<ClassTag, Expectation> expected, std::string notes,
                   std::optional<int> components = std::nullopt, bool exploratory = false) {
    GalleryEntry e;
    e.id = spec.at("id").get<std::string>();
    e.system = system_from_json(spec);
    e.spec = std::move(spec);
    e.expected = std::move(expected);
    e.expected_components_min = components;
    e.notes = std::move(notes);
    e.exploratory = exploratory;
    return e;
}

std::vector<GalleryEntry> build() {
    std::vector<GalleryEntry> g;
    using T = ClassTag;

    g.push_back(entry({{"id", "bernoulli_convolution"},
                       {"kind", "finite_ifs"},
                       {"branches", {affine(0.5, 0.0), affine(0.5, 0.5)}},
                       {"weights", {0.5, 0.5}}},
                      {{T::AC, yes}, {T::C, no}, {T::MC, yes}, {T::S, yes}, {T::UC, no}},
                      "x/2 and x/2+1/2 with equal weights: Lebesgue is stationary, mixing but not exact, and dyadic "
                      "cells stay concentrated forever"));

    g.push_back(entry({{"id", "expanding_ifs_23"},
                       {"domain", "circle"},
                       {"kind", "finite_ifs"},
                       {"branches", {doubling(), tripling()}},
                       {"weights", {0.5, 0.5}}},
                      {{T::C, yes}, {T::UC, no}},
                      "2x and 3x mod 1: expanding, so constrictive; atomic kernel, so not uniformly constrictive"));

    g.push_back(entry(rotation_pair("rotations_irrational_diff", "sqrt2_over_2", 0.0), {{T::C, yes}},
                      "rotations whose angle difference is irrational; angles are machine-precision rationals, so "
                      "the verdict rests on trends across the ladder"));

    g.push_back(entry(rotation_pair("rotations_rational_diff", "sqrt2_over_4", "sqrt2_over_4_plus_half"),
                      {{T::MC, yes}, {T::AC, no}},
                      "rotations whose angle difference is 1/2: mean constrictive, two-point invariant sets "
                      "block asymptotic compactness"));

    g.push_back(entry(rotation_pair("rotations_rational", 0.25, 0.75), {{T::WAP, yes}, {T::MC, no}},
                      "rotations by 1/4 and 3/4: every orbit is 4-periodic, invariant sets of measure 4/N at grid N"));

    g.push_back(entry({{"id", "additive_pinned_zero"},
                       {"domain", "circle"},
                       {"kind", "additive_noise"},
                       {"base", doubling()},
                       {"noise", {{"breakpoints", {0.0, 1.0}}, {"values", {1.0}}}},
                       {"pinned_points", {0.0}},
                       {"fixed_points", {0.0}}},
                      {{T::UC, yes}, {T::D, no}},
                      "uniform additive noise with 0 pinned: a null fixed point breaks Doeblin while the kernel "
                      "stays uniformly constrictive"));

    g.push_back(entry({{"id", "alternating_halves"},
                       {"domain", "circle"},
                       {"kind", "additive_noise"},
                       {"base", {{"breakpoints", {0.0, 0.5, 1.0}}, {"pieces", {{0.0, 0.5}, {0.0, 0.0}}}}},
                       {"noise", {{"breakpoints", {0.0, 0.5, 1.0}}, {"values", {2.0, 0.0}}}}},
                      {{T::D, yes}, {T::Dstar, no}},
                      "each half is sent onto the other half uniformly: Doeblin with period 2"));

    g.push_back(entry({{"id", "mult_contraction"},
                       {"kind", "multiplicative_noise"},
                       {"base", affine(0.5, 0.0)},
                       {"epsilon", 0.5},
                       {"fixed_points", {0.0}}},
                      {{T::S, no}},
                      "f_t(x) = (1 - t/2) x/2: all mass escapes to 0"));

    g.push_back(entry({{"id", "mult_jump"},
                       {"kind", "multiplicative_noise"},
                       {"base", {{"breakpoints", {0.0, 1.0}}, {"pieces", {{0.5, 0.0}}}, {"point_values", {{0.0, 0.5}}}}},
                       {"epsilon", 0.5}},
                      {{T::S, no}},
                      "as mult_contraction but f_0(0) = 1/2, so 0 is not fixed; mass still piles up at 0"));

    g.push_back(entry({{"id", "mult_doubling"},
                       {"domain", "circle"},
                       {"kind", "multiplicative_noise"},
                       {"base", doubling()},
                       {"epsilon", 0.5},
                       {"fixed_points", {0.0}}},
                      {{T::C, yes}},
                      "multiplicative noise over the doubling map"));

    g.push_back(entry({{"id", "blend_gradient_sinks"},
                       {"domain", "circle"},
                       {"kind", "blend_noise"},
                       {"base", gradient_sink_map()}},
                      {},
                      "blend of x with the time-one map of a gradient flow with infinitely many sinks accumulating "
                      "at 1/2; the map is tabulated, detected basins grow with N",
                      std::nullopt, true));

    g.push_back(entry({{"id", "direct_sum_expanding_contracting"},
                       {"kind", "finite_ifs"},
                       {"branches",
                        {{{"breakpoints", {0.0, 0.5, 0.75, 1.0}}, {"pieces", {{0.5, 0.0}, {2.0, -0.5}, {2.0, -1.0}}}},
                         {{"breakpoints", {0.0, 0.5, 2.0 / 3.0, 5.0 / 6.0, 1.0}},
                          {"pieces", {{0.5, 0.0}, {3.0, -1.0}, {3.0, -1.5}, {3.0, -2.0}}}}}},
                       {"weights", {0.5, 0.5}}},
                      {{T::S, yes}, {T::WAP, no}},
                      "contraction to 0 on [0,1/2) next to an expanding block on [1/2,1]"));

    g.push_back(entry({{"id", "two_sink_additive"},
                       {"domain", "circle"},
                       {"kind", "additive_noise"},
                       {"base", {{"breakpoints", {0.0, 0.375, 0.5, 0.625, 1.0}},
                                 {"pieces", {{0.25, 0.1875}, {1.75, -0.375}, {1.75, -0.375}, {0.25, 0.5625}}}}},
                       {"noise", {{"breakpoints", {0.0, 0.0625, 0.9375, 1.0}}, {"values", {8.0, 0.0, 8.0}}}}},
                      {},
                      "sinks at 1/4 and 3/4, repeller at 1/2, noise of size 1/16: two stationary densities",
                      2));

    g.push_back(entry({{"id", "deterministic_doubling"},
                       {"domain", "circle"},
                       {"kind", "deterministic"},
                       {"map", doubling()}},
                      {{T::C, yes}, {T::UC, no}},
                      "the doubling map"));

    g.push_back(entry({{"id", "deterministic_rational_rotation"},
                       {"domain", "circle"},
                       {"kind", "deterministic"},
                       {"map", affine(1.0, 0.25, true)}},
                      {{T::WAP, yes}, {T::MC, no}},
                      "rotation by 1/4"));
    return g;
}

}  // namespace

Expectation GalleryEntry::expectation(ClassTag t) const {
    auto it = expected.find(t);
    return it == expected.end() ? Expectation::unspecified : it->second;
}

const std::vector<GalleryEntry>& list_gallery() {
    static const std::vector<GalleryEntry> gallery = build();
    return gallery;
}

const GalleryEntry& gallery_entry(const std::string& id) {
    for (const auto& e : list_gallery())
        if (e.id == id) return e;
    throw UnknownId("unknown gallery id: " + id);
}

std::map<ClassTag, Expectation> expected_report(const std::string& id) { return gallery_entry(id).expected; }

const char* to_string(Expectation e) {
    switch (e) {
    case Expectation::evidence_for: return "for";
    case Expectation::evidence_against: return "against";
    case Expectation::unspecified: return "unspecified";
    }
    return "?";
}

bool matches_expected(const GalleryEntry& entry, const ClassificationReport& report, std::string* mismatch) {
    bool ok = true;
    std::string why;
    for (const auto& [tag, want] : entry.expected) {
        const Verdict got = report.verdict(tag);
        const bool hit = (want == Expectation::evidence_for && got == Verdict::evidence_for) ||
                         (want == Expectation::evidence_against && got == Verdict::evidence_against) ||
                         want == Expectation::unspecified;
        if (!hit) {
            ok = false;
            why += std::string(to_string(tag)) + " expected " + to_string(want) + " got " + to_string(got) + "; ";
        }
    }
    if (entry.expected_components_min && !report.components_per_resolution.empty()) {
        for (int r : report.components_per_resolution)
            if (r < *entry.expected_components_min) {
                ok = false;
                why += "components " + std::to_string(r) + " < " + std::to_string(*entry.expected_components_min) + "; ";
            }
    }
    if (mismatch) *mismatch = why;
    return ok;
}

}  // namespace transferlab
