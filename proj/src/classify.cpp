#include "transferlab/classify.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <map>

#include "transferlab/errors.hpp"

namespace transferlab {

const char* to_string(ClassTag t) {
    switch (t) {
    case ClassTag::S: return "S";
    case ClassTag::WAP: return "WAP";
    case ClassTag::MC: return "MC";
    case ClassTag::AC: return "AC";
    case ClassTag::C: return "C";
    case ClassTag::UC: return "UC";
    case ClassTag::D: return "D";
    case ClassTag::Dstar: return "Dstar";
    case ClassTag::mixing: return "mixing";
    case ClassTag::exact: return "exact";
    }
    return "?";
}

const char* to_string(Verdict v) {
    switch (v) {
    case Verdict::evidence_for: return "evidence_for";
    case Verdict::evidence_against: return "evidence_against";
    case Verdict::inconclusive: return "inconclusive";
    }
    return "?";
}

const char* to_string(Provenance p) {
    switch (p) {
    case Provenance::matrix: return "matrix";
    case Provenance::kernel_symbolic: return "kernel_symbolic";
    case Provenance::monte_carlo: return "monte_carlo";
    }
    return "?";
}

ClassTag class_tag_from_string(const std::string& s) {
    for (auto t : {ClassTag::S, ClassTag::WAP, ClassTag::MC, ClassTag::AC, ClassTag::C, ClassTag::UC, ClassTag::D,
                   ClassTag::Dstar, ClassTag::mixing, ClassTag::exact})
        if (s == to_string(t)) return t;
    throw SpecError("unknown class tag: " + s);
}

const ProbeResult* ClassificationReport::find(ClassTag t) const {
    for (const auto& p : probes)
        if (p.class_tag == t) return &p;
    return nullptr;
}

Verdict ClassificationReport::verdict(ClassTag t) const {
    const auto* p = find(t);
    return p ? p->verdict : Verdict::inconclusive;
}

void ClassifyConfig::apply_overrides(const nlohmann::json& j) {
    auto take = [&](const char* key, auto& field) {
        if (j.contains(key)) field = j.at(key).get<std::remove_reference_t<decltype(field)>>();
    };
    take("ladder", ladder);
    take("deltas", deltas);
    take("quadrature", quadrature);
    take("tol", tol);
    take("tol_sparse", tol_sparse);
    take("straube_n_max", straube_n_max);
    take("uc_n0_max", uc_n0_max);
    take("dstar_n_max", dstar_n_max);
    take("mixing_n_max", mixing_n_max);
    take("refined_n_max", refined_n_max);
    take("refined_piece_cap", refined_piece_cap);
    take("mc_log2_max", mc_log2_max);
    take("tail_factor", tail_factor);
    take("stability", stability);
    take("smallness", smallness);
    take("spread_threshold", spread_threshold);
    take("ac_kappa", ac_kappa);
    take("collapse_ratio", collapse_ratio);
    take("count_growth", count_growth);
    take("fixed_point_samples", fixed_point_samples);
}

namespace {

struct Evidence {
    int N = 0;
    ErgodicDecomposition dec;
    StraubeResult straube;
    ConstrictivityResult spread;
    AcResult ac;
    McResult mc;
    DoeblinResult doeblin;
    std::optional<DstarResult> dstar;
    std::string dstar_error;
    std::vector<double> moduli;
    double limit_height = 0.0;  // max of the Cesaro limit of the uniform density
    double min_component_measure = 1.0;
    std::vector<int> min_component;
    bool monte_carlo_rows = false;
    std::string build_method;
};

using Json = nlohmann::json;

Json opt_int(const std::optional<int>& v) { return v ? Json(*v) : Json(nullptr); }

bool stable_value(double prev, double top, double tol) {
    return std::abs(top - prev) <= tol * std::max(std::abs(prev), 1e-300) || top == prev;
}

bool stable_time(const std::optional<int>& prev, const std::optional<int>& top, double tol) {
    if (!prev || !top) return false;
    return *top <= *prev || (*top - *prev) <= tol * *prev;
}

bool growing_time(const std::optional<int>& prev, const std::optional<int>& top, double tol) {
    if (!top) return true;
    if (!prev) return false;
    return (*top - *prev) > tol * *prev && *top > *prev;
}

ProbeResult make(ClassTag t, Verdict v, Provenance p, int N, Json cert, std::string rule) {
    ProbeResult r;
    r.class_tag = t;
    r.verdict = v;
    r.provenance = p;
    r.resolution = N;
    cert["rule"] = std::move(rule);
    r.certificate = std::move(cert);
    return r;
}

Curve curve(std::string name, int N, const std::vector<double>& values, long n0 = 0) {
    Curve c;
    c.name = std::move(name);
    c.resolution = N;
    for (std::size_t i = 0; i < values.size(); ++i) c.points.emplace_back(static_cast<double>(n0 + static_cast<long>(i)), values[i]);
    return c;
}

// Index of the smallest delta that still selects at least one cell on every rung.
std::size_t finest_delta(const std::vector<double>& deltas, int N_min) {
    std::size_t best = 0;
    for (std::size_t d = 0; d < deltas.size(); ++d)
        if (top_count(N_min, deltas[d]) >= 1 && deltas[d] < deltas[best]) best = d;
    return best;
}

void enforce_hierarchy(std::map<ClassTag, ProbeResult>& probes) {
    static const std::array<std::pair<ClassTag, ClassTag>, 7> implies = {{{ClassTag::UC, ClassTag::C},
                                                                          {ClassTag::C, ClassTag::AC},
                                                                          {ClassTag::AC, ClassTag::MC},
                                                                          {ClassTag::MC, ClassTag::WAP},
                                                                          {ClassTag::WAP, ClassTag::S},
                                                                          {ClassTag::Dstar, ClassTag::D},
                                                                          {ClassTag::D, ClassTag::UC}}};
    bool changed = true;
    while (changed) {
        changed = false;
        for (auto [sub, super] : implies) {
            auto& a = probes.at(sub);
            const auto& b = probes.at(super);
            if (b.verdict == Verdict::evidence_against && a.verdict != Verdict::evidence_against) {
                a.certificate["hierarchy_override"] = {{"probe_verdict", to_string(a.verdict)},
                                                       {"because", std::string(to_string(super)) + " evidence_against"}};
                a.verdict = Verdict::evidence_against;
                changed = true;
            }
        }
    }
    changed = true;
    while (changed) {
        changed = false;
        for (auto [sub, super] : implies) {
            const auto& a = probes.at(sub);
            auto& b = probes.at(super);
            if (a.verdict == Verdict::evidence_for && b.verdict == Verdict::inconclusive) {
                b.certificate["hierarchy_override"] = {{"probe_verdict", "inconclusive"},
                                                       {"because", std::string(to_string(sub)) + " evidence_for"}};
                b.verdict = Verdict::evidence_for;
                changed = true;
            }
        }
    }
}

Evidence gather(const RandomSystem& system, const ClassifyConfig& cfg, int N) {
    Evidence e;
    e.N = N;
    const TransferMatrix K = build_ulam(system, N, cfg.quadrature, cfg.seed);
    e.build_method = K.build_method;
    e.monte_carlo_rows = K.has_monte_carlo_rows();
    e.dec = ergodic_decomposition(K, cfg.tol_sparse, cfg.tol);
    e.straube = straube_probe(K, cfg.deltas, cfg.straube_n_max, cfg.smallness);
    e.spread = constrictivity_probe(K, cfg.deltas, 2 * N, cfg.spread_threshold);
    e.ac = ac_probe(K, e.dec, cfg.deltas, cfg.tail_factor * N);
    e.mc = mc_probe(K, e.dec, cfg.mc_log2_max, cfg.smallness);
    e.doeblin = doeblin_probe(K, system, cfg.uc_n0_max, cfg.deltas, cfg.fixed_point_samples, cfg.seed,
                              cfg.spread_threshold);
    try {
        e.dstar = dstar_probe(K, e.dec, cfg.dstar_n_max, cfg.smallness);
    } catch (const MultipleComponents& err) {
        e.dstar_error = err.what();
    }
    e.moduli = spectral_gap(K, std::min(4, N));
    e.limit_height = cesaro_limit(e.dec, uniform_density(N)).maxCoeff();
    for (const auto& c : e.dec.components) {
        const double m = static_cast<double>(c.support.size()) / N;
        if (m < e.min_component_measure || e.min_component.empty()) {
            e.min_component_measure = m;
            e.min_component = c.support;
        }
    }
    return e;
}

}  // namespace

bool hierarchy_consistent(const ClassificationReport& r) {
    static const std::array<std::pair<ClassTag, ClassTag>, 7> implies = {{{ClassTag::UC, ClassTag::C},
                                                                          {ClassTag::C, ClassTag::AC},
                                                                          {ClassTag::AC, ClassTag::MC},
                                                                          {ClassTag::MC, ClassTag::WAP},
                                                                          {ClassTag::WAP, ClassTag::S},
                                                                          {ClassTag::Dstar, ClassTag::D},
                                                                          {ClassTag::D, ClassTag::UC}}};
    for (auto [sub, super] : implies)
        if (r.verdict(sub) == Verdict::evidence_for && r.verdict(super) == Verdict::evidence_against) return false;
    return true;
}

ClassificationReport classify(const RandomSystem& system, const ClassifyConfig& cfg) {
    ClassificationReport report;
    report.system_id = system.id;
    report.ladder = cfg.ladder;
    for (std::size_t i = 1; i < cfg.ladder.size(); ++i)
        if (cfg.ladder[i] <= cfg.ladder[i - 1]) throw SpecError("ladder must be strictly increasing");
    if (cfg.ladder.empty()) throw SpecError("empty ladder");

    std::vector<Evidence> ev;
    for (int N : cfg.ladder) {
        try {
            ev.push_back(gather(system, cfg, N));
            report.components_per_resolution.push_back(static_cast<int>(ev.back().dec.components.size()));
        } catch (const Error& err) {
            report.missing_resolutions.push_back({{"N", N}, {"error", err.what()}});
        }
    }
    if (ev.empty()) throw SpecError("no resolution of the ladder could be built");

    const Evidence& top = ev.back();
    const Evidence* prev = ev.size() >= 2 ? &ev[ev.size() - 2] : nullptr;
    const int Ntop = top.N;
    const std::size_t dmin = finest_delta(cfg.deltas, ev.front().N);
    const double delta_min = cfg.deltas[dmin];
    const double tol = cfg.stability;
    std::map<ClassTag, ProbeResult> out;

    // (S): Straube
    {
        Json per = Json::array();
        for (const auto& e : ev) per.push_back({{"N", e.N}, {"alpha_hat", e.straube.alpha}});
        Verdict v = Verdict::inconclusive;
        Json witness = nullptr;
        bool all_large = true;
        for (std::size_t d = 0; d < cfg.deltas.size(); ++d) {
            const double a = top.straube.alpha[d];
            all_large = all_large && a >= 1.0 - cfg.smallness;
            if (v == Verdict::evidence_for || !prev) continue;
            const double p = prev->straube.alpha[d];
            if (a < 1.0 - cfg.smallness && p < 1.0 - cfg.smallness && stable_value(p, a, tol)) {
                v = Verdict::evidence_for;
                witness = {{"delta", cfg.deltas[d]}, {"alpha_hat", a}};
            }
        }
        if (all_large) v = Verdict::evidence_against;
        Json cert = {{"deltas", cfg.deltas}, {"n_max", cfg.straube_n_max}, {"per_resolution", per},
                     {"witness", witness}};
        out[ClassTag::S] = make(ClassTag::S, v, Provenance::matrix, Ntop, cert,
                                "alpha_hat(delta) < 1 - smallness and stable across the top two resolutions");
    }

    // (WAP): maximal support of the limit density, and no collapse onto vanishing sets
    {
        Json per = Json::array();
        for (const auto& e : ev)
            per.push_back({{"N", e.N}, {"limit_height", e.limit_height},
                           {"maximal_support", e.dec.maximal_support_reached}});
        Verdict v = Verdict::inconclusive;
        std::string rule = "maximal support reached and limit density height stable";
        const bool collapse = prev && top.limit_height >= cfg.collapse_ratio * prev->limit_height;
        if (collapse || !top.dec.maximal_support_reached) {
            v = Verdict::evidence_against;
            rule = "Cesaro limit of the uniform density concentrates on a vanishing set";
        } else if (prev && prev->dec.maximal_support_reached) {
            v = Verdict::evidence_for;
        }
        ProbeResult p = make(ClassTag::WAP, v, Provenance::matrix, Ntop,
                             {{"per_resolution", per}, {"collapse_ratio", cfg.collapse_ratio}}, rule);
        out[ClassTag::WAP] = p;
    }

    // (MC): Cesaro convergence plus resolution trends of the decomposition
    {
        Json per = Json::array();
        for (const auto& e : ev) {
            Json small_set = nullptr;
            for (const auto& s : e.ac.component_sets)
                if (s.cells == e.min_component)
                    small_set = {{"measure", s.measure}, {"tail_mass", s.tail}, {"cells", s.cells.size()}};
            per.push_back({{"N", e.N},
                           {"components", e.dec.components.size()},
                           {"min_component_measure", e.min_component_measure},
                           {"d_final", e.mc.d.back()},
                           {"n_final", e.mc.n.back()},
                           {"envelope", e.mc.envelope},
                           {"invariant_small_set", small_set}});
        }
        Verdict v = Verdict::inconclusive;
        std::string rule = "d_n -> 0 at every resolution; component structure stable";
        const int r_top = static_cast<int>(top.dec.components.size());
        const bool diverging = prev && r_top >= 3 &&
                               r_top >= cfg.count_growth * static_cast<double>(prev->dec.components.size());
        const bool shrinking = prev && prev->min_component_measure >= cfg.collapse_ratio * top.min_component_measure;
        if (diverging || shrinking) {
            v = Verdict::evidence_against;
            rule = diverging ? "number of ergodic components diverges with N"
                             : "invariant sets of vanishing measure trap mass";
        } else if (std::all_of(ev.begin(), ev.end(), [](const Evidence& e) { return e.mc.verdict == Verdict::evidence_for; })) {
            v = Verdict::evidence_for;
        }
        out[ClassTag::MC] = make(ClassTag::MC, v, Provenance::matrix, Ntop, {{"per_resolution", per}}, rule);
    }

    // (AC): fixed-set tail mass proportional to delta
    {
        Json per = Json::array();
        std::vector<double> ratio;
        for (const auto& e : ev) {
            const double t = e.ac.window_tail[dmin];
            ratio.push_back(t / (delta_min * e.ac.class_height));
            Json sets = Json::array();
            for (const auto& s : e.ac.component_sets)
                if (sets.size() < 8) sets.push_back({{"label", s.label}, {"measure", s.measure}, {"tail_mass", s.tail}});
            per.push_back({{"N", e.N},
                           {"window_tail", e.ac.window_tail},
                           {"profile_tail", e.ac.profile_tail},
                           {"class_height", e.ac.class_height},
                           {"ratio", ratio.back()},
                           {"component_sets", sets}});
        }
        Verdict v = Verdict::inconclusive;
        std::string rule = "t(delta_min) <= kappa * delta_min * height at the top two resolutions, height stable";
        if (prev) {
            const double rt = ratio.back(), rp = ratio[ratio.size() - 2];
            const double tt = top.ac.window_tail[dmin], tp = prev->ac.window_tail[dmin];
            if (rt <= cfg.ac_kappa && rp <= cfg.ac_kappa && stable_value(prev->ac.class_height, top.ac.class_height, tol)) {
                v = Verdict::evidence_for;
            } else if (rt > cfg.ac_kappa && rp > cfg.ac_kappa && tt >= (1.0 + tol) * tp) {
                v = Verdict::evidence_against;
                rule = "fixed-set tail mass exceeds kappa * delta * height and grows with N";
            }
        }
        out[ClassTag::AC] = make(ClassTag::AC, v, Provenance::matrix, Ntop,
                                 {{"delta", delta_min}, {"kappa", cfg.ac_kappa}, {"tail_window", {cfg.tail_factor, 2 * cfg.tail_factor}},
                                  {"per_resolution", per}},
                                 rule);
    }

    // (C): spread time of concentrated densities
    {
        Json per = Json::array();
        for (const auto& e : ev) {
            Json tau = Json::array();
            for (const auto& t : e.spread.spread_time) tau.push_back(opt_int(t));
            per.push_back({{"N", e.N}, {"spread_time", tau}, {"c_hat", e.spread.c_hat}});
        }
        Verdict v = Verdict::inconclusive;
        std::string rule = "spread time at delta_min finite and stable across the top two resolutions";
        const auto& tt = top.spread.spread_time[dmin];
        bool all_one = std::all_of(top.spread.c_hat.begin(), top.spread.c_hat.end(),
                                   [](double c) { return c >= 1.0 - 1e-12; });
        if (all_one) {
            v = Verdict::evidence_against;
            rule = "c_hat(delta) = 1 for every delta";
        } else if (prev) {
            const auto& tp = prev->spread.spread_time[dmin];
            if (stable_time(tp, tt, tol)) {
                v = Verdict::evidence_for;
            } else if (growing_time(tp, tt, tol)) {
                v = Verdict::evidence_against;
                rule = "spread time at delta_min grows with N or never settles";
            }
        }
        ProbeResult p = make(ClassTag::C, v, Provenance::matrix, Ntop,
                             {{"delta", delta_min}, {"threshold", cfg.spread_threshold}, {"horizon", "2N"},
                              {"per_resolution", per}},
                             rule);
        for (const auto& e : ev) p.curves.push_back(curve("spread_c", e.N, e.spread.c[dmin]));
        out[ClassTag::C] = p;
    }

    // (UC) and (D)
    {
        Json per = Json::array();
        for (const auto& e : ev) {
            Json n0 = Json::array();
            for (const auto& t : e.doeblin.matrix.spread_n0) n0.push_back(opt_int(t));
            Json eps1 = e.doeblin.matrix.eps.front();
            per.push_back({{"N", e.N}, {"spread_n0", n0}, {"eps_hat_n0_1", eps1}});
        }
        Verdict mv = Verdict::inconclusive;
        std::string mrule = "n0 with eps_hat(n0, delta_min) <= threshold stable across the top two resolutions";
        const auto& nt = top.doeblin.matrix.spread_n0[dmin];
        if (prev) {
            const auto& np = prev->doeblin.matrix.spread_n0[dmin];
            if (stable_time(np, nt, tol)) {
                mv = Verdict::evidence_for;
            } else if (growing_time(np, nt, tol)) {
                mv = Verdict::evidence_against;
                mrule = "uniform spreading time grows with N or is absent";
            }
        }
        Json cert = {{"delta", delta_min}, {"threshold", cfg.spread_threshold}, {"n0_max", cfg.uc_n0_max},
                     {"per_resolution", per}, {"matrix_verdict", to_string(mv)}};
        ProbeResult uc;
        if (system.declared_atomic()) {
            cert["kernel_rule"] = "atomic kernel: P^n0(x,.) is a finite sum of point masses";
            uc = make(ClassTag::UC, Verdict::evidence_against, Provenance::kernel_symbolic, Ntop, cert,
                      "atomicity rule dominates the matrix certificate");
        } else {
            uc = make(ClassTag::UC, mv, Provenance::matrix, Ntop, cert, mrule);
        }
        for (const auto& e : ev) {
            std::vector<double> col;
            for (const auto& row : e.doeblin.matrix.eps) col.push_back(row[dmin]);
            uc.curves.push_back(curve("eps_hat", e.N, col, 1));
        }
        out[ClassTag::UC] = uc;

        Json dcert = cert;
        dcert["fixed_point_rule"] = top.doeblin.fixed_point_rule;
        dcert["fixed_points_checked"] = top.doeblin.fixed_points_checked;
        dcert["noise_samples"] = top.doeblin.samples_checked;
        if (top.doeblin.fixed_point_rule) {
            out[ClassTag::D] = make(ClassTag::D, Verdict::evidence_against, Provenance::kernel_symbolic, Ntop, dcert,
                                    "common fixed point: P^n(x*,{x*}) = 1 on a null set");
        } else {
            out[ClassTag::D] = make(ClassTag::D, uc.verdict, uc.provenance, Ntop, dcert,
                                    "no common fixed point; inherits the uniform certificate");
        }
    }

    // (D*)
    {
        Json per = Json::array();
        for (const auto& e : ev) {
            if (e.dstar)
                per.push_back({{"N", e.N}, {"s_final", e.dstar->s.back()}, {"s_1", e.dstar->s.front()},
                               {"fit_C", e.dstar->fit_C}, {"fit_lambda", e.dstar->fit_lambda}});
            else
                per.push_back({{"N", e.N}, {"error", e.dstar_error}});
        }
        Verdict v = Verdict::inconclusive;
        std::string rule;
        if (!top.dstar) {
            v = Verdict::evidence_against;
            rule = "no unique invariant density";
        } else if (top.dec.components.front().period > 1) {
            v = Verdict::evidence_against;
            rule = "periodic component: a cyclic class of stationary measure <= 1/2 carries all mass";
        } else {
            v = top.dstar->verdict;
            if (v == Verdict::evidence_for && prev && prev->dstar && prev->dstar->verdict != Verdict::evidence_for)
                v = Verdict::inconclusive;
            rule = "s_n < smallness with geometric fit lambda < 1";
        }
        ProbeResult p = make(ClassTag::Dstar, v, Provenance::matrix, Ntop,
                             {{"tv_convention", "2 sup_A |mu(A) - nu(A)|"}, {"n_max", cfg.dstar_n_max},
                              {"per_resolution", per}},
                             rule);
        for (const auto& e : ev)
            if (e.dstar) p.curves.push_back(curve("tv", e.N, e.dstar->s, 1));
        out[ClassTag::Dstar] = p;
    }

    enforce_hierarchy(out);

    // mixing / exactness on the top resolution
    {
        const TransferMatrix K = build_ulam(system, Ntop, cfg.quadrature, cfg.seed);
        Json comps = Json::array();
        Verdict mix = Verdict::evidence_for, ex = Verdict::evidence_for;
        bool refined_used = false;
        ProbeResult pm, pe;
        auto fold = [](Verdict acc, Verdict v) {
            if (acc == Verdict::evidence_against || v == Verdict::evidence_against) return Verdict::evidence_against;
            if (acc == Verdict::inconclusive || v == Verdict::inconclusive) return Verdict::inconclusive;
            return Verdict::evidence_for;
        };
        for (std::size_t k = 0; k < top.dec.components.size(); ++k) {
            const auto& comp = top.dec.components[k];
            try {
                auto m = mixing_exactness_probe(K, comp, cfg.mixing_n_max, &system, cfg.refined_n_max,
                                                cfg.refined_piece_cap, cfg.smallness);
                Json c = {{"component", k},
                          {"weak_final", m.weak.back()},
                          {"strong_final", m.strong.back()},
                          {"mixing", to_string(m.mixing)},
                          {"exact", to_string(m.exact)}};
                if (m.refined) {
                    c["refined_strong_final"] = m.refined_strong.back();
                    c["refined_steps"] = m.refined_strong.size() - 1;
                    c["refined_note"] = m.refined_note;
                    refined_used = true;
                    pe.curves.push_back(curve("strong_refined", Ntop, m.refined_strong));
                }
                pm.curves.push_back(curve("weak", Ntop, m.weak));
                pe.curves.push_back(curve("strong", Ntop, m.strong));
                comps.push_back(c);
                mix = fold(mix, m.mixing);
                ex = fold(ex, m.exact);
            } catch (const PeriodNotOne& err) {
                comps.push_back({{"component", k}, {"error", err.what()}});
                mix = fold(mix, Verdict::evidence_against);
                ex = fold(ex, Verdict::evidence_against);
            }
        }
        pm.class_tag = ClassTag::mixing;
        pm.verdict = mix;
        pm.resolution = Ntop;
        pm.provenance = Provenance::matrix;
        pm.certificate = {{"components", comps}, {"rule", "weak pairing curve below smallness"}};
        pe.class_tag = ClassTag::exact;
        pe.verdict = ex;
        pe.resolution = Ntop;
        pe.provenance = refined_used ? Provenance::kernel_symbolic : Provenance::matrix;
        pe.certificate = {{"components", comps}, {"rule", "strong L1 curve below smallness"}};
        out[ClassTag::mixing] = pm;
        out[ClassTag::exact] = pe;
    }

    // decomposition and maximal-support curves ride along with WAP and MC
    for (const auto& e : ev) {
        out[ClassTag::MC].curves.push_back([&] {
            Curve c;
            c.name = "cesaro_d";
            c.resolution = e.N;
            for (std::size_t i = 0; i < e.mc.n.size(); ++i) c.points.emplace_back(static_cast<double>(e.mc.n[i]), e.mc.d[i]);
            return c;
        }());
        out[ClassTag::S].certificate["moduli_N" + std::to_string(e.N)] = e.moduli;
    }

    for (auto t : {ClassTag::S, ClassTag::WAP, ClassTag::MC, ClassTag::AC, ClassTag::C, ClassTag::UC, ClassTag::D,
                   ClassTag::Dstar, ClassTag::mixing, ClassTag::exact})
        report.probes.push_back(out.at(t));
    report.hierarchy_ok = hierarchy_consistent(report);
    return report;
}

nlohmann::json report_to_json(const ClassificationReport& r) {
    Json probes = Json::array();
    for (const auto& p : r.probes)
        probes.push_back({{"class_tag", to_string(p.class_tag)},
                          {"verdict", to_string(p.verdict)},
                          {"certificate", p.certificate},
                          {"resolution", p.resolution},
                          {"provenance", to_string(p.provenance)}});
    Json j = {{"system_id", r.system_id},
              {"ladder", r.ladder},
              {"probes", probes},
              {"hierarchy_ok", r.hierarchy_ok},
              {"components_per_resolution", r.components_per_resolution}};
    if (!r.missing_resolutions.empty()) j["missing_resolutions"] = r.missing_resolutions;
    return j;
}

}  // namespace transferlab
