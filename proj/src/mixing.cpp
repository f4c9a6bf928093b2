#include <algorithm>
#include <cmath>
#include <numbers>

#include "transferlab/classify.hpp"
#include "transferlab/errors.hpp"

namespace transferlab {

namespace {

struct Segment {
    double y0;
    double y1;
    double value;
};

// Step function on [0,1]: value v[k] on [x[k], x[k+1]).
struct StepFunction {
    std::vector<double> x;
    std::vector<double> v;

    double l1() const {
        double s = 0.0;
        for (std::size_t k = 0; k < v.size(); ++k) s += std::abs(v[k]) * (x[k + 1] - x[k]);
        return s;
    }
};

void push_wrapped(std::vector<Segment>& out, double y0, double y1, double value, bool wrap) {
    if (!wrap) {
        out.push_back({y0, y1, value});
        return;
    }
    double shift = std::floor(y0);
    while (y0 < y1) {
        const double cut = std::min(y1, shift + 1.0);
        if (cut > y0) out.push_back({y0 - shift, cut - shift, value});
        y0 = cut;
        shift += 1.0;
    }
}

StepFunction pushforward(const RandomSystem& s, const StepFunction& phi) {
    std::vector<Segment> segs;
    for (std::size_t b = 0; b < s.branches.size(); ++b) {
        const auto& f = s.branches[b];
        const double w = s.weights[b];
        std::size_t k = 0;
        for (std::size_t p = 0; p < f.pieces.size(); ++p) {
            const double a0 = f.breakpoints[p], a1 = f.breakpoints[p + 1];
            const auto& piece = f.pieces[p];
            while (k < phi.v.size() && phi.x[k + 1] <= a0) ++k;
            for (std::size_t m = k; m < phi.v.size() && phi.x[m] < a1; ++m) {
                const double lo = std::max(a0, phi.x[m]), hi = std::min(a1, phi.x[m + 1]);
                if (hi <= lo || phi.v[m] == 0.0) continue;
                double y0 = piece.slope * lo + piece.intercept;
                double y1 = piece.slope * hi + piece.intercept;
                if (y0 > y1) std::swap(y0, y1);
                push_wrapped(segs, y0, y1, w * phi.v[m] / std::abs(piece.slope), f.wrap);
            }
        }
    }
    std::vector<std::pair<double, double>> events;
    events.reserve(2 * segs.size() + 2);
    for (const auto& sg : segs) {
        events.emplace_back(sg.y0, sg.value);
        events.emplace_back(sg.y1, -sg.value);
    }
    segs.clear();
    segs.shrink_to_fit();
    events.emplace_back(0.0, 0.0);
    events.emplace_back(1.0, 0.0);
    std::sort(events.begin(), events.end(), [](const auto& a, const auto& b) { return a.first < b.first; });

    StepFunction out;
    double level = 0.0;
    std::size_t e = 0;
    while (e < events.size()) {
        const double pos = events[e].first;
        while (e < events.size() && events[e].first == pos) level += events[e++].second;
        if (e == events.size() || pos >= 1.0) break;
        const double next = events[e].first;
        if (next <= pos) continue;
        double val = std::abs(level) < 1e-13 ? 0.0 : level;
        if (!out.v.empty() && std::abs(out.v.back() - val) <= 1e-13) continue;
        out.x.push_back(pos);
        out.v.push_back(val);
    }
    out.x.push_back(1.0);
    if (out.v.empty()) {
        out.x = {0.0, 1.0};
        out.v = {0.0};
    }
    return out;
}

bool refinable(const RandomSystem& s) {
    if (!s.declared_atomic() || !s.exact_maps()) return false;
    for (const auto& f : s.branches)
        for (const auto& p : f.pieces)
            if (p.slope == 0.0) return false;
    return true;
}

}  // namespace

std::vector<double> refined_strong_curve(const RandomSystem& s, int n_max, long piece_cap) {
    if (!refinable(s)) throw SpecError("refined pushforward needs an exact piecewise-affine atomic system");
    StepFunction phi{{0.0, 0.5, 1.0}, {1.0, -1.0}};
    std::vector<double> curve{phi.l1()};
    for (int n = 1; n <= n_max; ++n) {
        phi = pushforward(s, phi);
        curve.push_back(phi.l1());
        if (static_cast<long>(phi.v.size()) > piece_cap) break;
    }
    return curve;
}

PairingCurves pairing_curves(const TransferMatrix& K, std::vector<Vector> phis, const std::vector<Vector>& psis,
                             int n_max) {
    const int N = K.N;
    PairingCurves c;
    for (int n = 0; n <= n_max; ++n) {
        double strong = 0.0, weak = 0.0;
        for (const auto& phi : phis) {
            strong = std::max(strong, phi.cwiseAbs().sum() / N);
            for (const auto& psi : psis) weak = std::max(weak, std::abs(inner(psi, phi)));
        }
        c.strong.push_back(strong);
        c.weak.push_back(weak);
        if (n < n_max)
            for (auto& phi : phis) phi = apply(K, phi);
    }
    return c;
}

MixingResult mixing_exactness_probe(const TransferMatrix& K, const ErgodicComponent& comp, int n_max,
                                    const RandomSystem* system, int refined_n_max, long piece_cap,
                                    double smallness) {
    if (comp.period != 1) throw PeriodNotOne("component has period " + std::to_string(comp.period));
    const int N = K.N;
    const auto& S = comp.support;
    const int M = static_cast<int>(S.size());

    std::vector<Vector> battery;
    Vector halves = Vector::Zero(N);
    for (int k = 0; k < M / 2; ++k) {
        halves[S[k]] = 1.0;
        halves[S[M - 1 - k]] = -1.0;
    }
    battery.push_back(halves);
    for (int mode = 0; mode < 2; ++mode) {
        Vector g = Vector::Zero(N);
        double mean = 0.0;
        for (int i : S) {
            const double a = 2.0 * std::numbers::pi * i / N, b = 2.0 * std::numbers::pi * (i + 1) / N;
            g[i] = mode == 0 ? (std::sin(b) - std::sin(a)) * N / (2.0 * std::numbers::pi)
                             : (std::cos(a) - std::cos(b)) * N / (2.0 * std::numbers::pi);
            mean += g[i];
        }
        mean /= M;
        for (int i : S) g[i] -= mean;
        battery.push_back(g);
    }
    std::vector<Vector> phis, psis;
    for (auto& g : battery) {
        const double norm = g.cwiseAbs().sum() / N;
        if (norm <= 1e-12) continue;
        psis.push_back(g);
        phis.push_back(g / norm);
    }

    MixingResult r;
    auto curves = pairing_curves(K, phis, psis, n_max);
    r.strong = std::move(curves.strong);
    r.weak = std::move(curves.weak);

    if (system && refinable(*system) && M == N) {
        r.refined = true;
        r.refined_strong = refined_strong_curve(*system, refined_n_max, piece_cap);
        r.refined_note = "exact step-function pushforward of the halves indicator";
    }

    const double weak_last = r.weak.back();
    r.mixing = weak_last < smallness ? Verdict::evidence_for
                                     : (weak_last >= 0.5 ? Verdict::evidence_against : Verdict::inconclusive);
    const auto& strong = r.refined ? r.refined_strong : r.strong;
    const double strong_last = strong.back();
    const double strong_min = *std::min_element(strong.begin(), strong.end());
    if (strong_last < smallness)
        r.exact = Verdict::evidence_for;
    else if (strong_min >= 0.5 && (!r.refined || static_cast<int>(strong.size()) == refined_n_max + 1))
        r.exact = Verdict::evidence_against;
    else
        r.exact = Verdict::inconclusive;
    return r;
}

}  // namespace transferlab
