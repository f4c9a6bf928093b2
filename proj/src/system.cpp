#include "transferlab/system.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>

#include "transferlab/errors.hpp"

namespace transferlab {

namespace {

constexpr double kSumTol = 1e-12;

std::size_t locate(const std::vector<double>& bp, double x) {
    auto it = std::upper_bound(bp.begin(), bp.end(), x);
    std::size_t idx = it == bp.begin() ? 0 : static_cast<std::size_t>(it - bp.begin()) - 1;
    return std::min(idx, bp.size() - 2);
}

double wrap01(double v) {
    double w = v - std::floor(v);
    return w >= 1.0 ? 0.0 : w;
}

const std::map<std::string, long double>& symbolic_constants() {
    static const std::map<std::string, long double> table = {
        {"sqrt2_over_2", std::sqrt(2.0L) / 2.0L},
        {"sqrt2_over_4", std::sqrt(2.0L) / 4.0L},
        {"sqrt2_over_4_plus_half", std::sqrt(2.0L) / 4.0L + 0.5L},
        {"golden", (std::sqrt(5.0L) - 1.0L) / 2.0L},
    };
    return table;
}

double number_or_tag(const nlohmann::json& j) {
    if (j.is_number()) return j.get<double>();
    if (j.is_string()) {
        const auto& table = symbolic_constants();
        auto it = table.find(j.get<std::string>());
        if (it == table.end()) throw SpecError("unknown symbolic constant: " + j.get<std::string>());
        return static_cast<double>(it->second);
    }
    throw SpecError("expected a number or a symbolic constant");
}

void check_breakpoints(const std::vector<double>& bp, std::size_t pieces, const char* what) {
    if (bp.size() < 2 || bp.front() != 0.0 || bp.back() != 1.0)
        throw SpecError(std::string(what) + ": breakpoints must start at 0 and end at 1");
    for (std::size_t i = 1; i < bp.size(); ++i)
        if (!(bp[i] > bp[i - 1]))
            throw SpecError(std::string(what) + ": breakpoints must be strictly increasing");
    if (pieces != bp.size() - 1)
        throw SpecError(std::string(what) + ": need one piece per breakpoint interval");
}

void check_map(const PiecewiseAffineMap& f, DomainKind domain) {
    check_breakpoints(f.breakpoints, f.pieces.size(), "map");
    for (std::size_t k = 0; k < f.pieces.size(); ++k) {
        const auto& p = f.pieces[k];
        if (!std::isfinite(p.slope) || !std::isfinite(p.intercept))
            throw SpecError("map: non-finite piece coefficients");
        if (f.wrap) continue;
        for (double x : {f.breakpoints[k], f.breakpoints[k + 1]}) {
            double v = p.slope * x + p.intercept;
            if (v < 0.0 || v > 1.0)
                throw DomainEscape("map value " + std::to_string(v) + " leaves [0,1] at x=" +
                                   std::to_string(x));
        }
    }
    for (auto [x, y] : f.point_values) {
        if (x < 0.0 || x > 1.0 || y < 0.0 || y > 1.0)
            throw DomainEscape("point override outside [0,1]");
    }
    (void)domain;
}

}  // namespace

std::size_t PiecewiseAffineMap::piece_index(double x) const { return locate(breakpoints, x); }

PiecewiseAffineMap affine_map(double slope, double intercept, bool wrap) {
    PiecewiseAffineMap f;
    f.breakpoints = {0.0, 1.0};
    f.pieces = {{slope, intercept}};
    f.wrap = wrap;
    return f;
}

double NoiseSpec::density(double t) const { return values[locate(breakpoints, t)]; }

double NoiseSpec::cdf(double t) const {
    if (t <= 0.0) return 0.0;
    if (t >= 1.0) return 1.0;
    double acc = 0.0;
    for (std::size_t k = 0; k < values.size(); ++k) {
        const double a = breakpoints[k], b = breakpoints[k + 1];
        if (t >= b) {
            acc += values[k] * (b - a);
        } else {
            acc += values[k] * (t - a);
            break;
        }
    }
    return std::min(acc, 1.0);
}

double NoiseSpec::inverse_cdf(double u) const {
    double acc = 0.0;
    std::size_t last = values.size();
    for (std::size_t k = 0; k < values.size(); ++k) {
        if (values[k] <= 0.0) continue;
        last = k;
        const double a = breakpoints[k], b = breakpoints[k + 1];
        const double mass = values[k] * (b - a);
        if (u < acc + mass) return std::min(b, a + (u - acc) / values[k]);
        acc += mass;
    }
    return last < values.size() ? breakpoints[last + 1] : 1.0;
}

NoiseSpec uniform_noise() { return NoiseSpec{{0.0, 1.0}, {1.0}}; }

bool RandomSystem::exact_maps() const {
    if (!base.exact) return false;
    return std::all_of(branches.begin(), branches.end(), [](const auto& f) { return f.exact; });
}

double eval_branch(const PiecewiseAffineMap& f, double x, DomainKind) {
    for (auto [px, py] : f.point_values)
        if (px == x) return py;
    const auto& p = f.pieces[f.piece_index(x)];
    double v = p.slope * x + p.intercept;
    if (f.wrap) return wrap01(v);
    if (v < 0.0 || v > 1.0)
        throw DomainEscape("value " + std::to_string(v) + " escapes [0,1] at x=" + std::to_string(x));
    return v;
}

double sample_noise(const NoiseSpec& noise, double u) { return noise.inverse_cdf(u); }

double sample_noise(const NoiseSpec& noise, const CounterStream& stream, std::uint64_t counter) {
    return noise.inverse_cdf(stream.uniform(counter));
}

double apply_random(const RandomSystem& s, double t, double x) {
    for (double p : s.pinned_points)
        if (p == x) return x;
    switch (s.kind) {
    case SystemKind::Deterministic:
    case SystemKind::FiniteIFS:
        return eval_branch(selected_branch(s, t), x, s.domain);
    case SystemKind::AdditiveNoise:
        return wrap01(eval_branch(s.base, x, s.domain) + t);
    case SystemKind::MultiplicativeNoise:
        return (1.0 - s.epsilon * t) * eval_branch(s.base, x, s.domain);
    case SystemKind::BlendNoise: {
        const double f0 = blend_anchor(s, x);
        const double y = f0 + t * (x - f0);
        return s.domain == DomainKind::Circle ? wrap01(y) : y;
    }
    }
    return x;
}

const PiecewiseAffineMap& selected_branch(const RandomSystem& s, double t) {
    if (!s.declared_atomic()) throw SpecError("selected_branch needs an atomic system");
    double cum = 0.0;
    for (std::size_t i = 0; i + 1 < s.weights.size(); ++i) {
        cum += s.weights[i];
        if (t < cum) return s.branches[i];
    }
    return s.branches.back();
}

double blend_anchor(const RandomSystem& s, double x) {
    const double f0 = eval_branch(s.base, x, s.domain);
    if (s.domain != DomainKind::Circle) return f0;
    return f0 + std::round(x - f0);
}

std::optional<double> transition_density(const RandomSystem& s, double x, double y) {
    for (double p : s.pinned_points)
        if (p == x) return std::nullopt;
    switch (s.kind) {
    case SystemKind::AdditiveNoise:
        return s.noise.density(wrap01(y - eval_branch(s.base, x, s.domain)));
    case SystemKind::MultiplicativeNoise: {
        const double v = eval_branch(s.base, x, s.domain);
        if (v <= 0.0) return std::nullopt;
        const double t = (1.0 - y / v) / s.epsilon;
        if (t < 0.0 || t > 1.0) return 0.0;
        return s.noise.density(t) / (s.epsilon * v);
    }
    case SystemKind::BlendNoise: {
        const double f0 = blend_anchor(s, x);
        const double d = x - f0;
        if (d == 0.0) return std::nullopt;
        double t = (y - f0) / d;
        if (s.domain == DomainKind::Circle)
            for (double lift : {y - 1.0, y + 1.0})
                if (t < 0.0 || t > 1.0) t = (lift - f0) / d;
        if (t < 0.0 || t > 1.0) return 0.0;
        return s.noise.density(t) / std::abs(d);
    }
    default:
        return std::nullopt;
    }
}

RandomSystem validate_system(RandomSystem s) {
    switch (s.kind) {
    case SystemKind::Deterministic:
        if (s.branches.size() != 1) throw SpecError("deterministic system needs exactly one map");
        s.weights = {1.0};
        break;
    case SystemKind::FiniteIFS: {
        if (s.branches.empty()) throw SpecError("IFS needs at least one branch");
        if (s.weights.size() != s.branches.size())
            throw WeightSumError("IFS needs one weight per branch");
        double sum = 0.0;
        for (double w : s.weights) {
            if (!(w > 0.0)) throw WeightSumError("IFS weights must be positive");
            sum += w;
        }
        if (std::abs(sum - 1.0) > kSumTol)
            throw WeightSumError("IFS weights sum to " + std::to_string(sum));
        break;
    }
    case SystemKind::MultiplicativeNoise:
        if (!(s.epsilon > 0.0 && s.epsilon <= 1.0)) throw SpecError("epsilon must lie in (0,1]");
        break;
    case SystemKind::BlendNoise:
        s.noise = uniform_noise();
        break;
    case SystemKind::AdditiveNoise:
        break;
    }

    for (const auto& f : s.branches) check_map(f, s.domain);
    if (!s.declared_atomic()) {
        check_map(s.base, s.domain);
        check_breakpoints(s.noise.breakpoints, s.noise.values.size(), "noise");
        double mass = 0.0;
        for (std::size_t k = 0; k < s.noise.values.size(); ++k) {
            if (s.noise.values[k] < 0.0 || !std::isfinite(s.noise.values[k]))
                throw NoiseNormalizationError("noise density must be nonnegative");
            mass += s.noise.values[k] * (s.noise.breakpoints[k + 1] - s.noise.breakpoints[k]);
        }
        if (std::abs(mass - 1.0) > kSumTol)
            throw NoiseNormalizationError("noise density integrates to " + std::to_string(mass));
    }

    for (double x : s.pinned_points)
        if (x < 0.0 || x > 1.0) throw SpecError("pinned point outside [0,1]");
    for (double x : s.fixed_points) {
        bool pinned = std::find(s.pinned_points.begin(), s.pinned_points.end(), x) != s.pinned_points.end();
        bool fixed = pinned;
        if (!pinned) {
            switch (s.kind) {
            case SystemKind::Deterministic:
            case SystemKind::FiniteIFS:
                fixed = std::all_of(s.branches.begin(), s.branches.end(),
                                    [&](const auto& f) { return eval_branch(f, x, s.domain) == x; });
                break;
            case SystemKind::MultiplicativeNoise:
                fixed = x == 0.0 && eval_branch(s.base, x, s.domain) == 0.0;
                break;
            case SystemKind::BlendNoise:
                fixed = eval_branch(s.base, x, s.domain) == x;
                break;
            case SystemKind::AdditiveNoise:
                fixed = false;
                break;
            }
        }
        if (!fixed) throw SpecError("declared fixed point " + std::to_string(x) + " is not fixed by every f_t");
    }

    s.expanding_margin.reset();
    s.expanding_on_average = false;
    if (s.kind == SystemKind::FiniteIFS) {
        std::vector<double> cuts;
        bool nonzero = true;
        for (const auto& f : s.branches) {
            cuts.insert(cuts.end(), f.breakpoints.begin(), f.breakpoints.end());
            for (const auto& p : f.pieces) nonzero = nonzero && p.slope != 0.0;
        }
        if (nonzero) {
            std::sort(cuts.begin(), cuts.end());
            cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
            double margin = 0.0;
            for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
                const double mid = 0.5 * (cuts[k] + cuts[k + 1]);
                double sum = 0.0;
                for (std::size_t b = 0; b < s.branches.size(); ++b)
                    sum += s.weights[b] / std::abs(s.branches[b].pieces[s.branches[b].piece_index(mid)].slope);
                margin = std::max(margin, sum);
            }
            s.expanding_margin = margin;
            s.expanding_on_average = margin < 1.0;
        }
    }
    return s;
}

const char* to_string(SystemKind k) {
    switch (k) {
    case SystemKind::FiniteIFS: return "finite_ifs";
    case SystemKind::AdditiveNoise: return "additive_noise";
    case SystemKind::MultiplicativeNoise: return "multiplicative_noise";
    case SystemKind::BlendNoise: return "blend_noise";
    case SystemKind::Deterministic: return "deterministic";
    }
    return "?";
}

const char* to_string(DomainKind k) { return k == DomainKind::Circle ? "circle" : "interval"; }

namespace {

PiecewiseAffineMap map_from_json(const nlohmann::json& j) {
    PiecewiseAffineMap f;
    f.breakpoints.clear();
    for (const auto& b : j.at("breakpoints")) f.breakpoints.push_back(number_or_tag(b));
    for (const auto& p : j.at("pieces")) {
        if (!p.is_array() || p.size() != 2) throw SpecError("map piece must be [slope, intercept]");
        f.pieces.push_back({number_or_tag(p[0]), number_or_tag(p[1])});
    }
    f.wrap = j.value("wrap", false);
    f.exact = j.value("exact", true);
    if (j.contains("point_values"))
        for (const auto& pv : j.at("point_values")) f.point_values.emplace_back(number_or_tag(pv[0]), number_or_tag(pv[1]));
    return f;
}

nlohmann::json map_to_json(const PiecewiseAffineMap& f) {
    nlohmann::json j;
    j["breakpoints"] = f.breakpoints;
    auto pieces = nlohmann::json::array();
    for (const auto& p : f.pieces) pieces.push_back({p.slope, p.intercept});
    j["pieces"] = pieces;
    j["wrap"] = f.wrap;
    if (!f.exact) j["exact"] = false;
    if (!f.point_values.empty()) {
        auto pv = nlohmann::json::array();
        for (auto [x, y] : f.point_values) pv.push_back({x, y});
        j["point_values"] = pv;
    }
    return j;
}

SystemKind kind_from_string(const std::string& k) {
    for (auto kind : {SystemKind::FiniteIFS, SystemKind::AdditiveNoise, SystemKind::MultiplicativeNoise,
                      SystemKind::BlendNoise, SystemKind::Deterministic})
        if (k == to_string(kind)) return kind;
    throw SpecError("unknown system kind: " + k);
}

}  // namespace

RandomSystem system_from_json(const nlohmann::json& j) {
    try {
        RandomSystem s;
        s.id = j.value("id", std::string("custom"));
        const std::string domain = j.value("domain", std::string("interval"));
        if (domain != "interval" && domain != "circle") throw SpecError("domain must be interval or circle");
        s.domain = domain == "circle" ? DomainKind::Circle : DomainKind::Interval;
        s.kind = kind_from_string(j.at("kind").get<std::string>());
        if (s.kind == SystemKind::Deterministic) {
            s.branches.push_back(map_from_json(j.at("map")));
        } else if (s.kind == SystemKind::FiniteIFS) {
            for (const auto& b : j.at("branches")) s.branches.push_back(map_from_json(b));
            for (const auto& w : j.at("weights")) s.weights.push_back(number_or_tag(w));
        } else {
            s.base = map_from_json(j.at("base"));
            if (j.contains("noise")) {
                for (const auto& b : j["noise"].at("breakpoints")) s.noise.breakpoints.push_back(number_or_tag(b));
                for (const auto& v : j["noise"].at("values")) s.noise.values.push_back(number_or_tag(v));
            } else {
                s.noise = uniform_noise();
            }
            if (s.kind == SystemKind::MultiplicativeNoise) s.epsilon = number_or_tag(j.at("epsilon"));
        }
        if (j.contains("fixed_points"))
            for (const auto& x : j["fixed_points"]) s.fixed_points.push_back(number_or_tag(x));
        if (j.contains("pinned_points"))
            for (const auto& x : j["pinned_points"]) s.pinned_points.push_back(number_or_tag(x));
        return validate_system(std::move(s));
    } catch (const nlohmann::json::exception& e) {
        throw SpecError(std::string("malformed system spec: ") + e.what());
    }
}

nlohmann::json system_to_json(const RandomSystem& s) {
    nlohmann::json j;
    j["id"] = s.id;
    j["domain"] = to_string(s.domain);
    j["kind"] = to_string(s.kind);
    if (s.kind == SystemKind::Deterministic) {
        j["map"] = map_to_json(s.branches.front());
    } else if (s.kind == SystemKind::FiniteIFS) {
        auto br = nlohmann::json::array();
        for (const auto& f : s.branches) br.push_back(map_to_json(f));
        j["branches"] = br;
        j["weights"] = s.weights;
    } else {
        j["base"] = map_to_json(s.base);
        j["noise"] = {{"breakpoints", s.noise.breakpoints}, {"values", s.noise.values}};
        if (s.kind == SystemKind::MultiplicativeNoise) j["epsilon"] = s.epsilon;
    }
    if (!s.fixed_points.empty()) j["fixed_points"] = s.fixed_points;
    if (!s.pinned_points.empty()) j["pinned_points"] = s.pinned_points;
    return j;
}

RandomSystem load_system(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw SpecError("system spec not found: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& e) {
        throw SpecError(std::string("malformed system spec: ") + e.what());
    }
    return system_from_json(j);
}

}  // namespace transferlab
