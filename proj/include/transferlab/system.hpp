#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "transferlab/rng.hpp"

namespace transferlab {

enum class DomainKind { Interval, Circle };

struct AffinePiece {
    double slope = 0.0;
    double intercept = 0.0;
};

// Pieces are right-closed: x on a breakpoint belongs to the piece on its right,
// except x = 1, which belongs to the last piece.
struct PiecewiseAffineMap {
    std::vector<double> breakpoints;
    std::vector<AffinePiece> pieces;
    bool wrap = false;
    // Isolated value overrides f(x) = y (m-null, invisible to the Ulam build).
    std::vector<std::pair<double, double>> point_values;
    // False for maps tabulated from samples; the Ulam build is then only as good as the table.
    bool exact = true;

    std::size_t piece_index(double x) const;
};

PiecewiseAffineMap affine_map(double slope, double intercept, bool wrap = false);

struct NoiseSpec {
    std::vector<double> breakpoints;
    std::vector<double> values;

    double cdf(double t) const;
    double inverse_cdf(double u) const;
    double density(double t) const;
};

NoiseSpec uniform_noise();

enum class SystemKind { FiniteIFS, AdditiveNoise, MultiplicativeNoise, BlendNoise, Deterministic };

struct RandomSystem {
    std::string id;
    DomainKind domain = DomainKind::Interval;
    SystemKind kind = SystemKind::Deterministic;
    std::vector<PiecewiseAffineMap> branches;  // FiniteIFS branches, or the single Deterministic map
    std::vector<double> weights;
    PiecewiseAffineMap base;  // f_0 of the noise kinds
    NoiseSpec noise;
    double epsilon = 0.0;
    std::vector<double> fixed_points;   // declared: f_t(x*) = x* for all t
    std::vector<double> pinned_points;  // f_t(x*) = x* imposed for all t

    // Filled by validate_system.
    std::optional<double> expanding_margin;
    bool expanding_on_average = false;

    bool declared_atomic() const {
        return kind == SystemKind::FiniteIFS || kind == SystemKind::Deterministic;
    }
    bool exact_maps() const;
};

double eval_branch(const PiecewiseAffineMap& map, double x, DomainKind domain = DomainKind::Interval);

double sample_noise(const NoiseSpec& noise, double u);
double sample_noise(const NoiseSpec& noise, const CounterStream& stream, std::uint64_t counter);

double apply_random(const RandomSystem& system, double t, double x);

// Branch picked by t for FiniteIFS / Deterministic systems.
const PiecewiseAffineMap& selected_branch(const RandomSystem& system, double t);

// Blend anchor: f_0(x), lifted to the representative nearest x on the circle.
double blend_anchor(const RandomSystem& system, double x);

std::optional<double> transition_density(const RandomSystem& system, double x, double y);

RandomSystem validate_system(RandomSystem system);

const char* to_string(SystemKind kind);
const char* to_string(DomainKind kind);

RandomSystem system_from_json(const nlohmann::json& j);
nlohmann::json system_to_json(const RandomSystem& system);
RandomSystem load_system(const std::string& path);

}  // namespace transferlab
