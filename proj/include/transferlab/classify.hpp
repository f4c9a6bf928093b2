#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "transferlab/spectral.hpp"
#include "transferlab/system.hpp"
#include "transferlab/ulam.hpp"

namespace transferlab {

enum class ClassTag { S, WAP, MC, AC, C, UC, D, Dstar, mixing, exact };
enum class Verdict { evidence_for, evidence_against, inconclusive };
enum class Provenance { matrix, kernel_symbolic, monte_carlo };

const char* to_string(ClassTag t);
const char* to_string(Verdict v);
const char* to_string(Provenance p);
ClassTag class_tag_from_string(const std::string& s);

struct Curve {
    std::string name;
    int resolution = 0;
    std::vector<std::pair<double, double>> points;  // (n, value)
};

struct ProbeResult {
    ClassTag class_tag = ClassTag::S;
    Verdict verdict = Verdict::inconclusive;
    nlohmann::json certificate = nlohmann::json::object();
    int resolution = 0;
    Provenance provenance = Provenance::matrix;
    std::vector<Curve> curves;
};

struct ClassificationReport {
    std::string system_id;
    std::vector<int> ladder;
    std::vector<ProbeResult> probes;
    bool hierarchy_ok = false;
    std::vector<int> components_per_resolution;
    nlohmann::json missing_resolutions = nlohmann::json::array();

    const ProbeResult* find(ClassTag t) const;
    Verdict verdict(ClassTag t) const;
};

struct ClassifyConfig {
    std::vector<int> ladder{64, 128, 256, 512};
    std::vector<double> deltas{0.25, 0.125, 0.0625, 0.03125};
    int quadrature = 8;
    double tol = 1e-12;
    double tol_sparse = 1e-12;
    int straube_n_max = 64;
    int uc_n0_max = 16;
    int dstar_n_max = 50;
    int mixing_n_max = 30;
    int refined_n_max = 20;
    long refined_piece_cap = 1L << 22;
    int mc_log2_max = 20;
    int tail_factor = 1;  // tail window [f N, 2 f N]
    double stability = 0.10;
    double smallness = 1e-3;
    double spread_threshold = 0.5;
    double ac_kappa = 2.0;
    double collapse_ratio = 1.6;
    double count_growth = 1.5;
    int fixed_point_samples = 1000;
    std::uint64_t seed = 0;

    void apply_overrides(const nlohmann::json& j);
};

// Mass of the ⌊δN⌋ largest entries of u, times 1/N.
double top_mass(const Vector& u, double delta);
int top_count(int N, double delta);

struct StraubeResult {
    std::vector<double> deltas;
    std::vector<double> alpha;  // alpha-hat per delta
    Verdict verdict = Verdict::inconclusive;
};
StraubeResult straube_probe(const TransferMatrix& K, const std::vector<double>& deltas, int n_max,
                            double smallness = 1e-3);

struct ConstrictivityResult {
    std::vector<double> deltas;
    std::vector<std::vector<double>> c;  // c[d][n], n = 0..horizon, worst translate
    std::vector<double> c_hat;
    std::vector<std::optional<int>> spread_time;
};
ConstrictivityResult constrictivity_probe(const TransferMatrix& K, const std::vector<double>& deltas, int n_max,
                                          double threshold = 0.5);

struct SetMass {
    std::string label;
    std::vector<int> cells;
    double measure = 0.0;
    double tail = 0.0;
};

struct AcResult {
    std::vector<double> deltas;
    std::vector<double> window_tail;   // max over sliding windows of measure δ
    std::vector<double> profile_tail;  // top-δ set of the invariant profile
    std::vector<SetMass> component_sets;
    double class_height = 0.0;  // max of the cyclic-class densities
};
AcResult ac_probe(const TransferMatrix& K, const ErgodicDecomposition& d, const std::vector<double>& deltas,
                  int n_tail);

struct McResult {
    std::vector<long> n;
    std::vector<double> d;
    double envelope = 0.0;  // max n d_n
    Verdict verdict = Verdict::inconclusive;
};
McResult mc_probe(const TransferMatrix& K, const ErgodicDecomposition& d, int log2_max, double smallness = 1e-3);

struct UcResult {
    std::vector<double> deltas;
    std::vector<std::vector<double>> eps;  // eps[n0-1][d]
    std::vector<std::optional<int>> spread_n0;
    bool kernel_rule = false;
    Verdict verdict = Verdict::inconclusive;
};
UcResult uc_probe(const TransferMatrix& K, const RandomSystem& system, int n0_max, const std::vector<double>& deltas,
                  double threshold = 0.5);

struct DoeblinResult {
    UcResult matrix;
    bool fixed_point_rule = false;
    std::vector<double> fixed_points_checked;
    int samples_checked = 0;
    Verdict verdict = Verdict::inconclusive;
};
DoeblinResult doeblin_probe(const TransferMatrix& K, const RandomSystem& system, int n0_max,
                            const std::vector<double>& deltas, int samples = 1000, std::uint64_t seed = 0,
                            double threshold = 0.5);

struct DstarResult {
    std::vector<double> s;  // s_n, n = 1..n_max
    double fit_C = 0.0;
    double fit_lambda = 0.0;
    Verdict verdict = Verdict::inconclusive;
};
DstarResult dstar_probe(const TransferMatrix& K, const ErgodicDecomposition& d, int n_max, double smallness = 1e-3);

struct MixingResult {
    std::vector<double> strong;  // grid: max over the battery of ||phi K^n||_1 / ||phi||_1
    std::vector<double> weak;    // grid: max over battery pairs of |<psi, phi K^n>|
    std::vector<double> refined_strong;  // exact step-function pushforward of the halves indicator
    bool refined = false;
    std::string refined_note;
    Verdict mixing = Verdict::inconclusive;
    Verdict exact = Verdict::inconclusive;
};
struct PairingCurves {
    std::vector<double> strong;  // max over phi of ||phi K^n||_1
    std::vector<double> weak;    // max over (phi, psi) of |<psi, phi K^n>|
};
PairingCurves pairing_curves(const TransferMatrix& K, std::vector<Vector> phis, const std::vector<Vector>& psis,
                             int n_max);

MixingResult mixing_exactness_probe(const TransferMatrix& K, const ErgodicComponent& component, int n_max,
                                    const RandomSystem* system = nullptr, int refined_n_max = 20,
                                    long piece_cap = 1L << 22, double smallness = 1e-3);

// Exact L^n of the alternating-halves density under a piecewise-affine atomic system.
// Returns ||L^n phi||_1 for n = 0..n_max, stopping early once the piece count exceeds piece_cap.
std::vector<double> refined_strong_curve(const RandomSystem& system, int n_max, long piece_cap);

ClassificationReport classify(const RandomSystem& system, const ClassifyConfig& config);

// Enforces UC => C => AC => MC => WAP => S and D* => D => UC on a verdict table.
bool hierarchy_consistent(const ClassificationReport& r);

nlohmann::json report_to_json(const ClassificationReport& r);

}  // namespace transferlab
