// Acceptance run: one PASS/FAIL line per criterion.
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracle.hpp"
#include "transferlab/classify.hpp"
#include "transferlab/cli.hpp"
#include "transferlab/gallery.hpp"
#include "transferlab/montecarlo.hpp"
#include "transferlab/parallel.hpp"

using namespace transferlab;
namespace fs = std::filesystem;

namespace {

const std::vector<int> kLadder{64, 128, 256};
int failures = 0;

void report(int k, bool ok, const std::string& detail) {
    std::printf("CRITERION %d %s  %s\n", k, ok ? "PASS" : "FAIL", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++failures;
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, a, b, c);
    return buf;
}

const RandomSystem& gal(const std::string& id) { return gallery_entry(id).system; }

std::map<std::string, ClassificationReport> reports;

void criterion1() {
    ClassifyConfig cfg;
    cfg.ladder = kLadder;
    const auto t0 = std::chrono::steady_clock::now();
    int matched = 0, total = 0;
    std::string misses;
    for (const auto& e : list_gallery()) {
        if (e.exploratory) continue;
        ++total;
        auto r = classify(e.system, cfg);
        std::string why;
        if (matches_expected(e, r, &why) && r.hierarchy_ok)
            ++matched;
        else
            misses += " " + e.id + "[" + why + (r.hierarchy_ok ? "" : "hierarchy") + "]";
        reports[e.id] = std::move(r);
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    report(1, matched == total && total == 14 && secs <= 600.0,
           std::to_string(matched) + "/" + std::to_string(total) + " entries match, " + fmt("%.1f s", secs) + misses);
}

void criterion2() {
    const auto& s = gal("bernoulli_convolution");
    bool ok = true;
    double worst_strong = 0.0, worst_weak = 0.0, grid_strong_min = 1.0;
    for (int N : {16, 64, 256}) {
        const auto K = build_ulam(s, N);
        const auto d = ergodic_decomposition(K);
        const auto m = mixing_exactness_probe(K, d.components[0], 30, &s, 20);
        ok = ok && m.refined && m.refined_strong.size() == 21;
        for (double v : m.refined_strong) worst_strong = std::max(worst_strong, std::abs(v - 1.0));
        worst_weak = std::max(worst_weak, m.weak[30]);
        for (int n = 0; n <= 20; ++n) grid_strong_min = std::min(grid_strong_min, m.strong[n]);
    }
    ok = ok && worst_strong <= 1e-12 && worst_weak < 1e-3;
    report(2, ok,
           fmt("max |‖L^n φ‖₁ − 1| = %.2e (n ≤ 20, exact pushforward); weak(30) max = %.2e; grid Ulam strong min = %.3f",
               worst_strong, worst_weak, grid_strong_min));
}

void criterion3() {
    double worst = 0.0;
    for (const char* id : {"deterministic_doubling", "bernoulli_convolution", "expanding_ifs_23",
                           "rotations_irrational_diff", "rotations_rational_diff", "rotations_rational",
                           "deterministic_rational_rotation"})
        for (int N : kLadder) {
            const Vector h = invariant_density(build_ulam(gal(id), N));
            worst = std::max(worst, (h.array() - 1.0).abs().maxCoeff());
        }
    report(3, worst <= 1e-10, fmt("max |h − 1| = %.2e over 7 entries × 3 resolutions", worst));
}

void criterion4() {
    const auto K = build_ulam(gal("mult_contraction"), 256);
    const auto r = straube_probe(K, {1.0 / 16}, 16);
    const Matrix P = to_dense(K);
    Eigen::RowVectorXd u = Eigen::RowVectorXd::Ones(256);
    double oracle = 0.0;
    for (int n = 0; n <= 16; ++n) {
        std::vector<double> v(u.data(), u.data() + 256);
        std::sort(v.rbegin(), v.rend());
        double top = 0.0;
        for (int i = 0; i < 16; ++i) top += v[i];
        oracle = std::max(oracle, top / 256);
        u = u * P;
    }
    report(4, r.alpha[0] >= 0.99 && std::abs(r.alpha[0] - oracle) <= 1e-12,
           fmt("alpha_hat(1/16) = %.6f, dense-power oracle %.6f", r.alpha[0], oracle));
}

void criterion5() {
    double worst = 0.0;
    for (int N : kLadder) {
        const auto K = build_ulam(gal("alternating_halves"), N);
        const auto r = dstar_probe(K, ergodic_decomposition(K), 50);
        for (double s : r.s) worst = std::max(worst, std::abs(s - 1.0));
    }
    report(5, worst <= 1e-10, fmt("max |s_n − 1| = %.2e for n ≤ 50", worst));
}

void criterion6() {
    const auto& r = reports.at("additive_pinned_zero");
    const auto* d = r.find(ClassTag::D);
    bool ok = d && d->verdict == Verdict::evidence_against;
    const auto& cert = d->certificate;
    ok = ok && cert.value("fixed_point_rule", false) && cert.value("noise_samples", 0) == 1000;
    ClassifyConfig cfg;
    double worst = 0.0;
    for (const auto& per : cert.at("per_resolution")) {
        const auto eps = per.at("eps_hat_n0_1").get<std::vector<double>>();
        for (std::size_t i = 0; i < eps.size(); ++i) worst = std::max(worst, std::abs(eps[i] - cfg.deltas[i]));
    }
    ok = ok && cert.at("per_resolution").size() == kLadder.size() && worst <= 1e-10;
    report(6, ok, "fixed-point rule " + std::string(cert.value("fixed_point_rule", false) ? "fired" : "silent") +
                      fmt(" over %.0f noise draws; max |eps_hat(1, delta) − delta| = %.2e",
                          cert.value("noise_samples", 0), worst));
}

void criterion7() {
    bool ok = true;
    std::string detail;
    for (int N : kLadder) {
        const auto K = build_ulam(gal("rotations_rational"), N);
        const auto a = ac_probe(K, ergodic_decomposition(K), {0.25, 0.125, 0.0625, 0.03125}, N);
        bool found = false;
        for (const auto& s : a.component_sets)
            if (std::abs(s.measure - 4.0 / N) < 1e-15 && std::abs(s.tail - 1.0) <= 1e-12) found = true;
        ok = ok && found;
        detail += " N=" + std::to_string(N) + (found ? ":yes" : ":no");
    }
    report(7, ok, "set B with m(B) = 4/N and t(B) = 1:" + detail);
}

void criterion8() {
    const int N = 64;
    Vector half = Vector::Zero(N), centered(N), quarter = Vector::Zero(N);
    for (int i = 0; i < N; ++i) {
        if (i < N / 2) half[i] = 1.0;
        if (i >= N / 4 && i < N / 2) quarter[i] = 1.0;
        centered[i] = (i + 0.5) / N - 0.5;
    }
    int over = 0, cases = 0;
    double zmax = 0.0;
    std::uint64_t seed = 100;
    for (const char* id : {"bernoulli_convolution", "deterministic_doubling", "rotations_rational",
                           "additive_pinned_zero", "alternating_halves"}) {
        const auto& s = gal(id);
        const auto K = build_ulam(s, N);
        struct Case {
            int n;
            const Vector* phi;
            const Vector* psi;
        };
        for (const Case& c : {Case{1, &half, &half}, Case{3, &half, &half}, Case{5, &half, &half},
                              Case{3, &quarter, &centered}}) {
            const auto r = duality_check(s, K, *c.phi, *c.psi, c.n, 1000000, seed++);
            ++cases;
            zmax = std::max(zmax, r.z);
            if (r.z > 3.0) ++over;
        }
    }
    report(8, cases == 20 && over <= 1,
           std::to_string(over) + " of " + std::to_string(cases) + fmt(" checks with |z| > 3 (max z = %.2f)", zmax));
}

void criterion9() {
    const auto& s = gal("direct_sum_expanding_contracting");
    const auto K = build_ulam(s, 256);
    const auto d = ergodic_decomposition(K);
    const auto r = basin_survey(s, d, 2000);
    bool ok = r.fractions.size() == 2 && r.unassigned < 0.01;
    for (std::size_t k = 0; ok && k < 2; ++k) ok = std::abs(r.fractions[k] - 0.5) <= 3 * r.standard_errors[k];
    report(9, ok,
           fmt("fractions %.4f, %.4f; unassigned %.4f", r.fractions.size() > 0 ? r.fractions[0] : -1,
               r.fractions.size() > 1 ? r.fractions[1] : -1, r.unassigned) +
               fmt(" (se %.4f)", r.standard_errors.empty() ? 0.0 : r.standard_errors[0]));
}

void criterion10() {
    std::mt19937_64 rng(20240611);
    int agree = 0;
    const int total = 200;
    for (int c = 0; c < total; ++c) {
        const int N = 2 + c % 7;
        const auto Q = oracle::random_stochastic(rng, N);
        const auto want = oracle::decompose(Q);
        const auto got = ergodic_decomposition(oracle::to_transfer(Q));
        bool ok = got.components.size() == want.supports.size();
        for (std::size_t k = 0; ok && k < want.supports.size(); ++k) {
            ok = got.components[k].support == want.supports[k] && got.components[k].period == want.periods[k];
            for (int i = 0; ok && i < N; ++i)
                ok = std::abs(got.absorption(i, static_cast<Eigen::Index>(k)) -
                              static_cast<double>(want.absorption[i][k])) <= 1e-9;
        }
        if (ok) ++agree;
    }
    std::uniform_real_distribution<double> u(0.0, 1.0);
    int greedy_ok = 0;
    const int vectors = 500;
    for (int v = 0; v < vectors; ++v) {
        const int N = 2 + v % 11;
        std::vector<double> x(N);
        for (auto& e : x) e = u(rng);
        const int k = 1 + static_cast<int>(u(rng) * N) % N;
        Vector xv = Eigen::Map<Vector>(x.data(), N);
        if (std::abs(top_mass(xv, static_cast<double>(k) / N) - oracle::exhaustive_top_mass(x, k)) <= 1e-14)
            ++greedy_ok;
    }
    report(10, agree == total && greedy_ok == vectors,
           std::to_string(agree) + "/" + std::to_string(total) + " decompositions, " + std::to_string(greedy_ok) +
               "/" + std::to_string(vectors) + " greedy sets");
}

std::string slurp(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::stringstream s;
    s << f.rdbuf();
    return s.str();
}

bool run_suite(const fs::path& dir, const std::string& threads) {
    fs::remove_all(dir);
    fs::create_directories(dir);
    const std::vector<std::vector<std::string>> suite = {
        {"operator", "--gallery", "two_sink_additive", "--grid", "64,128"},
        {"operator", "--gallery", "mult_contraction", "--grid", "64"},
        {"densities", "--gallery", "direct_sum_expanding_contracting", "--grid", "128"},
        {"densities", "--gallery", "two_sink_additive", "--grid", "128"},
        {"classify", "--gallery", "bernoulli_convolution", "--grid", "64,128"},
        {"classify", "--gallery", "two_sink_additive", "--grid", "64,128"},
        {"classify", "--gallery", "blend_gradient_sinks", "--grid", "64,128"},
        {"basins", "--gallery", "direct_sum_expanding_contracting", "--grid", "128", "--samples", "200"},
        {"basins", "--gallery", "two_sink_additive", "--grid", "64", "--samples", "100"},
        {"correlate", "--gallery", "expanding_ifs_23", "--grid", "64"},
        {"correlate", "--gallery", "two_sink_additive", "--grid", "64"},
        {"gallery", "export", "rotations_irrational_diff"},
    };
    for (auto args : suite) {
        args.insert(args.begin(), "transferlab");
        for (const std::string& a : {std::string("--threads"), threads, std::string("--seed"), std::string("42"),
                                     std::string("--out"), dir.string()})
            args.push_back(a);
        std::vector<const char*> argv;
        for (const auto& a : args) argv.push_back(a.c_str());
        std::ostringstream out, err;
        if (run_cli(static_cast<int>(argv.size()), argv.data(), out, err) != 0) {
            std::printf("  suite command failed: %s %s\n", args[1].c_str(), err.str().c_str());
            return false;
        }
    }
    return true;
}

void criterion11() {
    const fs::path root = fs::temp_directory_path() / "transferlab_acceptance";
    bool ok = run_suite(root / "t1", "1") && run_suite(root / "t8", "8");
    int files = 0, differing = 0;
    if (ok) {
        for (const auto& e : fs::directory_iterator(root / "t1")) {
            ++files;
            const fs::path other = root / "t8" / e.path().filename();
            if (!fs::exists(other) || slurp(e.path()) != slurp(other)) ++differing;
        }
        int files8 = 0;
        for ([[maybe_unused]] const auto& e : fs::directory_iterator(root / "t8")) ++files8;
        ok = differing == 0 && files == files8 && files > 0;
    }
    fs::remove_all(root);
    report(11, ok, std::to_string(files) + " JSON/CSV/ULAM files compared, " + std::to_string(differing) +
                       " differ between --threads 1 and --threads 8");
}

}  // namespace

int main() {
    set_thread_count(std::max(1u, std::thread::hardware_concurrency()));
    criterion1();
    criterion2();
    criterion3();
    criterion4();
    criterion5();
    criterion6();
    criterion7();
    criterion8();
    criterion9();
    criterion10();
    criterion11();
    std::printf("%d criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
