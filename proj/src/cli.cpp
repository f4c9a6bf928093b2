#include "transferlab/cli.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <thread>

#include <CLI11.hpp>

#include "transferlab/classify.hpp"
#include "transferlab/errors.hpp"
#include "transferlab/gallery.hpp"
#include "transferlab/montecarlo.hpp"
#include "transferlab/parallel.hpp"

namespace transferlab {

namespace fs = std::filesystem;
using Json = nlohmann::json;

namespace {

struct RunConfig {
    std::string system_path;
    std::string gallery_id;
    std::string grid;
    std::uint64_t seed = 0;
    std::string out_dir;
    int quadrature = 8;
    long samples = 2000;
    unsigned threads = std::max(1u, std::thread::hardware_concurrency());
    std::string threshold_file;
    std::string export_id;

    Json thresholds = Json::object();
    ClassifyConfig classify;
};

struct Loaded {
    RandomSystem system;
    std::string id;
};

std::vector<int> parse_grid(const std::string& s) {
    std::vector<int> grid;
    std::stringstream ss(s);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
        if (tok.empty()) continue;
        std::size_t used = 0;
        int v = 0;
        try {
            v = std::stoi(tok, &used);
        } catch (const std::exception&) {
            throw SpecError("bad --grid entry: " + tok);
        }
        if (used != tok.size() || v < 2) throw SpecError("bad --grid entry: " + tok);
        if (!grid.empty() && v <= grid.back()) throw SpecError("--grid must be strictly increasing");
        grid.push_back(v);
    }
    if (grid.empty()) throw SpecError("empty --grid");
    return grid;
}

std::vector<int> grid_or(const RunConfig& c, std::vector<int> fallback) {
    return c.grid.empty() ? fallback : parse_grid(c.grid);
}

Loaded load(const RunConfig& c) {
    if (!c.system_path.empty() && !c.gallery_id.empty()) throw SpecError("give --system or --gallery, not both");
    if (!c.system_path.empty()) {
        RandomSystem s = load_system(c.system_path);
        return {s, s.id};
    }
    if (!c.gallery_id.empty()) {
        const auto& e = gallery_entry(c.gallery_id);
        return {e.system, e.id};
    }
    throw SpecError("need --system PATH or --gallery ID");
}

fs::path out_path(const RunConfig& c, const std::string& name) {
    fs::create_directories(c.out_dir);
    return fs::path(c.out_dir) / name;
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream f(p, std::ios::binary);
    if (!f) throw SpecError("cannot write " + p.string());
    f << text;
}

void write_json(const fs::path& p, const Json& j) { write_text(p, j.dump(2) + "\n"); }

std::string fmt(double v) {
    std::ostringstream s;
    s << std::setprecision(17) << v;
    return s.str();
}

void write_curve(const fs::path& p, const std::string& header, const std::vector<std::pair<double, double>>& pts) {
    std::ostringstream s;
    s << header << "\n";
    for (auto [n, v] : pts) s << static_cast<long>(n) << "," << fmt(v) << "\n";
    write_text(p, s.str());
}

std::string tag(const std::string& id, int N) { return id + "_N" + std::to_string(N); }

double threshold_or(const RunConfig& c, const char* key, double fallback) {
    return c.thresholds.contains(key) ? c.thresholds.at(key).get<double>() : fallback;
}

int cmd_operator(const RunConfig& c, std::ostream& out) {
    const auto sys = load(c);
    Json log = Json::array();
    for (int N : grid_or(c, {64})) {
        const TransferMatrix K = build_ulam(sys.system, N, c.quadrature, c.seed);
        const std::string name = tag(sys.id, N) + ".ulam";
        std::ofstream f(out_path(c, name), std::ios::binary);
        write_matrix(f, K);
        double worst = 0.0;
        for (double d : K.row_defect) worst = std::max(worst, std::abs(d));
        log.push_back({{"N", N},
                       {"file", name},
                       {"build_method", K.build_method},
                       {"nnz", K.nnz()},
                       {"max_row_defect", worst},
                       {"monte_carlo_rows", std::count(K.monte_carlo_rows.begin(), K.monte_carlo_rows.end(), 1)}});
        out << "N=" << N << " nnz=" << K.nnz() << " method=" << K.build_method << " -> " << name << "\n";
    }
    write_json(out_path(c, sys.id + "_operator_log.json"), {{"system_id", sys.id}, {"builds", log}});
    return 0;
}

int cmd_densities(const RunConfig& c, std::ostream& out, std::ostream& err) {
    const auto sys = load(c);
    const auto& cfg = c.classify;
    for (int N : grid_or(c, {256})) {
        const TransferMatrix K = build_ulam(sys.system, N, c.quadrature, c.seed);
        const auto dec = ergodic_decomposition(K, cfg.tol_sparse, cfg.tol);
        const auto straube = straube_probe(K, cfg.deltas, cfg.straube_n_max, cfg.smallness);
        Json comps = Json::array();
        for (std::size_t k = 0; k < dec.components.size(); ++k) {
            const auto& comp = dec.components[k];
            const std::string file = tag(sys.id, N) + "_density_" + std::to_string(k) + ".csv";
            std::ofstream f(out_path(c, file), std::ios::binary);
            write_density_csv(f, comp.density);
            comps.push_back({{"support", comp.support}, {"period", comp.period}, {"density_file", file}});
        }
        const std::string abs_file = tag(sys.id, N) + "_absorption.csv";
        {
            std::ostringstream s;
            s << "cell";
            for (std::size_t k = 0; k < dec.components.size(); ++k) s << ",component_" << k;
            s << "\n";
            for (int i = 0; i < N; ++i) {
                s << i;
                for (Eigen::Index k = 0; k < dec.absorption.cols(); ++k) s << "," << fmt(dec.absorption(i, k));
                s << "\n";
            }
            write_text(out_path(c, abs_file), s.str());
        }
        Json rep = {{"system_id", sys.id},
                    {"N", N},
                    {"build_method", K.build_method},
                    {"components", comps},
                    {"transient_cells", dec.transient_cells},
                    {"absorption_matrix_file", abs_file},
                    {"maximal_support_reached", dec.maximal_support_reached},
                    {"straube_alpha_hat", straube.alpha},
                    {"straube_deltas", straube.deltas}};
        const bool straube_against = std::all_of(straube.alpha.begin(), straube.alpha.end(),
                                                 [&](double a) { return a >= 1.0 - cfg.smallness; });
        if (straube_against) {
            const std::string msg = "Straube evidence is against (S) at N=" + std::to_string(N) +
                                    ": the decomposition is a resolution artifact";
            rep["warning"] = msg;
            rep["resolution_artifact"] = true;
            err << "WARNING: " << msg << "\n";
        }
        write_json(out_path(c, tag(sys.id, N) + "_decomposition.json"), rep);
        out << "N=" << N << " components=" << dec.components.size() << " transient=" << dec.transient_cells.size()
            << "\n";
    }
    return 0;
}

int cmd_classify(const RunConfig& c, std::ostream& out) {
    const auto sys = load(c);
    ClassifyConfig cfg = c.classify;
    if (!c.grid.empty()) cfg.ladder = parse_grid(c.grid);
    const auto report = classify(sys.system, cfg);
    const Json j = report_to_json(report);
    write_json(out_path(c, sys.id + "_report.json"), j);
    for (const auto& p : report.probes)
        for (const auto& cv : p.curves)
            write_curve(out_path(c, tag(sys.id + "_" + to_string(p.class_tag) + "_" + cv.name, cv.resolution) + ".csv"),
                        "n,value", cv.points);
    out << j.dump(2) << "\n";
    return report.hierarchy_ok ? 0 : 4;
}

int cmd_basins(const RunConfig& c, std::ostream& out) {
    const auto sys = load(c);
    const int N = grid_or(c, {256}).back();
    const TransferMatrix K = build_ulam(sys.system, N, c.quadrature, c.seed);
    const auto dec = ergodic_decomposition(K, c.classify.tol_sparse, c.classify.tol);
    const auto n_burn = static_cast<long>(threshold_or(c, "n_burn", 1000));
    const auto n_avg = static_cast<long>(threshold_or(c, "n_avg", 100000));
    const double threshold = threshold_or(c, "basin_threshold", 0.2);
    const auto rep = basin_survey(sys.system, dec, c.samples, n_burn, n_avg, threshold, c.seed);
    Json j = {{"system_id", sys.id},
              {"N", N},
              {"n_samples", rep.n_samples},
              {"n_burn", rep.n_burn},
              {"n_avg", rep.n_avg},
              {"threshold", rep.threshold},
              {"batches", rep.batches},
              {"fractions", rep.fractions},
              {"standard_errors", rep.standard_errors},
              {"unassigned", rep.unassigned},
              {"unassigned_se", rep.unassigned_se},
              {"seed", c.seed}};
    write_json(out_path(c, tag(sys.id, N) + "_basins.json"), j);
    out << j.dump(2) << "\n";
    return 0;
}

int cmd_correlate(const RunConfig& c, std::ostream& out) {
    const auto sys = load(c);
    const int N = grid_or(c, {64}).back();
    const int n_max = static_cast<int>(threshold_or(c, "correlation_n_max", 30));
    const TransferMatrix K = build_ulam(sys.system, N, c.quadrature, c.seed);
    const auto dec = ergodic_decomposition(K, c.classify.tol_sparse, c.classify.tol);
    Json fits = Json::array();
    for (std::size_t k = 0; k < dec.components.size(); ++k) {
        const auto& comp = dec.components[k];
        if (comp.period != 1) {
            fits.push_back({{"component", k}, {"skipped", "period " + std::to_string(comp.period)}});
            continue;
        }
        Vector phi = Vector::Zero(N);
        for (int i : comp.support) phi[i] = (i + 0.5) / N - 0.5;
        const auto fit = annealed_correlation(K, comp.density, phi, phi, n_max);
        std::vector<std::pair<double, double>> pts;
        for (std::size_t n = 0; n < fit.C.size(); ++n) pts.emplace_back(static_cast<double>(n), fit.C[n]);
        const std::string file = tag(sys.id, N) + "_correlation_" + std::to_string(k) + ".csv";
        write_curve(out_path(c, file), "n,C_n", pts);
        fits.push_back({{"component", k},
                        {"C", fit.fit_C},
                        {"rho", fit.rho},
                        {"r2", fit.r2},
                        {"fit_points", fit.fit_points},
                        {"curve_file", file}});
    }
    Json j = {{"system_id", sys.id}, {"N", N}, {"observable", "x - 1/2 on the component support"},
              {"n_max", n_max}, {"fits", fits}};
    write_json(out_path(c, tag(sys.id, N) + "_correlation.json"), j);
    out << j.dump(2) << "\n";
    return 0;
}

int cmd_gallery_export(const RunConfig& c, std::ostream& out) {
    const auto& e = gallery_entry(c.export_id);
    const auto p = out_path(c, e.id + ".json");
    write_json(p, e.spec);
    out << p.string() << "\n";
    return 0;
}

int cmd_gallery_list(std::ostream& out) {
    for (const auto& e : list_gallery()) {
        out << e.id << (e.exploratory ? " [exploratory]" : "");
        for (const auto& [t, x] : e.expected) out << " " << to_string(t) << ":" << to_string(x);
        if (e.expected_components_min) out << " components>=" << *e.expected_components_min;
        out << "\n";
    }
    return 0;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    RunConfig c;
    if (const char* env = std::getenv("TRANSFERLAB_OUT")) c.out_dir = env;
    if (c.out_dir.empty()) c.out_dir = ".";

    CLI::App app{"transfer-operator classification of random interval maps"};
    app.require_subcommand(1);
    app.option_defaults()->always_capture_default();
    app.add_option("--system", c.system_path, "system spec JSON");
    app.add_option("--gallery", c.gallery_id, "gallery id");
    app.add_option("--grid", c.grid, "resolution ladder N[,N...]");
    app.add_option("--seed", c.seed, "64-bit seed");
    app.add_option("--out", c.out_dir, "output directory");
    app.add_option("--quadrature", c.quadrature, "Gauss-Legendre points per cell")->check(CLI::Range(1, 32));
    app.add_option("--samples", c.samples, "Monte Carlo samples")->check(CLI::NonNegativeNumber);
    app.add_option("--threads", c.threads, "worker cap")->check(CLI::Range(1u, 1024u));
    app.add_option("--threshold-file", c.threshold_file, "JSON with threshold overrides");

    auto* op = app.add_subcommand("operator", "write Ulam matrices");
    auto* dens = app.add_subcommand("densities", "ergodic decomposition and densities");
    auto* cls = app.add_subcommand("classify", "classification report");
    auto* bas = app.add_subcommand("basins", "statistical basin survey");
    auto* cor = app.add_subcommand("correlate", "annealed correlation curves");
    auto* gal = app.add_subcommand("gallery", "built-in systems");
    gal->require_subcommand(1);
    auto* gexp = gal->add_subcommand("export", "write a gallery system spec");
    gexp->add_option("id", c.export_id)->required();
    auto* glist = gal->add_subcommand("list", "list gallery entries");
    for (auto* s : {op, dens, cls, bas, cor, gal, gexp, glist}) s->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        std::ostringstream o, r;
        const int code = app.exit(e, o, r);
        out << o.str();
        err << r.str();
        return code == 0 ? 0 : 2;
    }

    try {
        set_thread_count(c.threads);
        if (!c.threshold_file.empty()) {
            std::ifstream f(c.threshold_file);
            if (!f) throw SpecError("threshold file not found: " + c.threshold_file);
            c.thresholds = Json::parse(f);
        }
        c.classify.seed = c.seed;
        c.classify.quadrature = c.quadrature;
        c.classify.apply_overrides(c.thresholds);

        if (*op) return cmd_operator(c, out);
        if (*dens) return cmd_densities(c, out, err);
        if (*cls) return cmd_classify(c, out);
        if (*bas) return cmd_basins(c, out);
        if (*cor) return cmd_correlate(c, out);
        if (*gexp) return cmd_gallery_export(c, out);
        if (*glist) return cmd_gallery_list(out);
    } catch (const UnknownId& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    } catch (const Error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const nlohmann::json::exception& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return 2;
    }
    return 2;
}

}  // namespace transferlab
