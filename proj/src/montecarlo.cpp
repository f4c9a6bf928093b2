#include "transferlab/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "transferlab/errors.hpp"
#include "transferlab/parallel.hpp"

namespace transferlab {

namespace {

constexpr std::uint64_t kStartStream = 0xB0A51;
constexpr std::uint64_t kDualityStart = 0xD0A1;

int cell(double x, int N) {
    const int j = static_cast<int>(std::floor(x * N));
    return std::clamp(j, 0, N - 1);
}

bool is_fixed(const RandomSystem& s, double x) {
    for (double p : s.pinned_points)
        if (p == x) return true;
    for (double p : s.fixed_points)
        if (p == x) return true;
    return false;
}

// Expanding affine branches shift bits out on every step, so a double orbit collapses
// onto a dyadic point within ~53 iterations. Everything below 2^-44 is redrawn from a
// separate lane of the same Philox block, which keeps y in its dyadic cell of width 2^-44.
double refresh_low_bits(double y, std::uint32_t bits) {
    if (!(y > 0.0 && y < 1.0)) return y;
    constexpr double scale = 0x1p44;
    const double z = (std::floor(y * scale) + bits * 0x1p-32) / scale;
    return std::min(z, std::nextafter(1.0, 0.0));
}

}  // namespace

double orbit_step(const RandomSystem& s, const CounterStream& stream, std::uint64_t j, double x) {
    if (!s.declared_atomic()) return apply_random(s, sample_noise(s.noise, stream, j), x);
    for (double p : s.pinned_points)
        if (p == x) return x;
    const double t = stream.uniform(j);
    const auto& f = selected_branch(s, t);
    const double y = eval_branch(f, x, s.domain);
    if (is_fixed(s, x) || std::abs(f.pieces[f.piece_index(x)].slope) <= 1.0) return y;
    return refresh_low_bits(y, stream.block(j)[2]);
}

double draw_noise(const RandomSystem& s, const CounterStream& stream, std::uint64_t counter) {
    if (s.declared_atomic()) return stream.uniform(counter);
    return sample_noise(s.noise, stream, counter);
}

std::vector<double> random_orbit(const RandomSystem& s, double x0, std::uint64_t seed, long n, std::uint64_t stream_id) {
    if (!(x0 >= 0.0 && x0 <= 1.0)) throw DomainEscape("initial point outside [0,1]");
    const CounterStream stream(seed, stream_id);
    std::vector<double> orbit{x0};
    orbit.reserve(static_cast<std::size_t>(n) + 1);
    double x = x0;
    for (long j = 0; j < n; ++j) {
        x = orbit_step(s, stream, static_cast<std::uint64_t>(j), x);
        orbit.push_back(x);
    }
    return orbit;
}

EmpiricalMeasure birkhoff_histogram(const RandomSystem& s, double x0, std::uint64_t seed, long n_burn, long n_avg,
                                    int N, std::uint64_t stream_id) {
    if (n_avg < 1) throw SpecError("n_avg must be at least 1");
    if (!(x0 >= 0.0 && x0 <= 1.0)) throw DomainEscape("initial point outside [0,1]");
    const CounterStream stream(seed, stream_id);
    std::vector<long> counts(N, 0);
    double x = x0;
    for (long j = 0; j < n_burn + n_avg; ++j) {
        if (j >= n_burn) ++counts[cell(x, N)];
        x = orbit_step(s, stream, static_cast<std::uint64_t>(j), x);
    }
    EmpiricalMeasure m;
    m.mass.resize(N);
    for (int i = 0; i < N; ++i) m.mass[i] = static_cast<double>(counts[i]) / static_cast<double>(n_avg);
    m.n_burn = n_burn;
    m.n_avg = n_avg;
    m.seed = seed;
    m.stream_id = stream_id;
    return m;
}

double batch_means_se(const std::vector<double>& x, int batches) {
    const std::size_t n = x.size();
    if (n < 2) return 0.0;
    const std::size_t b = std::min<std::size_t>(static_cast<std::size_t>(batches), n);
    std::vector<double> means(b);
    for (std::size_t k = 0; k < b; ++k) {
        const std::size_t lo = n * k / b, hi = n * (k + 1) / b;
        double sum = 0.0;
        for (std::size_t i = lo; i < hi; ++i) sum += x[i];
        means[k] = sum / static_cast<double>(hi - lo);
    }
    const double mean = std::accumulate(means.begin(), means.end(), 0.0) / static_cast<double>(b);
    double var = 0.0;
    for (double m : means) var += (m - mean) * (m - mean);
    var /= static_cast<double>(b - 1);
    return std::sqrt(var / static_cast<double>(b));
}

BasinReport basin_survey(const RandomSystem& s, const ErgodicDecomposition& d, long n_samples, long n_burn, long n_avg,
                         double threshold, std::uint64_t seed) {
    const int N = d.N;
    const std::size_t r = d.components.size();
    BasinReport rep;
    rep.fractions.assign(r, 0.0);
    rep.standard_errors.assign(r, 0.0);
    rep.n_samples = n_samples;
    rep.n_burn = n_burn;
    rep.n_avg = n_avg;
    rep.threshold = threshold;
    if (n_samples <= 0) return rep;

    std::vector<std::vector<double>> target(r, std::vector<double>(N, 0.0));
    for (std::size_t k = 0; k < r; ++k)
        for (int i : d.components[k].support) target[k][i] = d.components[k].density[i] / N;

    const CounterStream starts(seed, kStartStream);
    rep.assignment.assign(static_cast<std::size_t>(n_samples), -1);
    parallel_for(static_cast<std::size_t>(n_samples), [&](std::size_t b0, std::size_t b1) {
        for (std::size_t n = b0; n < b1; ++n) {
            const double x0 = starts.uniform(n);
            const auto h = birkhoff_histogram(s, x0, seed, n_burn, n_avg, N, (1ULL << 32) + n);
            int best = -1;
            double best_dist = std::numeric_limits<double>::infinity();
            for (std::size_t k = 0; k < r; ++k) {
                double dist = 0.0;
                for (int i = 0; i < N; ++i) dist += std::abs(h.mass[i] - target[k][i]);
                if (dist < best_dist) {
                    best_dist = dist;
                    best = static_cast<int>(k);
                }
            }
            rep.assignment[n] = best_dist < threshold ? best : -1;
        }
    });

    rep.batches = static_cast<int>(std::min<long>(100, n_samples));
    std::vector<double> ind(static_cast<std::size_t>(n_samples));
    for (std::size_t k = 0; k <= r; ++k) {
        const int label = k < r ? static_cast<int>(k) : -1;
        for (std::size_t n = 0; n < ind.size(); ++n) ind[n] = rep.assignment[n] == label ? 1.0 : 0.0;
        const double frac = std::accumulate(ind.begin(), ind.end(), 0.0) / static_cast<double>(n_samples);
        const double se = batch_means_se(ind, rep.batches);
        if (k < r) {
            rep.fractions[k] = frac;
            rep.standard_errors[k] = se;
        } else {
            rep.unassigned = frac;
            rep.unassigned_se = se;
        }
    }
    return rep;
}

CorrelationFit annealed_correlation(const TransferMatrix& K, const Vector& h, const Vector& phi, const Vector& psi,
                                    int n_max) {
    const int N = K.N;
    if (h.size() != N || phi.size() != N || psi.size() != N) throw DimensionMismatch("observable length differs from N");
    for (int i = 0; i < N; ++i)
        if (h[i] == 0.0 && phi[i] != 0.0) throw SupportViolation("phi is nonzero outside the support of h");

    CorrelationFit fit;
    const double base = inner(psi, h) * inner(phi, h);
    Vector u = phi.cwiseProduct(h);
    for (int n = 0; n <= n_max; ++n) {
        fit.C.push_back(inner(psi, u) - base);
        if (n < n_max) u = apply(K, u);
    }

    std::vector<double> xs, ys;
    for (int n = 0; n <= n_max; ++n)
        if (std::abs(fit.C[n]) > 1e-14) {
            xs.push_back(n);
            ys.push_back(std::log(std::abs(fit.C[n])));
        }
    fit.fit_points = static_cast<int>(xs.size());
    if (xs.size() < 2) {
        fit.rho = 0.0;
        fit.fit_C = xs.empty() ? 0.0 : std::exp(ys.front());
        fit.r2 = 1.0;
        return fit;
    }
    const double m = static_cast<double>(xs.size());
    const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / m;
    const double my = std::accumulate(ys.begin(), ys.end(), 0.0) / m;
    double sxx = 0.0, sxy = 0.0, syy = 0.0;
    for (std::size_t k = 0; k < xs.size(); ++k) {
        sxx += (xs[k] - mx) * (xs[k] - mx);
        sxy += (xs[k] - mx) * (ys[k] - my);
        syy += (ys[k] - my) * (ys[k] - my);
    }
    const double slope = sxy / sxx;
    fit.rho = std::clamp(std::exp(slope), 0.0, 1.0);
    fit.fit_C = std::exp(my - slope * mx);
    fit.r2 = syy > 0.0 ? (sxy * sxy) / (sxx * syy) : 1.0;
    return fit;
}

DualityResult duality_check(const RandomSystem& s, const TransferMatrix& K, const Vector& phi, const Vector& psi,
                            int n, long n_samples, std::uint64_t seed) {
    if (n < 0) throw SpecError("duality_check needs n >= 0");
    const int N = K.N;
    DualityResult res;
    res.n_samples = n_samples;
    Vector u = phi;
    for (int k = 0; k < n; ++k) u = apply(K, u);
    res.matrix_value = inner(psi, u);
    if (n_samples <= 0) return res;

    const CounterStream starts(seed, kDualityStart);
    std::vector<double> values(static_cast<std::size_t>(n_samples));
    parallel_for(values.size(), [&](std::size_t b0, std::size_t b1) {
        for (std::size_t k = b0; k < b1; ++k) {
            const double x0 = starts.uniform(k);
            const CounterStream noise(seed, kDualityStart + 1 + k);
            double x = x0;
            for (int j = 0; j < n; ++j) x = orbit_step(s, noise, static_cast<std::uint64_t>(j), x);
            values[k] = psi[cell(x, N)] * phi[cell(x0, N)];
        }
    });
    res.mc_estimate = std::accumulate(values.begin(), values.end(), 0.0) / static_cast<double>(n_samples);
    res.se = batch_means_se(values, 100);
    const double diff = std::abs(res.mc_estimate - res.matrix_value);
    if (res.se > 0.0)
        res.z = diff / res.se;
    else
        res.z = diff == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
    return res;
}

}  // namespace transferlab
