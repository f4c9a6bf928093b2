#include "transferlab/ulam.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>
#include <utility>

#include <boost/math/quadrature/gauss.hpp>

#include "transferlab/errors.hpp"
#include "transferlab/parallel.hpp"

namespace transferlab {

Partition::Partition(int n) : N(n) {
    if (n < 2) throw SpecError("partition needs N >= 2");
}

int Partition::cell_of(double x) const {
    int j = static_cast<int>(std::floor(x * N));
    return std::clamp(j, 0, N - 1);
}

bool TransferMatrix::has_monte_carlo_rows() const {
    return std::any_of(monte_carlo_rows.begin(), monte_carlo_rows.end(), [](char c) { return c != 0; });
}

namespace {

SparseMatrix from_triplets(int N, const std::vector<Triplet>& entries) {
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(entries.size());
    for (const auto& e : entries) t.emplace_back(e.i, e.j, e.v);
    SparseMatrix K(N, N);
    K.setFromTriplets(t.begin(), t.end());
    K.makeCompressed();
    return K;
}

void finish(TransferMatrix& T) {
    T.KT = SparseMatrix(T.K.transpose());
    T.KT.makeCompressed();
}

// Merges duplicate column indices of one row in index order.
void merge_row(std::vector<std::pair<int, double>>& row) {
    std::stable_sort(row.begin(), row.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    std::size_t out = 0;
    for (std::size_t k = 0; k < row.size(); ++k) {
        if (out > 0 && row[out - 1].first == row[k].first)
            row[out - 1].second += row[k].second;
        else
            row[out++] = row[k];
    }
    row.resize(out);
}

template <std::size_t Q>
void gauss_rule(std::vector<double>& x, std::vector<double>& w) {
    using G = boost::math::quadrature::gauss<double, Q>;
    const auto& a = G::abscissa();
    const auto& wt = G::weights();
    std::vector<std::pair<double, double>> pts;
    for (std::size_t k = 0; k < a.size(); ++k) {
        if (a[k] == 0.0) {
            pts.emplace_back(0.0, wt[k]);
        } else {
            pts.emplace_back(-a[k], wt[k]);
            pts.emplace_back(a[k], wt[k]);
        }
    }
    std::sort(pts.begin(), pts.end());
    x.clear();
    w.clear();
    for (auto [xi, wi] : pts) {
        x.push_back(0.5 * (xi + 1.0));
        w.push_back(0.5 * wi);
    }
}

template <std::size_t... Q>
void gauss_dispatch(int q, std::vector<double>& x, std::vector<double>& w, std::index_sequence<Q...>) {
    bool found = ((q == static_cast<int>(Q + 1) ? (gauss_rule<Q + 1>(x, w), true) : false) || ...);
    if (!found) throw SpecError("quadrature order must lie in [1,32]");
}

// Adds the mass of a uniform law on the real interval [y0, y1] (weight `mass`) to row cells.
void spread_interval(double y0, double y1, double mass, int N, bool wrap,
                     std::vector<std::pair<int, double>>& row) {
    if (y0 > y1) std::swap(y0, y1);
    const double len = y1 - y0;
    const long k0 = static_cast<long>(std::floor(y0 * N));
    long k1 = static_cast<long>(std::ceil(y1 * N));
    if (k1 <= k0) k1 = k0 + 1;
    for (long k = k0; k < k1; ++k) {
        const double lo = std::max(y0, static_cast<double>(k) / N);
        const double hi = std::min(y1, static_cast<double>(k + 1) / N);
        if (hi <= lo) continue;
        long j = k;
        if (wrap) {
            j %= N;
            if (j < 0) j += N;
        } else if (j < 0 || j >= N) {
            throw DomainEscape("branch image leaves [0,1] during the Ulam build");
        }
        row.emplace_back(static_cast<int>(j), mass * (hi - lo) / len);
    }
}

void add_point(double y, double mass, int N, bool wrap, std::vector<std::pair<int, double>>& row) {
    if (!std::isfinite(y)) throw ZeroSlopeOverlap("non-finite image of a constant piece");
    if (wrap) y -= std::floor(y);
    if (!wrap && (y < 0.0 || y > 1.0)) throw DomainEscape("constant piece outside [0,1]");
    int j = std::clamp(static_cast<int>(std::floor(y * N)), 0, N - 1);
    row.emplace_back(j, mass);
}

// Circular distribution function of the noise: G(u) = floor(u) + F(frac u).
double circular_cdf(const NoiseSpec& noise, double u) {
    const double fl = std::floor(u);
    return fl + noise.cdf(u - fl);
}

}  // namespace

void gauss_legendre_01(int q, std::vector<double>& nodes, std::vector<double>& weights) {
    gauss_dispatch(q, nodes, weights, std::make_index_sequence<32>{});
}

TransferMatrix assemble(int N, std::vector<Triplet> entries, std::string method, double max_defect,
                        double drop_threshold) {
    std::stable_sort(entries.begin(), entries.end(),
                     [](const Triplet& a, const Triplet& b) { return a.i != b.i ? a.i < b.i : a.j < b.j; });
    std::vector<std::vector<std::pair<int, double>>> rows(N);
    for (const auto& e : entries) {
        if (e.i < 0 || e.i >= N || e.j < 0 || e.j >= N) throw DimensionMismatch("entry outside the grid");
        if (!std::isfinite(e.v) || e.v < 0.0) throw ZeroSlopeOverlap("non-finite or negative matrix entry");
        rows[e.i].emplace_back(e.j, e.v);
    }
    TransferMatrix T;
    T.N = N;
    T.build_method = std::move(method);
    T.row_defect.assign(N, 0.0);
    T.monte_carlo_rows.assign(N, 0);
    std::vector<Triplet> kept;
    kept.reserve(entries.size());
    for (int i = 0; i < N; ++i) {
        auto& row = rows[i];
        merge_row(row);
        row.erase(std::remove_if(row.begin(), row.end(), [&](const auto& e) { return e.second < drop_threshold; }),
                  row.end());
        double sum = 0.0;
        for (const auto& e : row) sum += e.second;
        T.row_defect[i] = std::abs(1.0 - sum);
        if (max_defect >= 0.0 && T.row_defect[i] > max_defect) {
            std::ostringstream msg;
            msg << "row " << i << " defect " << T.row_defect[i] << " exceeds " << max_defect;
            throw RowDefectTooLarge(msg.str());
        }
        if (row.empty() || sum <= 0.0) throw ZeroSlopeOverlap("empty row in transfer matrix");
        if (sum != 1.0) {
            for (auto& e : row) e.second /= sum;
            double resid = 1.0;
            std::size_t big = 0;
            for (std::size_t k = 0; k < row.size(); ++k) {
                resid -= row[k].second;
                if (row[k].second > row[big].second) big = k;
            }
            row[big].second += resid;
        }
        for (const auto& e : row) kept.push_back({i, e.first, e.second});
    }
    T.K = from_triplets(N, kept);
    finish(T);
    return T;
}

TransferMatrix build_ulam_ifs(const RandomSystem& s, const Partition& part) {
    if (!s.declared_atomic()) throw SpecError("build_ulam_ifs needs a FiniteIFS or Deterministic system");
    const int N = part.N;
    std::vector<std::vector<std::pair<int, double>>> rows(N);
    parallel_for(static_cast<std::size_t>(N), [&](std::size_t b0, std::size_t b1) {
        for (std::size_t ii = b0; ii < b1; ++ii) {
            const int i = static_cast<int>(ii);
            const double c0 = part.left(i), c1 = part.right(i);
            auto& row = rows[i];
            for (std::size_t b = 0; b < s.branches.size(); ++b) {
                const auto& f = s.branches[b];
                const double w = s.weights[b];
                for (std::size_t k = f.piece_index(c0); k < f.pieces.size(); ++k) {
                    const double lo = std::max(c0, f.breakpoints[k]);
                    const double hi = std::min(c1, f.breakpoints[k + 1]);
                    if (f.breakpoints[k] >= c1) break;
                    if (hi <= lo) continue;
                    const auto& p = f.pieces[k];
                    const double share = w * N * (hi - lo);
                    if (p.slope == 0.0)
                        add_point(p.intercept, share, N, f.wrap, row);
                    else
                        spread_interval(p.slope * lo + p.intercept, p.slope * hi + p.intercept, share, N, f.wrap,
                                        row);
                }
            }
            merge_row(row);
        }
    });
    std::vector<Triplet> entries;
    for (int i = 0; i < N; ++i)
        for (auto [j, v] : rows[i]) entries.push_back({i, j, v});
    return assemble(N, std::move(entries), "exact_preimage");
}

TransferMatrix build_ulam_kernel(const RandomSystem& s, const Partition& part, int q, std::uint64_t seed) {
    if (s.declared_atomic()) throw SpecError("build_ulam_kernel needs a noise-driven system");
    const int N = part.N;
    std::vector<double> xs, ws;
    gauss_legendre_01(q, xs, ws);
    const long mc_samples = 10000L * q;
    std::vector<std::vector<std::pair<int, double>>> rows(N);
    std::vector<char> mc(N, 0);

    parallel_for(static_cast<std::size_t>(N), [&](std::size_t b0, std::size_t b1) {
        std::vector<double> cdf_edges(N + 1);
        for (std::size_t ii = b0; ii < b1; ++ii) {
            const int i = static_cast<int>(ii);
            auto& row = rows[i];
            bool degenerate = false;
            for (std::size_t k = 0; k < xs.size() && !degenerate; ++k) {
                const double x = (i + xs[k]) / N;
                const double f0 = eval_branch(s.base, x, s.domain);
                if (s.kind == SystemKind::AdditiveNoise) {
                    for (int j = 0; j <= N; ++j) cdf_edges[j] = circular_cdf(s.noise, static_cast<double>(j) / N - f0);
                    for (int j = 0; j < N; ++j) {
                        const double m = cdf_edges[j + 1] - cdf_edges[j];
                        if (m > 0.0) row.emplace_back(j, ws[k] * m);
                    }
                    continue;
                }
                // y(t) = a + b t for t in [0,1]
                double a = f0, b = 0.0;
                if (s.kind == SystemKind::MultiplicativeNoise) {
                    b = -s.epsilon * f0;
                } else {
                    a = blend_anchor(s, x);
                    b = x - a;
                }
                if (b == 0.0) {
                    degenerate = true;
                    break;
                }
                const double y0 = std::min(a, a + b), y1 = std::max(a, a + b);
                const bool circle = s.domain == DomainKind::Circle;
                long c0 = static_cast<long>(std::floor(y0 * N)), c1 = static_cast<long>(std::floor(y1 * N));
                if (!circle) {
                    c0 = part.cell_of(y0);
                    c1 = part.cell_of(y1);
                }
                for (long c = c0; c <= c1; ++c) {
                    const int j = static_cast<int>(((c % N) + N) % N);
                    const double lo = std::max(y0, static_cast<double>(c) / N);
                    const double hi = (!circle && j == N - 1) ? y1 : std::min(y1, static_cast<double>(c + 1) / N);
                    if (hi < lo) continue;
                    double t0 = (lo - a) / b, t1 = (hi - a) / b;
                    if (t0 > t1) std::swap(t0, t1);
                    const double m = s.noise.cdf(t1) - s.noise.cdf(t0);
                    if (m > 0.0) row.emplace_back(j, ws[k] * m);
                }
            }
            if (degenerate) {
                row.clear();
                mc[i] = 1;
                const CounterStream xs_stream(seed, 2 * static_cast<std::uint64_t>(i));
                const CounterStream ts_stream(seed, 2 * static_cast<std::uint64_t>(i) + 1);
                const double share = 1.0 / static_cast<double>(mc_samples);
                for (long n = 0; n < mc_samples; ++n) {
                    const double x = (i + xs_stream.uniform(n)) / N;
                    const double t = sample_noise(s.noise, ts_stream, n);
                    row.emplace_back(part.cell_of(apply_random(s, t, x)), share);
                }
            }
            merge_row(row);
        }
    });

    std::vector<Triplet> entries;
    for (int i = 0; i < N; ++i)
        for (auto [j, v] : rows[i]) entries.push_back({i, j, v});
    std::string method = "quadrature(" + std::to_string(q) + ")";
    bool any_mc = std::any_of(mc.begin(), mc.end(), [](char c) { return c != 0; });
    if (any_mc) method += "+monte_carlo(" + std::to_string(mc_samples) + ")";
    TransferMatrix T = assemble(N, std::move(entries), method, 1e-6);
    T.monte_carlo_rows = mc;
    return T;
}

TransferMatrix build_ulam(const RandomSystem& s, int N, int q, std::uint64_t seed) {
    Partition part(N);
    return s.declared_atomic() ? build_ulam_ifs(s, part) : build_ulam_kernel(s, part, q, seed);
}

Vector apply(const TransferMatrix& T, const Vector& u) {
    if (u.size() != T.N) throw DimensionMismatch("density length differs from N");
    Vector out(T.N);
    parallel_for(static_cast<std::size_t>(T.N), [&](std::size_t b0, std::size_t b1) {
        for (std::size_t j = b0; j < b1; ++j) {
            double acc = 0.0;
            for (SparseMatrix::InnerIterator it(T.KT, static_cast<Eigen::Index>(j)); it; ++it)
                acc += it.value() * u[it.col()];
            out[static_cast<Eigen::Index>(j)] = acc;
        }
    });
    return out;
}

Vector apply_adjoint(const TransferMatrix& T, const Vector& g) {
    if (g.size() != T.N) throw DimensionMismatch("observable length differs from N");
    Vector out(T.N);
    parallel_for(static_cast<std::size_t>(T.N), [&](std::size_t b0, std::size_t b1) {
        for (std::size_t i = b0; i < b1; ++i) {
            double acc = 0.0;
            for (SparseMatrix::InnerIterator it(T.K, static_cast<Eigen::Index>(i)); it; ++it)
                acc += it.value() * g[it.col()];
            out[static_cast<Eigen::Index>(i)] = acc;
        }
    });
    return out;
}

namespace {

Matrix batch_product(const SparseMatrix& A, const Matrix& U) {
    Matrix out(A.rows(), U.cols());
    parallel_for(static_cast<std::size_t>(A.rows()), [&](std::size_t b0, std::size_t b1) {
        for (std::size_t r = b0; r < b1; ++r) {
            auto dst = out.row(static_cast<Eigen::Index>(r));
            dst.setZero();
            for (SparseMatrix::InnerIterator it(A, static_cast<Eigen::Index>(r)); it; ++it)
                dst.noalias() += it.value() * U.row(it.col());
        }
    });
    return out;
}

}  // namespace

Matrix apply_batch(const TransferMatrix& T, const Matrix& U) {
    if (U.rows() != T.N) throw DimensionMismatch("batch rows differ from N");
    return batch_product(T.KT, U);
}

Matrix apply_adjoint_batch(const TransferMatrix& T, const Matrix& G) {
    if (G.rows() != T.N) throw DimensionMismatch("batch rows differ from N");
    return batch_product(T.K, G);
}

Vector cesaro(const TransferMatrix& T, const Vector& u, int n) {
    if (n < 1) throw SpecError("cesaro needs n >= 1");
    if (u.size() != T.N) throw DimensionMismatch("density length differs from N");
    Vector sum = u;
    Vector cur = u;
    for (int k = 1; k < n; ++k) {
        cur = apply(T, cur);
        sum += cur;
    }
    return sum / n;
}

Restriction restrict(const TransferMatrix& T, const std::vector<int>& cells) {
    if (cells.empty()) throw EmptySupport("restriction to an empty cell set");
    std::vector<int> index(T.N, -1);
    for (std::size_t k = 0; k < cells.size(); ++k) {
        if (cells[k] < 0 || cells[k] >= T.N) throw DimensionMismatch("cell outside the grid");
        index[cells[k]] = static_cast<int>(k);
    }
    const int M = static_cast<int>(cells.size());
    std::vector<Eigen::Triplet<double>> t;
    bool stochastic = true;
    for (int k = 0; k < M; ++k) {
        double sum = 0.0;
        for (SparseMatrix::InnerIterator it(T.K, cells[k]); it; ++it) {
            const int j = index[it.col()];
            if (j < 0) continue;
            t.emplace_back(k, j, it.value());
            sum += it.value();
        }
        if (std::abs(sum - 1.0) > 1e-10) stochastic = false;
    }
    Restriction R;
    R.K = SparseMatrix(M, M);
    R.K.setFromTriplets(t.begin(), t.end());
    R.K.makeCompressed();
    R.cells = cells;
    R.stochastic = stochastic;
    return R;
}

Matrix to_dense(const TransferMatrix& T) { return Matrix(T.K); }

TransferMatrix from_dense(const Matrix& K, std::string method) {
    TransferMatrix T;
    T.N = static_cast<int>(K.rows());
    T.K = K.sparseView(0.0, 0.0);
    T.K.makeCompressed();
    T.row_defect.assign(T.N, 0.0);
    T.monte_carlo_rows.assign(T.N, 0);
    T.build_method = std::move(method);
    finish(T);
    return T;
}

double inner(const Vector& a, const Vector& b) { return a.dot(b) / static_cast<double>(a.size()); }

double mass(const Vector& u) { return u.sum() / static_cast<double>(u.size()); }

Vector uniform_density(int N) { return Vector::Ones(N); }

Vector basis_density(int N, int i) {
    Vector e = Vector::Zero(N);
    e[i] = N;
    return e;
}

void write_matrix(std::ostream& out, const TransferMatrix& T) {
    out << "ULAM 1 " << T.N << ' ' << T.nnz() << ' ' << T.build_method << '\n';
    char buf[64];
    for (int i = 0; i < T.N; ++i)
        for (SparseMatrix::InnerIterator it(T.K, i); it; ++it) {
            std::snprintf(buf, sizeof buf, "%.17g", it.value());
            out << i << ' ' << it.col() << ' ' << buf << '\n';
        }
}

TransferMatrix read_matrix(std::istream& in) {
    std::string magic;
    int version = 0, N = 0;
    long nnz = 0;
    std::string method;
    if (!(in >> magic >> version >> N >> nnz >> method) || magic != "ULAM" || version != 1)
        throw SpecError("not a ULAM matrix file");
    std::vector<Eigen::Triplet<double>> t;
    t.reserve(static_cast<std::size_t>(nnz));
    for (long k = 0; k < nnz; ++k) {
        int i, j;
        std::string v;
        if (!(in >> i >> j >> v)) throw SpecError("truncated ULAM matrix file");
        t.emplace_back(i, j, std::strtod(v.c_str(), nullptr));
    }
    TransferMatrix T;
    T.N = N;
    T.K = SparseMatrix(N, N);
    T.K.setFromTriplets(t.begin(), t.end());
    T.K.makeCompressed();
    T.row_defect.assign(N, 0.0);
    T.monte_carlo_rows.assign(N, 0);
    T.build_method = method;
    finish(T);
    return T;
}

void write_density_csv(std::ostream& out, const Vector& u) {
    out << "cell,value\n";
    char buf[64];
    for (Eigen::Index i = 0; i < u.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%.17g", u[i]);
        out << i << ',' << buf << '\n';
    }
}

}  // namespace transferlab
