#include <algorithm>
#include <cmath>
#include <functional>

#include "transferlab/classify.hpp"
#include "transferlab/errors.hpp"
#include "transferlab/parallel.hpp"

namespace transferlab {

namespace {

constexpr std::size_t kRowBlock = 32;

// Fixed row blocks keep every product's kernel choice independent of the worker count.
template <class F>
void for_row_blocks(Eigen::Index rows, F&& f) {
    const std::size_t n = static_cast<std::size_t>(rows);
    const std::size_t blocks = (n + kRowBlock - 1) / kRowBlock;
    parallel_for(blocks, [&](std::size_t b0, std::size_t b1) {
        for (std::size_t b = b0; b < b1; ++b) {
            const std::size_t lo = b * kRowBlock, hi = std::min(n, lo + kRowBlock);
            f(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(hi - lo));
        }
    });
}

Matrix dense_times_sparse(const Matrix& P, const SparseMatrix& K) {
    Matrix out(P.rows(), K.cols());
    for_row_blocks(P.rows(), [&](Eigen::Index lo, Eigen::Index rows) {
        out.middleRows(lo, rows) = P.middleRows(lo, rows) * K;
    });
    return out;
}

Matrix dense_product(const Matrix& A, const Matrix& B) {
    Matrix out(A.rows(), B.cols());
    for_row_blocks(A.rows(), [&](Eigen::Index lo, Eigen::Index rows) {
        out.middleRows(lo, rows).noalias() = A.middleRows(lo, rows) * B;
    });
    return out;
}

double top_mass_column(const Eigen::Ref<const Vector>& u, int k, std::vector<double>& scratch) {
    const auto N = u.size();
    if (k <= 0) return 0.0;
    scratch.assign(u.data(), u.data() + N);
    if (k < N) std::nth_element(scratch.begin(), scratch.begin() + (k - 1), scratch.end(), std::greater<>());
    double s = 0.0;
    for (int i = 0; i < k; ++i) s += scratch[i];
    return s / static_cast<double>(N);
}

std::optional<int> first_settled(const std::vector<double>& c, double threshold) {
    // smallest n0 with max_{n >= n0} c[n] <= threshold
    std::optional<int> best;
    for (int n = static_cast<int>(c.size()) - 1; n >= 0; --n) {
        if (c[n] > threshold) break;
        best = n;
    }
    return best;
}

}  // namespace

int top_count(int N, double delta) { return static_cast<int>(std::floor(delta * N + 1e-9)); }

double top_mass(const Vector& u, double delta) {
    std::vector<double> scratch;
    return top_mass_column(u, top_count(static_cast<int>(u.size()), delta), scratch);
}

StraubeResult straube_probe(const TransferMatrix& K, const std::vector<double>& deltas, int n_max, double smallness) {
    StraubeResult r;
    r.deltas = deltas;
    r.alpha.assign(deltas.size(), 0.0);
    Vector u = uniform_density(K.N);
    for (int n = 0; n <= n_max; ++n) {
        for (std::size_t d = 0; d < deltas.size(); ++d) r.alpha[d] = std::max(r.alpha[d], top_mass(u, deltas[d]));
        if (n < n_max) u = apply(K, u);
    }
    bool any_small = false, all_large = true;
    for (double a : r.alpha) {
        any_small = any_small || a < 1.0 - smallness;
        all_large = all_large && a >= 1.0 - smallness;
    }
    r.verdict = any_small ? Verdict::evidence_for : (all_large ? Verdict::evidence_against : Verdict::inconclusive);
    return r;
}

ConstrictivityResult constrictivity_probe(const TransferMatrix& K, const std::vector<double>& deltas, int n_max,
                                          double threshold) {
    const int N = K.N;
    ConstrictivityResult r;
    r.deltas = deltas;
    std::vector<int> owner, kcount;
    std::vector<Eigen::Index> first_col;
    Eigen::Index cols = 0;
    for (double delta : deltas) {
        const int k = std::max(1, top_count(N, delta));
        kcount.push_back(k);
        first_col.push_back(cols);
        cols += N / k;
    }
    Matrix U = Matrix::Zero(N, cols);
    for (std::size_t d = 0; d < deltas.size(); ++d) {
        const int k = kcount[d];
        for (int t = 0; t < N / k; ++t) {
            for (int i = t * k; i < (t + 1) * k; ++i) U(i, first_col[d] + t) = static_cast<double>(N) / k;
            owner.push_back(static_cast<int>(d));
        }
    }
    r.c.assign(deltas.size(), std::vector<double>(n_max + 1, 0.0));
    std::vector<double> scratch;
    for (int n = 0; n <= n_max; ++n) {
        for (Eigen::Index col = 0; col < cols; ++col) {
            const int d = owner[col];
            r.c[d][n] = std::max(r.c[d][n], top_mass_column(U.col(col), kcount[d], scratch));
        }
        if (n < n_max) U = apply_batch(K, U);
    }
    for (std::size_t d = 0; d < deltas.size(); ++d) {
        r.c_hat.push_back(r.c[d].back());
        r.spread_time.push_back(first_settled(r.c[d], threshold));
    }
    return r;
}

AcResult ac_probe(const TransferMatrix& K, const ErgodicDecomposition& dec, const std::vector<double>& deltas,
                  int n_tail) {
    const int N = K.N;
    AcResult r;
    r.deltas = deltas;
    std::vector<std::vector<int>> sets;
    std::vector<int> kind;  // 0 window, 1 profile, 2 component set
    std::vector<int> owner;
    const Vector profile = cesaro_limit(dec, uniform_density(N));
    std::vector<int> order(N);
    for (int i = 0; i < N; ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) { return profile[a] > profile[b]; });
    for (std::size_t d = 0; d < deltas.size(); ++d) {
        const int k = std::max(1, top_count(N, deltas[d]));
        const int stride = std::max(1, k / 2);
        std::vector<int> offsets;
        for (int off = 0; off + k <= N; off += stride) offsets.push_back(off);
        if (offsets.back() != N - k) offsets.push_back(N - k);
        for (int off : offsets) {
            std::vector<int> cells(k);
            for (int i = 0; i < k; ++i) cells[i] = off + i;
            sets.push_back(std::move(cells));
            kind.push_back(0);
            owner.push_back(static_cast<int>(d));
        }
        std::vector<int> top(order.begin(), order.begin() + k);
        std::sort(top.begin(), top.end());
        sets.push_back(std::move(top));
        kind.push_back(1);
        owner.push_back(static_cast<int>(d));
    }
    for (std::size_t c = 0; c < dec.components.size(); ++c) {
        const auto& comp = dec.components[c];
        r.component_sets.push_back({"component " + std::to_string(c), comp.support,
                                    static_cast<double>(comp.support.size()) / N, 0.0});
        sets.push_back(comp.support);
        kind.push_back(2);
        owner.push_back(static_cast<int>(r.component_sets.size()) - 1);
        if (comp.period > 1) {
            for (int cl = 0; cl < comp.period; ++cl) {
                r.component_sets.push_back({"component " + std::to_string(c) + " class " + std::to_string(cl),
                                            comp.cyclic_classes[cl],
                                            static_cast<double>(comp.cyclic_classes[cl].size()) / N, 0.0});
                sets.push_back(comp.cyclic_classes[cl]);
                kind.push_back(2);
                owner.push_back(static_cast<int>(r.component_sets.size()) - 1);
            }
        }
    }
    Matrix G = Matrix::Zero(N, static_cast<Eigen::Index>(sets.size()));
    for (std::size_t s = 0; s < sets.size(); ++s)
        for (int i : sets[s]) G(i, static_cast<Eigen::Index>(s)) = 1.0;
    std::vector<double> tail(sets.size(), 0.0);
    for (int n = 1; n <= 2 * n_tail; ++n) {
        G = apply_adjoint_batch(K, G);
        if (n < n_tail) continue;
        for (std::size_t s = 0; s < sets.size(); ++s)
            tail[s] = std::max(tail[s], G.col(static_cast<Eigen::Index>(s)).maxCoeff());
    }
    r.window_tail.assign(deltas.size(), 0.0);
    r.profile_tail.assign(deltas.size(), 0.0);
    for (std::size_t s = 0; s < sets.size(); ++s) {
        if (kind[s] == 0) r.window_tail[owner[s]] = std::max(r.window_tail[owner[s]], tail[s]);
        if (kind[s] == 1) r.profile_tail[owner[s]] = tail[s];
        if (kind[s] == 2) r.component_sets[owner[s]].tail = tail[s];
    }
    try {
        auto cs = periodic_structure(K, dec);
        for (const auto& g : cs.densities) r.class_height = std::max(r.class_height, g.maxCoeff());
    } catch (const CyclicClassMismatch&) {
        for (const auto& comp : dec.components)
            r.class_height = std::max(r.class_height, comp.period * comp.density.maxCoeff());
    }
    return r;
}

McResult mc_probe(const TransferMatrix& K, const ErgodicDecomposition& dec, int log2_max, double smallness) {
    const int N = K.N;
    McResult r;
    const auto rr = static_cast<Eigen::Index>(dec.components.size());
    Matrix H(rr, N);
    for (Eigen::Index k = 0; k < rr; ++k) H.row(k) = dec.components[k].density.transpose();
    const Matrix limit = dec.absorption * H;  // row i: sum_k w_i[k] h_k
    Matrix A = Matrix::Identity(N, N);
    Matrix P = to_dense(K);
    long n = 1;
    for (int j = 0; j <= log2_max; ++j) {
        const double dn = ((static_cast<double>(N) * A - limit).cwiseAbs().rowwise().sum() / N).maxCoeff();
        r.n.push_back(n);
        r.d.push_back(dn);
        r.envelope = std::max(r.envelope, static_cast<double>(n) * dn);
        if (dn < 0.1 * smallness || j == log2_max) break;
        A = 0.5 * (A + dense_product(A, P));
        P = dense_product(P, P);
        n *= 2;
    }
    r.verdict = r.d.back() < smallness ? Verdict::evidence_for : Verdict::inconclusive;
    return r;
}

UcResult uc_probe(const TransferMatrix& K, const RandomSystem& system, int n0_max, const std::vector<double>& deltas,
                  double threshold) {
    const int N = K.N;
    UcResult r;
    r.deltas = deltas;
    r.kernel_rule = system.declared_atomic();
    Matrix P = Matrix::Identity(N, N);
    std::vector<double> scratch;
    for (int n0 = 1; n0 <= n0_max; ++n0) {
        P = dense_times_sparse(P, K.K);
        std::vector<double> row_eps(deltas.size(), 0.0);
        for (std::size_t d = 0; d < deltas.size(); ++d) {
            const int k = top_count(N, deltas[d]);
            for (int i = 0; i < N; ++i) {
                Vector u = static_cast<double>(N) * P.row(i).transpose();
                row_eps[d] = std::max(row_eps[d], top_mass_column(u, k, scratch));
            }
        }
        r.eps.push_back(row_eps);
    }
    for (std::size_t d = 0; d < deltas.size(); ++d) {
        std::optional<int> first;
        for (int n0 = 1; n0 <= n0_max && !first; ++n0)
            if (r.eps[n0 - 1][d] <= threshold) first = n0;
        r.spread_n0.push_back(first);
    }
    if (r.kernel_rule)
        r.verdict = Verdict::evidence_against;
    else
        r.verdict = r.spread_n0.back() ? Verdict::evidence_for : Verdict::inconclusive;
    return r;
}

DoeblinResult doeblin_probe(const TransferMatrix& K, const RandomSystem& system, int n0_max,
                            const std::vector<double>& deltas, int samples, std::uint64_t seed, double threshold) {
    DoeblinResult r;
    r.matrix = uc_probe(K, system, n0_max, deltas, threshold);
    std::vector<double> candidates = system.fixed_points;
    candidates.insert(candidates.end(), system.pinned_points.begin(), system.pinned_points.end());
    std::sort(candidates.begin(), candidates.end());
    candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());
    const CounterStream stream(seed, 0xD0EB11);
    for (double x : candidates) {
        bool fixed = true;
        for (int k = 0; k < samples && fixed; ++k) {
            const double t = sample_noise(system.declared_atomic() ? uniform_noise() : system.noise, stream,
                                          static_cast<std::uint64_t>(k));
            fixed = apply_random(system, t, x) == x;
        }
        if (fixed) {
            r.fixed_point_rule = true;
            r.fixed_points_checked.push_back(x);
        }
    }
    r.samples_checked = samples;
    r.verdict = r.fixed_point_rule ? Verdict::evidence_against : r.matrix.verdict;
    return r;
}

DstarResult dstar_probe(const TransferMatrix& K, const ErgodicDecomposition& dec, int n_max, double smallness) {
    if (dec.components.size() != 1)
        throw MultipleComponents("D* probe needs a unique invariant density, found " +
                                 std::to_string(dec.components.size()));
    const int N = K.N;
    const Vector pi = dec.components.front().density / static_cast<double>(N);
    DstarResult r;
    Matrix P = Matrix::Identity(N, N);
    for (int n = 1; n <= n_max; ++n) {
        P = dense_times_sparse(P, K.K);
        r.s.push_back((P.rowwise() - pi.transpose()).cwiseAbs().rowwise().sum().maxCoeff());
    }
    // least squares on log s_n
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    int m = 0;
    for (int n = 1; n <= n_max; ++n) {
        const double v = r.s[n - 1];
        if (v <= 1e-14) continue;
        const double y = std::log(v);
        sx += n;
        sy += y;
        sxx += static_cast<double>(n) * n;
        sxy += n * y;
        ++m;
    }
    if (m >= 2) {
        const double slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
        r.fit_lambda = std::exp(slope);
        r.fit_C = std::exp((sy - slope * sx) / m);
    } else {
        r.fit_lambda = 0.0;
        r.fit_C = r.s.empty() ? 0.0 : r.s.front();
    }
    const double last = r.s.empty() ? 0.0 : r.s.back();
    if (dec.components.front().period > 1)
        r.verdict = Verdict::evidence_against;
    else if (last < smallness && r.fit_lambda < 1.0)
        r.verdict = Verdict::evidence_for;
    else if (last >= 1.0 - smallness)
        r.verdict = Verdict::evidence_against;
    else
        r.verdict = Verdict::inconclusive;
    return r;
}

}  // namespace transferlab
