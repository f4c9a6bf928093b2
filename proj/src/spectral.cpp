#include "transferlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <Eigen/Eigenvalues>
#include <Eigen/SparseLU>

#include "transferlab/errors.hpp"

namespace transferlab {

namespace {

double l1_mean(const Vector& v) { return v.cwiseAbs().sum() / static_cast<double>(v.size()); }

Vector forward(const SparseMatrix& K, const Vector& u) { return K.transpose() * u; }

Vector dense_stationary(const SparseMatrix& K) {
    const Eigen::Index M = K.rows();
    Matrix A = Matrix(K).transpose() - Matrix::Identity(M, M);
    A.row(M - 1).setOnes();
    Vector rhs = Vector::Zero(M);
    rhs[M - 1] = static_cast<double>(M);
    Vector h = A.fullPivLu().solve(rhs);
    return h.cwiseMax(0.0);
}

}  // namespace

Vector invariant_density(const SparseMatrix& K, double tol, long max_iter) {
    const Eigen::Index M = K.rows();
    Vector u = Vector::Ones(M);
    double resid = 0.0;
    for (long it = 0; it <= max_iter; ++it) {
        Vector next = forward(K, u);
        resid = l1_mean(next - u);
        if (resid <= tol) return u / (u.sum() / static_cast<double>(M));
        // lazy step: same invariant densities, no periodic oscillation
        u = 0.5 * (u + next);
    }
    throw NoConvergence("invariant_density: residual " + std::to_string(resid) + " after " +
                        std::to_string(max_iter) + " iterations");
}

Vector invariant_density(const TransferMatrix& K, double tol, long max_iter) {
    return invariant_density(K.K, tol, max_iter);
}

std::vector<std::vector<int>> strongly_connected_components(const SparseMatrix& K, double tol_sparse) {
    const int n = static_cast<int>(K.rows());
    std::vector<std::vector<int>> adj(n);
    for (int i = 0; i < n; ++i)
        for (SparseMatrix::InnerIterator it(K, i); it; ++it)
            if (it.value() > tol_sparse) adj[i].push_back(static_cast<int>(it.col()));

    std::vector<int> index(n, -1), low(n, 0), stack;
    std::vector<char> on_stack(n, 0);
    std::vector<std::vector<int>> out;
    int counter = 0;
    std::vector<std::pair<int, std::size_t>> call;
    for (int root = 0; root < n; ++root) {
        if (index[root] >= 0) continue;
        call.emplace_back(root, 0);
        index[root] = low[root] = counter++;
        stack.push_back(root);
        on_stack[root] = 1;
        while (!call.empty()) {
            auto& [v, pos] = call.back();
            if (pos < adj[v].size()) {
                const int w = adj[v][pos++];
                if (index[w] < 0) {
                    index[w] = low[w] = counter++;
                    stack.push_back(w);
                    on_stack[w] = 1;
                    call.emplace_back(w, 0);
                } else if (on_stack[w]) {
                    low[v] = std::min(low[v], index[w]);
                }
                continue;
            }
            const int done = v;
            call.pop_back();
            if (!call.empty()) low[call.back().first] = std::min(low[call.back().first], low[done]);
            if (low[done] == index[done]) {
                std::vector<int> comp;
                int w;
                do {
                    w = stack.back();
                    stack.pop_back();
                    on_stack[w] = 0;
                    comp.push_back(w);
                } while (w != done);
                std::sort(comp.begin(), comp.end());
                out.push_back(std::move(comp));
            }
        }
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.front() < b.front(); });
    return out;
}

ErgodicDecomposition ergodic_decomposition(const TransferMatrix& T, double tol_sparse, double tol) {
    const int N = T.N;
    ErgodicDecomposition d;
    d.N = N;
    d.component_of.assign(N, -1);

    auto sccs = strongly_connected_components(T.K, tol_sparse);
    std::vector<int> scc_of(N);
    for (std::size_t c = 0; c < sccs.size(); ++c)
        for (int v : sccs[c]) scc_of[v] = static_cast<int>(c);

    for (std::size_t c = 0; c < sccs.size(); ++c) {
        bool closed = true;
        for (int v : sccs[c]) {
            for (SparseMatrix::InnerIterator it(T.K, v); it && closed; ++it)
                if (it.value() > tol_sparse && scc_of[it.col()] != static_cast<int>(c)) closed = false;
            if (!closed) break;
        }
        if (!closed) continue;

        ErgodicComponent comp;
        comp.support = sccs[c];
        const int k = static_cast<int>(d.components.size());
        for (int v : comp.support) d.component_of[v] = k;

        // restricted chain, renormalized to absorb sub-threshold leakage
        Restriction R = restrict(T, comp.support);
        for (int r = 0; r < R.K.outerSize(); ++r) {
            double s = 0.0;
            for (SparseMatrix::InnerIterator it(R.K, r); it; ++it) s += it.value();
            for (SparseMatrix::InnerIterator it(R.K, r); it; ++it) it.valueRef() /= s;
        }
        Vector h;
        try {
            h = invariant_density(R.K, tol, 20000);
        } catch (const NoConvergence&) {
            h = dense_stationary(R.K);
        }
        comp.density = Vector::Zero(N);
        const double scale = static_cast<double>(N) / h.sum();
        for (std::size_t s = 0; s < comp.support.size(); ++s)
            comp.density[comp.support[s]] = h[static_cast<Eigen::Index>(s)] * scale;

        // period from BFS levels
        std::vector<int> level(N, -1);
        std::vector<int> queue{comp.support.front()};
        level[comp.support.front()] = 0;
        for (std::size_t qi = 0; qi < queue.size(); ++qi) {
            const int v = queue[qi];
            for (SparseMatrix::InnerIterator it(T.K, v); it; ++it) {
                const int w = static_cast<int>(it.col());
                if (it.value() <= tol_sparse || level[w] >= 0) continue;
                level[w] = level[v] + 1;
                queue.push_back(w);
            }
        }
        int g = 0;
        for (int v : comp.support)
            for (SparseMatrix::InnerIterator it(T.K, v); it; ++it)
                if (it.value() > tol_sparse) g = std::gcd(g, std::abs(level[v] + 1 - level[it.col()]));
        comp.period = std::max(g, 1);
        comp.cyclic_classes.assign(comp.period, {});
        for (int v : comp.support) comp.cyclic_classes[level[v] % comp.period].push_back(v);
        d.components.push_back(std::move(comp));
    }

    const int r = static_cast<int>(d.components.size());
    for (int i = 0; i < N; ++i)
        if (d.component_of[i] < 0) d.transient_cells.push_back(i);

    d.absorption = Matrix::Zero(N, r);
    for (int i = 0; i < N; ++i)
        if (d.component_of[i] >= 0) d.absorption(i, d.component_of[i]) = 1.0;

    if (!d.transient_cells.empty()) {
        const int M = static_cast<int>(d.transient_cells.size());
        std::vector<int> tindex(N, -1);
        for (int t = 0; t < M; ++t) tindex[d.transient_cells[t]] = t;
        std::vector<Eigen::Triplet<double>> trip;
        Matrix rhs = Matrix::Zero(M, r);
        for (int t = 0; t < M; ++t) {
            trip.emplace_back(t, t, 1.0);
            for (SparseMatrix::InnerIterator it(T.K, d.transient_cells[t]); it; ++it) {
                const int j = static_cast<int>(it.col());
                if (tindex[j] >= 0)
                    trip.emplace_back(t, tindex[j], -it.value());
                else
                    rhs(t, d.component_of[j]) += it.value();
            }
        }
        Eigen::SparseMatrix<double> A(M, M);
        A.setFromTriplets(trip.begin(), trip.end());
        A.makeCompressed();
        Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
        lu.compute(A);
        if (lu.info() != Eigen::Success) throw NoConvergence("absorption solve failed");
        Matrix W = lu.solve(rhs);
        for (int t = 0; t < M; ++t) {
            auto row = W.row(t).cwiseMax(0.0).eval();
            const double s = row.sum();
            if (s > 0.0) row /= s;
            d.absorption.row(d.transient_cells[t]) = row;
        }
    }

    d.maximal_support_reached = maximal_support_check(T, d, 8 * N).reached;
    return d;
}

std::vector<double> absorption_weights(const ErgodicDecomposition& d, const Vector& u) {
    if (u.size() != d.N) throw DimensionMismatch("density length differs from N");
    Vector lam = d.absorption.transpose() * u / static_cast<double>(d.N);
    return std::vector<double>(lam.data(), lam.data() + lam.size());
}

Vector cesaro_limit(const ErgodicDecomposition& d, const Vector& u) {
    Vector h = Vector::Zero(d.N);
    auto lam = absorption_weights(d, u);
    for (std::size_t k = 0; k < d.components.size(); ++k) h += lam[k] * d.components[k].density;
    return h;
}

CyclicStructure periodic_structure(const TransferMatrix& T, const ErgodicDecomposition& d, double tol) {
    CyclicStructure cs;
    for (std::size_t k = 0; k < d.components.size(); ++k) {
        const auto& comp = d.components[k];
        const int base = static_cast<int>(cs.densities.size());
        for (int c = 0; c < comp.period; ++c) {
            Vector g = Vector::Zero(d.N);
            for (int v : comp.cyclic_classes[c]) g[v] = comp.density[v];
            g /= mass(g);
            cs.densities.push_back(g);
            cs.component.push_back(static_cast<int>(k));
            cs.rho.push_back(base + (c + 1) % comp.period);
        }
    }
    for (std::size_t i = 0; i < cs.densities.size(); ++i) {
        const double err = l1_mean(apply(T, cs.densities[i]) - cs.densities[cs.rho[i]]);
        if (err > tol)
            throw CyclicClassMismatch("cyclic class " + std::to_string(i) + " misses its image by " +
                                      std::to_string(err));
    }
    return cs;
}

std::vector<double> spectral_gap(const TransferMatrix& T, int k_top) {
    if (k_top < 2) throw SpecError("spectral_gap needs k_top >= 2");
    const int N = T.N;
    const int k = std::min(k_top, N);
    std::vector<double> mod;
    if (N <= 512) {
        Eigen::EigenSolver<Matrix> es(to_dense(T), false);
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) mod.push_back(std::abs(es.eigenvalues()[i]));
        std::sort(mod.rbegin(), mod.rend());
        mod.resize(k);
        return mod;
    }
    // orthogonal iteration on the forward action
    const int p = std::min(N, k + 4);
    Matrix V(N, p);
    const CounterStream stream(0x5eed, 0);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < p; ++j) V(i, j) = stream.uniform(static_cast<std::uint64_t>(i) * p + j) - 0.5;
    Eigen::HouseholderQR<Matrix> qr(V);
    V = qr.householderQ() * Matrix::Identity(N, p);
    std::vector<double> prev;
    for (int it = 0; it < 20000; ++it) {
        Matrix W = apply_batch(T, V);
        Matrix H = V.transpose() * W;
        qr.compute(W);
        V = qr.householderQ() * Matrix::Identity(N, p);
        if (it % 10 != 9) continue;
        Eigen::EigenSolver<Matrix> es(H, false);
        std::vector<double> cur;
        for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) cur.push_back(std::abs(es.eigenvalues()[i]));
        std::sort(cur.rbegin(), cur.rend());
        cur.resize(k);
        if (!prev.empty()) {
            double diff = 0.0;
            for (int i = 0; i < k; ++i) diff = std::max(diff, std::abs(cur[i] - prev[i]));
            if (diff < 1e-10) return cur;
        }
        prev = cur;
    }
    throw NoConvergence("spectral_gap: subspace iteration did not settle");
}

MaximalSupport maximal_support_check(const TransferMatrix& T, const std::vector<int>& S, int n_max) {
    Vector g = Vector::Zero(T.N);
    for (int v : S) g[v] = 1.0;
    MaximalSupport out;
    out.a.push_back(mass(g));
    for (int n = 1; n <= n_max; ++n) {
        g = apply_adjoint(T, g);
        out.a.push_back(mass(g));
        if (out.a[n] < out.a[n - 1] - 1e-12)
            throw MonotonicityViolation("adjoint iterates of 1_S decreased at n=" + std::to_string(n));
        if (g.minCoeff() > 1.0 - 1e-8 && n >= 1) {
            for (int m = n + 1; m <= n_max; ++m) out.a.push_back(out.a.back());
            break;
        }
    }
    out.reached = g.minCoeff() > 1.0 - 1e-8;
    return out;
}

MaximalSupport maximal_support_check(const TransferMatrix& T, const ErgodicDecomposition& d, int n_max) {
    std::vector<int> S;
    for (const auto& c : d.components) S.insert(S.end(), c.support.begin(), c.support.end());
    std::sort(S.begin(), S.end());
    return maximal_support_check(T, S, n_max);
}

}  // namespace transferlab
