#pragma once

// Independent brute-force oracles used by the unit and acceptance tests.

#include <algorithm>
#include <numeric>
#include <random>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "transferlab/ulam.hpp"

namespace oracle {

using Q = boost::multiprecision::cpp_rational;
using QMatrix = std::vector<std::vector<Q>>;

struct Decomposition {
    std::vector<std::vector<int>> supports;  // sorted by first cell
    std::vector<int> periods;
    std::vector<std::vector<Q>> densities;  // length N, unit integral: (1/N) sum = 1
    std::vector<std::vector<Q>> absorption;  // N x r
};

inline std::vector<std::vector<bool>> reach(const QMatrix& K) {
    const int N = static_cast<int>(K.size());
    std::vector<std::vector<bool>> R(N, std::vector<bool>(N, false));
    for (int i = 0; i < N; ++i) {
        R[i][i] = true;
        for (int j = 0; j < N; ++j)
            if (K[i][j] > 0) R[i][j] = true;
    }
    for (int k = 0; k < N; ++k)
        for (int i = 0; i < N; ++i)
            for (int j = 0; j < N; ++j)
                if (R[i][k] && R[k][j]) R[i][j] = true;
    return R;
}

// Solves A x = b exactly; A square and nonsingular.
inline std::vector<Q> solve(QMatrix A, std::vector<Q> b) {
    const int n = static_cast<int>(A.size());
    for (int c = 0; c < n; ++c) {
        int p = c;
        while (A[p][c] == 0) ++p;
        std::swap(A[p], A[c]);
        std::swap(b[p], b[c]);
        for (int r = 0; r < n; ++r) {
            if (r == c || A[r][c] == 0) continue;
            const Q f = A[r][c] / A[c][c];
            for (int k = c; k < n; ++k) A[r][k] -= f * A[c][k];
            b[r] -= f * b[c];
        }
    }
    for (int r = 0; r < n; ++r) b[r] /= A[r][r];
    return b;
}

inline Decomposition decompose(const QMatrix& K) {
    const int N = static_cast<int>(K.size());
    const auto R = reach(K);
    Decomposition d;
    std::vector<int> owner(N, -1);
    for (int i = 0; i < N; ++i) {
        if (owner[i] >= 0) continue;
        bool closed = true;
        for (int j = 0; j < N; ++j)
            if (R[i][j] && !R[j][i]) closed = false;
        if (!closed) continue;
        std::vector<int> cls;
        for (int j = 0; j < N; ++j)
            if (R[i][j]) cls.push_back(j);
        for (int j : cls) owner[j] = static_cast<int>(d.supports.size());
        d.supports.push_back(cls);
    }
    // period: gcd of closed-walk lengths through the first cell, walks up to N*N
    for (const auto& cls : d.supports) {
        const int i0 = cls.front();
        std::vector<bool> cur(N, false);
        cur[i0] = true;
        int g = 0;
        for (int len = 1; len <= N * N; ++len) {
            std::vector<bool> next(N, false);
            for (int a = 0; a < N; ++a)
                if (cur[a])
                    for (int b = 0; b < N; ++b)
                        if (K[a][b] > 0) next[b] = true;
            cur = next;
            if (cur[i0]) g = std::gcd(g, len);
        }
        d.periods.push_back(g);
    }
    for (const auto& cls : d.supports) {
        const int m = static_cast<int>(cls.size());
        QMatrix A(m, std::vector<Q>(m, 0));
        std::vector<Q> b(m, 0);
        // pi (K_C - I) = 0 with the last equation replaced by sum pi = 1
        for (int r = 0; r < m - 1; ++r)
            for (int c = 0; c < m; ++c) A[r][c] = K[cls[c]][cls[r]] - (r == c ? Q(1) : Q(0));
        for (int c = 0; c < m; ++c) A[m - 1][c] = 1;
        b[m - 1] = 1;
        const auto pi = solve(A, b);
        std::vector<Q> h(N, 0);
        for (int c = 0; c < m; ++c) h[cls[c]] = pi[c] * N;
        d.densities.push_back(h);
    }
    const int r = static_cast<int>(d.supports.size());
    std::vector<int> transient;
    for (int i = 0; i < N; ++i)
        if (owner[i] < 0) transient.push_back(i);
    d.absorption.assign(N, std::vector<Q>(r, 0));
    for (int i = 0; i < N; ++i)
        if (owner[i] >= 0) d.absorption[i][owner[i]] = 1;
    const int t = static_cast<int>(transient.size());
    if (t > 0) {
        QMatrix A(t, std::vector<Q>(t, 0));
        for (int a = 0; a < t; ++a)
            for (int b = 0; b < t; ++b) A[a][b] = (a == b ? Q(1) : Q(0)) - K[transient[a]][transient[b]];
        for (int k = 0; k < r; ++k) {
            std::vector<Q> rhs(t, 0);
            for (int a = 0; a < t; ++a)
                for (int j : d.supports[k]) rhs[a] += K[transient[a]][j];
            const auto w = solve(A, rhs);
            for (int a = 0; a < t; ++a) d.absorption[transient[a]][k] = w[a];
        }
    }
    return d;
}

// Random stochastic matrix with rational entries and a mix of sparsity patterns.
inline QMatrix random_stochastic(std::mt19937_64& rng, int N) {
    std::uniform_int_distribution<int> weight(1, 6);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const double keep = 0.15 + 0.5 * u(rng);
    QMatrix K(N, std::vector<Q>(N, 0));
    const bool blocks = u(rng) < 0.3;
    const int split = 1 + static_cast<int>(u(rng) * (N - 1));
    for (int i = 0; i < N; ++i) {
        std::vector<int> w(N, 0);
        int total = 0;
        for (int j = 0; j < N; ++j) {
            if (blocks && i >= split && j < split) continue;  // block-triangular: upper block closed
            if (u(rng) < keep) w[j] = weight(rng);
            total += w[j];
        }
        if (total == 0) {
            const int j = blocks && i >= split ? split + static_cast<int>(u(rng) * (N - split)) % (N - split)
                                                 : static_cast<int>(u(rng) * N) % N;
            w[j] = 1;
            total = 1;
        }
        for (int j = 0; j < N; ++j) K[i][j] = Q(w[j], total);
    }
    return K;
}

inline transferlab::TransferMatrix to_transfer(const QMatrix& K) {
    const int N = static_cast<int>(K.size());
    transferlab::Matrix D(N, N);
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < N; ++j) D(i, j) = static_cast<double>(K[i][j]);
    return transferlab::from_dense(D, "oracle");
}

// Exhaustive max over all k-subsets of (1/N) sum_{i in A} u_i.
inline double exhaustive_top_mass(const std::vector<double>& u, int k) {
    const int N = static_cast<int>(u.size());
    double best = 0.0;
    for (unsigned mask = 0; mask < (1u << N); ++mask) {
        if (__builtin_popcount(mask) != k) continue;
        double s = 0.0;
        for (int i = 0; i < N; ++i)
            if (mask & (1u << i)) s += u[i];
        best = std::max(best, s / N);
    }
    return best;
}

inline long floor_q(const Q& q) {
    using boost::multiprecision::cpp_int;
    const cpp_int n = boost::multiprecision::numerator(q), d = boost::multiprecision::denominator(q);
    cpp_int f = n / d;
    if (n % d != 0 && n < 0) f -= 1;
    return f.convert_to<long>();
}

struct RationalPiece {
    Q a, b, slope, intercept;  // on [a, b)
};

// Exact Ulam matrix of an affine IFS with rational data: K[i][j] = sum_b w_b N m(A_i ∩ f_b^{-1} A_j).
inline QMatrix rational_ulam(const std::vector<std::vector<RationalPiece>>& branches, const std::vector<Q>& weights,
                             bool wrap, int N) {
    QMatrix K(N, std::vector<Q>(N, 0));
    for (std::size_t br = 0; br < branches.size(); ++br)
        for (const auto& p : branches[br])
            for (int i = 0; i < N; ++i) {
                const Q lo = std::max(p.a, Q(i, N)), hi = std::min(p.b, Q(i + 1, N));
                if (hi <= lo) continue;
                Q y0 = p.slope * lo + p.intercept, y1 = p.slope * hi + p.intercept;
                if (y0 > y1) std::swap(y0, y1);
                const Q len = y1 - y0;
                // image cells, unwrapped index k, j = k mod N
                const long k0 = floor_q(y0 * N), k1 = -floor_q(-y1 * N);
                for (long k = k0; k < k1; ++k) {
                    const Q ov = std::min(y1, Q(k + 1, N)) - std::max(y0, Q(k, N));
                    if (ov <= 0) continue;
                    const long j = wrap ? ((k % N) + N) % N : std::min<long>(k, N - 1);
                    K[i][j] += weights[br] * N * (hi - lo) * ov / len;
                }
            }
    return K;
}

}  // namespace oracle
