#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "transferlab/system.hpp"

namespace transferlab {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct Partition {
    int N;
    explicit Partition(int n);
    double left(int i) const { return static_cast<double>(i) / N; }
    double right(int i) const { return static_cast<double>(i + 1) / N; }
    int cell_of(double x) const;
};

struct TransferMatrix {
    int N = 0;
    SparseMatrix K;   // K(i,j): mass flow from cell i to cell j
    SparseMatrix KT;  // transpose, for the forward action on densities
    std::vector<double> row_defect;
    std::vector<char> monte_carlo_rows;
    std::string build_method;

    long nnz() const { return static_cast<long>(K.nonZeros()); }
    bool has_monte_carlo_rows() const;
};

struct Triplet {
    int i;
    int j;
    double v;
};

// Drops entries below drop_threshold, records row defects and renormalizes rows.
TransferMatrix assemble(int N, std::vector<Triplet> entries, std::string method, double max_defect = -1.0,
                        double drop_threshold = 1e-14);

// q-point Gauss-Legendre rule mapped to [0,1].
void gauss_legendre_01(int q, std::vector<double>& nodes, std::vector<double>& weights);

TransferMatrix build_ulam_ifs(const RandomSystem& system, const Partition& partition);
TransferMatrix build_ulam_kernel(const RandomSystem& system, const Partition& partition, int q = 8,
                                 std::uint64_t seed = 0);
TransferMatrix build_ulam(const RandomSystem& system, int N, int q = 8, std::uint64_t seed = 0);

Vector apply(const TransferMatrix& K, const Vector& u);
Vector apply_adjoint(const TransferMatrix& K, const Vector& g);
// Column-wise actions: each column is a density (resp. observable).
Matrix apply_batch(const TransferMatrix& K, const Matrix& U);
Matrix apply_adjoint_batch(const TransferMatrix& K, const Matrix& G);
Vector cesaro(const TransferMatrix& K, const Vector& u, int n);

struct Restriction {
    SparseMatrix K;
    std::vector<int> cells;
    bool stochastic = false;
};

Restriction restrict(const TransferMatrix& K, const std::vector<int>& cells);

Matrix to_dense(const TransferMatrix& K);
TransferMatrix from_dense(const Matrix& K, std::string method = "dense");

double inner(const Vector& a, const Vector& b);
double mass(const Vector& u);
Vector uniform_density(int N);
Vector basis_density(int N, int i);

void write_matrix(std::ostream& out, const TransferMatrix& K);
TransferMatrix read_matrix(std::istream& in);
void write_density_csv(std::ostream& out, const Vector& u);

}  // namespace transferlab
