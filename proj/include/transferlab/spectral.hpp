#pragma once

#include <vector>

#include "transferlab/ulam.hpp"

namespace transferlab {

struct ErgodicComponent {
    std::vector<int> support;
    Vector density;  // unit integral, zero off the support
    int period = 1;
    std::vector<std::vector<int>> cyclic_classes;  // class c maps onto class c+1 mod period
};

struct ErgodicDecomposition {
    int N = 0;
    std::vector<ErgodicComponent> components;
    std::vector<int> transient_cells;
    std::vector<int> component_of;  // -1 for transient cells
    bool maximal_support_reached = false;
    Matrix absorption;  // N x r, row i = absorption weights w_i
};

Vector invariant_density(const SparseMatrix& K, double tol = 1e-12, long max_iter = 200000);
Vector invariant_density(const TransferMatrix& K, double tol = 1e-12, long max_iter = 200000);

// Strongly connected components of the support graph (edge i->j iff K(i,j) > tol_sparse).
std::vector<std::vector<int>> strongly_connected_components(const SparseMatrix& K, double tol_sparse);

ErgodicDecomposition ergodic_decomposition(const TransferMatrix& K, double tol_sparse = 1e-12,
                                           double tol = 1e-12);

std::vector<double> absorption_weights(const ErgodicDecomposition& d, const Vector& u);

// Limit of the Cesaro averages of u: sum_k lambda_k(u) h_k.
Vector cesaro_limit(const ErgodicDecomposition& d, const Vector& u);

struct CyclicStructure {
    std::vector<Vector> densities;          // g_{k,c}, listed component by component
    std::vector<int> component;             // owning component of each g
    std::vector<int> rho;                   // K g_i = g_{rho[i]}
};

CyclicStructure periodic_structure(const TransferMatrix& K, const ErgodicDecomposition& d, double tol = 1e-8);

std::vector<double> spectral_gap(const TransferMatrix& K, int k_top);

struct MaximalSupport {
    std::vector<double> a;  // a_n for n = 0..n_max
    bool reached = false;
};

MaximalSupport maximal_support_check(const TransferMatrix& K, const std::vector<int>& S, int n_max);
MaximalSupport maximal_support_check(const TransferMatrix& K, const ErgodicDecomposition& d, int n_max);

}  // namespace transferlab
