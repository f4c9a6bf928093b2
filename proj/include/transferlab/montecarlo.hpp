#pragma once

#include <cstdint>
#include <vector>

#include "transferlab/spectral.hpp"
#include "transferlab/system.hpp"
#include "transferlab/ulam.hpp"

namespace transferlab {

// Noise value t for step `counter`: a uniform branch selector for atomic systems.
double draw_noise(const RandomSystem& system, const CounterStream& stream, std::uint64_t counter);

// One orbit step with noise draw `counter`. Expanding branches of atomic systems get the
// bits below 2^-44 redrawn so double orbits do not collapse onto dyadic points.
double orbit_step(const RandomSystem& system, const CounterStream& stream, std::uint64_t counter, double x);

std::vector<double> random_orbit(const RandomSystem& system, double x0, std::uint64_t seed, long n,
                                 std::uint64_t stream_id = 0);

struct EmpiricalMeasure {
    std::vector<double> mass;  // bin masses, sum 1
    long n_burn = 0;
    long n_avg = 0;
    std::uint64_t seed = 0;
    std::uint64_t stream_id = 0;
};

EmpiricalMeasure birkhoff_histogram(const RandomSystem& system, double x0, std::uint64_t seed, long n_burn,
                                    long n_avg, int N, std::uint64_t stream_id = 0);

struct BasinReport {
    std::vector<double> fractions;  // per ergodic component
    std::vector<double> standard_errors;
    double unassigned = 0.0;
    double unassigned_se = 0.0;
    long n_samples = 0;
    long n_burn = 0;
    long n_avg = 0;
    double threshold = 0.2;
    int batches = 0;
    std::vector<int> assignment;  // component per sample, -1 if unassigned
};

BasinReport basin_survey(const RandomSystem& system, const ErgodicDecomposition& d, long n_samples,
                         long n_burn = 1000, long n_avg = 100000, double threshold = 0.2, std::uint64_t seed = 0);

struct CorrelationFit {
    std::vector<double> C;  // C_n, n = 0..n_max
    double fit_C = 0.0;
    double rho = 0.0;
    double r2 = 0.0;
    int fit_points = 0;
};

CorrelationFit annealed_correlation(const TransferMatrix& K, const Vector& h, const Vector& phi, const Vector& psi,
                                    int n_max);

struct DualityResult {
    double mc_estimate = 0.0;
    double se = 0.0;
    double matrix_value = 0.0;
    double z = 0.0;
    long n_samples = 0;
};

// phi and psi are cell-step observables on the grid of K.
DualityResult duality_check(const RandomSystem& system, const TransferMatrix& K, const Vector& phi, const Vector& psi,
                            int n, long n_samples, std::uint64_t seed = 0);

// Batch-means standard error of the mean of x using `batches` contiguous batches.
double batch_means_se(const std::vector<double>& x, int batches = 100);

}  // namespace transferlab
