#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "dinof/data.hpp"
#include "dinof/rng.hpp"
#include "dinof/tensor.hpp"

namespace dinof {

// Batch score function: rows of x share the time argument.
using ScoreFn = std::function<Tensor(const Tensor& x, double t)>;

// Energy distance, V-statistic convention (all-pairs means including the
// zero diagonal), so identical sample sets give exactly 0:
//   E = 2/(nm) sum|a-b| - 1/n^2 sum|a-a'| - 1/m^2 sum|b-b'|
double energy_distance(const Tensor& a, const Tensor& b);

// Median of pairwise distances over the pooled set, computed on a
// deterministic prefix subset of at most 2048 points per side.
double median_heuristic_bandwidth(const Tensor& a, const Tensor& b);

// Unbiased MMD^2 with RBF kernel exp(-|x-y|^2 / (2 bw^2)).
double mmd_rbf(const Tensor& a, const Tensor& b, double bandwidth);
double mmd_rbf(const Tensor& a, const Tensor& b);  // median-heuristic bandwidth

// MSE of score_fn against the exact diffused-mixture score, averaged over the
// time grid; evaluation points are kernel samples of the mixture at each t.
double score_mse(const ScoreFn& fn, const GaussianMixture& mix, const SdeSpec& spec,
                 const std::vector<double>& t_grid, int64_t n_points, Rng& rng);

// Fraction of mixture modes holding at least 1% of all samples; a sample
// counts for its nearest mode if it lies within 3 component-sigma of it.
// Usage error for dataset kinds without a mixture form.
double mode_coverage(const Tensor& a, const ToyDistribution& dist);
std::vector<double> mode_occupancy(const Tensor& a, const GaussianMixture& mix);

struct PermutationTest {
    double statistic;     // observed energy distance
    double percentile95;  // of the permutation null
    double percentile99;
    double pvalue;        // (1 + #{perm >= obs}) / (n_perms + 1)
};

// Two-sample permutation test with the energy distance as statistic.
// Pooled size is capped at 4096 rows (deterministic prefix) to bound the
// precomputed distance matrix.
PermutationTest energy_permutation_test(const Tensor& a, const Tensor& b, int n_perms, Rng& rng);

struct MetricReport {
    double energy = 0.0;
    double mmd = 0.0;
    std::optional<double> score_mse;
    std::optional<double> mode_coverage;
};

}  // namespace dinof
