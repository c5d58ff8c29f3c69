#pragma once

#include <cstdint>
#include <string>

#include "dinof/gmm.hpp"
#include "dinof/rng.hpp"
#include "dinof/tensor.hpp"

namespace dinof {

enum class ToyKind { GMM8, TWO_MOONS, CHECKERBOARD, SWISS_ROLL, SINGLE_GAUSSIAN };

// Synthetic low-dimensional dataset with analytic ground truth where the
// kind is a Gaussian mixture.
struct ToyDistribution {
    ToyKind kind = ToyKind::GMM8;
    int64_t dim = 2;
    std::vector<double> gauss_mean;  // SINGLE_GAUSSIAN only; empty = zeros
    std::vector<double> gauss_cov;   // [d*d] row-major; empty = identity

    static ToyDistribution named(const std::string& name, int64_t dim = 2);
    static ToyDistribution single_gaussian(std::vector<double> mean, std::vector<double> cov);

    std::string name() const;
    bool has_mixture() const { return kind == ToyKind::GMM8 || kind == ToyKind::SINGLE_GAUSSIAN; }
    GaussianMixture mixture() const;  // throws for non-mixture kinds
    Tensor sample(int64_t n, Rng& rng) const;
};

Tensor sample_dataset(const ToyDistribution& dist, int64_t n, Rng& rng);

// 8 Gaussians, sigma = 0.15. d=2: means on a radius-4 circle at 45 degree
// spacing; d>2: means at +-4 along coordinate axes, cycling.
GaussianMixture gmm8_mixture(int64_t dim = 2);

}  // namespace dinof
