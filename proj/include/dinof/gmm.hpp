#pragma once

#include <cstdint>
#include <vector>

#include "dinof/rng.hpp"
#include "dinof/sde.hpp"
#include "dinof/tensor.hpp"

namespace dinof {

struct GaussianComponent {
    double weight = 1.0;
    std::vector<double> mean;  // [d]
    std::vector<double> cov;   // [d*d] row-major, SPD
};

// Finite Gaussian mixture. Under a linear SDE the diffused marginal stays a
// mixture: p_t = sum_k w_k N(m(t) mu_k, m(t)^2 Sigma_k + sigma(t)^2 I),
// which makes the exact score available as a test oracle.
struct GaussianMixture {
    int64_t dim = 0;
    std::vector<GaussianComponent> comps;

    static GaussianMixture isotropic(int64_t dim, const std::vector<std::vector<double>>& means,
                                     double sigma, const std::vector<double>& weights = {});

    void normalize_weights();
    void validate() const;

    Tensor sample(int64_t n, Rng& rng) const;
    Tensor means() const;  // [K,d]
};

// Exact score of the diffused mixture at time t (t=0 gives the data score).
Tensor gmm_score(const GaussianMixture& mix, const Tensor& x, double t, const SdeSpec& spec);

// Exact log density of the diffused mixture, one value per row of x.
Tensor gmm_logpdf(const GaussianMixture& mix, const Tensor& x, double t, const SdeSpec& spec);

}  // namespace dinof
