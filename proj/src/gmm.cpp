#include "dinof/gmm.hpp"

#include <cmath>
#include <stdexcept>

#include "dinof/linalg.hpp"

namespace dinof {

GaussianMixture GaussianMixture::isotropic(int64_t dim,
                                           const std::vector<std::vector<double>>& means,
                                           double sigma,
                                           const std::vector<double>& weights) {
    GaussianMixture mix;
    mix.dim = dim;
    for (size_t k = 0; k < means.size(); ++k) {
        GaussianComponent c;
        c.weight = weights.empty() ? 1.0 : weights[k];
        c.mean = means[k];
        c.cov.assign(static_cast<size_t>(dim * dim), 0.0);
        for (int64_t i = 0; i < dim; ++i) c.cov[static_cast<size_t>(i * dim + i)] = sigma * sigma;
        mix.comps.push_back(std::move(c));
    }
    mix.normalize_weights();
    mix.validate();
    return mix;
}

void GaussianMixture::normalize_weights() {
    double s = 0.0;
    for (const auto& c : comps) s += c.weight;
    if (s <= 0.0) throw std::invalid_argument("gmm: weights must sum to a positive value");
    for (auto& c : comps) c.weight /= s;
}

void GaussianMixture::validate() const {
    if (dim < 1 || comps.empty()) throw std::invalid_argument("gmm: empty mixture");
    for (const auto& c : comps) {
        if (static_cast<int64_t>(c.mean.size()) != dim ||
            static_cast<int64_t>(c.cov.size()) != dim * dim)
            throw std::invalid_argument("gmm: component dimension mismatch");
    }
}

Tensor GaussianMixture::sample(int64_t n, Rng& rng) const {
    if (n < 1) throw std::invalid_argument("gmm sample: n must be >= 1");
    std::vector<std::vector<double>> chols;
    chols.reserve(comps.size());
    for (const auto& c : comps) chols.push_back(cholesky(c.cov, dim));

    Tensor out({n, dim});
    std::vector<double> z(static_cast<size_t>(dim)), y(static_cast<size_t>(dim));
    for (int64_t i = 0; i < n; ++i) {
        double u = rng.uniform();
        size_t k = 0;
        double acc = 0.0;
        for (; k + 1 < comps.size(); ++k) {
            acc += comps[k].weight;
            if (u < acc) break;
        }
        rng.fill_normal(z.data(), dim);
        lower_apply(chols[k], dim, z.data(), y.data());
        for (int64_t j = 0; j < dim; ++j) out.at(i, j) = comps[k].mean[static_cast<size_t>(j)] + y[static_cast<size_t>(j)];
    }
    return out;
}

Tensor GaussianMixture::means() const {
    Tensor m({static_cast<int64_t>(comps.size()), dim});
    for (size_t k = 0; k < comps.size(); ++k)
        for (int64_t j = 0; j < dim; ++j) m.at(static_cast<int64_t>(k), j) = comps[k].mean[static_cast<size_t>(j)];
    return m;
}

namespace {

struct DiffusedComp {
    double log_weight;
    std::vector<double> mean;  // m(t) mu_k
    std::vector<double> chol;  // of m^2 Sigma + sigma^2 I
    double logdet;
};

std::vector<DiffusedComp> diffuse(const GaussianMixture& mix, double t, const SdeSpec& spec) {
    const KernelStats ks = perturbation_kernel(spec, t);
    const int64_t d = mix.dim;
    std::vector<DiffusedComp> out;
    out.reserve(mix.comps.size());
    for (const auto& c : mix.comps) {
        DiffusedComp dc;
        dc.log_weight = std::log(c.weight);
        dc.mean.resize(static_cast<size_t>(d));
        for (int64_t j = 0; j < d; ++j) dc.mean[static_cast<size_t>(j)] = ks.mean_coef * c.mean[static_cast<size_t>(j)];
        std::vector<double> a = c.cov;
        const double m2 = ks.mean_coef * ks.mean_coef;
        for (auto& v : a) v *= m2;
        for (int64_t j = 0; j < d; ++j) a[static_cast<size_t>(j * d + j)] += ks.std * ks.std;
        dc.chol = cholesky(a, d);
        dc.logdet = chol_logdet(dc.chol, d);
        out.push_back(std::move(dc));
    }
    return out;
}

}  // namespace

Tensor gmm_score(const GaussianMixture& mix, const Tensor& x, double t, const SdeSpec& spec) {
    mix.validate();
    if (x.rank() != 2 || x.shape[1] != mix.dim)
        throw std::invalid_argument("gmm_score: x must be [n," + std::to_string(mix.dim) + "]");
    const auto comps = diffuse(mix, t, spec);
    const int64_t n = x.shape[0], d = mix.dim;
    const size_t K = comps.size();
    const double log2pi = std::log(2.0 * 3.14159265358979323846);

    Tensor score({n, d});
    std::vector<double> r(static_cast<size_t>(d));
    std::vector<std::vector<double>> sol(K, std::vector<double>(static_cast<size_t>(d)));
    std::vector<double> logp(K);
    for (int64_t i = 0; i < n; ++i) {
        double lmax = -1e300;
        for (size_t k = 0; k < K; ++k) {
            for (int64_t j = 0; j < d; ++j) r[static_cast<size_t>(j)] = x.at(i, j) - comps[k].mean[static_cast<size_t>(j)];
            sol[k] = r;
            chol_solve(comps[k].chol, d, sol[k].data());  // A^-1 (x - mu)
            double quad = 0.0;
            for (int64_t j = 0; j < d; ++j) quad += r[static_cast<size_t>(j)] * sol[k][static_cast<size_t>(j)];
            logp[k] = comps[k].log_weight -
                      0.5 * (static_cast<double>(d) * log2pi + comps[k].logdet + quad);
            if (logp[k] > lmax) lmax = logp[k];
        }
        double norm = 0.0;
        for (size_t k = 0; k < K; ++k) norm += std::exp(logp[k] - lmax);
        for (size_t k = 0; k < K; ++k) {
            const double resp = std::exp(logp[k] - lmax) / norm;
            for (int64_t j = 0; j < d; ++j) score.at(i, j) -= resp * sol[k][static_cast<size_t>(j)];
        }
    }
    return score;
}

Tensor gmm_logpdf(const GaussianMixture& mix, const Tensor& x, double t, const SdeSpec& spec) {
    mix.validate();
    if (x.rank() != 2 || x.shape[1] != mix.dim)
        throw std::invalid_argument("gmm_logpdf: x must be [n," + std::to_string(mix.dim) + "]");
    const auto comps = diffuse(mix, t, spec);
    const int64_t n = x.shape[0], d = mix.dim;
    const double log2pi = std::log(2.0 * 3.14159265358979323846);

    Tensor out({n});
    std::vector<double> r(static_cast<size_t>(d));
    for (int64_t i = 0; i < n; ++i) {
        double lmax = -1e300;
        std::vector<double> logp(comps.size());
        for (size_t k = 0; k < comps.size(); ++k) {
            for (int64_t j = 0; j < d; ++j) r[static_cast<size_t>(j)] = x.at(i, j) - comps[k].mean[static_cast<size_t>(j)];
            std::vector<double> s = r;
            chol_solve(comps[k].chol, d, s.data());
            double quad = 0.0;
            for (int64_t j = 0; j < d; ++j) quad += r[static_cast<size_t>(j)] * s[static_cast<size_t>(j)];
            logp[k] = comps[k].log_weight -
                      0.5 * (static_cast<double>(d) * log2pi + comps[k].logdet + quad);
            if (logp[k] > lmax) lmax = logp[k];
        }
        double norm = 0.0;
        for (double lp : logp) norm += std::exp(lp - lmax);
        out[i] = lmax + std::log(norm);
    }
    return out;
}

}  // namespace dinof
