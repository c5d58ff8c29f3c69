#include "dinof/data.hpp"

#include <cmath>
#include <stdexcept>

namespace dinof {

namespace {
constexpr double kPi = 3.14159265358979323846;
}

GaussianMixture gmm8_mixture(int64_t dim) {
    if (dim < 2 || dim > 64) throw std::invalid_argument("gmm8: dim must be in [2,64]");
    std::vector<std::vector<double>> means;
    if (dim == 2) {
        for (int k = 0; k < 8; ++k) {
            const double a = 2.0 * kPi * static_cast<double>(k) / 8.0;
            means.push_back({4.0 * std::cos(a), 4.0 * std::sin(a)});
        }
    } else {
        for (int k = 0; k < 8; ++k) {
            std::vector<double> m(static_cast<size_t>(dim), 0.0);
            m[static_cast<size_t>((k / 2) % dim)] = (k % 2 == 0) ? 4.0 : -4.0;
            means.push_back(std::move(m));
        }
    }
    return GaussianMixture::isotropic(dim, means, 0.15);
}

ToyDistribution ToyDistribution::named(const std::string& name, int64_t dim) {
    ToyDistribution d;
    d.dim = dim;
    if (name == "gmm8") d.kind = ToyKind::GMM8;
    else if (name == "two_moons") d.kind = ToyKind::TWO_MOONS;
    else if (name == "checkerboard") d.kind = ToyKind::CHECKERBOARD;
    else if (name == "swiss_roll") d.kind = ToyKind::SWISS_ROLL;
    else if (name == "single_gaussian") d.kind = ToyKind::SINGLE_GAUSSIAN;
    else throw std::invalid_argument("unknown dataset '" + name + "'");
    if (d.kind != ToyKind::GMM8 && d.kind != ToyKind::SINGLE_GAUSSIAN && dim != 2)
        throw std::invalid_argument("dataset '" + name + "' is 2-D only");
    return d;
}

ToyDistribution ToyDistribution::single_gaussian(std::vector<double> mean,
                                                 std::vector<double> cov) {
    ToyDistribution d;
    d.kind = ToyKind::SINGLE_GAUSSIAN;
    d.dim = static_cast<int64_t>(mean.size());
    d.gauss_mean = std::move(mean);
    d.gauss_cov = std::move(cov);
    return d;
}

std::string ToyDistribution::name() const {
    switch (kind) {
        case ToyKind::GMM8: return "gmm8";
        case ToyKind::TWO_MOONS: return "two_moons";
        case ToyKind::CHECKERBOARD: return "checkerboard";
        case ToyKind::SWISS_ROLL: return "swiss_roll";
        case ToyKind::SINGLE_GAUSSIAN: return "single_gaussian";
    }
    return "?";
}

GaussianMixture ToyDistribution::mixture() const {
    if (kind == ToyKind::GMM8) return gmm8_mixture(dim);
    if (kind == ToyKind::SINGLE_GAUSSIAN) {
        GaussianMixture mix;
        mix.dim = dim;
        GaussianComponent c;
        c.weight = 1.0;
        c.mean = gauss_mean.empty() ? std::vector<double>(static_cast<size_t>(dim), 0.0)
                                    : gauss_mean;
        if (gauss_cov.empty()) {
            c.cov.assign(static_cast<size_t>(dim * dim), 0.0);
            for (int64_t i = 0; i < dim; ++i) c.cov[static_cast<size_t>(i * dim + i)] = 1.0;
        } else {
            c.cov = gauss_cov;
        }
        mix.comps.push_back(std::move(c));
        mix.validate();
        return mix;
    }
    throw std::invalid_argument("dataset '" + name() + "' has no mixture form");
}

Tensor ToyDistribution::sample(int64_t n, Rng& rng) const {
    if (n < 1) throw std::invalid_argument("sample_dataset: n must be >= 1");
    switch (kind) {
        case ToyKind::GMM8:
        case ToyKind::SINGLE_GAUSSIAN:
            return mixture().sample(n, rng);
        case ToyKind::TWO_MOONS: {
            Tensor out({n, 2});
            for (int64_t i = 0; i < n; ++i) {
                const double a = kPi * rng.uniform();
                double x, y;
                if (rng.uniform() < 0.5) {
                    x = std::cos(a);
                    y = std::sin(a);
                } else {
                    x = 1.0 - std::cos(a);
                    y = 0.5 - std::sin(a);
                }
                out.at(i, 0) = 2.0 * (x - 0.5) + 0.1 * rng.normal();
                out.at(i, 1) = 2.0 * y + 0.1 * rng.normal();
            }
            return out;
        }
        case ToyKind::CHECKERBOARD: {
            // rejection sample alternating 2x2 squares on [-4,4]^2
            Tensor out({n, 2});
            for (int64_t i = 0; i < n; ++i) {
                for (;;) {
                    const double x = rng.uniform(-4.0, 4.0);
                    const double y = rng.uniform(-4.0, 4.0);
                    const auto cx = static_cast<int64_t>(std::floor((x + 4.0) / 2.0));
                    const auto cy = static_cast<int64_t>(std::floor((y + 4.0) / 2.0));
                    if ((cx + cy) % 2 == 0) {
                        out.at(i, 0) = x;
                        out.at(i, 1) = y;
                        break;
                    }
                }
            }
            return out;
        }
        case ToyKind::SWISS_ROLL: {
            Tensor out({n, 2});
            for (int64_t i = 0; i < n; ++i) {
                const double a = 1.5 * kPi * (1.0 + 2.0 * rng.uniform());
                const double r = 4.0 * a / (4.5 * kPi);
                out.at(i, 0) = r * std::cos(a) + 0.05 * rng.normal();
                out.at(i, 1) = r * std::sin(a) + 0.05 * rng.normal();
            }
            return out;
        }
    }
    throw std::logic_error("unreachable");
}

Tensor sample_dataset(const ToyDistribution& dist, int64_t n, Rng& rng) {
    return dist.sample(n, rng);
}

}  // namespace dinof
