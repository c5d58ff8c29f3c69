#include "dinof/sde.hpp"

#include <cmath>
#include <stdexcept>

namespace dinof {

SdeFamily sde_family_from_string(const std::string& s) {
    if (s == "ve") return SdeFamily::VE;
    if (s == "vp") return SdeFamily::VP;
    if (s == "subvp" || s == "sub-vp") return SdeFamily::SUBVP;
    throw std::invalid_argument("unknown sde family '" + s + "' (expected ve|vp|subvp)");
}

std::string to_string(SdeFamily f) {
    switch (f) {
        case SdeFamily::VE: return "ve";
        case SdeFamily::VP: return "vp";
        case SdeFamily::SUBVP: return "subvp";
    }
    return "?";
}

void SdeSpec::validate() const {
    if (T <= 0.0) throw std::invalid_argument("sde: T must be positive");
    if (N < 2) throw std::invalid_argument("sde: N must be >= 2");
    if (family == SdeFamily::VE) {
        if (!(sigma_min > 0.0 && sigma_min < sigma_max))
            throw std::invalid_argument("sde: need 0 < sigma_min < sigma_max");
    } else {
        if (!(beta_min > 0.0 && beta_min < beta_max))
            throw std::invalid_argument("sde: need 0 < beta_min < beta_max");
    }
}

namespace {
void check_time(const SdeSpec& spec, double t) {
    if (!(t >= 0.0 && t <= spec.T))
        throw std::domain_error("sde: time " + std::to_string(t) + " outside [0," +
                                std::to_string(spec.T) + "]");
}
}  // namespace

double beta_t(const SdeSpec& spec, double t) {
    check_time(spec, t);
    return spec.beta_min + t * (spec.beta_max - spec.beta_min) / spec.T;
}

double beta_integral(const SdeSpec& spec, double t) {
    check_time(spec, t);
    return spec.beta_min * t + (spec.beta_max - spec.beta_min) * t * t / (2.0 * spec.T);
}

double drift_coef(const SdeSpec& spec, double t) {
    check_time(spec, t);
    switch (spec.family) {
        case SdeFamily::VE: return 0.0;
        case SdeFamily::VP:
        case SdeFamily::SUBVP: return -0.5 * beta_t(spec, t);
    }
    return 0.0;
}

Tensor drift(const SdeSpec& spec, const Tensor& x, double t) {
    return t_scale(x, drift_coef(spec, t));
}

double diffusion(const SdeSpec& spec, double t) {
    check_time(spec, t);
    switch (spec.family) {
        case SdeFamily::VE: {
            // g = sigma(t) * sqrt(2 ln(sigma_max/sigma_min) / T), i.e. sqrt(d sigma^2/dt)
            const double ratio = spec.sigma_max / spec.sigma_min;
            const double sig = spec.sigma_min * std::pow(ratio, t / spec.T);
            return sig * std::sqrt(2.0 * std::log(ratio) / spec.T);
        }
        case SdeFamily::VP: return std::sqrt(beta_t(spec, t));
        case SdeFamily::SUBVP: {
            const double ib = beta_integral(spec, t);
            return std::sqrt(beta_t(spec, t) * (1.0 - std::exp(-2.0 * ib)));
        }
    }
    return 0.0;
}

KernelStats perturbation_kernel(const SdeSpec& spec, double t) {
    check_time(spec, t);
    switch (spec.family) {
        case SdeFamily::VE: {
            const double sig = spec.sigma_min * std::pow(spec.sigma_max / spec.sigma_min, t / spec.T);
            return {1.0, sig};
        }
        case SdeFamily::VP: {
            const double ib = beta_integral(spec, t);
            return {std::exp(-0.5 * ib), std::sqrt(1.0 - std::exp(-ib))};
        }
        case SdeFamily::SUBVP: {
            const double ib = beta_integral(spec, t);
            return {std::exp(-0.5 * ib), 1.0 - std::exp(-ib)};
        }
    }
    return {1.0, 0.0};
}

std::pair<Tensor, Tensor> sample_marginal(const SdeSpec& spec, const Tensor& x0, double t,
                                          Rng& rng) {
    const KernelStats ks = perturbation_kernel(spec, t);
    Tensor eps = Tensor::randn(x0.shape, rng);
    Tensor xt = x0;
    for (int64_t i = 0; i < xt.numel(); ++i) xt[i] = ks.mean_coef * xt[i] + ks.std * eps[i];
    return {std::move(xt), std::move(eps)};
}

std::vector<double> time_grid(const SdeSpec& spec, double t_start, double t_end, int64_t steps) {
    if (!(t_end >= 0.0 && t_end < t_start && t_start <= spec.T))
        throw std::invalid_argument("time_grid: need 0 <= t_end < t_start <= T, got [" +
                                    std::to_string(t_start) + "," + std::to_string(t_end) + "]");
    if (steps < 1) throw std::invalid_argument("time_grid: steps must be >= 1");
    std::vector<double> grid(static_cast<size_t>(steps));
    const double dt = (t_start - t_end) / static_cast<double>(steps);
    for (int64_t i = 0; i < steps; ++i) {
        double t = t_start - static_cast<double>(i) * dt;
        grid[static_cast<size_t>(i)] = t < kEpsFloor ? kEpsFloor : t;
    }
    return grid;
}

int64_t steps_for_tm(const SdeSpec& spec, double tm) {
    if (!(tm > 0.0 && tm <= spec.T))
        throw std::invalid_argument("steps_for_tm: tm must lie in (0,T]");
    return std::llround(static_cast<double>(spec.N) * tm / spec.T);
}

double terminal_prior_std(const SdeSpec& spec) {
    return spec.family == SdeFamily::VE ? spec.sigma_max : 1.0;
}

}  // namespace dinof
