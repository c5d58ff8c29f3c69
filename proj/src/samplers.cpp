#include "dinof/samplers.hpp"

#include <cmath>
#include <stdexcept>

namespace dinof {

PredictorKind predictor_from_string(const std::string& s) {
    if (s == "euler_maruyama") return PredictorKind::EULER_MARUYAMA;
    if (s == "none") return PredictorKind::NONE;
    throw std::invalid_argument("unknown predictor '" + s + "' (expected euler_maruyama|none)");
}

CorrectorKind corrector_from_string(const std::string& s) {
    if (s == "langevin") return CorrectorKind::LANGEVIN;
    if (s == "none") return CorrectorKind::NONE;
    throw std::invalid_argument("unknown corrector '" + s + "' (expected langevin|none)");
}

std::string to_string(PredictorKind p) {
    return p == PredictorKind::EULER_MARUYAMA ? "euler_maruyama" : "none";
}

std::string to_string(CorrectorKind c) {
    return c == CorrectorKind::LANGEVIN ? "langevin" : "none";
}

void SamplerConfig::validate() const {
    if (!(snr > 0.0)) throw std::invalid_argument("sampler: snr must be positive");
    if (steps < 1) throw std::invalid_argument("sampler: steps must be >= 1");
    if (corrector_steps < 0) throw std::invalid_argument("sampler: corrector_steps must be >= 0");
}

Tensor predictor_step(const SdeSpec& spec, const ScoreFn& score, const Tensor& x, double t,
                      double dt, Rng& rng) {
    if (!(dt > 0.0)) throw std::invalid_argument("predictor_step: dt must be positive");
    const double f = drift_coef(spec, t);
    const double g = diffusion(spec, t);
    const Tensor s = score(x, t);
    require_same_shape("predictor_step", x, s);
    Tensor w = Tensor::randn(x.shape, rng);
    Tensor out = x;
    const double noise = g * std::sqrt(dt);
    for (int64_t i = 0; i < out.numel(); ++i)
        out[i] = x[i] - (f * x[i] - g * g * s[i]) * dt + noise * w[i];
    return out;
}

Tensor langevin_correct(const ScoreFn& score, const Tensor& x, double t, double snr, int n_steps,
                        Rng& rng) {
    if (n_steps < 0) throw std::invalid_argument("langevin: n_steps must be >= 0");
    Tensor cur = x;
    for (int step = 0; step < n_steps; ++step) {
        const Tensor s = score(cur, t);
        require_same_shape("langevin", cur, s);
        Tensor w = Tensor::randn(cur.shape, rng);
        const double sn = t_frobenius(s);
        const double wn = t_frobenius(w);
        double gamma = kGammaMax;
        if (sn > 0.0) {
            const double r = snr * wn / sn;
            gamma = 2.0 * r * r;
            if (!std::isfinite(gamma)) gamma = kGammaMax;
        }
        const double sg = std::sqrt(gamma);
        for (int64_t i = 0; i < cur.numel(); ++i)
            cur[i] += 0.5 * gamma * s[i] + sg * w[i];
    }
    return cur;
}

Tensor pc_sample(const SdeSpec& spec, const ScoreFn& score, Tensor x, double t_start, double t_end,
                 const SamplerConfig& config, Rng& rng, const SampleObserver* observer) {
    config.validate();
    const std::vector<double> grid = time_grid(spec, t_start, t_end, config.steps);
    const double dt = (t_start - t_end) / static_cast<double>(config.steps);
    const double t_floor = t_end < kEpsFloor ? kEpsFloor : t_end;

    for (size_t i = 0; i < grid.size(); ++i) {
        const double t = grid[i];
        const bool run_corrector = config.corrector == CorrectorKind::LANGEVIN &&
                                   !(i == 0 && config.corrector_first && !config.corrector_at_start);
        if (config.corrector_first && run_corrector)
            x = langevin_correct(score, x, t, config.snr, config.corrector_steps, rng);
        if (config.predictor == PredictorKind::EULER_MARUYAMA)
            x = predictor_step(spec, score, x, t, dt, rng);
        if (!config.corrector_first && config.corrector == CorrectorKind::LANGEVIN) {
            const double tc = std::max(t - dt, t_floor);
            x = langevin_correct(score, x, tc, config.snr, config.corrector_steps, rng);
        }
        if (observer) (*observer)(static_cast<int64_t>(i), t, x);
    }

    if (config.denoise_final &&
        (config.predictor != PredictorKind::NONE || config.corrector != CorrectorKind::NONE)) {
        const KernelStats ks = perturbation_kernel(spec, t_floor);
        const Tensor s = score(x, t_floor);
        for (int64_t i = 0; i < x.numel(); ++i) x[i] += ks.std * ks.std * s[i];
    }
    return x;
}

Tensor ode_sample(const SdeSpec& spec, const ScoreFn& score, Tensor x,
                  const std::vector<double>& t_grid) {
    if (t_grid.size() < 2) throw std::invalid_argument("ode_sample: grid needs >= 2 points");
    for (size_t i = 0; i + 1 < t_grid.size(); ++i) {
        const double t = t_grid[i];
        const double dt = t_grid[i + 1] - t_grid[i];  // negative on a descending grid
        if (!(dt < 0.0)) throw std::invalid_argument("ode_sample: grid must be descending");
        const double f = drift_coef(spec, t);
        const double g = diffusion(spec, t);
        const Tensor s = score(x, t);
        for (int64_t j = 0; j < x.numel(); ++j)
            x[j] += (f * x[j] - 0.5 * g * g * s[j]) * dt;
    }
    return x;
}

std::vector<double> ode_grid(const SdeSpec& spec, double t_start, double t_end, int64_t steps) {
    std::vector<double> grid = time_grid(spec, t_start, t_end, steps);
    grid.push_back(t_end < kEpsFloor ? kEpsFloor : t_end);
    return grid;
}

}  // namespace dinof
