#pragma once

#include <cstdint>
#include <functional>
#include <string>

#include "dinof/metrics.hpp"
#include "dinof/rng.hpp"
#include "dinof/sde.hpp"
#include "dinof/tensor.hpp"

namespace dinof {

enum class PredictorKind { EULER_MARUYAMA, NONE };
enum class CorrectorKind { LANGEVIN, NONE };

PredictorKind predictor_from_string(const std::string& s);
CorrectorKind corrector_from_string(const std::string& s);
std::string to_string(PredictorKind p);
std::string to_string(CorrectorKind c);

// Langevin step size fallback when the score norm vanishes exactly (e.g. a
// chain sitting on a mode); prevents division blow-up.
inline constexpr double kGammaMax = 1e-2;

struct SamplerConfig {
    PredictorKind predictor = PredictorKind::EULER_MARUYAMA;
    CorrectorKind corrector = CorrectorKind::LANGEVIN;
    int corrector_steps = 1;   // Langevin iterations per noise scale
    double snr = 0.16;
    int64_t steps = 1000;
    bool denoise_final = true;       // Tweedie-style mean replacement at the floor
    bool corrector_first = true;     // corrector-then-predictor at each scale
    bool corrector_at_start = true;  // run the corrector at the initial time too

    void validate() const;
};

// One reverse-time Euler-Maruyama step of magnitude dt (> 0):
//   x' = x - [f(t) x - g(t)^2 s(x,t)] dt + g(t) sqrt(dt) w
Tensor predictor_step(const SdeSpec& spec, const ScoreFn& score, const Tensor& x, double t,
                      double dt, Rng& rng);

// Annealed Langevin correction; per step gamma = 2 (snr |w| / |s|)^2 from
// whole-batch Frobenius norms, then x += gamma/2 s + sqrt(gamma) w.
Tensor langevin_correct(const ScoreFn& score, const Tensor& x, double t, double snr, int n_steps,
                        Rng& rng);

using SampleObserver = std::function<void(int64_t step, double t, const Tensor& x)>;

// Predictor-Corrector integration from t_start down to t_end over
// config.steps uniform scales.
Tensor pc_sample(const SdeSpec& spec, const ScoreFn& score, Tensor x, double t_start, double t_end,
                 const SamplerConfig& config, Rng& rng, const SampleObserver* observer = nullptr);

// Euler integration of the probability flow ODE dx = [f(t)x - g^2/2 s] dt
// across consecutive grid points (descending grid, last entry included).
Tensor ode_sample(const SdeSpec& spec, const ScoreFn& score, Tensor x,
                  const std::vector<double>& t_grid);

// time_grid plus the clamped end point, for ode_sample.
std::vector<double> ode_grid(const SdeSpec& spec, double t_start, double t_end, int64_t steps);

}  // namespace dinof
