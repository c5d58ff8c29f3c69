#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dinof/rng.hpp"
#include "dinof/tensor.hpp"

namespace dinof {

// Reverse-time integration never evaluates below this floor; the noise std
// of VP/sub-VP vanishes at t=0 and score targets blow up there.
inline constexpr double kEpsFloor = 1e-5;

enum class SdeFamily { VE, VP, SUBVP };

SdeFamily sde_family_from_string(const std::string& s);
std::string to_string(SdeFamily f);

// Linear forward SDE dx = f(t) x dt + g(t) dw with closed-form Gaussian
// perturbation kernel. VE uses a geometric sigma schedule, VP/sub-VP a
// linear beta schedule.
struct SdeSpec {
    SdeFamily family = SdeFamily::VE;
    double sigma_min = 0.01;
    double sigma_max = 50.0;
    double beta_min = 0.1;
    double beta_max = 20.0;
    double T = 1.0;
    int64_t N = 1000;

    void validate() const;  // throws std::invalid_argument
};

struct KernelStats {
    double mean_coef;  // m(t):  E[x(t)|x(0)] = m(t) x(0)
    double std;        // sigma(t)
};

double beta_t(const SdeSpec& spec, double t);
double beta_integral(const SdeSpec& spec, double t);  // int_0^t beta

// drift is linear in x: f(x,t) = drift_coef(t) * x
double drift_coef(const SdeSpec& spec, double t);
Tensor drift(const SdeSpec& spec, const Tensor& x, double t);
double diffusion(const SdeSpec& spec, double t);
KernelStats perturbation_kernel(const SdeSpec& spec, double t);

// xt = m(t) x0 + sigma(t) eps; returns (xt, eps) so losses can reuse eps.
std::pair<Tensor, Tensor> sample_marginal(const SdeSpec& spec, const Tensor& x0, double t,
                                          Rng& rng);

// Uniform descending grid: grid[i] = t_start - i*(t_start-t_end)/steps for
// i in [0, steps); t_start inclusive, t_end exclusive. Every point is
// clamped to kEpsFloor, which only affects the tail when t_end ~ 0.
std::vector<double> time_grid(const SdeSpec& spec, double t_start, double t_end, int64_t steps);

// Reverse-step accounting for a cut time tm: round(N * tm / T).
int64_t steps_for_tm(const SdeSpec& spec, double tm);

// Std of the terminal prior x(T): sigma_max for VE, 1 for VP/sub-VP.
double terminal_prior_std(const SdeSpec& spec);

}  // namespace dinof
