#pragma once

#include <cstdint>
#include <vector>

#include "dinof/autodiff.hpp"
#include "dinof/metrics.hpp"
#include "dinof/rng.hpp"
#include "dinof/sde.hpp"
#include "dinof/tensor.hpp"

namespace dinof {

enum class LossWeighting { SIGMA2, UNIT };

// Sinusoidal time features: embed_dim/2 frequencies geometric in [1,1000],
// laid out as [sin(f_0 t) .. sin(f_{E/2-1} t), cos(f_0 t) .. cos(..)].
Tensor time_embedding(const Tensor& t_batch, int64_t embed_dim);

// Time-conditioned MLP s_theta(x,t) = MLP(concat(x, embed(t))) with tanh
// hidden activations. The output head is zero-initialized, so a fresh model
// scores identically zero.
struct MlpScoreModel {
    int64_t dim = 0;
    std::vector<int64_t> hidden = {128, 128, 128};
    int64_t embed_dim = 64;
    std::vector<Tensor> params;  // W0,b0,W1,b1,...

    static MlpScoreModel create(int64_t dim, std::vector<int64_t> hidden, int64_t embed_dim,
                                Rng& rng);

    Tensor eval(const Tensor& x, const Tensor& t_batch) const;  // [B,d]
    Tensor eval(const Tensor& x, double t) const;

    // Training graph over param leaves; bit-identical to eval().
    Var build(Tape& tape, const std::vector<Var>& param_vars, Var x, const Tensor& t_batch) const;

    ScoreFn as_score_fn() const;  // copies parameters (frozen snapshot)
    std::vector<std::string> param_names() const;
    int64_t param_count() const;
};

// Denoising score-matching loss with pre-drawn times and noise:
//   mean_b lambda(t_b) || s(x_t, t_b) + eps_b / sigma(t_b) ||^2
Var dsm_loss_build(Tape& tape, const MlpScoreModel& model, const std::vector<Var>& param_vars,
                   const SdeSpec& spec, const Tensor& x0, const Tensor& t_batch,
                   const Tensor& eps, LossWeighting weighting);

double dsm_loss_eval(const ScoreFn& fn, const SdeSpec& spec, const Tensor& x0,
                     const Tensor& t_batch, const Tensor& eps, LossWeighting weighting);

// Draws t ~ U[t_lo, t_hi) per row, then eps, in that order.
void draw_dsm_batch(const SdeSpec& spec, int64_t batch, int64_t dim, double t_lo, double t_hi,
                    Rng& rng, Tensor& t_out, Tensor& eps_out);

}  // namespace dinof
