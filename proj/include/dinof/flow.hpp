#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dinof/autodiff.hpp"
#include "dinof/rng.hpp"
#include "dinof/tensor.hpp"

namespace dinof {

// Per-dimension affine normalization y = x * exp(log_scale) + bias with
// data-dependent initialization on the first batch.
struct ActNorm {
    Tensor log_scale;  // [d]
    Tensor bias;       // [d]
};

// Half-conditioned affine transform. The conditioner maps x[:, :k] to
// (raw log-scale, shift) for x[:, k:]; log-scales are squashed by
// tanh * scale_cap to keep inversion stable.
struct AffineCoupling {
    std::vector<Tensor> params;  // W0,b0,W1,b1,W2,b2 (two tanh hidden layers, zero head)
};

struct FlowBlock {
    ActNorm actnorm;
    std::vector<int64_t> perm;  // fixed column permutation
    AffineCoupling coupling;
};

// Invertible stack of [ActNorm, Permutation, AffineCoupling] blocks with
// exact per-sample log-determinants.
struct FlowModel {
    int64_t dim = 0;
    int64_t hidden = 256;
    double scale_cap = 2.0;
    bool initialized = false;  // actnorm data init done
    std::vector<FlowBlock> blocks;

    // Identity-initialized flow (unit actnorm, zero coupling heads) with
    // seeded random permutations.
    static FlowModel create(int64_t dim, int64_t n_blocks, int64_t hidden, double scale_cap,
                            Rng& rng);

    // (z, per-sample logdet). Throws std::logic_error when actnorm is
    // uninitialized and strict is set.
    std::pair<Tensor, Tensor> forward(const Tensor& x, bool strict = true) const;
    Tensor inverse(const Tensor& z) const;

    // mean_b [ 0.5 |z_b|^2 + d/2 log(2 pi) - logdet_b ]
    double nll(const Tensor& x) const;
    Var nll_build(Tape& tape, const std::vector<Var>& param_vars, const Tensor& x) const;

    // Sets each actnorm so its own input batch comes out zero-mean
    // unit-variance per dimension.
    void init_actnorm(const Tensor& batch);

    std::vector<Tensor*> param_ptrs();
    std::vector<const Tensor*> param_ptrs() const;
    std::vector<Tensor> params_copy() const;
    void set_params(const std::vector<Tensor>& ps);
    std::vector<std::string> param_names() const;
    int64_t split_index() const { return dim / 2; }
};

}  // namespace dinof
