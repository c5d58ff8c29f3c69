#pragma once

#include <vector>

#include "dinof/tensor.hpp"

namespace dinof {

struct AdamParams {
    double lr = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

// Per-parameter first/second moment state.
struct AdamState {
    Tensor m, v;
    int64_t step = 0;
};

AdamState make_adam_state(const Tensor& param);
std::vector<AdamState> make_adam_states(const std::vector<Tensor>& params);

// Standard bias-corrected Adam update. Deterministic given inputs.
void adam_step(Tensor& param, const Tensor& grad, AdamState& st, const AdamParams& hp);

void adam_step_all(std::vector<Tensor>& params, const std::vector<Tensor>& grads,
                   std::vector<AdamState>& states, const AdamParams& hp);

}  // namespace dinof
