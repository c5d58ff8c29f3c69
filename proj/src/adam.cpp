#include "dinof/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace dinof {

AdamState make_adam_state(const Tensor& param) {
    AdamState st;
    st.m = Tensor(param.shape);
    st.v = Tensor(param.shape);
    return st;
}

std::vector<AdamState> make_adam_states(const std::vector<Tensor>& params) {
    std::vector<AdamState> sts;
    sts.reserve(params.size());
    for (const Tensor& p : params) sts.push_back(make_adam_state(p));
    return sts;
}

void adam_step(Tensor& param, const Tensor& grad, AdamState& st, const AdamParams& hp) {
    require_same_shape("adam", param, grad);
    require_same_shape("adam", param, st.m);
    st.step += 1;
    const double c1 = 1.0 - std::pow(hp.beta1, static_cast<double>(st.step));
    const double c2 = 1.0 - std::pow(hp.beta2, static_cast<double>(st.step));
    for (int64_t i = 0; i < param.numel(); ++i) {
        const double g = grad[i];
        st.m[i] = hp.beta1 * st.m[i] + (1.0 - hp.beta1) * g;
        st.v[i] = hp.beta2 * st.v[i] + (1.0 - hp.beta2) * g * g;
        const double mhat = st.m[i] / c1;
        const double vhat = st.v[i] / c2;
        param[i] -= hp.lr * mhat / (std::sqrt(vhat) + hp.eps);
    }
}

void adam_step_all(std::vector<Tensor>& params, const std::vector<Tensor>& grads,
                   std::vector<AdamState>& states, const AdamParams& hp) {
    if (params.size() != grads.size() || params.size() != states.size())
        throw std::invalid_argument("adam: parameter/gradient/state count mismatch");
    for (size_t i = 0; i < params.size(); ++i) adam_step(params[i], grads[i], states[i], hp);
}

}  // namespace dinof
