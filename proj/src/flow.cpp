#include "dinof/flow.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

namespace dinof {

namespace {

constexpr double kLog2Pi = 1.8378770664093454835606594728112;

Tensor perm_matrix(const std::vector<int64_t>& perm) {
    const auto d = static_cast<int64_t>(perm.size());
    Tensor p({d, d});
    // column j of the output takes input column perm[j]
    for (int64_t j = 0; j < d; ++j) p.at(perm[static_cast<size_t>(j)], j) = 1.0;
    return p;
}

Tensor apply_perm(const Tensor& x, const std::vector<int64_t>& perm) {
    Tensor y(x.shape);
    const int64_t n = x.shape[0];
    const auto d = static_cast<int64_t>(perm.size());
    for (int64_t i = 0; i < n; ++i)
        for (int64_t j = 0; j < d; ++j) y.at(i, j) = x.at(i, perm[static_cast<size_t>(j)]);
    return y;
}

Tensor apply_perm_inverse(const Tensor& y, const std::vector<int64_t>& perm) {
    Tensor x(y.shape);
    const int64_t n = y.shape[0];
    const auto d = static_cast<int64_t>(perm.size());
    for (int64_t i = 0; i < n; ++i)
        for (int64_t j = 0; j < d; ++j) x.at(i, perm[static_cast<size_t>(j)]) = y.at(i, j);
    return x;
}

// conditioner forward on raw tensors: xa -> [B, 2*(d-k)]
Tensor conditioner_eval(const AffineCoupling& c, const Tensor& xa) {
    Tensor h = t_affine(xa, c.params[0], c.params[1]);
    h = t_tanh(h);
    h = t_affine(h, c.params[2], c.params[3]);
    h = t_tanh(h);
    return t_affine(h, c.params[4], c.params[5]);
}

}  // namespace

FlowModel FlowModel::create(int64_t dim, int64_t n_blocks, int64_t hidden, double scale_cap,
                            Rng& rng) {
    if (dim < 2) throw std::invalid_argument("flow: dim must be >= 2");
    if (n_blocks < 1) throw std::invalid_argument("flow: need at least one block");
    if (hidden < 1) throw std::invalid_argument("flow: hidden width must be >= 1");
    FlowModel m;
    m.dim = dim;
    m.hidden = hidden;
    m.scale_cap = scale_cap;
    const int64_t k = dim / 2, out = 2 * (dim - k);
    for (int64_t b = 0; b < n_blocks; ++b) {
        FlowBlock blk;
        blk.actnorm.log_scale = Tensor({dim});
        blk.actnorm.bias = Tensor({dim});
        blk.perm.resize(static_cast<size_t>(dim));
        std::iota(blk.perm.begin(), blk.perm.end(), 0);
        for (int64_t i = dim - 1; i > 0; --i)
            std::swap(blk.perm[static_cast<size_t>(i)],
                      blk.perm[static_cast<size_t>(rng.below(static_cast<uint64_t>(i + 1)))]);

        auto init_w = [&](int64_t rows, int64_t cols) {
            Tensor w = Tensor::randn({rows, cols}, rng);
            const double s = std::sqrt(1.0 / static_cast<double>(rows));
            for (double& v : w.data) v *= s;
            return w;
        };
        blk.coupling.params.push_back(init_w(k, hidden));
        blk.coupling.params.push_back(Tensor({hidden}));
        blk.coupling.params.push_back(init_w(hidden, hidden));
        blk.coupling.params.push_back(Tensor({hidden}));
        blk.coupling.params.push_back(Tensor({hidden, out}));  // zero head: identity coupling
        blk.coupling.params.push_back(Tensor({out}));
        m.blocks.push_back(std::move(blk));
    }
    return m;
}

std::pair<Tensor, Tensor> FlowModel::forward(const Tensor& x, bool strict) const {
    if (x.rank() != 2 || x.shape[1] != dim)
        throw std::invalid_argument("flow forward: x must be [n," + std::to_string(dim) + "]");
    if (strict && !initialized)
        throw std::logic_error("flow forward: actnorm not initialized (train or init first)");
    const int64_t n = x.shape[0], k = split_index();
    Tensor h = x;
    Tensor logdet({n});
    for (const FlowBlock& blk : blocks) {
        double an_ld = 0.0;
        for (int64_t j = 0; j < dim; ++j) an_ld += blk.actnorm.log_scale[j];
        for (int64_t i = 0; i < n; ++i) {
            for (int64_t j = 0; j < dim; ++j)
                h.at(i, j) = h.at(i, j) * std::exp(blk.actnorm.log_scale[j]) + blk.actnorm.bias[j];
            logdet[i] += an_ld;
        }
        h = apply_perm(h, blk.perm);
        Tensor xa = t_slice_cols(h, 0, k);
        Tensor raw = conditioner_eval(blk.coupling, xa);
        for (int64_t i = 0; i < n; ++i) {
            for (int64_t j = k; j < dim; ++j) {
                const double ls = scale_cap * std::tanh(raw.at(i, j - k));
                const double shift = raw.at(i, (dim - k) + (j - k));
                h.at(i, j) = h.at(i, j) * std::exp(ls) + shift;
                logdet[i] += ls;
            }
        }
    }
    return {std::move(h), std::move(logdet)};
}

Tensor FlowModel::inverse(const Tensor& z) const {
    if (z.rank() != 2 || z.shape[1] != dim)
        throw std::invalid_argument("flow inverse: z must be [n," + std::to_string(dim) + "]");
    if (!initialized)
        throw std::logic_error("flow inverse: actnorm not initialized (train or init first)");
    const int64_t n = z.shape[0], k = split_index();
    Tensor h = z;
    for (auto it = blocks.rbegin(); it != blocks.rend(); ++it) {
        const FlowBlock& blk = *it;
        Tensor ya = t_slice_cols(h, 0, k);
        Tensor raw = conditioner_eval(blk.coupling, ya);
        for (int64_t i = 0; i < n; ++i) {
            for (int64_t j = k; j < dim; ++j) {
                const double ls = scale_cap * std::tanh(raw.at(i, j - k));
                const double shift = raw.at(i, (dim - k) + (j - k));
                h.at(i, j) = (h.at(i, j) - shift) * std::exp(-ls);
            }
        }
        h = apply_perm_inverse(h, blk.perm);
        for (int64_t i = 0; i < n; ++i)
            for (int64_t j = 0; j < dim; ++j)
                h.at(i, j) = (h.at(i, j) - blk.actnorm.bias[j]) * std::exp(-blk.actnorm.log_scale[j]);
    }
    return h;
}

double FlowModel::nll(const Tensor& x) const {
    auto [z, logdet] = forward(x);
    const int64_t n = z.shape[0];
    double total = 0.0;
    for (int64_t i = 0; i < n; ++i) {
        double q = 0.0;
        for (int64_t j = 0; j < dim; ++j) q += z.at(i, j) * z.at(i, j);
        total += 0.5 * q + 0.5 * static_cast<double>(dim) * kLog2Pi - logdet[i];
    }
    return total / static_cast<double>(n);
}

Var FlowModel::nll_build(Tape& tape, const std::vector<Var>& param_vars, const Tensor& x) const {
    if (x.rank() != 2 || x.shape[1] != dim)
        throw std::invalid_argument("flow nll: x must be [n," + std::to_string(dim) + "]");
    if (!initialized) throw std::logic_error("flow nll: actnorm not initialized");
    if (param_vars.size() != blocks.size() * 8)
        throw std::invalid_argument("flow nll: parameter count mismatch");
    const int64_t n = x.shape[0], k = split_index();

    Var h = tape.leaf(x);
    Var logdet = tape.leaf(Tensor({n}));
    size_t p = 0;
    for (const FlowBlock& blk : blocks) {
        Var logs = param_vars[p++];
        Var bias = param_vars[p++];
        h = tape.add(tape.mul(h, tape.broadcast(tape.exp(logs), n)), tape.broadcast(bias, n));
        logdet = tape.add(logdet, tape.broadcast(tape.sum(logs), n));
        h = tape.matmul(h, tape.leaf(perm_matrix(blk.perm)));
        Var xa = tape.split(h, 0, k);
        Var xb = tape.split(h, k, dim);
        Var c = tape.tanh(tape.affine(xa, param_vars[p], param_vars[p + 1]));
        c = tape.tanh(tape.affine(c, param_vars[p + 2], param_vars[p + 3]));
        c = tape.affine(c, param_vars[p + 4], param_vars[p + 5]);
        p += 6;
        Var ls = tape.scale(tape.tanh(tape.split(c, 0, dim - k)), scale_cap);
        Var shift = tape.split(c, dim - k, 2 * (dim - k));
        Var yb = tape.add(tape.mul(xb, tape.exp(ls)), shift);
        h = tape.concat(xa, yb);
        logdet = tape.add(logdet, tape.sum_rows(ls));
    }
    Var q = tape.sum_rows(tape.square(h));
    Var per_sample = tape.sub(tape.scale(q, 0.5), logdet);
    return tape.add(tape.mean(per_sample),
                    tape.leaf(Tensor::scalar(0.5 * static_cast<double>(dim) * kLog2Pi)));
}

void FlowModel::init_actnorm(const Tensor& batch) {
    if (batch.rank() != 2 || batch.shape[1] != dim)
        throw std::invalid_argument("flow init: batch must be [n," + std::to_string(dim) + "]");
    if (batch.shape[0] < 2) throw std::invalid_argument("flow init: need at least 2 rows");
    const int64_t n = batch.shape[0], k = split_index();
    Tensor h = batch;
    for (FlowBlock& blk : blocks) {
        for (int64_t j = 0; j < dim; ++j) {
            double mean = 0.0, sq = 0.0;
            for (int64_t i = 0; i < n; ++i) mean += h.at(i, j);
            mean /= static_cast<double>(n);
            for (int64_t i = 0; i < n; ++i) {
                const double c = h.at(i, j) - mean;
                sq += c * c;
            }
            double sd = std::sqrt(sq / static_cast<double>(n));
            if (sd < 1e-6) sd = 1e-6;
            blk.actnorm.log_scale[j] = -std::log(sd);
            blk.actnorm.bias[j] = -mean / sd;
        }
        // push the batch through the freshly initialized block
        for (int64_t i = 0; i < n; ++i)
            for (int64_t j = 0; j < dim; ++j)
                h.at(i, j) = h.at(i, j) * std::exp(blk.actnorm.log_scale[j]) + blk.actnorm.bias[j];
        h = apply_perm(h, blk.perm);
        Tensor xa = t_slice_cols(h, 0, k);
        Tensor raw = conditioner_eval(blk.coupling, xa);
        for (int64_t i = 0; i < n; ++i) {
            for (int64_t j = k; j < dim; ++j) {
                const double ls = scale_cap * std::tanh(raw.at(i, j - k));
                const double shift = raw.at(i, (dim - k) + (j - k));
                h.at(i, j) = h.at(i, j) * std::exp(ls) + shift;
            }
        }
    }
    initialized = true;
}

std::vector<Tensor*> FlowModel::param_ptrs() {
    std::vector<Tensor*> ps;
    for (FlowBlock& blk : blocks) {
        ps.push_back(&blk.actnorm.log_scale);
        ps.push_back(&blk.actnorm.bias);
        for (Tensor& t : blk.coupling.params) ps.push_back(&t);
    }
    return ps;
}

std::vector<const Tensor*> FlowModel::param_ptrs() const {
    std::vector<const Tensor*> ps;
    for (const FlowBlock& blk : blocks) {
        ps.push_back(&blk.actnorm.log_scale);
        ps.push_back(&blk.actnorm.bias);
        for (const Tensor& t : blk.coupling.params) ps.push_back(&t);
    }
    return ps;
}

std::vector<Tensor> FlowModel::params_copy() const {
    std::vector<Tensor> out;
    for (const Tensor* p : param_ptrs()) out.push_back(*p);
    return out;
}

void FlowModel::set_params(const std::vector<Tensor>& ps) {
    auto ptrs = param_ptrs();
    if (ps.size() != ptrs.size()) throw std::invalid_argument("flow set_params: count mismatch");
    for (size_t i = 0; i < ps.size(); ++i) {
        require_same_shape("flow set_params", *ptrs[i], ps[i]);
        *ptrs[i] = ps[i];
    }
}

std::vector<std::string> FlowModel::param_names() const {
    std::vector<std::string> names;
    for (size_t b = 0; b < blocks.size(); ++b) {
        const std::string base = "flow.b" + std::to_string(b) + ".";
        names.push_back(base + "an_logs");
        names.push_back(base + "an_bias");
        for (int i = 0; i < 3; ++i) {
            names.push_back(base + "W" + std::to_string(i));
            names.push_back(base + "b" + std::to_string(i));
        }
    }
    return names;
}

}  // namespace dinof
