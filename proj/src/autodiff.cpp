#include "dinof/autodiff.hpp"

#include <cmath>
#include <stdexcept>

namespace dinof {

const Tensor& Var::value() const { return tape->node(id).value; }

int Tape::push(Node n) {
    nodes_.push_back(std::move(n));
    grads_.emplace_back();
    return static_cast<int>(nodes_.size()) - 1;
}

void Tape::check(Var v, const char* op) const {
    if (v.tape != this || v.id < 0 || v.id >= static_cast<int>(nodes_.size()))
        throw std::invalid_argument(std::string(op) + ": variable does not live on this tape");
}

Var Tape::leaf(Tensor t) {
    Node n;
    n.op = Op::Leaf;
    n.value = std::move(t);
    return wrap(push(std::move(n)));
}

std::vector<Var> Tape::leaves(const std::vector<Tensor>& ts) {
    std::vector<Var> vs;
    vs.reserve(ts.size());
    for (const Tensor& t : ts) vs.push_back(leaf(t));
    return vs;
}

namespace {
Node binary(Op op, Var a, Var b, Tensor value) {
    Node n;
    n.op = op;
    n.in0 = a.id;
    n.in1 = b.id;
    n.value = std::move(value);
    return n;
}
Node unary(Op op, Var a, Tensor value) {
    Node n;
    n.op = op;
    n.in0 = a.id;
    n.value = std::move(value);
    return n;
}
}  // namespace

Var Tape::add(Var a, Var b) {
    check(a, "add");
    check(b, "add");
    return wrap(push(binary(Op::Add, a, b, t_add(a.value(), b.value()))));
}

Var Tape::sub(Var a, Var b) {
    check(a, "sub");
    check(b, "sub");
    return wrap(push(binary(Op::Sub, a, b, t_sub(a.value(), b.value()))));
}

Var Tape::mul(Var a, Var b) {
    check(a, "mul");
    check(b, "mul");
    return wrap(push(binary(Op::Mul, a, b, t_mul(a.value(), b.value()))));
}

Var Tape::matmul(Var a, Var b) {
    check(a, "matmul");
    check(b, "matmul");
    return wrap(push(binary(Op::MatMul, a, b, t_matmul(a.value(), b.value()))));
}

Var Tape::affine(Var x, Var w, Var b) {
    check(x, "affine");
    check(w, "affine");
    check(b, "affine");
    Node n;
    n.op = Op::Affine;
    n.in0 = x.id;
    n.in1 = w.id;
    n.in2 = b.id;
    n.value = t_affine(x.value(), w.value(), b.value());
    return wrap(push(std::move(n)));
}

Var Tape::tanh(Var a) {
    check(a, "tanh");
    return wrap(push(unary(Op::Tanh, a, t_tanh(a.value()))));
}

Var Tape::softplus(Var a) {
    check(a, "softplus");
    return wrap(push(unary(Op::Softplus, a, t_softplus(a.value()))));
}

Var Tape::exp(Var a) {
    check(a, "exp");
    return wrap(push(unary(Op::Exp, a, t_exp(a.value()))));
}

Var Tape::log(Var a) {
    check(a, "log");
    return wrap(push(unary(Op::Log, a, t_log(a.value()))));
}

Var Tape::sum(Var a) {
    check(a, "sum");
    Node n = unary(Op::Sum, a, t_sum(a.value()));
    n.aux0 = 0;
    return wrap(push(std::move(n)));
}

Var Tape::sum_rows(Var a) {
    check(a, "sum_rows");
    Node n = unary(Op::Sum, a, t_sum_rows(a.value()));
    n.aux0 = 1;
    return wrap(push(std::move(n)));
}

Var Tape::mean(Var a) {
    check(a, "mean");
    return wrap(push(unary(Op::Mean, a, t_mean(a.value()))));
}

Var Tape::square(Var a) {
    check(a, "square");
    return wrap(push(unary(Op::Square, a, t_square(a.value()))));
}

Var Tape::concat(Var a, Var b) {
    check(a, "concat");
    check(b, "concat");
    return wrap(push(binary(Op::Concat, a, b, t_concat_cols(a.value(), b.value()))));
}

Var Tape::split(Var a, int64_t c0, int64_t c1) {
    check(a, "split");
    Node n = unary(Op::Split, a, t_slice_cols(a.value(), c0, c1));
    n.aux0 = c0;
    n.aux1 = c1;
    return wrap(push(std::move(n)));
}

Var Tape::scale(Var a, double c) {
    check(a, "scale");
    Node n = unary(Op::Scale, a, t_scale(a.value(), c));
    n.cval = c;
    return wrap(push(std::move(n)));
}

Var Tape::broadcast(Var a, int64_t rows) {
    check(a, "broadcast");
    Node n = unary(Op::Broadcast, a, t_broadcast(a.value(), rows));
    n.aux0 = rows;
    return wrap(push(std::move(n)));
}

namespace {

// dst += src, initializing dst on first touch.
void acc(Tensor& dst, const Tensor& src) {
    if (dst.data.empty()) {
        dst = src;
        return;
    }
    for (int64_t i = 0; i < dst.numel(); ++i) dst[i] += src[i];
}

void acc_scaled(Tensor& dst, const Tensor& src, double c) {
    if (dst.data.empty()) dst = Tensor(src.shape);
    for (int64_t i = 0; i < dst.numel(); ++i) dst[i] += c * src[i];
}

}  // namespace

void Tape::backward(Var root) {
    check(root, "backward");
    if (root.value().numel() != 1)
        throw std::invalid_argument("backward: root must be scalar, got shape " +
                                    root.value().shape_str());

    std::vector<Tensor> g(nodes_.size());
    g[static_cast<size_t>(root.id)] = Tensor::scalar(1.0);

    for (int i = root.id; i >= 0; --i) {
        Tensor& go = g[static_cast<size_t>(i)];
        if (go.data.empty()) continue;
        const Node& nd = nodes_[static_cast<size_t>(i)];
        const auto in = [&](int id) -> const Tensor& {
            return nodes_[static_cast<size_t>(id)].value;
        };
        auto gin = [&](int id) -> Tensor& { return g[static_cast<size_t>(id)]; };

        switch (nd.op) {
            case Op::Leaf:
                break;
            case Op::Add:
                acc(gin(nd.in0), go);
                acc(gin(nd.in1), go);
                break;
            case Op::Sub:
                acc(gin(nd.in0), go);
                acc_scaled(gin(nd.in1), go, -1.0);
                break;
            case Op::Mul:
                acc(gin(nd.in0), t_mul(go, in(nd.in1)));
                acc(gin(nd.in1), t_mul(go, in(nd.in0)));
                break;
            case Op::MatMul:
                acc(gin(nd.in0), t_matmul(go, t_transpose(in(nd.in1))));
                acc(gin(nd.in1), t_matmul(t_transpose(in(nd.in0)), go));
                break;
            case Op::Affine:
                acc(gin(nd.in0), t_matmul(go, t_transpose(in(nd.in1))));
                acc(gin(nd.in1), t_matmul(t_transpose(in(nd.in0)), go));
                acc(gin(nd.in2), t_col_sums(go));
                break;
            case Op::Tanh: {
                Tensor d = nd.value;  // 1 - y^2
                for (double& v : d.data) v = 1.0 - v * v;
                acc(gin(nd.in0), t_mul(go, d));
                break;
            }
            case Op::Softplus: {
                Tensor d = in(nd.in0);  // sigmoid(x)
                for (double& v : d.data) v = v > 0.0 ? 1.0 / (1.0 + std::exp(-v))
                                                     : std::exp(v) / (1.0 + std::exp(v));
                acc(gin(nd.in0), t_mul(go, d));
                break;
            }
            case Op::Exp:
                acc(gin(nd.in0), t_mul(go, nd.value));
                break;
            case Op::Log: {
                Tensor d = in(nd.in0);
                for (double& v : d.data) v = 1.0 / v;
                acc(gin(nd.in0), t_mul(go, d));
                break;
            }
            case Op::Sum:
                if (nd.aux0 == 0) {
                    acc(gin(nd.in0), Tensor::full(in(nd.in0).shape, go.data[0]));
                } else {
                    const Tensor& x = in(nd.in0);
                    Tensor d(x.shape);
                    for (int64_t r = 0; r < x.shape[0]; ++r)
                        for (int64_t c = 0; c < x.shape[1]; ++c) d.at(r, c) = go[r];
                    acc(gin(nd.in0), d);
                }
                break;
            case Op::Mean:
                acc(gin(nd.in0),
                    Tensor::full(in(nd.in0).shape,
                                 go.data[0] / static_cast<double>(in(nd.in0).numel())));
                break;
            case Op::Square: {
                Tensor d = in(nd.in0);
                for (double& v : d.data) v *= 2.0;
                acc(gin(nd.in0), t_mul(go, d));
                break;
            }
            case Op::Concat: {
                const int64_t p = in(nd.in0).shape[1];
                const int64_t q = in(nd.in1).shape[1];
                acc(gin(nd.in0), t_slice_cols(go, 0, p));
                acc(gin(nd.in1), t_slice_cols(go, p, p + q));
                break;
            }
            case Op::Split: {
                const Tensor& x = in(nd.in0);
                Tensor d(x.shape);
                for (int64_t r = 0; r < x.shape[0]; ++r)
                    for (int64_t c = nd.aux0; c < nd.aux1; ++c)
                        d.at(r, c) = go.at(r, c - nd.aux0);
                acc(gin(nd.in0), d);
                break;
            }
            case Op::Scale:
                acc_scaled(gin(nd.in0), go, nd.cval);
                break;
            case Op::Broadcast: {
                const Tensor& x = in(nd.in0);
                if (x.rank() == 1 && x.shape[0] == 1) {
                    acc(gin(nd.in0), t_sum(go));
                } else {
                    acc(gin(nd.in0), t_col_sums(go));
                }
                break;
            }
        }
    }

    for (size_t i = 0; i < nodes_.size(); ++i)
        if (!g[i].data.empty()) acc(grads_[i], g[i]);
}

Tensor Tape::grad(Var v) const {
    check(v, "grad");
    const Tensor& g = grads_[static_cast<size_t>(v.id)];
    if (g.data.empty()) return Tensor(v.value().shape);
    return g;
}

bool Tape::has_grad(Var v) const {
    check(v, "has_grad");
    return !grads_[static_cast<size_t>(v.id)].data.empty();
}

void Tape::zero_grad() {
    for (Tensor& g : grads_) g = Tensor();
}

}  // namespace dinof
