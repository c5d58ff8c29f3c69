#pragma once

#include <cstdint>
#include <vector>

#include "dinof/tensor.hpp"

namespace dinof {

enum class Op : uint8_t {
    Leaf,
    Add,
    Sub,
    Mul,
    MatMul,
    Affine,
    Tanh,
    Softplus,
    Exp,
    Log,
    Sum,       // aux0: 0 = full reduction, 1 = row reduction
    Mean,
    Square,
    Concat,
    Split,     // aux0/aux1: column range [aux0, aux1)
    Scale,     // cval: constant factor
    Broadcast  // aux0: target row count
};

struct Node {
    Op op = Op::Leaf;
    int in0 = -1, in1 = -1, in2 = -1;
    Tensor value;
    double cval = 0.0;
    int64_t aux0 = 0, aux1 = 0;
};

class Tape;

// Lightweight handle to a recorded node.
struct Var {
    Tape* tape = nullptr;
    int id = -1;
    const Tensor& value() const;
};

// Append-only record of forward operations plus the gradient map filled by
// backward(). Inputs of a node always precede it, so a single reverse scan
// propagates gradients. backward() accumulates into the map; call
// zero_grad() to reset between unrelated passes.
class Tape {
public:
    Var leaf(Tensor t);
    std::vector<Var> leaves(const std::vector<Tensor>& ts);

    Var add(Var a, Var b);
    Var sub(Var a, Var b);
    Var mul(Var a, Var b);
    Var matmul(Var a, Var b);
    Var affine(Var x, Var w, Var b);
    Var tanh(Var a);
    Var softplus(Var a);
    Var exp(Var a);
    Var log(Var a);
    Var sum(Var a);
    Var sum_rows(Var a);
    Var mean(Var a);
    Var square(Var a);
    Var concat(Var a, Var b);
    Var split(Var a, int64_t c0, int64_t c1);
    Var scale(Var a, double c);
    Var broadcast(Var a, int64_t n);

    // root must be a scalar (one element) recorded on this tape.
    void backward(Var root);

    Tensor grad(Var v) const;  // zeros of the node's shape when nothing reached it
    bool has_grad(Var v) const;
    void zero_grad();

    size_t size() const { return nodes_.size(); }
    const Node& node(int id) const { return nodes_[static_cast<size_t>(id)]; }

private:
    friend struct Var;
    int push(Node n);
    Var wrap(int id) { return Var{this, id}; }
    void check(Var v, const char* op) const;

    std::vector<Node> nodes_;
    std::vector<Tensor> grads_;  // parallel to nodes_; empty tensor = no gradient yet
};

}  // namespace dinof
