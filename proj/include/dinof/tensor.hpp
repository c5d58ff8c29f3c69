#pragma once

#include <cstdint>
#include <initializer_list>
#include <string>
#include <vector>

#include "dinof/rng.hpp"

namespace dinof {

// Dense row-major tensor of 64-bit floats. Rank is 1 or 2 everywhere in this
// codebase; scalars are shape {1}.
struct Tensor {
    std::vector<int64_t> shape;
    std::vector<double> data;

    Tensor() = default;
    explicit Tensor(std::vector<int64_t> s);
    Tensor(std::initializer_list<int64_t> s) : Tensor(std::vector<int64_t>(s)) {}

    static Tensor scalar(double v);
    static Tensor full(std::vector<int64_t> s, double v);
    static Tensor from(std::initializer_list<double> v);                      // rank-1
    static Tensor from2d(int64_t r, int64_t c, std::initializer_list<double> v);
    static Tensor randn(std::vector<int64_t> s, Rng& rng);
    static Tensor identity(int64_t n);

    int64_t numel() const { return static_cast<int64_t>(data.size()); }
    int64_t rank() const { return static_cast<int64_t>(shape.size()); }
    int64_t rows() const { return shape.empty() ? 0 : shape[0]; }
    int64_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

    double& operator[](int64_t i) { return data[static_cast<size_t>(i)]; }
    double operator[](int64_t i) const { return data[static_cast<size_t>(i)]; }
    double& at(int64_t r, int64_t c) { return data[static_cast<size_t>(r * cols() + c)]; }
    double at(int64_t r, int64_t c) const { return data[static_cast<size_t>(r * cols() + c)]; }

    bool same_shape(const Tensor& o) const { return shape == o.shape; }
    std::string shape_str() const;
    bool all_finite() const;
};

// ---- raw kernels (shared by taped ops and inference paths) ----

Tensor t_add(const Tensor& a, const Tensor& b);
Tensor t_sub(const Tensor& a, const Tensor& b);
Tensor t_mul(const Tensor& a, const Tensor& b);
Tensor t_scale(const Tensor& a, double c);
Tensor t_matmul(const Tensor& a, const Tensor& b);
Tensor t_affine(const Tensor& x, const Tensor& w, const Tensor& b);  // x*w + row-broadcast b
Tensor t_tanh(const Tensor& a);
Tensor t_softplus(const Tensor& a);
Tensor t_exp(const Tensor& a);
Tensor t_log(const Tensor& a);  // domain error on non-positive entries
Tensor t_square(const Tensor& a);
Tensor t_sum(const Tensor& a);               // full reduction -> {1}
Tensor t_sum_rows(const Tensor& a);          // [n,m] -> [n]
Tensor t_mean(const Tensor& a);              // full reduction -> {1}
Tensor t_concat_cols(const Tensor& a, const Tensor& b);
Tensor t_slice_cols(const Tensor& a, int64_t c0, int64_t c1);
Tensor t_broadcast(const Tensor& a, int64_t n);  // [m]->[n,m], {1}->[n]
Tensor t_transpose(const Tensor& a);
Tensor t_col_sums(const Tensor& a);          // [n,m] -> [m]

double t_frobenius(const Tensor& a);
double t_max_abs_diff(const Tensor& a, const Tensor& b);

// throws std::invalid_argument naming both shapes
void require_same_shape(const char* op, const Tensor& a, const Tensor& b);

}  // namespace dinof
