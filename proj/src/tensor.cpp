#include "dinof/tensor.hpp"

#include <cmath>
#include <stdexcept>

#include "dinof/parallel.hpp"

namespace dinof {

namespace {

int64_t shape_product(const std::vector<int64_t>& s) {
    int64_t p = 1;
    for (int64_t e : s) {
        if (e < 0) throw std::invalid_argument("tensor: negative extent");
        p *= e;
    }
    return p;
}

[[noreturn]] void shape_error(const char* op, const Tensor& a, const Tensor& b) {
    throw std::invalid_argument(std::string(op) + ": shape mismatch " + a.shape_str() +
                                " vs " + b.shape_str());
}

void require_2d(const char* op, const Tensor& a) {
    if (a.rank() != 2)
        throw std::invalid_argument(std::string(op) + ": expected rank-2 tensor, got " +
                                    a.shape_str());
}

}  // namespace

Tensor::Tensor(std::vector<int64_t> s) : shape(std::move(s)) {
    data.assign(static_cast<size_t>(shape_product(shape)), 0.0);
}

Tensor Tensor::scalar(double v) {
    Tensor t({1});
    t.data[0] = v;
    return t;
}

Tensor Tensor::full(std::vector<int64_t> s, double v) {
    Tensor t(std::move(s));
    for (double& x : t.data) x = v;
    return t;
}

Tensor Tensor::from(std::initializer_list<double> v) {
    Tensor t({static_cast<int64_t>(v.size())});
    t.data.assign(v.begin(), v.end());
    return t;
}

Tensor Tensor::from2d(int64_t r, int64_t c, std::initializer_list<double> v) {
    if (static_cast<int64_t>(v.size()) != r * c)
        throw std::invalid_argument("from2d: value count does not match shape");
    Tensor t({r, c});
    t.data.assign(v.begin(), v.end());
    return t;
}

Tensor Tensor::randn(std::vector<int64_t> s, Rng& rng) {
    Tensor t(std::move(s));
    rng.fill_normal(t.data.data(), t.numel());
    return t;
}

Tensor Tensor::identity(int64_t n) {
    Tensor t({n, n});
    for (int64_t i = 0; i < n; ++i) t.at(i, i) = 1.0;
    return t;
}

std::string Tensor::shape_str() const {
    std::string s = "[";
    for (size_t i = 0; i < shape.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(shape[i]);
    }
    return s + "]";
}

bool Tensor::all_finite() const {
    for (double v : data)
        if (!std::isfinite(v)) return false;
    return true;
}

void require_same_shape(const char* op, const Tensor& a, const Tensor& b) {
    if (!a.same_shape(b)) shape_error(op, a, b);
}

Tensor t_add(const Tensor& a, const Tensor& b) {
    require_same_shape("add", a, b);
    Tensor c = a;
    for (int64_t i = 0; i < c.numel(); ++i) c[i] += b[i];
    return c;
}

Tensor t_sub(const Tensor& a, const Tensor& b) {
    require_same_shape("sub", a, b);
    Tensor c = a;
    for (int64_t i = 0; i < c.numel(); ++i) c[i] -= b[i];
    return c;
}

Tensor t_mul(const Tensor& a, const Tensor& b) {
    require_same_shape("mul", a, b);
    Tensor c = a;
    for (int64_t i = 0; i < c.numel(); ++i) c[i] *= b[i];
    return c;
}

Tensor t_scale(const Tensor& a, double c) {
    Tensor r = a;
    for (double& v : r.data) v *= c;
    return r;
}

Tensor t_matmul(const Tensor& a, const Tensor& b) {
    require_2d("matmul", a);
    require_2d("matmul", b);
    if (a.shape[1] != b.shape[0]) shape_error("matmul", a, b);
    const int64_t m = a.shape[0], k = a.shape[1], n = b.shape[1];
    Tensor c({m, n});
    const double* A = a.data.data();
    const double* B = b.data.data();
    double* C = c.data.data();
    parallel_for(m, [&](int64_t i0, int64_t i1) {
        for (int64_t i = i0; i < i1; ++i) {
            double* Ci = C + i * n;
            for (int64_t l = 0; l < k; ++l) {
                const double av = A[i * k + l];
                const double* Bl = B + l * n;
                for (int64_t j = 0; j < n; ++j) Ci[j] += av * Bl[j];
            }
        }
    });
    return c;
}

Tensor t_affine(const Tensor& x, const Tensor& w, const Tensor& b) {
    require_2d("affine", x);
    require_2d("affine", w);
    if (x.shape[1] != w.shape[0]) shape_error("affine", x, w);
    if (b.rank() != 1 || b.shape[0] != w.shape[1]) shape_error("affine", w, b);
    const int64_t m = x.shape[0], k = x.shape[1], n = w.shape[1];
    Tensor c({m, n});
    const double* X = x.data.data();
    const double* W = w.data.data();
    const double* B = b.data.data();
    double* C = c.data.data();
    parallel_for(m, [&](int64_t i0, int64_t i1) {
        for (int64_t i = i0; i < i1; ++i) {
            double* Ci = C + i * n;
            for (int64_t j = 0; j < n; ++j) Ci[j] = B[j];
            for (int64_t l = 0; l < k; ++l) {
                const double xv = X[i * k + l];
                const double* Wl = W + l * n;
                for (int64_t j = 0; j < n; ++j) Ci[j] += xv * Wl[j];
            }
        }
    });
    return c;
}

Tensor t_tanh(const Tensor& a) {
    Tensor c = a;
    for (double& v : c.data) v = std::tanh(v);
    return c;
}

Tensor t_softplus(const Tensor& a) {
    Tensor c = a;
    for (double& v : c.data)
        v = v > 0.0 ? v + std::log1p(std::exp(-v)) : std::log1p(std::exp(v));
    return c;
}

Tensor t_exp(const Tensor& a) {
    Tensor c = a;
    for (double& v : c.data) v = std::exp(v);
    return c;
}

Tensor t_log(const Tensor& a) {
    Tensor c = a;
    for (double& v : c.data) {
        if (v <= 0.0) throw std::domain_error("log: non-positive input " + std::to_string(v));
        v = std::log(v);
    }
    return c;
}

Tensor t_square(const Tensor& a) {
    Tensor c = a;
    for (double& v : c.data) v *= v;
    return c;
}

Tensor t_sum(const Tensor& a) {
    double s = 0.0;
    for (double v : a.data) s += v;
    return Tensor::scalar(s);
}

Tensor t_sum_rows(const Tensor& a) {
    require_2d("sum_rows", a);
    const int64_t m = a.shape[0], n = a.shape[1];
    Tensor c({m});
    for (int64_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (int64_t j = 0; j < n; ++j) s += a.data[static_cast<size_t>(i * n + j)];
        c[i] = s;
    }
    return c;
}

Tensor t_mean(const Tensor& a) {
    if (a.numel() == 0) throw std::invalid_argument("mean: empty tensor");
    Tensor s = t_sum(a);
    s.data[0] /= static_cast<double>(a.numel());
    return s;
}

Tensor t_concat_cols(const Tensor& a, const Tensor& b) {
    require_2d("concat", a);
    require_2d("concat", b);
    if (a.shape[0] != b.shape[0]) shape_error("concat", a, b);
    const int64_t m = a.shape[0], p = a.shape[1], q = b.shape[1];
    Tensor c({m, p + q});
    for (int64_t i = 0; i < m; ++i) {
        for (int64_t j = 0; j < p; ++j) c.at(i, j) = a.at(i, j);
        for (int64_t j = 0; j < q; ++j) c.at(i, p + j) = b.at(i, j);
    }
    return c;
}

Tensor t_slice_cols(const Tensor& a, int64_t c0, int64_t c1) {
    require_2d("split", a);
    if (c0 < 0 || c1 > a.shape[1] || c0 >= c1)
        throw std::invalid_argument("split: bad column range [" + std::to_string(c0) + "," +
                                    std::to_string(c1) + ") for " + a.shape_str());
    const int64_t m = a.shape[0], w = c1 - c0;
    Tensor c({m, w});
    for (int64_t i = 0; i < m; ++i)
        for (int64_t j = 0; j < w; ++j) c.at(i, j) = a.at(i, c0 + j);
    return c;
}

Tensor t_broadcast(const Tensor& a, int64_t n) {
    if (n < 1) throw std::invalid_argument("broadcast: target rows must be >= 1");
    if (a.rank() == 1 && a.shape[0] == 1) return Tensor::full({n}, a.data[0]);
    if (a.rank() == 1) {
        Tensor c({n, a.shape[0]});
        for (int64_t i = 0; i < n; ++i)
            for (int64_t j = 0; j < a.shape[0]; ++j) c.at(i, j) = a[j];
        return c;
    }
    throw std::invalid_argument("broadcast: expected rank-1 input, got " + a.shape_str());
}

Tensor t_transpose(const Tensor& a) {
    require_2d("transpose", a);
    const int64_t m = a.shape[0], n = a.shape[1];
    Tensor c({n, m});
    for (int64_t i = 0; i < m; ++i)
        for (int64_t j = 0; j < n; ++j) c.at(j, i) = a.at(i, j);
    return c;
}

Tensor t_col_sums(const Tensor& a) {
    require_2d("col_sums", a);
    const int64_t m = a.shape[0], n = a.shape[1];
    Tensor c({n});
    for (int64_t i = 0; i < m; ++i)
        for (int64_t j = 0; j < n; ++j) c[j] += a.at(i, j);
    return c;
}

double t_frobenius(const Tensor& a) {
    double s = 0.0;
    for (double v : a.data) s += v * v;
    return std::sqrt(s);
}

double t_max_abs_diff(const Tensor& a, const Tensor& b) {
    require_same_shape("max_abs_diff", a, b);
    double m = 0.0;
    for (int64_t i = 0; i < a.numel(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

}  // namespace dinof
