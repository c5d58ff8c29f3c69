#include "dinof/linalg.hpp"

#include <cmath>
#include <stdexcept>

namespace dinof {

std::vector<double> cholesky(const std::vector<double>& a, int64_t d) {
    if (static_cast<int64_t>(a.size()) != d * d)
        throw std::invalid_argument("cholesky: size mismatch");
    std::vector<double> L(static_cast<size_t>(d * d), 0.0);
    for (int64_t i = 0; i < d; ++i) {
        for (int64_t j = 0; j <= i; ++j) {
            double s = a[static_cast<size_t>(i * d + j)];
            for (int64_t k = 0; k < j; ++k)
                s -= L[static_cast<size_t>(i * d + k)] * L[static_cast<size_t>(j * d + k)];
            if (i == j) {
                if (s <= 0.0) throw std::domain_error("cholesky: matrix not positive definite");
                L[static_cast<size_t>(i * d + i)] = std::sqrt(s);
            } else {
                L[static_cast<size_t>(i * d + j)] = s / L[static_cast<size_t>(j * d + j)];
            }
        }
    }
    return L;
}

void chol_solve(const std::vector<double>& L, int64_t d, double* x) {
    // forward substitution L y = x
    for (int64_t i = 0; i < d; ++i) {
        double s = x[i];
        for (int64_t k = 0; k < i; ++k) s -= L[static_cast<size_t>(i * d + k)] * x[k];
        x[i] = s / L[static_cast<size_t>(i * d + i)];
    }
    // back substitution L^T x = y
    for (int64_t i = d - 1; i >= 0; --i) {
        double s = x[i];
        for (int64_t k = i + 1; k < d; ++k) s -= L[static_cast<size_t>(k * d + i)] * x[k];
        x[i] = s / L[static_cast<size_t>(i * d + i)];
    }
}

double chol_logdet(const std::vector<double>& L, int64_t d) {
    double s = 0.0;
    for (int64_t i = 0; i < d; ++i) s += std::log(L[static_cast<size_t>(i * d + i)]);
    return 2.0 * s;
}

void lower_apply(const std::vector<double>& L, int64_t d, const double* x, double* y) {
    for (int64_t i = 0; i < d; ++i) {
        double s = 0.0;
        for (int64_t k = 0; k <= i; ++k) s += L[static_cast<size_t>(i * d + k)] * x[k];
        y[i] = s;
    }
}

}  // namespace dinof
