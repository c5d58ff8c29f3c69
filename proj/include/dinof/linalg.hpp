#pragma once

#include <cstdint>
#include <vector>

namespace dinof {

// Dense symmetric positive-definite helpers for small (d <= 64) matrices,
// row-major storage.

// Lower-triangular Cholesky factor; throws std::domain_error if not SPD.
std::vector<double> cholesky(const std::vector<double>& a, int64_t d);

// Solves L L^T x = b in place given the factor from cholesky().
void chol_solve(const std::vector<double>& L, int64_t d, double* x);

// log det(A) = 2 * sum log diag(L)
double chol_logdet(const std::vector<double>& L, int64_t d);

// y = L * x (used to draw correlated Gaussians)
void lower_apply(const std::vector<double>& L, int64_t d, const double* x, double* y);

}  // namespace dinof
