#pragma once

// The coordinatewise maps behind the logit graph parametrization:
//
//   g_n(x) = x + softmax(n x)        (a diffeomorphism of R^d for n > 0)
//   h_n    = g_n^{-1}                (computed by damped Newton)
//   h(y)   = min(y, alpha*)          (the n -> infinity limit, water filling)
//
// and the uniform bound |h_n(y) - h(y)|_inf <= d * eps*(n).

#include <Eigen/Dense>
#include <cstddef>
#include <span>
#include <vector>

#include "logitgraph/game.hpp"

namespace logitgraph {

/// g_n(v) = v + softmax(n v). Throws InvalidInput for an empty vector or
/// n <= 0.
Vector g_map(double n, std::span<const double> v);

/// Jacobian I + n (diag(s) - s s^T) with s = softmax(n v). Columns sum to 1.
Eigen::MatrixXd g_jacobian(double n, std::span<const double> v);

/// Positive diagonal, negative off-diagonal, positive column sums.
/// Throws InvalidInput for a non-square matrix.
bool is_cl_matrix(const Eigen::MatrixXd& m);

/// The level alpha with sum_i (y_i - alpha)_+ = 1.
double alpha_star(std::span<const double> y);

struct SimplexProjection {
  double alpha_star = 0.0;
  Vector h_value;   // min(y_i, alpha_star)
  Vector residual;  // y - h_value, a probability vector
};

SimplexProjection h_exact(std::span<const double> y);

inline constexpr int kDefaultInverseIterations = 200;

/// Solves g_n(x) = y to sup-norm tolerance `tol`. Throws ConvergenceFailure
/// (carrying the best iterate) if the iteration cap is hit.
Vector h_numeric(double n, std::span<const double> y, double tol,
                 int max_iter = kDefaultInverseIterations);

struct ConvergenceBound {
  double n = 0.0;
  double epsilon_star = 0.5;  // solves eps (1 + exp(eps n)) = 1

  double uniform_bound(std::size_t d) const { return static_cast<double>(d) * epsilon_star; }
};

/// Throws InvalidInput for negative or non-finite n.
ConvergenceBound epsilon_bound(double n);

}  // namespace logitgraph
