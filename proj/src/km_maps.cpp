#include "logitgraph/km_maps.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "logitgraph/error.hpp"
#include "logitgraph/softmax.hpp"

namespace logitgraph {

namespace {

void check_args(double n, std::span<const double> v) {
  if (v.empty()) throw InvalidInput("g_n needs a nonempty vector");
  if (!(n > 0.0) || !std::isfinite(n)) throw InvalidInput("g_n needs n > 0");
}

}  // namespace

Vector g_map(double n, std::span<const double> v) {
  check_args(n, v);
  Vector out = softmax(n, v);
  for (std::size_t k = 0; k < v.size(); ++k) out[k] += v[k];
  return out;
}

Eigen::MatrixXd g_jacobian(double n, std::span<const double> v) {
  check_args(n, v);
  const Vector s = softmax(n, v);
  const auto d = static_cast<Eigen::Index>(v.size());
  Eigen::MatrixXd jac(d, d);
  for (Eigen::Index i = 0; i < d; ++i)
    for (Eigen::Index j = 0; j < d; ++j)
      jac(i, j) = i == j ? 1.0 + n * s[i] * (1.0 - s[i]) : -n * s[i] * s[j];
  return jac;
}

bool is_cl_matrix(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw InvalidInput("CL-matrix test needs a square matrix");
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (i == j && !(m(i, j) > 0.0)) return false;
      if (i != j && !(m(i, j) < 0.0)) return false;
    }
    if (!(m.col(j).sum() > 0.0)) return false;
  }
  return true;
}

double alpha_star(std::span<const double> y) {
  if (y.empty()) throw InvalidInput("alpha* needs a nonempty vector");
  Vector sorted(y.begin(), y.end());
  std::stable_sort(sorted.begin(), sorted.end(), std::greater<>());
  // The active set is a prefix of the sorted values; the largest k whose
  // candidate level lies below y_(k) is the right one.
  double prefix = 0.0;
  double level = sorted[0] - 1.0;
  for (std::size_t k = 0; k < sorted.size(); ++k) {
    prefix += sorted[k];
    const double candidate = (prefix - 1.0) / static_cast<double>(k + 1);
    if (sorted[k] > candidate) level = candidate;
  }
  return level;
}

SimplexProjection h_exact(std::span<const double> y) {
  SimplexProjection out;
  out.alpha_star = alpha_star(y);
  out.h_value.resize(y.size());
  out.residual.resize(y.size());
  for (std::size_t k = 0; k < y.size(); ++k) {
    out.h_value[k] = std::min(y[k], out.alpha_star);
    out.residual[k] = y[k] - out.h_value[k];
  }
  return out;
}

Vector h_numeric(double n, std::span<const double> y, double tol, int max_iter) {
  check_args(n, y);
  if (!(tol > 0.0)) throw InvalidInput("h_numeric needs tol > 0");
  const std::size_t d = y.size();

  Vector x;
  if (n >= 1.0) {
    x = h_exact(y).h_value;
  } else {
    x.assign(y.begin(), y.end());
    for (double& xi : x) xi -= 1.0 / static_cast<double>(d);
  }

  // g_n is the gradient of the 1-strongly convex potential
  // |x|^2 / 2 + logsumexp(n x) / n, so J is SPD and damped Newton on the
  // residual norm converges from any start.
  auto residual_of = [&](const Vector& at) {
    Vector r = g_map(n, at);
    for (std::size_t k = 0; k < d; ++k) r[k] = y[k] - r[k];
    return r;
  };
  auto sup_norm = [](const Vector& r) {
    double m = 0.0;
    for (double v : r) m = std::max(m, std::abs(v));
    return m;
  };

  Vector r = residual_of(x);
  double r_norm = sup_norm(r);
  for (int iter = 0; iter < max_iter; ++iter) {
    if (r_norm <= tol) return x;
    const Eigen::MatrixXd jac = g_jacobian(n, x);
    const Eigen::VectorXd step =
        jac.ldlt().solve(Eigen::Map<const Eigen::VectorXd>(r.data(), static_cast<Eigen::Index>(d)));

    double t = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 60; ++halving, t *= 0.5) {
      Vector trial(d);
      for (std::size_t k = 0; k < d; ++k) trial[k] = x[k] + t * step[static_cast<Eigen::Index>(k)];
      Vector trial_r = residual_of(trial);
      const double trial_norm = sup_norm(trial_r);
      if (trial_norm <= (1.0 - 1e-4 * t) * r_norm || trial_norm <= tol) {
        x = std::move(trial);
        r = std::move(trial_r);
        r_norm = trial_norm;
        accepted = true;
        break;
      }
    }
    // No decrease even for tiny steps: rounding floor reached.
    if (!accepted) break;
  }
  if (r_norm <= tol) return x;
  throw ConvergenceFailure("h_numeric did not reach tolerance (residual " +
                               format_number(r_norm) + ")",
                           x, r_norm);
}

ConvergenceBound epsilon_bound(double n) {
  if (!(n >= 0.0) || !std::isfinite(n)) throw InvalidInput("epsilon_bound needs n >= 0");
  // eps (1 + exp(eps n)) - 1 is strictly increasing, -1 at 0 and positive at 1.
  auto excess = [n](double eps) { return eps * (1.0 + std::exp(eps * n)) - 1.0; };
  double lo = 0.0;
  double hi = 1.0;
  for (;;) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double f = excess(mid);
    if (f == 0.0) {
      lo = hi = mid;
      break;
    }
    (f < 0.0 ? lo : hi) = mid;
  }
  const double eps = std::abs(excess(lo)) <= std::abs(excess(hi)) ? lo : hi;
  return ConvergenceBound{n, eps};
}

}  // namespace logitgraph
