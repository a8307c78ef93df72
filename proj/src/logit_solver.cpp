#include "logitgraph/logit_solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <string>

#include "logitgraph/softmax.hpp"

namespace logitgraph {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;

double sup_norm(const VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

VectorXd to_eigen(const Vector& v) {
  return Eigen::Map<const VectorXd>(v.data(), static_cast<Index>(v.size()));
}

Vector to_std(const VectorXd& v) { return Vector(v.data(), v.data() + v.size()); }

// Works on flattened profiles; every iterate of every solver goes through here.
class ResponseMap {
 public:
  explicit ResponseMap(const Game& game) : game_(game), form_(game.form()) {}

  std::size_t dim() const { return form_.total_actions(); }

  VectorXd response(double n, const VectorXd& z) const {
    return to_eigen(flatten(logit_response(n, game_, unflatten(form_, to_std(z)))));
  }

  VectorXd residual(double n, const VectorXd& z) const { return z - response(n, z); }

  MatrixXd response_jacobian(double n, const VectorXd& z, const NewtonOptions& opt) const {
    if (opt.jacobian == JacobianMode::analytic) {
      const auto rows = logitgraph::response_jacobian(n, game_, unflatten(form_, to_std(z)));
      MatrixXd jac(static_cast<Index>(dim()), static_cast<Index>(dim()));
      for (Index r = 0; r < jac.rows(); ++r)
        for (Index c = 0; c < jac.cols(); ++c) jac(r, c) = rows[r][c];
      return jac;
    }
    const Index k = static_cast<Index>(dim());
    MatrixXd jac(k, k);
    for (Index c = 0; c < k; ++c) {
      VectorXd plus = z, minus = z;
      plus[c] += opt.fd_step;
      minus[c] -= opt.fd_step;
      jac.col(c) = (response(n, plus) - response(n, minus)) / (2.0 * opt.fd_step);
    }
    return jac;
  }

  // dR/dt at n = exp(t).
  VectorXd response_log_derivative(double n, const VectorXd& z, double h) const {
    return (response(n * std::exp(h), z) - response(n * std::exp(-h), z)) / (2.0 * h);
  }

  MixedProfile profile(const VectorXd& z) const { return unflatten(form_, to_std(z)); }

 private:
  const Game& game_;
  const StrategicGameForm& form_;
};

struct NewtonOutcome {
  VectorXd z;
  double gap = 0.0;
  int iterations = 0;
  bool converged = false;
};

// Newton on z - R(z) with backtracking; iterates are kept nonnegative.
NewtonOutcome newton_core(const ResponseMap& map, double n, VectorXd z, double tol,
                          const NewtonOptions& opt) {
  NewtonOutcome out;
  VectorXd r = map.residual(n, z);
  double gap = sup_norm(r);
  VectorXd best = z;
  double best_gap = gap;
  const Index k = z.size();

  int it = 0;
  for (; it < opt.max_iter && gap > tol; ++it) {
    const MatrixXd jac = MatrixXd::Identity(k, k) - map.response_jacobian(n, z, opt);
    const VectorXd step = jac.partialPivLu().solve(-r);

    bool accepted = false;
    if (step.allFinite()) {
      double t = 1.0;
      for (int halving = 0; halving < 30; ++halving, t *= 0.5) {
        const VectorXd trial = (z + t * step).cwiseMax(0.0);
        const VectorXd trial_r = map.residual(n, trial);
        const double trial_gap = sup_norm(trial_r);
        if (trial_gap <= (1.0 - 1e-4 * t) * gap) {
          z = trial;
          r = trial_r;
          gap = trial_gap;
          accepted = true;
          break;
        }
      }
    }
    if (!accepted) {
      z = (1.0 - opt.damping) * z + opt.damping * map.response(n, z);
      r = map.residual(n, z);
      gap = sup_norm(r);
    }
    if (gap < best_gap) {
      best = z;
      best_gap = gap;
    }
  }

  out.iterations = it;
  out.converged = best_gap <= tol;
  out.z = best;
  out.gap = best_gap;
  if (out.converged) {
    // A plain response step fixes the relative accuracy of probabilities far
    // below the absolute tolerance without leaving the tolerance ball.
    for (int k2 = 0; k2 < 3; ++k2) {
      const VectorXd polished = map.response(n, out.z);
      const double g = sup_norm(map.residual(n, polished));
      if (g > tol) break;
      out.z = polished;
      out.gap = g;
    }
  }
  return out;
}

void check_n(double n) {
  if (!(n > 0.0) || !std::isfinite(n)) throw InvalidInput("logit parameter n must be positive");
}

}  // namespace

MixedProfile logit_response(double n, const Game& game, const MixedProfile& x) {
  if (!(n >= 0.0) || !std::isfinite(n)) throw InvalidInput("logit_response needs n >= 0");
  check_profile_shape(game.form(), x);
  MixedProfile out;
  for (std::size_t i = 0; i < game.form().num_players(); ++i)
    out.strategies.push_back(softmax(n, deviation_payoffs(game, i, x)));
  return out;
}

std::vector<std::vector<double>> response_jacobian(double n, const Game& game,
                                                   const MixedProfile& x) {
  const auto& form = game.form();
  check_profile_shape(form, x);
  const std::size_t d = form.num_players();
  std::vector<std::size_t> offset(d, 0);
  for (std::size_t i = 1; i < d; ++i) offset[i] = offset[i - 1] + form.num_actions(i - 1);
  const std::size_t k = form.total_actions();

  // dw[i][j] is the |A_i| x |A_j| block of d u_i(a_i, x_{-i}) / d x_j(b).
  std::vector<std::vector<std::vector<Vector>>> dw(d, std::vector<std::vector<Vector>>(d));
  for (std::size_t i = 0; i < d; ++i)
    for (std::size_t j = 0; j < d; ++j)
      dw[i][j].assign(form.num_actions(i), Vector(form.num_actions(j), 0.0));
  std::vector<std::size_t> a(d, 0);
  for (std::size_t idx = 0; idx < form.profile_count(); ++idx) {
    for (std::size_t i = 0; i < d; ++i) {
      for (std::size_t j = 0; j < d; ++j) {
        if (j == i) continue;
        double weight = 1.0;
        for (std::size_t m = 0; m < d; ++m)
          if (m != i && m != j) weight *= x[m][a[m]];
        dw[i][j][a[i]][a[j]] += game.payoffs(i)[idx] * weight;
      }
    }
    for (std::size_t m = 0; m < d; ++m) {
      if (++a[m] < form.num_actions(m)) break;
      a[m] = 0;
    }
  }

  std::vector<std::vector<double>> jac(k, std::vector<double>(k, 0.0));
  for (std::size_t i = 0; i < d; ++i) {
    const Vector s = softmax(n, deviation_payoffs(game, i, x));
    for (std::size_t j = 0; j < d; ++j) {
      if (j == i) continue;
      for (std::size_t b = 0; b < form.num_actions(j); ++b) {
        double mean = 0.0;
        for (std::size_t c = 0; c < s.size(); ++c) mean += s[c] * dw[i][j][c][b];
        for (std::size_t ai = 0; ai < s.size(); ++ai)
          jac[offset[i] + ai][offset[j] + b] = n * s[ai] * (dw[i][j][ai][b] - mean);
      }
    }
  }
  return jac;
}

MixedProfile solve_fixed_point(double n, const Game& game, const MixedProfile& x0, double damping,
                               double tol, int max_iter) {
  check_n(n);
  if (!(damping > 0.0 && damping <= 1.0)) throw InvalidInput("damping must lie in (0, 1]");
  if (!(tol > 0.0)) throw InvalidInput("tol must be positive");
  validate_profile(game.form(), x0);

  MixedProfile x = x0;
  MixedProfile best = x;
  double gap = logit_gap(game, x, n);
  double best_gap = gap;
  for (int it = 0; it < max_iter && gap > tol; ++it) {
    const MixedProfile response = logit_response(n, game, x);
    for (std::size_t i = 0; i < x.num_players(); ++i)
      for (std::size_t a = 0; a < x[i].size(); ++a)
        x[i][a] = (1.0 - damping) * x[i][a] + damping * response[i][a];
    gap = logit_gap(game, x, n);
    if (gap < best_gap) {
      best = x;
      best_gap = gap;
    }
  }
  if (best_gap <= tol) return best;
  throw ConvergenceFailure("fixed-point iteration did not converge (residual " +
                               format_number(best_gap) + ")",
                           flatten(best), best_gap);
}

MixedProfile solve_newton(double n, const Game& game, const MixedProfile& x0, double tol,
                          const NewtonOptions& options) {
  check_n(n);
  if (!(tol > 0.0)) throw InvalidInput("tol must be positive");
  check_profile_shape(game.form(), x0);
  for (const auto& xi : x0.strategies)
    for (double p : xi)
      if (!(p >= 0.0)) throw InvalidInput("Newton start must be nonnegative");
  const ResponseMap map(game);
  const NewtonOutcome out = newton_core(map, n, to_eigen(flatten(x0)), tol, options);
  if (!out.converged)
    throw ConvergenceFailure("Newton iteration did not converge (residual " +
                                 format_number(out.gap) + ")",
                             to_std(out.z), out.gap);
  return map.profile(out.z);
}

namespace {

// Branch slope dz/dt (t = log n) and the sign of det(I - R_z); the sign
// flips exactly at simple folds, so a change between neighbouring entries
// means the corrector landed on a different branch.
struct BranchState {
  VectorXd slope;
  int sign = 1;
};

BranchState branch_state(const ResponseMap& map, double n, const VectorXd& z,
                         const NewtonOptions& opt) {
  const Index k = z.size();
  const MatrixXd jac = MatrixXd::Identity(k, k) - map.response_jacobian(n, z, opt);
  const Eigen::PartialPivLU<MatrixXd> lu(jac);
  return BranchState{lu.solve(map.response_log_derivative(n, z, opt.fd_step)),
                     lu.determinant() >= 0.0 ? 1 : -1};
}

// Pseudo-arclength continuation on H(z, t) = z - R(exp(t), z) in the
// combined coordinates (z, t), t = log n.
class ArclengthTracer {
 public:
  ArclengthTracer(const ResponseMap& map, double tol, const NewtonOptions& opt)
      : map_(map), tol_(tol), opt_(opt), k_(static_cast<Index>(map.dim())) {}

  VectorXd residual(const VectorXd& point) const {
    return map_.residual(std::exp(point[k_]), point.head(k_));
  }

  MatrixXd jacobian(const VectorXd& point) const {
    const double t = point[k_];
    const VectorXd z = point.head(k_);
    MatrixXd jac(k_, k_ + 1);
    jac.leftCols(k_) = MatrixXd::Identity(k_, k_) - map_.response_jacobian(std::exp(t), z, opt_);
    const double h = opt_.fd_step;
    jac.col(k_) = -(map_.response(std::exp(t + h), z) - map_.response(std::exp(t - h), z)) / (2 * h);
    return jac;
  }

  // Unit null vector of the Jacobian, oriented along `reference`.
  VectorXd tangent(const VectorXd& point, const VectorXd& reference) const {
    const MatrixXd jac = jacobian(point);
    Eigen::JacobiSVD<MatrixXd> svd(jac, Eigen::ComputeFullV);
    VectorXd tau = svd.matrixV().col(k_);
    if (tau.dot(reference) < 0.0) tau = -tau;
    return tau;
  }

  // Sign of det [J; tau^T]. It is constant along a branch traversed in one
  // direction, folds included, and flips when the corrector lands on a
  // neighbouring branch running the other way.
  int orientation(const VectorXd& point, const VectorXd& tau) const {
    MatrixXd aug(k_ + 1, k_ + 1);
    aug.topRows(k_) = jacobian(point);
    aug.row(k_) = tau.transpose();
    return aug.partialPivLu().determinant() >= 0.0 ? 1 : -1;
  }

  // Newton on [H(Z); tau . (Z - predicted)] = 0.
  bool correct(VectorXd& point, const VectorXd& tau, double h) const {
    const VectorXd predicted = point;
    for (int it = 0; it < 12; ++it) {
      const VectorXd r = residual(point);
      if (sup_norm(r) <= tol_) return (point - predicted).norm() <= h;
      MatrixXd aug(k_ + 1, k_ + 1);
      aug.topRows(k_) = jacobian(point);
      aug.row(k_) = tau.transpose();
      VectorXd rhs(k_ + 1);
      rhs.head(k_) = -r;
      rhs[k_] = -tau.dot(point - predicted);
      const VectorXd delta = aug.partialPivLu().solve(rhs);
      if (!delta.allFinite()) return false;
      point += delta;
    }
    return sup_norm(residual(point)) <= tol_ && (point - predicted).norm() <= h;
  }

 private:
  const ResponseMap& map_;
  double tol_;
  NewtonOptions opt_;
  Index k_;
};

}  // namespace

PathTrace trace_logit_path(const Game& game, double n_final, double n_start, double tol,
                           const TraceOptions& opt) {
  check_n(n_start);
  if (!(n_final > n_start) || !std::isfinite(n_final))
    throw InvalidInput("trace needs 0 < n_start < n_final");
  if (!(tol > 0.0)) throw InvalidInput("tol must be positive");

  const ResponseMap map(game);
  PathTrace trace{game, {}, 0.0, {}};
  auto record = [&](double n, const VectorXd& z, double gap) {
    trace.entries.push_back(PathEntry{n, map.profile(z), gap});
  };
  auto fail = [&](const std::string& why) {
    if (!trace.entries.empty())
      trace.terminal_nash_residual = nash_residual(game, trace.entries.back().x);
    throw PathFailure("trace_logit_path: " + why, trace);
  };

  const VectorXd uniform = to_eigen(flatten(uniform_profile(game.form())));
  NewtonOutcome start = newton_core(map, n_start, uniform, tol, opt.newton);
  if (!start.converged) fail("no logit equilibrium found at n_start");
  record(n_start, start.z, start.gap);

  const double max_log_step = std::log(opt.max_factor);
  double log_step = std::log(opt.initial_factor);
  double n = n_start;
  VectorXd z = start.z;
  int steps = 0;
  BranchState state = branch_state(map, n, z, opt.newton);

  while (n < n_final) {
    if (++steps > opt.max_steps) fail("step budget exhausted");

    if (log_step < opt.fold_switch_step) {
      // Natural continuation has stalled, typically at a fold where the
      // branch turns back in n. Follow it by arclength until n grows past
      // the stall point again.
      const ArclengthTracer arc(map, tol, opt.newton);
      const Index k = z.size();
      VectorXd point(k + 1);
      point << z, std::log(n);
      const double t_stall = std::log(n);
      const double t_final = std::log(n_final);
      VectorXd forward = VectorXd::Zero(k + 1);
      forward[k] = 1.0;
      VectorXd tau = arc.tangent(point, forward);
      const int sense = arc.orientation(point, tau);
      double h = 1e-2;
      bool exited = false;
      while (!exited) {
        if (++steps > opt.max_steps) fail("step budget exhausted while crossing a fold");
        VectorXd trial = point + h * tau;
        // Small corrections and nearly parallel tangents keep the corrector
        // from hopping onto a neighbouring branch.
        bool ok = arc.correct(trial, tau, 0.1 * h);
        VectorXd next_tau;
        if (ok) {
          next_tau = arc.tangent(trial, tau);
          ok = next_tau.dot(tau) >= 0.99 && arc.orientation(trial, next_tau) == sense;
        }
        if (ok) {
          point = trial;
          tau = next_tau;
          h = std::min(1.2 * h, 0.05);
          const double t = point[k];
          if (t < std::log(n_start)) fail("arclength continuation returned below n_start");
          if (tau[k] > 0.0 && t > t_stall + 1e-3) {
            const double n_exit = std::min(std::exp(t), n_final);
            const NewtonOutcome out = newton_core(map, n_exit, point.head(k), tol, opt.newton);
            if (out.converged && n_exit > n) {
              n = n_exit;
              z = out.z;
              state = branch_state(map, n, z, opt.newton);
              record(n, z, out.gap);
              trace.fold_exits.push_back(trace.entries.size() - 1);
              exited = true;
            } else if (t >= t_final) {
              fail("could not land on n_final after a fold");
            }
          }
        } else {
          h *= 0.5;
          if (h < opt.min_relative_step) fail("arclength step underflow");
        }
      }
      log_step = std::log(opt.initial_factor) * 0.1;
      continue;
    }

    const double n_next = std::min(n_final, n * std::exp(log_step));
    const VectorXd predicted = z + std::log(n_next / n) * state.slope;
    const NewtonOutcome out =
        newton_core(map, n_next, predicted.cwiseMax(0.0), tol, opt.newton);
    const double miss = sup_norm(out.z - predicted);
    bool ok = out.converged && sup_norm(out.z - z) <= opt.max_profile_step &&
              miss <= opt.predictor_ratio * sup_norm(predicted - z) + 1e3 * tol;
    BranchState next;
    if (ok) {
      next = branch_state(map, n_next, out.z, opt.newton);
      // An exact prediction means the same branch, as when a symmetric
      // branch passes a bifurcation point.
      ok = next.sign == state.sign || miss <= 1e3 * tol;
    }
    if (ok) {
      n = n_next;
      z = out.z;
      state = next;
      record(n, z, out.gap);
      if (out.iterations <= opt.fast_iterations)
        log_step = std::min(log_step * opt.grow, max_log_step);
    } else {
      log_step *= opt.shrink;
      if (log_step < opt.min_relative_step) fail("step size underflow");
    }
  }

  trace.terminal_nash_residual = nash_residual(game, trace.entries.back().x);
  return trace;
}

NashApproximation approximate_nash(const Game& game, double n_final, double tol,
                                   const TraceOptions& options) {
  check_n(n_final);
  const double n_start = std::min(kDefaultStartN, n_final / 10.0);
  PathTrace trace = trace_logit_path(game, n_final, n_start, tol, options);
  return NashApproximation{std::move(trace.entries.back().x), trace.terminal_nash_residual};
}

}  // namespace logitgraph
