#pragma once

// Logit equilibria of a fixed game: x_i = softmax(n * u_i(., x_{-i})).
//
// Three solvers: damped fixed-point iteration, Newton on x - response(x),
// and continuation in n from the uniform profile (the n -> 0 solution).
// The tracer follows the principal branch; where that branch folds back in
// n it switches to pseudo-arclength steps until n increases again.

#include <cstddef>
#include <vector>

#include "logitgraph/error.hpp"
#include "logitgraph/game.hpp"

namespace logitgraph {

/// Per player softmax(n * w_i) with w_i the deviation payoffs at x. n = 0
/// gives the uniform profile.
MixedProfile logit_response(double n, const Game& game, const MixedProfile& x);

/// x <- (1 - damping) x + damping * response(x) until logit_gap <= tol.
/// Throws ConvergenceFailure with the best iterate after max_iter steps.
MixedProfile solve_fixed_point(double n, const Game& game, const MixedProfile& x0,
                               double damping = 0.5, double tol = 1e-12,
                               int max_iter = 10000);

enum class JacobianMode { finite_difference, analytic };

struct NewtonOptions {
  int max_iter = 60;
  JacobianMode jacobian = JacobianMode::finite_difference;
  double fd_step = 1e-7;
  double damping = 0.5;  // for fixed-point fallback steps
};

/// Damped Newton on F(x) = x - logit_response(n, x). Falls back to damped
/// fixed-point steps when a Newton step does not reduce the residual.
MixedProfile solve_newton(double n, const Game& game, const MixedProfile& x0, double tol,
                          const NewtonOptions& options = {});

/// d response / d x at x over the flattened profile coordinates.
std::vector<std::vector<double>> response_jacobian(double n, const Game& game,
                                                   const MixedProfile& x);

struct PathEntry {
  double n = 0.0;
  MixedProfile x;
  double residual = 0.0;
};

struct PathTrace {
  Game game;
  std::vector<PathEntry> entries;
  double terminal_nash_residual = 0.0;
  /// Indices of entries reached by crossing a fold of the branch; the
  /// profile step into these entries is not bounded by max_profile_step.
  std::vector<std::size_t> fold_exits;
};

struct TraceOptions {
  double initial_factor = 1.5;  // first multiplicative step in n
  double shrink = 0.5;          // log-step multiplier after a failed step
  double grow = 1.2;            // log-step multiplier after a fast step
  double max_factor = 4.0;
  double max_profile_step = 0.1;  // sup-norm bound on x between entries
  double min_relative_step = 1e-12;
  double fold_switch_step = 1e-6;  // log-step below which arclength takes over
  // Corrector distance from the tangent prediction, relative to the
  // predicted move; larger values let steps jump between nearby branches.
  double predictor_ratio = 0.5;
  int fast_iterations = 3;
  int max_steps = 100000;
  NewtonOptions newton;
};

inline constexpr double kDefaultStartN = 1e-3;

class PathFailure : public Error {
 public:
  PathFailure(const std::string& what, PathTrace partial)
      : Error(what), partial_(std::move(partial)) {}

  const PathTrace& partial() const noexcept { return partial_; }

 private:
  PathTrace partial_;
};

/// Continuation from n_start to n_final. Every entry satisfies
/// logit_gap <= tol and entries have strictly increasing n.
PathTrace trace_logit_path(const Game& game, double n_final, double n_start, double tol,
                           const TraceOptions& options = {});

struct NashApproximation {
  MixedProfile profile;  // completely mixed, like every logit equilibrium
  double nash_residual = 0.0;
};

/// Terminal point of the traced branch at n_final.
NashApproximation approximate_nash(const Game& game, double n_final, double tol,
                                   const TraceOptions& options = {});

}  // namespace logitgraph
