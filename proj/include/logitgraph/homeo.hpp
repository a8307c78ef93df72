#pragma once

// Maps between the equilibrium graphs and payoff space.
//
//   phi(u, x)    = <ũ, z(u, x)>,    z_i(a_i)   = u_i(a_i, x_{-i}) + x_i(a_i)
//   phi_n(u, x)  = <ũ, z_n(u, x)>,  z_n,i      = g_n(u_i(., x_{-i}))
//
// Both inverses work player by player: ȳ_i determines x_i (through h or
// h_n), after which ū is chosen so that the deviation payoffs come out
// right.

#include <vector>

#include "logitgraph/game.hpp"

namespace logitgraph {

/// Graph-membership threshold applied to inputs of phi and phi_n.
inline constexpr double kGraphAdmissionTolerance = 1e-8;

/// z(u, x), one vector per player.
std::vector<Vector> z_nash(const Game& game, const MixedProfile& x);

/// z_n(u, x). The softmax normalizes over the player's own actions, so on
/// M_n the added term is x_i(a_i) and z_n agrees with z.
std::vector<Vector> z_logit(double n, const Game& game, const MixedProfile& x);

/// Throws InvalidInput on a shape mismatch or opponent means above 1e-6.
void validate_target(const TargetPoint& t);

/// Throws NotOnGraph if the point is not a Nash equilibrium within 1e-8.
TargetPoint phi(const GraphPoint& point);

/// Total; the result has nash_residual <= 1e-9.
GraphPoint phi_inv(const TargetPoint& t);

/// Throws NotOnGraph if logit_residual exceeds 1e-8.
TargetPoint phi_n(double n, const GraphPoint& point);

/// Propagates ConvergenceFailure from h_numeric. The returned profile is
/// completely mixed.
GraphPoint phi_n_inv(double n, const TargetPoint& t, double tol);

struct GraphGap {
  double profile_sup = 0.0;     // sup-norm over probability entries
  double full_euclidean = 0.0;  // 2-norm over payoff and probability entries
};

/// Distances between two points over the same form.
GraphGap graph_gap(const GraphPoint& a, const GraphPoint& b);

/// |phi^{-1}(t) - phi_n^{-1}(t)|_2.
double approximation_gap(double n, const TargetPoint& t, double tol);

}  // namespace logitgraph
