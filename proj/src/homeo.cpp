#include "logitgraph/homeo.hpp"

#include <cmath>
#include <string>

#include "logitgraph/error.hpp"
#include "logitgraph/km_maps.hpp"
#include "logitgraph/softmax.hpp"

namespace logitgraph {

std::vector<Vector> z_nash(const Game& game, const MixedProfile& x) {
  check_profile_shape(game.form(), x);
  std::vector<Vector> z;
  for (std::size_t i = 0; i < game.form().num_players(); ++i) {
    Vector zi = deviation_payoffs(game, i, x);
    for (std::size_t a = 0; a < zi.size(); ++a) zi[a] += x[i][a];
    z.push_back(std::move(zi));
  }
  return z;
}

std::vector<Vector> z_logit(double n, const Game& game, const MixedProfile& x) {
  if (!(n > 0.0)) throw InvalidInput("z_n needs n > 0");
  check_profile_shape(game.form(), x);
  std::vector<Vector> z;
  for (std::size_t i = 0; i < game.form().num_players(); ++i)
    z.push_back(g_map(n, deviation_payoffs(game, i, x)));
  return z;
}

void validate_target(const TargetPoint& t) {
  const StrategicGameForm form = t.form();
  check_tensor_shape(form, t.tilde_u, "tilde_u");
  for (std::size_t i = 0; i < t.y_bar.size(); ++i)
    for (double v : t.y_bar[i])
      if (!std::isfinite(v)) throw InvalidInput("y_bar[" + std::to_string(i) + "] has a non-finite entry");
  for (const auto& tensor : t.tilde_u)
    for (double v : tensor)
      if (!std::isfinite(v)) throw InvalidInput("tilde_u has a non-finite entry");
  if (const double m = max_opponent_mean(form, t.tilde_u); m > 1e-6)
    throw InvalidInput("tilde_u violates the zero-mean invariant (max mean " + format_number(m) + ")");
}

namespace {

// Given per-player targets w_i for the deviation payoffs at x, choose ū so
// that u_i(a_i, x_{-i}) = w_i(a_i).
Game reconstruct_game(const StrategicGameForm& form, const std::vector<Vector>& tilde_u,
                      const std::vector<Vector>& w, const MixedProfile& x) {
  KMRepresentation rep{tilde_u, {}};
  for (std::size_t i = 0; i < form.num_players(); ++i) {
    Vector bar = w[i];
    const Vector tilde_part = contract_opponents(form, tilde_u[i], i, x);
    for (std::size_t a = 0; a < bar.size(); ++a) bar[a] -= tilde_part[a];
    rep.bar_u.push_back(std::move(bar));
  }
  return km_recompose(rep);
}

void require_kind(const GraphPoint& point, GraphKind kind, const char* map) {
  if (point.kind != kind)
    throw InvalidInput(std::string(map) + " expects a " +
                       (kind == GraphKind::nash ? "nash" : "logit") + " graph point");
}

}  // namespace

TargetPoint phi(const GraphPoint& point) {
  require_kind(point, GraphKind::nash, "phi");
  validate_profile(point.game.form(), point.profile);
  const double r = nash_residual(point.game, point.profile);
  if (r > kGraphAdmissionTolerance)
    throw NotOnGraph("phi: profile is not a Nash equilibrium (residual " + format_number(r) + ")", r);
  return TargetPoint{km_decompose(point.game).tilde_u, z_nash(point.game, point.profile)};
}

GraphPoint phi_inv(const TargetPoint& t) {
  validate_target(t);
  const StrategicGameForm form = t.form();
  MixedProfile x;
  std::vector<Vector> w;
  for (const auto& y : t.y_bar) {
    SimplexProjection p = h_exact(y);
    x.strategies.push_back(std::move(p.residual));
    w.push_back(std::move(p.h_value));
  }
  Game game = reconstruct_game(form, t.tilde_u, w, x);
  const double r = nash_residual(game, x);
  return GraphPoint{std::move(game), std::move(x), GraphKind::nash, std::nullopt, r};
}

TargetPoint phi_n(double n, const GraphPoint& point) {
  require_kind(point, GraphKind::logit, "phi_n");
  if (point.n && *point.n != n)
    throw InvalidInput("phi_n: graph point was built for n = " + format_number(*point.n));
  validate_profile(point.game.form(), point.profile);
  const double r = logit_residual(point.game, point.profile, n);
  if (r > kGraphAdmissionTolerance)
    throw NotOnGraph("phi_n: profile is not a logit equilibrium (residual " + format_number(r) + ")", r);
  return TargetPoint{km_decompose(point.game).tilde_u, z_logit(n, point.game, point.profile)};
}

GraphPoint phi_n_inv(double n, const TargetPoint& t, double tol) {
  if (!(n > 0.0)) throw InvalidInput("phi_n_inv needs n > 0");
  validate_target(t);
  const StrategicGameForm form = t.form();
  MixedProfile x;
  std::vector<Vector> w;
  for (const auto& y : t.y_bar) {
    Vector wi = h_numeric(n, y, tol);
    // x_i = y_i - w_i up to the solve tolerance; the softmax form keeps
    // every entry strictly positive where the subtraction would cancel.
    x.strategies.push_back(softmax(n, wi));
    w.push_back(std::move(wi));
  }
  Game game = reconstruct_game(form, t.tilde_u, w, x);
  const double r = logit_gap(game, x, n);
  return GraphPoint{std::move(game), std::move(x), GraphKind::logit, n, r};
}

GraphGap graph_gap(const GraphPoint& a, const GraphPoint& b) {
  if (!(a.game.form() == b.game.form())) throw InvalidInput("graph_gap: forms differ");
  GraphGap gap;
  double squares = 0.0;
  for (std::size_t i = 0; i < a.game.form().num_players(); ++i) {
    for (std::size_t k = 0; k < a.game.payoffs(i).size(); ++k) {
      const double d = a.game.payoffs(i)[k] - b.game.payoffs(i)[k];
      squares += d * d;
    }
    for (std::size_t k = 0; k < a.profile[i].size(); ++k) {
      const double d = a.profile[i][k] - b.profile[i][k];
      squares += d * d;
      gap.profile_sup = std::max(gap.profile_sup, std::abs(d));
    }
  }
  gap.full_euclidean = std::sqrt(squares);
  return gap;
}

double approximation_gap(double n, const TargetPoint& t, double tol) {
  return graph_gap(phi_inv(t), phi_n_inv(n, t, tol)).full_euclidean;
}

}  // namespace logitgraph
