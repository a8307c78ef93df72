#pragma once

// Shared test games, seeded generators and brute-force oracles. The oracles
// enumerate pure profiles directly and do not call into the library's
// contraction code.

#include <cmath>
#include <random>
#include <vector>

#include "logitgraph/game.hpp"

namespace fixtures {

using logitgraph::Game;
using logitgraph::MixedProfile;
using logitgraph::StrategicGameForm;
using logitgraph::Vector;

inline Game matching_pennies() {
  return Game(StrategicGameForm({2, 2}), {{1, -1, -1, 1}, {-1, 1, 1, -1}});
}

inline Game one_player(Vector u) {
  const std::size_t m = u.size();
  return Game(StrategicGameForm({m}), {std::move(u)});
}

// u_1 = [[1,0],[0,0]] indexed (a_1, a_2); u_2 = 0.
inline Game corner_game() { return Game(StrategicGameForm({2, 2}), {{1, 0, 0, 0}, {0, 0, 0, 0}}); }

// u_1 = u_2 = 1 on (0,0) and (1,1), 0 elsewhere.
inline Game coordination_game() {
  return Game(StrategicGameForm({2, 2}), {{1, 0, 0, 1}, {1, 0, 0, 1}});
}

inline Game random_game(const StrategicGameForm& form, std::mt19937_64& rng, double box = 1.0) {
  std::uniform_real_distribution<double> unif(-box, box);
  std::vector<Vector> payoffs(form.num_players(), Vector(form.profile_count()));
  for (auto& t : payoffs)
    for (double& v : t) v = unif(rng);
  return Game(form, std::move(payoffs));
}

inline MixedProfile random_interior_profile(const StrategicGameForm& form, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unif(0.05, 1.0);
  MixedProfile x;
  for (std::size_t m : form.action_counts()) {
    Vector xi(m);
    double total = 0.0;
    for (double& p : xi) total += (p = unif(rng));
    for (double& p : xi) p /= total;
    x.strategies.push_back(std::move(xi));
  }
  return x;
}

inline StrategicGameForm random_form(std::mt19937_64& rng, std::size_t max_players = 3,
                                     std::size_t max_actions = 4) {
  std::uniform_int_distribution<std::size_t> players(1, max_players);
  std::uniform_int_distribution<std::size_t> actions(1, max_actions);
  std::vector<std::size_t> counts(players(rng));
  for (auto& c : counts) c = actions(rng);
  return StrategicGameForm(counts);
}

// Decodes a flat index with player 1 fastest, independently of the library.
inline std::vector<std::size_t> decode(const std::vector<std::size_t>& counts, std::size_t idx) {
  std::vector<std::size_t> a(counts.size());
  for (std::size_t i = 0; i < counts.size(); ++i) {
    a[i] = idx % counts[i];
    idx /= counts[i];
  }
  return a;
}

inline double brute_expected(const Game& g, std::size_t player, const MixedProfile& x) {
  const auto& counts = g.form().action_counts();
  std::size_t total = 1;
  for (auto c : counts) total *= c;
  double sum = 0.0;
  for (std::size_t idx = 0; idx < total; ++idx) {
    const auto a = decode(counts, idx);
    double w = 1.0;
    for (std::size_t j = 0; j < counts.size(); ++j) w *= x[j][a[j]];
    sum += g.payoffs(player)[idx] * w;
  }
  return sum;
}

inline double brute_deviation(const Game& g, std::size_t player, std::size_t action,
                              const MixedProfile& x) {
  MixedProfile y = x;
  std::fill(y[player].begin(), y[player].end(), 0.0);
  y[player][action] = 1.0;
  return brute_expected(g, player, y);
}

inline double sup_diff(const Vector& a, const Vector& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

}  // namespace fixtures

namespace fixtures {

inline logitgraph::TargetPoint random_target(const StrategicGameForm& form, std::mt19937_64& rng,
                                             double box = 10.0) {
  std::uniform_real_distribution<double> unif(-box, box);
  logitgraph::TargetPoint t;
  t.tilde_u.assign(form.num_players(), Vector(form.profile_count()));
  for (auto& tensor : t.tilde_u)
    for (double& v : tensor) v = unif(rng);
  t.tilde_u = logitgraph::project_zero_mean(form, t.tilde_u);
  for (std::size_t m : form.action_counts()) {
    Vector y(m);
    for (double& v : y) v = unif(rng);
    t.y_bar.push_back(std::move(y));
  }
  return t;
}

inline double target_distance(const logitgraph::TargetPoint& a, const logitgraph::TargetPoint& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.tilde_u.size(); ++i) {
    d = std::max(d, sup_diff(a.tilde_u[i], b.tilde_u[i]));
    d = std::max(d, sup_diff(a.y_bar[i], b.y_bar[i]));
  }
  return d;
}

}  // namespace fixtures
