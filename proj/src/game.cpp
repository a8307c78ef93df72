#include "logitgraph/game.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "logitgraph/error.hpp"
#include "logitgraph/softmax.hpp"

namespace logitgraph {

StrategicGameForm::StrategicGameForm(std::vector<std::size_t> action_counts)
    : counts_(std::move(action_counts)) {
  if (counts_.empty()) throw InvalidInput("a game form needs at least one player");
  strides_.resize(counts_.size());
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    if (counts_[i] == 0)
      throw InvalidInput("player " + std::to_string(i) + " has no actions");
    strides_[i] = profiles_;
    profiles_ *= counts_[i];
  }
}

std::size_t StrategicGameForm::total_actions() const noexcept {
  return std::accumulate(counts_.begin(), counts_.end(), std::size_t{0});
}

std::size_t StrategicGameForm::max_actions() const noexcept {
  return *std::max_element(counts_.begin(), counts_.end());
}

std::size_t StrategicGameForm::index(std::span<const std::size_t> actions) const {
  if (actions.size() != counts_.size())
    throw InvalidInput("pure profile has " + std::to_string(actions.size()) +
                       " entries, expected " + std::to_string(counts_.size()));
  std::size_t idx = 0;
  for (std::size_t i = 0; i < counts_.size(); ++i) {
    if (actions[i] >= counts_[i])
      throw InvalidInput("action " + std::to_string(actions[i]) + " out of range for player " +
                         std::to_string(i));
    idx += actions[i] * strides_[i];
  }
  return idx;
}

void check_tensor_shape(const StrategicGameForm& form, const std::vector<Vector>& tensors,
                        const char* name) {
  if (tensors.size() != form.num_players())
    throw InvalidInput(std::string(name) + " has " + std::to_string(tensors.size()) +
                       " tensors, expected " + std::to_string(form.num_players()));
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    if (tensors[i].size() != form.profile_count())
      throw InvalidInput(std::string(name) + "[" + std::to_string(i) + "] length " +
                         std::to_string(tensors[i].size()) + " != " +
                         std::to_string(form.profile_count()));
  }
}

Game::Game(StrategicGameForm form, std::vector<Vector> payoffs)
    : form_(std::move(form)), payoffs_(std::move(payoffs)) {
  check_tensor_shape(form_, payoffs_, "payoffs");
  for (std::size_t i = 0; i < payoffs_.size(); ++i)
    for (double v : payoffs_[i])
      if (!std::isfinite(v))
        throw InvalidInput("payoffs[" + std::to_string(i) + "] has a non-finite entry");
}

MixedProfile uniform_profile(const StrategicGameForm& form) {
  MixedProfile x;
  for (std::size_t m : form.action_counts())
    x.strategies.emplace_back(m, 1.0 / static_cast<double>(m));
  return x;
}

MixedProfile pure_profile(const StrategicGameForm& form, std::span<const std::size_t> actions) {
  (void)form.index(actions);  // range check
  MixedProfile x;
  for (std::size_t i = 0; i < actions.size(); ++i) {
    x.strategies.emplace_back(form.num_actions(i), 0.0);
    x.strategies.back()[actions[i]] = 1.0;
  }
  return x;
}

void check_profile_shape(const StrategicGameForm& form, const MixedProfile& x) {
  if (x.num_players() != form.num_players())
    throw InvalidInput("profile has " + std::to_string(x.num_players()) +
                       " players, expected " + std::to_string(form.num_players()));
  for (std::size_t i = 0; i < x.num_players(); ++i)
    if (x[i].size() != form.num_actions(i))
      throw InvalidInput("profile[" + std::to_string(i) + "] has " +
                         std::to_string(x[i].size()) + " entries, expected " +
                         std::to_string(form.num_actions(i)));
}

void validate_profile(const StrategicGameForm& form, const MixedProfile& x, double tol) {
  check_profile_shape(form, x);
  for (std::size_t i = 0; i < x.num_players(); ++i) {
    double total = 0.0;
    for (double p : x[i]) {
      if (!std::isfinite(p) || p < -tol)
        throw InvalidInput("profile[" + std::to_string(i) + "] has a negative or non-finite entry");
      total += p;
    }
    if (std::abs(total - 1.0) > tol)
      throw InvalidInput("profile[" + std::to_string(i) + "] sums to " + format_number(total));
  }
}

bool is_valid_profile(const StrategicGameForm& form, const MixedProfile& x, double tol) {
  try {
    validate_profile(form, x, tol);
    return true;
  } catch (const InvalidInput&) {
    return false;
  }
}

Vector flatten(const MixedProfile& x) {
  Vector flat;
  for (const auto& xi : x.strategies) flat.insert(flat.end(), xi.begin(), xi.end());
  return flat;
}

MixedProfile unflatten(const StrategicGameForm& form, std::span<const double> flat) {
  if (flat.size() != form.total_actions())
    throw InvalidInput("flattened profile has wrong length");
  MixedProfile x;
  std::size_t offset = 0;
  for (std::size_t m : form.action_counts()) {
    x.strategies.emplace_back(flat.begin() + offset, flat.begin() + offset + m);
    offset += m;
  }
  return x;
}

Vector contract_opponents(const StrategicGameForm& form, std::span<const double> tensor,
                          std::size_t player, const MixedProfile& x) {
  if (player >= form.num_players()) throw InvalidInput("player index out of range");
  if (tensor.size() != form.profile_count()) throw InvalidInput("tensor length mismatch");
  check_profile_shape(form, x);

  const std::size_t d = form.num_players();
  Vector out(form.num_actions(player), 0.0);
  std::vector<std::size_t> a(d, 0);
  for (std::size_t idx = 0; idx < form.profile_count(); ++idx) {
    double weight = 1.0;
    for (std::size_t j = 0; j < d; ++j)
      if (j != player) weight *= x[j][a[j]];
    out[a[player]] += tensor[idx] * weight;
    for (std::size_t j = 0; j < d; ++j) {
      if (++a[j] < form.num_actions(j)) break;
      a[j] = 0;
    }
  }
  return out;
}

Vector deviation_payoffs(const Game& game, std::size_t player, const MixedProfile& x) {
  if (player >= game.form().num_players()) throw InvalidInput("player index out of range");
  return contract_opponents(game.form(), game.payoffs(player), player, x);
}

double deviation_payoff(const Game& game, std::size_t player, std::size_t action,
                        const MixedProfile& x) {
  const Vector w = deviation_payoffs(game, player, x);
  if (action >= w.size()) throw InvalidInput("action index out of range");
  return w[action];
}

double evaluate_mixed(const Game& game, std::size_t player, const MixedProfile& x) {
  const Vector w = deviation_payoffs(game, player, x);
  double value = 0.0;
  for (std::size_t a = 0; a < w.size(); ++a) value += x[player][a] * w[a];
  return value;
}

double nash_residual(const Game& game, const MixedProfile& x) {
  // The gain of a_i over x_i is written as sum_b x_i(b) (w(a_i) - w(b)),
  // which equals u_i(a_i, x_{-i}) - u_i(x) on the simplex and keeps its
  // relative accuracy when x_i is within 1e-16 of a pure strategy.
  double worst = 0.0;
  for (std::size_t i = 0; i < game.form().num_players(); ++i) {
    const Vector w = deviation_payoffs(game, i, x);
    for (std::size_t a = 0; a < w.size(); ++a) {
      double gain = 0.0;
      for (std::size_t b = 0; b < w.size(); ++b) gain += x[i][b] * (w[a] - w[b]);
      worst = std::max(worst, gain);
    }
  }
  return worst;
}

double logit_gap(const Game& game, const MixedProfile& x, double n) {
  if (!(n >= 0.0) || !std::isfinite(n)) throw InvalidInput("logit parameter must be >= 0");
  double worst = 0.0;
  for (std::size_t i = 0; i < game.form().num_players(); ++i) {
    const Vector w = deviation_payoffs(game, i, x);
    const Vector s = softmax(n, w);
    for (std::size_t a = 0; a < w.size(); ++a) worst = std::max(worst, std::abs(x[i][a] - s[a]));
  }
  return worst;
}

double logit_residual(const Game& game, const MixedProfile& x, double n) {
  if (!(n > 0.0)) throw InvalidInput("logit parameter n must be positive");
  check_profile_shape(game.form(), x);
  for (const auto& xi : x.strategies)
    for (double p : xi)
      if (!(p > 0.0))
        throw InvalidInput("logit residual needs a completely mixed profile");
  return logit_gap(game, x, n);
}

namespace {

StrategicGameForm form_from_lengths(const std::vector<Vector>& per_player, const char* name) {
  std::vector<std::size_t> counts;
  for (const auto& v : per_player) counts.push_back(v.size());
  if (counts.empty()) throw InvalidInput(std::string(name) + " is empty");
  return StrategicGameForm(std::move(counts));
}

// Mean of tensor_i(a_i, .) over opponent profiles, per a_i.
Vector opponent_means(const StrategicGameForm& form, const Vector& tensor, std::size_t player) {
  Vector sums(form.num_actions(player), 0.0);
  for (std::size_t idx = 0; idx < form.profile_count(); ++idx)
    sums[form.action_of(idx, player)] += tensor[idx];
  const double count = static_cast<double>(form.opponent_profile_count(player));
  for (double& s : sums) s /= count;
  return sums;
}

}  // namespace

StrategicGameForm KMRepresentation::form() const { return form_from_lengths(bar_u, "bar_u"); }
StrategicGameForm TargetPoint::form() const { return form_from_lengths(y_bar, "y_bar"); }

KMRepresentation km_decompose(const Game& game) {
  const auto& form = game.form();
  KMRepresentation rep;
  for (std::size_t i = 0; i < form.num_players(); ++i) {
    Vector bar = opponent_means(form, game.payoffs(i), i);
    Vector tilde = game.payoffs(i);
    for (std::size_t idx = 0; idx < tilde.size(); ++idx) tilde[idx] -= bar[form.action_of(idx, i)];
    rep.tilde_u.push_back(std::move(tilde));
    rep.bar_u.push_back(std::move(bar));
  }
  return rep;
}

double max_opponent_mean(const StrategicGameForm& form, const std::vector<Vector>& tilde_u) {
  check_tensor_shape(form, tilde_u, "tilde_u");
  double worst = 0.0;
  for (std::size_t i = 0; i < form.num_players(); ++i)
    for (double m : opponent_means(form, tilde_u[i], i)) worst = std::max(worst, std::abs(m));
  return worst;
}

std::vector<Vector> project_zero_mean(const StrategicGameForm& form,
                                      std::vector<Vector> tilde_u) {
  check_tensor_shape(form, tilde_u, "tilde_u");
  for (std::size_t i = 0; i < form.num_players(); ++i) {
    const Vector means = opponent_means(form, tilde_u[i], i);
    for (std::size_t idx = 0; idx < tilde_u[i].size(); ++idx)
      tilde_u[i][idx] -= means[form.action_of(idx, i)];
  }
  return tilde_u;
}

Game km_recompose(const KMRepresentation& rep) {
  const StrategicGameForm form = rep.form();
  check_tensor_shape(form, rep.tilde_u, "tilde_u");
  if (const double m = max_opponent_mean(form, rep.tilde_u); m > 1e-6)
    throw InvalidInput("tilde_u violates the zero-mean invariant (max mean " +
                       format_number(m) + ")");
  std::vector<Vector> payoffs = rep.tilde_u;
  for (std::size_t i = 0; i < form.num_players(); ++i)
    for (std::size_t idx = 0; idx < payoffs[i].size(); ++idx)
      payoffs[i][idx] += rep.bar_u[i][form.action_of(idx, i)];
  return Game(form, std::move(payoffs));
}

}  // namespace logitgraph
