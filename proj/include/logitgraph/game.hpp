#pragma once

// Finite normal-form games, mixed profiles, equilibrium residuals and the
// Kohlberg-Mertens payoff decomposition.
//
// Payoff tensors are stored flat with player 1's action varying fastest:
//   index(a) = a_1 + |A_1| * (a_2 + |A_2| * (a_3 + ...))

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace logitgraph {

using Vector = std::vector<double>;

/// Players and per-player action counts, the pair (I, A).
class StrategicGameForm {
 public:
  /// Throws InvalidInput if there are no players or some player has no action.
  explicit StrategicGameForm(std::vector<std::size_t> action_counts);

  std::size_t num_players() const noexcept { return counts_.size(); }
  std::size_t num_actions(std::size_t player) const { return counts_.at(player); }
  const std::vector<std::size_t>& action_counts() const noexcept { return counts_; }

  /// |A|, the number of pure profiles.
  std::size_t profile_count() const noexcept { return profiles_; }
  /// |A_{-i}|; 1 for a one-player game.
  std::size_t opponent_profile_count(std::size_t player) const {
    return profiles_ / counts_.at(player);
  }
  /// Sum of |A_i|, the length of a flattened mixed profile.
  std::size_t total_actions() const noexcept;
  /// Largest |A_i|.
  std::size_t max_actions() const noexcept;

  std::size_t stride(std::size_t player) const { return strides_.at(player); }
  std::size_t action_of(std::size_t profile_index, std::size_t player) const {
    return (profile_index / strides_[player]) % counts_[player];
  }
  std::size_t index(std::span<const std::size_t> actions) const;

  friend bool operator==(const StrategicGameForm&, const StrategicGameForm&) = default;

 private:
  std::vector<std::size_t> counts_;
  std::vector<std::size_t> strides_;
  std::size_t profiles_ = 1;
};

/// A strategic game form with one finite payoff tensor per player.
class Game {
 public:
  Game(StrategicGameForm form, std::vector<Vector> payoffs);

  const StrategicGameForm& form() const noexcept { return form_; }
  const std::vector<Vector>& payoffs() const noexcept { return payoffs_; }
  const Vector& payoffs(std::size_t player) const { return payoffs_.at(player); }

 private:
  StrategicGameForm form_;
  std::vector<Vector> payoffs_;
};

/// One probability vector per player.
struct MixedProfile {
  std::vector<Vector> strategies;

  const Vector& operator[](std::size_t player) const { return strategies[player]; }
  Vector& operator[](std::size_t player) { return strategies[player]; }
  std::size_t num_players() const noexcept { return strategies.size(); }
};

inline constexpr double kProbabilityTolerance = 1e-9;

MixedProfile uniform_profile(const StrategicGameForm& form);
MixedProfile pure_profile(const StrategicGameForm& form, std::span<const std::size_t> actions);

/// Throws InvalidInput unless `x` matches the form's shape.
void check_profile_shape(const StrategicGameForm& form, const MixedProfile& x);
/// Shape check plus nonnegativity and unit sums within `tol`.
void validate_profile(const StrategicGameForm& form, const MixedProfile& x,
                      double tol = kProbabilityTolerance);
bool is_valid_profile(const StrategicGameForm& form, const MixedProfile& x,
                      double tol = kProbabilityTolerance);

Vector flatten(const MixedProfile& x);
MixedProfile unflatten(const StrategicGameForm& form, std::span<const double> flat);

/// Multilinear extension u_i(x).
double evaluate_mixed(const Game& game, std::size_t player, const MixedProfile& x);

/// u_i(a_i, x_{-i}); ignores x_i.
double deviation_payoff(const Game& game, std::size_t player, std::size_t action,
                        const MixedProfile& x);

/// The vector (u_i(a_i, x_{-i}))_{a_i}.
Vector deviation_payoffs(const Game& game, std::size_t player, const MixedProfile& x);

/// Same contraction for an arbitrary tensor of length |A| (e.g. a ũ_i).
Vector contract_opponents(const StrategicGameForm& form, std::span<const double> tensor,
                          std::size_t player, const MixedProfile& x);

/// max over (i, a_i) of the gain from deviating to a_i, clipped at 0.
double nash_residual(const Game& game, const MixedProfile& x);

/// Sup-norm gap between x and the logit response at parameter n. Requires
/// n > 0 and a strictly positive profile.
double logit_residual(const Game& game, const MixedProfile& x, double n);

/// logit_residual without the interior check. Solvers use this on iterates
/// whose tiny probabilities have underflowed to 0.
double logit_gap(const Game& game, const MixedProfile& x, double n);

/// u = <ũ, ū>: ū_i(a_i) is the opponent average of u_i(a_i, .) and
/// ũ_i = u_i - ū_i has zero opponent averages.
struct KMRepresentation {
  std::vector<Vector> tilde_u;
  std::vector<Vector> bar_u;

  /// The form implied by the bar_u lengths.
  StrategicGameForm form() const;
};

/// A point <ũ, ȳ> of payoff space, the codomain of the graph maps.
struct TargetPoint {
  std::vector<Vector> tilde_u;
  std::vector<Vector> y_bar;

  StrategicGameForm form() const;
};

KMRepresentation km_decompose(const Game& game);

/// Inverse of km_decompose. Throws InvalidInput if tilde_u has the wrong
/// shape or an opponent mean exceeds 1e-6 in magnitude.
Game km_recompose(const KMRepresentation& rep);

/// Largest |mean over a_{-i} of tilde_u_i(a_i, a_{-i})|.
double max_opponent_mean(const StrategicGameForm& form, const std::vector<Vector>& tilde_u);

/// Subtracts the opponent means so that max_opponent_mean is 0.
std::vector<Vector> project_zero_mean(const StrategicGameForm& form,
                                      std::vector<Vector> tilde_u);

/// Throws InvalidInput unless tilde_u has one length-|A| tensor per player.
void check_tensor_shape(const StrategicGameForm& form, const std::vector<Vector>& tensors,
                        const char* name);

enum class GraphKind { nash, logit };

/// A (game, profile) pair claimed to lie on M (nash) or M_n (logit).
struct GraphPoint {
  Game game;
  MixedProfile profile;
  GraphKind kind = GraphKind::nash;
  std::optional<double> n;
  double residual = 0.0;
};

}  // namespace logitgraph
