#include "logitgraph/experiments.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>

#include "logitgraph/homeo.hpp"
#include "logitgraph/km_maps.hpp"
#include "logitgraph/logit_solver.hpp"

namespace logitgraph {

double uniform_draw(std::mt19937_64& rng, double lo, double hi) {
  const double unit = static_cast<double>(rng() >> 11) * 0x1.0p-53;
  return lo + (hi - lo) * unit;
}

TargetPoint sample_target(const StrategicGameForm& form, std::mt19937_64& rng, double box) {
  TargetPoint t;
  t.tilde_u.assign(form.num_players(), Vector(form.profile_count()));
  for (auto& tensor : t.tilde_u)
    for (double& v : tensor) v = uniform_draw(rng, -box, box);
  t.tilde_u = project_zero_mean(form, t.tilde_u);
  for (std::size_t m : form.action_counts()) {
    Vector y(m);
    for (double& v : y) v = uniform_draw(rng, -box, box);
    t.y_bar.push_back(std::move(y));
  }
  return t;
}

StudyFailure::StudyFailure(const ConvergenceFailure& cause, std::uint64_t seed, std::size_t sample,
                           double n)
    : ConvergenceFailure(std::string(cause.what()) + " (seed " + std::to_string(seed) +
                             ", sample " + std::to_string(sample) + ", n " + format_number(n) + ")",
                         cause.best_iterate(), cause.residual()),
      seed_(seed),
      sample_(sample),
      n_(n) {}

ConvergenceReport convergence_study(const StrategicGameForm& form, const std::vector<double>& n_list,
                                    std::size_t samples, std::uint64_t seed, double bound_box,
                                    double tol) {
  if (n_list.empty()) throw InvalidInput("convergence_study: n_list is empty");
  for (std::size_t k = 0; k < n_list.size(); ++k) {
    if (!(n_list[k] > 0.0) || !std::isfinite(n_list[k]))
      throw InvalidInput("convergence_study: n must be positive and finite");
    if (k > 0 && !(n_list[k] > n_list[k - 1]))
      throw InvalidInput("convergence_study: n_list must be strictly ascending");
  }
  if (samples == 0) throw InvalidInput("convergence_study: samples must be positive");
  if (!(bound_box > 0.0) || !std::isfinite(bound_box))
    throw InvalidInput("convergence_study: bound_box must be positive");

  ConvergenceReport report{form, seed, samples, bound_box, {}};
  for (double n : n_list)
    report.rows.push_back(ConvergenceRow{
        n, 0.0, 0.0, static_cast<double>(form.max_actions()) * epsilon_bound(n).epsilon_star});

  std::mt19937_64 rng(seed);
  for (std::size_t s = 0; s < samples; ++s) {
    const TargetPoint t = sample_target(form, rng, bound_box);
    const GraphPoint nash = phi_inv(t);
    for (auto& row : report.rows) {
      GraphGap gap;
      try {
        gap = graph_gap(nash, phi_n_inv(row.n, t, tol));
      } catch (const ConvergenceFailure& e) {
        throw StudyFailure(e, seed, s, row.n);
      }
      row.sup_gap_x = std::max(row.sup_gap_x, gap.profile_sup);
      row.sup_gap_full = std::max(row.sup_gap_full, gap.full_euclidean);
    }
  }

  for (const auto& row : report.rows)
    if (row.sup_gap_x > row.lemma_bound * (1.0 + 1e-6))
      throw InvariantViolation("convergence_study: profile gap " + format_number(row.sup_gap_x) +
                               " exceeds lemma bound " + format_number(row.lemma_bound) +
                               " at n " + format_number(row.n));
  return report;
}

namespace {

// Chart on target space: for each player the ũ_i entries whose opponents all
// play action 0 are minus the sum over the rest of their a_i slice, so the
// free coordinates are the remaining ũ entries followed by ȳ_i.
class TargetChart {
 public:
  explicit TargetChart(const StrategicGameForm& form) : form_(form) {}

  std::size_t dim() const { return form_.num_players() * form_.profile_count(); }

  bool anchored(std::size_t player, std::size_t profile) const {
    return profile / form_.stride(player) / form_.num_actions(player) == 0 &&
           profile % form_.stride(player) == 0;
  }

  Eigen::VectorXd coordinates(const TargetPoint& t) const {
    Eigen::VectorXd c(static_cast<Eigen::Index>(dim()));
    Eigen::Index k = 0;
    for (std::size_t i = 0; i < form_.num_players(); ++i) {
      for (std::size_t p = 0; p < form_.profile_count(); ++p)
        if (!anchored(i, p)) c[k++] = t.tilde_u[i][p];
      for (double y : t.y_bar[i]) c[k++] = y;
    }
    return c;
  }

  TargetPoint point(const Eigen::VectorXd& c) const {
    TargetPoint t;
    Eigen::Index k = 0;
    for (std::size_t i = 0; i < form_.num_players(); ++i) {
      const std::size_t m = form_.num_actions(i);
      Vector tensor(form_.profile_count(), 0.0);
      Vector slice_sum(m, 0.0);
      for (std::size_t p = 0; p < form_.profile_count(); ++p) {
        if (anchored(i, p)) continue;
        tensor[p] = c[k++];
        slice_sum[form_.action_of(p, i)] += tensor[p];
      }
      for (std::size_t a = 0; a < m; ++a) tensor[a * form_.stride(i)] = -slice_sum[a];
      t.tilde_u.push_back(std::move(tensor));
      t.y_bar.emplace_back(c.data() + k, c.data() + k + m);
      k += static_cast<Eigen::Index>(m);
    }
    return t;
  }

 private:
  const StrategicGameForm& form_;
};

Eigen::VectorXd graph_coordinates(const GraphPoint& g) {
  Vector out;
  for (const auto& tensor : g.game.payoffs()) out.insert(out.end(), tensor.begin(), tensor.end());
  const Vector x = flatten(g.profile);
  out.insert(out.end(), x.begin(), x.end());
  return Eigen::Map<const Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

constexpr double kRankSolveTolerance = 1e-14;

}  // namespace

RankReport immersion_rank_check(double n, const StrategicGameForm& form, std::size_t sample_points,
                                std::uint64_t seed, double fd_step) {
  if (!(n > 0.0) || !std::isfinite(n)) throw InvalidInput("immersion_rank_check: n must be positive");
  if (sample_points == 0) throw InvalidInput("immersion_rank_check: sample_points must be positive");
  if (!(fd_step >= 1e-9 && fd_step <= 1e-3))
    throw InvalidInput("immersion_rank_check: fd_step must lie in [1e-9, 1e-3]");

  const TargetChart chart(form);
  const auto cols = static_cast<Eigen::Index>(chart.dim());
  auto psi = [&](const Eigen::VectorXd& c) {
    return graph_coordinates(phi_n_inv(n, chart.point(c), kRankSolveTolerance));
  };

  RankReport report{n,           form,     sample_points, seed,          chart.dim(),
                    chart.dim(), INFINITY, fd_step,       kRankThreshold};

  std::mt19937_64 rng(seed);
  for (std::size_t s = 0; s < sample_points; ++s) {
    const Eigen::VectorXd base = chart.coordinates(sample_target(form, rng, kRankSampleBox));
    const auto rows = psi(base).size();
    Eigen::MatrixXd jac(rows, cols);
    for (Eigen::Index c = 0; c < cols; ++c) {
      Eigen::VectorXd plus = base, minus = base;
      plus[c] += fd_step;
      minus[c] -= fd_step;
      jac.col(c) = (psi(plus) - psi(minus)) / (2.0 * fd_step);
    }
    const Eigen::VectorXd sv = Eigen::JacobiSVD<Eigen::MatrixXd>(jac).singularValues();
    const auto above = static_cast<std::size_t>((sv.array() > report.threshold).count());
    report.numeric_rank = std::min(report.numeric_rank, above);
    report.min_singular_value = std::min(report.min_singular_value, sv.minCoeff());
  }
  return report;
}

bool VerificationReport::passed() const noexcept {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

namespace {

double sup_diff(const Vector& a, const Vector& b) {
  double d = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) d = std::max(d, std::abs(a[k] - b[k]));
  return d;
}

double target_sup_diff(const TargetPoint& a, const TargetPoint& b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.tilde_u.size(); ++i)
    d = std::max({d, sup_diff(a.tilde_u[i], b.tilde_u[i]), sup_diff(a.y_bar[i], b.y_bar[i])});
  return d;
}

// Runs `body`, which returns the worst observed value; passes iff that is
// at most `limit`. Library errors count as failures.
CheckResult measure(const std::string& name, double limit, const std::function<double()>& body) {
  try {
    const double worst = body();
    return CheckResult{name, worst <= limit,
                       "worst " + format_number(worst) + ", limit " + format_number(limit)};
  } catch (const Error& e) {
    return CheckResult{name, false, e.what()};
  }
}

Vector random_vector(std::mt19937_64& rng, std::size_t d, double r) {
  Vector v(d);
  for (double& x : v) x = uniform_draw(rng, -r, r);
  return v;
}

double log_uniform_n(std::mt19937_64& rng) {
  return std::pow(10.0, uniform_draw(rng, -3.0, 3.0));
}

std::size_t random_size(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {
  return lo + static_cast<std::size_t>(uniform_draw(rng, 0.0, static_cast<double>(hi - lo + 1)));
}

const std::vector<StrategicGameForm>& desk_forms() {
  static const std::vector<StrategicGameForm> forms{
      StrategicGameForm({2}), StrategicGameForm({2, 2}), StrategicGameForm({3, 2}),
      StrategicGameForm({2, 2, 2})};
  return forms;
}

void generic_suite(std::mt19937_64& rng, std::vector<CheckResult>& out) {
  out.push_back(measure("g_map sum identity and unit column sums", 1e-12, [&] {
    double worst = 0.0;
    for (int s = 0; s < 200; ++s) {
      const double n = log_uniform_n(rng);
      const Vector v = random_vector(rng, random_size(rng, 1, 8), std::min(5.0, 150.0 / n));
      const Vector g = g_map(n, v);
      double lhs = 0.0, rhs = 1.0;
      for (std::size_t k = 0; k < v.size(); ++k) lhs += g[k], rhs += v[k];
      worst = std::max(worst, std::abs(lhs - rhs));
      const Eigen::MatrixXd jac = g_jacobian(n, v);
      worst = std::max(worst, (jac.colwise().sum().array() - 1.0).abs().maxCoeff());
    }
    return worst;
  }));

  out.push_back(measure("g_map Jacobian is a CL-matrix", 0.0, [&] {
    int failures = 0;
    for (int s = 0; s < 200; ++s) {
      const double n = log_uniform_n(rng);
      const Vector v = random_vector(rng, random_size(rng, 1, 8), std::min(5.0, 150.0 / n));
      failures += !is_cl_matrix(g_jacobian(n, v));
    }
    return static_cast<double>(failures);
  }));

  out.push_back(measure("h_numeric inverts g_map", 1e-9, [&] {
    double worst = 0.0;
    for (int s = 0; s < 100; ++s) {
      const double n = log_uniform_n(rng);
      const Vector v = random_vector(rng, random_size(rng, 1, 8), 10.0);
      worst = std::max(worst, sup_diff(h_numeric(n, g_map(n, v), 1e-12), v));
    }
    return worst;
  }));

  out.push_back(measure("h_numeric within d eps*(n) of h", 0.0, [&] {
    double worst = std::abs(epsilon_bound(0.0).epsilon_star - 0.5) > 1e-12 ? 1.0 : 0.0;
    for (double n : {1.0, 10.0, 100.0, 1000.0}) {
      const ConvergenceBound bound = epsilon_bound(n);
      for (int s = 0; s < 100; ++s) {
        const Vector y = random_vector(rng, random_size(rng, 1, 8), 10.0);
        const double gap = sup_diff(h_numeric(n, y, 1e-12), h_exact(y).h_value);
        worst = std::max(worst, gap - bound.uniform_bound(y.size()) * (1.0 + 1e-6));
      }
    }
    return std::max(worst, 0.0);
  }));

  out.push_back(measure("graph maps invert their inverses", 1e-9, [&] {
    double worst = 0.0;
    for (const auto& form : desk_forms()) {
      for (int s = 0; s < 20; ++s) {
        const TargetPoint t = sample_target(form, rng, 10.0);
        const GraphPoint nash = phi_inv(t);
        worst = std::max({worst, target_sup_diff(phi(nash), t), nash_residual(nash.game, nash.profile)});
        const double n = std::pow(10.0, uniform_draw(rng, -1.0, 1.0));
        const GraphPoint logit = phi_n_inv(n, t, 1e-13);
        worst = std::max({worst, target_sup_diff(phi_n(n, logit), t),
                          logit_residual(logit.game, logit.profile, n)});
      }
    }
    return worst;
  }));

  out.push_back(measure("profile gap over lemma bound on 2x2", 1.0 + 1e-6, [&] {
    const auto report = convergence_study(StrategicGameForm({2, 2}), {1, 10, 100, 1000}, 20,
                                          rng(), 10.0);
    double worst = 0.0;
    for (const auto& row : report.rows) worst = std::max(worst, row.sup_gap_x / row.lemma_bound);
    return worst;
  }));

  out.push_back(measure("logit inverse is an immersion on 2x2", 0.0, [&] {
    const RankReport r = immersion_rank_check(1.0, StrategicGameForm({2, 2}), 3, rng());
    return r.passed() && r.numeric_rank == r.expected_rank ? 0.0 : 1.0;
  }));

  out.push_back(measure("closed-form logit equilibria", 1e-12, [&] {
    const Game one(StrategicGameForm({2}), {{1.0, 0.0}});
    const MixedProfile x = solve_newton(1.0, one, uniform_profile(one.form()), 1e-15);
    const double e = std::exp(1.0);
    double worst = std::max(std::abs(x[0][0] - e / (1 + e)), std::abs(x[0][1] - 1 / (1 + e)));
    const Game pennies(StrategicGameForm({2, 2}), {{1, -1, -1, 1}, {-1, 1, 1, -1}});
    for (double n : {0.5, 1.0, 10.0, 100.0}) {
      const MixedProfile p = solve_newton(n, pennies, uniform_profile(pennies.form()), 1e-15);
      for (std::size_t i = 0; i < 2; ++i)
        worst = std::max(worst, sup_diff(p[i], {0.5, 0.5}));
    }
    return worst;
  }));
}

void game_suite(const Game& game, std::vector<CheckResult>& out) {
  const StrategicGameForm& form = game.form();
  out.push_back(measure("decomposition round trip", 1e-12, [&] {
    const KMRepresentation km = km_decompose(game);
    const Game back = km_recompose(km);
    double worst = max_opponent_mean(form, km.tilde_u);
    for (std::size_t i = 0; i < form.num_players(); ++i)
      worst = std::max(worst, sup_diff(back.payoffs(i), game.payoffs(i)));
    return worst;
  }));

  constexpr double tol = 1e-11;
  std::optional<PathTrace> trace;
  out.push_back(measure("logit path entries solve their equations", tol, [&] {
    trace = trace_logit_path(game, 100.0, kDefaultStartN, tol);
    double worst = 0.0;
    for (const auto& e : trace->entries) worst = std::max(worst, logit_gap(game, e.x, e.n));
    return worst;
  }));
  if (!trace) return;

  out.push_back(measure("logit path ends near a Nash equilibrium", 1e-2,
                        [&] { return trace->terminal_nash_residual; }));

  out.push_back(measure("logit graph map round trip at the path end", 1e-9, [&] {
    const PathEntry& last = trace->entries.back();
    for (const auto& s : last.x.strategies)
      for (double p : s)
        if (!(p > 0.0)) return 0.0;  // underflowed tail: not representable on the open graph
    const GraphPoint point{game, last.x, GraphKind::logit, last.n, last.residual};
    const GraphPoint back = phi_n_inv(last.n, phi_n(last.n, point), 1e-13);
    double worst = 0.0;
    for (std::size_t i = 0; i < form.num_players(); ++i)
      worst = std::max({worst, sup_diff(back.game.payoffs(i), game.payoffs(i)),
                        sup_diff(back.profile[i], last.x[i])});
    return worst;
  }));
}

}  // namespace

VerificationReport run_verification(const std::optional<Game>& game, std::uint64_t seed) {
  VerificationReport report;
  if (game) {
    game_suite(*game, report.checks);
  } else {
    std::mt19937_64 rng(seed);
    generic_suite(rng, report.checks);
  }
  return report;
}

}  // namespace logitgraph
