#pragma once

// Reproducible studies over random points of payoff space.
//
// Target points are drawn with every ũ and ȳ entry uniform in [-box, box],
// after which ũ is projected to zero opponent means. Draws come from
// std::mt19937_64 through a fixed 53-bit mapping, so reports are identical
// across standard libraries.

#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "logitgraph/error.hpp"
#include "logitgraph/game.hpp"

namespace logitgraph {

/// Uniform in [lo, hi) from the top 53 bits of one draw.
double uniform_draw(std::mt19937_64& rng, double lo, double hi);

TargetPoint sample_target(const StrategicGameForm& form, std::mt19937_64& rng, double box);

struct ConvergenceRow {
  double n = 0.0;
  double sup_gap_x = 0.0;     // sup over samples of the profile sup-norm gap
  double sup_gap_full = 0.0;  // sup over samples of the full Euclidean gap
  double lemma_bound = 0.0;   // max_i |A_i| * eps*(n)
};

struct ConvergenceReport {
  StrategicGameForm form;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  double bound_box = 0.0;
  std::vector<ConvergenceRow> rows;  // ascending n
};

/// A solver failure inside a study, tagged with where it happened.
class StudyFailure : public ConvergenceFailure {
 public:
  StudyFailure(const ConvergenceFailure& cause, std::uint64_t seed, std::size_t sample, double n);

  std::uint64_t seed() const noexcept { return seed_; }
  std::size_t sample() const noexcept { return sample_; }
  double n() const noexcept { return n_; }

 private:
  std::uint64_t seed_;
  std::size_t sample_;
  double n_;
};

inline constexpr double kStudyTolerance = 1e-12;

/// Compares phi^{-1} and phi_n^{-1} on `samples` random target points for
/// each n. Throws InvalidInput unless n_list is nonempty, positive and
/// strictly ascending, samples > 0 and bound_box > 0; InvariantViolation if
/// a row breaks the lemma bound; StudyFailure if h_numeric fails.
ConvergenceReport convergence_study(const StrategicGameForm& form, const std::vector<double>& n_list,
                                    std::size_t samples, std::uint64_t seed, double bound_box,
                                    double tol = kStudyTolerance);

inline constexpr double kRankThreshold = 1e-6;
inline constexpr double kRankSampleBox = 10.0;

struct RankReport {
  double n = 0.0;
  StrategicGameForm form;
  std::size_t sample_points = 0;
  std::uint64_t seed = 0;
  std::size_t expected_rank = 0;  // |A| * |I|
  std::size_t numeric_rank = 0;   // min over samples of the count above threshold
  double min_singular_value = 0.0;
  double fd_step = 0.0;
  double threshold = kRankThreshold;

  bool passed() const noexcept { return min_singular_value > threshold; }
};

/// Central-difference Jacobian of psi_n = phi_n^{-1} at random target
/// points, in a chart of the zero-mean ũ coordinates plus ȳ. Throws
/// InvalidInput for n <= 0, sample_points == 0 or fd_step outside
/// [1e-9, 1e-3].
RankReport immersion_rank_check(double n, const StrategicGameForm& form, std::size_t sample_points,
                                std::uint64_t seed, double fd_step = 1e-6);

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct VerificationReport {
  std::vector<CheckResult> checks;

  bool passed() const noexcept;
};

/// Desk-scale property checks. Without a game, runs the generic suites over
/// random inputs; with one, checks the decomposition, path and graph maps on
/// that game.
VerificationReport run_verification(const std::optional<Game>& game, std::uint64_t seed = 0);

}  // namespace logitgraph
