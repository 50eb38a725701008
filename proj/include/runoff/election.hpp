#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "runoff/model.hpp"
#include "runoff/numerics.hpp"

namespace runoff {

/// What p_elected does with a pair that has no head-to-head posterior.
enum class Fallback {
  half,  ///< treat the runoff as a coin flip
  skip,  ///< the pair contributes nothing
};

/// Unordered candidate pair, stored with first < second (layout indices).
using CandidatePair = std::pair<std::size_t, std::size_t>;

CandidatePair make_pair_key(std::size_t i, std::size_t j);

/// Head-to-head posteriors keyed by the (unordered) pair of candidate labels.
class ScenarioTable {
 public:
  /// The posterior must have a three-category layout {A, B, blank}. Replaces
  /// any earlier entry for the same pair.
  void insert(DirichletPosterior scenario);

  /// Posterior for the pair labelled a and b, in either order.
  const DirichletPosterior* find(const std::string& a, const std::string& b) const;

  std::size_t size() const noexcept { return entries_.size(); }
  bool empty() const noexcept { return entries_.empty(); }
  const std::map<std::pair<std::string, std::string>, DirichletPosterior>& entries() const noexcept {
    return entries_;
  }

 private:
  std::map<std::pair<std::string, std::string>, DirichletPosterior> entries_;
};

struct MissingScenario {
  CandidatePair pair;
  Fallback fallback;
};

/// A kernel whose quadrature did not converge; its best estimate was used.
struct KernelFailure {
  std::string kernel;
  std::string detail;
};

/// Per-candidate vectors are indexed by first-round layout index; the blank
/// slot holds 0.
struct ElectionReport {
  std::optional<Date> date;
  std::string pollster;
  CategoryLayout layout;
  std::vector<double> p_majority;
  double p_no_first_round_winner = 0.0;
  std::map<CandidatePair, double> p_top2;
  std::vector<double> p_elected;
  std::vector<MissingScenario> missing_scenarios;
  std::vector<KernelFailure> failures;

  /// Ordered (i, j) -> P(i beats j) for every pair with a scenario posterior.
  std::map<std::pair<std::size_t, std::size_t>, double> p_beats;
};

/// 1 - sum_i P(i wins outright). Throws InvariantError when the disjoint
/// majority probabilities sum past 1 + 1e-6.
double p_no_first_round_winner(const DirichletPosterior& post, const QuadratureSpec& spec = {});

/// P(i elected) = P(i wins outright)
///              + P(no outright winner) * sum_j P({i, j} top two) * P(i beats j).
/// Scenario posteriors must come from the same pollster as post1.
double p_elected(const DirichletPosterior& post1, const ScenarioTable& scenarios, std::size_t i,
                 const QuadratureSpec& spec = {}, Fallback fallback = Fallback::half);

/// Every kernel for one first-round posterior. Kernels run concurrently;
/// quadrature failures are recorded in `failures` and do not abort the rest.
ElectionReport full_report(const DirichletPosterior& post1, const ScenarioTable& scenarios,
                           const QuadratureSpec& spec = {}, Fallback fallback = Fallback::half);

}  // namespace runoff
