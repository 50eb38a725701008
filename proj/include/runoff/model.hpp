#pragma once

#include <chrono>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "runoff/numerics.hpp"

namespace runoff {

using Date = std::chrono::year_month_day;

enum class Round { first, second };
enum class PriorKind { uniform, jeffreys };

/// Label of the blank-vote category in every layout built from labels.
inline constexpr const char* kBlankLabel = "blank";

/// Ordered category names of a contingency table with exactly one blank
/// category; every other category is a candidate.
class CategoryLayout {
 public:
  CategoryLayout(std::vector<std::string> labels, std::size_t blank_index);

  /// Layout whose blank category is the one labelled kBlankLabel.
  static CategoryLayout from_labels(std::vector<std::string> labels);

  std::size_t size() const noexcept { return labels_.size(); }
  const std::vector<std::string>& labels() const noexcept { return labels_; }
  const std::string& label(std::size_t index) const { return labels_.at(index); }
  std::size_t blank_index() const noexcept { return blank_index_; }
  const std::vector<std::size_t>& candidate_indices() const noexcept { return candidates_; }
  std::size_t candidate_count() const noexcept { return candidates_.size(); }
  bool is_candidate(std::size_t index) const noexcept {
    return index < labels_.size() && index != blank_index_;
  }
  std::optional<std::size_t> find(const std::string& label) const;
  /// Index of label; throws InputError when absent.
  std::size_t index_of(const std::string& label) const;

  friend bool operator==(const CategoryLayout&, const CategoryLayout&) = default;

 private:
  std::vector<std::string> labels_;
  std::size_t blank_index_;
  std::vector<std::size_t> candidates_;
};

/// Three-category layout {first, second, blank} for a head-to-head scenario.
CategoryLayout scenario_layout(const std::string& first, const std::string& second);

/// Candidate labels of a second-round scenario, in the order written.
struct ScenarioPair {
  std::string first;
  std::string second;

  friend bool operator==(const ScenarioPair&, const ScenarioPair&) = default;
};

/// Identifies one poll folded into a posterior.
struct PollId {
  std::string pollster;
  Date date;
  Round round = Round::first;
  std::optional<ScenarioPair> scenario;

  friend bool operator==(const PollId&, const PollId&) = default;
};

/// Published percentages may sum past 100 by this many points; counts derived
/// from them may exceed the sample size by as much (plus half a count per
/// category for rounding).
inline constexpr double kPublishedRoundingPoints = 1.5;

struct PollObservation {
  PollId id;
  CategoryLayout layout;
  std::vector<long long> counts;
  long long sample_size_reported = 0;

  /// Checks counts/layout alignment, non-negativity, the scenario/round
  /// pairing and that counts do not exceed the reported sample size beyond
  /// the published-rounding allowance.
  void validate() const;
  long long total() const;
};

/// Dirichlet law over the categories of a layout. alpha holds a_i + x_i after
/// any number of conjugate updates.
class DirichletPosterior {
 public:
  DirichletPosterior(CategoryLayout layout, std::vector<double> alpha,
                     std::string pollster = {}, std::vector<PollId> provenance = {});

  const CategoryLayout& layout() const noexcept { return layout_; }
  const std::vector<double>& alpha() const noexcept { return alpha_; }
  double alpha(std::size_t index) const { return alpha_.at(index); }
  const std::string& pollster() const noexcept { return pollster_; }
  const std::vector<PollId>& provenance() const noexcept { return provenance_; }
  double concentration() const;

  friend bool operator==(const DirichletPosterior&, const DirichletPosterior&) = default;

 private:
  CategoryLayout layout_;
  std::vector<double> alpha_;
  std::string pollster_;
  std::vector<PollId> provenance_;
};

DirichletPosterior noninformative_prior(const CategoryLayout& layout,
                                        PriorKind kind = PriorKind::uniform,
                                        std::string pollster = {});

/// Conjugate update alpha' = alpha + counts. Throws InputError when the
/// observation's layout differs from the posterior's, or when the posterior
/// already carries a different pollster.
DirichletPosterior update(const DirichletPosterior& prior, const PollObservation& obs);

/// Carries a posterior forward as the next prior: alpha' = w * alpha, 0 < w <= 1.
DirichletPosterior scale_forward(const DirichletPosterior& post, double w);

std::vector<double> posterior_mean(const DirichletPosterior& post);

/// One Gamma(alpha_i, rate) per category; normalising them by their sum
/// yields the Dirichlet.
std::vector<GammaMarginal> gamma_representation(const DirichletPosterior& post,
                                                double rate = 1.0);

}  // namespace runoff
