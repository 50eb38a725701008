#include "runoff/model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "runoff/error.hpp"

namespace runoff {

CategoryLayout::CategoryLayout(std::vector<std::string> labels, std::size_t blank_index)
    : labels_(std::move(labels)), blank_index_(blank_index) {
  if (blank_index_ >= labels_.size()) {
    throw InputError("CategoryLayout: blank index out of range");
  }
  if (labels_.size() < 3) {
    throw InputError("CategoryLayout: need at least two candidates and a blank category");
  }
  std::set<std::string> seen;
  for (const auto& label : labels_) {
    if (label.empty()) throw InputError("CategoryLayout: empty category label");
    if (!seen.insert(label).second) {
      throw InputError("CategoryLayout: duplicate category label '" + label + "'");
    }
  }
  for (std::size_t k = 0; k < labels_.size(); ++k) {
    if (k != blank_index_) candidates_.push_back(k);
  }
}

CategoryLayout CategoryLayout::from_labels(std::vector<std::string> labels) {
  const auto it = std::find(labels.begin(), labels.end(), kBlankLabel);
  if (it == labels.end()) {
    throw InputError(std::string("CategoryLayout: no '") + kBlankLabel + "' category");
  }
  const auto blank = static_cast<std::size_t>(it - labels.begin());
  return CategoryLayout(std::move(labels), blank);
}

std::optional<std::size_t> CategoryLayout::find(const std::string& label) const {
  const auto it = std::find(labels_.begin(), labels_.end(), label);
  if (it == labels_.end()) return std::nullopt;
  return static_cast<std::size_t>(it - labels_.begin());
}

std::size_t CategoryLayout::index_of(const std::string& label) const {
  if (auto index = find(label)) return *index;
  throw InputError("unknown category label '" + label + "'");
}

CategoryLayout scenario_layout(const std::string& first, const std::string& second) {
  return CategoryLayout({first, second, kBlankLabel}, 2);
}

void PollObservation::validate() const {
  if (counts.size() != layout.size()) {
    throw InputError("PollObservation: counts length does not match layout");
  }
  for (long long c : counts) {
    if (c < 0) throw InputError("PollObservation: negative count");
  }
  if (id.round == Round::second) {
    if (!id.scenario) throw InputError("PollObservation: second-round poll without scenario");
    if (layout.size() != 3) {
      throw InputError("PollObservation: second-round layout must have three categories");
    }
  } else if (id.scenario) {
    throw InputError("PollObservation: first-round poll must not name a scenario");
  }
  if (sample_size_reported <= 0) {
    throw InputError("PollObservation: sample size must be positive");
  }
  const double allowance = static_cast<double>(sample_size_reported) * kPublishedRoundingPoints / 100.0 +
                           static_cast<double>(layout.size()) / 2.0;
  if (static_cast<double>(total()) > static_cast<double>(sample_size_reported) + allowance) {
    throw InputError("PollObservation: counts exceed the reported sample size");
  }
}

long long PollObservation::total() const {
  return std::accumulate(counts.begin(), counts.end(), 0LL);
}

DirichletPosterior::DirichletPosterior(CategoryLayout layout, std::vector<double> alpha,
                                       std::string pollster, std::vector<PollId> provenance)
    : layout_(std::move(layout)),
      alpha_(std::move(alpha)),
      pollster_(std::move(pollster)),
      provenance_(std::move(provenance)) {
  if (alpha_.size() != layout_.size()) {
    throw InputError("DirichletPosterior: alpha length does not match layout");
  }
  for (double a : alpha_) {
    if (!(a > 0.0) || !std::isfinite(a)) {
      throw DomainError("DirichletPosterior: every alpha must be positive and finite");
    }
  }
}

double DirichletPosterior::concentration() const {
  return std::accumulate(alpha_.begin(), alpha_.end(), 0.0);
}

DirichletPosterior noninformative_prior(const CategoryLayout& layout, PriorKind kind,
                                        std::string pollster) {
  const double a = kind == PriorKind::uniform ? 1.0 : 0.5;
  return DirichletPosterior(layout, std::vector<double>(layout.size(), a),
                            std::move(pollster));
}

DirichletPosterior update(const DirichletPosterior& prior, const PollObservation& obs) {
  if (obs.layout != prior.layout()) {
    throw InputError("update: observation layout does not match the posterior layout");
  }
  if (obs.counts.size() != prior.alpha().size()) {
    throw InputError("update: counts length does not match the posterior");
  }
  if (!prior.pollster().empty() && prior.pollster() != obs.id.pollster) {
    throw InputError("update: poll from '" + obs.id.pollster +
                     "' cannot update a posterior of '" + prior.pollster() + "'");
  }
  std::vector<double> alpha = prior.alpha();
  for (std::size_t k = 0; k < alpha.size(); ++k) {
    if (obs.counts[k] < 0) throw InputError("update: negative count");
    alpha[k] += static_cast<double>(obs.counts[k]);
  }
  auto provenance = prior.provenance();
  provenance.push_back(obs.id);
  return DirichletPosterior(prior.layout(), std::move(alpha), obs.id.pollster,
                            std::move(provenance));
}

DirichletPosterior scale_forward(const DirichletPosterior& post, double w) {
  if (!(w > 0.0 && w <= 1.0)) {
    throw DomainError("scale_forward: factor must lie in (0, 1]");
  }
  std::vector<double> alpha = post.alpha();
  for (double& a : alpha) a *= w;
  return DirichletPosterior(post.layout(), std::move(alpha), post.pollster(),
                            post.provenance());
}

std::vector<double> posterior_mean(const DirichletPosterior& post) {
  const double total = post.concentration();
  std::vector<double> mean(post.alpha().size());
  std::transform(post.alpha().begin(), post.alpha().end(), mean.begin(),
                 [total](double a) { return a / total; });
  return mean;
}

std::vector<GammaMarginal> gamma_representation(const DirichletPosterior& post, double rate) {
  std::vector<GammaMarginal> marginals;
  marginals.reserve(post.alpha().size());
  for (double a : post.alpha()) marginals.emplace_back(a, rate);
  return marginals;
}

}  // namespace runoff
