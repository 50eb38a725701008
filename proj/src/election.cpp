#include "runoff/election.hpp"

#include <algorithm>
#include <cmath>

#include "parallel.hpp"
#include "runoff/error.hpp"
#include "runoff/rank_prob.hpp"

namespace runoff {

namespace {

constexpr double kSumSlack = 1e-6;

std::pair<std::string, std::string> label_key(std::string a, std::string b) {
  if (b < a) std::swap(a, b);
  return {std::move(a), std::move(b)};
}

void require_same_pollster(const DirichletPosterior& post1, const DirichletPosterior& scenario) {
  if (scenario.pollster() != post1.pollster()) {
    throw InputError("scenario posterior from '" + scenario.pollster() +
                     "' cannot be combined with a first-round posterior from '" +
                     post1.pollster() + "'");
  }
}

double no_winner_from(const std::vector<double>& p_majority) {
  double sum = 0.0;
  for (double p : p_majority) sum += p;
  if (sum > 1.0 + kSumSlack) {
    throw InvariantError("outright-win probabilities sum to " + std::to_string(sum) +
                         ", but the events are disjoint");
  }
  return std::clamp(1.0 - sum, 0.0, 1.0);
}

// P(i beats j) from the scenario posterior, or nullopt when it is missing.
std::optional<double> head_to_head(const DirichletPosterior& post1, const ScenarioTable& scenarios,
                                   std::size_t i, std::size_t j, const QuadratureSpec& spec) {
  const auto& layout = post1.layout();
  const DirichletPosterior* scenario = scenarios.find(layout.label(i), layout.label(j));
  if (scenario == nullptr) return std::nullopt;
  require_same_pollster(post1, *scenario);
  const auto& s = scenario->layout();
  return prob_beats(*scenario, s.index_of(layout.label(i)), s.index_of(layout.label(j)), spec);
}

double fallback_value(Fallback fallback) { return fallback == Fallback::half ? 0.5 : 0.0; }

}  // namespace

CandidatePair make_pair_key(std::size_t i, std::size_t j) {
  return i < j ? CandidatePair{i, j} : CandidatePair{j, i};
}

void ScenarioTable::insert(DirichletPosterior scenario) {
  const auto& layout = scenario.layout();
  if (layout.size() != 3 || layout.blank_index() != 2) {
    throw InputError("ScenarioTable: scenario layout must be {A, B, blank}");
  }
  auto key = label_key(layout.label(0), layout.label(1));
  entries_.insert_or_assign(std::move(key), std::move(scenario));
}

const DirichletPosterior* ScenarioTable::find(const std::string& a, const std::string& b) const {
  const auto it = entries_.find(label_key(a, b));
  return it == entries_.end() ? nullptr : &it->second;
}

double p_no_first_round_winner(const DirichletPosterior& post, const QuadratureSpec& spec) {
  std::vector<double> p_majority;
  for (std::size_t i : post.layout().candidate_indices()) {
    p_majority.push_back(prob_majority(post, i, spec));
  }
  return no_winner_from(p_majority);
}

double p_elected(const DirichletPosterior& post1, const ScenarioTable& scenarios, std::size_t i,
                 const QuadratureSpec& spec, Fallback fallback) {
  const auto& layout = post1.layout();
  if (!layout.is_candidate(i)) {
    throw DomainError("p_elected: index " + std::to_string(i) + " is not a candidate");
  }
  double runoff = 0.0;
  for (std::size_t j : layout.candidate_indices()) {
    if (j == i) continue;
    const auto q = head_to_head(post1, scenarios, i, j, spec);
    runoff += prob_pair_top2(post1, i, j, spec) * q.value_or(fallback_value(fallback));
  }
  return prob_majority(post1, i, spec) + p_no_first_round_winner(post1, spec) * runoff;
}

ElectionReport full_report(const DirichletPosterior& post1, const ScenarioTable& scenarios,
                           const QuadratureSpec& spec, Fallback fallback) {
  spec.validate();
  const CategoryLayout& layout = post1.layout();
  const auto& candidates = layout.candidate_indices();

  for (const auto& [key, scenario] : scenarios.entries()) require_same_pollster(post1, scenario);

  enum class Kind { majority, top2, beats };
  struct Task {
    Kind kind;
    std::size_t i;
    std::size_t j;
    double value = 0.0;
    std::optional<KernelFailure> failure;
  };

  std::vector<Task> tasks;
  for (std::size_t i : candidates) tasks.push_back({Kind::majority, i, i, 0.0, std::nullopt});
  for (std::size_t a = 0; a < candidates.size(); ++a) {
    for (std::size_t b = a + 1; b < candidates.size(); ++b) {
      const std::size_t i = candidates[a];
      const std::size_t j = candidates[b];
      tasks.push_back({Kind::top2, i, j, 0.0, std::nullopt});
      if (scenarios.find(layout.label(i), layout.label(j)) != nullptr) {
        tasks.push_back({Kind::beats, i, j, 0.0, std::nullopt});
        tasks.push_back({Kind::beats, j, i, 0.0, std::nullopt});
      }
    }
  }

  detail::parallel_for(tasks.size(), [&](std::size_t k) {
    Task& task = tasks[k];
    try {
      switch (task.kind) {
        case Kind::majority:
          task.value = prob_majority(post1, task.i, spec);
          break;
        case Kind::top2:
          task.value = prob_pair_top2(post1, task.i, task.j, spec);
          break;
        case Kind::beats:
          task.value = *head_to_head(post1, scenarios, task.i, task.j, spec);
          break;
      }
    } catch (const ConvergenceError& e) {
      static constexpr const char* kNames[] = {"majority", "top2", "beats"};
      std::string subject = layout.label(task.i);
      if (task.kind != Kind::majority) subject += "/" + layout.label(task.j);
      task.value = std::clamp(e.value(), 0.0, 1.0);
      task.failure = KernelFailure{std::string(kNames[static_cast<int>(task.kind)]) + " " + subject,
                                   e.what()};
    }
  });

  ElectionReport report{std::nullopt,
                        post1.pollster(),
                        layout,
                        std::vector<double>(layout.size(), 0.0),
                        0.0,
                        {},
                        std::vector<double>(layout.size(), 0.0),
                        {},
                        {},
                        {}};
  if (!post1.provenance().empty()) report.date = post1.provenance().back().date;

  for (const Task& task : tasks) {
    if (task.failure) report.failures.push_back(*task.failure);
    switch (task.kind) {
      case Kind::majority:
        report.p_majority[task.i] = task.value;
        break;
      case Kind::top2:
        report.p_top2[make_pair_key(task.i, task.j)] = task.value;
        break;
      case Kind::beats:
        report.p_beats[{task.i, task.j}] = task.value;
        break;
    }
  }
  report.p_no_first_round_winner = no_winner_from(report.p_majority);

  for (const auto& [pair, top2] : report.p_top2) {
    if (!report.p_beats.contains(pair)) report.missing_scenarios.push_back({pair, fallback});
  }

  for (std::size_t i : candidates) {
    double runoff = 0.0;
    for (std::size_t j : candidates) {
      if (j == i) continue;
      const auto beats = report.p_beats.find({i, j});
      const double q = beats != report.p_beats.end() ? beats->second : fallback_value(fallback);
      runoff += report.p_top2.at(make_pair_key(i, j)) * q;
    }
    report.p_elected[i] = report.p_majority[i] + report.p_no_first_round_winner * runoff;
  }
  return report;
}

}  // namespace runoff
