#include <algorithm>
#include <chrono>
#include <cmath>
#include <string>
#include <vector>

#include "doctest.h"
#include "runoff/error.hpp"
#include "runoff/model.hpp"
#include "runoff/oracle.hpp"

using namespace runoff;
using namespace std::chrono;

namespace {

CategoryLayout fourteen() {
  std::vector<std::string> labels;
  for (int k = 1; k <= 13; ++k) labels.push_back("c" + std::to_string(k));
  labels.push_back(kBlankLabel);
  return CategoryLayout(labels, 13);
}

CategoryLayout abc() { return CategoryLayout({"a", "b", kBlankLabel}, 2); }

PollObservation observe(const CategoryLayout& layout, std::vector<long long> counts,
                        std::string pollster = "P", Date date = 2018y / September / 1d) {
  long long total = 0;
  for (long long c : counts) total += c;
  return {{std::move(pollster), date, Round::first, std::nullopt},
          layout,
          std::move(counts),
          total + 10};
}

}  // namespace

TEST_CASE("CategoryLayout construction") {
  const auto layout = fourteen();
  CHECK(layout.size() == 14);
  CHECK(layout.blank_index() == 13);
  CHECK(layout.candidate_count() == 13);
  CHECK_FALSE(layout.is_candidate(13));
  CHECK_FALSE(layout.is_candidate(14));
  CHECK(layout.is_candidate(0));
  CHECK(layout.index_of("c5") == 4);
  CHECK_FALSE(layout.find("c14").has_value());
  CHECK_THROWS_AS(layout.index_of("c14"), InputError);

  const auto mid = CategoryLayout::from_labels({"x", kBlankLabel, "y"});
  CHECK(mid.blank_index() == 1);
  CHECK(mid.candidate_indices() == std::vector<std::size_t>{0, 2});

  CHECK_THROWS_AS(CategoryLayout::from_labels({"x", "y", "z"}), InputError);
  CHECK_THROWS_AS(CategoryLayout({"x", kBlankLabel}, 1), InputError);
  CHECK_THROWS_AS(CategoryLayout({"x", "x", kBlankLabel}, 2), InputError);
  CHECK_THROWS_AS(CategoryLayout({"x", "", kBlankLabel}, 2), InputError);
  CHECK_THROWS_AS(CategoryLayout({"x", "y", kBlankLabel}, 3), InputError);

  const auto s = scenario_layout("c5", "c9");
  CHECK(s.labels() == std::vector<std::string>{"c5", "c9", kBlankLabel});
  CHECK(s.blank_index() == 2);
}

TEST_CASE("PollObservation validation") {
  const auto layout = abc();
  auto obs = observe(layout, {4, 3, 2});
  CHECK_NOTHROW(obs.validate());
  CHECK(obs.total() == 9);

  auto short_counts = obs;
  short_counts.counts = {1, 2};
  CHECK_THROWS_AS(short_counts.validate(), InputError);

  auto negative = obs;
  negative.counts = {1, -2, 3};
  CHECK_THROWS_AS(negative.validate(), InputError);

  auto oversized = obs;
  oversized.sample_size_reported = 5;
  CHECK_THROWS_AS(oversized.validate(), InputError);

  // Independent rounding of published percentages may overshoot n slightly.
  auto rounded_up = obs;
  rounded_up.sample_size_reported = 8;
  CHECK_NOTHROW(rounded_up.validate());

  auto second = obs;
  second.id.round = Round::second;
  CHECK_THROWS_AS(second.validate(), InputError);
  second.id.scenario = ScenarioPair{"a", "b"};
  CHECK_NOTHROW(second.validate());

  auto first_with_pair = obs;
  first_with_pair.id.scenario = ScenarioPair{"a", "b"};
  CHECK_THROWS_AS(first_with_pair.validate(), InputError);
}

TEST_CASE("DirichletPosterior rejects bad alpha") {
  CHECK_THROWS_AS(DirichletPosterior(abc(), {1.0, 1.0}), InputError);
  CHECK_THROWS_AS(DirichletPosterior(abc(), {1.0, 0.0, 1.0}), DomainError);
  CHECK_THROWS_AS(DirichletPosterior(abc(), {1.0, -1.0, 1.0}), DomainError);
  CHECK_THROWS_AS(DirichletPosterior(abc(), {1.0, std::nan(""), 1.0}), DomainError);
  CHECK_THROWS_AS(DirichletPosterior(abc(), {1.0, HUGE_VAL, 1.0}), DomainError);
  CHECK(DirichletPosterior(abc(), {1.0, 2.0, 3.5}).concentration() == 6.5);
}

TEST_CASE("noninformative_prior") {
  const auto uniform = noninformative_prior(fourteen(), PriorKind::uniform);
  CHECK(uniform.alpha() == std::vector<double>(14, 1.0));
  for (double m : posterior_mean(uniform)) CHECK(m == doctest::Approx(1.0 / 14.0));

  const auto jeffreys = noninformative_prior(abc(), PriorKind::jeffreys, "P");
  CHECK(jeffreys.alpha() == std::vector<double>{0.5, 0.5, 0.5});
  CHECK(jeffreys.pollster() == "P");
  CHECK(jeffreys.provenance().empty());
}

TEST_CASE("update adds counts") {
  const auto layout = abc();
  const auto post = update(noninformative_prior(layout), observe(layout, {4, 3, 2}));
  CHECK(post.alpha() == std::vector<double>{5.0, 4.0, 3.0});
  CHECK(post.pollster() == "P");
  REQUIRE(post.provenance().size() == 1);
  CHECK(post.provenance()[0].date == 2018y / September / 1d);

  const auto big = fourteen();
  const auto prior = noninformative_prior(big);
  CHECK(update(prior, observe(big, std::vector<long long>(14, 0))).alpha() == prior.alpha());

  // (0.5, 0.5) + (100, 50), with an empty blank category alongside.
  const auto j = update(noninformative_prior(layout, PriorKind::jeffreys),
                        observe(layout, {100, 50, 0}));
  CHECK(j.alpha() == std::vector<double>{100.5, 50.5, 0.5});
}

TEST_CASE("update rejects mismatches") {
  const auto layout = abc();
  const auto prior = noninformative_prior(layout, PriorKind::uniform, "P");
  CHECK_THROWS_AS(update(prior, observe(scenario_layout("a", "c"), {1, 1, 1})), InputError);
  CHECK_THROWS_AS(update(prior, observe(layout, {1, 1, 1}, "Q")), InputError);
  auto negative = observe(layout, {1, 1, 1});
  negative.counts[1] = -1;
  CHECK_THROWS_AS(update(prior, negative), InputError);
}

TEST_CASE("update is associative over split counts") {
  const auto layout = fourteen();
  std::vector<long long> c1(14);
  std::vector<long long> c2(14);
  std::vector<long long> both(14);
  for (int k = 0; k < 14; ++k) {
    c1[k] = 17 * k % 23;
    c2[k] = 5 * k * k % 31;
    both[k] = c1[k] + c2[k];
  }
  const auto prior = noninformative_prior(layout, PriorKind::jeffreys);
  const auto stepwise = update(update(prior, observe(layout, c1)), observe(layout, c2));
  const auto at_once = update(prior, observe(layout, both));
  CHECK(stepwise.alpha() == at_once.alpha());
}

TEST_CASE("scale_forward") {
  const auto layout = abc();
  const DirichletPosterior post(layout, {10.0, 30.0, 60.0});
  CHECK(scale_forward(post, 0.1).alpha() ==
        std::vector<double>{10.0 * 0.1, 30.0 * 0.1, 60.0 * 0.1});
  const auto tenth = scale_forward(post, 0.1);
  for (double a : tenth.alpha()) CHECK(a > 0.0);
  CHECK(scale_forward(post, 1.0).alpha() == post.alpha());

  const DirichletPosterior pair(layout, {2000.0, 1000.0, 1.0});
  const auto scaled = scale_forward(pair, 0.05);
  CHECK(scaled.alpha()[0] == 100.0);
  CHECK(scaled.alpha()[1] == 50.0);

  for (double w : {0.0, -0.1, 1.0000001, std::nan("")}) {
    CAPTURE(w);
    CHECK_THROWS_AS(scale_forward(post, w), DomainError);
  }
}

TEST_CASE("scale_forward preserves the mean") {
  const auto layout = fourteen();
  std::vector<double> alpha;
  for (int k = 0; k < 14; ++k) alpha.push_back(0.37 + 113.0 * k * k);
  const DirichletPosterior post(layout, alpha);
  const auto before = posterior_mean(post);
  for (double w : {0.5, 0.25, 0.1, 0.05, 0.003}) {
    const auto after = posterior_mean(scale_forward(post, w));
    // Power-of-two factors are exact; others agree to rounding.
    for (std::size_t k = 0; k < 14; ++k) {
      if (w == 0.5 || w == 0.25) {
        CHECK(after[k] == before[k]);
      } else {
        CHECK(after[k] == doctest::Approx(before[k]).epsilon(4e-16));
      }
    }
    CHECK(std::max_element(after.begin(), after.end()) - after.begin() ==
          std::max_element(before.begin(), before.end()) - before.begin());
  }
}

TEST_CASE("posterior_mean") {
  const auto layout = abc();
  CHECK(posterior_mean(DirichletPosterior(layout, {5.0, 4.0, 3.0})) ==
        std::vector<double>{5.0 / 12, 4.0 / 12, 3.0 / 12});
  const auto four = CategoryLayout({"a", "b", "c", kBlankLabel}, 3);
  CHECK(posterior_mean(DirichletPosterior(four, {1.0, 1.0, 1.0, 1.0})) ==
        std::vector<double>(4, 0.25));
  CHECK(posterior_mean(DirichletPosterior(layout, {3.0, 1.0, 4.0})) ==
        std::vector<double>{0.375, 0.125, 0.5});
}

TEST_CASE("gamma_representation") {
  const DirichletPosterior post(abc(), {2.0, 3.0, 0.5});
  const auto unit = gamma_representation(post);
  REQUIRE(unit.size() == 3);
  CHECK(unit[0] == GammaMarginal(2.0, 1.0));
  CHECK(unit[1] == GammaMarginal(3.0, 1.0));
  const auto seven = gamma_representation(post, 7.0);
  CHECK(seven[1] == GammaMarginal(3.0, 7.0));
  for (const auto& g : seven) CHECK(g.rate() == 7.0);
  CHECK_THROWS_AS(gamma_representation(post, 0.0), DomainError);
}

TEST_CASE("normalized gammas reproduce Dirichlet moments") {
  const DirichletPosterior post(abc(), {2.0, 3.0, 5.0});
  const double a0 = post.concentration();
  constexpr int kDraws = 200000;
  for (double rate : {1.0, 7.0}) {
    const auto marginals = gamma_representation(post, rate);
    OracleRng rng(substream_seed(42, static_cast<std::uint64_t>(rate)));
    std::vector<double> sum(3, 0.0);
    std::vector<double> sum_sq(3, 0.0);
    for (int n = 0; n < kDraws; ++n) {
      double g[3];
      double total = 0.0;
      for (int k = 0; k < 3; ++k) {
        g[k] = sample_gamma(marginals[k].shape(), marginals[k].rate(), rng);
        total += g[k];
      }
      for (int k = 0; k < 3; ++k) {
        sum[k] += g[k] / total;
        sum_sq[k] += (g[k] / total) * (g[k] / total);
      }
    }
    for (int k = 0; k < 3; ++k) {
      const double m = post.alpha(k) / a0;
      const double var = m * (1.0 - m) / (a0 + 1.0);
      const double se = std::sqrt(var / kDraws);
      CAPTURE(rate);
      CAPTURE(k);
      CHECK(std::fabs(sum[k] / kDraws - m) < 4.0 * se);
      const double second = var + m * m;
      CHECK(sum_sq[k] / kDraws == doctest::Approx(second).epsilon(0.02));
    }
  }
}
