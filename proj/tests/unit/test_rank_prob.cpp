#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <boost/math/distributions/gamma.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <boost/math/special_functions/beta.hpp>

#include "doctest.h"
#include "runoff/error.hpp"
#include "runoff/oracle.hpp"
#include "runoff/rank_prob.hpp"

using namespace runoff;

namespace {

// Candidates c1..cm followed by the blank category.
DirichletPosterior with_blank(std::vector<double> candidates, double blank = 1.0) {
  std::vector<std::string> labels;
  for (std::size_t k = 0; k < candidates.size(); ++k) labels.push_back("c" + std::to_string(k + 1));
  labels.push_back(kBlankLabel);
  candidates.push_back(blank);
  return DirichletPosterior(CategoryLayout(labels, labels.size() - 1), std::move(candidates));
}

// P(gamma_i > gamma_j) = P(Beta(a_i, a_j) > 1/2).
double reference_beats(double ai, double aj) { return boost::math::ibetac(ai, aj, 0.5); }

// Top-two probability straight from the order-statistic densities, with
// Boost's distributions and its own Gauss-Kronrod integrator.
double reference_top2(const std::vector<double>& alpha, std::size_t i, std::size_t j) {
  using boost::math::gamma_distribution;
  const gamma_distribution<double> gi(alpha[i]);
  const gamma_distribution<double> gj(alpha[j]);
  auto f = [&](double u) {
    if (u <= 0.0) return 0.0;
    double fmax = 1.0;
    for (std::size_t k = 0; k < alpha.size(); ++k) {
      if (k != i && k != j) fmax *= boost::math::cdf(gamma_distribution<double>(alpha[k]), u);
    }
    const double fmin = boost::math::pdf(gi, u) * boost::math::cdf(boost::math::complement(gj, u)) +
                        boost::math::pdf(gj, u) * boost::math::cdf(boost::math::complement(gi, u));
    return fmax * fmin;
  };
  return boost::math::quadrature::gauss_kronrod<double, 61>::integrate(
      f, 0.0, std::numeric_limits<double>::infinity(), 15, 1e-13);
}

// The kernels promise the quadrature bound max(abs_tol, rel_tol * value).
bool within_quadrature_tolerance(double got, double want) {
  const QuadratureSpec spec;
  return std::fabs(got - want) <= std::max(spec.abs_tol, spec.rel_tol * std::fabs(want));
}

double pair_sum(const DirichletPosterior& post, const QuadratureSpec& spec = {}) {
  const auto& c = post.layout().candidate_indices();
  double sum = 0.0;
  for (std::size_t a = 0; a < c.size(); ++a) {
    for (std::size_t b = a + 1; b < c.size(); ++b) sum += prob_pair_top2(post, c[a], c[b], spec);
  }
  return sum;
}

DirichletPosterior random_posterior(std::mt19937_64& gen, std::size_t candidates) {
  std::uniform_real_distribution<double> log_alpha(std::log(0.5), std::log(3000.0));
  std::vector<double> alpha;
  for (std::size_t k = 0; k < candidates; ++k) alpha.push_back(std::exp(log_alpha(gen)));
  return with_blank(alpha, std::exp(log_alpha(gen)));
}

}  // namespace

TEST_CASE("MinMaxAssembly splits candidates into pair and field") {
  const auto post = with_blank({5.0, 4.0, 3.0, 2.0}, 9.0);
  const auto asm_ = MinMaxAssembly::for_pair(post, 1, 3, 2.0);
  CHECK(asm_.pair[0] == GammaMarginal(4.0, 2.0));
  CHECK(asm_.pair[1] == GammaMarginal(2.0, 2.0));
  REQUIRE(asm_.field_rest.size() == 2);
  CHECK(asm_.field_rest[0] == GammaMarginal(5.0, 2.0));
  CHECK(asm_.field_rest[1] == GammaMarginal(3.0, 2.0));

  CHECK(MinMaxAssembly::for_pair(with_blank({1.0, 2.0}), 0, 1).field_rest.empty());
  CHECK_THROWS_AS(MinMaxAssembly::for_pair(post, 1, 1), DomainError);
  CHECK_THROWS_AS(MinMaxAssembly::for_pair(post, 1, 4), DomainError);  // blank
  CHECK_THROWS_AS(MinMaxAssembly::for_pair(post, 1, 9), DomainError);
}

TEST_CASE("log_min_density") {
  const GammaMarginal e(1.0, 1.0);
  const MinMaxAssembly exps{{e, e}, {}};
  CHECK(log_min_density(exps, 1.0) == doctest::Approx(std::numbers::ln2 - 2.0).epsilon(1e-15));

  // The density of the minimum integrates to one.
  const auto total = integrate(
      [&](double t) { return std::exp(log_min_density_at_log(exps, t) + t); }, -40.0, 4.0);
  CHECK(total.value == doctest::Approx(1.0).epsilon(1e-10));

  const MinMaxAssembly mixed{{GammaMarginal(2.0, 1.0), GammaMarginal(3.0, 1.0)}, {}};
  const boost::math::gamma_distribution<double> g2(2.0);
  const boost::math::gamma_distribution<double> g3(3.0);
  const double want = boost::math::pdf(g2, 2.0) * boost::math::cdf(boost::math::complement(g3, 2.0)) +
                      boost::math::pdf(g3, 2.0) * boost::math::cdf(boost::math::complement(g2, 2.0));
  const double got = log_min_density(mixed, 2.0);
  REQUIRE(std::isfinite(got));
  CHECK(got == doctest::Approx(std::log(want)).epsilon(1e-14));

  CHECK_THROWS_AS(log_min_density(exps, 0.0), DomainError);
  CHECK_THROWS_AS(log_min_density(exps, -1.0), DomainError);
}

TEST_CASE("log_max_cdf") {
  const GammaMarginal e(1.0, 1.0);
  const MinMaxAssembly empty{{e, e}, {}};
  CHECK(log_max_cdf(empty, 0.3) == 0.0);
  CHECK(log_max_cdf(empty, 1e6) == 0.0);

  const MinMaxAssembly one{{e, e}, {e}};
  CHECK(log_max_cdf(one, 1.0) == doctest::Approx(std::log(1.0 - std::exp(-1.0))).epsilon(1e-15));

  const MinMaxAssembly eleven{{e, e}, std::vector<GammaMarginal>(11, e)};
  CHECK(log_max_cdf(eleven, 1.0) ==
        doctest::Approx(11.0 * std::log(1.0 - std::exp(-1.0))).epsilon(1e-14));

  CHECK_THROWS_AS(log_max_cdf(one, 0.0), DomainError);
}

TEST_CASE("prob_pair_top2: known values") {
  const auto sym = with_blank({3.0, 3.0, 3.0});
  CHECK(prob_pair_top2(sym, 0, 1) == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
  CHECK(prob_pair_top2(sym, 0, 2) == doctest::Approx(1.0 / 3.0).epsilon(1e-8));
  CHECK(prob_pair_top2(sym, 1, 2) == doctest::Approx(1.0 / 3.0).epsilon(1e-8));

  CHECK(prob_pair_top2(with_blank({17.0, 0.4}), 0, 1) == 1.0);
  CHECK(prob_pair_top2(with_blank({17.0, 0.4}), 1, 0) == 1.0);

  CHECK_THROWS_AS(prob_pair_top2(sym, 0, 0), DomainError);
  CHECK_THROWS_AS(prob_pair_top2(sym, 0, 3), DomainError);
}

TEST_CASE("prob_pair_top2 against an independent integration") {
  const std::vector<std::vector<double>> cases = {
      {4.0, 3.0, 2.0}, {0.5, 0.7, 2.0, 1.0}, {40.0, 35.0, 12.0, 9.0, 3.0}, {1.0, 1.0, 1.0, 1.0}};
  for (const auto& alpha : cases) {
    const auto post = with_blank(alpha);
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      for (std::size_t j = i + 1; j < alpha.size(); ++j) {
        CAPTURE(i);
        CAPTURE(j);
        CHECK(within_quadrature_tolerance(prob_pair_top2(post, i, j), reference_top2(alpha, i, j)));
      }
    }
  }
}

TEST_CASE("prob_pair_top2 matches the Monte Carlo oracle at 10^7 draws") {
  // alpha (4, 3, 2) over three candidates plus a blank of 1.
  const auto post = with_blank({4.0, 3.0, 2.0}, 1.0);
  const double q = prob_pair_top2(post, 0, 1);
  const auto mc = mc_pair_top2(post, 0, 1, 10'000'000, 7);
  CHECK(std::fabs(z_score(q, mc)) <= 3.0);
}

TEST_CASE("prob_majority: known values") {
  CHECK(prob_majority(with_blank({6.5, 6.5}), 0) == doctest::Approx(0.5).epsilon(1e-9));
  // E[exp(-S)] with S ~ Gamma(2, 1) is 1/4.
  CHECK(std::fabs(prob_majority(with_blank({1.0, 1.0, 1.0}), 0) - 0.25) <= 1e-9);
  const double tiny = prob_majority(with_blank({700.0, 650.0, 650.0}), 0);
  CHECK(tiny >= 0.0);
  CHECK(tiny < 1e-10);
  CHECK_THROWS_AS(prob_majority(with_blank({1.0, 1.0}), 2), DomainError);
}

TEST_CASE("prob_majority against the Beta tail") {
  for (const auto& alpha : std::vector<std::vector<double>>{
           {30.0, 5.0, 4.0}, {1900.0, 100.0}, {0.6, 0.3, 0.2, 0.05}, {900.0, 450.0, 430.0}}) {
    const auto post = with_blank(alpha, 77.0);
    for (std::size_t i = 0; i < alpha.size(); ++i) {
      double rest = 0.0;
      for (std::size_t k = 0; k < alpha.size(); ++k) rest += k == i ? 0.0 : alpha[k];
      const double want = boost::math::ibetac(alpha[i], rest, 0.5);
      CAPTURE(i);
      CHECK(within_quadrature_tolerance(prob_majority(post, i), want));
    }
  }
}

TEST_CASE("prob_beats: known values") {
  CHECK(prob_beats(with_blank({12.0, 12.0, 3.0}), 0, 1) == doctest::Approx(0.5).epsilon(1e-9));
  CHECK(std::fabs(prob_beats(with_blank({2.0, 1.0}), 0, 1) - 0.75) <= 1e-9);
  CHECK_THROWS_AS(prob_beats(with_blank({2.0, 1.0}), 0, 0), DomainError);
  CHECK_THROWS_AS(prob_beats(with_blank({2.0, 1.0}), 0, 2), DomainError);

  const auto big = with_blank({1200.0, 800.0});
  const double q = prob_beats(big, 1, 0);
  CHECK(q == doctest::Approx(reference_beats(800.0, 1200.0)).epsilon(1e-6).scale(1e-12));
  const double near = prob_beats(with_blank({1020.0, 1000.0}), 0, 1);
  CHECK(std::fabs(z_score(near, mc_beats(with_blank({1020.0, 1000.0}), 0, 1, 10'000'000, 11))) <= 3.0);
}

TEST_CASE("prob_beats against the Beta tail") {
  for (double ai : {0.05, 0.5, 1.0, 3.7, 120.0, 2500.0}) {
    for (double aj : {0.3, 1.0, 9.0, 2400.0}) {
      const auto post = with_blank({ai, aj});
      CAPTURE(ai);
      CAPTURE(aj);
      CHECK(within_quadrature_tolerance(prob_beats(post, 0, 1), reference_beats(ai, aj)));
    }
  }
}

// Properties ---------------------------------------------------------------

TEST_CASE("rate invariance") {
  const auto post = with_blank({35.0, 25.0, 13.0, 9.0, 0.8}, 8.0);
  for (double rate : {0.5, 2.0, 7.0}) {
    CAPTURE(rate);
    for (std::size_t i = 0; i < 5; ++i) {
      CHECK(std::fabs(prob_majority(post, i, {}, rate) - prob_majority(post, i)) <= 1e-10);
      for (std::size_t j = 0; j < 5; ++j) {
        if (i == j) continue;
        CHECK(std::fabs(prob_beats(post, i, j, {}, rate) - prob_beats(post, i, j)) <= 1e-10);
        if (i < j) {
          CHECK(std::fabs(prob_pair_top2(post, i, j, {}, rate) - prob_pair_top2(post, i, j)) <=
                1e-10);
        }
      }
    }
  }
}

TEST_CASE("blank invariance") {
  const std::vector<double> alpha = {40.0, 31.0, 12.0, 6.0};
  const auto light = with_blank(alpha, 0.5);
  const auto heavy = with_blank(alpha, 5000.0);
  for (std::size_t i = 0; i < alpha.size(); ++i) {
    CHECK(prob_majority(light, i) == prob_majority(heavy, i));
    for (std::size_t j = 0; j < alpha.size(); ++j) {
      if (i == j) continue;
      CHECK(prob_beats(light, i, j) == prob_beats(heavy, i, j));
      CHECK(prob_pair_top2(light, i, j) == prob_pair_top2(heavy, i, j));
    }
  }
}

TEST_CASE("complementarity of prob_beats") {
  for (const auto& [ai, aj] : std::vector<std::pair<double, double>>{
           {2.0, 1.0}, {0.1, 0.2}, {1200.0, 800.0}, {3.0, 2999.0}, {0.001, 50.0}}) {
    const auto post = with_blank({ai, aj});
    CAPTURE(ai);
    CAPTURE(aj);
    CHECK(std::fabs(prob_beats(post, 0, 1) + prob_beats(post, 1, 0) - 1.0) <= 1e-8);
  }
}

TEST_CASE("pair partition on random posteriors") {
  std::mt19937_64 gen(2018);
  for (std::size_t m : {3, 4, 6, 9, 13}) {
    for (int rep = 0; rep < 3; ++rep) {
      const auto post = random_posterior(gen, m);
      CAPTURE(m);
      CHECK(std::fabs(pair_sum(post) - 1.0) <= 1e-6);
    }
  }
}

TEST_CASE("pair partition with vanishing candidates") {
  // Candidates polling zero for several chained polls keep shrinking alpha.
  const auto post = with_blank({98.0, 71.0, 0.001, 0.0011, 0.01, 24.0, 0.001}, 20.0);
  CHECK(std::fabs(pair_sum(post) - 1.0) <= 1e-6);
  CHECK(prob_pair_top2(post, 2, 3) < 1e-12);
}

TEST_CASE("prob_majority grows with the candidate's alpha") {
  for (double base : {0.7, 5.0, 60.0}) {
    double previous = 0.0;
    for (double a = 0.5; a <= 400.0; a *= 1.4) {
      const double p = prob_majority(with_blank({a, base, base / 2, base / 3}), 0);
      // Values near 1 jitter by a few ulp; allow the absolute tolerance.
      CHECK(p >= previous - QuadratureSpec{}.abs_tol);
      previous = std::max(previous, p);
    }
  }
}

TEST_CASE("quadrature failures propagate") {
  const auto post = with_blank({35.0, 25.0, 13.0, 9.0});
  const QuadratureSpec starved{1e-15, 1e-15, 1};
  CHECK_THROWS_AS(prob_pair_top2(post, 0, 1, starved), ConvergenceError);
  CHECK_THROWS_AS(prob_majority(post, 0, starved), ConvergenceError);
  CHECK_THROWS_AS(prob_beats(post, 0, 1, starved), ConvergenceError);
  CHECK_THROWS_AS(prob_beats(post, 0, 1, QuadratureSpec{0.0, 0.0, 10}), DomainError);
}
