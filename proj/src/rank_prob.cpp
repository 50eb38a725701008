#include "runoff/rank_prob.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <span>
#include <string>

#include "runoff/error.hpp"

namespace runoff {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTailMass = 1e-12;
constexpr double kClampSlack = 1e-6;
double log_add(double x, double y) {
  if (x == -kInf) return y;
  if (y == -kInf) return x;
  const double hi = std::max(x, y);
  return hi + std::log1p(std::exp(std::min(x, y) - hi));
}

void require_candidate(const DirichletPosterior& post, std::size_t index, const char* who) {
  if (!post.layout().is_candidate(index)) {
    throw DomainError(std::string(who) + ": index " + std::to_string(index) +
                      " is not a candidate category");
  }
}

double require_positive_log(double u, const char* who) {
  if (!(u > 0.0) || !std::isfinite(u)) {
    throw DomainError(std::string(who) + ": argument must be positive and finite");
  }
  return std::log(u);
}

// Integration limits in t = ln(u): the smallest lower and the largest upper
// tail quantile over the marginals that carry a density. The integrand is
// bounded by those densities, so at most 2e-12 of mass per carrier is cut.
std::array<double, 2> log_envelope(std::span<const GammaMarginal> carriers) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const GammaMarginal& g : carriers) {
    lo = std::min(lo, gamma_log_quantile(g, kTailMass));
    hi = std::max(hi, gamma_log_quantile(g, 1.0 - kTailMass));
  }
  return {lo, hi};
}

double finish(double value, const char* who) {
  if (value < -kClampSlack || value > 1.0 + kClampSlack || !std::isfinite(value)) {
    throw InvariantError(std::string(who) + ": integral " + std::to_string(value) +
                         " lies outside [0, 1] beyond tolerance");
  }
  return std::clamp(value, 0.0, 1.0);
}

}  // namespace

MinMaxAssembly MinMaxAssembly::for_pair(const DirichletPosterior& post, std::size_t i,
                                        std::size_t j, double rate) {
  require_candidate(post, i, "MinMaxAssembly");
  require_candidate(post, j, "MinMaxAssembly");
  if (i == j) throw DomainError("MinMaxAssembly: the pair needs two distinct candidates");

  MinMaxAssembly assembly{{GammaMarginal(post.alpha(i), rate), GammaMarginal(post.alpha(j), rate)},
                          {}};
  for (std::size_t k : post.layout().candidate_indices()) {
    if (k != i && k != j) assembly.field_rest.emplace_back(post.alpha(k), rate);
  }
  return assembly;
}

double log_min_density_at_log(const MinMaxAssembly& assembly, double log_u) {
  const auto& [a, b] = assembly.pair;
  const double via_a = gamma_log_pdf_at_log(a, log_u) + gamma_log_sf_at_log(b, log_u);
  const double via_b = gamma_log_pdf_at_log(b, log_u) + gamma_log_sf_at_log(a, log_u);
  return log_add(via_a, via_b);
}

double log_max_cdf_at_log(const MinMaxAssembly& assembly, double log_u) {
  double sum = 0.0;
  for (const GammaMarginal& g : assembly.field_rest) {
    sum += gamma_log_cdf_at_log(g, log_u);
    if (sum == -kInf) break;
  }
  return sum;
}

double log_min_density(const MinMaxAssembly& assembly, double u) {
  return log_min_density_at_log(assembly, require_positive_log(u, "log_min_density"));
}

double log_max_cdf(const MinMaxAssembly& assembly, double u) {
  return log_max_cdf_at_log(assembly, require_positive_log(u, "log_max_cdf"));
}

double prob_pair_top2(const DirichletPosterior& post, std::size_t i, std::size_t j,
                      const QuadratureSpec& spec, double rate) {
  const MinMaxAssembly assembly = MinMaxAssembly::for_pair(post, i, j, rate);
  if (assembly.field_rest.empty()) return 1.0;

  const auto limits = log_envelope(assembly.pair);
  auto integrand = [&](double t) {
    const double log_f = log_max_cdf_at_log(assembly, t);
    if (log_f == -kInf) return 0.0;
    return std::exp(log_f + log_min_density_at_log(assembly, t) + t);
  };
  return finish(integrate(integrand, limits[0], limits[1], spec).value, "prob_pair_top2");
}

double prob_majority(const DirichletPosterior& post, std::size_t i,
                     const QuadratureSpec& spec, double rate) {
  require_candidate(post, i, "prob_majority");
  double rest = 0.0;
  for (std::size_t k : post.layout().candidate_indices()) {
    if (k != i) rest += post.alpha(k);
  }
  const GammaMarginal own(post.alpha(i), rate);
  const GammaMarginal others(rest, rate);

  const auto limits = log_envelope(std::span(&own, 1));
  auto integrand = [&](double t) {
    const double log_f = gamma_log_cdf_at_log(others, t);
    if (log_f == -kInf) return 0.0;
    return std::exp(log_f + gamma_log_pdf_at_log(own, t) + t);
  };
  return finish(integrate(integrand, limits[0], limits[1], spec).value, "prob_majority");
}

double prob_beats(const DirichletPosterior& post, std::size_t i, std::size_t j,
                  const QuadratureSpec& spec, double rate) {
  require_candidate(post, i, "prob_beats");
  require_candidate(post, j, "prob_beats");
  if (i == j) throw DomainError("prob_beats: needs two distinct candidates");

  const GammaMarginal winner(post.alpha(i), rate);
  const GammaMarginal loser(post.alpha(j), rate);

  const auto limits = log_envelope(std::span(&winner, 1));
  auto integrand = [&](double t) {
    const double log_f = gamma_log_cdf_at_log(loser, t);
    if (log_f == -kInf) return 0.0;
    return std::exp(log_f + gamma_log_pdf_at_log(winner, t) + t);
  };
  return finish(integrate(integrand, limits[0], limits[1], spec).value, "prob_beats");
}

}  // namespace runoff
