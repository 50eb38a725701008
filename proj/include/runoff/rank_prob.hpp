#pragma once

#include <array>
#include <cstddef>
#include <vector>

#include "runoff/model.hpp"
#include "runoff/numerics.hpp"

namespace runoff {

/// Gamma marginals entering the top-two event for one candidate pair:
/// `pair` forms the minimum, `field_rest` (every other candidate, blank
/// excluded) forms the maximum. An empty field means the maximum is -inf and
/// its distribution function is identically one.
struct MinMaxAssembly {
  std::array<GammaMarginal, 2> pair;
  std::vector<GammaMarginal> field_rest;

  static MinMaxAssembly for_pair(const DirichletPosterior& post, std::size_t i,
                                 std::size_t j, double rate = 1.0);
};

/// ln of the density of min(pair) at u, as a log-sum-exp of
/// f_1(u) S_2(u) and f_2(u) S_1(u). May be -inf.
double log_min_density(const MinMaxAssembly& assembly, double u);
/// ln of the distribution function of max(field_rest) at u: the sum of the
/// field's log CDFs, 0 for an empty field.
double log_max_cdf(const MinMaxAssembly& assembly, double u);

double log_min_density_at_log(const MinMaxAssembly& assembly, double log_u);
double log_max_cdf_at_log(const MinMaxAssembly& assembly, double log_u);

// The kernels below integrate over t = ln(u), truncated to the quantile
// envelope [q(1e-12), q(1 - 1e-12)] of the marginals that carry a density.
// `rate` is the common Gamma rate; results do not depend on it.

/// P(candidates i and j hold the two largest shares).
double prob_pair_top2(const DirichletPosterior& post, std::size_t i, std::size_t j,
                      const QuadratureSpec& spec = {}, double rate = 1.0);

/// P(candidate i takes more than half of the non-blank vote), i.e.
/// P(gamma_i > sum of the other candidates' gammas).
double prob_majority(const DirichletPosterior& post, std::size_t i,
                     const QuadratureSpec& spec = {}, double rate = 1.0);

/// P(theta_i > theta_j). Only alpha_i and alpha_j are used, so `post` may be a
/// head-to-head scenario posterior or any other layout containing both.
double prob_beats(const DirichletPosterior& post, std::size_t i, std::size_t j,
                  const QuadratureSpec& spec = {}, double rate = 1.0);

}  // namespace runoff
