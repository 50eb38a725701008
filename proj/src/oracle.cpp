#include "runoff/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "parallel.hpp"
#include "runoff/error.hpp"

namespace runoff {

OracleEstimate OracleEstimate::from_hits(std::uint64_t hits, std::uint64_t n_draws,
                                         std::uint64_t seed) {
  if (n_draws == 0) throw DomainError("OracleEstimate: need at least one draw");
  const double p = static_cast<double>(hits) / static_cast<double>(n_draws);
  return {p, std::sqrt(p * (1.0 - p) / static_cast<double>(n_draws)), n_draws, seed};
}

std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + (stream + 1) * 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

OracleRng::OracleRng(std::uint64_t seed) : engine_(seed) {}

double OracleRng::uniform() {
  return (static_cast<double>(engine_() >> 11) + 0.5) * 0x1.0p-53;
}

double OracleRng::normal() { return normal_(engine_); }

double sample_gamma(double shape, double rate, OracleRng& rng) {
  if (!(shape > 0.0) || !std::isfinite(shape) || !(rate > 0.0) || !std::isfinite(rate)) {
    throw DomainError("sample_gamma: shape and rate must be positive and finite");
  }
  if (shape < 1.0) {
    const double boost = std::pow(rng.uniform(), 1.0 / shape);
    return sample_gamma(shape + 1.0, rate, rng) * boost;
  }
  const double d = shape - 1.0 / 3.0;
  const double c = 1.0 / std::sqrt(9.0 * d);
  for (;;) {
    double x = 0.0;
    double v = 0.0;
    do {
      x = rng.normal();
      v = 1.0 + c * x;
    } while (v <= 0.0);
    v = v * v * v;
    const double u = rng.uniform();
    const double x2 = x * x;
    if (u < 1.0 - 0.0331 * x2 * x2) return d * v / rate;
    if (std::log(u) < 0.5 * x2 + d * (1.0 - v + std::log(v))) return d * v / rate;
  }
}

std::uint64_t RankTally::top2_hits(std::size_t i, std::size_t j) const {
  if (i > j) std::swap(i, j);
  return top2.at(i * categories + j);
}

RankTally simulate_ranks(const DirichletPosterior& post, std::uint64_t n_draws, std::uint64_t seed,
                         unsigned workers) {
  if (n_draws == 0) throw DomainError("simulate_ranks: need at least one draw");
  const auto& candidates = post.layout().candidate_indices();
  const std::size_t size = post.layout().size();
  const std::size_t m = candidates.size();

  const std::uint64_t chunks = (n_draws + RankTally::kChunkDraws - 1) / RankTally::kChunkDraws;
  std::vector<RankTally> partial(chunks);

  detail::parallel_for(
      chunks,
      [&](std::size_t chunk) {
        RankTally& t = partial[chunk];
        t.top2.assign(size * size, 0);
        t.majority.assign(size, 0);
        t.beats.assign(size * size, 0);

        const std::uint64_t begin = chunk * RankTally::kChunkDraws;
        const std::uint64_t count = std::min(RankTally::kChunkDraws, n_draws - begin);
        OracleRng rng(substream_seed(seed, chunk));
        std::vector<double> gamma(m);
        for (std::uint64_t draw = 0; draw < count; ++draw) {
          double total = 0.0;
          for (std::size_t k = 0; k < m; ++k) {
            gamma[k] = sample_gamma(post.alpha(candidates[k]), 1.0, rng);
            total += gamma[k];
          }
          std::size_t first = 0;
          std::size_t second = 1;
          if (gamma[second] > gamma[first]) std::swap(first, second);
          for (std::size_t k = 2; k < m; ++k) {
            if (gamma[k] > gamma[first]) {
              second = first;
              first = k;
            } else if (gamma[k] > gamma[second]) {
              second = k;
            }
          }
          const std::size_t a = std::min(candidates[first], candidates[second]);
          const std::size_t b = std::max(candidates[first], candidates[second]);
          ++t.top2[a * size + b];
          if (gamma[first] > total - gamma[first]) ++t.majority[candidates[first]];
          for (std::size_t x = 0; x < m; ++x) {
            for (std::size_t y = 0; y < m; ++y) {
              if (gamma[x] > gamma[y]) ++t.beats[candidates[x] * size + candidates[y]];
            }
          }
        }
      },
      workers);

  RankTally tally{size, n_draws, seed, std::vector<std::uint64_t>(size * size, 0),
                  std::vector<std::uint64_t>(size, 0), std::vector<std::uint64_t>(size * size, 0)};
  for (const RankTally& t : partial) {
    for (std::size_t k = 0; k < tally.top2.size(); ++k) tally.top2[k] += t.top2[k];
    for (std::size_t k = 0; k < tally.majority.size(); ++k) tally.majority[k] += t.majority[k];
    for (std::size_t k = 0; k < tally.beats.size(); ++k) tally.beats[k] += t.beats[k];
  }
  return tally;
}

namespace {

void require_candidates(const DirichletPosterior& post, std::size_t i, std::size_t j,
                        const char* who) {
  if (!post.layout().is_candidate(i) || !post.layout().is_candidate(j) || i == j) {
    throw DomainError(std::string(who) + ": need two distinct candidate indices");
  }
}

}  // namespace

OracleEstimate mc_pair_top2(const DirichletPosterior& post, std::size_t i, std::size_t j,
                            std::uint64_t n_draws, std::uint64_t seed) {
  require_candidates(post, i, j, "mc_pair_top2");
  const RankTally t = simulate_ranks(post, n_draws, seed);
  return OracleEstimate::from_hits(t.top2_hits(i, j), n_draws, seed);
}

OracleEstimate mc_majority(const DirichletPosterior& post, std::size_t i, std::uint64_t n_draws,
                           std::uint64_t seed) {
  if (!post.layout().is_candidate(i)) throw DomainError("mc_majority: not a candidate index");
  const RankTally t = simulate_ranks(post, n_draws, seed);
  return OracleEstimate::from_hits(t.majority.at(i), n_draws, seed);
}

OracleEstimate mc_beats(const DirichletPosterior& post, std::size_t i, std::size_t j,
                        std::uint64_t n_draws, std::uint64_t seed) {
  require_candidates(post, i, j, "mc_beats");
  const RankTally t = simulate_ranks(post, n_draws, seed);
  return OracleEstimate::from_hits(t.beats_hits(i, j), n_draws, seed);
}

double z_score(double quadrature, const OracleEstimate& oracle) {
  const double n = static_cast<double>(oracle.n_draws);
  const double p = std::clamp(quadrature, 0.0, 1.0);
  const double se = std::max(std::sqrt(p * (1.0 - p) / n), 1.0 / n);
  return (oracle.estimate - quadrature) / se;
}

}  // namespace runoff
