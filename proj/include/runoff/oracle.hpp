#pragma once

// Brute-force Monte Carlo counterparts of the rank kernels. Used to verify the
// quadrature results, never as primary output.

#include <cstddef>
#include <cstdint>
#include <random>
#include <vector>

#include "runoff/model.hpp"

namespace runoff {

struct OracleEstimate {
  double estimate = 0.0;
  /// sqrt(estimate * (1 - estimate) / n_draws)
  double std_error = 0.0;
  std::uint64_t n_draws = 0;
  std::uint64_t seed = 0;

  static OracleEstimate from_hits(std::uint64_t hits, std::uint64_t n_draws, std::uint64_t seed);
};

/// SplitMix64 finaliser applied to seed + (stream + 1) * golden gamma.
/// Sub-streams derived this way seed independent engines.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream);

/// Random source for the oracle: a 64-bit Mersenne Twister seeded explicitly,
/// plus the normal deviates the Gamma sampler needs. No global state.
class OracleRng {
 public:
  explicit OracleRng(std::uint64_t seed);

  /// Uniform on the open interval (0, 1), 53 random bits.
  double uniform();
  double normal();

 private:
  std::mt19937_64 engine_;
  std::normal_distribution<double> normal_;
};

/// Marsaglia-Tsang squeeze sampler; shape < 1 goes through shape + 1 and the
/// U^(1/shape) boost. Throws DomainError for non-positive parameters.
double sample_gamma(double shape, double rate, OracleRng& rng);

/// Event counts over n_draws joint draws of the candidates' gammas (the blank
/// category never enters an event, so it is not sampled). Draws are taken in
/// fixed chunks of kChunkDraws, chunk c from substream c, so the counts do not
/// depend on the number of workers.
struct RankTally {
  static constexpr std::uint64_t kChunkDraws = 1u << 16;

  std::size_t categories = 0;
  std::uint64_t n_draws = 0;
  std::uint64_t seed = 0;
  /// [i * categories + j], i < j: draws where {i, j} held the top two.
  std::vector<std::uint64_t> top2;
  /// draws where candidate i exceeded the sum of all other candidates.
  std::vector<std::uint64_t> majority;
  /// [i * categories + j]: draws where gamma_i > gamma_j.
  std::vector<std::uint64_t> beats;

  std::uint64_t top2_hits(std::size_t i, std::size_t j) const;
  std::uint64_t beats_hits(std::size_t i, std::size_t j) const {
    return beats.at(i * categories + j);
  }
};

RankTally simulate_ranks(const DirichletPosterior& post, std::uint64_t n_draws, std::uint64_t seed,
                         unsigned workers = 0);

OracleEstimate mc_pair_top2(const DirichletPosterior& post, std::size_t i, std::size_t j,
                            std::uint64_t n_draws, std::uint64_t seed);
OracleEstimate mc_majority(const DirichletPosterior& post, std::size_t i, std::uint64_t n_draws,
                           std::uint64_t seed);
OracleEstimate mc_beats(const DirichletPosterior& post, std::size_t i, std::size_t j,
                        std::uint64_t n_draws, std::uint64_t seed);

/// (oracle - quadrature) / se, with se the binomial standard error under the
/// quadrature value, floored at 1 / n_draws so that near-certain events with
/// no contrary draws score zero instead of dividing by zero.
double z_score(double quadrature, const OracleEstimate& oracle);

}  // namespace runoff
