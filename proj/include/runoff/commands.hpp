#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "runoff/election.hpp"
#include "runoff/ingestion.hpp"
#include "runoff/model.hpp"
#include "runoff/numerics.hpp"

namespace runoff {

enum ExitCode : int {
  kExitOk = 0,
  kExitInput = 1,
  kExitConvergence = 2,
  kExitOracle = 3,
};

struct RunConfig {
  std::filesystem::path poll_file;
  std::filesystem::path store;
  std::filesystem::path out_dir;
  std::optional<std::string> pollster;
  PriorKind prior = PriorKind::uniform;
  double scale = 0.1;
  QuadratureSpec quadrature;
  Fallback fallback = Fallback::half;
  std::uint64_t seed = 20181007;
  std::uint64_t draws = 1'000'000;
  std::optional<Date> date;
  bool charts = false;

  static constexpr std::uint64_t kMinOracleDraws = 10'000;

  /// Throws DomainError for w outside (0, 1], invalid tolerances, or (when
  /// `oracle` is set) fewer than kMinOracleDraws draws.
  void validate(bool oracle = false) const;
};

/// Folds poll records into posterior chains, one first-round chain per
/// pollster and one chain per head-to-head pair. Each chain starts from the
/// non-informative prior; every later poll is applied to the previous
/// posterior scaled by config.scale. Every intermediate posterior is kept,
/// ordered by pollster (first appearance), chain, then date.
std::vector<StoreEntry> build_chains(const std::vector<RawPollRecord>& records,
                                     const RunConfig& config);

/// One report per first-round snapshot of `pollster`; each uses the latest
/// scenario snapshot dated on or before it.
std::vector<ElectionReport> reports_for_pollster(const std::vector<StoreEntry>& store,
                                                 const std::string& pollster,
                                                 const RunConfig& config);

/// Pollsters present in a store, in order of first appearance.
std::vector<std::string> store_pollsters(const std::vector<StoreEntry>& store);

// CSV renderings; probabilities carry 10 significant digits.
std::string top2_table(const std::vector<ElectionReport>& reports);
std::string elected_table(const std::vector<ElectionReport>& reports);
std::string scenario_table(const std::vector<ElectionReport>& reports);

// Subcommands. Each returns an ExitCode and throws on input errors;
// run_guarded maps exceptions to exit codes and prints them to `err`.
int cmd_update(const RunConfig& config, std::ostream& out);
int cmd_report(const RunConfig& config, std::ostream& out);
int cmd_elect(const RunConfig& config, std::ostream& out);
int cmd_top2(const RunConfig& config, std::ostream& out);
int cmd_oracle(const RunConfig& config, std::ostream& out);

int run_guarded(const std::function<int()>& command, std::ostream& err);

}  // namespace runoff
