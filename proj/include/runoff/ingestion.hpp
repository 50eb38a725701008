#pragma once

// Poll files and posterior stores share one line-oriented text grammar.
//
// Poll file: UTF-8, one record per line, '#' starts a comment line, blank
// lines are ignored. Fields are separated by whitespace:
//
//   <pollster> <YYYY-MM-DD> <first|second> <A/B|-> <sample-size> <label>=<percent>...
//
// The fourth field names the head-to-head pair of a second-round record and
// is '-' for first-round records. Labels may not contain whitespace, '=', '/'
// or ','. The label "blank" is the blank-vote category and "undecided" the
// excluded remainder.
//
// Posterior store: the same layout, with the sample size replaced by
// key=value chain metadata and percentages replaced by alpha values:
//
//   <pollster> <YYYY-MM-DD> <first|second> <A/B|-> scale=<w> prior=<kind>
//       polls=<date>,<date>... <label>=<alpha>...
//
// Alpha values use the shortest decimal form that round-trips exactly.

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "runoff/error.hpp"
#include "runoff/model.hpp"

namespace runoff {

inline constexpr const char* kUndecidedLabel = "undecided";
inline constexpr double kPercentSumTolerance = kPublishedRoundingPoints;

/// Parse failure located at a line and field of the input.
class ParseError : public InputError {
 public:
  ParseError(std::string source, std::size_t line, std::string field, const std::string& message);

  const std::string& source() const noexcept { return source_; }
  std::size_t line() const noexcept { return line_; }
  const std::string& field() const noexcept { return field_; }

 private:
  std::string source_;
  std::size_t line_;
  std::string field_;
};

struct RawPollRecord {
  std::string pollster;
  Date date;
  Round round = Round::first;
  std::optional<ScenarioPair> scenario;
  long long sample_size = 0;
  /// In file order; may include kUndecidedLabel.
  std::vector<std::pair<std::string, double>> percentages;
  /// 1-based source line, 0 when built in memory.
  std::size_t line = 0;

  PollId id() const { return {pollster, date, round, scenario}; }
};

Date parse_date(std::string_view text);
std::string format_date(const Date& date);
std::string_view round_name(Round round);
std::string format_scenario(const std::optional<ScenarioPair>& scenario);
/// Shortest decimal representation that parses back to the same double.
std::string format_exact(double value);

/// Layout implied by a record: for first-round records the labels in file
/// order without "undecided"; for second-round records {A, B, blank}.
CategoryLayout layout_from_record(const RawPollRecord& raw);

/// counts_i = round-half-away(percent_i / 100 * sample_size); the undecided
/// share gets no category. Counts are not reconciled to the sample size.
PollObservation to_observation(const RawPollRecord& raw, const CategoryLayout& layout);

/// Inverse direction, used to write observations back out: percentages are
/// 100 * count / sample size and the remainder is listed as undecided.
RawPollRecord to_raw_record(const PollObservation& obs);

std::vector<RawPollRecord> parse_poll_text(std::string_view text,
                                           std::string_view source = "<input>");
std::vector<RawPollRecord> load_poll_file(const std::filesystem::path& path);
std::string format_poll_record(const RawPollRecord& raw);

// Posterior store --------------------------------------------------------

/// One posterior snapshot of a chain, taken after the poll of `date`.
struct StoreEntry {
  DirichletPosterior posterior;
  Round round = Round::first;
  std::optional<ScenarioPair> scenario;
  Date date;
  double scale = 1.0;
  PriorKind prior = PriorKind::uniform;
};

std::string format_store(std::span<const StoreEntry> entries);
std::vector<StoreEntry> parse_store(std::string_view text, std::string_view source = "<store>");
std::vector<StoreEntry> load_store(const std::filesystem::path& path);

/// Reads a whole file; throws InputError when it cannot be opened.
std::string read_text_file(const std::filesystem::path& path);
/// Writes to a sibling temporary file and renames it over `path`.
void write_file_atomically(const std::filesystem::path& path, std::string_view contents);

}  // namespace runoff
