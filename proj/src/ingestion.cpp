#include "runoff/ingestion.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

namespace runoff {

namespace {

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (pos < line.size()) {
    while (pos < line.size() && std::isspace(static_cast<unsigned char>(line[pos]))) ++pos;
    std::size_t end = pos;
    while (end < line.size() && !std::isspace(static_cast<unsigned char>(line[end]))) ++end;
    if (end > pos) fields.push_back(line.substr(pos, end - pos));
    pos = end;
  }
  return fields;
}

bool valid_label(std::string_view label) {
  return !label.empty() && label.find_first_of("=/,") == std::string_view::npos;
}

template <typename T>
std::optional<T> parse_number(std::string_view text) {
  T value{};
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) return std::nullopt;
  return value;
}

class LineReader {
 public:
  LineReader(std::string_view text, std::string_view source) : text_(text), source_(source) {}

  // Next non-empty, non-comment line split into fields; false at end.
  bool next(std::vector<std::string_view>& fields) {
    while (pos_ <= text_.size() && pos_ != std::string_view::npos) {
      const std::size_t end = text_.find('\n', pos_);
      std::string_view line = text_.substr(pos_, end == std::string_view::npos ? end : end - pos_);
      pos_ = end == std::string_view::npos ? std::string_view::npos : end + 1;
      ++line_;
      if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
      fields = split_fields(line);
      if (fields.empty() || fields.front().front() == '#') continue;
      return true;
    }
    return false;
  }

  [[noreturn]] void fail(std::string field, const std::string& message) const {
    throw ParseError(std::string(source_), line_, std::move(field), message);
  }

  std::size_t line() const noexcept { return line_; }

 private:
  std::string_view text_;
  std::string_view source_;
  std::size_t pos_ = 0;
  std::size_t line_ = 0;
};

// Fields shared by poll records and store entries.
struct RecordHead {
  std::string pollster;
  Date date;
  Round round = Round::first;
  std::optional<ScenarioPair> scenario;
};

RecordHead parse_head(const std::vector<std::string_view>& fields, const LineReader& reader) {
  if (fields.size() < 4) reader.fail("record", "expected pollster, date, round and scenario");
  RecordHead head;
  head.pollster = std::string(fields[0]);
  try {
    head.date = parse_date(fields[1]);
  } catch (const InputError& e) {
    reader.fail("date", e.what());
  }
  if (fields[2] == "first") {
    head.round = Round::first;
  } else if (fields[2] == "second") {
    head.round = Round::second;
  } else {
    reader.fail("round", "round must be 'first' or 'second', got '" + std::string(fields[2]) + "'");
  }
  const std::string_view scenario = fields[3];
  if (scenario != "-") {
    const auto slash = scenario.find('/');
    if (slash == std::string_view::npos) reader.fail("scenario", "scenario must be 'A/B' or '-'");
    const auto a = scenario.substr(0, slash);
    const auto b = scenario.substr(slash + 1);
    if (!valid_label(a) || !valid_label(b) || a == b) {
      reader.fail("scenario", "scenario must name two distinct candidate labels");
    }
    if (a == kBlankLabel || b == kBlankLabel || a == kUndecidedLabel || b == kUndecidedLabel) {
      reader.fail("scenario", "scenario must name candidates, not blank or undecided");
    }
    head.scenario = ScenarioPair{std::string(a), std::string(b)};
  }
  if (head.round == Round::second && !head.scenario) {
    reader.fail("scenario", "second-round record requires a scenario pair");
  }
  if (head.round == Round::first && head.scenario) {
    reader.fail("scenario", "first-round record must use '-' for the scenario");
  }
  return head;
}

std::pair<std::string, double> parse_label_value(std::string_view field, const LineReader& reader) {
  const auto eq = field.find('=');
  if (eq == std::string_view::npos) {
    reader.fail(std::string(field), "expected label=value");
  }
  const std::string label(field.substr(0, eq));
  if (!valid_label(label)) reader.fail(label, "invalid category label");
  const auto value = parse_number<double>(field.substr(eq + 1));
  if (!value || !std::isfinite(*value)) reader.fail(label, "value is not a finite number");
  return {label, *value};
}

std::string_view prior_name(PriorKind kind) {
  return kind == PriorKind::uniform ? "uniform" : "jeffreys";
}

}  // namespace

ParseError::ParseError(std::string source, std::size_t line, std::string field,
                       const std::string& message)
    : InputError(source + ":" + std::to_string(line) + ": field '" + field + "': " + message),
      source_(std::move(source)),
      line_(line),
      field_(std::move(field)) {}

Date parse_date(std::string_view text) {
  int y = 0;
  unsigned m = 0;
  unsigned d = 0;
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw InputError("date must be YYYY-MM-DD, got '" + std::string(text) + "'");
  }
  const auto year = parse_number<int>(text.substr(0, 4));
  const auto month = parse_number<unsigned>(text.substr(5, 2));
  const auto day = parse_number<unsigned>(text.substr(8, 2));
  if (!year || !month || !day) {
    throw InputError("date must be YYYY-MM-DD, got '" + std::string(text) + "'");
  }
  y = *year;
  m = *month;
  d = *day;
  const Date date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
  if (!date.ok()) throw InputError("not a calendar date: '" + std::string(text) + "'");
  return date;
}

std::string format_date(const Date& date) {
  char buffer[16];
  std::snprintf(buffer, sizeof buffer, "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buffer;
}

std::string_view round_name(Round round) { return round == Round::first ? "first" : "second"; }

std::string format_scenario(const std::optional<ScenarioPair>& scenario) {
  return scenario ? scenario->first + "/" + scenario->second : "-";
}

std::string format_exact(double value) {
  char buffer[64];
  const auto [ptr, ec] = std::to_chars(buffer, buffer + sizeof buffer, value);
  return std::string(buffer, ptr);
}

CategoryLayout layout_from_record(const RawPollRecord& raw) {
  if (raw.round == Round::second) {
    if (!raw.scenario) throw InputError("second-round record without scenario");
    return scenario_layout(raw.scenario->first, raw.scenario->second);
  }
  std::vector<std::string> labels;
  for (const auto& [label, percent] : raw.percentages) {
    if (label != kUndecidedLabel) labels.push_back(label);
  }
  return CategoryLayout::from_labels(std::move(labels));
}

PollObservation to_observation(const RawPollRecord& raw, const CategoryLayout& layout) {
  const std::string where = raw.pollster + " " + format_date(raw.date) + ": ";
  if (raw.sample_size <= 0) throw InputError(where + "sample size must be positive");

  double percent_sum = 0.0;
  bool has_blank = false;
  std::vector<long long> counts(layout.size(), 0);
  std::vector<bool> seen(layout.size(), false);
  for (const auto& [label, percent] : raw.percentages) {
    if (!(percent >= 0.0 && percent <= 100.0)) {
      throw InputError(where + "percentage of '" + label + "' outside [0, 100]");
    }
    percent_sum += percent;
    if (label == kUndecidedLabel) continue;
    const auto index = layout.find(label);
    if (!index) throw InputError(where + "unknown category label '" + label + "'");
    if (seen[*index]) throw InputError(where + "category '" + label + "' listed twice");
    seen[*index] = true;
    if (*index == layout.blank_index()) has_blank = true;
    counts[*index] = std::llround(percent * static_cast<double>(raw.sample_size) / 100.0);
  }
  if (!has_blank) throw InputError(where + "missing the blank category");
  for (std::size_t k = 0; k < layout.size(); ++k) {
    if (!seen[k]) throw InputError(where + "missing category '" + layout.label(k) + "'");
  }
  if (std::fabs(percent_sum - 100.0) > kPercentSumTolerance) {
    throw InputError(where + "percentages sum to " + format_exact(percent_sum) +
                     ", outside 100 +/- " + format_exact(kPercentSumTolerance));
  }

  PollObservation obs{raw.id(), layout, std::move(counts), raw.sample_size};
  obs.validate();
  return obs;
}

RawPollRecord to_raw_record(const PollObservation& obs) {
  RawPollRecord raw;
  raw.pollster = obs.id.pollster;
  raw.date = obs.id.date;
  raw.round = obs.id.round;
  raw.scenario = obs.id.scenario;
  raw.sample_size = obs.sample_size_reported;
  const double n = static_cast<double>(obs.sample_size_reported);
  for (std::size_t k = 0; k < obs.counts.size(); ++k) {
    raw.percentages.emplace_back(obs.layout.label(k), 100.0 * static_cast<double>(obs.counts[k]) / n);
  }
  const long long undecided = obs.sample_size_reported - obs.total();
  if (undecided > 0) {
    raw.percentages.emplace_back(kUndecidedLabel, 100.0 * static_cast<double>(undecided) / n);
  }
  return raw;
}

std::vector<RawPollRecord> parse_poll_text(std::string_view text, std::string_view source) {
  std::vector<RawPollRecord> records;
  std::set<std::tuple<std::string, int, unsigned, unsigned, int, std::string, std::string>> keys;
  LineReader reader(text, source);
  std::vector<std::string_view> fields;
  while (reader.next(fields)) {
    const RecordHead head = parse_head(fields, reader);
    if (fields.size() < 6) reader.fail("record", "expected sample size and label=percent fields");

    RawPollRecord raw;
    raw.pollster = head.pollster;
    raw.date = head.date;
    raw.round = head.round;
    raw.scenario = head.scenario;
    raw.line = reader.line();
    const auto size = parse_number<long long>(fields[4]);
    if (!size || *size <= 0) reader.fail("sample-size", "sample size must be a positive integer");
    raw.sample_size = *size;

    std::set<std::string> labels;
    double sum = 0.0;
    for (std::size_t k = 5; k < fields.size(); ++k) {
      auto entry = parse_label_value(fields[k], reader);
      if (!labels.insert(entry.first).second) reader.fail(entry.first, "label listed twice");
      if (entry.second < 0.0 || entry.second > 100.0) {
        reader.fail(entry.first, "percentage must lie in [0, 100]");
      }
      sum += entry.second;
      raw.percentages.push_back(std::move(entry));
    }
    if (!labels.contains(kBlankLabel)) reader.fail(kBlankLabel, "missing the blank category");
    if (std::fabs(sum - 100.0) > kPercentSumTolerance) {
      reader.fail("percentages", "percentages sum to " + format_exact(sum) +
                                     ", outside 100 +/- " + format_exact(kPercentSumTolerance));
    }
    if (raw.scenario) {
      for (const auto* label : {&raw.scenario->first, &raw.scenario->second}) {
        if (!labels.contains(*label)) reader.fail(*label, "scenario candidate has no percentage");
      }
      if (labels.size() - labels.count(kUndecidedLabel) != 3) {
        reader.fail("percentages", "second-round record lists only the pair, blank and undecided");
      }
    }

    std::string lo = raw.scenario ? std::min(raw.scenario->first, raw.scenario->second) : "";
    std::string hi = raw.scenario ? std::max(raw.scenario->first, raw.scenario->second) : "";
    const auto key = std::make_tuple(raw.pollster, static_cast<int>(raw.date.year()),
                                     static_cast<unsigned>(raw.date.month()),
                                     static_cast<unsigned>(raw.date.day()),
                                     static_cast<int>(raw.round), lo, hi);
    if (!keys.insert(key).second) {
      reader.fail("record", "duplicate record for " + raw.pollster + " " + format_date(raw.date) +
                                " " + std::string(round_name(raw.round)) + " " +
                                format_scenario(raw.scenario));
    }
    records.push_back(std::move(raw));
  }
  return records;
}

std::vector<RawPollRecord> load_poll_file(const std::filesystem::path& path) {
  return parse_poll_text(read_text_file(path), path.string());
}

std::string format_poll_record(const RawPollRecord& raw) {
  std::ostringstream out;
  out << raw.pollster << ' ' << format_date(raw.date) << ' ' << round_name(raw.round) << ' '
      << format_scenario(raw.scenario) << ' ' << raw.sample_size;
  for (const auto& [label, percent] : raw.percentages) out << ' ' << label << '=' << format_exact(percent);
  return out.str();
}

std::string format_store(std::span<const StoreEntry> entries) {
  std::ostringstream out;
  out << "# runoff posterior store v1\n";
  for (const StoreEntry& e : entries) {
    out << e.posterior.pollster() << ' ' << format_date(e.date) << ' ' << round_name(e.round)
        << ' ' << format_scenario(e.scenario) << " scale=" << format_exact(e.scale)
        << " prior=" << prior_name(e.prior) << " polls=";
    const auto& provenance = e.posterior.provenance();
    for (std::size_t k = 0; k < provenance.size(); ++k) {
      out << (k ? "," : "") << format_date(provenance[k].date);
    }
    if (provenance.empty()) out << '-';
    const auto& layout = e.posterior.layout();
    for (std::size_t k = 0; k < layout.size(); ++k) {
      out << ' ' << layout.label(k) << '=' << format_exact(e.posterior.alpha(k));
    }
    out << '\n';
  }
  return out.str();
}

std::vector<StoreEntry> parse_store(std::string_view text, std::string_view source) {
  std::vector<StoreEntry> entries;
  LineReader reader(text, source);
  std::vector<std::string_view> fields;
  while (reader.next(fields)) {
    const RecordHead head = parse_head(fields, reader);
    if (fields.size() < 7) reader.fail("record", "expected scale, prior, polls and alpha fields");

    auto meta = [&](std::size_t k, std::string_view key) {
      const std::string_view f = fields[k];
      if (!f.starts_with(key) || f.size() <= key.size() || f[key.size()] != '=') {
        reader.fail(std::string(key), "expected " + std::string(key) + "=...");
      }
      return f.substr(key.size() + 1);
    };

    const auto scale = parse_number<double>(meta(4, "scale"));
    if (!scale || !(*scale > 0.0 && *scale <= 1.0)) reader.fail("scale", "scale must lie in (0, 1]");

    PriorKind prior = PriorKind::uniform;
    const auto prior_text = meta(5, "prior");
    if (prior_text == "jeffreys") {
      prior = PriorKind::jeffreys;
    } else if (prior_text != "uniform") {
      reader.fail("prior", "prior must be 'uniform' or 'jeffreys'");
    }

    std::vector<PollId> provenance;
    const auto polls = meta(6, "polls");
    if (polls != "-") {
      std::size_t pos = 0;
      while (pos <= polls.size()) {
        const auto comma = polls.find(',', pos);
        const auto item = polls.substr(pos, comma == std::string_view::npos ? comma : comma - pos);
        try {
          provenance.push_back({head.pollster, parse_date(item), head.round, head.scenario});
        } catch (const InputError& e) {
          reader.fail("polls", e.what());
        }
        if (comma == std::string_view::npos) break;
        pos = comma + 1;
      }
    }

    std::vector<std::string> labels;
    std::vector<double> alpha;
    for (std::size_t k = 7; k < fields.size(); ++k) {
      auto [label, value] = parse_label_value(fields[k], reader);
      labels.push_back(std::move(label));
      alpha.push_back(value);
    }
    try {
      auto layout = CategoryLayout::from_labels(std::move(labels));
      entries.push_back(StoreEntry{
          DirichletPosterior(std::move(layout), std::move(alpha), head.pollster, std::move(provenance)),
          head.round, head.scenario, head.date, *scale, prior});
    } catch (const std::exception& e) {
      reader.fail("alpha", e.what());
    }
  }
  return entries;
}

std::vector<StoreEntry> load_store(const std::filesystem::path& path) {
  return parse_store(read_text_file(path), path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open '" + path.string() + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file_atomically(const std::filesystem::path& path, std::string_view contents) {
  auto temp = path;
  temp += ".tmp";
  {
    std::ofstream out(temp, std::ios::binary | std::ios::trunc);
    if (!out) throw InputError("cannot write '" + temp.string() + "'");
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) throw InputError("write to '" + temp.string() + "' failed");
  }
  std::error_code ec;
  std::filesystem::rename(temp, path, ec);
  if (ec) {
    std::filesystem::remove(temp);
    throw InputError("cannot move '" + temp.string() + "' into place: " + ec.message());
  }
}

}  // namespace runoff
