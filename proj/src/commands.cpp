#include "runoff/commands.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <ostream>
#include <sstream>
#include <tuple>

#include "runoff/chart.hpp"
#include "runoff/error.hpp"
#include "runoff/oracle.hpp"
#include "runoff/rank_prob.hpp"

namespace runoff {

namespace {

constexpr double kOracleHardZ = 4.0;

std::string fmt10(double value) {
  char buffer[32];
  std::snprintf(buffer, sizeof buffer, "%.10g", value);
  return buffer;
}

std::string csv_safe(std::string text) {
  std::replace(text.begin(), text.end(), ',', ';');
  std::replace(text.begin(), text.end(), '\n', ' ');
  return text;
}

std::string file_stem(const std::string& pollster) {
  std::string stem;
  for (char c : pollster) {
    const bool keep = std::isalnum(static_cast<unsigned char>(c)) || c == '-' || c == '_';
    stem += keep ? c : '_';
  }
  return stem.empty() ? "pollster" : stem;
}

std::string pair_label(const CategoryLayout& layout, std::size_t i, std::size_t j) {
  return layout.label(i) + "/" + layout.label(j);
}

std::string fallback_name(Fallback f) { return f == Fallback::half ? "half" : "skip"; }

// Unordered scenario pair as sorted labels.
std::pair<std::string, std::string> chain_key(const ScenarioPair& pair) {
  return std::minmax(pair.first, pair.second);
}

PollObservation observation_at(const RawPollRecord& raw, const CategoryLayout& layout) {
  try {
    return to_observation(raw, layout);
  } catch (const InputError& e) {
    throw InputError("line " + std::to_string(raw.line) + ": " + e.what());
  }
}

void run_chain(const std::vector<const RawPollRecord*>& records, const CategoryLayout& layout,
               Round round, const std::optional<ScenarioPair>& scenario, const RunConfig& config,
               std::vector<StoreEntry>& out) {
  const std::string& pollster = records.front()->pollster;
  DirichletPosterior post = noninformative_prior(layout, config.prior, pollster);
  for (std::size_t k = 0; k < records.size(); ++k) {
    PollObservation obs = observation_at(*records[k], layout);
    obs.id.scenario = scenario;
    if (k > 0) post = scale_forward(post, config.scale);
    post = update(post, obs);
    out.push_back({post, round, scenario, records[k]->date, config.scale, config.prior});
  }
}

struct PollsterStore {
  std::vector<const StoreEntry*> first_round;
  std::map<std::pair<std::string, std::string>, std::vector<const StoreEntry*>> scenarios;
};

PollsterStore index_store(const std::vector<StoreEntry>& store, const std::string& pollster) {
  PollsterStore index;
  for (const StoreEntry& e : store) {
    if (e.posterior.pollster() != pollster) continue;
    if (e.round == Round::first) {
      index.first_round.push_back(&e);
    } else {
      index.scenarios[chain_key(*e.scenario)].push_back(&e);
    }
  }
  auto by_date = [](const StoreEntry* a, const StoreEntry* b) { return a->date < b->date; };
  std::stable_sort(index.first_round.begin(), index.first_round.end(), by_date);
  for (auto& [key, chain] : index.scenarios) std::stable_sort(chain.begin(), chain.end(), by_date);
  return index;
}

ElectionReport report_for_entry(const StoreEntry& entry, const PollsterStore& index,
                                const RunConfig& config) {
  ScenarioTable table;
  for (const auto& [key, chain] : index.scenarios) {
    const StoreEntry* latest = nullptr;
    for (const StoreEntry* e : chain) {
      if (e->date <= entry.date) latest = e;
    }
    if (latest != nullptr) table.insert(latest->posterior);
  }
  ElectionReport report = full_report(entry.posterior, table, config.quadrature, config.fallback);
  report.date = entry.date;
  return report;
}

std::vector<StoreEntry> load_nonempty_store(const RunConfig& config) {
  if (config.store.empty()) throw InputError("--store is required");
  auto store = load_store(config.store);
  if (store.empty()) throw InputError("store '" + config.store.string() + "' holds no posteriors");
  return store;
}

std::string single_pollster(const std::vector<StoreEntry>& store, const RunConfig& config) {
  const auto pollsters = store_pollsters(store);
  if (config.pollster) {
    if (std::find(pollsters.begin(), pollsters.end(), *config.pollster) == pollsters.end()) {
      throw InputError("store has no posteriors for pollster '" + *config.pollster + "'");
    }
    return *config.pollster;
  }
  if (pollsters.size() != 1) {
    throw InputError("store holds several pollsters; choose one with --pollster");
  }
  return pollsters.front();
}

// The report at config.date, or at the latest first-round snapshot.
ElectionReport selected_report(const std::vector<StoreEntry>& store, const std::string& pollster,
                               const RunConfig& config) {
  const PollsterStore index = index_store(store, pollster);
  if (index.first_round.empty()) {
    throw InputError("pollster '" + pollster + "' has no first-round posterior");
  }
  const StoreEntry* chosen = index.first_round.back();
  if (config.date) {
    chosen = nullptr;
    for (const StoreEntry* e : index.first_round) {
      if (e->date == *config.date) chosen = e;
    }
    if (chosen == nullptr) {
      throw InputError("no first-round posterior of '" + pollster + "' dated " +
                       format_date(*config.date));
    }
  }
  return report_for_entry(*chosen, index, config);
}

std::string failure_note(const ElectionReport& report, const std::string& subject_part) {
  std::string note;
  for (const KernelFailure& f : report.failures) {
    const auto space = f.kernel.find(' ');
    const std::string subject = f.kernel.substr(space + 1);
    std::stringstream parts(subject);
    std::string part;
    bool match = subject == subject_part;
    while (!match && std::getline(parts, part, '/')) match = part == subject_part;
    if (match) note += (note.empty() ? "" : "; ") + f.kernel + ": " + f.detail;
  }
  return csv_safe(note);
}

std::vector<Date> report_dates(const std::vector<ElectionReport>& reports) {
  std::vector<Date> dates;
  for (const auto& r : reports) dates.push_back(r.date.value_or(Date{}));
  return dates;
}

}  // namespace

void RunConfig::validate(bool oracle) const {
  if (!(scale > 0.0 && scale <= 1.0)) throw DomainError("--scale must lie in (0, 1]");
  quadrature.validate();
  if (!(quadrature.rel_tol > 0.0)) throw DomainError("--rel-tol must be positive");
  if (oracle && draws < kMinOracleDraws) {
    throw DomainError("--draws must be at least " + std::to_string(kMinOracleDraws));
  }
}

std::vector<StoreEntry> build_chains(const std::vector<RawPollRecord>& records,
                                     const RunConfig& config) {
  config.validate();
  std::vector<std::string> pollsters;
  for (const RawPollRecord& r : records) {
    if (config.pollster && r.pollster != *config.pollster) continue;
    if (std::find(pollsters.begin(), pollsters.end(), r.pollster) == pollsters.end()) {
      pollsters.push_back(r.pollster);
    }
  }
  if (pollsters.empty()) {
    throw InputError(config.pollster ? "no poll records for pollster '" + *config.pollster + "'"
                                     : std::string("no poll records"));
  }

  std::vector<StoreEntry> entries;
  for (const std::string& pollster : pollsters) {
    std::vector<const RawPollRecord*> first;
    std::map<std::pair<std::string, std::string>, std::vector<const RawPollRecord*>> scenario;
    for (const RawPollRecord& r : records) {
      if (r.pollster != pollster) continue;
      if (r.round == Round::first) {
        first.push_back(&r);
      } else {
        scenario[chain_key(*r.scenario)].push_back(&r);
      }
    }
    auto by_date = [](const RawPollRecord* a, const RawPollRecord* b) { return a->date < b->date; };

    std::optional<CategoryLayout> layout;
    if (!first.empty()) {
      std::stable_sort(first.begin(), first.end(), by_date);
      try {
        layout = layout_from_record(*first.front());
      } catch (const InputError& e) {
        throw InputError("line " + std::to_string(first.front()->line) + ": " + e.what());
      }
      run_chain(first, *layout, Round::first, std::nullopt, config, entries);
    }

    // Scenario chains in first-round layout order; pairs with unknown
    // candidates go last, alphabetically.
    auto rank = [&](const std::string& label) {
      const auto index = layout ? layout->find(label) : std::nullopt;
      return index.value_or(std::numeric_limits<std::size_t>::max());
    };
    std::vector<std::tuple<std::size_t, std::size_t, ScenarioPair>> order;
    for (const auto& [key, chain] : scenario) {
      ScenarioPair pair{key.first, key.second};
      if (rank(pair.second) < rank(pair.first)) std::swap(pair.first, pair.second);
      order.emplace_back(rank(pair.first), rank(pair.second), pair);
    }
    std::sort(order.begin(), order.end(), [](const auto& a, const auto& b) {
      return std::tie(std::get<0>(a), std::get<1>(a), std::get<2>(a).first, std::get<2>(a).second) <
             std::tie(std::get<0>(b), std::get<1>(b), std::get<2>(b).first, std::get<2>(b).second);
    });
    for (const auto& [ra, rb, pair] : order) {
      auto chain = scenario.at(chain_key(pair));
      std::stable_sort(chain.begin(), chain.end(), by_date);
      run_chain(chain, scenario_layout(pair.first, pair.second), Round::second, pair, config,
                entries);
    }
  }
  return entries;
}

std::vector<std::string> store_pollsters(const std::vector<StoreEntry>& store) {
  std::vector<std::string> pollsters;
  for (const StoreEntry& e : store) {
    const auto& p = e.posterior.pollster();
    if (std::find(pollsters.begin(), pollsters.end(), p) == pollsters.end()) pollsters.push_back(p);
  }
  return pollsters;
}

std::vector<ElectionReport> reports_for_pollster(const std::vector<StoreEntry>& store,
                                                 const std::string& pollster,
                                                 const RunConfig& config) {
  const PollsterStore index = index_store(store, pollster);
  std::vector<ElectionReport> reports;
  for (const StoreEntry* entry : index.first_round) {
    reports.push_back(report_for_entry(*entry, index, config));
  }
  return reports;
}

std::string top2_table(const std::vector<ElectionReport>& reports) {
  std::ostringstream out;
  out << "date,pair,p_top2,note\n";
  for (const ElectionReport& r : reports) {
    const std::string date = r.date ? format_date(*r.date) : "";
    for (const auto& [pair, p] : r.p_top2) {
      const std::string label = pair_label(r.layout, pair.first, pair.second);
      out << date << ',' << label << ',' << fmt10(p) << ',' << failure_note(r, label) << '\n';
    }
  }
  return out.str();
}

std::string elected_table(const std::vector<ElectionReport>& reports) {
  std::ostringstream out;
  out << "date,candidate,p_elected,note\n";
  for (const ElectionReport& r : reports) {
    const std::string date = r.date ? format_date(*r.date) : "";
    for (std::size_t i : r.layout.candidate_indices()) {
      const std::string& label = r.layout.label(i);
      out << date << ',' << label << ',' << fmt10(r.p_elected[i]) << ','
          << failure_note(r, label) << '\n';
    }
  }
  return out.str();
}

std::string scenario_table(const std::vector<ElectionReport>& reports) {
  std::ostringstream out;
  out << "date,pair,source\n";
  for (const ElectionReport& r : reports) {
    const std::string date = r.date ? format_date(*r.date) : "";
    for (const auto& [pair, p] : r.p_top2) {
      std::string source = "scenario";
      for (const MissingScenario& m : r.missing_scenarios) {
        if (m.pair == pair) source = "fallback=" + fallback_name(m.fallback);
      }
      out << date << ',' << pair_label(r.layout, pair.first, pair.second) << ',' << source << '\n';
    }
  }
  return out.str();
}

int cmd_update(const RunConfig& config, std::ostream& out) {
  config.validate();
  if (config.poll_file.empty()) throw InputError("--polls is required");
  if (config.store.empty()) throw InputError("--store is required");
  const auto records = load_poll_file(config.poll_file);
  const auto entries = build_chains(records, config);
  if (config.store.has_parent_path()) std::filesystem::create_directories(config.store.parent_path());
  write_file_atomically(config.store, format_store(entries));
  out << "wrote " << entries.size() << " posterior snapshots to " << config.store.string() << '\n';
  return kExitOk;
}

int cmd_report(const RunConfig& config, std::ostream& out) {
  config.validate();
  if (config.out_dir.empty()) throw InputError("--out is required");
  const auto store = load_nonempty_store(config);
  std::vector<std::string> pollsters =
      config.pollster ? std::vector<std::string>{single_pollster(store, config)}
                      : store_pollsters(store);

  struct Output {
    std::filesystem::path path;
    std::string contents;
  };
  std::vector<Output> outputs;
  bool failed = false;
  for (const std::string& pollster : pollsters) {
    const auto reports = reports_for_pollster(store, pollster, config);
    if (reports.empty()) continue;
    const std::string stem = file_stem(pollster);
    const auto dir = config.out_dir;
    outputs.push_back({dir / (stem + "_top2.csv"), top2_table(reports)});
    outputs.push_back({dir / (stem + "_elected.csv"), elected_table(reports)});
    outputs.push_back({dir / (stem + "_scenarios.csv"), scenario_table(reports)});
    for (const auto& r : reports) failed = failed || !r.failures.empty();

    if (config.charts) {
      const auto dates = report_dates(reports);
      std::vector<ChartSeries> pairs;
      for (const auto& [pair, p] : reports.front().p_top2) {
        ChartSeries s{pair_label(reports.front().layout, pair.first, pair.second), {}};
        double peak = 0.0;
        for (const auto& r : reports) {
          s.values.push_back(r.p_top2.at(pair));
          peak = std::max(peak, s.values.back());
        }
        if (peak >= 1e-3) pairs.push_back(std::move(s));
      }
      std::vector<ChartSeries> elected;
      for (std::size_t i : reports.front().layout.candidate_indices()) {
        ChartSeries s{reports.front().layout.label(i), {}};
        for (const auto& r : reports) s.values.push_back(r.p_elected[i]);
        elected.push_back(std::move(s));
      }
      outputs.push_back({dir / (stem + "_top2.svg"),
                         render_line_chart(pollster + ": P(pair holds the top two)", dates, pairs)});
      outputs.push_back({dir / (stem + "_elected.svg"),
                         render_line_chart(pollster + ": P(elected)", dates, elected)});
    }
  }
  if (outputs.empty()) throw InputError("store holds no first-round posteriors to report");

  std::filesystem::create_directories(config.out_dir);
  for (const Output& o : outputs) {
    write_file_atomically(o.path, o.contents);
    out << "wrote " << o.path.string() << '\n';
  }
  return failed ? kExitConvergence : kExitOk;
}

int cmd_elect(const RunConfig& config, std::ostream& out) {
  config.validate();
  const auto store = load_nonempty_store(config);
  const auto report = selected_report(store, single_pollster(store, config), config);
  out << "# pollster " << report.pollster << " date "
      << (report.date ? format_date(*report.date) : "-") << '\n';
  out << "# p_no_first_round_winner " << fmt10(report.p_no_first_round_winner) << '\n';
  out << "# fallback pairs " << report.missing_scenarios.size() << " of " << report.p_top2.size()
      << " (fallback=" << fallback_name(config.fallback) << ")\n";
  out << "candidate,p_majority,p_elected\n";
  for (std::size_t i : report.layout.candidate_indices()) {
    out << report.layout.label(i) << ',' << fmt10(report.p_majority[i]) << ','
        << fmt10(report.p_elected[i]) << '\n';
  }
  for (const auto& f : report.failures) out << "# failure " << f.kernel << ": " << f.detail << '\n';
  return report.failures.empty() ? kExitOk : kExitConvergence;
}

int cmd_top2(const RunConfig& config, std::ostream& out) {
  config.validate();
  const auto store = load_nonempty_store(config);
  const auto report = selected_report(store, single_pollster(store, config), config);
  out << "pair,p_top2\n";
  for (const auto& [pair, p] : report.p_top2) {
    out << pair_label(report.layout, pair.first, pair.second) << ',' << fmt10(p) << '\n';
  }
  for (const auto& f : report.failures) out << "# failure " << f.kernel << ": " << f.detail << '\n';
  return report.failures.empty() ? kExitOk : kExitConvergence;
}

int cmd_oracle(const RunConfig& config, std::ostream& out) {
  config.validate(true);
  const auto store = load_nonempty_store(config);
  const std::string pollster = single_pollster(store, config);
  const ElectionReport report = selected_report(store, pollster, config);
  const CategoryLayout& layout = report.layout;

  // Posterior behind the report: first-round snapshot at the report date.
  const PollsterStore index = index_store(store, pollster);
  const StoreEntry* first = nullptr;
  for (const StoreEntry* e : index.first_round) {
    if (e->date == report.date) first = e;
  }

  std::ostringstream table;
  table << "kernel,subject,quadrature,oracle,std_error,z\n";
  double worst = 0.0;
  auto row = [&](const std::string& kernel, const std::string& subject, double quad,
                 const OracleEstimate& mc) {
    const double z = z_score(quad, mc);
    worst = std::max(worst, std::fabs(z));
    table << kernel << ',' << subject << ',' << fmt10(quad) << ',' << fmt10(mc.estimate) << ','
          << fmt10(mc.std_error) << ',' << fmt10(z) << '\n';
  };

  const std::uint64_t first_seed = substream_seed(config.seed, 0);
  const RankTally tally = simulate_ranks(first->posterior, config.draws, first_seed);
  for (std::size_t i : layout.candidate_indices()) {
    row("majority", layout.label(i), report.p_majority[i],
        OracleEstimate::from_hits(tally.majority[i], config.draws, first_seed));
  }
  for (const auto& [pair, p] : report.p_top2) {
    row("top2", pair_label(layout, pair.first, pair.second), p,
        OracleEstimate::from_hits(tally.top2_hits(pair.first, pair.second), config.draws,
                                  first_seed));
  }

  std::uint64_t stream = 1;
  for (const auto& [key, chain] : index.scenarios) {
    const StoreEntry* latest = nullptr;
    for (const StoreEntry* e : chain) {
      if (e->date <= *report.date) latest = e;
    }
    if (latest == nullptr) continue;
    const auto& s = latest->posterior;
    const auto i = layout.find(s.layout().label(0));
    const auto j = layout.find(s.layout().label(1));
    if (!i || !j) continue;
    const auto quad = report.p_beats.find({*i, *j});
    if (quad == report.p_beats.end()) continue;
    const std::uint64_t seed = substream_seed(config.seed, stream++);
    const RankTally t = simulate_ranks(s, config.draws, seed);
    row("beats", pair_label(s.layout(), 0, 1), quad->second,
        OracleEstimate::from_hits(t.beats_hits(0, 1), config.draws, seed));
  }

  if (config.out_dir.empty()) {
    out << table.str();
  } else {
    std::filesystem::create_directories(config.out_dir);
    const auto path = config.out_dir / (file_stem(pollster) + "_oracle.csv");
    write_file_atomically(path, table.str());
    out << "wrote " << path.string() << '\n';
  }
  out << "# max |z| " << fmt10(worst) << '\n';
  if (!report.failures.empty()) return kExitConvergence;
  return worst > kOracleHardZ ? kExitOracle : kExitOk;
}

int run_guarded(const std::function<int()>& command, std::ostream& err) {
  try {
    return command();
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const InvariantError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConvergence;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
}

}  // namespace runoff
