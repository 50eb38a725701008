// runoff: Bayesian two-round election probabilities from sequential polls.
//
//   runoff update --polls polls.txt --store store.txt [--pollster NAME]
//   runoff report --store store.txt --out reports/ [--charts]
//   runoff elect  --store store.txt [--date YYYY-MM-DD]
//   runoff top2   --store store.txt [--date YYYY-MM-DD]
//   runoff oracle --store store.txt [--seed N] [--draws N] [--out DIR]
//
// Options may also come from a TOML/INI file given with --config; flags on
// the command line take precedence over the file.

#include <iostream>
#include <map>
#include <string>

#include "CLI11.hpp"
#include "runoff/commands.hpp"
#include "runoff/ingestion.hpp"

int main(int argc, char** argv) {
  using namespace runoff;

  CLI::App app{"Exact rank probabilities for two-round elections from poll data"};
  app.set_config("--config", "", "Optional TOML/INI file with option defaults");
  app.require_subcommand(1);
  app.fallthrough();

  RunConfig config;
  std::string poll_file;
  std::string store;
  std::string out_dir;
  std::string pollster;
  std::string date;
  std::string prior = "uniform";
  std::string fallback = "half";

  app.add_option("--polls", poll_file, "Poll input file");
  app.add_option("--store", store, "Posterior store file");
  app.add_option("--pollster", pollster, "Restrict to one pollster");
  app.add_option("--prior", prior, "Prior for the first poll of each chain")
      ->check(CLI::IsMember({"uniform", "jeffreys"}))
      ->capture_default_str();
  app.add_option("--scale", config.scale, "Factor w carrying a posterior forward as the next prior")
      ->check(CLI::Range(0.0, 1.0))
      ->capture_default_str();
  app.add_option("--abs-tol", config.quadrature.abs_tol, "Quadrature absolute tolerance")
      ->capture_default_str();
  app.add_option("--rel-tol", config.quadrature.rel_tol, "Quadrature relative tolerance")
      ->capture_default_str();
  app.add_option("--fallback", fallback, "Head-to-head probability for pairs without a scenario")
      ->check(CLI::IsMember({"half", "skip"}))
      ->capture_default_str();
  app.add_option("--out", out_dir, "Output directory");
  app.add_option("--seed", config.seed, "Oracle seed")->capture_default_str();
  app.add_option("--draws", config.draws, "Oracle draws per posterior")->capture_default_str();
  app.add_option("--date", date, "Poll date for elect, top2 and oracle (default: latest)");
  app.add_flag("--charts", config.charts, "Also write SVG line charts with the report");

  std::map<std::string, int (*)(const RunConfig&, std::ostream&)> commands = {
      {"update", &cmd_update}, {"report", &cmd_report}, {"elect", &cmd_elect},
      {"top2", &cmd_top2},     {"oracle", &cmd_oracle}};
  app.add_subcommand("update", "Fold the poll file into posterior chains and write the store");
  app.add_subcommand("report", "Write top-two and election probability tables for every date");
  app.add_subcommand("elect", "Print election probabilities for one date");
  app.add_subcommand("top2", "Print top-two pair probabilities for one date");
  app.add_subcommand("oracle", "Compare quadrature with Monte Carlo for one date");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitInput;
  }

  return run_guarded(
      [&] {
        config.poll_file = poll_file;
        config.store = store;
        config.out_dir = out_dir;
        if (!pollster.empty()) config.pollster = pollster;
        if (!date.empty()) config.date = parse_date(date);
        config.prior = prior == "jeffreys" ? PriorKind::jeffreys : PriorKind::uniform;
        config.fallback = fallback == "skip" ? Fallback::skip : Fallback::half;
        const auto* sub = app.get_subcommands().front();
        return commands.at(sub->get_name())(config, std::cout);
      },
      std::cerr);
}
