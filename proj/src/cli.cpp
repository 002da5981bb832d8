#include "flb/cli.hpp"

#include <algorithm>
#include <charconv>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "flb/baselines.hpp"
#include "flb/errors.hpp"
#include "flb/results.hpp"
#include "flb/scenario.hpp"

namespace flb {
namespace {

struct Overrides {
  std::string mode;
  std::optional<double> xi;
};

void apply(const Overrides& o, solver::SolverConfig& cfg) {
  if (o.mode == "printed") cfg.mode = game::MoMode::printed;
  if (o.mode == "derived") cfg.mode = game::MoMode::derived;
  if (o.xi) cfg.xi = *o.xi;
}

std::string shortest(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::vector<std::size_t> read_trace(const std::string& path) {
  std::string text = results::read_text(path);
  std::replace(text.begin(), text.end(), ',', ' ');
  std::replace(text.begin(), text.end(), '[', ' ');
  std::replace(text.begin(), text.end(), ']', ' ');
  std::istringstream in(text);
  std::vector<std::size_t> slots;
  std::string token;
  while (in >> token) {
    std::size_t v = 0;
    const auto [end, ec] = std::from_chars(token.data(), token.data() + token.size(), v);
    if (ec != std::errc() || end != token.data() + token.size())
      throw ParseError(path, 1, 1, fmt::format("'{}' is not a state index", token));
    slots.push_back(v);
  }
  return slots;
}

std::string summary(const solver::NeOutcome& ne) {
  return fmt::format("converged={} iterations={} rounds={} infeasible_contract={} ues=[{}] "
                     "eliminated=[{}]",
                     ne.converged, ne.iterations, ne.rounds, ne.infeasible_contract,
                     fmt::join(ne.ue_ids, ","), fmt::join(ne.eliminated_ues, ","));
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Task-load-aware pricing game for federated learning", "flbertrand");
  app.require_subcommand(1);

  std::string scenario_path;
  std::string out_dir;
  Overrides overrides;
  std::optional<double> markup;
  const auto modes = CLI::IsMember({"printed", "derived"});

  auto* simulate = app.add_subcommand("simulate", "Run the elimination game and write all results");
  simulate->add_option("--scenario", scenario_path, "Scenario file")->required();
  simulate->add_option("--out", out_dir, "Output directory")->required();
  simulate->add_option("--mode", overrides.mode, "MO response form")->check(modes);
  simulate->add_option("--xi", overrides.xi, "Stop-rule ratio");
  simulate->add_option("--markup", markup, "ILPS markup");

  auto* ne_solve = app.add_subcommand("ne-solve", "Best-response iteration only; prints the trajectory");
  ne_solve->add_option("--scenario", scenario_path, "Scenario file")->required();
  ne_solve->add_option("--mode", overrides.mode, "MO response form")->check(modes);
  ne_solve->add_option("--xi", overrides.xi, "Stop-rule ratio");
  ne_solve->add_option("--out", out_dir, "Write prices.csv and outcome.json here");

  std::string trace_path;
  std::size_t states = 0;
  std::string kind = "load";
  auto* estimate = app.add_subcommand("estimate-mc", "Estimate a transition matrix from a trace");
  estimate->add_option("--trace", trace_path, "File of state indices")->required();
  estimate->add_option("--states", states, "Number of states")->required()->check(
      CLI::Range(std::size_t{2}, std::size_t{1} << 20));
  estimate->add_option("--kind", kind, "load or gain")->check(CLI::IsMember({"load", "gain"}));

  auto* compare = app.add_subcommand("compare", "Profits of all three pricing schemes as CSV");
  compare->add_option("--scenario", scenario_path, "Scenario file")->required();
  compare->add_option("--markup", markup, "ILPS markup");
  compare->add_option("--mode", overrides.mode, "MO response form")->check(modes);
  compare->add_option("--out", out_dir, "Write profits.csv here");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  if (estimate->parsed()) {
    std::vector<std::size_t> slots;
    try {
      slots = read_trace(trace_path);
      const auto space = kind == "load"
                             ? markov::discretize(markov::StateKind::load, 0.0, 1.0, states)
                             : markov::discretize(markov::StateKind::gain, 1.0, 2.0, states);
      const auto chain = markov::estimate_stp(space, {slots, static_cast<double>(slots.size())});
      std::string text = "[";
      for (Eigen::Index r = 0; r < chain.stp().rows(); ++r) {
        text += r ? ",[" : "[";
        for (Eigen::Index c = 0; c < chain.stp().cols(); ++c)
          text += (c ? "," : "") + shortest(chain.stp()(r, c));
        text += "]";
      }
      out << text << "]\n";
      return kExitOk;
    } catch (const Error& e) {
      err << "error: " << e.what() << "\n";
      return kExitLoad;
    }
  }

  Scenario scenario;
  try {
    scenario = load_scenario(scenario_path);
    apply(overrides, scenario.solver);
    if (markup) scenario.ilps_markup = *markup;
    validate_scenario(scenario);
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitLoad;
  }

  try {
    if (ne_solve->parsed()) {
      const auto ues = prepare_game(scenario);
      if (ues.empty()) throw InvalidArgument("scenario has no UEs");
      const auto ne = solver::find_ne(ues, scenario.contract, scenario.solver);
      if (out_dir.empty()) {
        out << results::render_prices_csv(ne);
        err << summary(ne) << "\n";
      } else {
        std::filesystem::create_directories(out_dir);
        results::write_text(std::filesystem::path(out_dir) / "prices.csv",
                            results::render_prices_csv(ne));
        results::write_text(std::filesystem::path(out_dir) / "outcome.json",
                            results::render_outcome_json(ne));
        out << summary(ne) << "\n";
      }
      return kExitOk;
    }

    const auto cmp = baselines::run_comparison(scenario, scenario.solver, scenario.ilps_markup);
    if (compare->parsed()) {
      const auto csv = results::render_profits_csv(cmp.reports);
      if (out_dir.empty()) {
        out << csv;
      } else {
        std::filesystem::create_directories(out_dir);
        results::write_text(std::filesystem::path(out_dir) / "profits.csv", csv);
      }
      return kExitOk;
    }

    const auto ues = prepare_game(scenario);
    results::ResultBundle bundle{
        .ne = cmp.tla_gts,
        .reports = cmp.reports,
        .predictions = results::prediction_records(ues, scenario.contract, cmp.tla_gts,
                                                   scenario.solver.energy_iterations)};
    results::emit_results(bundle, out_dir);
    out << summary(bundle.ne) << "\n";
    return kExitOk;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
}

int run_cli(int argc, const char* const* argv) {
  std::vector<std::string> args(argv + std::min(argc, 1), argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace flb
