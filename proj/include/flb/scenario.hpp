#pragma once

// Scenario files: a YAML document describing the MO contract, solver
// settings, the shared channel model and every candidate UE.

#include <cstddef>
#include <filesystem>
#include <string>
#include <vector>

#include "flb/cost_model.hpp"
#include "flb/markov.hpp"
#include "flb/ne_solver.hpp"

namespace flb {

/// A transition matrix given inline, or a slot trace it is estimated from.
struct ChainSource {
  std::vector<std::vector<double>> transition;  ///< empty when `trace` is used
  std::vector<std::size_t> trace;

  bool from_trace() const noexcept { return transition.empty(); }
  friend bool operator==(const ChainSource&, const ChainSource&) = default;
};

struct ChannelSpec {
  double gain_min = 0.0;
  double gain_max = 0.0;
  std::size_t states = 0;
  std::size_t observation_slots = 100;  ///< X, slots per estimation window
  /// Empty means uniform.
  std::vector<double> initial_distribution;
  ChainSource source;

  friend bool operator==(const ChannelSpec&, const ChannelSpec&) = default;
};

struct UeSpec {
  int id = 0;
  double nu = 0.0;
  double cycles_per_sample = 0.0;
  double dataset_size = 0.0;
  double eta = 1.0;
  double f_max = 0.0;
  double load_max = 0.0;  ///< top background-load level, Hz
  std::size_t load_states = 0;
  std::size_t initial_load_state = 0;
  ChainSource source;

  friend bool operator==(const UeSpec&, const UeSpec&) = default;
};

struct Scenario {
  std::string name;
  MoContract contract;
  solver::SolverConfig solver;
  double ilps_markup = 0.1;
  ChannelSpec channel;
  std::vector<UeSpec> ues;

  friend bool operator==(const Scenario&, const Scenario&) = default;
};

/// Reads and fully validates a scenario. Throws IoError if the file cannot
/// be read, ParseError for malformed or unknown entries and ValidationError
/// for values that break an invariant.
Scenario load_scenario(const std::filesystem::path& path);
/// Same, from text; `source` names the origin in error messages.
Scenario parse_scenario(const std::string& text, const std::string& source = "<string>");

/// Renders a scenario so that parse_scenario gives it back unchanged.
std::string render_scenario(const Scenario& scenario);
void save_scenario(const Scenario& scenario, const std::filesystem::path& path);

/// Checks every cross-field invariant; throws ValidationError.
void validate_scenario(const Scenario& scenario);

markov::MarkovChain channel_chain(const ChannelSpec& channel);
markov::Distribution channel_initial(const ChannelSpec& channel);
UeProfile ue_profile(const UeSpec& ue, const ChannelSpec& channel);

/// Profiles plus their session forecasts, in scenario order.
std::vector<solver::GameUe> prepare_game(const Scenario& scenario);

}  // namespace flb
