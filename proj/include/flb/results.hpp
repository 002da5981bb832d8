#pragma once

// Result files written by the CLI: per-iteration prices, per-scheme
// profits, per-session predictions and the equilibrium as JSON.

#include <filesystem>
#include <string>
#include <vector>

#include "flb/baselines.hpp"
#include "flb/ne_solver.hpp"
#include "flb/scenario.hpp"

namespace flb::results {

struct PredictionRecord {
  int ue = 0;
  std::size_t session = 0;  ///< 1-based
  double load_state_hz = 0.0;
  double gain_state = 0.0;
  double training_energy = 0.0;
  double comm_energy = 0.0;
  double psi = 0.0;

  friend bool operator==(const PredictionRecord&, const PredictionRecord&) = default;
};

struct ResultBundle {
  solver::NeOutcome ne;
  std::vector<baselines::ProfitReport> reports;
  std::vector<PredictionRecord> predictions;
};

/// Per-session energy predictions for every UE, costed at the accuracy the
/// outcome bought from it (the reference accuracy for UEs left out).
std::vector<PredictionRecord> prediction_records(std::span<const solver::GameUe> ues,
                                                 const MoContract& contract,
                                                 const solver::NeOutcome& ne,
                                                 IterationModel model);

std::string render_prices_csv(const solver::NeOutcome& ne);
std::string render_profits_csv(std::span<const baselines::ProfitReport> reports);
std::string render_predictions_csv(std::span<const PredictionRecord> records);
/// Every double rendered with 17 significant digits.
std::string render_outcome_json(const solver::NeOutcome& ne);
solver::NeOutcome parse_outcome_json(const std::string& text);

/// Writes prices.csv, profits.csv, predictions.csv and outcome.json into
/// `dir`, creating it if needed. Throws IoError naming the failing path.
void emit_results(const ResultBundle& bundle, const std::filesystem::path& dir);

void write_text(const std::filesystem::path& path, const std::string& text);
std::string read_text(const std::filesystem::path& path);

}  // namespace flb::results
