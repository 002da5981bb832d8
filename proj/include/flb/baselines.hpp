#pragma once

// The two comparison pricing schemes (a load-unaware game and independent
// cost-plus pricing) and the harness that books all three schemes' profits
// against the same load-aware energy model.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "flb/errors.hpp"
#include "flb/ne_solver.hpp"
#include "flb/scenario.hpp"

namespace flb::baselines {

enum class SchemeId { tla_gts, pure_gts, ilps };

/// "TLA_GTS", "PURE_GTS" or "ILPS".
const char* to_string(SchemeId id) noexcept;

struct UeProfit {
  int id = 0;
  double profit = 0.0;   ///< J
  double payment = 0.0;  ///< J
  double theta = 0.0;    ///< purchased accuracy, 0 when not participating
  bool participating = false;
};

struct ProfitReport {
  SchemeId scheme = SchemeId::tla_gts;
  std::vector<UeProfit> ues;  ///< one entry per scenario UE, scenario order
  double mo_payment = 0.0;
  std::string scenario_id;
  std::uint64_t config_hash = 0;
  /// Digest of the forecasts the profits were booked against.
  std::uint64_t prediction_digest = 0;
};

/// A scheme failed; the message carries the scheme name.
class SchemeFailure : public Error {
 public:
  SchemeFailure(SchemeId scheme, const std::string& what);
  SchemeId scheme() const noexcept { return scheme_; }

 private:
  SchemeId scheme_;
};

/// The elimination game played on forecasts with the background load
/// removed; profits and cap checks in the result use the real forecasts.
solver::NeOutcome pure_gts(std::span<const solver::GameUe> ues, const MoContract& contract,
                           const solver::SolverConfig& config);

/// Accuracy at which ILPS quotes are costed.
double ilps_reference_theta(const MoContract& contract);

/// Cost-plus quotes (1 + markup) psi_t / I at the reference accuracy, each
/// UE on its own.
game::PriceProfile ilps(std::span<const solver::GameUe> ues, const MoContract& contract,
                        double markup, IterationModel model = IterationModel::taylor);

/// FNV-1a over every number of the forecasts.
std::uint64_t prediction_digest(std::span<const solver::GameUe> ues);
std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed = 0xcbf29ce484222325ULL);

struct Comparison {
  solver::NeOutcome tla_gts;
  solver::NeOutcome pure_gts;
  game::PriceProfile ilps_prices;
  game::PurchaseProfile ilps_theta;
  std::vector<ProfitReport> reports;  ///< TLA_GTS, PURE_GTS, ILPS
};

/// Runs every scheme on one shared set of forecasts.
Comparison run_comparison(const Scenario& scenario, const solver::SolverConfig& config,
                          double markup);

/// Reports only; empty when the scenario has no UEs.
std::vector<ProfitReport> compare_schemes(const Scenario& scenario,
                                          const solver::SolverConfig& config, double markup);

}  // namespace flb::baselines
