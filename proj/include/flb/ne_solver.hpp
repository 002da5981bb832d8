#pragma once

// Best-response iteration to the Nash equilibrium of the pricing game, the
// UE-elimination loop built on top of it, and numeric oracles used to check
// the closed forms.

#include <cstddef>
#include <functional>
#include <map>
#include <optional>
#include <span>
#include <vector>

#include "flb/bertrand.hpp"
#include "flb/cost_model.hpp"

namespace flb::solver {

enum class InitialPricing { break_even, zeros, explicit_values };

/// How a UE turns the closed-form session price into a full price vector.
///  - aggregate: the closed form applied to the session-summed constants
///    gives the total that zeroes the UE's utility gradient; the total is
///    spread so that each session's price minus its background-load slope is
///    equal.
///  - sequential: the closed form applied session by session, each seeing
///    the UE's latest prices for the other sessions.
enum class SessionUpdate { aggregate, sequential };

const char* to_string(InitialPricing p) noexcept;
const char* to_string(SessionUpdate u) noexcept;

struct SolverConfig {
  double xi = 0.01;  ///< gradient-ratio stop threshold, in (0, 1)
  std::size_t max_iterations = 500;
  game::MoMode mode = game::MoMode::printed;
  InitialPricing initial_pricing = InitialPricing::break_even;
  /// Starting prices by UE id, used with InitialPricing::explicit_values.
  std::map<int, std::vector<double>> initial_prices;
  SessionUpdate session_update = SessionUpdate::aggregate;
  /// Iteration count feeding energy and profit accounting.
  IterationModel energy_iterations = IterationModel::taylor;

  void validate() const;
  friend bool operator==(const SolverConfig&, const SolverConfig&) = default;
};

/// One UE as seen by the game: its profile and the per-session forecast it
/// prices against.
struct GameUe {
  UeProfile profile;
  SessionForecast forecast;
};

struct IterationRecord {
  std::size_t iteration = 0;  ///< 1-based
  game::PriceProfile prices;
  game::PurchaseProfile theta;
  std::vector<double> grad_norms;
  std::vector<bool> price_clamped;  ///< a price hit the zero floor
  std::vector<bool> theta_clamped;  ///< accounting used a clamped accuracy
};

struct NeOutcome {
  bool converged = false;
  std::size_t iterations = 0;
  /// Set by the elimination loop when no UE set can meet the contract.
  bool infeasible_contract = false;
  std::size_t rounds = 0;

  /// UEs in the returned solution, in input order.
  std::vector<int> ue_ids;
  game::PriceProfile prices;
  game::PurchaseProfile theta;
  std::vector<double> profits;
  std::vector<double> payments;
  double mo_cost = 0.0;
  /// Largest relative gap between a UE's total price and its best response
  /// to the final rival prices.
  double fixed_point_residual = 0.0;
  /// First session breaching the frequency cap at the final accuracy.
  std::vector<std::optional<std::size_t>> cap_violations;

  /// UEs taking part in the recorded trajectory.
  std::vector<int> trajectory_ue_ids;
  std::vector<IterationRecord> trajectory;
  std::vector<int> eliminated_ues;
};

/// Analytic partial derivatives of sum_t U_{k,t} with respect to each of
/// UE k's session prices.
std::vector<double> gradient_ue(std::span<const double> own_prices,
                                const game::UeGameConstants& consts,
                                const game::MarketCoefficients& coeffs);

/// Norm of the gradient used by the stop rule: components pinned at a zero
/// price with a negative slope are dropped, and components below the
/// rounding noise of their own evaluation count as zero.
double stationarity_norm(std::span<const double> own_prices, const game::UeGameConstants& consts,
                         const game::MarketCoefficients& coeffs);

/// Accuracy used for energy accounting: theta clamped into (0, theta_max].
double accounting_theta(double theta, double theta_max);

/// Lower end of the accounting clamp.
inline constexpr double kAccountingThetaFloor = 1e-6;

/// What one UE earns at given prices and purchased accuracy.
struct Settlement {
  double profit = 0.0;
  double payment = 0.0;
  std::optional<std::size_t> cap_violation;
};

/// Books a UE's payment and profit against `ue.forecast` with the accuracy
/// clamped by accounting_theta.
Settlement settle(const GameUe& ue, std::span<const double> prices, double theta,
                  const MoContract& contract, IterationModel model, double theta_max);

NeOutcome find_ne(std::span<const GameUe> ues, const MoContract& contract,
                  const SolverConfig& config);

enum class Feasibility { ok, violates };

/// 0 < theta_k <= theta_max for each UE.
std::vector<Feasibility> check_feasibility(std::span<const double> theta, double theta_max);

/// Repeats find_ne, removing one infeasible UE per round (the violator with
/// the highest total price, lowest id on ties) until every remaining UE is
/// feasible or none is left. A UE is infeasible when its accuracy is out of
/// range or its forecast load cannot admit the FL work.
NeOutcome tla_gts(std::span<const GameUe> candidates, const MoContract& contract,
                  const SolverConfig& config);

/// Golden-section maximization of a unimodal function on [lo, hi] to an
/// absolute argument tolerance of 1e-9.
double numeric_price_oracle(const std::function<double(double)>& objective, double lo, double hi);

/// MO purchase minimizing the Taylor-expanded cost, by a dense linear solve
/// of its first-order conditions.
game::PurchaseProfile numeric_mo_oracle(const game::PriceProfile& prices,
                                        const game::MarketCoefficients& coeffs,
                                        std::span<const double> etas);

}  // namespace flb::solver
