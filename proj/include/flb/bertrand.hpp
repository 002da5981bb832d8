#pragma once

// Utilities and closed-form best responses of the MO (buyer of local
// accuracy) and the UEs (sellers quoting a price per local iteration).

#include <cstddef>
#include <span>
#include <vector>

#include "flb/cost_model.hpp"

namespace flb::game {

/// How the MO maps quoted prices to purchased accuracies.
///  - printed: theta_k = A * S_k + B * sum_{j != k} S_j, the closed form with
///    the market constants as given (requires eta_k = 1).
///  - derived: the exact minimizer of the Taylor-expanded MO cost, which
///    solves theta_k + v * sum_{j != k} theta_j = eta_k * S_k.
enum class MoMode { printed, derived };

const char* to_string(MoMode mode) noexcept;

struct MarketCoefficients {
  double a = 0.0;
  double b = 0.0;
  std::size_t ue_count = 0;
  double substitutability = 0.0;
};

MarketCoefficients market_coefficients(std::size_t ue_count, double substitutability);

/// Non-negative prices, one row of `sessions` prices per UE (J/iteration).
class PriceProfile {
 public:
  PriceProfile() = default;
  PriceProfile(std::size_t ues, std::size_t sessions, double fill = 0.0);
  explicit PriceProfile(const std::vector<std::vector<double>>& rows);

  std::size_t ues() const noexcept { return ues_; }
  std::size_t sessions() const noexcept { return sessions_; }

  double at(std::size_t ue, std::size_t session) const { return data_[index(ue, session)]; }
  /// Throws InvalidArgument for negative or non-finite prices.
  void set(std::size_t ue, std::size_t session, double price);
  std::span<const double> row(std::size_t ue) const;
  void set_row(std::size_t ue, std::span<const double> prices);

  /// Sum of one UE's prices over all sessions.
  double total(std::size_t ue) const;
  /// Per-UE totals.
  std::vector<double> totals() const;

  friend bool operator==(const PriceProfile&, const PriceProfile&) = default;

 private:
  std::size_t index(std::size_t ue, std::size_t session) const;

  std::size_t ues_ = 0;
  std::size_t sessions_ = 0;
  std::vector<double> data_;
};

/// Accuracy purchased from each UE.
using PurchaseProfile = std::vector<double>;

/// The parts of a session's utility a UE treats as fixed while pricing it.
struct SessionTerms {
  double c = 0.0;       ///< background-load energy slope, 2 nu c |D| f_ex
  double d = 0.0;       ///< quadratic training-energy coefficient
  double v = 0.0;       ///< rivals' total asked price
  double e_comm = 0.0;  ///< predicted upload energy
};

/// Per-UE pricing constants over all sessions.
struct UeGameConstants {
  std::vector<double> c;
  double d = 0.0;
  double v = 0.0;
  std::vector<double> e_comm;

  std::size_t sessions() const noexcept { return c.size(); }
  SessionTerms session(std::size_t t) const;
  /// All sessions folded into one: slopes and upload energies summed, the
  /// quadratic coefficient scaled by the session count.
  SessionTerms aggregate() const;
};

/// Builds the constants UE `profile` prices against, given its forecast and
/// the rivals' total price `rivals_total`.
UeGameConstants game_constants(const UeProfile& profile, const MoContract& contract,
                               const SessionForecast& forecast, double rivals_total);

/// Quadratic resource-substitutability term 1/2 (sum theta^2 + 2 v sum_{k<j} theta_k theta_j).
double substitutability_cost(std::span<const double> theta, double substitutability);

/// MO cost with the exact iteration count; every theta must lie in (0, 1).
double mo_utility(const PriceProfile& prices, std::span<const double> theta,
                  std::span<const double> etas, double substitutability);

/// MO cost with the first-order iteration count eta (1 - theta).
double mo_utility_taylor(const PriceProfile& prices, std::span<const double> theta,
                         std::span<const double> etas, double substitutability);

/// Throws ConfigError if printed mode is asked to handle eta != 1, and
/// InvalidArgument for a singular (v = 1) market.
PurchaseProfile mo_best_response(const PriceProfile& prices, const MarketCoefficients& coeffs,
                                 std::span<const double> etas, MoMode mode);

/// The iteration-count factor 1 + A S - B V a UE expects the MO to pay for.
double purchase_factor(double own_total, const SessionTerms& terms,
                       const MarketCoefficients& coeffs);

/// Utility a UE draws from one session at price `rho` when its prices sum
/// to `own_total` (which includes `rho`).
double ue_session_utility(double rho, double own_total, const SessionTerms& terms,
                          const MarketCoefficients& coeffs);

/// Profit over all sessions for a fixed iteration count.
double ue_utility(std::span<const double> prices, std::span<const double> psi, double iterations);
/// Total payment sum_t rho_t * iterations.
double ue_payment(std::span<const double> prices, double iterations);

struct PriceResponse {
  double price = 0.0;      ///< after the non-negativity clamp
  double unclamped = 0.0;  ///< raw stationary-point value
  bool clamped() const noexcept { return price != unclamped; }
};

/// Stationary price for one session given the UE's other session prices.
/// Throws InvalidArgument when A = 0 or the denominator vanishes.
PriceResponse ue_best_response_session(const SessionTerms& terms, const MarketCoefficients& coeffs,
                                       double other_session_prices);

}  // namespace flb::game
