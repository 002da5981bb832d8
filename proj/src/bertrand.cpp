#include "flb/bertrand.hpp"

#include <cmath>

#include <fmt/format.h>

#include "flb/errors.hpp"

namespace flb::game {

const char* to_string(MoMode mode) noexcept {
  return mode == MoMode::printed ? "printed" : "derived";
}

MarketCoefficients market_coefficients(std::size_t ue_count, double v) {
  if (ue_count < 1) throw InvalidArgument("a market needs at least one UE");
  if (!(v >= 0.0 && v < 1.0))
    throw InvalidArgument(fmt::format("substitutability {} outside [0, 1)", v));
  const double k = static_cast<double>(ue_count);
  const double denom = (1.0 - v) * (k * v + 1.0 - v);
  return {.a = -(1.0 - 2.0 * v + k * v) / denom,
          .b = v / denom,
          .ue_count = ue_count,
          .substitutability = v};
}

PriceProfile::PriceProfile(std::size_t ues, std::size_t sessions, double fill)
    : ues_(ues), sessions_(sessions), data_(ues * sessions, fill) {
  if (!(fill >= 0.0)) throw InvalidArgument("prices must be non-negative");
}

PriceProfile::PriceProfile(const std::vector<std::vector<double>>& rows)
    : PriceProfile(rows.size(), rows.empty() ? 0 : rows.front().size()) {
  for (std::size_t k = 0; k < rows.size(); ++k) {
    if (rows[k].size() != sessions_)
      throw InvalidArgument(fmt::format("price row {} has {} sessions, expected {}", k,
                                        rows[k].size(), sessions_));
    set_row(k, rows[k]);
  }
}

std::size_t PriceProfile::index(std::size_t ue, std::size_t session) const {
  if (ue >= ues_ || session >= sessions_)
    throw InvalidArgument(fmt::format("price ({}, {}) outside {}x{} profile", ue, session, ues_,
                                      sessions_));
  return ue * sessions_ + session;
}

void PriceProfile::set(std::size_t ue, std::size_t session, double price) {
  if (!(price >= 0.0) || !std::isfinite(price))
    throw InvalidArgument(fmt::format("price {} for UE {} session {} must be finite and >= 0",
                                      price, ue, session));
  data_[index(ue, session)] = price;
}

std::span<const double> PriceProfile::row(std::size_t ue) const {
  if (ue >= ues_) throw InvalidArgument(fmt::format("UE {} outside profile", ue));
  return std::span<const double>(data_).subspan(ue * sessions_, sessions_);
}

void PriceProfile::set_row(std::size_t ue, std::span<const double> prices) {
  if (prices.size() != sessions_) throw InvalidArgument("price row length mismatch");
  for (std::size_t t = 0; t < sessions_; ++t) set(ue, t, prices[t]);
}

double PriceProfile::total(std::size_t ue) const {
  double sum = 0.0;
  for (double p : row(ue)) sum += p;
  return sum;
}

std::vector<double> PriceProfile::totals() const {
  std::vector<double> out(ues_);
  for (std::size_t k = 0; k < ues_; ++k) out[k] = total(k);
  return out;
}

SessionTerms UeGameConstants::session(std::size_t t) const {
  return {.c = c.at(t), .d = d, .v = v, .e_comm = e_comm.at(t)};
}

SessionTerms UeGameConstants::aggregate() const {
  SessionTerms s{.c = 0.0, .d = d * static_cast<double>(sessions()), .v = v, .e_comm = 0.0};
  for (std::size_t t = 0; t < sessions(); ++t) {
    s.c += c[t];
    s.e_comm += e_comm[t];
  }
  return s;
}

UeGameConstants game_constants(const UeProfile& profile, const MoContract& contract,
                               const SessionForecast& forecast, double rivals_total) {
  const double work = profile.cycles_per_sample * profile.dataset_size;
  UeGameConstants g;
  g.c.reserve(forecast.sessions());
  for (double f_ex : forecast.extra_load_hz) g.c.push_back(2.0 * profile.nu * work * f_ex);
  g.d = profile.nu * work * work / contract.t_train;
  g.v = rivals_total;
  g.e_comm = forecast.comm_energy;
  return g;
}

double substitutability_cost(std::span<const double> theta, double v) {
  double squares = 0.0;
  double cross = 0.0;
  for (std::size_t k = 0; k < theta.size(); ++k) {
    squares += theta[k] * theta[k];
    for (std::size_t j = k + 1; j < theta.size(); ++j) cross += theta[k] * theta[j];
  }
  return 0.5 * (squares + 2.0 * v * cross);
}

namespace {

void check_shapes(const PriceProfile& prices, std::span<const double> theta,
                  std::span<const double> etas) {
  if (theta.size() != prices.ues() || etas.size() != prices.ues())
    throw InvalidArgument(fmt::format("{} UEs priced but {} accuracies and {} etas given",
                                      prices.ues(), theta.size(), etas.size()));
}

template <typename Iterations>
double mo_cost(const PriceProfile& prices, std::span<const double> theta,
               std::span<const double> etas, double v, Iterations iterations) {
  check_shapes(prices, theta, etas);
  double payment = 0.0;
  for (std::size_t k = 0; k < prices.ues(); ++k)
    payment += prices.total(k) * iterations(theta[k], etas[k]);
  return payment + substitutability_cost(theta, v);
}

}  // namespace

double mo_utility(const PriceProfile& prices, std::span<const double> theta,
                  std::span<const double> etas, double v) {
  return mo_cost(prices, theta, etas, v, cost::local_iterations);
}

double mo_utility_taylor(const PriceProfile& prices, std::span<const double> theta,
                         std::span<const double> etas, double v) {
  return mo_cost(prices, theta, etas, v, cost::local_iterations_taylor);
}

PurchaseProfile mo_best_response(const PriceProfile& prices, const MarketCoefficients& coeffs,
                                 std::span<const double> etas, MoMode mode) {
  const std::size_t k_count = prices.ues();
  if (etas.size() != k_count) throw InvalidArgument("one eta per UE required");
  if (k_count != coeffs.ue_count)
    throw InvalidArgument(fmt::format("coefficients built for {} UEs, profile has {}",
                                      coeffs.ue_count, k_count));
  const auto totals = prices.totals();
  PurchaseProfile theta(k_count);

  if (mode == MoMode::printed) {
    double grand = 0.0;
    for (std::size_t k = 0; k < k_count; ++k) {
      if (etas[k] != 1.0)
        throw ConfigError(fmt::format(
            "printed MO response assumes eta = 1; UE index {} has eta = {}", k, etas[k]));
      grand += totals[k];
    }
    for (std::size_t k = 0; k < k_count; ++k)
      theta[k] = coeffs.a * totals[k] + coeffs.b * (grand - totals[k]);
    return theta;
  }

  // (1 - v) I + v 11^T is inverted in closed form (Sherman-Morrison).
  const double v = coeffs.substitutability;
  if (!(v < 1.0)) throw InvalidArgument("substitutability 1 makes the MO response singular");
  const double k = static_cast<double>(k_count);
  double weighted = 0.0;
  for (std::size_t j = 0; j < k_count; ++j) weighted += etas[j] * totals[j];
  const double shrink = v / (1.0 - v + k * v);
  for (std::size_t j = 0; j < k_count; ++j)
    theta[j] = (etas[j] * totals[j] - shrink * weighted) / (1.0 - v);
  return theta;
}

double purchase_factor(double own_total, const SessionTerms& terms,
                       const MarketCoefficients& coeffs) {
  return 1.0 + coeffs.a * own_total - coeffs.b * terms.v;
}

double ue_session_utility(double rho, double own_total, const SessionTerms& terms,
                          const MarketCoefficients& coeffs) {
  const double factor = purchase_factor(own_total, terms, coeffs);
  return rho * factor - terms.c * factor - (terms.d * factor * factor + terms.e_comm);
}

double ue_payment(std::span<const double> prices, double iterations) {
  double payment = 0.0;
  for (double p : prices) payment += p * iterations;
  return payment;
}

double ue_utility(std::span<const double> prices, std::span<const double> psi, double iterations) {
  if (prices.size() != psi.size()) throw InvalidArgument("one energy estimate per session");
  double energy = 0.0;
  for (double e : psi) energy += e;
  return ue_payment(prices, iterations) - energy;
}

PriceResponse ue_best_response_session(const SessionTerms& terms, const MarketCoefficients& coeffs,
                                       double other_session_prices) {
  const double a = coeffs.a;
  const double b = coeffs.b;
  if (a == 0.0) throw InvalidArgument("degenerate market: A = 0");
  const double denom = 2.0 * a * a * terms.d - 2.0 * a;
  if (denom == 0.0) throw InvalidArgument("degenerate market: 2 A^2 D - 2 A = 0");
  const double numer = 1.0 - a * terms.c - b * terms.v - 2.0 * a * terms.d +
                       2.0 * a * b * terms.d * terms.v;
  const double raw = numer / denom - other_session_prices;
  return {.price = raw < 0.0 ? 0.0 : raw, .unclamped = raw};
}

}  // namespace flb::game
