#include "flb/ne_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include <Eigen/LU>
#include <fmt/format.h>

#include "flb/errors.hpp"

namespace flb::solver {
namespace {

// Gradient components within this many ulps of their own operand scale are
// indistinguishable from zero.
constexpr double kGradientNoiseUlps = 64.0;

struct Response {
  std::vector<double> prices;
  bool clamped = false;
};

// Spreads `total` over sessions so that every positive price exceeds its
// session's slope by the same margin (water-filling on the slopes).
std::vector<double> spread_total(double total, std::span<const double> slopes) {
  const std::size_t n = slopes.size();
  std::vector<double> prices(n, 0.0);
  if (!(total > 0.0) || n == 0) return prices;

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t x, std::size_t y) { return slopes[x] > slopes[y]; });
  double prefix = 0.0;
  double margin = 0.0;
  for (std::size_t j = 1; j <= n; ++j) {
    prefix += slopes[order[j - 1]];
    margin = (total - prefix) / static_cast<double>(j);
    if (j == n || slopes[order[j]] + margin <= 0.0) break;
  }
  for (std::size_t t = 0; t < n; ++t) prices[t] = std::max(0.0, slopes[t] + margin);
  return prices;
}

Response respond(std::span<const double> current, const game::UeGameConstants& consts,
                 const game::MarketCoefficients& coeffs, SessionUpdate update) {
  Response r;
  if (update == SessionUpdate::aggregate) {
    const auto best = game::ue_best_response_session(consts.aggregate(), coeffs, 0.0);
    r.prices = spread_total(best.price, consts.c);
    r.clamped = best.clamped() ||
                std::any_of(r.prices.begin(), r.prices.end(), [](double p) { return p == 0.0; });
    return r;
  }
  r.prices.assign(current.begin(), current.end());
  double total = std::accumulate(r.prices.begin(), r.prices.end(), 0.0);
  for (std::size_t t = 0; t < r.prices.size(); ++t) {
    const double others = total - r.prices[t];
    const auto best = game::ue_best_response_session(consts.session(t), coeffs, others);
    r.clamped = r.clamped || best.clamped();
    r.prices[t] = best.price;
    total = others + best.price;
  }
  return r;
}

std::vector<double> initial_row(const GameUe& ue, const MoContract& contract,
                                const SolverConfig& config, double theta_max) {
  const std::size_t sessions = contract.global_sessions;
  switch (config.initial_pricing) {
    case InitialPricing::zeros:
      return std::vector<double>(sessions, 0.0);
    case InitialPricing::explicit_values: {
      const auto it = config.initial_prices.find(ue.profile.id);
      if (it == config.initial_prices.end())
        throw ConfigError(fmt::format("no initial prices given for UE {}", ue.profile.id));
      if (it->second.size() != sessions)
        throw ConfigError(fmt::format("UE {} has {} initial prices, expected {}", ue.profile.id,
                                      it->second.size(), sessions));
      return it->second;
    }
    case InitialPricing::break_even:
      break;
  }
  const double theta0 = 0.5 * theta_max;
  const double iters = cost::iterations(theta0, ue.profile.eta, config.energy_iterations);
  std::vector<double> row(sessions, 0.0);
  if (!(iters > 0.0)) return row;
  const auto est = evaluate_sessions(ue.profile, contract, ue.forecast, iters);
  for (std::size_t t = 0; t < sessions; ++t) row[t] = est.psi[t] / iters;
  return row;
}

}  // namespace

const char* to_string(InitialPricing p) noexcept {
  switch (p) {
    case InitialPricing::break_even: return "break_even";
    case InitialPricing::zeros: return "zeros";
    case InitialPricing::explicit_values: return "explicit";
  }
  return "?";
}

const char* to_string(SessionUpdate u) noexcept {
  return u == SessionUpdate::aggregate ? "aggregate" : "sequential";
}

void SolverConfig::validate() const {
  if (!(xi > 0.0 && xi < 1.0)) throw ConfigError(fmt::format("xi {} outside (0, 1)", xi));
  if (max_iterations < 1) throw ConfigError("max_iterations must be >= 1");
}

std::vector<double> gradient_ue(std::span<const double> own_prices,
                                const game::UeGameConstants& consts,
                                const game::MarketCoefficients& coeffs) {
  const std::size_t n = own_prices.size();
  if (consts.sessions() != n) throw InvalidArgument("constants and prices disagree on sessions");
  const double total = std::accumulate(own_prices.begin(), own_prices.end(), 0.0);
  const double slopes = std::accumulate(consts.c.begin(), consts.c.end(), 0.0);
  const double factor = game::purchase_factor(total, consts.session(0), coeffs);
  const double a = coeffs.a;
  // Every session's utility depends on the UE's total price, so each partial
  // carries the same market terms plus the session's own linear term.
  const double shared =
      a * (total - slopes) - 2.0 * a * consts.d * factor * static_cast<double>(n);
  return std::vector<double>(n, factor + shared);
}

double stationarity_norm(std::span<const double> own_prices, const game::UeGameConstants& consts,
                         const game::MarketCoefficients& coeffs) {
  const auto grad = gradient_ue(own_prices, consts, coeffs);
  const double total = std::accumulate(own_prices.begin(), own_prices.end(), 0.0);
  const double slopes = std::accumulate(consts.c.begin(), consts.c.end(), 0.0);
  const double factor = game::purchase_factor(total, consts.session(0), coeffs);
  const double a = std::abs(coeffs.a);
  const double scale = 1.0 + a * std::abs(total) + std::abs(coeffs.b) * std::abs(consts.v) +
                       a * (std::abs(total) + slopes) +
                       2.0 * a * consts.d * std::abs(factor) * static_cast<double>(grad.size());
  const double noise = kGradientNoiseUlps * std::numeric_limits<double>::epsilon() * scale;

  double sq = 0.0;
  for (std::size_t t = 0; t < grad.size(); ++t) {
    double g = grad[t];
    if (own_prices[t] <= 0.0 && g < 0.0) g = 0.0;
    if (std::abs(g) <= noise) g = 0.0;
    sq += g * g;
  }
  return std::sqrt(sq);
}

double accounting_theta(double theta, double theta_max) {
  const double upper = std::min(theta_max, 1.0 - 1e-12);
  return std::clamp(theta, kAccountingThetaFloor, upper);
}

Settlement settle(const GameUe& ue, std::span<const double> prices, double theta,
                  const MoContract& contract, IterationModel model, double theta_max) {
  const double iters = cost::iterations(accounting_theta(theta, theta_max), ue.profile.eta, model);
  const auto est = evaluate_sessions(ue.profile, contract, ue.forecast, iters);
  return {.profit = game::ue_utility(prices, est.psi, iters),
          .payment = game::ue_payment(prices, iters),
          .cap_violation = est.cap_violation};
}

NeOutcome find_ne(std::span<const GameUe> ues, const MoContract& contract,
                  const SolverConfig& config) {
  config.validate();
  if (ues.empty()) throw InvalidArgument("find_ne needs at least one UE");
  const std::size_t k_count = ues.size();
  const std::size_t sessions = contract.global_sessions;
  for (const auto& ue : ues) {
    if (ue.forecast.sessions() != sessions)
      throw InvalidArgument(fmt::format("UE {} forecast covers {} sessions, contract has {}",
                                        ue.profile.id, ue.forecast.sessions(), sessions));
  }

  const auto coeffs = game::market_coefficients(k_count, contract.substitutability);
  const double theta_max = cost::theta_max(contract.epsilon, contract.zeta, sessions);
  std::vector<double> etas;
  std::vector<game::UeGameConstants> consts;
  for (const auto& ue : ues) {
    etas.push_back(ue.profile.eta);
    if (config.mode == game::MoMode::printed && ue.profile.eta != 1.0)
      throw ConfigError(fmt::format("UE {}: printed MO response requires eta = 1, got {}",
                                    ue.profile.id, ue.profile.eta));
    consts.push_back(game::game_constants(ue.profile, contract, ue.forecast, 0.0));
  }

  game::PriceProfile prices(k_count, sessions);
  for (std::size_t k = 0; k < k_count; ++k)
    prices.set_row(k, initial_row(ues[k], contract, config, theta_max));

  auto make_record = [&](std::size_t iteration, const game::PriceProfile& p,
                         std::vector<bool> price_clamped) {
    IterationRecord rec;
    rec.iteration = iteration;
    rec.prices = p;
    rec.theta = game::mo_best_response(p, coeffs, etas, config.mode);
    rec.price_clamped = std::move(price_clamped);
    const auto totals = p.totals();
    const double grand = std::accumulate(totals.begin(), totals.end(), 0.0);
    for (std::size_t k = 0; k < k_count; ++k) {
      consts[k].v = grand - totals[k];
      rec.grad_norms.push_back(stationarity_norm(p.row(k), consts[k], coeffs));
      rec.theta_clamped.push_back(!(rec.theta[k] > 0.0 && rec.theta[k] <= theta_max));
    }
    return rec;
  };

  NeOutcome out;
  out.trajectory.push_back(make_record(1, prices, std::vector<bool>(k_count, false)));

  for (std::size_t i = 2; i <= config.max_iterations; ++i) {
    const auto totals = prices.totals();
    const double grand = std::accumulate(totals.begin(), totals.end(), 0.0);
    game::PriceProfile next(k_count, sessions);
    std::vector<bool> clamped(k_count, false);
    for (std::size_t k = 0; k < k_count; ++k) {
      consts[k].v = grand - totals[k];
      auto r = respond(prices.row(k), consts[k], coeffs, config.session_update);
      next.set_row(k, r.prices);
      clamped[k] = r.clamped;
    }
    prices = std::move(next);
    out.trajectory.push_back(make_record(i, prices, std::move(clamped)));

    const auto& now = out.trajectory.back().grad_norms;
    const auto& before = out.trajectory[out.trajectory.size() - 2].grad_norms;
    bool done = true;
    for (std::size_t k = 0; k < k_count && done; ++k) done = now[k] <= config.xi * before[k];
    if (done) {
      out.converged = true;
      break;
    }
  }

  const auto& last = out.trajectory.back();
  out.iterations = last.iteration;
  out.rounds = 1;
  out.prices = last.prices;
  out.theta = last.theta;

  const auto totals = prices.totals();
  const double grand = std::accumulate(totals.begin(), totals.end(), 0.0);
  for (std::size_t k = 0; k < k_count; ++k) {
    out.ue_ids.push_back(ues[k].profile.id);
    const auto booked = settle(ues[k], prices.row(k), out.theta[k], contract,
                               config.energy_iterations, theta_max);
    out.profits.push_back(booked.profit);
    out.payments.push_back(booked.payment);
    out.cap_violations.push_back(booked.cap_violation);

    consts[k].v = grand - totals[k];
    const auto r = respond(prices.row(k), consts[k], coeffs, config.session_update);
    const double resp_total = std::accumulate(r.prices.begin(), r.prices.end(), 0.0);
    out.fixed_point_residual = std::max(
        out.fixed_point_residual,
        std::abs(resp_total - totals[k]) / std::max(1.0, std::abs(totals[k])));
  }
  out.mo_cost = std::accumulate(out.payments.begin(), out.payments.end(), 0.0) +
                game::substitutability_cost(out.theta, contract.substitutability);
  out.trajectory_ue_ids = out.ue_ids;
  return out;
}

std::vector<Feasibility> check_feasibility(std::span<const double> theta, double theta_max) {
  std::vector<Feasibility> flags;
  flags.reserve(theta.size());
  for (double t : theta)
    flags.push_back(t > 0.0 && t <= theta_max ? Feasibility::ok : Feasibility::violates);
  return flags;
}

NeOutcome tla_gts(std::span<const GameUe> candidates, const MoContract& contract,
                  const SolverConfig& config) {
  std::vector<GameUe> remaining(candidates.begin(), candidates.end());
  std::vector<int> eliminated;

  auto infeasible = [&](NeOutcome base) {
    base.infeasible_contract = true;
    base.ue_ids.clear();
    base.prices = game::PriceProfile();
    base.theta.clear();
    base.profits.clear();
    base.payments.clear();
    base.cap_violations.clear();
    base.mo_cost = 0.0;
    base.eliminated_ues = eliminated;
    return base;
  };

  double theta_max = 0.0;
  try {
    theta_max = cost::theta_max(contract.epsilon, contract.zeta, contract.global_sessions);
  } catch (const InfeasibleContract&) {
    for (const auto& ue : remaining) eliminated.push_back(ue.profile.id);
    return infeasible(NeOutcome{});
  }

  NeOutcome last;
  std::size_t rounds = 0;
  while (!remaining.empty()) {
    last = find_ne(remaining, contract, config);
    last.rounds = ++rounds;
    const auto flags = check_feasibility(last.theta, theta_max);
    std::optional<std::size_t> drop;
    for (std::size_t k = 0; k < remaining.size(); ++k) {
      if (flags[k] == Feasibility::ok && !last.cap_violations[k]) continue;
      if (!drop) {
        drop = k;
        continue;
      }
      const double price = last.prices.total(k);
      const double best = last.prices.total(*drop);
      if (price > best ||
          (price == best && remaining[k].profile.id < remaining[*drop].profile.id))
        drop = k;
    }
    if (!drop) {
      last.eliminated_ues = eliminated;
      return last;
    }
    eliminated.push_back(remaining[*drop].profile.id);
    remaining.erase(remaining.begin() + static_cast<std::ptrdiff_t>(*drop));
  }
  last.rounds = rounds;
  return infeasible(std::move(last));
}

double numeric_price_oracle(const std::function<double(double)>& objective, double lo,
                            double hi) {
  if (!(lo < hi)) throw InvalidArgument(fmt::format("empty bracket [{}, {}]", lo, hi));
  constexpr double kTolerance = 1e-9;
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  auto eval = [&](double x) {
    const double y = objective(x);
    if (!std::isfinite(y)) throw OracleFailure(fmt::format("objective is {} at {}", y, x));
    return y;
  };

  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = eval(c);
  double fd = eval(d);
  for (int iter = 0; iter < 2000 && b - a > kTolerance; ++iter) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = eval(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = eval(d);
    }
  }
  return 0.5 * (a + b);
}

game::PurchaseProfile numeric_mo_oracle(const game::PriceProfile& prices,
                                        const game::MarketCoefficients& coeffs,
                                        std::span<const double> etas) {
  const auto n = static_cast<Eigen::Index>(prices.ues());
  if (etas.size() != prices.ues()) throw OracleFailure("one eta per UE required");
  const double v = coeffs.substitutability;
  Eigen::MatrixXd system = Eigen::MatrixXd::Constant(n, n, v);
  system.diagonal().setOnes();
  Eigen::VectorXd rhs(n);
  for (Eigen::Index k = 0; k < n; ++k)
    rhs(k) = etas[static_cast<std::size_t>(k)] * prices.total(static_cast<std::size_t>(k));

  Eigen::FullPivLU<Eigen::MatrixXd> lu(system);
  if (!lu.isInvertible()) throw OracleFailure("MO first-order system is singular");
  const Eigen::VectorXd theta = lu.solve(rhs);
  if (!theta.allFinite()) throw OracleFailure("MO first-order solve produced non-finite values");
  return game::PurchaseProfile(theta.data(), theta.data() + n);
}

}  // namespace flb::solver
