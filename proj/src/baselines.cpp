#include "flb/baselines.hpp"

#include <algorithm>
#include <cstring>

#include <fmt/format.h>

namespace flb::baselines {
namespace {

void mix(std::uint64_t& h, double x) {
  char bytes[sizeof x];
  std::memcpy(bytes, &x, sizeof x);
  h = fnv1a(std::string_view(bytes, sizeof bytes), h);
}

void mix(std::uint64_t& h, std::size_t x) { mix(h, static_cast<double>(x)); }

ProfitReport report_from(SchemeId scheme, const solver::NeOutcome& ne,
                         std::span<const solver::GameUe> ues) {
  ProfitReport r;
  r.scheme = scheme;
  for (const auto& ue : ues) {
    UeProfit p{.id = ue.profile.id};
    const auto it = std::find(ne.ue_ids.begin(), ne.ue_ids.end(), ue.profile.id);
    if (it != ne.ue_ids.end()) {
      const auto k = static_cast<std::size_t>(it - ne.ue_ids.begin());
      p.profit = ne.profits[k];
      p.payment = ne.payments[k];
      p.theta = ne.theta[k];
      p.participating = true;
      r.mo_payment += p.payment;
    }
    r.ues.push_back(p);
  }
  return r;
}

}  // namespace

const char* to_string(SchemeId id) noexcept {
  switch (id) {
    case SchemeId::tla_gts: return "TLA_GTS";
    case SchemeId::pure_gts: return "PURE_GTS";
    case SchemeId::ilps: return "ILPS";
  }
  return "?";
}

SchemeFailure::SchemeFailure(SchemeId scheme, const std::string& what)
    : Error(fmt::format("{}: {}", to_string(scheme), what)), scheme_(scheme) {}

std::uint64_t fnv1a(std::string_view bytes, std::uint64_t seed) {
  std::uint64_t h = seed;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::uint64_t prediction_digest(std::span<const solver::GameUe> ues) {
  std::uint64_t h = fnv1a("");
  for (const auto& ue : ues) {
    const auto& f = ue.forecast;
    mix(h, static_cast<double>(ue.profile.id));
    for (auto s : f.load_states) mix(h, s);
    for (double x : f.extra_load_hz) mix(h, x);
    for (auto s : f.gain_states) mix(h, s);
    for (double x : f.gains) mix(h, x);
    for (double x : f.comm_energy) mix(h, x);
  }
  return h;
}

solver::NeOutcome pure_gts(std::span<const solver::GameUe> ues, const MoContract& contract,
                           const solver::SolverConfig& config) {
  std::vector<solver::GameUe> blind(ues.begin(), ues.end());
  for (auto& ue : blind) ue.forecast = ue.forecast.without_background_load();
  auto out = solver::tla_gts(blind, contract, config);
  if (out.infeasible_contract) return out;

  const double theta_max = cost::theta_max(contract.epsilon, contract.zeta,
                                           contract.global_sessions);
  for (std::size_t k = 0; k < out.ue_ids.size(); ++k) {
    const auto it = std::find_if(ues.begin(), ues.end(), [&](const solver::GameUe& ue) {
      return ue.profile.id == out.ue_ids[k];
    });
    const auto booked = solver::settle(*it, out.prices.row(k), out.theta[k], contract,
                                       config.energy_iterations, theta_max);
    out.profits[k] = booked.profit;
    out.payments[k] = booked.payment;
    out.cap_violations[k] = booked.cap_violation;
  }
  return out;
}

double ilps_reference_theta(const MoContract& contract) {
  return 0.5 * cost::theta_max(contract.epsilon, contract.zeta, contract.global_sessions);
}

game::PriceProfile ilps(std::span<const solver::GameUe> ues, const MoContract& contract,
                        double markup, IterationModel model) {
  if (!(markup >= 0.0)) throw InvalidArgument(fmt::format("markup {} must be >= 0", markup));
  const std::size_t sessions = contract.global_sessions;
  game::PriceProfile prices(ues.size(), sessions);
  if (ues.empty()) return prices;
  const double theta = ilps_reference_theta(contract);
  for (std::size_t k = 0; k < ues.size(); ++k) {
    const auto& ue = ues[k];
    const double iters = cost::iterations(theta, ue.profile.eta, model);
    if (!(iters > 0.0)) continue;
    const auto est = evaluate_sessions(ue.profile, contract, ue.forecast, iters);
    for (std::size_t t = 0; t < sessions; ++t)
      prices.set(k, t, (1.0 + markup) * est.psi[t] / iters);
  }
  return prices;
}

Comparison run_comparison(const Scenario& scenario, const solver::SolverConfig& config,
                          double markup) {
  Comparison cmp;
  if (scenario.ues.empty()) return cmp;
  const auto ues = prepare_game(scenario);
  const auto& contract = scenario.contract;

  Scenario keyed = scenario;
  keyed.solver = config;
  keyed.ilps_markup = markup;
  const auto config_hash = fnv1a(render_scenario(keyed));
  const auto digest = prediction_digest(ues);

  auto tag = [&](ProfitReport r) {
    r.scenario_id = scenario.name;
    r.config_hash = config_hash;
    r.prediction_digest = digest;
    return r;
  };

  try {
    cmp.tla_gts = solver::tla_gts(ues, contract, config);
  } catch (const Error& e) {
    throw SchemeFailure(SchemeId::tla_gts, e.what());
  }
  cmp.reports.push_back(tag(report_from(SchemeId::tla_gts, cmp.tla_gts, ues)));

  try {
    cmp.pure_gts = pure_gts(ues, contract, config);
  } catch (const Error& e) {
    throw SchemeFailure(SchemeId::pure_gts, e.what());
  }
  cmp.reports.push_back(tag(report_from(SchemeId::pure_gts, cmp.pure_gts, ues)));

  ProfitReport ilps_report;
  ilps_report.scheme = SchemeId::ilps;
  try {
    cmp.ilps_prices = ilps(ues, contract, markup, config.energy_iterations);
    std::vector<double> etas;
    for (const auto& ue : ues) etas.push_back(ue.profile.eta);
    const auto coeffs = game::market_coefficients(ues.size(), contract.substitutability);
    cmp.ilps_theta = game::mo_best_response(cmp.ilps_prices, coeffs, etas, config.mode);
    const double theta_max = cost::theta_max(contract.epsilon, contract.zeta,
                                             contract.global_sessions);
    for (std::size_t k = 0; k < ues.size(); ++k) {
      const auto booked = solver::settle(ues[k], cmp.ilps_prices.row(k), cmp.ilps_theta[k],
                                         contract, config.energy_iterations, theta_max);
      ilps_report.ues.push_back({.id = ues[k].profile.id,
                                 .profit = booked.profit,
                                 .payment = booked.payment,
                                 .theta = cmp.ilps_theta[k],
                                 .participating = true});
      ilps_report.mo_payment += booked.payment;
    }
  } catch (const Error& e) {
    throw SchemeFailure(SchemeId::ilps, e.what());
  }
  cmp.reports.push_back(tag(std::move(ilps_report)));
  return cmp;
}

std::vector<ProfitReport> compare_schemes(const Scenario& scenario,
                                          const solver::SolverConfig& config, double markup) {
  return run_comparison(scenario, config, markup).reports;
}

}  // namespace flb::baselines
