// Acceptance run: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Tolerances and instance counts are fixed here, not configurable.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "flb/baselines.hpp"
#include "flb/errors.hpp"
#include "flb/results.hpp"
#include "flb/scenario.hpp"

using namespace flb;

namespace {

struct Verdict {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) detail = what;
    pass = pass && ok;
  }
};

Scenario bundled(const char* name = "reference.scenario") {
  return load_scenario(std::string(FLB_SCENARIO_DIR) + "/" + name);
}

double sum(std::span<const double> xs) { return std::accumulate(xs.begin(), xs.end(), 0.0); }

bool near_rel(double a, double b, double rel) {
  return std::abs(a - b) <= rel * std::max(1.0, std::abs(b));
}

// 1. Load forecasts over the first three sessions.
Verdict load_sequences() {
  Verdict v;
  const auto ues = prepare_game(bundled("reference_short.scenario"));
  const std::vector<std::vector<double>> expected{
      {0.0, 0.0, 0.0}, {0.5e9, 1e9, 1e9}, {1e9, 1.5e9, 1e9}, {1e9, 0.0, 1e9}};
  for (std::size_t k = 0; k < 4; ++k) {
    const auto seq = markov::predict_load_sequence(ues[k].profile.load_chain, 0, 3);
    std::vector<double> hz;
    for (auto s : seq) hz.push_back(ues[k].profile.load_chain.space().level(s));
    v.require(hz == expected[k], fmt::format("UE {} sequence {}", k + 1, fmt::join(hz, ",")));
    v.require(ues[k].forecast.extra_load_hz == expected[k], fmt::format("UE {} forecast", k + 1));
  }
  v.detail = v.pass ? "UE1 {0,0,0}, UE2 {0.5,1,1}, UE3 {1,1.5,1}, UE4 {1,0,1} GHz" : v.detail;
  return v;
}

// 2. A = -8/5 and B = 2/5 for four UEs at v = 1/2.
Verdict market_constants() {
  Verdict v;
  const auto m = game::market_coefficients(4, 0.5);
  // (1 - 2v + Kv) = 2 and (1 - v)(Kv + 1 - v) = 5/4 in exact arithmetic.
  v.require(m.a == -1.6 && m.b == 0.4, fmt::format("A = {}, B = {}", m.a, m.b));
  v.require(m.a * 5.0 == -8.0 && m.b * 5.0 == 2.0, "not the ratios -8/5, 2/5");
  if (v.pass) v.detail = "A = -1.6, B = 0.4";
  return v;
}

// 3. Closed-form single-session price against golden-section search.
Verdict best_response_oracle() {
  Verdict v;
  std::mt19937_64 rng(1003);
  std::uniform_real_distribution<double> a(-5.0, -0.1), b(0.0, 1.0), vv(0.0, 10.0), c(0.0, 1e-9),
      d(0.0, 1e-9);
  double worst = 0.0;
  const int n = 1000;
  for (int i = 0; i < n; ++i) {
    const game::MarketCoefficients m{.a = a(rng), .b = b(rng), .ue_count = 2, .substitutability = 0.5};
    const game::SessionTerms s{.c = c(rng), .d = d(rng), .v = vv(rng), .e_comm = c(rng)};
    const double closed = game::ue_best_response_session(s, m, 0.0).unclamped;
    const double numeric = solver::numeric_price_oracle(
        [&](double rho) { return game::ue_session_utility(rho, rho, s, m); }, -1e3, 1e3);
    const double err = std::abs(closed - numeric) / std::max(1.0, std::abs(numeric));
    worst = std::max(worst, err);
    v.require(err <= 1e-6, fmt::format("instance {}: {} vs {}", i, closed, numeric));
  }
  if (v.pass) v.detail = fmt::format("{} instances, worst relative gap {:.2e}", n, worst);
  return v;
}

// 4. MO response against its first-order conditions and a direct linear solve.
Verdict mo_oracle() {
  Verdict v;
  std::mt19937_64 rng(1004);
  std::uniform_real_distribution<double> price(0.0, 2.0), eta(0.1, 3.0), sub(0.0, 0.95);
  double worst_foc = 0.0, worst_lu = 0.0, worst_neg = 0.0;
  const int n = 500;
  for (int i = 0; i < n; ++i) {
    const std::size_t k = 1 + rng() % 8;
    const std::size_t sessions = 1 + rng() % 10;
    const double sv = sub(rng);
    const auto m = game::market_coefficients(k, sv);
    game::PriceProfile p(k, sessions);
    std::vector<double> etas(k);
    for (std::size_t j = 0; j < k; ++j) {
      etas[j] = eta(rng);
      for (std::size_t t = 0; t < sessions; ++t) p.set(j, t, price(rng));
    }
    const auto theta = game::mo_best_response(p, m, etas, game::MoMode::derived);
    const auto solved = solver::numeric_mo_oracle(p, m, etas);
    const double total = sum(theta);
    for (std::size_t j = 0; j < k; ++j) {
      worst_foc = std::max(worst_foc,
                           std::abs(theta[j] + sv * (total - theta[j]) - etas[j] * p.total(j)));
      worst_lu = std::max(worst_lu, std::abs(theta[j] - solved[j]));
    }
    const std::vector<double> ones(k, 1.0);
    const auto derived1 = game::mo_best_response(p, m, ones, game::MoMode::derived);
    const auto printed = game::mo_best_response(p, m, ones, game::MoMode::printed);
    for (std::size_t j = 0; j < k; ++j)
      worst_neg = std::max(worst_neg, std::abs(printed[j] + derived1[j]));
  }
  v.require(worst_foc <= 1e-9, fmt::format("FOC residual {:.2e}", worst_foc));
  v.require(worst_lu <= 1e-10, fmt::format("linear-solve gap {:.2e}", worst_lu));
  v.require(worst_neg <= 1e-12, fmt::format("printed/derived gap {:.2e}", worst_neg));
  if (v.pass)
    v.detail = fmt::format("{} profiles, FOC {:.1e}, solve {:.1e}, negation {:.1e}", n, worst_foc,
                           worst_lu, worst_neg);
  return v;
}

double utility_sum(std::span<const double> prices, const game::UeGameConstants& consts,
                   const game::MarketCoefficients& m) {
  const double total = sum(prices);
  double u = 0.0;
  for (std::size_t t = 0; t < prices.size(); ++t)
    u += game::ue_session_utility(prices[t], total, consts.session(t), m);
  return u;
}

// 5. Analytic price gradient against central differences.
Verdict gradient() {
  Verdict v;
  std::mt19937_64 rng(1005);
  std::uniform_real_distribution<double> a(-5.0, -0.1), b(0.0, 1.0), vv(0.0, 10.0),
      c(0.0, 1e-9), p(0.0, 1.0);
  double worst = 0.0;
  const int n = 500;
  for (int i = 0; i < n; ++i) {
    const game::MarketCoefficients m{.a = a(rng), .b = b(rng), .ue_count = 2, .substitutability = 0.5};
    const std::size_t sessions = 1 + rng() % 10;
    game::UeGameConstants consts{.c = {}, .d = c(rng), .v = vv(rng), .e_comm = {}};
    std::vector<double> prices(sessions);
    for (std::size_t t = 0; t < sessions; ++t) {
      consts.c.push_back(c(rng));
      consts.e_comm.push_back(c(rng));
      prices[t] = p(rng);
    }
    const auto grad = solver::gradient_ue(prices, consts, m);
    for (std::size_t t = 0; t < sessions; ++t) {
      const double h = 1e-6 * std::max(1.0, std::abs(prices[t]));
      auto up = prices, down = prices;
      up[t] += h;
      down[t] -= h;
      const double fd = (utility_sum(up, consts, m) - utility_sum(down, consts, m)) / (2.0 * h);
      const double err = std::abs(grad[t] - fd) / std::max(1.0, std::abs(fd));
      worst = std::max(worst, err);
      v.require(err <= 1e-5, fmt::format("state {} session {}: {} vs {}", i, t, grad[t], fd));
    }
  }
  if (v.pass) v.detail = fmt::format("{} states, worst relative gap {:.2e}", n, worst);
  return v;
}

// 6. Best-response iteration on the bundled deployment.
Verdict convergence() {
  Verdict v;
  for (const char* name : {"reference.scenario", "reference_short.scenario"}) {
    auto s = bundled(name);
    s.solver.xi = 0.01;
    const auto ues = prepare_game(s);
    const auto out = solver::find_ne(ues, s.contract, s.solver);
    const auto again = solver::find_ne(ues, s.contract, s.solver);
    v.require(out.converged && out.iterations <= 500,
              fmt::format("{}: converged={} after {}", name, out.converged, out.iterations));
    v.require(results::render_outcome_json(out) == results::render_outcome_json(again),
              fmt::format("{}: runs differ", name));
    if (!out.converged) continue;
    const auto& last = out.trajectory.back();
    const auto& prev = out.trajectory[out.trajectory.size() - 2];
    v.require(last.iteration == out.iterations, "declared iteration is not the last record");
    for (std::size_t k = 0; k < last.grad_norms.size(); ++k)
      v.require(last.grad_norms[k] <= 0.01 * prev.grad_norms[k],
                fmt::format("{}: UE {} breaks the ratio rule", name, out.trajectory_ue_ids[k]));
    if (v.pass)
      v.detail += fmt::format("{}{} converged at {}", v.detail.empty() ? "" : "; ", name,
                              out.iterations);
  }
  return v;
}

// 7. Tightening the stop ratio tenfold costs at most one more run's worth.
Verdict iteration_scaling() {
  Verdict v;
  auto s = bundled();
  const auto ues = prepare_game(s);
  s.solver.xi = 1e-2;
  const auto coarse = solver::find_ne(ues, s.contract, s.solver);
  s.solver.xi = 1e-3;
  const auto fine = solver::find_ne(ues, s.contract, s.solver);
  v.require(coarse.converged && fine.converged, "a run did not converge");
  const double extra =
      static_cast<double>(fine.iterations) - static_cast<double>(coarse.iterations);
  v.require(extra <= static_cast<double>(coarse.iterations) + 5.0,
            fmt::format("{} - {} exceeds bound", fine.iterations, coarse.iterations));
  if (v.pass)
    v.detail = fmt::format("iterations {} at 1e-3, {} at 1e-2", fine.iterations, coarse.iterations);
  return v;
}

// 8. Load-aware pricing earns at least as much as either comparison scheme.
Verdict profit_ordering() {
  Verdict v;
  std::vector<std::string> parts;
  std::size_t derived_survivors = 0;
  for (auto mode : {game::MoMode::printed, game::MoMode::derived}) {
    auto s = bundled();
    s.solver.mode = mode;
    const auto reports = baselines::compare_schemes(s, s.solver, 0.1);
    const auto& tla = reports.at(0);
    const auto& pure = reports.at(1);
    const auto& ilps = reports.at(2);
    std::vector<int> survivors;
    for (std::size_t k = 0; k < tla.ues.size(); ++k) {
      if (!tla.ues[k].participating) continue;
      survivors.push_back(tla.ues[k].id);
      v.require(tla.ues[k].profit >= pure.ues[k].profit && pure.ues[k].profit >= ilps.ues[k].profit,
                fmt::format("{} mode, UE {}: {} / {} / {}", game::to_string(mode), tla.ues[k].id,
                            tla.ues[k].profit, pure.ues[k].profit, ilps.ues[k].profit));
    }
    if (mode == game::MoMode::derived) derived_survivors = survivors.size();
    parts.push_back(fmt::format("{} survivors [{}]", game::to_string(mode), fmt::join(survivors, ",")));
  }
  v.require(derived_survivors > 0, "no surviving UE to compare");
  if (v.pass) v.detail = fmt::format("{}", fmt::join(parts, "; "));
  return v;
}

// 9. The elimination loop never returns a partly infeasible set.
Verdict feasible_or_empty() {
  Verdict v;
  std::mt19937_64 rng(1009);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const auto base = bundled();
  int infeasible = 0;
  const int n = 200;
  for (int i = 0; i < n; ++i) {
    auto s = base;
    s.name = fmt::format("random_{}", i);
    s.solver.mode = rng() % 2 ? game::MoMode::derived : game::MoMode::printed;
    s.contract.substitutability = 0.95 * u(rng);
    s.contract.global_sessions = 3 + rng() % 10;
    s.ues.resize(1 + rng() % 4);
    for (auto& ue : s.ues) {
      ue.initial_load_state = rng() % 5;
      ue.dataset_size *= 0.25 + 1.5 * u(rng);
      ue.f_max *= 0.75 + 0.5 * u(rng);
      ue.load_max = std::min(ue.load_max, ue.f_max);
      if (s.solver.mode == game::MoMode::derived) ue.eta = 0.5 + 1.5 * u(rng);
    }
    const auto out = solver::tla_gts(prepare_game(s), s.contract, s.solver);
    const double tm =
        cost::theta_max(s.contract.epsilon, s.contract.zeta, s.contract.global_sessions);
    if (out.infeasible_contract) {
      ++infeasible;
      v.require(out.ue_ids.empty() && out.theta.empty(), fmt::format("scenario {} is mixed", i));
      continue;
    }
    v.require(!out.ue_ids.empty(), fmt::format("scenario {}: empty but feasible", i));
    for (std::size_t k = 0; k < out.theta.size(); ++k) {
      v.require(out.theta[k] > 0.0 && out.theta[k] <= tm,
                fmt::format("scenario {}: UE {} theta {}", i, out.ue_ids[k], out.theta[k]));
      v.require(!out.cap_violations[k], fmt::format("scenario {}: UE {} over cap", i, out.ue_ids[k]));
    }
  }
  if (v.pass) v.detail = fmt::format("{} scenarios, {} infeasible, {} feasible", n, infeasible,
                                     n - infeasible);
  return v;
}

// 10. Module invariants, re-checked end to end.
Verdict invariants() {
  Verdict v;
  std::mt19937_64 rng(1010);
  const auto s = bundled();
  const auto ues = prepare_game(s);
  const auto channel = channel_chain(s.channel);

  // Row-stochasticity and the semigroup law for every chain.
  std::vector<markov::MarkovChain> chains{channel};
  for (const auto& ue : ues) chains.push_back(ue.profile.load_chain);
  for (const auto& chain : chains) {
    for (std::size_t a = 0; a <= 12; a += 3)
      for (std::size_t b = 1; b <= 7; b += 2) {
        const Eigen::MatrixXd joint = markov::transition_power(chain, a + b);
        const Eigen::MatrixXd split =
            markov::transition_power(chain, a) * markov::transition_power(chain, b);
        v.require((joint - split).cwiseAbs().maxCoeff() <= 1e-12, "semigroup law");
        for (Eigen::Index r = 0; r < joint.rows(); ++r)
          v.require(std::abs(joint.row(r).sum() - 1.0) <= 1e-12 && joint.row(r).minCoeff() >= 0.0,
                    "row-stochasticity");
      }
  }

  // Energy grows with background load and with the FL frequency.
  for (int i = 0; i < 200; ++i) {
    std::uniform_real_distribution<double> f(0.0, 2e9);
    const double f_ex = f(rng), f_k = f(rng), bump = f(rng);
    v.require(cost::training_energy(1e-28, f_ex + bump, f_k, 2.0) >=
                  cost::training_energy(1e-28, f_ex, f_k, 2.0),
              "energy not monotone in load");
    v.require(cost::training_energy(1e-28, f_ex, f_k + bump, 2.0) >=
                  cost::training_energy(1e-28, f_ex, f_k, 2.0),
              "energy not monotone in frequency");
  }

  // Payment identity on settled outcomes.
  auto derived = s;
  derived.solver.mode = game::MoMode::derived;
  const auto out = solver::tla_gts(ues, derived.contract, derived.solver);
  const auto recs = results::prediction_records(ues, s.contract, out, derived.solver.energy_iterations);
  for (std::size_t j = 0; j < out.ue_ids.size(); ++j) {
    const auto pos = static_cast<std::size_t>(out.ue_ids[j] - 1);
    double psi = 0.0;
    for (std::size_t t = 0; t < 10; ++t) psi += recs[pos * 10 + t].psi;
    v.require(std::abs(out.payments[j] - psi - out.profits[j]) <=
                  1e-12 * std::max(out.payments[j], psi),
              "payment identity");
  }

  // With no background load both games are the same game.
  auto blind = ues;
  for (auto& ue : blind) ue.forecast = ue.forecast.without_background_load();
  const auto a = solver::tla_gts(blind, derived.contract, derived.solver);
  const auto b = baselines::pure_gts(blind, derived.contract, derived.solver);
  v.require(a.prices == b.prices && a.theta == b.theta && a.profits == b.profits,
            "schemes differ at zero load");

  // ILPS quotes ignore rivals.
  const auto all = baselines::ilps(ues, s.contract, 0.1);
  for (std::size_t k = 0; k < ues.size(); ++k) {
    const auto alone = baselines::ilps(std::span(ues).subspan(k, 1), s.contract, 0.1);
    for (std::size_t t = 0; t < 10; ++t)
      v.require(all.at(k, t) == alone.at(0, t), "ILPS quote depends on rivals");
  }

  // Result files are deterministic and round-trip.
  const auto again = solver::tla_gts(ues, derived.contract, derived.solver);
  v.require(results::render_prices_csv(out) == results::render_prices_csv(again),
            "prices CSV differs between runs");
  const auto json = results::render_outcome_json(out);
  v.require(results::render_outcome_json(results::parse_outcome_json(json)) == json,
            "outcome JSON does not round-trip");
  v.require(parse_scenario(render_scenario(s)) == s, "scenario does not round-trip");

  if (v.pass) v.detail = "stochasticity, semigroup, energy, payment, coincidence, ILPS, files";
  return v;
}

}  // namespace

int main() {
  struct Criterion {
    int id;
    const char* name;
    double budget_s;
    std::function<Verdict()> run;
  };
  const std::vector<Criterion> criteria{
      {1, "load-sequence forecasts", 1.0, load_sequences},
      {2, "market constants", 1.0, market_constants},
      {3, "single-session price oracle", 5.0, best_response_oracle},
      {4, "MO response oracle", 5.0, mo_oracle},
      {5, "price gradient", 5.0, gradient},
      {6, "best-response convergence", 10.0, convergence},
      {7, "iteration scaling", 20.0, iteration_scaling},
      {8, "profit ordering", 30.0, profit_ordering},
      {9, "feasible or empty elimination", 60.0, feasible_or_empty},
      {10, "invariant suites", 60.0, invariants},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Verdict v;
    try {
      v = c.run();
    } catch (const std::exception& e) {
      v = {false, fmt::format("exception: {}", e.what())};
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (secs > c.budget_s) v.require(false, fmt::format("took {:.2f} s, budget {} s", secs, c.budget_s));
    failures += v.pass ? 0 : 1;
    fmt::print("{} criterion {:>2} {}: {} ({:.3f} s)\n", v.pass ? "PASS" : "FAIL", c.id, c.name,
               v.detail, secs);
  }
  return failures == 0 ? 0 : 1;
}
