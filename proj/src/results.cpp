#include "flb/results.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include "json.hpp"

#include "flb/errors.hpp"

namespace flb::results {
namespace {

std::string num(double x) {
  if (!std::isfinite(x)) return "null";
  return fmt::format("{:.17g}", x);
}

template <typename T, typename Fn>
std::string array(const std::vector<T>& xs, Fn&& render) {
  std::string out = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i) out += ", ";
    out += render(xs[i]);
  }
  return out + "]";
}

std::string numbers(const std::vector<double>& xs) { return array(xs, num); }

std::string ints(const std::vector<int>& xs) {
  return array(xs, [](int x) { return std::to_string(x); });
}

std::string bools(const std::vector<bool>& xs) {
  std::string out = "[";
  for (std::size_t i = 0; i < xs.size(); ++i) out += (i ? ", " : "") + std::string(xs[i] ? "true" : "false");
  return out + "]";
}

std::string price_rows(const game::PriceProfile& p, const std::string& indent) {
  if (p.ues() == 0) return "[]";
  std::string out = "[\n";
  for (std::size_t k = 0; k < p.ues(); ++k) {
    const auto row = p.row(k);
    out += indent + "  " + numbers(std::vector<double>(row.begin(), row.end()));
    out += k + 1 < p.ues() ? ",\n" : "\n";
  }
  return out + indent + "]";
}

double as_double(const nlohmann::json& j) {
  if (j.is_null()) return std::nan("");
  return j.get<double>();
}

std::vector<double> as_doubles(const nlohmann::json& j) {
  std::vector<double> out;
  for (const auto& x : j) out.push_back(as_double(x));
  return out;
}

game::PriceProfile as_prices(const nlohmann::json& j) {
  std::vector<std::vector<double>> rows;
  for (const auto& row : j) rows.push_back(as_doubles(row));
  return game::PriceProfile(rows);
}

}  // namespace

std::vector<PredictionRecord> prediction_records(std::span<const solver::GameUe> ues,
                                                 const MoContract& contract,
                                                 const solver::NeOutcome& ne,
                                                 IterationModel model) {
  double theta_max = 0.0;
  try {
    theta_max = cost::theta_max(contract.epsilon, contract.zeta, contract.global_sessions);
  } catch (const InfeasibleContract&) {
    return {};
  }
  std::vector<PredictionRecord> out;
  for (const auto& ue : ues) {
    double theta = 0.5 * theta_max;
    for (std::size_t k = 0; k < ne.ue_ids.size(); ++k)
      if (ne.ue_ids[k] == ue.profile.id) theta = ne.theta[k];
    const double iters =
        cost::iterations(solver::accounting_theta(theta, theta_max), ue.profile.eta, model);
    const auto est = evaluate_sessions(ue.profile, contract, ue.forecast, iters);
    for (std::size_t t = 0; t < ue.forecast.sessions(); ++t) {
      out.push_back({.ue = ue.profile.id,
                     .session = t + 1,
                     .load_state_hz = ue.forecast.extra_load_hz[t],
                     .gain_state = ue.forecast.gains[t],
                     .training_energy = est.training_energy[t],
                     .comm_energy = est.comm_energy[t],
                     .psi = est.psi[t]});
    }
  }
  return out;
}

std::string render_prices_csv(const solver::NeOutcome& ne) {
  std::string out = "iteration,ue,session,price,grad_norm\n";
  for (const auto& rec : ne.trajectory) {
    for (std::size_t k = 0; k < rec.prices.ues(); ++k) {
      for (std::size_t t = 0; t < rec.prices.sessions(); ++t) {
        out += fmt::format("{},{},{},{},{}\n", rec.iteration, ne.trajectory_ue_ids.at(k), t + 1,
                           num(rec.prices.at(k, t)), num(rec.grad_norms.at(k)));
      }
    }
  }
  return out;
}

std::string render_profits_csv(std::span<const baselines::ProfitReport> reports) {
  std::string out = "scheme,ue,profit_J,payment_J\n";
  for (const auto& r : reports)
    for (const auto& ue : r.ues)
      out += fmt::format("{},{},{},{}\n", baselines::to_string(r.scheme), ue.id, num(ue.profit),
                         num(ue.payment));
  return out;
}

std::string render_predictions_csv(std::span<const PredictionRecord> records) {
  std::string out = "ue,session,load_state_hz,gain_state,eF_J,eC_J,psi_J\n";
  for (const auto& r : records)
    out += fmt::format("{},{},{},{},{},{},{}\n", r.ue, r.session, num(r.load_state_hz),
                       num(r.gain_state), num(r.training_energy), num(r.comm_energy), num(r.psi));
  return out;
}

std::string render_outcome_json(const solver::NeOutcome& ne) {
  std::string o = "{\n";
  auto field = [&](const char* key, const std::string& value, bool last = false) {
    o += fmt::format("  \"{}\": {}{}\n", key, value, last ? "" : ",");
  };
  field("converged", ne.converged ? "true" : "false");
  field("iterations", std::to_string(ne.iterations));
  field("infeasible_contract", ne.infeasible_contract ? "true" : "false");
  field("rounds", std::to_string(ne.rounds));
  field("ue_ids", ints(ne.ue_ids));
  field("prices", price_rows(ne.prices, "  "));
  field("theta", numbers(ne.theta));
  field("profits", numbers(ne.profits));
  field("payments", numbers(ne.payments));
  field("mo_cost", num(ne.mo_cost));
  field("fixed_point_residual", num(ne.fixed_point_residual));
  field("cap_violations", array(ne.cap_violations, [](const std::optional<std::size_t>& v) {
          return v ? std::to_string(*v) : std::string("null");
        }));
  field("eliminated_ues", ints(ne.eliminated_ues));
  field("trajectory_ue_ids", ints(ne.trajectory_ue_ids));

  std::string traj = ne.trajectory.empty() ? "[]" : "[\n";
  for (std::size_t i = 0; i < ne.trajectory.size(); ++i) {
    const auto& rec = ne.trajectory[i];
    traj += "    {\n";
    traj += fmt::format("      \"iteration\": {},\n", rec.iteration);
    traj += fmt::format("      \"prices\": {},\n", price_rows(rec.prices, "      "));
    traj += fmt::format("      \"theta\": {},\n", numbers(rec.theta));
    traj += fmt::format("      \"grad_norms\": {},\n", numbers(rec.grad_norms));
    traj += fmt::format("      \"price_clamped\": {},\n", bools(rec.price_clamped));
    traj += fmt::format("      \"theta_clamped\": {}\n", bools(rec.theta_clamped));
    traj += i + 1 < ne.trajectory.size() ? "    },\n" : "    }\n  ]";
  }
  field("trajectory", traj, true);
  return o + "}\n";
}

solver::NeOutcome parse_outcome_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("outcome.json", 1, static_cast<int>(e.byte), e.what());
  }
  try {
    solver::NeOutcome ne;
    ne.converged = j.at("converged").get<bool>();
    ne.iterations = j.at("iterations").get<std::size_t>();
    ne.infeasible_contract = j.at("infeasible_contract").get<bool>();
    ne.rounds = j.at("rounds").get<std::size_t>();
    ne.ue_ids = j.at("ue_ids").get<std::vector<int>>();
    ne.prices = as_prices(j.at("prices"));
    ne.theta = as_doubles(j.at("theta"));
    ne.profits = as_doubles(j.at("profits"));
    ne.payments = as_doubles(j.at("payments"));
    ne.mo_cost = as_double(j.at("mo_cost"));
    ne.fixed_point_residual = as_double(j.at("fixed_point_residual"));
    for (const auto& v : j.at("cap_violations"))
      ne.cap_violations.push_back(v.is_null() ? std::nullopt
                                              : std::optional<std::size_t>(v.get<std::size_t>()));
    ne.eliminated_ues = j.at("eliminated_ues").get<std::vector<int>>();
    ne.trajectory_ue_ids = j.at("trajectory_ue_ids").get<std::vector<int>>();
    for (const auto& r : j.at("trajectory")) {
      solver::IterationRecord rec;
      rec.iteration = r.at("iteration").get<std::size_t>();
      rec.prices = as_prices(r.at("prices"));
      rec.theta = as_doubles(r.at("theta"));
      rec.grad_norms = as_doubles(r.at("grad_norms"));
      rec.price_clamped = r.at("price_clamped").get<std::vector<bool>>();
      rec.theta_clamped = r.at("theta_clamped").get<std::vector<bool>>();
      ne.trajectory.push_back(std::move(rec));
    }
    return ne;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(fmt::format("outcome.json: {}", e.what()));
  }
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError(fmt::format("cannot open '{}' for writing", path.string()));
  out << text;
  out.flush();
  if (!out) throw IoError(fmt::format("failed writing '{}'", path.string()));
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read '{}'", path.string()));
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void emit_results(const ResultBundle& bundle, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(fmt::format("cannot create '{}': {}", dir.string(), ec.message()));
  write_text(dir / "prices.csv", render_prices_csv(bundle.ne));
  write_text(dir / "profits.csv", render_profits_csv(bundle.reports));
  write_text(dir / "predictions.csv", render_predictions_csv(bundle.predictions));
  write_text(dir / "outcome.json", render_outcome_json(bundle.ne));
}

}  // namespace flb::results
