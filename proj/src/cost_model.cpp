#include "flb/cost_model.hpp"

#include <cmath>

#include <fmt/format.h>

#include "flb/errors.hpp"

namespace flb {

void UeProfile::validate() const {
  auto require = [this](bool ok, const char* what) {
    if (!ok) throw ValidationError(fmt::format("UE {}: {}", id, what));
  };
  require(nu > 0.0, "nu must be positive");
  require(cycles_per_sample > 0.0, "cycles_per_sample must be positive");
  require(dataset_size > 0.0, "dataset_size must be positive");
  require(eta >= 0.0, "eta must be non-negative");
  require(f_max > 0.0, "f_max must be positive");
  require(load_chain.space().kind() == markov::StateKind::load, "load chain must be of load kind");
  require(initial_load_state < load_chain.count(), "initial load state out of range");
}

std::size_t MoContract::delta() const { return markov::integral_ratio(t_train, coherence_time); }

void MoContract::validate() const {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ValidationError("contract: " + what);
  };
  require(epsilon > 0.0 && epsilon <= 1.0, "epsilon must lie in (0, 1]");
  require(zeta > 0.0, "zeta must be positive");
  require(global_sessions >= 1, "global_sessions must be >= 1");
  require(t_train > 0.0 && t_comm > 0.0, "session durations must be positive");
  require(substitutability >= 0.0 && substitutability < 1.0,
          "substitutability must lie in [0, 1)");
  require(bandwidth > 0.0 && model_bits > 0.0 && noise_power > 0.0,
          "bandwidth, model_bits and noise_power must be positive");
  require(ber > 0.0 && 5.0 * ber < 1.0, "ber must satisfy 0 < 5 ber < 1");
  require(coherence_time > 0.0, "coherence_time must be positive");
  try {
    if (delta() < 1) throw InvalidArgument("t_train shorter than one coherence time");
  } catch (const InvalidArgument& e) {
    throw ValidationError(fmt::format("contract: {}", e.what()));
  }
}

namespace cost {

double local_iterations(double theta, double eta) {
  if (!(theta > 0.0 && theta < 1.0))
    throw InvalidArgument(fmt::format("local accuracy {} outside (0, 1)", theta));
  return eta * std::log(1.0 / theta);
}

double local_iterations_taylor(double theta, double eta) { return eta * (1.0 - theta); }

double iterations(double theta, double eta, IterationModel model) {
  return model == IterationModel::taylor ? local_iterations_taylor(theta, eta)
                                         : local_iterations(theta, eta);
}

double global_iterations(double epsilon, double zeta, double theta_max) {
  if (!(theta_max < 1.0))
    throw InvalidArgument(fmt::format("theta_max {} must be below 1", theta_max));
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw InvalidArgument(fmt::format("epsilon {} outside (0, 1]", epsilon));
  return zeta * std::log(1.0 / epsilon) / (1.0 - theta_max);
}

double theta_max(double epsilon, double zeta, std::size_t global_sessions) {
  if (global_sessions == 0) throw InvalidArgument("global_sessions must be positive");
  if (!(epsilon > 0.0 && epsilon <= 1.0))
    throw InvalidArgument(fmt::format("epsilon {} outside (0, 1]", epsilon));
  const double value =
      1.0 - zeta * std::log(1.0 / epsilon) / static_cast<double>(global_sessions);
  if (!(value > 0.0))
    throw InfeasibleContract(fmt::format(
        "epsilon {} cannot be reached in {} sessions (theta_max = {})", epsilon,
        global_sessions, value));
  return value;
}

double required_extra_frequency(const UeProfile& profile, double iterations, double t_train) {
  if (iterations < 0.0) throw InvalidArgument("iteration count must be non-negative");
  return profile.cycles_per_sample * profile.dataset_size * iterations / t_train;
}

double training_energy(double nu, double f_ex, double f_k, double t_train) {
  if (f_ex < 0.0 || f_k < 0.0) throw InvalidArgument("frequencies must be non-negative");
  const double total = f_ex + f_k;
  return nu * (total * total - f_ex * f_ex) * t_train;
}

void check_frequency_cap(double f_ex, double f_k, double f_max, std::size_t session) {
  if (f_ex + f_k > f_max) throw FrequencyCapViolation(session, f_ex + f_k, f_max);
}

double ber_gap(double ber) {
  if (!(ber > 0.0 && 5.0 * ber < 1.0))
    throw InvalidArgument(fmt::format("ber {} must satisfy 0 < 5 ber < 1", ber));
  return 1.5 / -std::log(5.0 * ber);
}

double minimum_transmit_power(const MoContract& contract, double gain) {
  if (!(gain > 0.0)) throw InvalidArgument(fmt::format("channel gain {} must be positive", gain));
  const double rate_factor =
      std::exp2(contract.model_bits / (contract.bandwidth * contract.t_comm)) - 1.0;
  return rate_factor * contract.noise_power / (gain * ber_gap(contract.ber));
}

double transmission_energy(const MoContract& contract, double gain) {
  return minimum_transmit_power(contract, gain) * contract.t_comm;
}

}  // namespace cost

SessionForecast SessionForecast::without_background_load() const {
  SessionForecast copy = *this;
  for (auto& s : copy.load_states) s = 0;
  for (auto& f : copy.extra_load_hz) f = 0.0;
  return copy;
}

SessionForecast forecast_sessions(const UeProfile& profile, const MoContract& contract,
                                  const markov::MarkovChain& channel,
                                  const markov::Distribution& initial_gain) {
  if (channel.space().kind() != markov::StateKind::gain)
    throw InvalidArgument("channel chain must be of gain kind");
  const std::size_t sessions = contract.global_sessions;
  const std::size_t delta = contract.delta();

  SessionForecast f;
  f.load_states = markov::predict_load_sequence(profile.load_chain, profile.initial_load_state,
                                                sessions);
  f.extra_load_hz.reserve(sessions);
  for (auto m : f.load_states) f.extra_load_hz.push_back(profile.load_chain.space().level(m));

  f.gain_states.reserve(sessions);
  f.gains.reserve(sessions);
  f.comm_energy.reserve(sessions);
  for (std::size_t t = 1; t <= sessions; ++t) {
    const auto n = markov::predict_channel_state(channel, initial_gain, t, delta);
    const double gain = channel.space().level(n);
    f.gain_states.push_back(n);
    f.gains.push_back(gain);
    f.comm_energy.push_back(cost::transmission_energy(contract, gain));
  }
  return f;
}

double SessionEstimates::total_energy() const {
  double sum = 0.0;
  for (double p : psi) sum += p;
  return sum;
}

SessionEstimates evaluate_sessions(const UeProfile& profile, const MoContract& contract,
                                   const SessionForecast& forecast, double iterations) {
  SessionEstimates e;
  e.forecast = forecast;
  e.iterations = iterations;
  e.fl_frequency_hz = cost::required_extra_frequency(profile, iterations, contract.t_train);
  const std::size_t n = forecast.sessions();
  e.training_energy.reserve(n);
  e.comm_energy = forecast.comm_energy;
  e.psi.reserve(n);
  for (std::size_t t = 0; t < n; ++t) {
    const double f_ex = forecast.extra_load_hz[t];
    if (!e.cap_violation && f_ex + e.fl_frequency_hz > profile.f_max) e.cap_violation = t;
    const double e_f =
        cost::training_energy(profile.nu, f_ex, e.fl_frequency_hz, contract.t_train);
    e.training_energy.push_back(e_f);
    e.psi.push_back(e_f + e.comm_energy[t]);
  }
  return e;
}

SessionEstimates estimate_sessions(const UeProfile& profile, const MoContract& contract,
                                   const markov::MarkovChain& channel,
                                   const markov::Distribution& initial_gain, double theta,
                                   IterationModel model) {
  const auto forecast = forecast_sessions(profile, contract, channel, initial_gain);
  auto estimates =
      evaluate_sessions(profile, contract, forecast, cost::iterations(theta, profile.eta, model));
  if (estimates.cap_violation) {
    const auto t = *estimates.cap_violation;
    cost::check_frequency_cap(forecast.extra_load_hz[t], estimates.fl_frequency_hz, profile.f_max,
                              t + 1);
  }
  return estimates;
}

}  // namespace flb
