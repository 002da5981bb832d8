#pragma once

// Iteration accounting and per-session energy estimates for local training
// and parameter upload.

#include <cstddef>
#include <optional>
#include <vector>

#include "flb/markov.hpp"

namespace flb {

/// Physical and economic parameters of one UE.
struct UeProfile {
  int id = 0;
  double nu = 0.0;                 ///< effective switched capacitance
  double cycles_per_sample = 0.0;  ///< CPU cycles per data sample
  double dataset_size = 0.0;       ///< samples
  double eta = 1.0;                ///< local-iteration scale
  double f_max = 0.0;              ///< Hz
  markov::MarkovChain load_chain;
  std::size_t initial_load_state = 0;

  /// Throws ValidationError on the first violated invariant.
  void validate() const;
};

/// The MO's performance metrics and the shared radio parameters.
struct MoContract {
  double epsilon = 0.1;
  double zeta = 1.0;
  std::size_t global_sessions = 1;
  double t_train = 2.0;      ///< s
  double t_comm = 0.2;       ///< s
  double substitutability = 0.5;
  double bandwidth = 1e6;    ///< Hz
  double model_bits = 1e5;   ///< bits
  double noise_power = 1e-9; ///< W
  double ber = 1e-3;
  double coherence_time = 0.2;  ///< s

  /// t_train / coherence_time; throws InvalidArgument if not an integer.
  std::size_t delta() const;
  void validate() const;

  friend bool operator==(const MoContract&, const MoContract&) = default;
};

/// Which local-iteration count converts a purchased accuracy into work.
enum class IterationModel { taylor, exact };

namespace cost {

/// eta * ln(1/theta), theta in (0, 1).
double local_iterations(double theta, double eta);
/// eta * (1 - theta), the first-order form used throughout the game algebra.
double local_iterations_taylor(double theta, double eta);
double iterations(double theta, double eta, IterationModel model);

/// zeta * ln(1/epsilon) / (1 - theta_max).
double global_iterations(double epsilon, double zeta, double theta_max);
/// Largest admissible local accuracy; throws InfeasibleContract if <= 0.
double theta_max(double epsilon, double zeta, std::size_t global_sessions);

/// Extra CPU frequency needed to run `iterations` passes over the local data
/// within one training session.
double required_extra_frequency(const UeProfile& profile, double iterations, double t_train);

/// Additional energy of raising the CPU from f_ex to f_ex + f_k for t_train.
double training_energy(double nu, double f_ex, double f_k, double t_train);

/// Throws FrequencyCapViolation when f_ex + f_k exceeds f_max.
void check_frequency_cap(double f_ex, double f_k, double f_max, std::size_t session);

/// SNR gap for the target bit error rate, 1.5 / -ln(5 ber).
double ber_gap(double ber);

/// Lowest transmit power that uploads the model within t_comm at `gain`.
double minimum_transmit_power(const MoContract& contract, double gain);
double transmission_energy(const MoContract& contract, double gain);

}  // namespace cost

/// Accuracy-independent per-session predictions for one UE: background load
/// and channel state for sessions 1..I_g, and the upload energy they imply.
struct SessionForecast {
  std::vector<std::size_t> load_states;
  std::vector<double> extra_load_hz;  ///< predicted background frequency f_ex
  std::vector<std::size_t> gain_states;
  std::vector<double> gains;
  std::vector<double> comm_energy;  ///< J

  std::size_t sessions() const noexcept { return load_states.size(); }
  /// Same sessions with no background load.
  SessionForecast without_background_load() const;

  friend bool operator==(const SessionForecast&, const SessionForecast&) = default;
};

SessionForecast forecast_sessions(const UeProfile& profile, const MoContract& contract,
                                  const markov::MarkovChain& channel,
                                  const markov::Distribution& initial_gain);

/// Energy estimates for every session at a fixed iteration count.
struct SessionEstimates {
  SessionForecast forecast;
  double iterations = 0.0;
  double fl_frequency_hz = 0.0;  ///< f_k
  std::vector<double> training_energy;
  std::vector<double> comm_energy;
  std::vector<double> psi;  ///< stored sum of training and upload energy
  /// Zero-based index of the first session whose load would exceed f_max.
  std::optional<std::size_t> cap_violation;

  double total_energy() const;
};

/// Costs every session of `forecast`; cap violations are recorded, not thrown.
SessionEstimates evaluate_sessions(const UeProfile& profile, const MoContract& contract,
                                   const SessionForecast& forecast, double iterations);

/// Full pipeline at accuracy theta. Throws FrequencyCapViolation naming the
/// first session (1-based) that cannot admit the FL load.
SessionEstimates estimate_sessions(const UeProfile& profile, const MoContract& contract,
                                   const markov::MarkovChain& channel,
                                   const markov::Distribution& initial_gain, double theta,
                                   IterationModel model = IterationModel::exact);

}  // namespace flb
