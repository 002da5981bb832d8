#pragma once

// Finite-state discrete-time Markov chains for background CPU load and
// channel gain: discretization, transition-matrix estimation from slot
// traces, and the argmax prediction rules.

#include <cstddef>
#include <span>
#include <vector>

#include <Eigen/Core>

namespace flb::markov {

enum class StateKind { load, gain };

const char* to_string(StateKind kind) noexcept;

/// Ordered, equally spaced state levels. Load levels are in Hz and start at
/// zero; gain levels are linear channel gains and are strictly positive.
class StateSpace {
 public:
  StateKind kind() const noexcept { return kind_; }
  std::size_t count() const noexcept { return levels_.size(); }
  std::span<const double> levels() const noexcept { return levels_; }
  double level(std::size_t index) const;
  double lower_bound() const noexcept { return lower_; }
  double upper_bound() const noexcept { return upper_; }

  friend bool operator==(const StateSpace&, const StateSpace&) = default;

 private:
  friend StateSpace discretize(StateKind, double, double, std::size_t);
  StateSpace(StateKind kind, double lower, double upper, std::vector<double> levels)
      : kind_(kind), lower_(lower), upper_(upper), levels_(std::move(levels)) {}

  StateKind kind_;
  double lower_;
  double upper_;
  std::vector<double> levels_;
};

/// Splits [lo, hi] into `count` equally spaced levels including both ends.
/// Load spaces must start at zero.
StateSpace discretize(StateKind kind, double lo, double hi, std::size_t count);

/// A probability vector over the states of a chain.
class Distribution {
 public:
  explicit Distribution(Eigen::RowVectorXd probs);

  static Distribution uniform(std::size_t count);
  static Distribution point_mass(std::size_t count, std::size_t state);

  std::size_t size() const noexcept { return static_cast<std::size_t>(probs_.size()); }
  const Eigen::RowVectorXd& probs() const noexcept { return probs_; }
  double operator[](std::size_t i) const { return probs_(static_cast<Eigen::Index>(i)); }

 private:
  Eigen::RowVectorXd probs_;
};

/// A state space together with its row-stochastic transition matrix.
class MarkovChain {
 public:
  /// Throws ValidationError naming the first row that is not a probability
  /// vector (entries outside [0, 1] or a sum off by more than 1e-12).
  MarkovChain(StateSpace space, Eigen::MatrixXd stp);

  const StateSpace& space() const noexcept { return space_; }
  const Eigen::MatrixXd& stp() const noexcept { return stp_; }
  std::size_t count() const noexcept { return space_.count(); }
  double probability(std::size_t from, std::size_t to) const;

  static MarkovChain identity(StateSpace space);

 private:
  StateSpace space_;
  Eigen::MatrixXd stp_;
};

/// State indices observed once per slot, plus the window they span in seconds.
struct ObservationTrace {
  std::vector<std::size_t> slots;
  double observation_window = 0.0;
};

/// Frequency estimate of the transition matrix over consecutive slot pairs.
/// Self-transitions are counted like any other pair; states never left
/// during the trace get a uniform row.
MarkovChain estimate_stp(const StateSpace& space, const ObservationTrace& trace);

/// Most probable successor of `current`; ties resolve to the lowest index.
std::size_t predict_next_state(const MarkovChain& chain, std::size_t current);

/// `horizon` chained applications of predict_next_state starting from
/// `initial`; the initial state itself is not part of the result.
std::vector<std::size_t> predict_load_sequence(const MarkovChain& chain, std::size_t initial,
                                               std::size_t horizon);

/// stp^steps by binary exponentiation.
Eigen::MatrixXd transition_power(const MarkovChain& chain, std::size_t steps);

/// initial * stp^steps.
Distribution evolve_distribution(const MarkovChain& chain, const Distribution& initial,
                                 std::size_t steps);

/// Most probable channel state during parameter upload `session` (1-based),
/// i.e. argmax of initial * stp^(session * (delta + 1)).
std::size_t predict_channel_state(const MarkovChain& chain, const Distribution& initial,
                                  std::size_t session, std::size_t delta);

/// numerator / denominator as an exact non-negative integer, tolerance 1e-9.
/// Throws InvalidArgument otherwise.
std::size_t integral_ratio(double numerator, double denominator);

/// Index of the largest entry, first one on ties.
std::size_t argmax_lowest(const Eigen::Ref<const Eigen::RowVectorXd>& values);

}  // namespace flb::markov
