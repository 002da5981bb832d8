#include "flb/markov.hpp"

#include <cmath>

#include <fmt/format.h>

#include "flb/errors.hpp"

namespace flb::markov {
namespace {

constexpr double kStochasticTolerance = 1e-12;

// Rows drift away from unit sum under repeated products; pull them back.
void renormalize_rows(Eigen::MatrixXd& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double sum = m.row(r).sum();
    if (std::abs(sum - 1.0) > kStochasticTolerance && sum > 0.0) m.row(r) /= sum;
  }
}

void check_state(std::size_t state, std::size_t count, const char* what) {
  if (state >= count)
    throw InvalidArgument(fmt::format("{} state {} out of range [0, {})", what, state, count));
}

}  // namespace

const char* to_string(StateKind kind) noexcept {
  return kind == StateKind::load ? "load" : "gain";
}

double StateSpace::level(std::size_t index) const {
  check_state(index, levels_.size(), "level");
  return levels_[index];
}

StateSpace discretize(StateKind kind, double lo, double hi, std::size_t count) {
  if (count < 2) throw InvalidArgument(fmt::format("state count must be >= 2, got {}", count));
  if (!(hi > lo)) throw InvalidArgument(fmt::format("upper bound {} must exceed lower bound {}", hi, lo));
  if (lo < 0.0) throw InvalidArgument(fmt::format("lower bound {} must be non-negative", lo));
  if (kind == StateKind::load && lo != 0.0)
    throw InvalidArgument("load state spaces start at zero frequency");
  if (kind == StateKind::gain && lo <= 0.0)
    throw InvalidArgument("gain levels must be strictly positive");

  std::vector<double> levels(count);
  const double span = hi - lo;
  const auto last = static_cast<double>(count - 1);
  for (std::size_t i = 0; i < count; ++i) levels[i] = lo + (static_cast<double>(i) / last) * span;
  levels.back() = hi;
  return StateSpace(kind, lo, hi, std::move(levels));
}

Distribution::Distribution(Eigen::RowVectorXd probs) : probs_(std::move(probs)) {
  if (probs_.size() == 0) throw ValidationError("distribution is empty");
  for (Eigen::Index i = 0; i < probs_.size(); ++i) {
    if (!(probs_(i) >= 0.0) || !std::isfinite(probs_(i)))
      throw ValidationError(fmt::format("distribution entry {} is {}", i, probs_(i)));
  }
  const double sum = probs_.sum();
  if (std::abs(sum - 1.0) > kStochasticTolerance)
    throw ValidationError(fmt::format("distribution sums to {}", sum));
}

Distribution Distribution::uniform(std::size_t count) {
  if (count == 0) throw InvalidArgument("uniform distribution over zero states");
  return Distribution(Eigen::RowVectorXd::Constant(static_cast<Eigen::Index>(count),
                                                   1.0 / static_cast<double>(count)));
}

Distribution Distribution::point_mass(std::size_t count, std::size_t state) {
  check_state(state, count, "point-mass");
  Eigen::RowVectorXd p = Eigen::RowVectorXd::Zero(static_cast<Eigen::Index>(count));
  p(static_cast<Eigen::Index>(state)) = 1.0;
  return Distribution(std::move(p));
}

MarkovChain::MarkovChain(StateSpace space, Eigen::MatrixXd stp)
    : space_(std::move(space)), stp_(std::move(stp)) {
  const auto n = static_cast<Eigen::Index>(space_.count());
  if (stp_.rows() != n || stp_.cols() != n)
    throw ValidationError(fmt::format("transition matrix is {}x{}, expected {}x{}", stp_.rows(),
                                      stp_.cols(), n, n));
  for (Eigen::Index r = 0; r < n; ++r) {
    for (Eigen::Index c = 0; c < n; ++c) {
      const double p = stp_(r, c);
      if (!(p >= 0.0 && p <= 1.0))
        throw ValidationError(fmt::format("row {} entry {} is {}, outside [0, 1]", r, c, p));
    }
    const double sum = stp_.row(r).sum();
    if (std::abs(sum - 1.0) > kStochasticTolerance)
      throw ValidationError(fmt::format("row {} sums to {}", r, sum));
  }
}

double MarkovChain::probability(std::size_t from, std::size_t to) const {
  check_state(from, count(), "source");
  check_state(to, count(), "target");
  return stp_(static_cast<Eigen::Index>(from), static_cast<Eigen::Index>(to));
}

MarkovChain MarkovChain::identity(StateSpace space) {
  const auto n = static_cast<Eigen::Index>(space.count());
  return MarkovChain(std::move(space), Eigen::MatrixXd::Identity(n, n));
}

MarkovChain estimate_stp(const StateSpace& space, const ObservationTrace& trace) {
  if (trace.slots.size() < 2)
    throw InsufficientData(
        fmt::format("trace has {} slot(s); at least 2 are needed", trace.slots.size()));
  const std::size_t n = space.count();
  for (std::size_t i = 0; i < trace.slots.size(); ++i) {
    if (trace.slots[i] >= n)
      throw InvalidArgument(
          fmt::format("trace slot {} holds state {}, outside [0, {})", i, trace.slots[i], n));
  }

  const auto dim = static_cast<Eigen::Index>(n);
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(dim, dim);
  for (std::size_t i = 1; i < trace.slots.size(); ++i)
    counts(static_cast<Eigen::Index>(trace.slots[i - 1]),
           static_cast<Eigen::Index>(trace.slots[i])) += 1.0;

  for (Eigen::Index r = 0; r < dim; ++r) {
    const double visits = counts.row(r).sum();
    if (visits == 0.0)
      counts.row(r).setConstant(1.0 / static_cast<double>(n));
    else
      counts.row(r) /= visits;
  }
  return MarkovChain(space, std::move(counts));
}

std::size_t argmax_lowest(const Eigen::Ref<const Eigen::RowVectorXd>& values) {
  if (values.size() == 0) throw InvalidArgument("argmax of an empty vector");
  Eigen::Index best = 0;
  for (Eigen::Index i = 1; i < values.size(); ++i)
    if (values(i) > values(best)) best = i;
  return static_cast<std::size_t>(best);
}

std::size_t predict_next_state(const MarkovChain& chain, std::size_t current) {
  check_state(current, chain.count(), "current");
  return argmax_lowest(chain.stp().row(static_cast<Eigen::Index>(current)));
}

std::vector<std::size_t> predict_load_sequence(const MarkovChain& chain, std::size_t initial,
                                               std::size_t horizon) {
  if (horizon < 1) throw InvalidArgument("prediction horizon must be >= 1");
  std::vector<std::size_t> states;
  states.reserve(horizon);
  std::size_t state = initial;
  for (std::size_t t = 0; t < horizon; ++t) {
    state = predict_next_state(chain, state);
    states.push_back(state);
  }
  return states;
}

Eigen::MatrixXd transition_power(const MarkovChain& chain, std::size_t steps) {
  const auto n = static_cast<Eigen::Index>(chain.count());
  Eigen::MatrixXd result = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd base = chain.stp();
  while (steps > 0) {
    if (steps & 1U) {
      result = (result * base).eval();
      renormalize_rows(result);
    }
    steps >>= 1U;
    if (steps > 0) {
      base = (base * base).eval();
      renormalize_rows(base);
    }
  }
  return result;
}

Distribution evolve_distribution(const MarkovChain& chain, const Distribution& initial,
                                 std::size_t steps) {
  if (initial.size() != chain.count())
    throw InvalidArgument(fmt::format("distribution has {} entries, chain has {} states",
                                      initial.size(), chain.count()));
  if (steps == 0) return initial;
  Eigen::RowVectorXd p = initial.probs() * transition_power(chain, steps);
  const double sum = p.sum();
  if (std::abs(sum - 1.0) > kStochasticTolerance) p /= sum;
  return Distribution(std::move(p));
}

std::size_t predict_channel_state(const MarkovChain& chain, const Distribution& initial,
                                  std::size_t session, std::size_t delta) {
  if (session < 1) throw InvalidArgument("channel sessions are numbered from 1");
  const std::size_t steps = session * (delta + 1);
  return argmax_lowest(evolve_distribution(chain, initial, steps).probs());
}

std::size_t integral_ratio(double numerator, double denominator) {
  if (!(denominator > 0.0) || !(numerator >= 0.0))
    throw InvalidArgument(fmt::format("ratio {}/{} is not a non-negative integer", numerator,
                                      denominator));
  const double ratio = numerator / denominator;
  const double rounded = std::round(ratio);
  if (std::abs(rounded * denominator - numerator) > 1e-9)
    throw InvalidArgument(
        fmt::format("ratio {}/{} = {} is not an integer", numerator, denominator, ratio));
  return static_cast<std::size_t>(rounded);
}

}  // namespace flb::markov
