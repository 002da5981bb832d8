#pragma once

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "flb/markov.hpp"
#include "flb/scenario.hpp"

namespace fixtures {

inline std::string scenario_path(const std::string& name) {
  return std::string(FLB_SCENARIO_DIR) + "/" + name;
}

inline Eigen::MatrixXd rows(std::initializer_list<std::initializer_list<double>> values) {
  Eigen::MatrixXd m(static_cast<Eigen::Index>(values.size()),
                    static_cast<Eigen::Index>(values.begin()->size()));
  Eigen::Index r = 0;
  for (const auto& row : values) {
    Eigen::Index c = 0;
    for (double v : row) m(r, c++) = v;
    ++r;
  }
  return m;
}

// Load matrices of the four-UE reference deployment, as printed. Rows that do
// not sum to one are rescaled by the bundled scenario.
inline Eigen::MatrixXd load_matrix(int ue) {
  switch (ue) {
    case 1:
      return rows({{0.3, 0.15, 0.25, 0.1, 0.2},
                   {0.2, 0.1, 0.1, 0.4, 0.2},
                   {0.1, 0.4, 0.1, 0.1, 0.2},
                   {0.4, 0.1, 0.1, 0.2, 0.2},
                   {0.1, 0.3, 0.1, 0.3, 0.2}});
    case 2:
      return rows({{0.2, 0.3, 0.1, 0.1, 0.3},
                   {0.3, 0.1, 0.4, 0.1, 0.1},
                   {0.2, 0.2, 0.3, 0.1, 0.2},
                   {0.1, 0.3, 0.4, 0.1, 0.1},
                   {0.1, 0.2, 0.4, 0.2, 0.1}});
    case 3:
      return rows({{0.2, 0.1, 0.35, 0.15, 0.1},
                   {0.1, 0.15, 0.3, 0.25, 0.2},
                   {0.1, 0.1, 0.1, 0.4, 0.3},
                   {0.1, 0.1, 0.4, 0.1, 0.3},
                   {0.1, 0.1, 0.4, 0.3, 0.1}});
    default:
      return rows({{0.2, 0.1, 0.3, 0.2, 0.2},
                   {0.2, 0.15, 0.3, 0.25, 0.1},
                   {0.3, 0.1, 0.2, 0.1, 0.3},
                   {0.2, 0.4, 0.2, 0.1, 0.1},
                   {0.2, 0.4, 0.1, 0.2, 0.1}});
  }
}

inline Eigen::MatrixXd normalized(Eigen::MatrixXd m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    const double s = m.row(r).sum();
    if (std::abs(s - 1.0) > 1e-12) m.row(r) /= s;
  }
  return m;
}

inline Eigen::MatrixXd channel_matrix() {
  const double base[] = {0.489, 0.256, 0.128, 0.064, 0.032, 0.016, 0.008, 0.004, 0.002, 0.001};
  Eigen::MatrixXd m(10, 10);
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) m(i, j) = base[((j - i) % 10 + 10) % 10];
  return m;
}

inline flb::markov::MarkovChain load_chain(int ue) {
  return flb::markov::MarkovChain(
      flb::markov::discretize(flb::markov::StateKind::load, 0.0, 2e9, 5),
      normalized(load_matrix(ue)));
}

inline const double kGainMin = std::pow(2.0, 0.4) - 1.0;
inline const double kGainMax = std::pow(2.0, 3.1) - 1.0;

inline flb::markov::MarkovChain channel_chain() {
  return flb::markov::MarkovChain(
      flb::markov::discretize(flb::markov::StateKind::gain, kGainMin, kGainMax, 10),
      channel_matrix());
}

}  // namespace fixtures
