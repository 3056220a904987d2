#pragma once

#include <array>
#include <vector>

#include "fairsim/data.hpp"
#include "fairsim/game.hpp"
#include "fairsim/signal_model.hpp"

namespace fairsim::testing {

// f_q = N(1,1), f_u = N(0,1) for both groups; the workhorse scenario
inline SignalModel g1_model() {
  const std::array<std::array<double, 2>, 2> mean{{{0.0, 1.0}, {0.0, 1.0}}};
  const std::array<std::array<double, 2>, 2> sd{{{1.0, 1.0}, {1.0, 1.0}}};
  return SignalModel::two_group_gaussian(GridSpec{-6.0, 7.0, 2001}, mean, sd);
}

inline GameParams g1_params() {
  GameParams p;  // v_q = v_u = omega = 1, cost U[0, 0.2]
  return p;
}

// identical densities for both efforts: the signal carries no information
inline SignalModel uninformative_model() {
  const std::array<std::array<double, 2>, 2> mean{{{0.0, 0.0}, {0.0, 0.0}}};
  const std::array<std::array<double, 2>, 2> sd{{{1.0, 1.0}, {1.0, 1.0}}};
  return SignalModel::two_group_gaussian(GridSpec{-6.0, 6.0, 2001}, mean, sd);
}

// simple trapezoid quadrature over sampled values
inline double trapezoid(const std::vector<double>& x, const std::vector<double>& y) {
  double acc = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    acc += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
  }
  return acc;
}

}  // namespace fairsim::testing
