#pragma once

#include <cmath>
#include <string>

#include "ptc/traffic.hpp"

namespace fixtures {

inline ptc::HypothesisSet test1() {
  using ptc::HypothesisModel;
  return ptc::HypothesisSet::equiprobable({HypothesisModel::fixed(1, 0.4, "exponential"),
                                           HypothesisModel::fixed(2, 0.3, "erlang"),
                                           HypothesisModel::fixed(0.8, 0.5, "gamma")});
}

inline ptc::HypothesisSet test2() {
  using ptc::HypothesisModel;
  return ptc::HypothesisSet::equiprobable({HypothesisModel::fixed(1, 0.4, "exponential"),
                                           HypothesisModel::fixed(2, 0.8, "erlang"),
                                           HypothesisModel::fixed(0.5, 0.2, "gamma")});
}

inline ptc::HypothesisSet test1_fluct() {
  using ptc::HypothesisModel;
  return ptc::HypothesisSet::equiprobable({HypothesisModel::uniform(1, 0.4, 0.9, "exponential"),
                                           HypothesisModel::uniform(2, 0.1, 0.3, "erlang"),
                                           HypothesisModel::uniform(0.2, 0.2, 0.5, "gamma")});
}

inline ptc::HypothesisSet test2_fluct() {
  using ptc::HypothesisModel;
  return ptc::HypothesisSet::equiprobable({HypothesisModel::uniform(1, 0.4, 0.9, "exponential"),
                                           HypothesisModel::uniform(2, 1.2, 1.4, "erlang"),
                                           HypothesisModel::uniform(3, 1.1, 2.8, "gamma")});
}

inline std::string scenario_path(const std::string& name) {
  return std::string(PTC_SCENARIO_DIR) + "/" + name + ".cfg";
}

// |a - b| <= 3 standard errors.
inline bool within_3se(double a, double b, double se) { return std::fabs(a - b) <= 3.0 * se; }

}  // namespace fixtures
