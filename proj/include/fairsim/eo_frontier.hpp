#pragma once

#include <string>
#include <vector>

#include "json.hpp"

#include "fairsim/signal_model.hpp"

namespace fairsim {

/// Convex region spanned by a group's ROC curve and the (0,0)-(1,1) segment.
/// Vertices are stored counterclockwise: (0,0), (1,1), then the upper-hull
/// vertices in decreasing fp. A diagonal-only region has just the two
/// anchors.
struct FeasibleRegion {
  int group = 0;
  std::vector<OperatingPoint> vertices;

  bool contains(const OperatingPoint& pt, double slack = 1e-9) const;
  /// Upper boundary as a derived ROC curve (fp ascending).
  RocCurve upper_boundary() const;
  void validate() const;
};

FeasibleRegion feasible_region(const RocCurve& curve, int group = 0);

/// Upper boundary of the intersection of two feasible regions, sampled at
/// n_points uniformly spaced fp values. Concave and on or above the
/// diagonal by construction.
RocCurve shared_frontier(const FeasibleRegion& region0, const FeasibleRegion& region1,
                         int n_points = 1001);

struct MixtureComponent {
  enum class Kind { Threshold, Coin };
  Kind kind;
  double value;   // source threshold, or acceptance probability of the coin
  double weight;  // in [0,1]; weights of a predictor sum to 1
  OperatingPoint point;
};

/// Randomized post-processing hitting a target (fp, tp): a mixture of at
/// most two threshold rules and a coin-flip rule.
struct DerivedPredictor {
  OperatingPoint target;
  std::vector<MixtureComponent> components;

  OperatingPoint realized() const;
};

/// Expresses the target as a convex combination of extreme points of the
/// curve's feasible region. Throws InfeasibleTargetError when the target
/// lies outside (beyond 1e-9 slack).
DerivedPredictor realize(const RocCurve& roc_s, const OperatingPoint& target);

/// Pseudo-signal over the frontier parameter p = 1 - fp: F_u(p) = 1 - fp(p)
/// = p and F_q(p) = 1 - tp(p), identical for both groups. The incentive at
/// p equals omega * (tp - fp) for any omega.
SignalModel derived_signal_model(const RocCurve& frontier);

/// CSV with columns p, fp, tp where p = 1 - fp.
std::string frontier_to_csv(const RocCurve& frontier);

nlohmann::json predictor_to_json(const DerivedPredictor& predictor);

}  // namespace fairsim
