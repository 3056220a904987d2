#pragma once

#include <array>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fairsim/distribution.hpp"

namespace fairsim {

enum class Effort { Unqualified = 0, Qualified = 1 };

inline constexpr int kNumGroups = 2;

char effort_code(Effort e);
std::optional<Effort> effort_from_code(char c);

struct EvalResult {
  double pdf;
  double cdf;
};

/// Score distributions f_{e,s}, F_{e,s} for both efforts and both groups,
/// together with the shared evaluation grid.
class SignalModel {
 public:
  SignalModel(GridSpec grid, Distribution1D q0, Distribution1D u0, Distribution1D q1,
              Distribution1D u1);

  /// Equal-variance-per-cell gaussian model; mean/sd indexed [group][effort].
  static SignalModel two_group_gaussian(const GridSpec& grid,
                                        const std::array<std::array<double, 2>, 2>& mean,
                                        const std::array<std::array<double, 2>, 2>& sd);

  const GridSpec& grid() const { return grid_; }
  const Distribution1D& cell(Effort e, int s) const;

  EvalResult eval(Effort e, int s, double theta) const;

  /// phi_s(theta) = f_u / f_q. Returns +inf when f_q vanishes but f_u does
  /// not; throws UndefinedRatioError when both vanish.
  double likelihood_ratio(int s, double theta) const;

  /// Checks the grid-mass invariants (cdf near 0/1 at the grid edges).
  void validate() const;

 private:
  GridSpec grid_;
  std::array<Distribution1D, 4> cells_;  // index = s * 2 + effort
};

struct MlrpReport {
  bool holds = false;
  /// Consecutive grid points (theta_i, theta_{i+1}) where f_q/f_u drops by
  /// more than 1e-9.
  std::vector<std::pair<double, double>> violations;
};

/// Monotone likelihood ratio check for group s over the given theta grid,
/// restricted to points where both densities are positive.
MlrpReport check_mlrp(const SignalModel& model, int s, std::span<const double> grid);

struct OperatingPoint {
  double fp = 0.0;
  double tp = 0.0;
};

struct RocPoint {
  double fp = 0.0;
  double tp = 0.0;
  std::optional<double> threshold;  // absent for anchors and derived curves
};

/// (FP, TP) curve, nondecreasing in both coordinates, anchored at (0,0) and
/// (1,1).
struct RocCurve {
  std::vector<RocPoint> points;

  void validate() const;
  /// Upper piecewise-linear interpolant TP(fp).
  double tp_at(double fp) const;
};

/// ROC of group s: point i has fp = 1 - F_u(t_i), tp = 1 - F_q(t_i).
/// Thresholds must be sorted descending so fp and tp ascend.
RocCurve roc(const SignalModel& model, int s, std::span<const double> thresholds_descending);

/// Upper concave envelope of the curve (convex-hull vertices on the
/// upper-left boundary). Idempotent; never lowers TP at any fp.
RocCurve concavify(const RocCurve& curve);

struct ScoredObservation {
  int group;
  Effort effort;
  double theta;
};

/// Kernel-smoothed model from scored samples. bandwidth <= 0 selects
/// Silverman's rule per cell (1.06 * sd * n^(-1/5)); the default grid spans
/// [min - 3*bw, max + 3*bw] with 2001 points.
SignalModel fit_empirical(const std::vector<ScoredObservation>& samples, double bandwidth = 0.0,
                          std::optional<GridSpec> grid = std::nullopt);

/// CSV with columns theta, pdf_q0, pdf_u0, pdf_q1, pdf_u1 on the model grid.
std::string model_to_csv(const SignalModel& model);

/// CSV with columns threshold, fp, tp (threshold empty for anchors).
std::string roc_to_csv(const RocCurve& curve);

}  // namespace fairsim
