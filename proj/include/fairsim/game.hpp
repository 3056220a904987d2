#pragma once

#include <span>
#include <string>
#include <vector>

#include "fairsim/signal_model.hpp"

namespace fairsim {

/// Economic constants of the applicant-firm game. v_u is stored as the
/// positive magnitude of the firm's loss on an unqualified hire.
struct GameParams {
  double v_q = 1.0;
  double v_u = 1.0;
  double omega = 1.0;
  double lambda1 = 0.5;  // population share of group s=1
  double cost_lo = 0.0;
  double cost_hi = 0.2;

  double r() const { return v_q / v_u; }
  double lambda(int s) const { return s == 1 ? lambda1 : 1.0 - lambda1; }
  void validate() const;
};

/// Uniform investment-cost distribution shared by both groups.
struct CostModel {
  double lo = 0.0;
  double hi = 1.0;

  double cdf(double c) const;
};

struct IncentiveValue {
  double value;
  bool cdf_crossed;  // set when F_u < F_q at this theta, making the gain negative
};

/// Expected reward gain from exerting effort at threshold theta:
/// omega * (F_u(theta) - F_q(theta)).
IncentiveValue incentive(const SignalModel& model, const GameParams& params, int s, double theta);

/// Fraction of applicants whose cost is below the expected gain:
/// clamp((gain - cost_lo) / (cost_hi - cost_lo), 0, 1).
double applicant_response(const GameParams& params, double expected_gain);

/// Belief pi that makes theta the firm's optimal cutoff:
/// phi_s(theta) / (r + phi_s(theta)).
double firm_response(const SignalModel& model, const GameParams& params, int s, double theta);

struct ResponseCurveTable {
  int group = 0;
  std::vector<double> theta;
  std::vector<double> fr;
  std::vector<double> ar;
  double ar_mode = 0.0;  // grid argmax of ar, lowest theta on ties
};

ResponseCurveTable response_curves(const SignalModel& model, const GameParams& params, int s,
                                   std::span<const double> grid);

/// CSV with columns theta, fr, ar.
std::string response_table_to_csv(const ResponseCurveTable& table);

}  // namespace fairsim
