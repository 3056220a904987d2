#include "fairsim/game.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fairsim/errors.hpp"
#include "text_util.hpp"

namespace fairsim {

void GameParams::validate() const {
  if (!(v_q > 0.0) || !(v_u > 0.0)) throw ConfigError("v_q and v_u must be positive");
  if (!(omega > 0.0)) throw ConfigError("omega must be positive");
  if (!(lambda1 >= 0.0) || !(lambda1 <= 1.0)) throw ConfigError("lambda1 must lie in [0,1]");
  if (!(cost_lo >= 0.0) || !(cost_hi > cost_lo)) {
    throw ConfigError("cost bounds must satisfy 0 <= cost_lo < cost_hi");
  }
}

double CostModel::cdf(double c) const {
  return std::clamp((c - lo) / (hi - lo), 0.0, 1.0);
}

IncentiveValue incentive(const SignalModel& model, const GameParams& params, int s,
                         double theta) {
  const double fu = model.cell(Effort::Unqualified, s).cdf(theta);
  const double fq = model.cell(Effort::Qualified, s).cdf(theta);
  const double gain = params.omega * (fu - fq);
  return IncentiveValue{gain, gain < 0.0};
}

double applicant_response(const GameParams& params, double expected_gain) {
  return CostModel{params.cost_lo, params.cost_hi}.cdf(expected_gain);
}

double firm_response(const SignalModel& model, const GameParams& params, int s, double theta) {
  const double phi = model.likelihood_ratio(s, theta);
  if (std::isinf(phi)) return 1.0;
  return phi / (params.r() + phi);
}

ResponseCurveTable response_curves(const SignalModel& model, const GameParams& params, int s,
                                   std::span<const double> grid) {
  for (std::size_t i = 1; i < grid.size(); ++i) {
    if (grid[i] < grid[i - 1]) throw ConfigError("response curve grid must be sorted ascending");
  }
  ResponseCurveTable table;
  table.group = s;
  table.theta.assign(grid.begin(), grid.end());
  table.fr.reserve(grid.size());
  table.ar.reserve(grid.size());
  // the mode tracks the raw incentive so the clamp at pi = 1 cannot hide it
  std::size_t best = 0;
  double best_gain = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double gain = incentive(model, params, s, grid[i]).value;
    table.fr.push_back(firm_response(model, params, s, grid[i]));
    table.ar.push_back(applicant_response(params, gain));
    if (gain > best_gain) {
      best_gain = gain;
      best = i;
    }
  }
  table.ar_mode = grid.empty() ? 0.0 : grid[best];
  return table;
}

std::string response_table_to_csv(const ResponseCurveTable& table) {
  std::ostringstream out;
  out << "theta,fr,ar\n";
  for (std::size_t i = 0; i < table.theta.size(); ++i) {
    out << fmt_g(table.theta[i]) << ',' << fmt_g(table.fr[i]) << ',' << fmt_g(table.ar[i])
        << '\n';
  }
  return out.str();
}

}  // namespace fairsim
