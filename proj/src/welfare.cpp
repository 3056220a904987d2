#include "fairsim/welfare.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "text_util.hpp"

namespace fairsim {

namespace {

double fw_at(const GameParams& params, double tp, double fp, double pi) {
  return pi * tp * params.v_q - (1.0 - pi) * fp * params.v_u;
}

double aw_at(const GameParams& params, double tp, double fp, double pi, bool literal) {
  const double reward = params.omega * (pi * tp + (1.0 - pi) * fp);
  const double upper = params.cost_lo + pi * (params.cost_hi - params.cost_lo);
  const double integral = 0.5 * (upper * upper - params.cost_lo * params.cost_lo);
  if (literal) return reward + integral;
  return reward - integral / (params.cost_hi - params.cost_lo);
}

}  // namespace

double firm_welfare(const SignalModel& model, const GameParams& params, int s, double theta,
                    double pi) {
  const double tp = 1.0 - model.cell(Effort::Qualified, s).cdf(theta);
  const double fp = 1.0 - model.cell(Effort::Unqualified, s).cdf(theta);
  return fw_at(params, tp, fp, pi);
}

double applicant_welfare(const SignalModel& model, const GameParams& params, int s, double theta,
                         double pi, bool literal_cost) {
  const double tp = 1.0 - model.cell(Effort::Qualified, s).cdf(theta);
  const double fp = 1.0 - model.cell(Effort::Unqualified, s).cdf(theta);
  return aw_at(params, tp, fp, pi, literal_cost);
}

WelfareReport social_welfare(const SignalModel& model, const GameParams& params,
                             const Equilibrium& equilibrium, bool aw_literal) {
  (void)model;  // operating points are carried by the equilibrium
  WelfareReport report;
  report.equilibrium = equilibrium;
  const std::array<GroupAcceptance, 2> acc{equilibrium.accept0, equilibrium.accept1};
  const std::array<double, 2> pi{equilibrium.pi0, equilibrium.pi1};
  for (int s = 0; s < kNumGroups; ++s) {
    const auto si = static_cast<std::size_t>(s);
    report.fw[si] = fw_at(params, acc[si].tp, acc[si].fp, pi[si]);
    report.aw[si] = aw_at(params, acc[si].tp, acc[si].fp, pi[si], aw_literal);
    report.sw[si] = report.fw[si] + report.aw[si];
    report.fw_total += params.lambda(s) * report.fw[si];
    report.aw_total += params.lambda(s) * report.aw[si];
    report.sw_total += params.lambda(s) * report.sw[si];
  }
  report.disparity = std::abs(equilibrium.pi0 - equilibrium.pi1);
  return report;
}

PolicyTable compare_policies(const SignalModel& model, const GameParams& params,
                             const SolverConfig& cfg, std::span<const Policy> policies,
                             Selection selection, bool aw_literal) {
  PolicyTable table;
  for (Policy policy : policies) {
    std::vector<Equilibrium> list;
    switch (policy) {
      case Policy::LF: list = solve_lf(model, params, cfg); break;
      case Policy::CB: list = solve_cb(model, params, cfg); break;
      case Policy::DP: list = solve_dp(model, params, cfg); break;
      case Policy::EO: list = solve_eo(model, params, cfg); break;
      case Policy::EOPP: list = solve_eopp(model, params, cfg); break;
    }
    if (list.empty()) {
      PolicyRow row;
      row.policy = policy;
      row.empty = true;
      table.rows.push_back(row);
      continue;
    }
    std::vector<WelfareReport> reports;
    reports.reserve(list.size());
    for (const Equilibrium& eq : list) reports.push_back(social_welfare(model, params, eq, aw_literal));
    if (selection == Selection::Best) {
      const auto best = std::max_element(
          reports.begin(), reports.end(),
          [](const WelfareReport& a, const WelfareReport& b) { return a.sw_total < b.sw_total; });
      table.rows.push_back(PolicyRow{policy, false, *best});
    } else {
      for (const WelfareReport& r : reports) table.rows.push_back(PolicyRow{policy, false, r});
    }
  }
  return table;
}

std::string table_to_csv(const PolicyTable& table) {
  std::ostringstream out;
  out << "policy,disparity,sw,fw,aw,theta0,theta1,pi0,pi1\n";
  for (const PolicyRow& row : table.rows) {
    out << policy_name(row.policy);
    if (row.empty) {
      out << ",,,,,,,,\n";
      continue;
    }
    const WelfareReport& r = row.report;
    out << ',' << fmt_g(r.disparity) << ',' << fmt_g(r.sw_total) << ',' << fmt_g(r.fw_total)
        << ',' << fmt_g(r.aw_total) << ',' << fmt_g(r.equilibrium.theta0) << ','
        << fmt_g(r.equilibrium.theta1) << ',' << fmt_g(r.equilibrium.pi0) << ','
        << fmt_g(r.equilibrium.pi1) << '\n';
  }
  return out.str();
}

nlohmann::json table_to_json(const PolicyTable& table) {
  nlohmann::json out = nlohmann::json::array();
  for (const PolicyRow& row : table.rows) {
    if (row.empty) {
      out.push_back({{"policy", policy_name(row.policy)}, {"empty", true}});
      continue;
    }
    const WelfareReport& r = row.report;
    out.push_back({{"policy", policy_name(row.policy)},
                   {"empty", false},
                   {"disparity", r.disparity},
                   {"sw", r.sw_total},
                   {"fw", r.fw_total},
                   {"aw", r.aw_total},
                   {"theta0", r.equilibrium.theta0},
                   {"theta1", r.equilibrium.theta1},
                   {"pi0", r.equilibrium.pi0},
                   {"pi1", r.equilibrium.pi1}});
  }
  return out;
}

}  // namespace fairsim
