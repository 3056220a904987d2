#pragma once

#include <array>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"

#include "fairsim/equilibrium.hpp"
#include "fairsim/game.hpp"
#include "fairsim/signal_model.hpp"

namespace fairsim {

/// FW_s(theta, pi) = pi (1 - F_q) v_q - (1 - pi) (1 - F_u) v_u.
double firm_welfare(const SignalModel& model, const GameParams& params, int s, double theta,
                    double pi);

/// AW_s(theta, pi) = omega [pi (1 - F_q) + (1 - pi) (1 - F_u)] minus the
/// expected investment cost of the investing fraction. literal_cost
/// reproduces the raw added integral instead (comparison runs only).
double applicant_welfare(const SignalModel& model, const GameParams& params, int s, double theta,
                         double pi, bool literal_cost = false);

struct WelfareReport {
  std::array<double, 2> fw{};  // per group
  std::array<double, 2> aw{};
  std::array<double, 2> sw{};
  double fw_total = 0.0;  // lambda-weighted aggregates
  double aw_total = 0.0;
  double sw_total = 0.0;
  double disparity = 0.0;  // |pi0 - pi1|
  Equilibrium equilibrium;
};

/// Per-group and aggregate welfare at the equilibrium's operating points.
WelfareReport social_welfare(const SignalModel& model, const GameParams& params,
                             const Equilibrium& equilibrium, bool aw_literal = false);

enum class Selection { Best, All };

struct PolicyRow {
  Policy policy = Policy::LF;
  bool empty = false;
  WelfareReport report;
};

struct PolicyTable {
  std::vector<PolicyRow> rows;
};

/// One row per policy (Selection::Best keeps the max-aggregate-SW
/// equilibrium; Selection::All emits a row per equilibrium).
PolicyTable compare_policies(const SignalModel& model, const GameParams& params,
                             const SolverConfig& cfg, std::span<const Policy> policies,
                             Selection selection = Selection::Best, bool aw_literal = false);

/// CSV with columns policy, disparity, sw, fw, aw, theta0, theta1, pi0, pi1.
std::string table_to_csv(const PolicyTable& table);
nlohmann::json table_to_json(const PolicyTable& table);

}  // namespace fairsim
