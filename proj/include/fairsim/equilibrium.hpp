#pragma once

#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "fairsim/game.hpp"
#include "fairsim/signal_model.hpp"

namespace fairsim {

enum class Policy { LF, CB, DP, EO, EOPP };

std::string policy_name(Policy policy);
std::optional<Policy> policy_from_name(std::string_view name);

/// Diagnostic label from the local crossing direction of the best-response
/// defect; boundary marks corner candidates at the grid edge.
enum class Stability { Stable, Unstable, Boundary };

std::string stability_name(Stability stability);

/// Acceptance probabilities of one group at its equilibrium operating point.
struct GroupAcceptance {
  double tp = 0.0;  // P[accept | qualified]
  double fp = 0.0;  // P[accept | unqualified]
};

struct Equilibrium {
  Policy policy = Policy::LF;
  /// Thresholds for LF/CB/DP. For EO both fields hold the shared frontier
  /// parameter p = 1 - fp; for EOPP each group's own 1 - fp at the common TP.
  double theta0 = 0.0;
  double theta1 = 0.0;
  double pi0 = 0.0;
  double pi1 = 0.0;
  std::map<std::string, double> residuals;
  Stability stability = Stability::Stable;
  GroupAcceptance accept0, accept1;
};

struct SolverConfig {
  int grid_size = 2001;
  double tolerance = 1e-3;   // residual tolerance, in pi units
  int dedup_steps = 2;       // dedup radius, in grid steps
  double damping = 0.5;      // DP/EOPP fixed-point pass
  int max_iterations = 500;  // DP/EOPP fixed-point pass
  int multi_start = 32;      // DP/EOPP fixed-point pass

  void validate() const;
};

/// Laissez-faire: per-group intersections of the AR and FR curves, combined
/// rank-by-rank into quadruples (no cross product).
std::vector<Equilibrium> solve_lf(const SignalModel& model, const GameParams& params,
                                  const SolverConfig& cfg = {});

/// Color-blind: one shared threshold against the lambda-pooled likelihood
/// ratio.
std::vector<Equilibrium> solve_cb(const SignalModel& model, const GameParams& params,
                                  const SolverConfig& cfg = {});

/// Demographic parity: equal acceptance rates, firm-welfare argmax along the
/// constraint curve.
std::vector<Equilibrium> solve_dp(const SignalModel& model, const GameParams& params,
                                  const SolverConfig& cfg = {});

/// Equalized odds: 1-D scan over the shared ROC frontier; pi0 == pi1 by
/// construction.
std::vector<Equilibrium> solve_eo(const SignalModel& model, const GameParams& params,
                                  const SolverConfig& cfg = {});

/// Equalized opportunity: equal TP only, per-group operating points on each
/// group's concavified ROC.
std::vector<Equilibrium> solve_eopp(const SignalModel& model, const GameParams& params,
                                    const SolverConfig& cfg = {});

struct ResidualReport {
  std::map<std::string, double> residuals;
  double tolerance = 0.0;
  bool pass = false;
};

/// Recomputes every defining equation of the candidate's policy and reports
/// absolute defects.
ResidualReport verify(const SignalModel& model, const GameParams& params,
                      const Equilibrium& candidate, const SolverConfig& cfg = {});

nlohmann::json equilibria_to_json(const std::vector<Equilibrium>& list);

}  // namespace fairsim
