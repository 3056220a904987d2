#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "fairsim/data.hpp"
#include "fairsim/eo_frontier.hpp"
#include "fairsim/equilibrium.hpp"
#include "fairsim/errors.hpp"
#include "fairsim/game.hpp"
#include "fairsim/signal_model.hpp"
#include "fairsim/welfare.hpp"

namespace {

using nlohmann::json;

struct RunConfig {
  std::optional<fairsim::ScenarioSpec> scenario;
  std::optional<std::string> input_csv;
  int n_per_cell = 20000;
  std::uint64_t seed = 1;
  double bandwidth = 0.0;  // <= 0: Silverman
  fairsim::GameParams game;
  bool game_from_scenario = true;
  json game_overrides;
  fairsim::SolverConfig solver;
  std::vector<fairsim::Policy> policies = {fairsim::Policy::LF, fairsim::Policy::CB,
                                           fairsim::Policy::DP, fairsim::Policy::EO};
  fairsim::Selection selection = fairsim::Selection::Best;
  bool aw_literal = false;
  std::vector<std::string> formats = {"csv", "json"};
  std::string out_dir = ".";
};

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw fairsim::ConfigError("cannot open output file " + path.string());
  out << content;
  if (!out) throw fairsim::ConfigError("failed to write " + path.string());
}

void apply_game_overrides(fairsim::GameParams& params, const json& overrides) {
  if (overrides.contains("v_q")) params.v_q = overrides.at("v_q").get<double>();
  if (overrides.contains("v_u")) params.v_u = overrides.at("v_u").get<double>();
  if (overrides.contains("omega")) params.omega = overrides.at("omega").get<double>();
  if (overrides.contains("lambda1")) params.lambda1 = overrides.at("lambda1").get<double>();
  if (overrides.contains("cost_lo")) params.cost_lo = overrides.at("cost_lo").get<double>();
  if (overrides.contains("cost_hi")) params.cost_hi = overrides.at("cost_hi").get<double>();
}

std::vector<fairsim::Policy> parse_policies(const std::string& csv) {
  std::vector<fairsim::Policy> out;
  std::istringstream in(csv);
  std::string token;
  while (std::getline(in, token, ',')) {
    const auto policy = fairsim::policy_from_name(token);
    if (!policy.has_value()) throw fairsim::ConfigError("unknown policy: " + token);
    out.push_back(*policy);
  }
  if (out.empty()) throw fairsim::ConfigError("at least one policy must be selected");
  return out;
}

RunConfig load_run_config(const std::string& config_path) {
  RunConfig rc;
  if (config_path.empty()) return rc;
  std::ifstream in(config_path);
  if (!in) throw fairsim::ConfigError("cannot open config " + config_path);
  json cfg = json::parse(in);

  if (cfg.contains("scenario")) {
    const json& sc = cfg.at("scenario");
    rc.scenario = fairsim::ScenarioSpec::from_json(sc);
    if (sc.contains("n")) rc.n_per_cell = sc.at("n").get<int>();
    if (sc.contains("seed")) rc.seed = sc.at("seed").get<std::uint64_t>();
  }
  if (cfg.contains("input_csv")) rc.input_csv = cfg.at("input_csv").get<std::string>();
  if (cfg.contains("bandwidth")) rc.bandwidth = cfg.at("bandwidth").get<double>();
  if (cfg.contains("game")) rc.game_overrides = cfg.at("game");
  if (cfg.contains("solver")) {
    const json& sv = cfg.at("solver");
    if (sv.contains("grid_size")) rc.solver.grid_size = sv.at("grid_size").get<int>();
    if (sv.contains("tolerance")) rc.solver.tolerance = sv.at("tolerance").get<double>();
    if (sv.contains("dedup_steps")) rc.solver.dedup_steps = sv.at("dedup_steps").get<int>();
    if (sv.contains("damping")) rc.solver.damping = sv.at("damping").get<double>();
    if (sv.contains("max_iterations")) {
      rc.solver.max_iterations = sv.at("max_iterations").get<int>();
    }
    if (sv.contains("multi_start")) rc.solver.multi_start = sv.at("multi_start").get<int>();
  }
  if (cfg.contains("policies")) {
    rc.policies.clear();
    for (const auto& name : cfg.at("policies")) {
      const auto policy = fairsim::policy_from_name(name.get<std::string>());
      if (!policy.has_value()) {
        throw fairsim::ConfigError("unknown policy: " + name.get<std::string>());
      }
      rc.policies.push_back(*policy);
    }
  }
  if (cfg.contains("select")) {
    rc.selection = cfg.at("select").get<std::string>() == "all" ? fairsim::Selection::All
                                                                : fairsim::Selection::Best;
  }
  if (cfg.contains("aw_literal")) rc.aw_literal = cfg.at("aw_literal").get<bool>();
  if (cfg.contains("format")) {
    rc.formats.clear();
    for (const auto& f : cfg.at("format")) rc.formats.push_back(f.get<std::string>());
  }
  if (cfg.contains("out")) rc.out_dir = cfg.at("out").get<std::string>();
  return rc;
}

struct ResolvedModel {
  fairsim::SignalModel model;
  fairsim::GameParams params;
};

/// NLSY-style economic defaults used when a raw CSV does not pin them:
/// v_q = 53097 - 46640, v_u = omega = 46640 - 40604, and the cost ceiling at
/// the largest attainable incentive.
fairsim::GameParams csv_default_params(const fairsim::SignalModel& model, double lambda1) {
  fairsim::GameParams params;
  params.v_q = 6457.0;
  params.v_u = 6036.0;
  params.omega = 6036.0;
  params.lambda1 = lambda1;
  params.cost_lo = 0.0;
  double max_gain = 0.0;
  for (double t : model.grid().points()) {
    for (int s = 0; s < fairsim::kNumGroups; ++s) {
      const double gain = params.omega * (model.eval(fairsim::Effort::Unqualified, s, t).cdf -
                                          model.eval(fairsim::Effort::Qualified, s, t).cdf);
      max_gain = std::max(max_gain, gain);
    }
  }
  params.cost_hi = max_gain > 0.0 ? max_gain : 1.0;
  return params;
}

ResolvedModel resolve_model(const RunConfig& rc) {
  if (rc.input_csv.has_value()) {
    fairsim::Dataset data = fairsim::load_csv(*rc.input_csv);
    for (const std::string& w : data.warnings) std::cerr << "warning: " << w << "\n";
    const double lambda1 = data.lambda1_estimate();
    if (!data.scored) {
      fairsim::ScorerSpec spec;
      spec.seed = rc.seed;
      data = fairsim::ridge_score(data, spec).heldout;
    }
    fairsim::SignalModel model = fairsim::fit_empirical(data.observations(), rc.bandwidth);
    fairsim::GameParams params = csv_default_params(model, lambda1);
    apply_game_overrides(params, rc.game_overrides);
    params.validate();
    return ResolvedModel{std::move(model), params};
  }
  const fairsim::ScenarioSpec scenario =
      rc.scenario.has_value() ? *rc.scenario : fairsim::ScenarioSpec::gaussian_g1();
  fairsim::GameParams params = scenario.params;
  apply_game_overrides(params, rc.game_overrides);
  params.validate();
  return ResolvedModel{scenario.truth_model(), params};
}

std::vector<fairsim::Equilibrium> solve_policy(const fairsim::SignalModel& model,
                                               const fairsim::GameParams& params,
                                               const fairsim::SolverConfig& cfg,
                                               fairsim::Policy policy) {
  switch (policy) {
    case fairsim::Policy::LF: return fairsim::solve_lf(model, params, cfg);
    case fairsim::Policy::CB: return fairsim::solve_cb(model, params, cfg);
    case fairsim::Policy::DP: return fairsim::solve_dp(model, params, cfg);
    case fairsim::Policy::EO: return fairsim::solve_eo(model, params, cfg);
    case fairsim::Policy::EOPP: return fairsim::solve_eopp(model, params, cfg);
  }
  throw fairsim::ConfigError("unknown policy");
}

void require_out_dir(const RunConfig& rc) {
  if (!std::filesystem::is_directory(rc.out_dir)) {
    throw fairsim::ConfigError("output directory does not exist: " + rc.out_dir);
  }
}

void warn_if_mlrp_fails(const fairsim::SignalModel& model) {
  const std::vector<double> grid = model.grid().points();
  for (int s = 0; s < fairsim::kNumGroups; ++s) {
    try {
      if (!fairsim::check_mlrp(model, s, grid).holds) {
        std::cerr << "warning: MLRP does not hold for group s=" << s
                  << "; thresholds may not be the firm's best response\n";
      }
    } catch (const fairsim::ConfigError&) {
      // joint support too small to test; the solvers still scan sign changes
    }
  }
}

int cmd_generate(const RunConfig& rc) {
  require_out_dir(rc);
  const fairsim::ScenarioSpec scenario =
      rc.scenario.has_value() ? *rc.scenario : fairsim::ScenarioSpec::gaussian_g1();
  const fairsim::GeneratedData gen = fairsim::generate(scenario, rc.n_per_cell, rc.seed);
  const std::filesystem::path dir(rc.out_dir);
  write_file(dir / "dataset.csv", fairsim::dataset_to_csv(gen.data));
  write_file(dir / "truth_model.csv", fairsim::model_to_csv(gen.truth));
  std::cout << "wrote " << (dir / "dataset.csv").string() << " ("
            << gen.data.records.size() << " records)\n";
  return 0;
}

int cmd_fit(const RunConfig& rc) {
  require_out_dir(rc);
  if (!rc.input_csv.has_value()) throw fairsim::ConfigError("fit needs --input <csv>");
  fairsim::Dataset data = fairsim::load_csv(*rc.input_csv);
  for (const std::string& w : data.warnings) std::cerr << "warning: " << w << "\n";
  const std::filesystem::path dir(rc.out_dir);
  if (!data.scored) {
    fairsim::ScorerSpec spec;
    spec.seed = rc.seed;
    data = fairsim::ridge_score(data, spec).heldout;
    write_file(dir / "scored.csv", fairsim::dataset_to_csv(data));
  }
  const fairsim::SignalModel model = fairsim::fit_empirical(data.observations(), rc.bandwidth);
  write_file(dir / "model.csv", fairsim::model_to_csv(model));
  std::cout << "wrote " << (dir / "model.csv").string() << "\n";
  return 0;
}

int cmd_curves(const RunConfig& rc) {
  require_out_dir(rc);
  const ResolvedModel rm = resolve_model(rc);
  const std::filesystem::path dir(rc.out_dir);
  const std::vector<double> grid = rm.model.grid().points();
  std::vector<double> thresholds = grid;
  std::reverse(thresholds.begin(), thresholds.end());
  for (int s = 0; s < fairsim::kNumGroups; ++s) {
    // the firm response is undefined where both densities vanish, so the
    // per-group table is restricted to the group's normal-range support
    std::vector<double> support;
    for (double t : grid) {
      if (rm.model.eval(fairsim::Effort::Qualified, s, t).pdf > 1e-300 ||
          rm.model.eval(fairsim::Effort::Unqualified, s, t).pdf > 1e-300) {
        support.push_back(t);
      }
    }
    const auto table = fairsim::response_curves(rm.model, rm.params, s, support);
    write_file(dir / ("curves_s" + std::to_string(s) + ".csv"),
               fairsim::response_table_to_csv(table));
    write_file(dir / ("roc_s" + std::to_string(s) + ".csv"),
               fairsim::roc_to_csv(fairsim::roc(rm.model, s, thresholds)));
  }
  std::cout << "wrote response and roc curves to " << rc.out_dir << "\n";
  return 0;
}

int cmd_equilibria(const RunConfig& rc) {
  require_out_dir(rc);
  if (rc.policies.empty()) throw fairsim::ConfigError("at least one policy must be selected");
  const ResolvedModel rm = resolve_model(rc);
  warn_if_mlrp_fails(rm.model);
  const std::filesystem::path dir(rc.out_dir);
  bool all_pass = true;
  for (fairsim::Policy policy : rc.policies) {
    std::vector<fairsim::Equilibrium> list =
        solve_policy(rm.model, rm.params, rc.solver, policy);
    for (fairsim::Equilibrium& eq : list) {
      const fairsim::ResidualReport report = fairsim::verify(rm.model, rm.params, eq, rc.solver);
      eq.residuals = report.residuals;
      all_pass = all_pass && report.pass;
    }
    write_file(dir / ("equilibria_" + fairsim::policy_name(policy) + ".json"),
               fairsim::equilibria_to_json(list).dump(2) + "\n");
  }
  if (!all_pass) {
    std::cerr << "error: some reported equilibria failed verification\n";
    return 1;
  }
  std::cout << "wrote equilibria for " << rc.policies.size() << " policies to " << rc.out_dir
            << "\n";
  return 0;
}

int cmd_compare(const RunConfig& rc) {
  require_out_dir(rc);
  if (rc.policies.empty()) throw fairsim::ConfigError("at least one policy must be selected");
  const ResolvedModel rm = resolve_model(rc);
  warn_if_mlrp_fails(rm.model);
  const fairsim::PolicyTable table = fairsim::compare_policies(
      rm.model, rm.params, rc.solver, rc.policies, rc.selection, rc.aw_literal);
  const std::filesystem::path dir(rc.out_dir);
  const bool want_csv = std::count(rc.formats.begin(), rc.formats.end(), "csv") > 0;
  const bool want_json = std::count(rc.formats.begin(), rc.formats.end(), "json") > 0;
  if (want_csv) write_file(dir / "compare.csv", fairsim::table_to_csv(table));
  if (want_json) write_file(dir / "compare.json", fairsim::table_to_json(table).dump(2) + "\n");
  bool all_pass = true;
  for (const fairsim::PolicyRow& row : table.rows) {
    if (row.empty) continue;
    all_pass = all_pass &&
               fairsim::verify(rm.model, rm.params, row.report.equilibrium, rc.solver).pass;
  }
  if (!all_pass) {
    std::cerr << "error: some reported equilibria failed verification\n";
    return 1;
  }
  std::cout << "wrote policy comparison to " << rc.out_dir << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Equilibrium simulator for fairness policies in the applicant-firm game"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::string scenario_name;
  std::string input_csv;
  std::string policies_csv;
  std::string select_name;
  std::string format_csv;
  bool aw_literal = false;
  std::optional<std::uint64_t> seed;
  std::optional<int> n_per_cell;
  std::optional<double> bandwidth;

  app.add_option("--config", config_path, "JSON run configuration");
  app.add_option("--out", out_dir, "output directory (must exist)");
  app.add_option("--scenario", scenario_name, "scenario kind: gaussian_g1|example1|example2");
  app.add_option("--input", input_csv, "input CSV (scored s,e,theta or featured s,e,x1..xd)");
  app.add_option("--policies", policies_csv, "comma list from lf,cb,dp,eo,eopp");
  app.add_option("--select", select_name, "equilibrium selection: best|all");
  app.add_option("--format", format_csv, "comma list from csv,json");
  app.add_flag("--aw-literal", aw_literal, "use the raw added cost integral in AW");
  app.add_option("--seed", seed, "RNG seed for generation and scoring splits");
  app.add_option("--n", n_per_cell, "samples per (group, effort) cell for generate");
  app.add_option("--bandwidth", bandwidth, "kernel bandwidth override for fitting");

  auto* c_generate = app.add_subcommand("generate", "draw a scenario dataset to CSV");
  auto* c_fit = app.add_subcommand("fit", "fit a tabulated model from a CSV");
  auto* c_curves = app.add_subcommand("curves", "write FR/AR response curves and ROC curves");
  auto* c_equilibria = app.add_subcommand("equilibria", "solve and write equilibria as JSON");
  auto* c_compare = app.add_subcommand("compare", "policy comparison table");

  CLI11_PARSE(app, argc, argv);

  try {
    RunConfig rc = load_run_config(config_path);
    if (!out_dir.empty()) rc.out_dir = out_dir;
    if (!scenario_name.empty()) {
      const auto kind = fairsim::scenario_kind_from_name(scenario_name);
      if (!kind.has_value()) throw fairsim::ConfigError("unknown scenario: " + scenario_name);
      json shell;
      shell["kind"] = scenario_name;
      rc.scenario = fairsim::ScenarioSpec::from_json(shell);
    }
    if (!input_csv.empty()) rc.input_csv = input_csv;
    if (!policies_csv.empty()) rc.policies = parse_policies(policies_csv);
    if (!select_name.empty()) {
      if (select_name != "best" && select_name != "all") {
        throw fairsim::ConfigError("--select must be best or all");
      }
      rc.selection = select_name == "all" ? fairsim::Selection::All : fairsim::Selection::Best;
    }
    if (!format_csv.empty()) {
      rc.formats.clear();
      std::istringstream in(format_csv);
      std::string token;
      while (std::getline(in, token, ',')) {
        if (token != "csv" && token != "json") {
          throw fairsim::ConfigError("--format entries must be csv or json");
        }
        rc.formats.push_back(token);
      }
    }
    if (aw_literal) rc.aw_literal = true;
    if (seed.has_value()) rc.seed = *seed;
    if (n_per_cell.has_value()) rc.n_per_cell = *n_per_cell;
    if (bandwidth.has_value()) rc.bandwidth = *bandwidth;

    if (c_generate->parsed()) return cmd_generate(rc);
    if (c_fit->parsed()) return cmd_fit(rc);
    if (c_curves->parsed()) return cmd_curves(rc);
    if (c_equilibria->parsed()) return cmd_equilibria(rc);
    if (c_compare->parsed()) return cmd_compare(rc);
    std::cerr << "error: no subcommand\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
