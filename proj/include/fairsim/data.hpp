#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "json.hpp"

#include "fairsim/game.hpp"
#include "fairsim/signal_model.hpp"

namespace fairsim {

/// Deterministic random source: mt19937_64 plus an explicit Box-Muller
/// transform, so generated datasets are reproducible across platforms.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  double uniform();  // [0, 1)
  double normal();   // standard normal
  std::uint64_t next_u64() { return gen_(); }

 private:
  std::mt19937_64 gen_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

struct SampleRecord {
  int group = 0;
  Effort effort = Effort::Unqualified;
  std::optional<double> theta;   // scored datasets
  std::vector<double> features;  // featured datasets
};

struct Dataset {
  bool scored = true;
  int feature_dim = 0;
  std::vector<SampleRecord> records;
  std::vector<std::string> warnings;  // e.g. empty (group, effort) cells on load

  std::array<std::array<int, 2>, 2> cell_counts() const;  // [group][effort]
  double lambda1_estimate() const;
  std::vector<ScoredObservation> observations() const;  // throws unless scored
};

/// Header decides the schema: "s,e,theta" (scored) or "s,e,x1,...,xd"
/// (featured). Malformed rows raise ParseError with the line number.
Dataset load_csv(const std::string& path);
std::string dataset_to_csv(const Dataset& dataset);

struct ScorerSpec {
  std::vector<double> penalties = {1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0};
  double train_fraction = 2.0 / 3.0;
  std::uint64_t seed = 0;
};

struct RidgeOutcome {
  Dataset heldout;              // the held-out share, scored by the fitted model
  std::vector<double> weights;  // w = (X'X + alpha I)^-1 X'y
  double penalty = 0.0;         // selected by leave-one-out validation
  std::vector<std::size_t> train_rows;  // dataset indices of the training split
};

/// Closed-form ridge fit on a seed-deterministic train split, with the
/// penalty chosen by leave-one-out validation on the training rows; emits
/// theta = x . w for the held-out rows.
RidgeOutcome ridge_score(const Dataset& dataset, const ScorerSpec& spec);

enum class ScenarioKind { GaussianG1, Example1, Example2, Custom };

std::string scenario_kind_name(ScenarioKind kind);
std::optional<ScenarioKind> scenario_kind_from_name(const std::string& name);

/// Two-group gaussian scenario: per-cell score means/sds, economic
/// parameters, and the evaluation grid for the ground-truth model.
struct ScenarioSpec {
  ScenarioKind kind = ScenarioKind::GaussianG1;
  std::array<std::array<double, 2>, 2> mean{};  // [group][effort]
  std::array<std::array<double, 2>, 2> sd{};
  GameParams params;
  GridSpec grid;

  static ScenarioSpec gaussian_g1();
  static ScenarioSpec example1();
  static ScenarioSpec example2();
  static ScenarioSpec custom(const std::array<std::array<double, 2>, 2>& mean,
                             const std::array<std::array<double, 2>, 2>& sd,
                             const GameParams& params);
  static ScenarioSpec from_json(const nlohmann::json& config);

  SignalModel truth_model() const;
};

struct GeneratedData {
  Dataset data;
  SignalModel truth;
  GameParams params;
};

/// Draws n samples per (group, effort) cell. gaussian_g1/example1/custom
/// emit scored records; example2 emits 2-D featured records on orthogonal
/// bases that a linear scorer must combine.
GeneratedData generate(const ScenarioSpec& scenario, int n_per_cell, std::uint64_t seed);

}  // namespace fairsim
