#include "doctest.h"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <vector>

#include "fairsim/data.hpp"
#include "fairsim/errors.hpp"
#include "test_helpers.hpp"

using namespace fairsim;

namespace {

std::filesystem::path write_temp(const std::string& name, const std::string& content) {
  const std::filesystem::path path = std::filesystem::temp_directory_path() / name;
  std::ofstream out(path);
  out << content;
  return path;
}

// dense normal-equations oracle: gaussian elimination with partial pivoting
std::vector<double> solve_normal_equations(std::vector<std::vector<double>> a,
                                           std::vector<double> b) {
  const std::size_t n = b.size();
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t row = col + 1; row < n; ++row) {
      if (std::abs(a[row][col]) > std::abs(a[pivot][col])) pivot = row;
    }
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    for (std::size_t row = col + 1; row < n; ++row) {
      const double f = a[row][col] / a[col][col];
      for (std::size_t k = col; k < n; ++k) a[row][k] -= f * a[col][k];
      b[row] -= f * b[col];
    }
  }
  std::vector<double> x(n, 0.0);
  for (std::size_t row = n; row-- > 0;) {
    double acc = b[row];
    for (std::size_t k = row + 1; k < n; ++k) acc -= a[row][k] * x[k];
    x[row] = acc / a[row][row];
  }
  return x;
}

}  // namespace

TEST_CASE("load_csv reads scored files and counts cells") {
  const auto path = write_temp("fairsim_scored.csv",
                               "s,e,theta\n0,q,1.5\n0,u,0.2\n1,q,2.0\n1,u,-0.3\n");
  const Dataset data = load_csv(path.string());
  CHECK(data.scored);
  REQUIRE(data.records.size() == 4);
  const auto counts = data.cell_counts();
  for (int s : {0, 1}) {
    for (int e : {0, 1}) {
      CHECK(counts[static_cast<std::size_t>(s)][static_cast<std::size_t>(e)] == 1);
    }
  }
  CHECK(data.lambda1_estimate() == doctest::Approx(0.5));
  std::filesystem::remove(path);
}

TEST_CASE("load_csv reports malformed rows with their line number") {
  const auto path = write_temp("fairsim_bad.csv",
                               "s,e,x1,x2,x3\n0,q,1,2,3\n1,u,4,5\n");
  CHECK_THROWS_WITH_AS(load_csv(path.string()), doctest::Contains(":3:"), ParseError);
  std::filesystem::remove(path);

  const auto bad_header = write_temp("fairsim_badhdr.csv", "a,b,c\n");
  CHECK_THROWS_AS(load_csv(bad_header.string()), ParseError);
  std::filesystem::remove(bad_header);

  CHECK_THROWS_AS(load_csv("/nonexistent/fairsim.csv"), ParseError);
}

TEST_CASE("lambda estimate follows the group counts") {
  Dataset data;
  data.scored = true;
  for (int i = 0; i < 2028; ++i) data.records.push_back({0, Effort::Qualified, 0.0, {}});
  for (int i = 0; i < 782; ++i) data.records.push_back({1, Effort::Qualified, 0.0, {}});
  CHECK(data.lambda1_estimate() == doctest::Approx(782.0 / 2810.0).epsilon(1e-12));
}

TEST_CASE("ridge weights match a hand-rolled normal-equations solve") {
  Rng rng(4242);
  Dataset data;
  data.scored = false;
  data.feature_dim = 5;
  for (int i = 0; i < 50; ++i) {
    SampleRecord rec;
    rec.group = i % 2;
    rec.effort = (rng.uniform() < 0.5) ? Effort::Qualified : Effort::Unqualified;
    for (int j = 0; j < 5; ++j) rec.features.push_back(rng.normal());
    data.records.push_back(rec);
  }
  ScorerSpec spec;
  spec.penalties = {0.7};
  spec.seed = 11;
  const RidgeOutcome outcome = ridge_score(data, spec);
  REQUIRE(outcome.train_rows.size() == 33);  // round(2/3 * 50)

  std::vector<std::vector<double>> xtx(5, std::vector<double>(5, 0.0));
  std::vector<double> xty(5, 0.0);
  for (const std::size_t row : outcome.train_rows) {
    const SampleRecord& rec = data.records[row];
    const double y = rec.effort == Effort::Qualified ? 1.0 : 0.0;
    for (int a = 0; a < 5; ++a) {
      xty[static_cast<std::size_t>(a)] += rec.features[static_cast<std::size_t>(a)] * y;
      for (int b = 0; b < 5; ++b) {
        xtx[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] +=
            rec.features[static_cast<std::size_t>(a)] * rec.features[static_cast<std::size_t>(b)];
      }
    }
  }
  for (int a = 0; a < 5; ++a) xtx[static_cast<std::size_t>(a)][static_cast<std::size_t>(a)] += 0.7;
  const std::vector<double> w = solve_normal_equations(xtx, xty);
  for (int a = 0; a < 5; ++a) {
    CHECK(outcome.weights[static_cast<std::size_t>(a)] ==
          doctest::Approx(w[static_cast<std::size_t>(a)]).epsilon(1e-8));
  }
}

TEST_CASE("ridge interpolates an exactly linear relation") {
  Rng rng(7);
  Dataset data;
  data.scored = false;
  data.feature_dim = 2;
  for (int i = 0; i < 90; ++i) {
    SampleRecord rec;
    rec.group = i % 2;
    rec.effort = (i % 3 == 0) ? Effort::Qualified : Effort::Unqualified;
    const double y = rec.effort == Effort::Qualified ? 1.0 : 0.0;
    rec.features = {y, rng.normal()};  // first feature carries y exactly
    data.records.push_back(rec);
  }
  ScorerSpec spec;
  spec.penalties = {1e-8, 1e-2, 1.0};
  spec.seed = 5;
  const RidgeOutcome outcome = ridge_score(data, spec);
  CHECK(outcome.penalty == doctest::Approx(1e-8));
  for (const SampleRecord& rec : outcome.heldout.records) {
    const double y = rec.effort == Effort::Qualified ? 1.0 : 0.0;
    CHECK(*rec.theta == doctest::Approx(y).epsilon(1e-6));
  }
}

TEST_CASE("ridge survives duplicated feature columns") {
  Rng rng(13);
  Dataset data;
  data.scored = false;
  data.feature_dim = 2;
  for (int i = 0; i < 60; ++i) {
    SampleRecord rec;
    rec.group = i % 2;
    rec.effort = (rng.uniform() < 0.5) ? Effort::Qualified : Effort::Unqualified;
    const double x = rng.normal();
    rec.features = {x, x};  // perfectly collinear
    data.records.push_back(rec);
  }
  ScorerSpec spec;
  spec.penalties = {1e-3, 1.0};
  const RidgeOutcome outcome = ridge_score(data, spec);
  for (double w : outcome.weights) CHECK(std::isfinite(w));
  for (const SampleRecord& rec : outcome.heldout.records) CHECK(std::isfinite(*rec.theta));
}

TEST_CASE("ridge is invariant to row order within the training split") {
  Rng rng(2718);
  Dataset data;
  data.scored = false;
  data.feature_dim = 3;
  for (int i = 0; i < 60; ++i) {
    SampleRecord rec;
    rec.group = i % 2;
    rec.effort = rng.uniform() < 0.5 ? Effort::Qualified : Effort::Unqualified;
    for (int j = 0; j < 3; ++j) rec.features.push_back(rng.normal());
    data.records.push_back(rec);
  }
  ScorerSpec spec;
  spec.penalties = {0.5};
  spec.seed = 99;
  const RidgeOutcome first = ridge_score(data, spec);
  // swap two records that both landed in the training split: the split
  // membership is unchanged, so the fit must be identical
  REQUIRE(first.train_rows.size() >= 2);
  Dataset swapped = data;
  std::swap(swapped.records[first.train_rows[0]], swapped.records[first.train_rows[1]]);
  const RidgeOutcome second = ridge_score(swapped, spec);
  REQUIRE(first.weights.size() == second.weights.size());
  for (std::size_t j = 0; j < first.weights.size(); ++j) {
    CHECK(first.weights[j] == doctest::Approx(second.weights[j]).epsilon(1e-12));
  }
  CHECK(dataset_to_csv(first.heldout) == dataset_to_csv(second.heldout));
}

TEST_CASE("generate reproduces the requested cell moments") {
  const GeneratedData gen = generate(ScenarioSpec::gaussian_g1(), 100000, 31337);
  std::array<std::array<double, 2>, 2> sums{};
  std::array<std::array<int, 2>, 2> counts{};
  for (const SampleRecord& rec : gen.data.records) {
    sums[static_cast<std::size_t>(rec.group)][static_cast<std::size_t>(rec.effort)] += *rec.theta;
    counts[static_cast<std::size_t>(rec.group)][static_cast<std::size_t>(rec.effort)] += 1;
  }
  for (int s : {0, 1}) {
    const auto si = static_cast<std::size_t>(s);
    CHECK(counts[si][0] == 100000);
    CHECK(counts[si][1] == 100000);
    CHECK(sums[si][0] / counts[si][0] == doctest::Approx(0.0).epsilon(0.02));
    CHECK(std::abs(sums[si][1] / counts[si][1] - 1.0) <= 0.02);
  }
}

TEST_CASE("generation is byte-identical for a fixed seed") {
  const GeneratedData a = generate(ScenarioSpec::example1(), 500, 97);
  const GeneratedData b = generate(ScenarioSpec::example1(), 500, 97);
  CHECK(dataset_to_csv(a.data) == dataset_to_csv(b.data));
  const GeneratedData c = generate(ScenarioSpec::example1(), 500, 98);
  CHECK(dataset_to_csv(a.data) != dataset_to_csv(c.data));
}

TEST_CASE("example 2 generates features on orthogonal bases") {
  const GeneratedData gen = generate(ScenarioSpec::example2(), 200, 5);
  CHECK_FALSE(gen.data.scored);
  CHECK(gen.data.feature_dim == 2);
  for (const SampleRecord& rec : gen.data.records) {
    REQUIRE(rec.features.size() == 2);
    if (rec.group == 0) CHECK(rec.features[1] == 0.0);
    if (rec.group == 1) CHECK(rec.features[0] == 0.0);
  }
  CHECK_THROWS_AS(gen.data.observations(), ConfigError);
}

TEST_CASE("scenario specs parse from json configs") {
  const nlohmann::json config = {
      {"kind", "custom"},
      {"params",
       {{"mean_q0", 2.0}, {"mean_u0", 0.0}, {"sd_q0", 1.5}, {"sd_u0", 1.5},
        {"lambda1", 0.25}, {"cost_hi", 0.4}}},
  };
  const ScenarioSpec spec = ScenarioSpec::from_json(config);
  CHECK(spec.kind == ScenarioKind::Custom);
  CHECK(spec.params.lambda1 == 0.25);
  CHECK(spec.params.cost_hi == 0.4);
  const SignalModel model = spec.truth_model();
  CHECK(model.eval(Effort::Qualified, 0, 2.0).cdf == doctest::Approx(0.5).epsilon(1e-9));

  CHECK_THROWS_AS(ScenarioSpec::from_json({{"kind", "bogus"}}), ConfigError);
  nlohmann::json bad_sd = config;
  bad_sd["params"]["sd_q0"] = -1.0;
  CHECK_THROWS_AS(ScenarioSpec::from_json(bad_sd), ConfigError);
}

TEST_CASE("dataset csv round-trips through load_csv") {
  const GeneratedData gen = generate(ScenarioSpec::gaussian_g1(), 50, 123);
  const auto path = write_temp("fairsim_roundtrip.csv", dataset_to_csv(gen.data));
  const Dataset back = load_csv(path.string());
  REQUIRE(back.records.size() == gen.data.records.size());
  CHECK(dataset_to_csv(back) == dataset_to_csv(gen.data));
  std::filesystem::remove(path);
}
