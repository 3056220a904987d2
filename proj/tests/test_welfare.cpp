#include "doctest.h"

#include <cmath>

#include "fairsim/data.hpp"
#include "fairsim/welfare.hpp"
#include "test_helpers.hpp"

using namespace fairsim;
using fairsim::testing::g1_model;
using fairsim::testing::g1_params;

TEST_CASE("firm welfare follows the acceptance payoffs") {
  const SignalModel model = g1_model();
  const GameParams params = g1_params();
  // accept everyone, all qualified: earn v_q
  CHECK(firm_welfare(model, params, 0, -6.0, 1.0) == doctest::Approx(params.v_q).epsilon(1e-6));
  // reject everyone: nothing happens
  CHECK(firm_welfare(model, params, 0, 7.0, 0.0) == doctest::Approx(0.0).epsilon(1e-6));
  CHECK(firm_welfare(model, params, 0, 0.5, 0.5) == doctest::Approx(0.191462).epsilon(1e-5));
}

TEST_CASE("applicant welfare subtracts the expected investment cost") {
  const SignalModel model = g1_model();
  GameParams params = g1_params();
  // nobody invests: reward only
  const double tail_u = 1.0 - model.eval(Effort::Unqualified, 0, 0.3).cdf;
  CHECK(applicant_welfare(model, params, 0, 0.3, 0.0) ==
        doctest::Approx(params.omega * tail_u).epsilon(1e-9));
  // everyone accepted free of cost
  CHECK(applicant_welfare(model, params, 0, -6.0, 0.0) ==
        doctest::Approx(params.omega).epsilon(1e-6));
  // full investment under unit-width costs: mean cost 1/2 comes off
  params.cost_lo = 0.0;
  params.cost_hi = 1.0;
  const double tail_q = 1.0 - model.eval(Effort::Qualified, 0, 0.3).cdf;
  CHECK(applicant_welfare(model, params, 0, 0.3, 1.0) ==
        doctest::Approx(params.omega * tail_q - 0.5).epsilon(1e-9));
  // the literal variant adds the raw integral instead
  CHECK(applicant_welfare(model, params, 0, 0.3, 1.0, true) ==
        doctest::Approx(params.omega * tail_q + 0.5).epsilon(1e-9));
}

TEST_CASE("the cost term matches direct quadrature of the uniform cost") {
  GameParams params = g1_params();
  params.cost_lo = 0.05;
  params.cost_hi = 0.45;
  const SignalModel model = g1_model();
  for (double pi : {0.0, 0.3, 0.7, 1.0}) {
    const double aw = applicant_welfare(model, params, 0, 0.5, pi);
    const double reward =
        params.omega * (pi * (1.0 - model.eval(Effort::Qualified, 0, 0.5).cdf) +
                        (1.0 - pi) * (1.0 - model.eval(Effort::Unqualified, 0, 0.5).cdf));
    // Simpson quadrature of c * density over the investing cost range
    const double upper = params.cost_lo + pi * (params.cost_hi - params.cost_lo);
    const int n = 2000;
    double integral = 0.0;
    const double h = (upper - params.cost_lo) / n;
    for (int i = 0; i < n; i += 2) {
      const double c0 = params.cost_lo + h * i;
      integral += h / 3.0 * (c0 + 4.0 * (c0 + h) + (c0 + 2.0 * h));
    }
    integral /= (params.cost_hi - params.cost_lo);
    CHECK(aw == doctest::Approx(reward - integral).epsilon(1e-6));
  }
}

TEST_CASE("social welfare decomposes exactly and reports disparity") {
  const SignalModel model = g1_model();
  const GameParams params = g1_params();
  for (const Equilibrium& eq : solve_lf(model, params)) {
    const WelfareReport report = social_welfare(model, params, eq);
    for (int s : {0, 1}) {
      const auto si = static_cast<std::size_t>(s);
      CHECK(report.sw[si] - report.fw[si] - report.aw[si] == 0.0);  // bit-exact
    }
    CHECK(report.disparity == doctest::Approx(0.0).epsilon(1e-9));
    CHECK(report.sw[0] == doctest::Approx(report.sw[1]).epsilon(1e-9));
    CHECK(report.sw_total ==
          doctest::Approx(params.lambda(0) * report.sw[0] + params.lambda(1) * report.sw[1])
              .epsilon(1e-12));
  }
  for (const Equilibrium& eq : solve_eo(model, params)) {
    CHECK(social_welfare(model, params, eq).disparity == 0.0);
  }
}

TEST_CASE("equilibria are ranked by investment and welfare together") {
  const SignalModel model = g1_model();
  const GameParams params = g1_params();
  const std::vector<Equilibrium> list = solve_lf(model, params);
  REQUIRE(list.size() >= 2);
  // list is sorted by pi0 descending; group welfare must fall strictly
  for (std::size_t i = 1; i < list.size(); ++i) {
    if (list[i].stability == Stability::Boundary) continue;
    const WelfareReport hi = social_welfare(model, params, list[i - 1]);
    const WelfareReport lo = social_welfare(model, params, list[i]);
    CHECK(hi.sw[0] - lo.sw[0] > 1e-9);
    CHECK(hi.sw[1] - lo.sw[1] > 1e-9);
  }
}

TEST_CASE("firm welfare rises with pi and applicant welfare falls with theta") {
  const SignalModel model = g1_model();
  const GameParams params = g1_params();
  for (double theta : {-2.0, 0.0, 1.5, 3.0}) {
    for (double pi = 0.0; pi < 1.0 - 1e-9; pi += 0.1) {
      CHECK(firm_welfare(model, params, 0, theta, pi + 0.1) >
            firm_welfare(model, params, 0, theta, pi));
    }
  }
  for (double pi : {0.0, 0.4, 1.0}) {
    double prev = applicant_welfare(model, params, 0, -6.0, pi);
    for (double theta = -5.5; theta <= 7.0; theta += 0.5) {
      const double cur = applicant_welfare(model, params, 0, theta, pi);
      CHECK(cur <= prev + 1e-12);
      prev = cur;
    }
  }
}

TEST_CASE("policy comparison table on symmetric groups is flat") {
  const ScenarioSpec spec = ScenarioSpec::gaussian_g1();
  const SignalModel model = spec.truth_model();
  const std::vector<Policy> policies = {Policy::LF, Policy::CB, Policy::DP, Policy::EO};
  const PolicyTable table =
      compare_policies(model, spec.params, SolverConfig{}, policies, Selection::Best);
  REQUIRE(table.rows.size() == 4);
  for (const PolicyRow& row : table.rows) {
    REQUIRE_FALSE(row.empty);
    CHECK(row.report.disparity <= 1e-6);
    // all four policies land on the same high-investment equilibrium
    CHECK(row.report.sw_total == doctest::Approx(table.rows[0].report.sw_total).epsilon(5e-3));
  }
  const std::string csv = table_to_csv(table);
  CHECK(csv.rfind("policy,disparity,sw,fw,aw,theta0,theta1,pi0,pi1\n", 0) == 0);
  CHECK(table_to_json(table).size() == 4);
}

TEST_CASE("policy comparison on example 2 isolates equalized odds") {
  const ScenarioSpec spec = ScenarioSpec::example2();
  const SignalModel model = spec.truth_model();
  const std::vector<Policy> policies = {Policy::LF, Policy::CB, Policy::EO};
  const PolicyTable table =
      compare_policies(model, spec.params, SolverConfig{}, policies, Selection::Best);
  REQUIRE(table.rows.size() == 3);
  CHECK(table.rows[0].report.disparity > 0.0);  // lf
  CHECK(table.rows[1].report.disparity > 0.0);  // cb
  CHECK(table.rows[2].report.disparity == 0.0);  // eo
}

TEST_CASE("demographic parity can raise social welfare for a small minority") {
  const SignalModel model = g1_model();
  GameParams params = g1_params();
  params.lambda1 = 0.02;
  const std::vector<Policy> both = {Policy::LF, Policy::DP};
  const PolicyTable table =
      compare_policies(model, params, SolverConfig{}, both, Selection::Best);
  REQUIRE(table.rows.size() == 2);
  CHECK(table.rows[1].report.sw_total >= table.rows[0].report.sw_total);
}

TEST_CASE("selection all emits one row per equilibrium") {
  const ScenarioSpec spec = ScenarioSpec::gaussian_g1();
  const std::vector<Policy> one = {Policy::LF};
  const PolicyTable table = compare_policies(spec.truth_model(), spec.params, SolverConfig{},
                                             one, Selection::All);
  CHECK(table.rows.size() == solve_lf(spec.truth_model(), spec.params).size());
}
