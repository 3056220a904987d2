#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "fairsim/eo_frontier.hpp"
#include "fairsim/errors.hpp"
#include "test_helpers.hpp"

using namespace fairsim;
using fairsim::testing::g1_model;
using fairsim::testing::uninformative_model;

namespace {

RocCurve g1_roc(int s = 0, int n = 1001) {
  std::vector<double> thresholds = linspace(-6.0, 7.0, n);
  std::reverse(thresholds.begin(), thresholds.end());
  return roc(g1_model(), s, thresholds);
}

RocCurve zigzag_curve() {
  RocCurve c;
  c.points = {RocPoint{0.0, 0.0, std::nullopt}, RocPoint{0.5, 0.4, 2.0},
              RocPoint{0.6, 0.9, 1.0}, RocPoint{1.0, 1.0, std::nullopt}};
  return c;
}

RocCurve diagonal_curve() {
  RocCurve c;
  c.points = {RocPoint{0.0, 0.0, std::nullopt}, RocPoint{0.4, 0.4, 0.5},
              RocPoint{1.0, 1.0, std::nullopt}};
  return c;
}

}  // namespace

TEST_CASE("feasible region wraps the concave roc and the diagonal") {
  const FeasibleRegion region = feasible_region(g1_roc(), 0);
  region.validate();
  CHECK(region.contains(OperatingPoint{0.0, 0.0}));
  CHECK(region.contains(OperatingPoint{1.0, 1.0}));
  CHECK(region.contains(OperatingPoint{0.5, 0.5}));   // diagonal
  CHECK(region.contains(OperatingPoint{0.3, 0.5}));   // interior
  CHECK_FALSE(region.contains(OperatingPoint{0.2, 0.9}));  // above the curve
  CHECK_FALSE(region.contains(OperatingPoint{0.6, 0.2}));  // below the diagonal

  // upper boundary stays within 1e-6 of the (already concave) roc
  const RocCurve upper = region.upper_boundary();
  const RocCurve curve = g1_roc();
  double gap = 0.0;
  for (double fp : linspace(0.0, 1.0, 500)) {
    gap = std::max(gap, std::abs(upper.tp_at(fp) - curve.tp_at(fp)));
  }
  CHECK(gap < 1e-6);
}

TEST_CASE("degenerate and non-concave regions") {
  const FeasibleRegion diag = feasible_region(diagonal_curve(), 1);
  CHECK(diag.vertices.size() == 2);
  CHECK(diag.contains(OperatingPoint{0.3, 0.3}));
  CHECK_FALSE(diag.contains(OperatingPoint{0.3, 0.4}));

  const FeasibleRegion zig = feasible_region(zigzag_curve(), 0);
  zig.validate();
  CHECK(zig.contains(OperatingPoint{0.5, 0.6}));        // inside after the hull
  CHECK_FALSE(zig.contains(OperatingPoint{0.5, 0.4}));  // the dropped dip is below the diagonal
}

TEST_CASE("shared frontier is the pointwise minimum of the upper boundaries") {
  const FeasibleRegion r0 = feasible_region(g1_roc(0), 0);
  const FeasibleRegion r1 = feasible_region(g1_roc(1), 1);

  // identical regions: exact at the sampled fp values, close in between
  const RocCurve same = shared_frontier(r0, r1, 1001);
  same.validate();
  const RocCurve upper = r0.upper_boundary();
  for (const RocPoint& p : same.points) {
    CHECK(p.tp == doctest::Approx(std::max(upper.tp_at(p.fp), p.fp)).epsilon(1e-12));
  }
  for (double fp : linspace(0.0, 1.0, 333)) {
    CHECK(same.tp_at(fp) == doctest::Approx(upper.tp_at(fp)).epsilon(1e-3));
  }

  // one degenerate side drags the frontier onto the diagonal
  const FeasibleRegion diag = feasible_region(diagonal_curve(), 1);
  const RocCurve collapsed = shared_frontier(r0, diag, 501);
  for (const RocPoint& p : collapsed.points) {
    CHECK(p.tp == doctest::Approx(p.fp).epsilon(1e-12));
  }

  // dominance with equality at the sampled fp values
  const std::array<std::array<double, 2>, 2> mean{{{-0.5, 0.5}, {-0.5, 0.5}}};
  const std::array<std::array<double, 2>, 2> sd{{{1.0, 1.0}, {10.0, 10.0}}};
  const SignalModel two = SignalModel::two_group_gaussian(GridSpec{-60.5, 60.5, 2001}, mean, sd);
  std::vector<double> thresholds = linspace(-60.5, 60.5, 2001);
  std::reverse(thresholds.begin(), thresholds.end());
  const FeasibleRegion a = feasible_region(roc(two, 0, thresholds), 0);
  const FeasibleRegion b = feasible_region(roc(two, 1, thresholds), 1);
  const RocCurve frontier = shared_frontier(a, b, 1001);
  const RocCurve ua = a.upper_boundary();
  const RocCurve ub = b.upper_boundary();
  for (const RocPoint& p : frontier.points) {
    const double cap = std::min(ua.tp_at(p.fp), ub.tp_at(p.fp));
    CHECK(p.tp <= cap + 1e-9);
    CHECK(p.tp >= p.fp - 1e-12);  // never below the diagonal
    CHECK(p.tp == doctest::Approx(std::max(cap, p.fp)).epsilon(1e-9));
  }
}

TEST_CASE("frontier slopes are monotone") {
  const FeasibleRegion r0 = feasible_region(g1_roc(0), 0);
  const FeasibleRegion r1 = feasible_region(diagonal_curve(), 1);
  for (const RocCurve& frontier :
       {shared_frontier(r0, r0, 801), shared_frontier(r0, r1, 801)}) {
    double prev_slope = std::numeric_limits<double>::infinity();
    for (std::size_t i = 1; i < frontier.points.size(); ++i) {
      const double dfp = frontier.points[i].fp - frontier.points[i - 1].fp;
      const double dtp = frontier.points[i].tp - frontier.points[i - 1].tp;
      CHECK(dfp >= 0.0);
      CHECK(dtp >= -1e-12);
      if (dfp <= 0.0) continue;
      const double slope = dtp / dfp;
      CHECK(slope <= prev_slope + 1e-9);
      prev_slope = slope;
    }
  }
}

TEST_CASE("realize hits curve points with a single threshold rule") {
  const RocCurve curve = g1_roc();
  const RocPoint& pt = curve.points[400];
  REQUIRE(pt.threshold.has_value());
  const DerivedPredictor dp = realize(curve, OperatingPoint{pt.fp, pt.tp});
  REQUIRE(dp.components.size() == 1);
  CHECK(dp.components[0].kind == MixtureComponent::Kind::Threshold);
  CHECK(dp.components[0].value == *pt.threshold);
  CHECK(dp.components[0].weight == 1.0);
}

TEST_CASE("realize mixes two adjacent vertices for boundary targets") {
  const RocCurve curve = zigzag_curve();  // hull keeps (0,0), (0.6,0.9), (1,1)
  const OperatingPoint mid{0.8, 0.95};    // midpoint of (0.6,0.9)-(1,1)
  const DerivedPredictor dp = realize(curve, mid);
  REQUIRE(dp.components.size() == 2);
  CHECK(dp.components[0].weight == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(dp.components[1].weight == doctest::Approx(0.5).epsilon(1e-12));
  const OperatingPoint got = dp.realized();
  CHECK(got.fp == doctest::Approx(mid.fp).epsilon(1e-12));
  CHECK(got.tp == doctest::Approx(mid.tp).epsilon(1e-12));
}

TEST_CASE("realize represents diagonal targets as a coin flip") {
  const DerivedPredictor dp = realize(g1_roc(), OperatingPoint{0.35, 0.35});
  REQUIRE(dp.components.size() == 1);
  CHECK(dp.components[0].kind == MixtureComponent::Kind::Coin);
  CHECK(dp.components[0].value == doctest::Approx(0.35).epsilon(1e-12));
}

TEST_CASE("realize reproduces strict interior targets with three rules") {
  const DerivedPredictor dp = realize(g1_roc(), OperatingPoint{0.3, 0.5});
  CHECK(dp.components.size() <= 3);
  const OperatingPoint got = dp.realized();
  CHECK(std::abs(got.fp - 0.3) <= 1e-12);
  CHECK(std::abs(got.tp - 0.5) <= 1e-12);
  double total = 0.0;
  for (const MixtureComponent& c : dp.components) {
    CHECK(c.weight >= 0.0);
    CHECK(c.weight <= 1.0);
    total += c.weight;
  }
  CHECK(total == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("realize rejects targets outside the region") {
  CHECK_THROWS_AS(realize(g1_roc(), OperatingPoint{0.2, 0.9}), InfeasibleTargetError);
  CHECK_THROWS_AS(realize(g1_roc(), OperatingPoint{0.6, 0.2}), InfeasibleTargetError);
}

TEST_CASE("realization soundness on random interior targets") {
  std::mt19937_64 gen(99);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  const RocCurve curve = g1_roc();
  const FeasibleRegion region = feasible_region(curve, 0);
  int tested = 0;
  while (tested < 100) {
    // random convex combination of three random region vertices
    const auto pick = [&] {
      return region.vertices[gen() % region.vertices.size()];
    };
    const OperatingPoint a = pick(), b = pick(), c = pick();
    double w0 = unit(gen), w1 = unit(gen), w2 = unit(gen);
    const double norm = w0 + w1 + w2;
    if (norm <= 0.0) continue;
    w0 /= norm;
    w1 /= norm;
    w2 /= norm;
    const OperatingPoint target{w0 * a.fp + w1 * b.fp + w2 * c.fp,
                                w0 * a.tp + w1 * b.tp + w2 * c.tp};
    const DerivedPredictor dp = realize(curve, target);
    const OperatingPoint got = dp.realized();
    CHECK(std::abs(got.fp - target.fp) <= 1e-9);
    CHECK(std::abs(got.tp - target.tp) <= 1e-9);
    double total = 0.0;
    for (const MixtureComponent& comp : dp.components) {
      CHECK(comp.weight >= 0.0);
      CHECK(comp.weight <= 1.0);
      total += comp.weight;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
    ++tested;
  }
}

TEST_CASE("derived signal model carries the frontier as a pseudo-signal") {
  const FeasibleRegion r0 = feasible_region(g1_roc(0, 2001), 0);
  const RocCurve frontier = shared_frontier(r0, r0, 1001);
  const SignalModel pseudo = derived_signal_model(frontier);

  // F_u(p) = p by construction; both groups share the same distributions
  for (double p : {0.1, 0.4, 0.8}) {
    CHECK(pseudo.eval(Effort::Unqualified, 0, p).cdf == doctest::Approx(p).epsilon(1e-9));
    const double inc0 = pseudo.eval(Effort::Unqualified, 0, p).cdf -
                        pseudo.eval(Effort::Qualified, 0, p).cdf;
    const double inc1 = pseudo.eval(Effort::Unqualified, 1, p).cdf -
                        pseudo.eval(Effort::Qualified, 1, p).cdf;
    CHECK(inc0 == inc1);  // bit-exact group independence of the incentive
    // incentive at p equals tp - fp on the frontier
    const double fp = 1.0 - p;
    CHECK(inc0 == doctest::Approx(frontier.tp_at(fp) - fp).epsilon(1e-9));
  }

  // a diagonal frontier yields an uninformative pseudo-signal
  RocCurve diag;
  diag.points = {RocPoint{0.0, 0.0, std::nullopt}, RocPoint{1.0, 1.0, std::nullopt}};
  const FeasibleRegion degenerate = feasible_region(diag, 1);
  const SignalModel flat = derived_signal_model(shared_frontier(degenerate, degenerate, 101));
  for (double p : {0.2, 0.5, 0.9}) {
    CHECK(flat.eval(Effort::Unqualified, 0, p).cdf ==
          doctest::Approx(flat.eval(Effort::Qualified, 0, p).cdf).epsilon(1e-12));
  }
}

TEST_CASE("incentive peak equals the max youden index of the frontier") {
  const FeasibleRegion r0 = feasible_region(g1_roc(0, 2001), 0);
  const RocCurve frontier = shared_frontier(r0, r0, 1001);
  const SignalModel pseudo = derived_signal_model(frontier);
  double best_pseudo = 0.0;
  for (double p : linspace(0.0, 1.0, 1001)) {
    best_pseudo = std::max(best_pseudo, pseudo.eval(Effort::Unqualified, 0, p).cdf -
                                            pseudo.eval(Effort::Qualified, 0, p).cdf);
  }
  double best_youden = 0.0;
  for (const RocPoint& pt : frontier.points) best_youden = std::max(best_youden, pt.tp - pt.fp);
  CHECK(best_pseudo == doctest::Approx(best_youden).epsilon(1e-9));
}

TEST_CASE("frontier and predictor serialization") {
  const FeasibleRegion r0 = feasible_region(g1_roc(), 0);
  const std::string csv = frontier_to_csv(shared_frontier(r0, r0, 11));
  CHECK(csv.rfind("p,fp,tp\n", 0) == 0);

  const DerivedPredictor dp = realize(g1_roc(), OperatingPoint{0.3, 0.5});
  const nlohmann::json j = predictor_to_json(dp);
  CHECK(j.at("target").at("fp").get<double>() == doctest::Approx(0.3));
  CHECK(j.at("components").size() == dp.components.size());
  for (const auto& comp : j.at("components")) {
    const std::string kind = comp.at("kind").get<std::string>();
    CHECK((kind == "threshold" || kind == "coin"));
  }
}
