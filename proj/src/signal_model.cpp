#include "fairsim/signal_model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "fairsim/errors.hpp"
#include "text_util.hpp"

namespace fairsim {

char effort_code(Effort e) { return e == Effort::Qualified ? 'q' : 'u'; }

std::optional<Effort> effort_from_code(char c) {
  if (c == 'q' || c == 'Q' || c == '1') return Effort::Qualified;
  if (c == 'u' || c == 'U' || c == '0') return Effort::Unqualified;
  return std::nullopt;
}

namespace {

int cell_index(Effort e, int s) { return s * 2 + static_cast<int>(e); }

std::string cell_name(Effort e, int s) {
  std::string out = "(s=";
  out += static_cast<char>('0' + s);
  out += ", e=";
  out += effort_code(e);
  out += ')';
  return out;
}

}  // namespace

SignalModel::SignalModel(GridSpec grid, Distribution1D q0, Distribution1D u0, Distribution1D q1,
                         Distribution1D u1)
    : grid_(grid),
      cells_{std::move(u0), std::move(q0), std::move(u1), std::move(q1)} {
  grid_.validate();
}

SignalModel SignalModel::two_group_gaussian(const GridSpec& grid,
                                            const std::array<std::array<double, 2>, 2>& mean,
                                            const std::array<std::array<double, 2>, 2>& sd) {
  const auto q = static_cast<std::size_t>(Effort::Qualified);
  const auto u = static_cast<std::size_t>(Effort::Unqualified);
  return SignalModel(grid, Distribution1D::gaussian(mean[0][q], sd[0][q]),
                     Distribution1D::gaussian(mean[0][u], sd[0][u]),
                     Distribution1D::gaussian(mean[1][q], sd[1][q]),
                     Distribution1D::gaussian(mean[1][u], sd[1][u]));
}

const Distribution1D& SignalModel::cell(Effort e, int s) const {
  if (s < 0 || s >= kNumGroups) {
    throw ConfigError("unknown signal cell " + cell_name(e, s));
  }
  return cells_[static_cast<std::size_t>(cell_index(e, s))];
}

EvalResult SignalModel::eval(Effort e, int s, double theta) const {
  const Distribution1D& d = cell(e, s);
  return EvalResult{d.pdf(theta), d.cdf(theta)};
}

double SignalModel::likelihood_ratio(int s, double theta) const {
  const double fu = cell(Effort::Unqualified, s).pdf(theta);
  const double fq = cell(Effort::Qualified, s).pdf(theta);
  if (fq <= 0.0) {
    if (fu <= 0.0) {
      throw UndefinedRatioError("likelihood ratio undefined: both densities vanish at theta=" +
                                fmt_g(theta));
    }
    return std::numeric_limits<double>::infinity();
  }
  return fu / fq;
}

void SignalModel::validate() const {
  for (int s = 0; s < kNumGroups; ++s) {
    for (Effort e : {Effort::Unqualified, Effort::Qualified}) {
      const Distribution1D& d = cell(e, s);
      const double lo = d.cdf(grid_.theta_min);
      const double hi = d.cdf(grid_.theta_max);
      if (lo > 1e-6 || hi < 1.0 - 1e-6) {
        throw ConfigError("cell " + cell_name(e, s) + " leaks mass outside the grid (cdf " +
                          fmt_g(lo) + " .. " + fmt_g(hi) + ")");
      }
    }
  }
}

MlrpReport check_mlrp(const SignalModel& model, int s, std::span<const double> grid) {
  // ratio f_q/f_u over the joint support only
  std::vector<double> theta;
  std::vector<double> ratio;
  theta.reserve(grid.size());
  for (double t : grid) {
    const double fq = model.cell(Effort::Qualified, s).pdf(t);
    const double fu = model.cell(Effort::Unqualified, s).pdf(t);
    if (fq > 0.0 && fu > 0.0) {
      theta.push_back(t);
      ratio.push_back(fq / fu);
    }
  }
  if (theta.size() < 2) {
    throw ConfigError("check_mlrp needs >= 2 grid points inside the joint support");
  }
  MlrpReport report;
  report.holds = true;
  for (std::size_t i = 1; i < ratio.size(); ++i) {
    const double delta = ratio[i] - ratio[i - 1];
    if (!(delta > 0.0)) report.holds = false;
    if (delta < -1e-9) report.violations.emplace_back(theta[i - 1], theta[i]);
  }
  return report;
}

void RocCurve::validate() const {
  if (points.size() < 2) throw ConfigError("roc curve needs >= 2 points");
  if (std::abs(points.front().fp) > 1e-12 || std::abs(points.front().tp) > 1e-12 ||
      std::abs(points.back().fp - 1.0) > 1e-12 || std::abs(points.back().tp - 1.0) > 1e-12) {
    throw ConfigError("roc curve must be anchored at (0,0) and (1,1)");
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    const RocPoint& p = points[i];
    if (p.fp < -1e-12 || p.fp > 1.0 + 1e-12 || p.tp < -1e-12 || p.tp > 1.0 + 1e-12) {
      throw ConfigError("roc point outside the unit square");
    }
    if (i > 0 && (p.fp < points[i - 1].fp - 1e-12 || p.tp < points[i - 1].tp - 1e-12)) {
      throw ConfigError("roc curve must be nondecreasing in fp and tp");
    }
  }
}

double RocCurve::tp_at(double fp) const {
  if (points.empty()) throw ConfigError("empty roc curve");
  if (fp <= points.front().fp) return points.front().tp;
  if (fp >= points.back().fp) return points.back().tp;
  // first point with fp strictly greater; ties resolve to the upper branch
  std::size_t hi = points.size() - 1;
  std::size_t lo = 0;
  while (hi - lo > 1) {
    const std::size_t mid = (hi + lo) / 2;
    if (points[mid].fp <= fp) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  // vertical run at fp: take the top point of the run
  while (lo + 1 < points.size() && points[lo + 1].fp <= fp) ++lo;
  if (points[lo].fp >= fp || lo + 1 >= points.size()) return points[lo].tp;
  const RocPoint& a = points[lo];
  const RocPoint& b = points[lo + 1];
  const double t = (fp - a.fp) / (b.fp - a.fp);
  return a.tp + t * (b.tp - a.tp);
}

RocCurve roc(const SignalModel& model, int s, std::span<const double> thresholds_descending) {
  for (std::size_t i = 1; i < thresholds_descending.size(); ++i) {
    if (thresholds_descending[i] > thresholds_descending[i - 1]) {
      throw ConfigError("roc thresholds must be sorted descending");
    }
  }
  RocCurve curve;
  curve.points.reserve(thresholds_descending.size() + 2);
  curve.points.push_back(RocPoint{0.0, 0.0, std::nullopt});
  double prev_fp = 0.0;
  double prev_tp = 0.0;
  for (double t : thresholds_descending) {
    double fp = 1.0 - model.cell(Effort::Unqualified, s).cdf(t);
    double tp = 1.0 - model.cell(Effort::Qualified, s).cdf(t);
    // guard against rounding regressions; the CDFs themselves are monotone
    fp = std::clamp(fp, prev_fp, 1.0);
    tp = std::clamp(tp, prev_tp, 1.0);
    curve.points.push_back(RocPoint{fp, tp, t});
    prev_fp = fp;
    prev_tp = tp;
  }
  curve.points.push_back(RocPoint{1.0, 1.0, std::nullopt});
  return curve;
}

namespace {

double cross(const RocPoint& o, const RocPoint& a, const RocPoint& b) {
  return (a.fp - o.fp) * (b.tp - o.tp) - (a.tp - o.tp) * (b.fp - o.fp);
}

}  // namespace

RocCurve concavify(const RocCurve& curve) {
  std::vector<RocPoint> pts = curve.points;
  pts.push_back(RocPoint{0.0, 0.0, std::nullopt});
  pts.push_back(RocPoint{1.0, 1.0, std::nullopt});
  std::sort(pts.begin(), pts.end(), [](const RocPoint& a, const RocPoint& b) {
    if (a.fp != b.fp) return a.fp < b.fp;
    return a.tp < b.tp;
  });
  pts.erase(std::unique(pts.begin(), pts.end(),
                        [](const RocPoint& a, const RocPoint& b) {
                          return a.fp == b.fp && a.tp == b.tp;
                        }),
            pts.end());

  // monotone-chain upper hull: pop while the middle point is on or below the
  // chord (a counterclockwise or collinear turn)
  RocCurve hull;
  for (const RocPoint& p : pts) {
    auto& h = hull.points;
    while (h.size() >= 2 && cross(h[h.size() - 2], h[h.size() - 1], p) >= 0.0) {
      h.pop_back();
    }
    h.push_back(p);
  }
  return hull;
}

SignalModel fit_empirical(const std::vector<ScoredObservation>& samples, double bandwidth,
                          std::optional<GridSpec> grid) {
  std::array<std::vector<double>, 4> cells;
  for (const ScoredObservation& ob : samples) {
    if (ob.group < 0 || ob.group >= kNumGroups) {
      throw EstimationError("sample with group outside {0,1}");
    }
    cells[static_cast<std::size_t>(cell_index(ob.effort, ob.group))].push_back(ob.theta);
  }

  std::array<double, 4> bw{};
  double bw_max = 0.0;
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (int s = 0; s < kNumGroups; ++s) {
    for (Effort e : {Effort::Unqualified, Effort::Qualified}) {
      const auto& xs = cells[static_cast<std::size_t>(cell_index(e, s))];
      if (xs.size() < 2) {
        throw EstimationError("cell " + cell_name(e, s) + " has fewer than 2 samples");
      }
      double b = bandwidth;
      if (!(b > 0.0)) {
        const double n = static_cast<double>(xs.size());
        double mean = 0.0;
        for (double x : xs) mean += x;
        mean /= n;
        double var = 0.0;
        for (double x : xs) var += (x - mean) * (x - mean);
        const double sd = std::sqrt(var / (n - 1.0));
        b = 1.06 * sd * std::pow(n, -0.2);
        if (!(b > 0.0)) {
          throw EstimationError("cell " + cell_name(e, s) +
                                " has zero variance; pass an explicit bandwidth");
        }
      }
      bw[static_cast<std::size_t>(cell_index(e, s))] = b;
      bw_max = std::max(bw_max, b);
      lo = std::min(lo, *std::min_element(xs.begin(), xs.end()));
      hi = std::max(hi, *std::max_element(xs.begin(), xs.end()));
    }
  }

  GridSpec g;
  if (grid.has_value()) {
    g = *grid;
  } else {
    g.theta_min = lo - 3.0 * bw_max;
    g.theta_max = hi + 3.0 * bw_max;
    g.n_grid = 2001;
  }
  g.validate();

  auto make = [&](Effort e, int s) {
    const std::size_t i = static_cast<std::size_t>(cell_index(e, s));
    return Distribution1D::empirical(cells[i], bw[i], g.theta_min, g.theta_max);
  };
  return SignalModel(g, make(Effort::Qualified, 0), make(Effort::Unqualified, 0),
                     make(Effort::Qualified, 1), make(Effort::Unqualified, 1));
}

std::string model_to_csv(const SignalModel& model) {
  std::ostringstream out;
  out << "theta,pdf_q0,pdf_u0,pdf_q1,pdf_u1\n";
  for (double t : model.grid().points()) {
    out << fmt_g(t) << ',' << fmt_g(model.cell(Effort::Qualified, 0).pdf(t)) << ','
        << fmt_g(model.cell(Effort::Unqualified, 0).pdf(t)) << ','
        << fmt_g(model.cell(Effort::Qualified, 1).pdf(t)) << ','
        << fmt_g(model.cell(Effort::Unqualified, 1).pdf(t)) << '\n';
  }
  return out.str();
}

std::string roc_to_csv(const RocCurve& curve) {
  std::ostringstream out;
  out << "threshold,fp,tp\n";
  for (const RocPoint& p : curve.points) {
    if (p.threshold.has_value()) out << fmt_g(*p.threshold);
    out << ',' << fmt_g(p.fp) << ',' << fmt_g(p.tp) << '\n';
  }
  return out.str();
}

}  // namespace fairsim
