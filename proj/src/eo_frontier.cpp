#include "fairsim/eo_frontier.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <sstream>

#include "fairsim/errors.hpp"
#include "text_util.hpp"

namespace fairsim {

namespace {

double cross(const OperatingPoint& o, const OperatingPoint& a, const OperatingPoint& b) {
  return (a.fp - o.fp) * (b.tp - o.tp) - (a.tp - o.tp) * (b.fp - o.fp);
}

bool near(const OperatingPoint& a, const OperatingPoint& b, double tol) {
  return std::abs(a.fp - b.fp) <= tol && std::abs(a.tp - b.tp) <= tol;
}

}  // namespace

bool FeasibleRegion::contains(const OperatingPoint& pt, double slack) const {
  if (vertices.size() < 2) return false;
  if (vertices.size() == 2) {
    // degenerate region: the diagonal segment itself
    return std::abs(pt.fp - pt.tp) <= slack && pt.fp >= -slack && pt.fp <= 1.0 + slack;
  }
  for (std::size_t i = 0; i < vertices.size(); ++i) {
    const OperatingPoint& a = vertices[i];
    const OperatingPoint& b = vertices[(i + 1) % vertices.size()];
    if (cross(a, b, pt) < -slack) return false;
  }
  return true;
}

RocCurve FeasibleRegion::upper_boundary() const {
  RocCurve curve;
  curve.points.push_back(RocPoint{0.0, 0.0, std::nullopt});
  for (std::size_t i = vertices.size(); i > 2; --i) {
    const OperatingPoint& v = vertices[i - 1];
    curve.points.push_back(RocPoint{v.fp, v.tp, std::nullopt});
  }
  curve.points.push_back(RocPoint{1.0, 1.0, std::nullopt});
  return curve;
}

void FeasibleRegion::validate() const {
  if (vertices.size() < 2) throw ConfigError("feasible region needs >= 2 vertices");
  if (!near(vertices[0], OperatingPoint{0.0, 0.0}, 1e-12) ||
      !near(vertices[1], OperatingPoint{1.0, 1.0}, 1e-12)) {
    throw ConfigError("feasible region must contain (0,0) and (1,1) as its first vertices");
  }
  for (std::size_t i = 0; i < vertices.size() && vertices.size() > 2; ++i) {
    const OperatingPoint& a = vertices[i];
    const OperatingPoint& b = vertices[(i + 1) % vertices.size()];
    const OperatingPoint& c = vertices[(i + 2) % vertices.size()];
    if (cross(a, b, c) < -1e-12) throw ConfigError("feasible region is not convex");
  }
}

FeasibleRegion feasible_region(const RocCurve& curve, int group) {
  const RocCurve hull = concavify(curve);
  FeasibleRegion region;
  region.group = group;
  region.vertices.push_back(OperatingPoint{0.0, 0.0});
  region.vertices.push_back(OperatingPoint{1.0, 1.0});
  for (std::size_t i = hull.points.size() - 1; i-- > 1;) {
    const RocPoint& p = hull.points[i];
    region.vertices.push_back(OperatingPoint{p.fp, p.tp});
  }
  // drop upper vertices that sit on the diagonal; they add nothing beyond the anchors
  while (region.vertices.size() > 2 &&
         std::abs(region.vertices.back().fp - region.vertices.back().tp) <= 1e-15) {
    region.vertices.pop_back();
  }
  return region;
}

RocCurve shared_frontier(const FeasibleRegion& region0, const FeasibleRegion& region1,
                         int n_points) {
  if (n_points < 2) throw ConfigError("shared frontier needs >= 2 sample points");
  const RocCurve upper0 = region0.upper_boundary();
  const RocCurve upper1 = region1.upper_boundary();
  RocCurve frontier;
  frontier.points.reserve(static_cast<std::size_t>(n_points) + 1);
  double prev_tp = 0.0;
  for (int j = 0; j < n_points; ++j) {
    const double fp = static_cast<double>(j) / (n_points - 1);
    double tp = std::min(upper0.tp_at(fp), upper1.tp_at(fp));
    tp = std::clamp(tp, std::max(fp, prev_tp), 1.0);  // intersection contains the diagonal
    frontier.points.push_back(RocPoint{fp, tp, std::nullopt});
    prev_tp = tp;
  }
  if (frontier.points.front().tp > 0.0) {
    frontier.points.insert(frontier.points.begin(), RocPoint{0.0, 0.0, std::nullopt});
  }
  frontier.points.back().tp = 1.0;
  return frontier;
}

OperatingPoint DerivedPredictor::realized() const {
  OperatingPoint out{0.0, 0.0};
  for (const MixtureComponent& c : components) {
    out.fp += c.weight * c.point.fp;
    out.tp += c.weight * c.point.tp;
  }
  return out;
}

namespace {

MixtureComponent make_component(const RocPoint& v, double weight) {
  if (v.threshold.has_value()) {
    return MixtureComponent{MixtureComponent::Kind::Threshold, *v.threshold, weight,
                            OperatingPoint{v.fp, v.tp}};
  }
  if (std::abs(v.fp - v.tp) <= 1e-9) {
    return MixtureComponent{MixtureComponent::Kind::Coin, 0.5 * (v.fp + v.tp), weight,
                            OperatingPoint{v.fp, v.tp}};
  }
  throw ConfigError("realize needs a source threshold for off-diagonal hull vertices");
}

}  // namespace

DerivedPredictor realize(const RocCurve& roc_s, const OperatingPoint& target) {
  const RocCurve hull = concavify(roc_s);
  FeasibleRegion region = feasible_region(roc_s);

  if (!region.contains(target, 1e-9)) {
    // report the violated half-plane for diagnostics
    std::string detail;
    for (std::size_t i = 0; i < region.vertices.size(); ++i) {
      const OperatingPoint& a = region.vertices[i];
      const OperatingPoint& b = region.vertices[(i + 1) % region.vertices.size()];
      if (region.vertices.size() > 2 && cross(a, b, target) < -1e-9) {
        detail = " beyond edge (" + fmt_g(a.fp) + "," + fmt_g(a.tp) + ")-(" + fmt_g(b.fp) + "," +
                 fmt_g(b.tp) + ")";
        break;
      }
    }
    throw InfeasibleTargetError("target (" + fmt_g(target.fp) + "," + fmt_g(target.tp) +
                                ") outside the feasible region" + detail);
  }

  DerivedPredictor out;
  out.target = target;

  // exact hit on an input curve point: one threshold rule
  for (const RocPoint& p : roc_s.points) {
    if (p.threshold.has_value() && std::abs(p.fp - target.fp) <= 1e-12 &&
        std::abs(p.tp - target.tp) <= 1e-12) {
      out.components.push_back(make_component(p, 1.0));
      return out;
    }
  }
  // on the diagonal: a single coin flip
  if (std::abs(target.fp - target.tp) <= 1e-12) {
    const double gamma = 0.5 * (target.fp + target.tp);
    out.components.push_back(MixtureComponent{MixtureComponent::Kind::Coin, gamma, 1.0,
                                              OperatingPoint{gamma, gamma}});
    return out;
  }
  // on a hull vertex or an upper-boundary segment: at most two rules; the
  // segment test uses the true point-to-line distance so corner segments
  // with tiny coordinates are not misclassified
  for (std::size_t i = 0; i < hull.points.size(); ++i) {
    const RocPoint& a = hull.points[i];
    if (std::abs(a.fp - target.fp) <= 1e-12 && std::abs(a.tp - target.tp) <= 1e-12) {
      out.components.push_back(make_component(a, 1.0));
      return out;
    }
    if (i + 1 == hull.points.size()) break;
    const RocPoint& b = hull.points[i + 1];
    const double dfp = b.fp - a.fp;
    const double dtp = b.tp - a.tp;
    const double len2 = dfp * dfp + dtp * dtp;
    if (len2 <= 0.0) continue;
    const OperatingPoint oa{a.fp, a.tp};
    const OperatingPoint ob{b.fp, b.tp};
    const double dist = std::abs(cross(oa, ob, target)) / std::sqrt(len2);
    if (dist > 1e-12) continue;
    const double t =
        ((target.fp - a.fp) * dfp + (target.tp - a.tp) * dtp) / len2;  // projection
    if (t < -1e-12 || t > 1.0 + 1e-12) continue;
    const double tw = std::clamp(t, 0.0, 1.0);
    out.components.push_back(make_component(a, 1.0 - tw));
    out.components.push_back(make_component(b, tw));
    return out;
  }

  // interior: split the target along its own fp between a coin rule on the
  // diagonal and the boundary point above it, which is itself a mixture of
  // the two bracketing hull vertices; this keeps the weights well
  // conditioned even for targets squeezed against the diagonal
  std::size_t seg = hull.points.size();
  for (std::size_t i = 0; i + 1 < hull.points.size(); ++i) {
    if (target.fp >= hull.points[i].fp - 1e-12 && target.fp <= hull.points[i + 1].fp + 1e-12) {
      seg = i;
      if (hull.points[i + 1].fp >= target.fp) break;  // first bracketing segment
    }
  }
  if (seg >= hull.points.size()) {
    throw InfeasibleTargetError("target passed the region test but no bracketing segment found");
  }
  const RocPoint& a = hull.points[seg];
  const RocPoint& b = hull.points[seg + 1];
  double split;       // weight share of the two threshold rules
  double share_b;     // share of vertex b inside the boundary mixture
  if (b.fp - a.fp > 0.0) {
    share_b = std::clamp((target.fp - a.fp) / (b.fp - a.fp), 0.0, 1.0);
    const double boundary_tp = a.tp + share_b * (b.tp - a.tp);
    const double height = boundary_tp - target.fp;  // boundary above the diagonal
    split = height > 0.0 ? std::clamp((target.tp - target.fp) / height, 0.0, 1.0) : 0.0;
  } else {
    // vertical segment at fp: mix the top vertex against the diagonal point
    share_b = 1.0;
    split = b.tp - target.fp > 0.0
                ? std::clamp((target.tp - target.fp) / (b.tp - target.fp), 0.0, 1.0)
                : 0.0;
  }
  const double w_coin = 1.0 - split;
  const double w_a = split * (1.0 - share_b);
  const double w_b = split * share_b;
  if (w_coin > 1e-13) {
    out.components.push_back(MixtureComponent{MixtureComponent::Kind::Coin, target.fp, w_coin,
                                              OperatingPoint{target.fp, target.fp}});
  }
  if (w_a > 1e-13) out.components.push_back(make_component(a, w_a));
  if (w_b > 1e-13) out.components.push_back(make_component(b, w_b));
  return out;
}

SignalModel derived_signal_model(const RocCurve& frontier) {
  frontier.validate();
  // dedupe by fp, keeping the topmost point of any vertical run
  std::vector<OperatingPoint> pts;
  for (const RocPoint& p : frontier.points) {
    if (!pts.empty() && p.fp <= pts.back().fp + 1e-15) {
      pts.back().tp = std::max(pts.back().tp, p.tp);
      pts.back().fp = std::max(pts.back().fp, p.fp);
      continue;
    }
    pts.push_back(OperatingPoint{p.fp, p.tp});
  }
  if (pts.size() < 2) throw ConfigError("frontier too coarse for a derived signal model");

  const std::size_t n = pts.size();
  std::vector<double> p_grid(n), cdf_u(n), cdf_q(n);
  for (std::size_t i = 0; i < n; ++i) {
    const OperatingPoint& op = pts[n - 1 - i];  // p ascending = fp descending
    p_grid[i] = 1.0 - op.fp;
    cdf_u[i] = 1.0 - op.fp;
    cdf_q[i] = 1.0 - op.tp;
  }
  if (cdf_q.back() < 1.0 - 1e-6) {
    throw ConfigError("frontier keeps tp > 0 at fp = 0; the derived signal would leak mass");
  }
  auto density = [&](const std::vector<double>& cdf) {
    std::vector<double> pdf(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      const std::size_t a = (i == 0) ? 0 : i - 1;
      const std::size_t b = (i + 1 == n) ? i : i + 1;
      pdf[i] = std::max(0.0, (cdf[b] - cdf[a]) / (p_grid[b] - p_grid[a]));
    }
    return pdf;
  };
  const std::vector<double> pdf_u = density(cdf_u);
  const std::vector<double> pdf_q = density(cdf_q);

  GridSpec grid{p_grid.front(), p_grid.back(), static_cast<int>(n)};
  Distribution1D q = Distribution1D::tabulated_with_cdf(p_grid, pdf_q, cdf_q);
  Distribution1D u = Distribution1D::tabulated_with_cdf(p_grid, pdf_u, cdf_u);
  return SignalModel(grid, q, u, q, u);
}

std::string frontier_to_csv(const RocCurve& frontier) {
  std::ostringstream out;
  out << "p,fp,tp\n";
  for (const RocPoint& p : frontier.points) {
    out << fmt_g(1.0 - p.fp) << ',' << fmt_g(p.fp) << ',' << fmt_g(p.tp) << '\n';
  }
  return out.str();
}

nlohmann::json predictor_to_json(const DerivedPredictor& predictor) {
  nlohmann::json components = nlohmann::json::array();
  for (const MixtureComponent& c : predictor.components) {
    components.push_back({
        {"kind", c.kind == MixtureComponent::Kind::Threshold ? "threshold" : "coin"},
        {"value", c.value},
        {"weight", c.weight},
    });
  }
  return nlohmann::json{
      {"target", {{"fp", predictor.target.fp}, {"tp", predictor.target.tp}}},
      {"components", components},
  };
}

}  // namespace fairsim
