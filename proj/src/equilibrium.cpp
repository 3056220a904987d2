#include "fairsim/equilibrium.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>

#include "fairsim/eo_frontier.hpp"
#include "fairsim/errors.hpp"

namespace fairsim {

namespace {

constexpr double kThetaTol = 1e-6;
constexpr int kFrontierPoints = 1001;
constexpr double kNan = std::numeric_limits<double>::quiet_NaN();

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

// ---------------------------------------------------------------------------
// 1-D sign-change scan with bisection refinement
// ---------------------------------------------------------------------------

struct ScanRoot {
  double x;
  Stability stability;
};

std::vector<ScanRoot> scan_roots(const std::function<double(double)>& f,
                                 const std::vector<double>& grid, double x_tol,
                                 double dedup_radius) {
  std::vector<double> vals(grid.size());
  for (std::size_t i = 0; i < grid.size(); ++i) vals[i] = f(grid[i]);

  // crossings are paired between nonzero signs; runs of exact zeros (dead
  // tails where both curves vanish) do not count as sign changes on their own
  std::vector<ScanRoot> roots;
  int last_sign = 0;
  std::size_t last_idx = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const double v = vals[i];
    if (std::isnan(v)) {
      last_sign = 0;  // support break: never bracket across it
      continue;
    }
    const int s = sign_of(v);
    if (s == 0) continue;
    if (last_sign != 0 && s != last_sign) {
      const int sa = last_sign;
      double lo = grid[last_idx];
      double hi = grid[i];
      while (hi - lo > x_tol) {
        const double mid = 0.5 * (lo + hi);
        const double fm = f(mid);
        if (std::isnan(fm)) break;
        if (sign_of(fm) == sa) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      roots.push_back(
          ScanRoot{0.5 * (lo + hi), sa > 0 ? Stability::Stable : Stability::Unstable});
    }
    last_sign = s;
    last_idx = i;
  }

  std::vector<ScanRoot> unique;
  for (const ScanRoot& r : roots) {
    if (!unique.empty() && r.x - unique.back().x <= dedup_radius) continue;
    unique.push_back(r);
  }
  return unique;
}

// ---------------------------------------------------------------------------
// shared per-policy helpers
// ---------------------------------------------------------------------------

double ar_at(const SignalModel& model, const GameParams& params, int s, double theta) {
  return applicant_response(params, incentive(model, params, s, theta).value);
}

double safe_fr(const SignalModel& model, const GameParams& params, int s, double theta) {
  try {
    return firm_response(model, params, s, theta);
  } catch (const UndefinedRatioError&) {
    return kNan;
  }
}

double pooled_fr(const SignalModel& model, const GameParams& params, double theta) {
  const double l0 = params.lambda(0);
  const double l1 = params.lambda(1);
  const double fu = l0 * model.cell(Effort::Unqualified, 0).pdf(theta) +
                    l1 * model.cell(Effort::Unqualified, 1).pdf(theta);
  const double fq = l0 * model.cell(Effort::Qualified, 0).pdf(theta) +
                    l1 * model.cell(Effort::Qualified, 1).pdf(theta);
  if (fq <= 0.0) return fu > 0.0 ? 1.0 : kNan;
  const double phi = fu / fq;
  return phi / (params.r() + phi);
}

GroupAcceptance acceptance_at(const SignalModel& model, int s, double theta) {
  return GroupAcceptance{1.0 - model.cell(Effort::Qualified, s).cdf(theta),
                         1.0 - model.cell(Effort::Unqualified, s).cdf(theta)};
}

void sort_equilibria(std::vector<Equilibrium>& list) {
  std::sort(list.begin(), list.end(), [](const Equilibrium& a, const Equilibrium& b) {
    if (a.pi0 != b.pi0) return a.pi0 > b.pi0;
    if (a.pi1 != b.pi1) return a.pi1 > b.pi1;
    return a.theta0 < b.theta0;
  });
}

// ---------------------------------------------------------------------------
// LF and CB: threshold-space scans
// ---------------------------------------------------------------------------

struct GroupSolution {
  double theta = 0.0;
  double pi = 0.0;
  double fr_defect = 0.0;
  double ar_defect = 0.0;
  Stability stability = Stability::Stable;
};

std::vector<GroupSolution> solve_group(const SignalModel& model, const GameParams& params, int s,
                                       const std::vector<double>& grid,
                                       const SolverConfig& cfg) {
  const double step = grid[1] - grid[0];
  const auto response_gap = [&](double t) {
    const double fr = safe_fr(model, params, s, t);
    if (std::isnan(fr)) return kNan;
    return ar_at(model, params, s, t) - fr;
  };
  const std::vector<ScanRoot> roots =
      scan_roots(response_gap, grid, kThetaTol, cfg.dedup_steps * step);

  std::vector<GroupSolution> out;
  if (roots.empty()) {
    // no interior crossing; report the no-investment corner at the strict end
    GroupSolution b;
    b.theta = grid.back();
    b.pi = ar_at(model, params, s, b.theta);
    const double fr = safe_fr(model, params, s, b.theta);
    b.fr_defect = std::isnan(fr) ? 0.0 : std::max(0.0, b.pi - fr);
    b.stability = Stability::Boundary;
    out.push_back(b);
    return out;
  }
  for (const ScanRoot& r : roots) {
    GroupSolution g;
    g.theta = r.x;
    g.pi = ar_at(model, params, s, r.x);
    const double fr = safe_fr(model, params, s, r.x);
    g.fr_defect = std::isnan(fr) ? 0.0 : std::abs(g.pi - fr);
    g.stability = r.stability;
    out.push_back(g);
  }
  std::sort(out.begin(), out.end(),
            [](const GroupSolution& a, const GroupSolution& b) { return a.pi > b.pi; });
  return out;
}

Stability combine_stability(Stability a, Stability b) {
  if (a == Stability::Boundary || b == Stability::Boundary) return Stability::Boundary;
  if (a == Stability::Unstable || b == Stability::Unstable) return Stability::Unstable;
  return Stability::Stable;
}

}  // namespace

void SolverConfig::validate() const {
  if (grid_size < 2 || !(tolerance > 0.0) || dedup_steps < 0 || !(damping > 0.0) ||
      damping > 1.0 || max_iterations < 1 || multi_start < 1) {
    throw ConfigError("invalid solver config");
  }
}

std::vector<Equilibrium> solve_lf(const SignalModel& model, const GameParams& params,
                                  const SolverConfig& cfg) {
  cfg.validate();
  params.validate();
  const std::vector<double> grid =
      linspace(model.grid().theta_min, model.grid().theta_max, cfg.grid_size);

  const std::vector<GroupSolution> sols0 = solve_group(model, params, 0, grid, cfg);
  const std::vector<GroupSolution> sols1 = solve_group(model, params, 1, grid, cfg);

  // the groups are independent under LF; pair solutions rank-by-rank
  const std::size_t count = std::max(sols0.size(), sols1.size());
  std::vector<Equilibrium> out;
  for (std::size_t i = 0; i < count; ++i) {
    const GroupSolution& g0 = sols0[std::min(i, sols0.size() - 1)];
    const GroupSolution& g1 = sols1[std::min(i, sols1.size() - 1)];
    Equilibrium eq;
    eq.policy = Policy::LF;
    eq.theta0 = g0.theta;
    eq.theta1 = g1.theta;
    eq.pi0 = g0.pi;
    eq.pi1 = g1.pi;
    eq.residuals = {{"ar0", g0.ar_defect},
                    {"ar1", g1.ar_defect},
                    {"fr0", g0.fr_defect},
                    {"fr1", g1.fr_defect}};
    eq.stability = combine_stability(g0.stability, g1.stability);
    eq.accept0 = acceptance_at(model, 0, g0.theta);
    eq.accept1 = acceptance_at(model, 1, g1.theta);
    out.push_back(eq);
  }
  sort_equilibria(out);
  return out;
}

std::vector<Equilibrium> solve_cb(const SignalModel& model, const GameParams& params,
                                  const SolverConfig& cfg) {
  cfg.validate();
  params.validate();
  const std::vector<double> grid =
      linspace(model.grid().theta_min, model.grid().theta_max, cfg.grid_size);
  const double step = grid[1] - grid[0];

  const auto response_gap = [&](double t) {
    const double fr = pooled_fr(model, params, t);
    if (std::isnan(fr)) return kNan;
    return params.lambda(0) * ar_at(model, params, 0, t) +
           params.lambda(1) * ar_at(model, params, 1, t) - fr;
  };
  const std::vector<ScanRoot> roots =
      scan_roots(response_gap, grid, kThetaTol, cfg.dedup_steps * step);

  std::vector<Equilibrium> out;
  const auto make = [&](double theta, Stability stability, bool boundary) {
    Equilibrium eq;
    eq.policy = Policy::CB;
    eq.theta0 = eq.theta1 = theta;
    eq.pi0 = ar_at(model, params, 0, theta);
    eq.pi1 = ar_at(model, params, 1, theta);
    const double pooled = params.lambda(0) * eq.pi0 + params.lambda(1) * eq.pi1;
    const double fr = pooled_fr(model, params, theta);
    double fr_defect = 0.0;
    if (!std::isnan(fr)) {
      fr_defect = boundary ? std::max(0.0, pooled - fr) : std::abs(pooled - fr);
    }
    eq.residuals = {{"ar0", 0.0}, {"ar1", 0.0}, {"fr_pool", fr_defect}, {"theta_eq", 0.0}};
    eq.stability = stability;
    eq.accept0 = acceptance_at(model, 0, theta);
    eq.accept1 = acceptance_at(model, 1, theta);
    out.push_back(eq);
  };

  if (roots.empty()) {
    make(grid.back(), Stability::Boundary, true);
  } else {
    for (const ScanRoot& r : roots) make(r.x, r.stability, false);
  }
  sort_equilibria(out);
  return out;
}

// ---------------------------------------------------------------------------
// EO: 1-D scan over the shared frontier, parametrized by p = 1 - fp
// ---------------------------------------------------------------------------

namespace {

struct FrontierScan {
  std::vector<double> fp, tp;  // vertices, fp ascending
  std::vector<double> seg_fr;  // firm belief making each segment optimal
};

RocCurve frontier_for(const SignalModel& model, const SolverConfig& cfg) {
  std::vector<double> thresholds =
      linspace(model.grid().theta_min, model.grid().theta_max, cfg.grid_size);
  std::reverse(thresholds.begin(), thresholds.end());
  const FeasibleRegion region0 = feasible_region(roc(model, 0, thresholds), 0);
  const FeasibleRegion region1 = feasible_region(roc(model, 1, thresholds), 1);
  return shared_frontier(region0, region1, kFrontierPoints);
}

FrontierScan make_frontier_scan(const RocCurve& frontier, const GameParams& params) {
  FrontierScan fs;
  for (const RocPoint& p : frontier.points) {
    if (!fs.fp.empty() && p.fp <= fs.fp.back() + 1e-15 && p.tp <= fs.tp.back() + 1e-15) continue;
    fs.fp.push_back(p.fp);
    fs.tp.push_back(p.tp);
  }
  const double r = params.r();
  for (std::size_t j = 0; j + 1 < fs.fp.size(); ++j) {
    const double dfp = fs.fp[j + 1] - fs.fp[j];
    const double dtp = fs.tp[j + 1] - fs.tp[j];
    if (dtp <= 0.0) {
      fs.seg_fr.push_back(1.0);  // flat segment: phi' = +inf sentinel
    } else if (dfp <= 0.0) {
      fs.seg_fr.push_back(0.0);  // vertical segment: phi' = 0
    } else {
      const double phi = dfp / dtp;
      fs.seg_fr.push_back(phi / (r + phi));
    }
  }
  return fs;
}

struct FrontierRoot {
  double p;
  double pi;
  double fr_defect;
  Stability stability;
};

std::vector<FrontierRoot> scan_frontier(const FrontierScan& fs, const GameParams& params,
                                        const SolverConfig& cfg) {
  const std::size_t nseg = fs.seg_fr.size();
  const auto ar_of = [&](double fp, double tp) {
    return applicant_response(params, params.omega * (tp - fp));
  };

  std::vector<FrontierRoot> roots;
  // segments in p-ascending order = vertex index descending
  for (std::size_t m = nseg; m-- > 0;) {
    const double p_lo = 1.0 - fs.fp[m + 1];
    const double p_hi = 1.0 - fs.fp[m];
    const double fr = fs.seg_fr[m];
    const auto gap_at = [&](double p) {
      const double fp = 1.0 - p;
      const double t = (fs.fp[m + 1] - fs.fp[m]) > 0.0
                           ? (fp - fs.fp[m]) / (fs.fp[m + 1] - fs.fp[m])
                           : 0.0;
      const double tp = fs.tp[m] + t * (fs.tp[m + 1] - fs.tp[m]);
      return ar_of(fp, tp) - fr;
    };
    if (p_hi - p_lo > 1e-15) {
      const double ga = gap_at(p_lo);
      const double gb = gap_at(p_hi);
      if (sign_of(ga) * sign_of(gb) < 0) {
        double lo = p_lo, hi = p_hi;
        const int sa = sign_of(ga);
        while (hi - lo > kThetaTol) {
          const double mid = 0.5 * (lo + hi);
          if (sign_of(gap_at(mid)) == sa) {
            lo = mid;
          } else {
            hi = mid;
          }
        }
        const double p = 0.5 * (lo + hi);
        const double fp = 1.0 - p;
        const double frac = (fs.fp[m + 1] - fs.fp[m]) > 0.0
                                ? (fp - fs.fp[m]) / (fs.fp[m + 1] - fs.fp[m])
                                : 0.0;
        const double tp = fs.tp[m] + frac * (fs.tp[m + 1] - fs.tp[m]);
        const double pi = ar_of(fp, tp);
        roots.push_back(FrontierRoot{p, pi, std::abs(pi - fr),
                                     sa > 0 ? Stability::Stable : Stability::Unstable});
      }
    }
    // kink between this segment and the next-stricter one (smaller fp)
    if (m > 0) {
      const double fp_v = fs.fp[m];
      const double tp_v = fs.tp[m];
      const double pi_v = ar_of(fp_v, tp_v);
      const double fr_left = fs.seg_fr[m];      // p just below the vertex
      const double fr_right = fs.seg_fr[m - 1];  // p just above the vertex
      if (pi_v - fr_left < 0.0 && pi_v - fr_right > 0.0) {
        const double defect =
            std::max({0.0, pi_v - std::max(fr_left, fr_right), std::min(fr_left, fr_right) - pi_v});
        roots.push_back(FrontierRoot{1.0 - fp_v, pi_v, defect, Stability::Unstable});
      }
    }
  }
  std::sort(roots.begin(), roots.end(),
            [](const FrontierRoot& a, const FrontierRoot& b) { return a.p < b.p; });
  std::vector<FrontierRoot> unique;
  const double radius = cfg.dedup_steps * 1.0 / (kFrontierPoints - 1);
  for (const FrontierRoot& r : roots) {
    if (!unique.empty() && r.p - unique.back().p <= radius) continue;
    unique.push_back(r);
  }
  return unique;
}

double frontier_tp_at_fp(const FrontierScan& fs, double fp) {
  const auto it = std::upper_bound(fs.fp.begin(), fs.fp.end(), fp);
  if (it == fs.fp.begin()) return fs.tp.front();
  if (it == fs.fp.end()) return fs.tp.back();
  const std::size_t j = static_cast<std::size_t>(it - fs.fp.begin());
  const double dfp = fs.fp[j] - fs.fp[j - 1];
  if (dfp <= 0.0) return std::max(fs.tp[j - 1], fs.tp[j]);
  const double t = (fp - fs.fp[j - 1]) / dfp;
  return fs.tp[j - 1] + t * (fs.tp[j] - fs.tp[j - 1]);
}

}  // namespace

std::vector<Equilibrium> solve_eo(const SignalModel& model, const GameParams& params,
                                  const SolverConfig& cfg) {
  cfg.validate();
  params.validate();
  const RocCurve frontier = frontier_for(model, cfg);
  const FrontierScan fs = make_frontier_scan(frontier, params);
  const std::vector<FrontierRoot> roots = scan_frontier(fs, params, cfg);

  std::vector<Equilibrium> out;
  const auto make = [&](double p, double pi, double fr_defect, Stability stability) {
    Equilibrium eq;
    eq.policy = Policy::EO;
    eq.theta0 = eq.theta1 = p;
    eq.pi0 = eq.pi1 = pi;  // the shared frontier gives both groups the same incentive
    eq.residuals = {{"ar", 0.0}, {"fr", fr_defect}, {"pi_eq", 0.0}};
    eq.stability = stability;
    const double fp = 1.0 - p;
    const double tp = frontier_tp_at_fp(fs, fp);
    eq.accept0 = eq.accept1 = GroupAcceptance{tp, fp};
    out.push_back(eq);
  };

  if (roots.empty()) {
    // strictest end of the frontier: nobody accepted, nobody invests
    const double tp0 = fs.tp.front();
    const double pi = applicant_response(params, params.omega * (tp0 - fs.fp.front()));
    const double corner = std::max(0.0, pi - fs.seg_fr.front());
    make(1.0 - fs.fp.front(), pi, corner, Stability::Boundary);
  } else {
    for (const FrontierRoot& r : roots) make(r.p, r.pi, r.fr_defect, r.stability);
  }
  sort_equilibria(out);
  return out;
}

// ---------------------------------------------------------------------------
// DP: acceptance-equality constraint sweep + argmax fixed point
// ---------------------------------------------------------------------------

namespace {

struct DpTables {
  std::vector<double> grid;
  double step = 0.0;
  // per group: 1-F_q, 1-F_u, applicant response, self-consistent acceptance
  std::array<std::vector<double>, 2> omq, omu, ar, self_acc;
};

double table_at(const std::vector<double>& grid, const std::vector<double>& v, double x) {
  if (x <= grid.front()) return v.front();
  if (x >= grid.back()) return v.back();
  const double step = grid[1] - grid[0];
  const auto i = static_cast<std::size_t>((x - grid.front()) / step);
  const std::size_t j = std::min(i, grid.size() - 2);
  const double t = (x - grid[j]) / step;
  return v[j] + t * (v[j + 1] - v[j]);
}

DpTables make_dp_tables(const SignalModel& model, const GameParams& params,
                        const SolverConfig& cfg) {
  DpTables t;
  t.grid = linspace(model.grid().theta_min, model.grid().theta_max, cfg.grid_size);
  t.step = t.grid[1] - t.grid[0];
  for (int s = 0; s < kNumGroups; ++s) {
    auto& omq = t.omq[static_cast<std::size_t>(s)];
    auto& omu = t.omu[static_cast<std::size_t>(s)];
    auto& ar = t.ar[static_cast<std::size_t>(s)];
    auto& acc = t.self_acc[static_cast<std::size_t>(s)];
    omq.resize(t.grid.size());
    omu.resize(t.grid.size());
    ar.resize(t.grid.size());
    acc.resize(t.grid.size());
    for (std::size_t i = 0; i < t.grid.size(); ++i) {
      const double th = t.grid[i];
      omq[i] = 1.0 - model.cell(Effort::Qualified, s).cdf(th);
      omu[i] = 1.0 - model.cell(Effort::Unqualified, s).cdf(th);
      // expected gain omega * (F_u - F_q) = omega * (omq - omu)
      ar[i] = applicant_response(params, params.omega * (omq[i] - omu[i]));
      acc[i] = ar[i] * omq[i] + (1.0 - ar[i]) * omu[i];
    }
  }
  return t;
}

double dp_accept(const DpTables& t, int s, double theta, double pi) {
  const auto si = static_cast<std::size_t>(s);
  return pi * table_at(t.grid, t.omq[si], theta) +
         (1.0 - pi) * table_at(t.grid, t.omu[si], theta);
}

// invert theta -> acceptance rate for fixed pi (acceptance decreases in theta)
double dp_invert_accept(const DpTables& t, int s, double a, double pi) {
  const auto si = static_cast<std::size_t>(s);
  const auto acc_at = [&](std::size_t i) {
    return pi * t.omq[si][i] + (1.0 - pi) * t.omu[si][i];
  };
  const std::size_t n = t.grid.size();
  if (a >= acc_at(0)) return t.grid.front();
  if (a <= acc_at(n - 1)) return t.grid.back();
  std::size_t lo = 0, hi = n - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (acc_at(mid) > a) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  const double alo = acc_at(lo);
  const double ahi = acc_at(hi);
  if (alo - ahi <= 0.0) return t.grid[lo];
  return t.grid[lo] + (alo - a) / (alo - ahi) * t.step;
}

double dp_fw(const DpTables& t, const GameParams& params, int s, double theta, double pi) {
  const auto si = static_cast<std::size_t>(s);
  return pi * table_at(t.grid, t.omq[si], theta) * params.v_q -
         (1.0 - pi) * table_at(t.grid, t.omu[si], theta) * params.v_u;
}

struct DpArgmax {
  double theta0 = 0.0;
  double theta1 = 0.0;
  double fw = 0.0;
};

DpArgmax dp_sweep(const DpTables& t, const GameParams& params, double pi0, double pi1) {
  const auto objective = [&](double t0) {
    const double a = dp_accept(t, 0, t0, pi0);
    const double t1 = dp_invert_accept(t, 1, a, pi1);
    return params.lambda(0) * dp_fw(t, params, 0, t0, pi0) +
           params.lambda(1) * dp_fw(t, params, 1, t1, pi1);
  };
  std::size_t best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < t.grid.size(); ++i) {
    const double v = objective(t.grid[i]);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  double theta0 = t.grid[best];
  double fw = best_val;
  if (best > 0 && best + 1 < t.grid.size()) {
    // parabolic refinement around the best grid point
    const double fm = objective(t.grid[best - 1]);
    const double fp = objective(t.grid[best + 1]);
    const double denom = fm - 2.0 * best_val + fp;
    if (denom < -1e-300) {
      const double shift = 0.5 * (fm - fp) / denom;
      const double cand = t.grid[best] + shift * t.step;
      const double v = objective(cand);
      if (v >= best_val) {
        theta0 = cand;
        fw = v;
      }
    }
  }
  DpArgmax out;
  out.theta0 = theta0;
  out.theta1 = dp_invert_accept(t, 1, dp_accept(t, 0, theta0, pi0), pi1);
  out.fw = fw;
  return out;
}

// roots of self_acc1(theta1) == a, refined by bisection on the interpolant
std::vector<double> dp_branches(const DpTables& t, double a) {
  const auto& acc = t.self_acc[1];
  std::vector<double> out;
  const auto acc_fn = [&](double x) { return table_at(t.grid, acc, x) - a; };
  for (std::size_t i = 1; i < t.grid.size(); ++i) {
    const double va = acc[i - 1] - a;
    const double vb = acc[i] - a;
    const int sa = sign_of(va);
    const int sb = sign_of(vb);
    if (sa == 0) {
      out.push_back(t.grid[i - 1]);
      continue;
    }
    if (sa * sb >= 0) continue;
    double lo = t.grid[i - 1], hi = t.grid[i];
    while (hi - lo > kThetaTol) {
      const double mid = 0.5 * (lo + hi);
      if (sign_of(acc_fn(mid)) == sa) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    out.push_back(0.5 * (lo + hi));
  }
  return out;
}

struct DpCandidate {
  double theta0, theta1, pi0, pi1;
};

// residual-checked assembly shared by the scan and the fixed-point pass
void dp_emit(const DpTables& t, const SignalModel& model, const GameParams& params,
             const SolverConfig& cfg, const DpCandidate& c, Stability stability,
             std::vector<Equilibrium>& out) {
  const double accept_gap =
      std::abs(dp_accept(t, 0, c.theta0, c.pi0) - dp_accept(t, 1, c.theta1, c.pi1));
  const DpArgmax best = dp_sweep(t, params, c.pi0, c.pi1);
  const double fw_here = params.lambda(0) * dp_fw(t, params, 0, c.theta0, c.pi0) +
                         params.lambda(1) * dp_fw(t, params, 1, c.theta1, c.pi1);
  const double argmax_gap = std::max(0.0, best.fw - fw_here) / std::max(1.0, std::abs(best.fw));
  if (accept_gap > cfg.tolerance || argmax_gap > cfg.tolerance) return;

  for (const Equilibrium& e : out) {
    if (std::abs(e.theta0 - c.theta0) <= cfg.dedup_steps * t.step &&
        std::abs(e.theta1 - c.theta1) <= cfg.dedup_steps * t.step) {
      return;
    }
  }
  Equilibrium eq;
  eq.policy = Policy::DP;
  eq.theta0 = c.theta0;
  eq.theta1 = c.theta1;
  eq.pi0 = c.pi0;
  eq.pi1 = c.pi1;
  eq.residuals = {
      {"ar0", 0.0}, {"ar1", 0.0}, {"accept_eq", accept_gap}, {"argmax", argmax_gap}};
  const double edge = t.grid.back() - 0.5 * t.step;
  eq.stability = (c.theta0 > edge && c.theta1 > edge) ? Stability::Boundary : stability;
  eq.accept0 = acceptance_at(model, 0, c.theta0);
  eq.accept1 = acceptance_at(model, 1, c.theta1);
  out.push_back(eq);
}

double halton(int index, int base) {
  double f = 1.0, r = 0.0;
  int i = index;
  while (i > 0) {
    f /= base;
    r += f * (i % base);
    i /= base;
  }
  return r;
}

}  // namespace

std::vector<Equilibrium> solve_dp(const SignalModel& model, const GameParams& params,
                                  const SolverConfig& cfg) {
  cfg.validate();
  params.validate();
  const DpTables t = make_dp_tables(model, params, cfg);
  const std::size_t n = t.grid.size();

  std::vector<Equilibrium> out;

  // deterministic constraint-sweep scan: for each theta0, resolve every
  // self-consistent theta1 branch, then look for fixed points of the
  // firm's constrained argmax in theta0
  const auto gap_on_branch = [&](double t0, double theta1_ref) {
    const double pi0 = table_at(t.grid, t.ar[0], t0);
    const double a = dp_accept(t, 0, t0, pi0);
    const std::vector<double> branches = dp_branches(t, a);
    if (branches.empty()) return std::pair<double, double>(kNan, kNan);
    double theta1 = branches.front();
    for (double b : branches) {
      if (std::abs(b - theta1_ref) < std::abs(theta1 - theta1_ref)) theta1 = b;
    }
    const double pi1 = table_at(t.grid, t.ar[1], theta1);
    const DpArgmax best = dp_sweep(t, params, pi0, pi1);
    return std::pair<double, double>(best.theta0 - t0, theta1);
  };

  // per grid node: every self-consistent theta1 branch with its argmax gap
  struct NodeBranch {
    double theta1;
    double gap;
  };
  std::vector<std::vector<NodeBranch>> nodes(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double pi0 = t.ar[0][i];
    for (double theta1 : dp_branches(t, dp_accept(t, 0, t.grid[i], pi0))) {
      const double pi1 = table_at(t.grid, t.ar[1], theta1);
      const DpArgmax best = dp_sweep(t, params, pi0, pi1);
      nodes[i].push_back(NodeBranch{theta1, best.theta0 - t.grid[i]});
    }
  }
  for (std::size_t i = 1; i < n; ++i) {
    const auto& ba = nodes[i - 1];
    const auto& bb = nodes[i];
    const std::size_t k_max = std::min(ba.size(), bb.size());
    for (std::size_t k = 0; k < k_max; ++k) {
      const double ga = ba[k].gap;
      const double gb = bb[k].gap;
      const double th1a = ba[k].theta1;
      if (std::isnan(ga) || std::isnan(gb)) continue;
      const int sa = sign_of(ga);
      const int sb = sign_of(gb);
      if (sa == 0 || sa * sb >= 0) continue;
      double lo = t.grid[i - 1], hi = t.grid[i];
      double ref = th1a;
      while (hi - lo > kThetaTol) {
        const double mid = 0.5 * (lo + hi);
        const auto [gm, th1m] = gap_on_branch(mid, ref);
        if (std::isnan(gm)) break;
        ref = th1m;
        if (sign_of(gm) == sa) {
          lo = mid;
        } else {
          hi = mid;
        }
      }
      const double theta0 = 0.5 * (lo + hi);
      const auto [gfin, theta1] = gap_on_branch(theta0, ref);
      if (std::isnan(gfin)) continue;
      DpCandidate c{theta0, theta1, table_at(t.grid, t.ar[0], theta0),
                    table_at(t.grid, t.ar[1], theta1)};
      dp_emit(t, model, params, cfg, c, sa > 0 ? Stability::Stable : Stability::Unstable, out);
    }
  }

  // damped multi-start fixed point (supplementary pass; catches attracting
  // points that sit between scan nodes)
  std::vector<std::pair<double, double>> starts = {
      {0.05, 0.05}, {0.95, 0.95}, {0.95, 0.05}, {0.05, 0.95}, {0.5, 0.5}};
  for (const Equilibrium& lf : solve_lf(model, params, cfg)) {
    starts.emplace_back(lf.pi0, lf.pi1);
  }
  for (int i = 1; static_cast<int>(starts.size()) < cfg.multi_start; ++i) {
    starts.emplace_back(halton(i, 2), halton(i, 3));
  }
  for (const auto& [s0, s1] : starts) {
    double pi0 = s0, pi1 = s1;
    DpArgmax best;
    bool converged = false;
    double best_delta = std::numeric_limits<double>::infinity();
    int stalled = 0;
    for (int it = 0; it < cfg.max_iterations; ++it) {
      best = dp_sweep(t, params, pi0, pi1);
      const double n0 = table_at(t.grid, t.ar[0], best.theta0);
      const double n1 = table_at(t.grid, t.ar[1], best.theta1);
      const double next0 = (1.0 - cfg.damping) * pi0 + cfg.damping * n0;
      const double next1 = (1.0 - cfg.damping) * pi1 + cfg.damping * n1;
      const double delta = std::max(std::abs(next0 - pi0), std::abs(next1 - pi1));
      pi0 = next0;
      pi1 = next1;
      if (delta < 1e-10) {
        converged = true;
        break;
      }
      // abandon starts that stopped contracting (repelling fixed points)
      if (delta < 0.999 * best_delta) {
        best_delta = delta;
        stalled = 0;
      } else if (++stalled >= 40) {
        break;
      }
    }
    if (!converged) continue;
    dp_emit(t, model, params, cfg, DpCandidate{best.theta0, best.theta1, pi0, pi1},
            Stability::Stable, out);
  }

  if (out.empty()) {
    // no interior fixed point; report the strict-end corner
    Equilibrium eq;
    eq.policy = Policy::DP;
    eq.theta0 = eq.theta1 = t.grid.back();
    eq.pi0 = t.ar[0].back();
    eq.pi1 = t.ar[1].back();
    eq.residuals = {{"ar0", 0.0},
                    {"ar1", 0.0},
                    {"accept_eq", std::abs(t.self_acc[0].back() - t.self_acc[1].back())},
                    {"argmax", 0.0}};
    eq.stability = Stability::Boundary;
    eq.accept0 = acceptance_at(model, 0, eq.theta0);
    eq.accept1 = acceptance_at(model, 1, eq.theta1);
    out.push_back(eq);
  }
  sort_equilibria(out);
  return out;
}

// ---------------------------------------------------------------------------
// EOPP: equal TP only
// ---------------------------------------------------------------------------

namespace {

struct EoppTables {
  std::vector<double> tau;             // uniform on [0,1]
  double step = 0.0;
  std::array<std::vector<double>, 2> fp;  // efficient fp_s(tau) on each hull
  std::array<std::vector<double>, 2> pi;  // G(omega * (tau - fp_s(tau)))
};

EoppTables make_eopp_tables(const SignalModel& model, const GameParams& params,
                            const SolverConfig& cfg) {
  std::vector<double> thresholds =
      linspace(model.grid().theta_min, model.grid().theta_max, cfg.grid_size);
  std::reverse(thresholds.begin(), thresholds.end());

  EoppTables t;
  t.tau = linspace(0.0, 1.0, kFrontierPoints);
  t.step = t.tau[1] - t.tau[0];
  for (int s = 0; s < kNumGroups; ++s) {
    const RocCurve hull = concavify(roc(model, s, thresholds));
    auto& fp = t.fp[static_cast<std::size_t>(s)];
    auto& pi = t.pi[static_cast<std::size_t>(s)];
    fp.resize(t.tau.size());
    pi.resize(t.tau.size());
    std::size_t j = 0;
    for (std::size_t i = 0; i < t.tau.size(); ++i) {
      const double tau = t.tau[i];
      while (j + 1 < hull.points.size() && hull.points[j + 1].tp < tau) ++j;
      // smallest fp whose hull tp reaches tau
      const RocPoint& a = hull.points[j];
      const RocPoint& b = hull.points[std::min(j + 1, hull.points.size() - 1)];
      double val;
      if (tau <= a.tp) {
        val = a.fp;
      } else if (b.tp <= a.tp) {
        val = b.fp;
      } else {
        val = a.fp + (tau - a.tp) / (b.tp - a.tp) * (b.fp - a.fp);
      }
      fp[i] = val;
      pi[i] = applicant_response(params, params.omega * (tau - fp[i]));
    }
  }
  return t;
}

struct EoppArgmax {
  double tau = 0.0;
  double fw = 0.0;
};

EoppArgmax eopp_sweep(const EoppTables& t, const GameParams& params, double pi0, double pi1) {
  const auto objective = [&](double tau) {
    const double fp0 = table_at(t.tau, t.fp[0], tau);
    const double fp1 = table_at(t.tau, t.fp[1], tau);
    return params.lambda(0) * (pi0 * tau * params.v_q - (1.0 - pi0) * fp0 * params.v_u) +
           params.lambda(1) * (pi1 * tau * params.v_q - (1.0 - pi1) * fp1 * params.v_u);
  };
  std::size_t best = 0;
  double best_val = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < t.tau.size(); ++i) {
    const double v = objective(t.tau[i]);
    if (v > best_val) {
      best_val = v;
      best = i;
    }
  }
  EoppArgmax out;
  out.tau = t.tau[best];
  out.fw = best_val;
  if (best > 0 && best + 1 < t.tau.size()) {
    const double fm = objective(t.tau[best - 1]);
    const double fp = objective(t.tau[best + 1]);
    const double denom = fm - 2.0 * best_val + fp;
    if (denom < -1e-300) {
      const double cand = out.tau + 0.5 * (fm - fp) / denom * t.step;
      const double v = objective(cand);
      if (v >= best_val) {
        out.tau = cand;
        out.fw = v;
      }
    }
  }
  return out;
}

void eopp_emit(const EoppTables& t, const GameParams& params, const SolverConfig& cfg,
               double tau, Stability stability, std::vector<Equilibrium>& out) {
  const double fp0 = table_at(t.tau, t.fp[0], tau);
  const double fp1 = table_at(t.tau, t.fp[1], tau);
  const double pi0 = table_at(t.tau, t.pi[0], tau);
  const double pi1 = table_at(t.tau, t.pi[1], tau);
  const EoppArgmax best = eopp_sweep(t, params, pi0, pi1);
  const double fw_here =
      params.lambda(0) * (pi0 * tau * params.v_q - (1.0 - pi0) * fp0 * params.v_u) +
      params.lambda(1) * (pi1 * tau * params.v_q - (1.0 - pi1) * fp1 * params.v_u);
  const double argmax_gap = std::max(0.0, best.fw - fw_here) / std::max(1.0, std::abs(best.fw));
  if (argmax_gap > cfg.tolerance) return;
  for (const Equilibrium& e : out) {
    if (std::abs(e.accept0.tp - tau) <= cfg.dedup_steps * t.step) return;
  }
  Equilibrium eq;
  eq.policy = Policy::EOPP;
  eq.theta0 = 1.0 - fp0;
  eq.theta1 = 1.0 - fp1;
  eq.pi0 = pi0;
  eq.pi1 = pi1;
  eq.residuals = {{"ar0", 0.0}, {"ar1", 0.0}, {"tp_eq", 0.0}, {"argmax", argmax_gap}};
  eq.stability = tau < 0.5 * t.step ? Stability::Boundary : stability;
  eq.accept0 = GroupAcceptance{tau, fp0};
  eq.accept1 = GroupAcceptance{tau, fp1};
  out.push_back(eq);
}

}  // namespace

std::vector<Equilibrium> solve_eopp(const SignalModel& model, const GameParams& params,
                                    const SolverConfig& cfg) {
  cfg.validate();
  params.validate();
  const EoppTables t = make_eopp_tables(model, params, cfg);

  std::vector<Equilibrium> out;
  const auto gap = [&](double tau) {
    const double pi0 = table_at(t.tau, t.pi[0], tau);
    const double pi1 = table_at(t.tau, t.pi[1], tau);
    return eopp_sweep(t, params, pi0, pi1).tau - tau;
  };
  const std::vector<ScanRoot> roots =
      scan_roots(gap, t.tau, kThetaTol, cfg.dedup_steps * t.step);
  for (const ScanRoot& r : roots) eopp_emit(t, params, cfg, r.x, r.stability, out);

  // damped multi-start pass over (pi0, pi1)
  std::vector<std::pair<double, double>> starts = {
      {0.05, 0.05}, {0.95, 0.95}, {0.95, 0.05}, {0.05, 0.95}, {0.5, 0.5}};
  for (int i = 1; static_cast<int>(starts.size()) < cfg.multi_start; ++i) {
    starts.emplace_back(halton(i, 2), halton(i, 3));
  }
  for (const auto& [s0, s1] : starts) {
    double pi0 = s0, pi1 = s1;
    double tau = 0.0;
    bool converged = false;
    double best_delta = std::numeric_limits<double>::infinity();
    int stalled = 0;
    for (int it = 0; it < cfg.max_iterations; ++it) {
      tau = eopp_sweep(t, params, pi0, pi1).tau;
      const double n0 = table_at(t.tau, t.pi[0], tau);
      const double n1 = table_at(t.tau, t.pi[1], tau);
      const double next0 = (1.0 - cfg.damping) * pi0 + cfg.damping * n0;
      const double next1 = (1.0 - cfg.damping) * pi1 + cfg.damping * n1;
      const double delta = std::max(std::abs(next0 - pi0), std::abs(next1 - pi1));
      pi0 = next0;
      pi1 = next1;
      if (delta < 1e-10) {
        converged = true;
        break;
      }
      if (delta < 0.999 * best_delta) {
        best_delta = delta;
        stalled = 0;
      } else if (++stalled >= 40) {
        break;
      }
    }
    if (converged) eopp_emit(t, params, cfg, tau, Stability::Stable, out);
  }

  if (out.empty()) {
    Equilibrium eq;
    eq.policy = Policy::EOPP;
    eq.theta0 = eq.theta1 = 1.0;
    eq.pi0 = t.pi[0].front();
    eq.pi1 = t.pi[1].front();
    eq.residuals = {{"ar0", 0.0}, {"ar1", 0.0}, {"tp_eq", 0.0}, {"argmax", 0.0}};
    eq.stability = Stability::Boundary;
    eq.accept0 = GroupAcceptance{0.0, t.fp[0].front()};
    eq.accept1 = GroupAcceptance{0.0, t.fp[1].front()};
    out.push_back(eq);
  }
  sort_equilibria(out);
  return out;
}

// ---------------------------------------------------------------------------
// verification
// ---------------------------------------------------------------------------

ResidualReport verify(const SignalModel& model, const GameParams& params,
                      const Equilibrium& candidate, const SolverConfig& cfg) {
  cfg.validate();
  ResidualReport report;
  report.tolerance = cfg.tolerance;
  auto& res = report.residuals;
  const bool boundary = candidate.stability == Stability::Boundary;

  switch (candidate.policy) {
    case Policy::LF: {
      res["ar0"] = std::abs(candidate.pi0 - ar_at(model, params, 0, candidate.theta0));
      res["ar1"] = std::abs(candidate.pi1 - ar_at(model, params, 1, candidate.theta1));
      const double fr0 = safe_fr(model, params, 0, candidate.theta0);
      const double fr1 = safe_fr(model, params, 1, candidate.theta1);
      res["fr0"] = std::isnan(fr0) ? 0.0
                   : boundary      ? std::max(0.0, candidate.pi0 - fr0)
                                   : std::abs(candidate.pi0 - fr0);
      res["fr1"] = std::isnan(fr1) ? 0.0
                   : boundary      ? std::max(0.0, candidate.pi1 - fr1)
                                   : std::abs(candidate.pi1 - fr1);
      break;
    }
    case Policy::CB: {
      res["ar0"] = std::abs(candidate.pi0 - ar_at(model, params, 0, candidate.theta0));
      res["ar1"] = std::abs(candidate.pi1 - ar_at(model, params, 1, candidate.theta1));
      res["theta_eq"] = std::abs(candidate.theta0 - candidate.theta1);
      const double pooled =
          params.lambda(0) * candidate.pi0 + params.lambda(1) * candidate.pi1;
      const double fr = pooled_fr(model, params, candidate.theta0);
      res["fr_pool"] = std::isnan(fr) ? 0.0
                       : boundary     ? std::max(0.0, pooled - fr)
                                      : std::abs(pooled - fr);
      break;
    }
    case Policy::DP: {
      const DpTables t = make_dp_tables(model, params, cfg);
      res["ar0"] = std::abs(candidate.pi0 - table_at(t.grid, t.ar[0], candidate.theta0));
      res["ar1"] = std::abs(candidate.pi1 - table_at(t.grid, t.ar[1], candidate.theta1));
      res["accept_eq"] = std::abs(dp_accept(t, 0, candidate.theta0, candidate.pi0) -
                                  dp_accept(t, 1, candidate.theta1, candidate.pi1));
      const DpArgmax best = dp_sweep(t, params, candidate.pi0, candidate.pi1);
      const double fw_here =
          params.lambda(0) * dp_fw(t, params, 0, candidate.theta0, candidate.pi0) +
          params.lambda(1) * dp_fw(t, params, 1, candidate.theta1, candidate.pi1);
      res["argmax"] = std::max(0.0, best.fw - fw_here) / std::max(1.0, std::abs(best.fw));
      break;
    }
    case Policy::EO: {
      const RocCurve frontier = frontier_for(model, cfg);
      const FrontierScan fs = make_frontier_scan(frontier, params);
      const double p = candidate.theta0;
      const double fp = 1.0 - p;
      const double tp = frontier_tp_at_fp(fs, fp);
      const double pi = applicant_response(params, params.omega * (tp - fp));
      res["pi_eq"] = std::abs(candidate.pi0 - candidate.pi1);
      res["ar"] = std::abs(candidate.pi0 - pi);
      // firm side: belief must lie in the segment (or kink) interval at p
      double fr_lo = 1.0, fr_hi = 0.0;
      const double eps = 2.0 * kThetaTol;
      for (std::size_t m = 0; m < fs.seg_fr.size(); ++m) {
        if (fp >= fs.fp[m] - eps && fp <= fs.fp[m + 1] + eps) {
          fr_lo = std::min(fr_lo, fs.seg_fr[m]);
          fr_hi = std::max(fr_hi, fs.seg_fr[m]);
        }
      }
      if (fr_hi < fr_lo) {
        res["fr"] = 0.0;
      } else if (boundary) {
        res["fr"] = std::max(0.0, candidate.pi0 - fr_hi);
      } else {
        res["fr"] =
            std::max({0.0, candidate.pi0 - fr_hi, fr_lo - candidate.pi0});
      }
      break;
    }
    case Policy::EOPP: {
      const EoppTables t = make_eopp_tables(model, params, cfg);
      const double fp0 = 1.0 - candidate.theta0;
      const double fp1 = 1.0 - candidate.theta1;
      const double tau = candidate.accept0.tp;
      res["tp_eq"] = std::abs(candidate.accept0.tp - candidate.accept1.tp);
      res["ar0"] = std::abs(candidate.pi0 -
                            applicant_response(params, params.omega * (tau - fp0)));
      res["ar1"] = std::abs(candidate.pi1 -
                            applicant_response(params, params.omega * (tau - fp1)));
      const EoppArgmax best = eopp_sweep(t, params, candidate.pi0, candidate.pi1);
      const double fw_here = params.lambda(0) * (candidate.pi0 * tau * params.v_q -
                                                 (1.0 - candidate.pi0) * fp0 * params.v_u) +
                             params.lambda(1) * (candidate.pi1 * tau * params.v_q -
                                                 (1.0 - candidate.pi1) * fp1 * params.v_u);
      const double gap = std::max(0.0, best.fw - fw_here) / std::max(1.0, std::abs(best.fw));
      res["argmax"] = boundary ? 0.0 : gap;
      break;
    }
  }

  report.pass = true;
  for (const auto& [key, value] : res) {
    if (!(value <= report.tolerance)) report.pass = false;
  }
  return report;
}

std::string policy_name(Policy policy) {
  switch (policy) {
    case Policy::LF: return "lf";
    case Policy::CB: return "cb";
    case Policy::DP: return "dp";
    case Policy::EO: return "eo";
    case Policy::EOPP: return "eopp";
  }
  return "?";
}

std::optional<Policy> policy_from_name(std::string_view name) {
  if (name == "lf") return Policy::LF;
  if (name == "cb") return Policy::CB;
  if (name == "dp") return Policy::DP;
  if (name == "eo") return Policy::EO;
  if (name == "eopp") return Policy::EOPP;
  return std::nullopt;
}

std::string stability_name(Stability stability) {
  switch (stability) {
    case Stability::Stable: return "stable";
    case Stability::Unstable: return "unstable";
    case Stability::Boundary: return "boundary";
  }
  return "?";
}

nlohmann::json equilibria_to_json(const std::vector<Equilibrium>& list) {
  nlohmann::json out = nlohmann::json::array();
  for (const Equilibrium& eq : list) {
    nlohmann::json residuals = nlohmann::json::object();
    for (const auto& [key, value] : eq.residuals) residuals[key] = value;
    out.push_back({{"policy", policy_name(eq.policy)},
                   {"theta0", eq.theta0},
                   {"theta1", eq.theta1},
                   {"pi0", eq.pi0},
                   {"pi1", eq.pi1},
                   {"residuals", residuals},
                   {"stability", stability_name(eq.stability)}});
  }
  return out;
}

}  // namespace fairsim
