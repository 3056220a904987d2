#include "fairsim/distribution.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "fairsim/errors.hpp"

namespace fairsim {

namespace {

constexpr double kInvSqrt2Pi = 0.3989422804014326779;  // 1/sqrt(2*pi)
constexpr double kKernelCut = 8.0;  // kernel support cutoff in bandwidths

double trapezoid_mass(const std::vector<double>& x, const std::vector<double>& y) {
  double total = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    total += 0.5 * (y[i] + y[i - 1]) * (x[i] - x[i - 1]);
  }
  return total;
}

}  // namespace

double norm_pdf(double x) { return kInvSqrt2Pi * std::exp(-0.5 * x * x); }

double norm_cdf(double x) { return 0.5 * std::erfc(-x * std::numbers::sqrt2_v<double> / 2.0); }

std::vector<double> linspace(double lo, double hi, int n) {
  std::vector<double> out(static_cast<std::size_t>(n));
  const double step = (hi - lo) / (n - 1);
  for (int i = 0; i < n; ++i) out[static_cast<std::size_t>(i)] = lo + step * i;
  out.back() = hi;
  return out;
}

std::vector<double> GridSpec::points() const { return linspace(theta_min, theta_max, n_grid); }

void GridSpec::validate() const {
  if (!(theta_max > theta_min) || n_grid < 2) {
    throw ConfigError("invalid grid spec: need theta_max > theta_min and n_grid >= 2");
  }
}

Distribution1D Distribution1D::gaussian(double mean, double sd) {
  if (!(sd > 0.0)) throw ConfigError("gaussian distribution needs sd > 0");
  return Distribution1D(Gaussian{mean, sd});
}

Distribution1D Distribution1D::empirical(std::vector<double> samples, double bandwidth,
                                         double lo, double hi) {
  if (samples.size() < 2) throw EstimationError("empirical distribution needs >= 2 samples");
  if (!(bandwidth > 0.0)) throw EstimationError("empirical distribution needs bandwidth > 0");
  if (!(hi > lo)) throw EstimationError("empirical support must satisfy hi > lo");
  std::sort(samples.begin(), samples.end());

  Empirical e{std::move(samples), bandwidth, lo, hi, 0.0, 1.0};
  const auto raw_cdf = [&e](double x) {
    // untruncated mixture CDF with a windowed sum; samples below the window
    // contribute 1 each, samples above contribute 0
    const double wlo = x - kKernelCut * e.bandwidth;
    const double whi = x + kKernelCut * e.bandwidth;
    const auto lo_it = std::lower_bound(e.sorted.begin(), e.sorted.end(), wlo);
    const auto hi_it = std::upper_bound(e.sorted.begin(), e.sorted.end(), whi);
    double acc = static_cast<double>(lo_it - e.sorted.begin());
    for (auto it = lo_it; it != hi_it; ++it) acc += norm_cdf((x - *it) / e.bandwidth);
    return acc / static_cast<double>(e.sorted.size());
  };
  e.mass_lo = raw_cdf(lo);
  const double mass = raw_cdf(hi) - e.mass_lo;
  if (!(mass > 0.0)) throw EstimationError("empirical support carries no sample mass");
  e.renorm = 1.0 / mass;
  return Distribution1D(std::move(e));
}

Distribution1D Distribution1D::tabulated(std::vector<double> grid, std::vector<double> pdf) {
  if (grid.size() < 2 || grid.size() != pdf.size()) {
    throw ConfigError("tabulated distribution needs matching grid/pdf with >= 2 points");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i > 0 && !(grid[i] > grid[i - 1])) {
      throw ConfigError("tabulated grid must be strictly increasing");
    }
    if (!(pdf[i] >= 0.0)) throw ConfigError("tabulated pdf must be nonnegative");
  }
  const double mass = trapezoid_mass(grid, pdf);
  if (!(mass > 0.0)) throw ConfigError("tabulated pdf has zero mass");
  std::vector<double> cdf(grid.size(), 0.0);
  for (std::size_t i = 1; i < grid.size(); ++i) {
    pdf[i - 1] /= mass;
    cdf[i] = cdf[i - 1] + 0.5 * (pdf[i] / mass + pdf[i - 1]) * (grid[i] - grid[i - 1]);
  }
  pdf.back() /= mass;
  cdf.back() = 1.0;
  return Distribution1D(Tabulated{std::move(grid), std::move(pdf), std::move(cdf)});
}

Distribution1D Distribution1D::tabulated_with_cdf(std::vector<double> grid,
                                                  std::vector<double> pdf,
                                                  std::vector<double> cdf) {
  if (grid.size() < 2 || grid.size() != pdf.size() || grid.size() != cdf.size()) {
    throw ConfigError("tabulated distribution needs matching grid/pdf/cdf with >= 2 points");
  }
  for (std::size_t i = 0; i < grid.size(); ++i) {
    if (i > 0 && (!(grid[i] > grid[i - 1]) || cdf[i] < cdf[i - 1])) {
      throw ConfigError("tabulated grid must increase and cdf must be nondecreasing");
    }
    if (!(pdf[i] >= 0.0) || cdf[i] < 0.0 || cdf[i] > 1.0 + 1e-12) {
      throw ConfigError("tabulated pdf/cdf out of range");
    }
  }
  return Distribution1D(Tabulated{std::move(grid), std::move(pdf), std::move(cdf)});
}

Distribution1D::Kind Distribution1D::kind() const {
  if (std::holds_alternative<Gaussian>(impl_)) return Kind::Gaussian;
  if (std::holds_alternative<Empirical>(impl_)) return Kind::Empirical;
  return Kind::Tabulated;
}

namespace {

double interp(const std::vector<double>& xs, const std::vector<double>& ys, double x) {
  const auto it = std::upper_bound(xs.begin(), xs.end(), x);
  if (it == xs.begin()) return ys.front();
  if (it == xs.end()) return ys.back();
  const std::size_t j = static_cast<std::size_t>(it - xs.begin());
  const double t = (x - xs[j - 1]) / (xs[j] - xs[j - 1]);
  return ys[j - 1] + t * (ys[j] - ys[j - 1]);
}

}  // namespace

double Distribution1D::pdf(double x) const {
  struct Visitor {
    double x;
    double operator()(const Gaussian& g) const {
      return norm_pdf((x - g.mean) / g.sd) / g.sd;
    }
    double operator()(const Empirical& e) const {
      if (x < e.lo || x > e.hi) return 0.0;
      const double wlo = x - kKernelCut * e.bandwidth;
      const double whi = x + kKernelCut * e.bandwidth;
      const auto lo_it = std::lower_bound(e.sorted.begin(), e.sorted.end(), wlo);
      const auto hi_it = std::upper_bound(e.sorted.begin(), e.sorted.end(), whi);
      double acc = 0.0;
      for (auto it = lo_it; it != hi_it; ++it) acc += norm_pdf((x - *it) / e.bandwidth);
      return e.renorm * acc / (static_cast<double>(e.sorted.size()) * e.bandwidth);
    }
    double operator()(const Tabulated& t) const {
      if (x < t.grid.front() || x > t.grid.back()) return 0.0;
      return interp(t.grid, t.pdf, x);
    }
  };
  return std::visit(Visitor{x}, impl_);
}

double Distribution1D::cdf(double x) const {
  struct Visitor {
    double x;
    double operator()(const Gaussian& g) const { return norm_cdf((x - g.mean) / g.sd); }
    double operator()(const Empirical& e) const {
      if (x <= e.lo) return 0.0;
      if (x >= e.hi) return 1.0;
      const double wlo = x - kKernelCut * e.bandwidth;
      const double whi = x + kKernelCut * e.bandwidth;
      const auto lo_it = std::lower_bound(e.sorted.begin(), e.sorted.end(), wlo);
      const auto hi_it = std::upper_bound(e.sorted.begin(), e.sorted.end(), whi);
      double acc = static_cast<double>(lo_it - e.sorted.begin());
      for (auto it = lo_it; it != hi_it; ++it) acc += norm_cdf((x - *it) / e.bandwidth);
      const double raw = acc / static_cast<double>(e.sorted.size());
      return std::clamp(e.renorm * (raw - e.mass_lo), 0.0, 1.0);
    }
    double operator()(const Tabulated& t) const {
      if (x <= t.grid.front()) return t.cdf.front();
      if (x >= t.grid.back()) return t.cdf.back();
      return interp(t.grid, t.cdf, x);
    }
  };
  return std::visit(Visitor{x}, impl_);
}

}  // namespace fairsim
