#pragma once

#include <variant>
#include <vector>

namespace fairsim {

/// Standard normal density.
double norm_pdf(double x);
/// Standard normal CDF via erfc (accurate in both tails).
double norm_cdf(double x);

/// n evenly spaced values from lo to hi inclusive (n >= 2).
std::vector<double> linspace(double lo, double hi, int n);

/// Uniform evaluation grid shared by every cell of a SignalModel.
struct GridSpec {
  double theta_min = -6.0;
  double theta_max = 7.0;
  int n_grid = 2001;

  double step() const { return (theta_max - theta_min) / (n_grid - 1); }
  std::vector<double> points() const;
  void validate() const;
};

/// One-dimensional score distribution: parametric gaussian, kernel-smoothed
/// empirical (truncated and renormalized on a fixed support), or tabulated
/// on an explicit grid.
class Distribution1D {
 public:
  enum class Kind { Gaussian, Empirical, Tabulated };

  static Distribution1D gaussian(double mean, double sd);

  /// Gaussian-kernel estimate truncated to [lo, hi] and renormalized so the
  /// mass on the support is exactly one. Needs >= 2 samples.
  static Distribution1D empirical(std::vector<double> samples, double bandwidth,
                                  double lo, double hi);

  /// Piecewise-linear density on a strictly increasing grid; the CDF is the
  /// trapezoid cumulative of the (renormalized) density.
  static Distribution1D tabulated(std::vector<double> grid, std::vector<double> pdf);

  /// Tabulated density with an explicit CDF (used for pseudo-signals derived
  /// from ROC frontiers, where the CDF is the primary object).
  static Distribution1D tabulated_with_cdf(std::vector<double> grid,
                                           std::vector<double> pdf,
                                           std::vector<double> cdf);

  Kind kind() const;
  double pdf(double x) const;
  double cdf(double x) const;

 private:
  struct Gaussian {
    double mean;
    double sd;
  };
  struct Empirical {
    std::vector<double> sorted;  // ascending sample values
    double bandwidth;
    double lo, hi;    // truncation support
    double mass_lo;   // untruncated KDE cdf at lo
    double renorm;    // 1 / (cdf(hi) - cdf(lo)) of the untruncated KDE
  };
  struct Tabulated {
    std::vector<double> grid;  // strictly increasing
    std::vector<double> pdf;
    std::vector<double> cdf;   // same length, nondecreasing, cdf.back() == 1
  };

  explicit Distribution1D(Gaussian g) : impl_(g) {}
  explicit Distribution1D(Empirical e) : impl_(std::move(e)) {}
  explicit Distribution1D(Tabulated t) : impl_(std::move(t)) {}

  std::variant<Gaussian, Empirical, Tabulated> impl_;
};

}  // namespace fairsim
