#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "hmcmix/samplers.hpp"
#include "hmcmix/targets.hpp"

namespace hmcmix {

struct QuantileSpec {
  double level = 0.75;
  Vector direction;  // unit vector; empty means "use the target's default"
  double delta = 0.04;
  double truth = 0.0;
  bool absolute_error = false;  // required when truth == 0

  void validate() const;
};

/// Type-7 estimator: linear interpolation at 1-based position
/// 1 + level (n - 1) of the sorted sample. Takes its argument by value
/// because it sorts.
double empirical_quantile(std::vector<double> samples, double level);

/// Error of the empirical quantile of one row relative to spec.truth.
double quantile_error(std::span<const double> row, const QuantileSpec& spec);

/// Smallest iteration t (0-based row index) whose cross-replica quantile
/// error is below spec.delta. Rows are iterations and columns replicas;
/// only the first max_iters + 1 rows are scanned. nullopt = not mixed.
std::optional<std::size_t> quantile_mixing_time(const Matrix& samples,
                                                const QuantileSpec& spec,
                                                std::size_t max_iters);

/// z_level * sd of the projection of the target onto `direction`.
double gaussian_projected_truth(const GaussianTarget& target,
                                const Vector& direction, double level);

struct SlopeFit {
  double slope = 0.0;
  double stderr_slope = 0.0;
  double intercept = 0.0;
  std::size_t n_points = 0;
};

/// OLS fit of log y on log x. Needs >= 3 points with distinct x and
/// positive coordinates.
SlopeFit fit_loglog_slope(std::span<const std::pair<double, double>> points);

/// accepted / non-lazy iterations; nullopt when there were none.
std::optional<double> acceptance_rate(const ChainTrace& trace);

}  // namespace hmcmix
