#include "hmcmix/diagnostics.hpp"

#include <algorithm>
#include <cmath>

#include "hmcmix/normal.hpp"

namespace hmcmix {

void QuantileSpec::validate() const {
  require(level > 0 && level <= 1, ErrorCode::kInvalidArgument,
          "quantile spec: level must lie in (0, 1]");
  require(delta > 0, ErrorCode::kInvalidArgument,
          "quantile spec: delta must be positive");
  require(std::isfinite(truth), ErrorCode::kInvalidArgument,
          "quantile spec: truth must be finite");
  if (direction.size() > 0) {
    require(std::fabs(direction.norm() - 1.0) <= 1e-10,
            ErrorCode::kInvalidArgument,
            "quantile spec: direction must have unit norm");
  }
  if (!absolute_error) {
    require(truth != 0.0, ErrorCode::kDomain,
            "quantile spec: relative error is undefined for truth = 0; "
            "request absolute-error mode explicitly");
  }
}

double empirical_quantile(std::vector<double> samples, double level) {
  require(!samples.empty(), ErrorCode::kInvalidArgument,
          "empirical_quantile: empty sample");
  require(level > 0 && level <= 1, ErrorCode::kInvalidArgument,
          "empirical_quantile: level must lie in (0, 1]");
  const double h = level * static_cast<double>(samples.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const double frac = h - static_cast<double>(lo);
  std::nth_element(samples.begin(), samples.begin() + static_cast<long>(lo),
                   samples.end());
  const double x_lo = samples[lo];
  if (frac == 0.0 || lo + 1 >= samples.size()) return x_lo;
  const double x_hi =
      *std::min_element(samples.begin() + static_cast<long>(lo) + 1, samples.end());
  return x_lo + frac * (x_hi - x_lo);
}

double quantile_error(std::span<const double> row, const QuantileSpec& spec) {
  const double q =
      empirical_quantile(std::vector<double>(row.begin(), row.end()), spec.level);
  const double err = std::fabs(q - spec.truth);
  return spec.absolute_error ? err : err / std::fabs(spec.truth);
}

std::optional<std::size_t> quantile_mixing_time(const Matrix& samples,
                                                const QuantileSpec& spec,
                                                std::size_t max_iters) {
  spec.validate();
  require(samples.cols() >= 2, ErrorCode::kInvalidArgument,
          "quantile_mixing_time: need at least 2 replicas");
  const auto rows = std::min<std::size_t>(static_cast<std::size_t>(samples.rows()),
                                          max_iters + 1);
  std::vector<double> row(static_cast<std::size_t>(samples.cols()));
  for (std::size_t t = 0; t < rows; ++t) {
    for (Eigen::Index j = 0; j < samples.cols(); ++j) {
      row[static_cast<std::size_t>(j)] = samples(static_cast<Eigen::Index>(t), j);
    }
    if (quantile_error(row, spec) < spec.delta) return t;
  }
  return std::nullopt;
}

double gaussian_projected_truth(const GaussianTarget& target,
                                const Vector& direction, double level) {
  require_dim(direction.size(), target.dim(), "gaussian_projected_truth");
  const double var = direction.dot(target.covariance() * direction);
  if (level == 0.5) return 0.0;
  return normal_quantile(level) * std::sqrt(var);
}

SlopeFit fit_loglog_slope(std::span<const std::pair<double, double>> points) {
  require(points.size() >= 3, ErrorCode::kInvalidArgument,
          "fit_loglog_slope: at least 3 points are required");
  const auto n = static_cast<double>(points.size());
  double mx = 0, my = 0;
  for (const auto& [x, y] : points) {
    require(x > 0 && y > 0, ErrorCode::kInvalidArgument,
            "fit_loglog_slope: coordinates must be positive");
    mx += std::log(x);
    my += std::log(y);
  }
  mx /= n;
  my /= n;
  double sxx = 0, sxy = 0;
  for (const auto& [x, y] : points) {
    const double dx = std::log(x) - mx;
    sxx += dx * dx;
    sxy += dx * (std::log(y) - my);
  }
  require(sxx > 0, ErrorCode::kInvalidArgument,
          "fit_loglog_slope: x values must be distinct");
  SlopeFit fit;
  fit.n_points = points.size();
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double sse = 0;
  for (const auto& [x, y] : points) {
    const double res = std::log(y) - (fit.intercept + fit.slope * std::log(x));
    sse += res * res;
  }
  fit.stderr_slope = std::sqrt(sse / (n - 2.0) / sxx);
  return fit;
}

std::optional<double> acceptance_rate(const ChainTrace& trace) {
  require(!trace.states.empty(), ErrorCode::kInvalidArgument,
          "acceptance_rate: empty trace");
  std::size_t moves = 0, accepted = 0;
  for (std::size_t i = 0; i < trace.accepted.size(); ++i) {
    if (trace.lazy_hold[i]) continue;
    ++moves;
    accepted += trace.accepted[i] ? 1 : 0;
  }
  if (moves == 0) return std::nullopt;
  return static_cast<double>(accepted) / static_cast<double>(moves);
}

}  // namespace hmcmix
