#pragma once

namespace hmcmix {

/// Standard normal CDF, via the complementary error function.
double normal_cdf(double x);

/// Standard normal quantile using Wichura's AS 241 (PPND16) rational
/// approximation; relative accuracy about 1e-16 on (0, 1).
/// Throws a domain error outside the open unit interval.
double normal_quantile(double p);

}  // namespace hmcmix
