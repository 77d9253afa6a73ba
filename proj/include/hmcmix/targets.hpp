#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "hmcmix/error.hpp"

namespace hmcmix {

/// A target density proportional to exp(-f) on R^d, given through evaluators
/// for f and its gradient together with declared regularity constants.
///
/// Constants are trusted as declared; only gradient consistency can be
/// checked (see check_gradient). Instances are immutable and may be shared
/// read-only across concurrently running chains.
class TargetModel {
 public:
  using Potential = std::function<double(const Vector&)>;
  using Gradient = std::function<void(const Vector&, Vector&)>;

  struct Constants {
    double smoothness = 0.0;         // L
    double strong_convexity = 0.0;   // m
    double hessian_lipschitz = 0.0;  // L_H
  };

  TargetModel(Eigen::Index dim, Potential potential, Gradient gradient,
              Constants constants, std::optional<Vector> mode = std::nullopt);

  Eigen::Index dim() const noexcept { return dim_; }
  double smoothness() const noexcept { return constants_.smoothness; }
  double strong_convexity() const noexcept {
    return constants_.strong_convexity;
  }
  double hessian_lipschitz() const noexcept {
    return constants_.hessian_lipschitz;
  }
  /// L / m; infinite when m is zero.
  double condition_number() const noexcept;
  const std::optional<Vector>& mode() const noexcept { return mode_; }

  /// f(x). Throws on dimension mismatch.
  double potential(const Vector& x) const;
  /// grad f(x) written into `out` (resized as needed).
  void gradient(const Vector& x, Vector& out) const;
  Vector gradient(const Vector& x) const;

 private:
  Eigen::Index dim_;
  Potential potential_;
  Gradient gradient_;
  Constants constants_;
  std::optional<Vector> mode_;
};

/// Centered Gaussian with covariance U diag(s^2) U^T, where s are the square
/// roots of the covariance eigenvalues and U is an orthonormal basis.
/// f(x) = x^T Sigma^{-1} x / 2, so f vanishes at the mode.
class GaussianTarget {
 public:
  const Vector& sqrt_eigenvalues() const noexcept { return sqrt_eigs_; }
  /// Columns are eigenvectors; identity unless a basis was supplied.
  const Matrix& eigenbasis() const noexcept { return basis_; }
  bool diagonal() const noexcept { return diagonal_; }
  const Matrix& precision() const noexcept { return precision_; }
  Matrix covariance() const;

  Eigen::Index dim() const noexcept { return sqrt_eigs_.size(); }
  double smoothness() const noexcept { return model_.smoothness(); }
  double strong_convexity() const noexcept {
    return model_.strong_convexity();
  }
  double condition_number() const noexcept {
    return model_.condition_number();
  }
  /// Unit eigenvector of the largest covariance eigenvalue.
  Vector max_variance_direction() const;

  const TargetModel& model() const noexcept { return model_; }
  operator const TargetModel&() const noexcept { return model_; }

 private:
  friend GaussianTarget gaussian_from_spectrum(std::span<const double>,
                                               const Matrix*);
  GaussianTarget(Vector sqrt_eigs, Matrix basis, bool diagonal);

  Vector sqrt_eigs_;
  Matrix basis_;
  bool diagonal_;
  Matrix precision_;
  TargetModel model_;
};

/// Builds a Gaussian target from the square roots of its covariance
/// eigenvalues. m = 1/max(s)^2, L = 1/min(s)^2, L_H = 0, mode = 0.
/// `basis`, if given, must be square with orthonormal columns (to 1e-10).
GaussianTarget gaussian_from_spectrum(std::span<const double> sqrt_eigs,
                                      const Matrix* basis = nullptr);

/// n values linearly spaced on [lo, hi] (n >= 1; n == 1 yields lo).
std::vector<double> linear_spacing(double lo, double hi, std::size_t n);

/// Haar-distributed orthonormal d x d matrix from a seeded stream.
Matrix random_orthonormal(Eigen::Index d, std::uint64_t seed);

/// Same as target.potential / target.gradient; kept as free functions to
/// mirror the evaluator facade used by the chains.
double eval_potential(const TargetModel& target, const Vector& x);
Vector eval_grad(const TargetModel& target, const Vector& x);

/// Max over points and coordinates of
/// |central difference - gradient| / (1 + |gradient|) at step h.
double check_gradient(const TargetModel& target,
                      std::span<const Vector> points, double h);

/// Zero-gradient target on R^d (f identically 0). Handy for free-flight
/// checks of the integrator and detailed-balance tests.
TargetModel flat_target(Eigen::Index d);

}  // namespace hmcmix
