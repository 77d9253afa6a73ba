#include "hmcmix/targets.hpp"

#include <cmath>
#include <limits>
#include <random>
#include <string>

#include "hmcmix/rng.hpp"

namespace hmcmix {

TargetModel::TargetModel(Eigen::Index dim, Potential potential,
                         Gradient gradient, Constants constants,
                         std::optional<Vector> mode)
    : dim_(dim),
      potential_(std::move(potential)),
      gradient_(std::move(gradient)),
      constants_(constants),
      mode_(std::move(mode)) {
  require(dim_ > 0, ErrorCode::kInvalidArgument,
          "TargetModel: dimension must be positive");
  require(potential_ && gradient_, ErrorCode::kInvalidArgument,
          "TargetModel: potential and gradient evaluators are required");
  require(constants_.smoothness >= 0 && constants_.strong_convexity >= 0 &&
              constants_.hessian_lipschitz >= 0,
          ErrorCode::kInvalidArgument,
          "TargetModel: regularity constants must be nonnegative");
  if (constants_.smoothness > 0 && constants_.strong_convexity > 0) {
    require(constants_.strong_convexity <= constants_.smoothness,
            ErrorCode::kInvalidArgument,
            "TargetModel: strong convexity m must not exceed smoothness L");
  }
  if (mode_) require_dim(mode_->size(), dim_, "TargetModel mode");
}

double TargetModel::condition_number() const noexcept {
  if (constants_.strong_convexity <= 0) {
    return std::numeric_limits<double>::infinity();
  }
  return constants_.smoothness / constants_.strong_convexity;
}

double TargetModel::potential(const Vector& x) const {
  require_dim(x.size(), dim_, "potential");
  return potential_(x);
}

void TargetModel::gradient(const Vector& x, Vector& out) const {
  require_dim(x.size(), dim_, "gradient");
  out.resize(dim_);
  gradient_(x, out);
}

Vector TargetModel::gradient(const Vector& x) const {
  Vector g(dim_);
  gradient(x, g);
  return g;
}

double eval_potential(const TargetModel& target, const Vector& x) {
  return target.potential(x);
}

Vector eval_grad(const TargetModel& target, const Vector& x) {
  return target.gradient(x);
}

namespace {

struct GaussianData {
  Vector precision_diag;  // 1/s^2, in the eigenbasis
  Matrix precision;       // full Sigma^{-1}; only used off-diagonal
  bool diagonal;
};

TargetModel make_gaussian_model(const Vector& sqrt_eigs, bool diagonal,
                                const Matrix& precision) {
  auto data = std::make_shared<GaussianData>();
  data->precision_diag = sqrt_eigs.array().square().inverse().matrix();
  data->precision = precision;
  data->diagonal = diagonal;

  TargetModel::Potential potential = [data](const Vector& x) {
    if (data->diagonal) {
      return 0.5 * (x.array().square() * data->precision_diag.array()).sum();
    }
    return 0.5 * x.dot(data->precision * x);
  };
  TargetModel::Gradient gradient = [data](const Vector& x, Vector& out) {
    if (data->diagonal) {
      out = (x.array() * data->precision_diag.array()).matrix();
    } else {
      out.noalias() = data->precision * x;
    }
  };
  TargetModel::Constants constants;
  constants.smoothness = 1.0 / (sqrt_eigs.minCoeff() * sqrt_eigs.minCoeff());
  constants.strong_convexity =
      1.0 / (sqrt_eigs.maxCoeff() * sqrt_eigs.maxCoeff());
  constants.hessian_lipschitz = 0.0;
  return TargetModel(sqrt_eigs.size(), std::move(potential),
                     std::move(gradient), constants,
                     Vector::Zero(sqrt_eigs.size()));
}

}  // namespace

GaussianTarget::GaussianTarget(Vector sqrt_eigs, Matrix basis, bool diagonal)
    : sqrt_eigs_(std::move(sqrt_eigs)),
      basis_(std::move(basis)),
      diagonal_(diagonal),
      precision_(basis_ *
                 sqrt_eigs_.array().square().inverse().matrix().asDiagonal() *
                 basis_.transpose()),
      model_(make_gaussian_model(sqrt_eigs_, diagonal_, precision_)) {}

Matrix GaussianTarget::covariance() const {
  return basis_ * sqrt_eigs_.array().square().matrix().asDiagonal() *
         basis_.transpose();
}

Vector GaussianTarget::max_variance_direction() const {
  Eigen::Index idx = 0;
  sqrt_eigs_.maxCoeff(&idx);
  return basis_.col(idx);
}

GaussianTarget gaussian_from_spectrum(std::span<const double> sqrt_eigs,
                                      const Matrix* basis) {
  require(!sqrt_eigs.empty(), ErrorCode::kInvalidSpectrum,
          "gaussian_from_spectrum: empty spectrum");
  const auto d = static_cast<Eigen::Index>(sqrt_eigs.size());
  Vector s(d);
  for (Eigen::Index i = 0; i < d; ++i) {
    const double v = sqrt_eigs[static_cast<std::size_t>(i)];
    if (!(v > 0.0) || !std::isfinite(v)) {
      fail(ErrorCode::kInvalidSpectrum,
           "gaussian_from_spectrum: entry " + std::to_string(i) +
               " is not a positive finite number");
    }
    s[i] = v;
  }
  if (basis == nullptr) {
    return GaussianTarget(std::move(s), Matrix::Identity(d, d), true);
  }
  require(basis->rows() == d && basis->cols() == d, ErrorCode::kInvalidBasis,
          "gaussian_from_spectrum: basis must be d x d");
  const double dev =
      (basis->transpose() * *basis - Matrix::Identity(d, d)).cwiseAbs().maxCoeff();
  require(dev <= 1e-10, ErrorCode::kInvalidBasis,
          "gaussian_from_spectrum: basis columns are not orthonormal");
  const bool is_identity =
      (*basis - Matrix::Identity(d, d)).cwiseAbs().maxCoeff() == 0.0;
  return GaussianTarget(std::move(s), *basis, is_identity);
}

std::vector<double> linear_spacing(double lo, double hi, std::size_t n) {
  require(n >= 1, ErrorCode::kInvalidArgument, "linear_spacing: n >= 1");
  std::vector<double> out(n, lo);
  if (n == 1) return out;
  for (std::size_t i = 0; i < n; ++i) {
    out[i] = lo + (hi - lo) * static_cast<double>(i) /
                      static_cast<double>(n - 1);
  }
  out.back() = hi;
  return out;
}

Matrix random_orthonormal(Eigen::Index d, std::uint64_t seed) {
  Rng rng(seed);
  Matrix g(d, d);
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index i = 0; i < d; ++i) g(i, j) = rng.normal();
  }
  Eigen::HouseholderQR<Matrix> qr(g);
  Matrix q = qr.householderQ() * Matrix::Identity(d, d);
  // Sign fix so the distribution is Haar rather than QR-biased.
  const Matrix r = qr.matrixQR();
  for (Eigen::Index j = 0; j < d; ++j) {
    if (r(j, j) < 0) q.col(j) *= -1.0;
  }
  // Re-orthonormalize to push the column error well below 1e-10.
  for (Eigen::Index j = 0; j < d; ++j) {
    for (Eigen::Index k = 0; k < j; ++k) {
      q.col(j) -= q.col(k).dot(q.col(j)) * q.col(k);
    }
    q.col(j).normalize();
  }
  return q;
}

double check_gradient(const TargetModel& target,
                      std::span<const Vector> points, double h) {
  require(h > 0, ErrorCode::kInvalidArgument, "check_gradient: h must be > 0");
  double worst = 0.0;
  Vector grad(target.dim());
  for (const Vector& x : points) {
    target.gradient(x, grad);
    Vector probe = x;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double xi = x[i];
      probe[i] = xi + h;
      const double fp = target.potential(probe);
      probe[i] = xi - h;
      const double fm = target.potential(probe);
      probe[i] = xi;
      const double fd = (fp - fm) / (2.0 * h);
      worst = std::max(worst, std::fabs(fd - grad[i]) / (1.0 + std::fabs(grad[i])));
    }
  }
  return worst;
}

TargetModel flat_target(Eigen::Index d) {
  return TargetModel(
      d, [](const Vector&) { return 0.0; },
      [](const Vector& x, Vector& out) { out.setZero(x.size()); },
      TargetModel::Constants{});
}

}  // namespace hmcmix
