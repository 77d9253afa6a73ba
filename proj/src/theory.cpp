#include "hmcmix/theory.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "hmcmix/normal.hpp"
#include "hmcmix/samplers.hpp"

namespace hmcmix {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();

StateSet from_mask(std::uint64_t mask, Eigen::Index n) {
  StateSet s(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = (mask >> i) & 1U;
  return s;
}

StateSet intersect(const StateSet& a, const StateSet& b) {
  StateSet out(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) out[i] = a[i] && b[i];
  return out;
}

void require_set(const DiscreteChain& chain, const StateSet& s, const char* what) {
  require(static_cast<Eigen::Index>(s.size()) == chain.n(),
          ErrorCode::kDimensionMismatch, std::string(what) + ": set size must equal n");
}

}  // namespace

void DiscreteChain::validate() const {
  const Eigen::Index n = P.rows();
  require(n >= 1 && P.cols() == n && pi.size() == n, ErrorCode::kDimensionMismatch,
          "discrete chain: P must be n x n and pi of length n");
  require(P.minCoeff() >= 0.0, ErrorCode::kPrecondition,
          "discrete chain: negative transition probability");
  for (Eigen::Index i = 0; i < n; ++i) {
    require(std::fabs(P.row(i).sum() - 1.0) <= 1e-12, ErrorCode::kPrecondition,
            "discrete chain: row " + std::to_string(i) + " does not sum to 1");
  }
  require((pi.transpose() * P - pi.transpose()).cwiseAbs().maxCoeff() <= 1e-10,
          ErrorCode::kPrecondition, "discrete chain: pi is not stationary");
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      require(std::fabs(pi[i] * P(i, j) - pi[j] * P(j, i)) <= 1e-10,
              ErrorCode::kPrecondition, "discrete chain: detailed balance fails");
    }
  }
}

DiscreteChain build_lazy_metropolis_chain(const Vector& energies,
                                          const Matrix& base_kernel,
                                          double zeta) {
  const Eigen::Index n = energies.size();
  require(n >= 1 && base_kernel.rows() == n && base_kernel.cols() == n,
          ErrorCode::kDimensionMismatch,
          "build_lazy_metropolis_chain: kernel must be n x n");
  require(zeta >= 0 && zeta < 1, ErrorCode::kInvalidArgument,
          "build_lazy_metropolis_chain: zeta must lie in [0, 1)");
  require((base_kernel - base_kernel.transpose()).cwiseAbs().maxCoeff() <= 1e-12,
          ErrorCode::kInvalidArgument,
          "build_lazy_metropolis_chain: base kernel must be symmetric");
  require(base_kernel.minCoeff() >= 0.0, ErrorCode::kInvalidArgument,
          "build_lazy_metropolis_chain: base kernel must be nonnegative");
  for (Eigen::Index i = 0; i < n; ++i) {
    require(std::fabs(base_kernel.row(i).sum() - 1.0) <= 1e-12,
            ErrorCode::kInvalidArgument,
            "build_lazy_metropolis_chain: base kernel must be row-stochastic");
  }
  DiscreteChain chain;
  const double e0 = energies.minCoeff();
  chain.pi = (-(energies.array() - e0)).exp().matrix();
  chain.pi /= chain.pi.sum();
  chain.P = Matrix::Zero(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    double off = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i == j) continue;
      const double a = std::min(1.0, std::exp(energies[i] - energies[j]));
      chain.P(i, j) = (1.0 - zeta) * base_kernel(i, j) * a;
      off += chain.P(i, j);
    }
    chain.P(i, i) = 1.0 - off;
  }
  return chain;
}

DiscreteChain random_lazy_chain(int n, double zeta, Rng& rng,
                                double energy_scale) {
  return random_chain_instance(n, zeta, rng, energy_scale).chain;
}

ChainInstance random_chain_instance(int n, double zeta, Rng& rng,
                                    double energy_scale) {
  require(n >= 2, ErrorCode::kInvalidArgument, "random_chain_instance: n >= 2");
  Matrix w = Matrix::Zero(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    w(i, i + 1) = w(i + 1, i) = 0.1 + rng.uniform();
  }
  for (int i = 0; i < n; ++i) {
    for (int j = i + 2; j < n; ++j) {
      if (rng.uniform() < 0.35) w(i, j) = w(j, i) = rng.uniform();
    }
  }
  const double scale = w.rowwise().sum().maxCoeff() * (1.0 + rng.uniform());
  Matrix kernel = w / scale;
  for (int i = 0; i < n; ++i) kernel(i, i) = 1.0 - kernel.row(i).sum();
  Vector energies(n);
  for (int i = 0; i < n; ++i) energies[i] = energy_scale * rng.uniform();
  ChainInstance inst{energies, kernel, zeta, {}};
  inst.chain = build_lazy_metropolis_chain(energies, kernel, zeta);
  return inst;
}

double set_mass(const Vector& pi, const StateSet& s) {
  double m = 0.0;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i]) m += pi[static_cast<Eigen::Index>(i)];
  }
  return m;
}

double flow(const DiscreteChain& chain, const StateSet& s) {
  require_set(chain, s, "flow");
  double total = 0.0;
  const Eigen::Index n = chain.n();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!s[static_cast<std::size_t>(i)]) continue;
    double out = 0.0;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (!s[static_cast<std::size_t>(j)]) out += chain.P(i, j);
    }
    total += chain.pi[i] * out;
  }
  return total;
}

void ProfileSteps::finalize() {
  std::sort(raw_.begin(), raw_.end());
  steps_.clear();
  double best = kInf;
  for (const auto& [mass, value] : raw_) {
    best = std::min(best, value);
    if (!steps_.empty() && steps_.back().first == mass) {
      steps_.back().second = best;
    } else {
      steps_.emplace_back(mass, best);
    }
  }
}

double ProfileSteps::operator()(double v) const {
  const double key = v * (1.0 + 1e-12);
  auto it = std::upper_bound(
      steps_.begin(), steps_.end(), key,
      [](double x, const std::pair<double, double>& s) { return x < s.first; });
  if (it == steps_.begin()) return kInf;
  return std::prev(it)->second;
}

namespace {

void check_grid(const std::vector<double>& v_grid, double omega_mass) {
  for (double v : v_grid) {
    require(v > 0 && v <= omega_mass / 2.0 * (1.0 + 1e-12),
            ErrorCode::kInvalidArgument,
            "profile: grid values must lie in (0, pi(Omega)/2]");
  }
}

}  // namespace

ConductanceProfile conductance_profile(const DiscreteChain& chain,
                                       const StateSet& omega,
                                       const std::vector<double>& v_grid,
                                       ProfileMode mode, std::uint64_t seed,
                                       int heuristic_samples) {
  require_set(chain, omega, "conductance_profile");
  const Eigen::Index n = chain.n();
  ConductanceProfile prof;
  prof.omega_mass = set_mass(chain.pi, omega);
  check_grid(v_grid, prof.omega_mass);
  auto consider = [&](const StateSet& s) {
    const double m = set_mass(chain.pi, intersect(s, omega));
    if (m <= 0.0) return;
    prof.steps.add(m, flow(chain, s) / m);
  };
  if (mode == ProfileMode::kExact) {
    require(n <= kExactProfileMaxStates, ErrorCode::kPrecondition,
            "conductance_profile: exact mode supports n <= 16; use the "
            "heuristic mode (upper bound only) for larger chains");
    const std::uint64_t full = (std::uint64_t{1} << n) - 1;
    for (std::uint64_t mask = 1; mask < full; ++mask) consider(from_mask(mask, n));
  } else {
    prof.upper_bound_only = true;
    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](auto a, auto b) { return chain.pi[a] < chain.pi[b]; });
    StateSet s(static_cast<std::size_t>(n), false);
    for (Eigen::Index k = 0; k + 1 < n; ++k) {
      s[static_cast<std::size_t>(order[static_cast<std::size_t>(k)])] = true;
      consider(s);
    }
    Rng rng(seed);
    for (int t = 0; t < heuristic_samples; ++t) {
      StateSet r(static_cast<std::size_t>(n));
      const double p = rng.uniform();
      bool any = false, all = true;
      for (auto&& bit : r) {
        bit = rng.uniform() < p;
        any = any || bit;
        all = all && bit;
      }
      if (any && !all) consider(r);
    }
  }
  prof.steps.finalize();
  prof.v = v_grid;
  for (double v : v_grid) prof.phi.push_back(prof.steps(v));
  return prof;
}

TruncatedProfile::TruncatedProfile(ConductanceProfile profile, double omega_mass)
    : profile_(std::move(profile)),
      omega_mass_(omega_mass),
      tail_(profile_.at(omega_mass / 2.0)) {}

double TruncatedProfile::operator()(double v) const {
  if (v >= omega_mass_ / 2.0) return tail_;
  return profile_.at(v);
}

TruncatedProfile truncated_profile(const ConductanceProfile& profile,
                                   double omega_mass) {
  return TruncatedProfile(profile, omega_mass);
}

namespace {

Matrix dirichlet_matrix(const DiscreteChain& chain) {
  Matrix x = chain.pi.asDiagonal() * (Matrix::Identity(chain.n(), chain.n()) - chain.P);
  return 0.5 * (x + x.transpose());
}

std::optional<double> gap_from_full(const DiscreteChain& chain,
                                    const Matrix& e_full,
                                    const StateSet& omega, const StateSet& s) {
  std::vector<Eigen::Index> idx;
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s[i]) idx.push_back(static_cast<Eigen::Index>(i));
  }
  const auto k = static_cast<Eigen::Index>(idx.size());
  if (k == 0) return std::nullopt;
  Matrix e(k, k), v = Matrix::Zero(k, k);
  for (Eigen::Index a = 0; a < k; ++a) {
    for (Eigen::Index b = 0; b < k; ++b) e(a, b) = e_full(idx[a], idx[b]);
  }
  for (Eigen::Index a = 0; a < k; ++a) {
    if (!omega[static_cast<std::size_t>(idx[a])]) continue;
    const double pa = chain.pi[idx[a]];
    for (Eigen::Index b = 0; b < k; ++b) {
      if (!omega[static_cast<std::size_t>(idx[b])]) continue;
      v(a, b) = (a == b ? pa : 0.0) - pa * chain.pi[idx[b]];
    }
  }
  if (v.cwiseAbs().maxCoeff() <= 1e-15) return std::nullopt;

  // min g^T E g / g^T V g, computed in the eigenbasis of E so a singular
  // Dirichlet form (closed classes inside S) is handled.
  Eigen::SelfAdjointEigenSolver<Matrix> es(e);
  const Vector& ev = es.eigenvalues();
  const Matrix& q = es.eigenvectors();
  const double tol = 1e-13 * std::max(1.0, ev.cwiseAbs().maxCoeff());
  std::vector<Eigen::Index> null_cols, range_cols;
  for (Eigen::Index i = 0; i < k; ++i) {
    (ev[i] <= tol ? null_cols : range_cols).push_back(i);
  }
  if (!null_cols.empty()) {
    Matrix nq(k, static_cast<Eigen::Index>(null_cols.size()));
    for (std::size_t c = 0; c < null_cols.size(); ++c) {
      nq.col(static_cast<Eigen::Index>(c)) = q.col(null_cols[c]);
    }
    if ((nq.transpose() * v * nq).cwiseAbs().maxCoeff() > 1e-14) return 0.0;
  }
  if (range_cols.empty()) return std::nullopt;
  const auto r = static_cast<Eigen::Index>(range_cols.size());
  Matrix w(k, r);
  for (Eigen::Index c = 0; c < r; ++c) {
    w.col(c) = q.col(range_cols[static_cast<std::size_t>(c)]) /
               std::sqrt(ev[range_cols[static_cast<std::size_t>(c)]]);
  }
  const Matrix m = w.transpose() * v * w;
  Eigen::SelfAdjointEigenSolver<Matrix> ms(0.5 * (m + m.transpose()),
                                           Eigen::EigenvaluesOnly);
  const double mu = ms.eigenvalues().maxCoeff();
  if (mu <= 1e-15) return std::nullopt;
  return 1.0 / mu;
}

}  // namespace

std::optional<double> restricted_spectral_gap(const DiscreteChain& chain,
                                              const StateSet& omega,
                                              const StateSet& s) {
  require_set(chain, omega, "restricted_spectral_gap");
  require_set(chain, s, "restricted_spectral_gap");
  return gap_from_full(chain, dirichlet_matrix(chain), omega, s);
}

SpectralProfile spectral_profile(const DiscreteChain& chain,
                                 const StateSet& omega,
                                 const std::vector<double>& v_grid) {
  require_set(chain, omega, "spectral_profile");
  const Eigen::Index n = chain.n();
  require(n <= kExactProfileMaxStates, ErrorCode::kPrecondition,
          "spectral_profile: exact mode supports n <= 16");
  const double omega_mass = set_mass(chain.pi, omega);
  check_grid(v_grid, omega_mass);
  const double vmax = v_grid.empty() ? 0.0
                                     : *std::max_element(v_grid.begin(), v_grid.end());
  const Matrix e_full = dirichlet_matrix(chain);
  SpectralProfile out;
  ProfileSteps eig_steps, ind_steps;
  const std::uint64_t full = (std::uint64_t{1} << n) - 1;
  for (std::uint64_t mask = 1; mask <= full; ++mask) {
    const StateSet s = from_mask(mask, n);
    const StateSet so = intersect(s, omega);
    const double m = set_mass(chain.pi, so);
    if (m > vmax * (1.0 + 1e-12)) continue;
    const auto gap = gap_from_full(chain, e_full, omega, s);
    if (!gap) {
      ++out.skipped_sets;
    } else {
      eig_steps.add(m, *gap);
    }
    // g = 1_S: E = flow(S), Var(1_{S ∩ Omega}) = m (1 - m); admissible when
    // the tail mass outside Omega does not exceed the mass inside.
    const double tail = set_mass(chain.pi, s) - m;
    if (m > 0 && m < 1 && tail <= m) {
      ind_steps.add(m, flow(chain, s) / (m * (1.0 - m)));
    }
  }
  eig_steps.finalize();
  ind_steps.finalize();
  out.v = v_grid;
  for (double v : v_grid) {
    const double a = eig_steps(v);
    const double b = ind_steps(v);
    out.lambda.push_back(a);
    out.lambda_indicator.push_back(b);
    out.constraint_gap.push_back(std::isfinite(a) && std::isfinite(b) &&
                                 std::fabs(a - b) > 1e-6);
  }
  return out;
}

MixingBound mixing_bound_from_profile(
    const std::function<double(double)>& truncated, double beta,
    double epsilon, double zeta) {
  require(beta > 0, ErrorCode::kInvalidArgument, "mixing bound: beta must be > 0");
  require(epsilon > 0, ErrorCode::kInvalidArgument,
          "mixing bound: epsilon must be > 0");
  require(zeta > 0 && zeta <= 1, ErrorCode::kInvalidArgument,
          "mixing bound: zeta must lie in (0, 1]");
  MixingBound out;
  const double lo = std::log(4.0 / beta);
  const double hi = std::log(8.0 / (epsilon * epsilon));
  if (!(hi > lo)) return out;
  bool zero_seen = false;
  // In u = log v the integrand 8 / (zeta v Phi^2) dv becomes 8 / (zeta Phi^2) du.
  auto g = [&](double u) {
    const double phi = truncated(std::exp(u));
    if (!(phi > 0)) {
      zero_seen = true;
      return 0.0;
    }
    if (std::isinf(phi)) return 0.0;
    return 8.0 / (zeta * phi * phi);
  };
  std::size_t n = 16;
  double h = (hi - lo) / static_cast<double>(n);
  double sum = 0.5 * (g(lo) + g(hi));
  for (std::size_t i = 1; i < n; ++i) sum += g(lo + h * static_cast<double>(i));
  double prev = sum * h;
  if (zero_seen) {
    out.infinite = true;
    out.value = kInf;
    return out;
  }
  for (int level = 0; level < 24; ++level) {
    double mid = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      mid += g(lo + h * (static_cast<double>(i) + 0.5));
    }
    sum += mid;
    n *= 2;
    h *= 0.5;
    const double cur = sum * h;
    if (zero_seen) {
      out.infinite = true;
      out.value = kInf;
      return out;
    }
    const double change = std::fabs(cur - prev);
    prev = cur;
    if (change <= 1e-6 * std::fabs(cur) || cur == 0.0) break;
  }
  out.value = prev;
  return out;
}

double l2_distance(const Vector& mu, const Vector& pi) {
  require_dim(mu.size(), pi.size(), "l2_distance");
  return std::sqrt((pi.array() * (mu.array() / pi.array() - 1.0).square()).sum());
}

std::optional<std::size_t> exact_l2_mixing(const DiscreteChain& chain,
                                           const Vector& mu0, double epsilon,
                                           std::size_t cap) {
  require_dim(mu0.size(), chain.n(), "exact_l2_mixing");
  require(chain.pi.minCoeff() > 0, ErrorCode::kPrecondition,
          "exact_l2_mixing: pi must be strictly positive");
  require(mu0.minCoeff() >= 0 && std::fabs(mu0.sum() - 1.0) <= 1e-12,
          ErrorCode::kInvalidArgument, "exact_l2_mixing: mu0 must be a distribution");
  Eigen::RowVectorXd mu = mu0.transpose();
  for (std::size_t k = 0; k <= cap; ++k) {
    if (l2_distance(mu.transpose(), chain.pi) <= epsilon) return k;
    mu = mu * chain.P;
  }
  return std::nullopt;
}

std::vector<Vector> warm_starts(const Vector& pi, double beta) {
  require(beta >= 1, ErrorCode::kInvalidArgument, "warm_starts: beta >= 1");
  const Eigen::Index n = pi.size();
  std::vector<Eigen::Index> asc(static_cast<std::size_t>(n));
  std::iota(asc.begin(), asc.end(), 0);
  std::sort(asc.begin(), asc.end(), [&](auto a, auto b) { return pi[a] < pi[b]; });
  std::vector<std::vector<Eigen::Index>> orders{asc, {asc.rbegin(), asc.rend()}};
  for (Eigen::Index i = 0; i < n; ++i) {
    std::vector<Eigen::Index> o{i};
    for (auto j : asc) {
      if (j != i) o.push_back(j);
    }
    orders.push_back(std::move(o));
  }
  std::vector<Vector> out;
  for (const auto& order : orders) {
    Vector mu = Vector::Zero(n);
    double remaining = 1.0;
    for (auto j : order) {
      const double take = std::min(beta * pi[j], remaining);
      mu[j] = take;
      remaining -= take;
      if (remaining <= 0) break;
    }
    mu /= mu.sum();
    out.push_back(std::move(mu));
  }
  return out;
}

Lemma1Report verify_lemma1(const DiscreteChain& chain, double beta,
                           double epsilon, double zeta) {
  const Eigen::Index n = chain.n();
  const StateSet omega(static_cast<std::size_t>(n), true);
  const ProfileMode mode =
      n <= kExactProfileMaxStates ? ProfileMode::kExact : ProfileMode::kHeuristic;
  const ConductanceProfile prof = conductance_profile(chain, omega, {0.5}, mode);
  const TruncatedProfile trunc(prof, 1.0);
  Lemma1Report rep;
  const MixingBound b = mixing_bound_from_profile(
      [&trunc](double v) { return trunc(v); }, beta, epsilon, zeta);
  rep.bound = b.value;
  rep.bound_infinite = b.infinite;
  for (const Vector& mu0 : warm_starts(chain.pi, beta)) {
    const auto k = exact_l2_mixing(chain, mu0, epsilon);
    rep.exact = std::max(rep.exact, k ? static_cast<double>(*k) : kInf);
  }
  rep.holds = rep.bound_infinite || rep.bound >= rep.exact;
  return rep;
}

Matrix LinearLeapfrogMap::phase_map() const {
  const Eigen::Index d = A.rows();
  Matrix m(2 * d, 2 * d);
  m << A, B, C, D;
  return m;
}

LinearLeapfrogMap gaussian_leapfrog_map(const GaussianTarget& target, int K,
                                        double eta) {
  require(K >= 1 && eta > 0, ErrorCode::kInvalidArgument,
          "gaussian_leapfrog_map: K >= 1 and eta > 0 required");
  const Eigen::Index d = target.dim();
  const Matrix& h = target.precision();
  LinearLeapfrogMap m{Matrix::Identity(d, d), Matrix::Zero(d, d),
                      Matrix::Zero(d, d), Matrix::Identity(d, d)};
  for (int k = 0; k < K; ++k) {
    const Matrix half_c = m.C - 0.5 * eta * h * m.A;
    const Matrix half_d = m.D - 0.5 * eta * h * m.B;
    m.A += eta * half_c;
    m.B += eta * half_d;
    m.C = half_c - 0.5 * eta * h * m.A;
    m.D = half_d - 0.5 * eta * h * m.B;
  }
  return m;
}

JacobianReport verify_jacobian_bound(const GaussianTarget& target, int K,
                                     double eta) {
  const double KE = K * eta;
  require(KE * KE <= 1.0 / (4.0 * target.smoothness()) * (1.0 + 1e-12),
          ErrorCode::kPrecondition,
          "verify_jacobian_bound: requires K^2 eta^2 <= 1/(4L)");
  const LinearLeapfrogMap map = gaussian_leapfrog_map(target, K, eta);
  const Eigen::Index d = target.dim();
  JacobianReport rep;
  const Matrix dev = KE * Matrix::Identity(d, d) - map.B;
  rep.norm_dev = Eigen::JacobiSVD<Matrix>(dev).singularValues()(0);
  rep.bound = KE / 8.0;
  rep.eig_min = Eigen::JacobiSVD<Matrix>(map.B).singularValues()(d - 1);
  rep.holds = rep.norm_dev <= rep.bound && rep.eig_min >= 7.0 / 8.0 * KE;
  return rep;
}

double gaussian_proposal_tv(const GaussianTarget& target, const Vector& q0,
                            const Vector& q0_alt, int K, double eta) {
  require_dim(q0.size(), target.dim(), "gaussian_proposal_tv");
  require_dim(q0_alt.size(), target.dim(), "gaussian_proposal_tv");
  const LinearLeapfrogMap map = gaussian_leapfrog_map(target, K, eta);
  const Vector delta = map.A * (q0 - q0_alt);
  const Matrix cov = map.B * map.B.transpose();
  Eigen::LLT<Matrix> llt(cov);
  const double scale = cov.cwiseAbs().maxCoeff();
  if (llt.info() != Eigen::Success ||
      llt.matrixL().toDenseMatrix().diagonal().minCoeff() <= 1e-12 * std::sqrt(scale)) {
    fail(ErrorCode::kSingularCovariance,
         "gaussian_proposal_tv: proposal covariance B B^T is singular");
  }
  const double w = std::sqrt(delta.dot(llt.solve(delta)));
  return 2.0 * normal_cdf(w / 2.0) - 1.0;
}

DistortionEstimate accept_distortion_estimate(const TargetModel& target,
                                              const Vector& x, int K,
                                              double eta, std::size_t n_mc,
                                              Rng& rng) {
  require(n_mc >= 2, ErrorCode::kInvalidArgument,
          "accept_distortion_estimate: n_mc >= 2");
  DistortionEstimate out;
  double sum = 0.0, sum_sq = 0.0;
  const double f0 = target.potential(x);
  for (std::size_t i = 0; i < n_mc; ++i) {
    const Vector p0 = rng.normal_vector(target.dim());
    double value = 1.0;
    try {
      const HmcProposal prop = hmc_propose_from(target, x, p0, K, eta);
      const double hK = target.potential(prop.qK) + 0.5 * prop.pK.squaredNorm();
      const double lr = f0 + 0.5 * p0.squaredNorm() - hK;
      if (std::isfinite(lr)) {
        value = 1.0 - std::exp(std::min(0.0, lr));
      } else {
        ++out.divergences;
      }
    } catch (const NumericalDivergence&) {
      ++out.divergences;
    }
    sum += value;
    sum_sq += value * value;
  }
  const auto n = static_cast<double>(n_mc);
  out.estimate = sum / n;
  const double var = std::max(0.0, (sum_sq - n * out.estimate * out.estimate) / (n - 1.0));
  out.radius = 1.96 * std::sqrt(var / n);
  return out;
}

TargetModel logcosh_target(const Vector& a, const Vector& b) {
  require_dim(b.size(), a.size(), "logcosh_target");
  require(a.minCoeff() >= 0 && b.minCoeff() > 0, ErrorCode::kInvalidArgument,
          "logcosh_target: a must be >= 0 and b > 0");
  auto pa = std::make_shared<Vector>(a);
  auto pb = std::make_shared<Vector>(b);
  TargetModel::Potential f = [pa, pb](const Vector& x) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double ax = std::fabs(x[i]);
      // log cosh(x) = |x| + log1p(exp(-2|x|)) - log 2, stable for large |x|.
      s += (*pa)[i] * (ax + std::log1p(std::exp(-2.0 * ax)) - std::log(2.0)) +
           0.5 * (*pb)[i] * x[i] * x[i];
    }
    return s;
  };
  TargetModel::Gradient g = [pa, pb](const Vector& x, Vector& out) {
    out = (pa->array() * x.array().tanh() + pb->array() * x.array()).matrix();
  };
  TargetModel::Constants c;
  c.smoothness = (a + b).maxCoeff();
  c.strong_convexity = b.minCoeff();
  // |d^3/dx^3 log cosh| <= 4 / (3 sqrt 3)
  c.hessian_lipschitz = a.maxCoeff() * 4.0 / (3.0 * std::sqrt(3.0));
  return TargetModel(a.size(), std::move(f), std::move(g), c,
                     Vector::Zero(a.size()));
}

}  // namespace hmcmix
