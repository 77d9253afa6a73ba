#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hmcmix/rng.hpp"
#include "hmcmix/targets.hpp"

namespace hmcmix {

// ---------------------------------------------------------------------------
// Finite reversible chains and their profiles.
// ---------------------------------------------------------------------------

struct DiscreteChain {
  Matrix P;   // row-stochastic transition matrix
  Vector pi;  // stationary distribution

  Eigen::Index n() const noexcept { return P.rows(); }
  /// Checks row sums (1e-12), nonnegativity, detailed balance (1e-10) and
  /// stationarity (1e-10); throws kPrecondition on failure.
  void validate() const;
};

using StateSet = std::vector<bool>;

/// Metropolis chain for pi ∝ exp(-energies) over a symmetric row-stochastic
/// proposal, made zeta-lazy: P = zeta I + (1 - zeta) P_metropolis.
DiscreteChain build_lazy_metropolis_chain(const Vector& energies,
                                          const Matrix& base_kernel,
                                          double zeta);

/// Random test chain: energies ~ U(0, energy_scale), a random symmetric
/// kernel on a connected random graph, then made zeta-lazy.
DiscreteChain random_lazy_chain(int n, double zeta, Rng& rng,
                                double energy_scale = 2.0);

struct ChainInstance {
  Vector energies;
  Matrix kernel;  // symmetric base proposal
  double zeta = 0.0;
  DiscreteChain chain;
};

ChainInstance random_chain_instance(int n, double zeta, Rng& rng,
                                    double energy_scale = 2.0);

double set_mass(const Vector& pi, const StateSet& s);

/// phi(S) = sum_{i in S} pi_i P(i, S^c).
double flow(const DiscreteChain& chain, const StateSet& s);

constexpr int kExactProfileMaxStates = 16;

enum class ProfileMode { kExact, kHeuristic };

/// Step function v -> inf{ value(S) : 0 < pi(S ∩ Omega) <= v }, stored as
/// increasing breakpoints. +inf below the first breakpoint.
class ProfileSteps {
 public:
  void add(double mass, double value) { raw_.emplace_back(mass, value); }
  void finalize();
  double operator()(double v) const;
  bool empty() const noexcept { return steps_.empty(); }

 private:
  std::vector<std::pair<double, double>> raw_;
  std::vector<std::pair<double, double>> steps_;
};

struct ConductanceProfile {
  std::vector<double> v;
  std::vector<double> phi;
  double omega_mass = 1.0;
  bool upper_bound_only = false;
  ProfileSteps steps;  // evaluates Phi_Omega(v) at any v

  double at(double v) const { return steps(v); }
};

/// Phi_Omega on `v_grid` (each v in (0, pi(Omega)/2]). Exact mode
/// enumerates all proper subsets and rejects n > 16; heuristic mode uses
/// prefix sets of the states sorted by pi plus `heuristic_samples` random
/// subsets, and flags the result as an upper bound only.
ConductanceProfile conductance_profile(const DiscreteChain& chain,
                                       const StateSet& omega,
                                       const std::vector<double>& v_grid,
                                       ProfileMode mode = ProfileMode::kExact,
                                       std::uint64_t seed = 0,
                                       int heuristic_samples = 4096);

/// Constant extension of a conductance profile past pi(Omega)/2.
class TruncatedProfile {
 public:
  TruncatedProfile(ConductanceProfile profile, double omega_mass);
  double operator()(double v) const;
  double junction() const noexcept { return omega_mass_ / 2.0; }

 private:
  ConductanceProfile profile_;
  double omega_mass_;
  double tail_;
};

TruncatedProfile truncated_profile(const ConductanceProfile& profile,
                                   double omega_mass);

struct SpectralProfile {
  std::vector<double> v;
  std::vector<double> lambda;            // unconstrained principal value
  std::vector<double> lambda_indicator;  // indicator-family upper bound
  std::vector<bool> constraint_gap;      // the two differ by > 1e-6
  std::size_t skipped_sets = 0;          // sets with no admissible g
};

/// Lambda_Omega on `v_grid` by exhaustive enumeration (n <= 16). For each
/// S the restricted gap is the smallest generalized eigenvalue of the
/// Dirichlet form against Var(g 1_Omega) over functions supported on S.
SpectralProfile spectral_profile(const DiscreteChain& chain,
                                 const StateSet& omega,
                                 const std::vector<double>& v_grid);

/// Restricted gap of a single set; nullopt if no admissible g exists.
std::optional<double> restricted_spectral_gap(const DiscreteChain& chain,
                                              const StateSet& omega,
                                              const StateSet& s);

struct MixingBound {
  double value = 0.0;
  bool infinite = false;
};

/// int_{4/beta}^{8/eps^2} 8 / (zeta v Phi~(v)^2) dv by trapezoid rule in
/// log v, doubling the grid until the relative change is below 1e-6.
MixingBound mixing_bound_from_profile(
    const std::function<double(double)>& truncated, double beta,
    double epsilon, double zeta);

/// d_2(mu, pi) = ( sum pi_i (mu_i/pi_i - 1)^2 )^{1/2}.
double l2_distance(const Vector& mu, const Vector& pi);

/// Smallest k with d_2(mu0 P^k, pi) <= eps; nullopt after `cap` steps.
std::optional<std::size_t> exact_l2_mixing(const DiscreteChain& chain,
                                           const Vector& mu0, double epsilon,
                                           std::size_t cap = 1'000'000);

/// beta-warm starts obtained by filling states with beta pi_i in several
/// orders (ascending pi, descending pi, and each state first).
std::vector<Vector> warm_starts(const Vector& pi, double beta);

struct Lemma1Report {
  double bound = 0.0;
  bool bound_infinite = false;
  double exact = 0.0;  // worst case over warm_starts; +inf if one never mixed
  bool holds = false;
};

/// Compares the conductance-profile bound (Omega = whole space) with the
/// exact L2 mixing time of the worst tested beta-warm start.
Lemma1Report verify_lemma1(const DiscreteChain& chain, double beta,
                           double epsilon, double zeta);

// ---------------------------------------------------------------------------
// Exact linear leapfrog on quadratic potentials.
// ---------------------------------------------------------------------------

/// qK = A q0 + B p0, pK = C q0 + D p0.
struct LinearLeapfrogMap {
  Matrix A, B, C, D;
  /// [[A, B], [C, D]] acting on (q0, p0).
  Matrix phase_map() const;
};

LinearLeapfrogMap gaussian_leapfrog_map(const GaussianTarget& target, int K,
                                        double eta);

struct JacobianReport {
  double norm_dev = 0.0;  // ||K eta I - B||_2
  double bound = 0.0;     // K eta / 8
  double eig_min = 0.0;   // smallest singular value of B
  bool holds = false;
};

/// Requires K^2 eta^2 <= 1/(4L); throws kPrecondition otherwise.
JacobianReport verify_jacobian_bound(const GaussianTarget& target, int K,
                                     double eta);

/// Exact TV between the Gaussian proposals N(A q0, BB^T) and
/// N(A q0_alt, BB^T): 2 Phi_N(|w|/2) - 1 with w = (BB^T)^{-1/2} A (q0 - q0_alt).
double gaussian_proposal_tv(const GaussianTarget& target, const Vector& q0,
                            const Vector& q0_alt, int K, double eta);

struct DistortionEstimate {
  double estimate = 0.0;
  double radius = 0.0;  // 95% normal-approximation half width
  std::size_t divergences = 0;
};

/// Monte Carlo mean of 1 - min{1, exp(-Delta H)} over n_mc momenta at x.
DistortionEstimate accept_distortion_estimate(const TargetModel& target,
                                              const Vector& x, int K,
                                              double eta, std::size_t n_mc,
                                              Rng& rng);

/// Smooth non-Gaussian log-concave target used by the equivalence checks:
/// f(x) = sum_i a_i log cosh(x_i) + x^T diag(b) x / 2.
TargetModel logcosh_target(const Vector& a, const Vector& b);

}  // namespace hmcmix
