#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "hmcmix/rng.hpp"
#include "hmcmix/targets.hpp"

namespace hmcmix {

enum class SamplerKind { kMrw, kMala, kHmc };

std::string_view sampler_name(SamplerKind kind);
SamplerKind parse_sampler(std::string_view name);

// How HMC gradient calls are made inside one proposal. kCached shares
// grad f(q_k) between the end of leapfrog step k and the start of step k+1
// (K + 1 evaluations per proposal); kUncached recomputes it (2K).
enum class GradientAccounting { kCached, kUncached };

struct PhasePoint {
  Vector q;
  Vector p;
};

struct ChainConfig {
  SamplerKind sampler = SamplerKind::kHmc;
  double step = 0.1;        // eta
  int leapfrog_steps = 1;   // K, HMC only
  double laziness = 0.0;    // zeta in [0, 1)
  std::uint64_t seed = 0;
  GradientAccounting accounting = GradientAccounting::kCached;
  // Abort once more than this fraction of non-lazy iterations diverged
  // (checked after a 20-iteration grace period).
  double max_divergence_fraction = 0.5;

  void validate() const;
};

struct EvalCounters {
  std::uint64_t grad_evals = 0;
  std::uint64_t fn_evals = 0;
  std::uint64_t divergences = 0;
};

struct IterationResult {
  bool accepted = false;
  bool lazy_hold = false;
  bool diverged = false;
  double log_accept = 0.0;  // min{0, log ratio}; -inf on divergence
};

/// Raw output of run_chain. states has n_iters + 1 entries, states[0] = init.
struct ChainTrace {
  SamplerKind sampler = SamplerKind::kHmc;
  int leapfrog_steps = 1;
  std::vector<Vector> states;
  std::vector<bool> accepted;
  std::vector<bool> lazy_hold;
  EvalCounters counters;

  std::size_t iterations() const { return accepted.size(); }
  std::size_t non_lazy_iterations() const;
  /// Idealized count used in the scaling study: K per non-lazy iteration
  /// for HMC, one per non-lazy iteration for MALA and MRW.
  std::uint64_t eval_count_paper() const;
};

/// H(p, q) = f(q) + |p|^2 / 2.
double hamiltonian(const TargetModel& target, const Vector& p, const Vector& q);

/// One Stormer-Verlet step:
///   p_half = p - (eta/2) grad f(q); q' = q + eta p_half;
///   p' = p_half - (eta/2) grad f(q').
/// Two gradient evaluations. Throws NumericalDivergence if a gradient is not
/// finite.
PhasePoint leapfrog_step(const TargetModel& target, const Vector& p,
                         const Vector& q, double eta);

/// In-place variant used by the chains. On entry `grad` holds grad f(q); on
/// exit it holds grad f(q'). Performs one gradient evaluation.
void leapfrog_step_inplace(const TargetModel& target, Vector& p, Vector& q,
                           Vector& grad, double eta, EvalCounters* counters);

struct HmcProposal {
  Vector q0;
  Vector p0;
  Vector qK;
  Vector pK;
};

/// K leapfrog steps from (p0, q0) with a caller-supplied momentum.
HmcProposal hmc_propose_from(const TargetModel& target, const Vector& q0,
                             const Vector& p0, int K, double eta,
                             EvalCounters* counters = nullptr,
                             GradientAccounting accounting =
                                 GradientAccounting::kCached);

/// Draws p0 ~ N(0, I) from `rng` and integrates K leapfrog steps.
HmcProposal hmc_propose(const TargetModel& target, const Vector& q0, int K,
                        double eta, Rng& rng);

/// log of exp(-H(pK, qK)) / exp(-H(p0, q0)), unclamped.
double hmc_log_accept_ratio(const TargetModel& target,
                            const HmcProposal& proposal);

/// z = x - eta grad f(x) + sqrt(2 eta) xi.
Vector mala_propose_from(const TargetModel& target, const Vector& x,
                         double eta, const Vector& xi);

/// Log of the MALA acceptance ratio with forward and reverse kernel terms,
/// unclamped.
double mala_log_accept_ratio(const TargetModel& target, const Vector& x,
                             const Vector& z, double eta);

/// f(x) - f(z), unclamped.
double mrw_log_accept_ratio(const TargetModel& target, const Vector& x,
                            const Vector& z);

/// Cached evaluations at the current iterate.
struct ChainState {
  Vector x;
  std::optional<double> f;
  std::optional<Vector> grad;

  explicit ChainState(Vector init) : x(std::move(init)) {}
};

// Per-iteration draw order on the chain's stream:
//   1. if zeta > 0: one uniform for the lazy coin (hold if u < zeta);
//   2. d standard normals (momentum for HMC, proposal noise for MALA/MRW);
//   3. one uniform for the accept coin (accept iff log u < log alpha).
// Lazy iterations consume only the first draw.
IterationResult hmc_iteration(const TargetModel& target, ChainState& state,
                              const ChainConfig& cfg, Rng& rng,
                              EvalCounters& counters);
IterationResult mala_iteration(const TargetModel& target, ChainState& state,
                               const ChainConfig& cfg, Rng& rng,
                               EvalCounters& counters);
IterationResult mrw_iteration(const TargetModel& target, ChainState& state,
                              const ChainConfig& cfg, Rng& rng,
                              EvalCounters& counters);

/// A single Metropolized chain. Holds a reference to `target`, which must
/// outlive it.
class Chain {
 public:
  Chain(const TargetModel& target, ChainConfig cfg, Vector init);

  IterationResult step();

  const Vector& state() const noexcept { return state_.x; }
  const EvalCounters& counters() const noexcept { return counters_; }
  const ChainConfig& config() const noexcept { return cfg_; }
  std::uint64_t iterations() const noexcept { return iterations_; }
  std::uint64_t accepted() const noexcept { return accepted_; }
  std::uint64_t non_lazy() const noexcept { return non_lazy_; }
  std::uint64_t eval_count_paper() const noexcept;

 private:
  const TargetModel* target_;
  ChainConfig cfg_;
  Rng rng_;
  ChainState state_;
  EvalCounters counters_;
  std::uint64_t iterations_ = 0;
  std::uint64_t accepted_ = 0;
  std::uint64_t non_lazy_ = 0;
};

/// Runs n_iters iterations from `init`; deterministic in (seed, cfg, init,
/// target). Throws if divergence becomes persistent.
ChainTrace run_chain(const TargetModel& target, const ChainConfig& cfg,
                     const Vector& init, std::size_t n_iters);

enum class InitKind { kGaussianFeasible, kCustom };

/// Feasible start: a draw from N(x*, I/L). Requires the target to declare a
/// mode and L > 0. kCustom returns *custom, which must be supplied.
Vector sample_init(InitKind kind, const TargetModel& target, Rng& rng,
                   const Vector* custom = nullptr);

}  // namespace hmcmix
