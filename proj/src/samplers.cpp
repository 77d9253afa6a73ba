#include "hmcmix/samplers.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace hmcmix {

std::string_view sampler_name(SamplerKind kind) {
  switch (kind) {
    case SamplerKind::kMrw:
      return "MRW";
    case SamplerKind::kMala:
      return "MALA";
    case SamplerKind::kHmc:
      return "HMC";
  }
  return "?";
}

SamplerKind parse_sampler(std::string_view name) {
  if (name == "MRW" || name == "mrw") return SamplerKind::kMrw;
  if (name == "MALA" || name == "mala") return SamplerKind::kMala;
  if (name == "HMC" || name == "hmc") return SamplerKind::kHmc;
  fail(ErrorCode::kInvalidArgument,
       "unknown sampler '" + std::string(name) + "' (expected MRW, MALA or HMC)");
}

void ChainConfig::validate() const {
  require(std::isfinite(step) && step > 0, ErrorCode::kInvalidArgument,
          "chain config: step size must be positive");
  require(leapfrog_steps >= 1, ErrorCode::kInvalidArgument,
          "chain config: leapfrog_steps must be >= 1");
  require(laziness >= 0.0 && laziness < 1.0, ErrorCode::kInvalidArgument,
          "chain config: laziness must lie in [0, 1)");
  require(max_divergence_fraction > 0.0 && max_divergence_fraction <= 1.0,
          ErrorCode::kInvalidArgument,
          "chain config: max_divergence_fraction must lie in (0, 1]");
}

std::size_t ChainTrace::non_lazy_iterations() const {
  std::size_t n = 0;
  for (bool lazy : lazy_hold) n += lazy ? 0 : 1;
  return n;
}

std::uint64_t ChainTrace::eval_count_paper() const {
  const auto n = static_cast<std::uint64_t>(non_lazy_iterations());
  return sampler == SamplerKind::kHmc
             ? n * static_cast<std::uint64_t>(leapfrog_steps)
             : n;
}

double hamiltonian(const TargetModel& target, const Vector& p,
                   const Vector& q) {
  require_dim(p.size(), target.dim(), "hamiltonian momentum");
  return target.potential(q) + 0.5 * p.squaredNorm();
}

namespace {

void eval_grad_checked(const TargetModel& target, const Vector& q,
                       const Vector& p, Vector& out, EvalCounters* counters) {
  target.gradient(q, out);
  if (counters) ++counters->grad_evals;
  if (!out.allFinite()) {
    throw NumericalDivergence("non-finite gradient during leapfrog", q, p);
  }
}

}  // namespace

void leapfrog_step_inplace(const TargetModel& target, Vector& p, Vector& q,
                           Vector& grad, double eta, EvalCounters* counters) {
  p.noalias() -= (0.5 * eta) * grad;
  q.noalias() += eta * p;
  eval_grad_checked(target, q, p, grad, counters);
  p.noalias() -= (0.5 * eta) * grad;
}

PhasePoint leapfrog_step(const TargetModel& target, const Vector& p,
                         const Vector& q, double eta) {
  require(eta > 0, ErrorCode::kInvalidArgument, "leapfrog_step: eta > 0");
  require_dim(p.size(), target.dim(), "leapfrog_step momentum");
  PhasePoint out{q, p};
  Vector grad(target.dim());
  eval_grad_checked(target, out.q, out.p, grad, nullptr);
  leapfrog_step_inplace(target, out.p, out.q, grad, eta, nullptr);
  return out;
}

HmcProposal hmc_propose_from(const TargetModel& target, const Vector& q0,
                             const Vector& p0, int K, double eta,
                             EvalCounters* counters,
                             GradientAccounting accounting) {
  require(K >= 1, ErrorCode::kInvalidArgument, "hmc_propose: K >= 1");
  require(eta > 0, ErrorCode::kInvalidArgument, "hmc_propose: eta > 0");
  require_dim(q0.size(), target.dim(), "hmc_propose state");
  require_dim(p0.size(), target.dim(), "hmc_propose momentum");
  HmcProposal prop{q0, p0, q0, p0};
  Vector grad(target.dim());
  eval_grad_checked(target, prop.qK, prop.pK, grad, counters);
  for (int k = 0; k < K; ++k) {
    if (accounting == GradientAccounting::kUncached && k > 0) {
      eval_grad_checked(target, prop.qK, prop.pK, grad, counters);
    }
    leapfrog_step_inplace(target, prop.pK, prop.qK, grad, eta, counters);
  }
  return prop;
}

HmcProposal hmc_propose(const TargetModel& target, const Vector& q0, int K,
                        double eta, Rng& rng) {
  const Vector p0 = rng.normal_vector(target.dim());
  return hmc_propose_from(target, q0, p0, K, eta);
}

double hmc_log_accept_ratio(const TargetModel& target,
                            const HmcProposal& proposal) {
  return hamiltonian(target, proposal.p0, proposal.q0) -
         hamiltonian(target, proposal.pK, proposal.qK);
}

Vector mala_propose_from(const TargetModel& target, const Vector& x,
                         double eta, const Vector& xi) {
  require(eta > 0, ErrorCode::kInvalidArgument, "mala_propose: eta > 0");
  require_dim(xi.size(), target.dim(), "mala_propose noise");
  return x - eta * target.gradient(x) + std::sqrt(2.0 * eta) * xi;
}

namespace {

double mala_log_ratio_cached(double fx, const Vector& gx, double fz,
                             const Vector& gz, const Vector& x,
                             const Vector& z, double eta) {
  const double reverse = (x - z + eta * gz).squaredNorm() / (4.0 * eta);
  const double forward = (z - x + eta * gx).squaredNorm() / (4.0 * eta);
  return (-fz - reverse) - (-fx - forward);
}

// Clamp to (-inf, 0]; NaN maps to -inf so it always rejects.
double clamp_log_alpha(double log_ratio) {
  if (std::isnan(log_ratio)) return -std::numeric_limits<double>::infinity();
  return std::min(0.0, log_ratio);
}

bool accept_draw(Rng& rng, double log_alpha) {
  const double u = rng.uniform();
  if (log_alpha >= 0.0) return true;
  return std::log(u) < log_alpha;
}

bool lazy_draw(Rng& rng, double zeta) {
  if (zeta <= 0.0) return false;
  return rng.uniform() < zeta;
}

IterationResult diverged_result() {
  IterationResult r;
  r.diverged = true;
  r.log_accept = -std::numeric_limits<double>::infinity();
  return r;
}

}  // namespace

double mala_log_accept_ratio(const TargetModel& target, const Vector& x,
                             const Vector& z, double eta) {
  return mala_log_ratio_cached(target.potential(x), target.gradient(x),
                               target.potential(z), target.gradient(z), x, z,
                               eta);
}

double mrw_log_accept_ratio(const TargetModel& target, const Vector& x,
                            const Vector& z) {
  return target.potential(x) - target.potential(z);
}

IterationResult hmc_iteration(const TargetModel& target, ChainState& state,
                              const ChainConfig& cfg, Rng& rng,
                              EvalCounters& counters) {
  IterationResult result;
  if (lazy_draw(rng, cfg.laziness)) {
    result.lazy_hold = true;
    return result;
  }
  const Vector p0 = rng.normal_vector(target.dim());
  if (!state.f) {
    state.f = target.potential(state.x);
    ++counters.fn_evals;
  }
  try {
    HmcProposal prop = hmc_propose_from(target, state.x, p0, cfg.leapfrog_steps, cfg.step,
                            &counters, cfg.accounting);
    const double fK = target.potential(prop.qK);
    ++counters.fn_evals;
    const double h0 = *state.f + 0.5 * p0.squaredNorm();
    const double hK = fK + 0.5 * prop.pK.squaredNorm();
    if (!std::isfinite(hK)) throw NumericalDivergence("non-finite H", prop.qK, prop.pK);
    result.log_accept = clamp_log_alpha(h0 - hK);
    result.accepted = accept_draw(rng, result.log_accept);
    if (result.accepted) {
      state.x = std::move(prop.qK);
      state.f = fK;
      state.grad.reset();
    }
  } catch (const NumericalDivergence&) {
    rng.uniform();  // keep the accept-coin slot in the stream
    ++counters.divergences;
    return diverged_result();
  }
  return result;
}

IterationResult mala_iteration(const TargetModel& target, ChainState& state,
                               const ChainConfig& cfg, Rng& rng,
                               EvalCounters& counters) {
  IterationResult result;
  if (lazy_draw(rng, cfg.laziness)) {
    result.lazy_hold = true;
    return result;
  }
  const Vector xi = rng.normal_vector(target.dim());
  if (!state.f) {
    state.f = target.potential(state.x);
    ++counters.fn_evals;
  }
  if (!state.grad) {
    state.grad = target.gradient(state.x);
    ++counters.grad_evals;
  }
  const double eta = cfg.step;
  Vector z = state.x - eta * *state.grad + std::sqrt(2.0 * eta) * xi;
  const double fz = target.potential(z);
  Vector gz = target.gradient(z);
  ++counters.fn_evals;
  ++counters.grad_evals;
  if (!std::isfinite(fz) || !gz.allFinite()) {
    rng.uniform();
    ++counters.divergences;
    return diverged_result();
  }
  const double log_ratio =
      mala_log_ratio_cached(*state.f, *state.grad, fz, gz, state.x, z, eta);
  result.log_accept = clamp_log_alpha(log_ratio);
  result.accepted = accept_draw(rng, result.log_accept);
  if (result.accepted) {
    state.x = std::move(z);
    state.f = fz;
    state.grad = std::move(gz);
  }
  return result;
}

IterationResult mrw_iteration(const TargetModel& target, ChainState& state,
                              const ChainConfig& cfg, Rng& rng,
                              EvalCounters& counters) {
  IterationResult result;
  if (lazy_draw(rng, cfg.laziness)) {
    result.lazy_hold = true;
    return result;
  }
  const Vector xi = rng.normal_vector(target.dim());
  if (!state.f) {
    state.f = target.potential(state.x);
    ++counters.fn_evals;
  }
  Vector z = state.x + std::sqrt(2.0 * cfg.step) * xi;
  const double fz = target.potential(z);
  ++counters.fn_evals;
  if (!std::isfinite(fz)) {
    rng.uniform();
    ++counters.divergences;
    return diverged_result();
  }
  result.log_accept = clamp_log_alpha(*state.f - fz);
  result.accepted = accept_draw(rng, result.log_accept);
  if (result.accepted) {
    state.x = std::move(z);
    state.f = fz;
    state.grad.reset();
  }
  return result;
}

Chain::Chain(const TargetModel& target, ChainConfig cfg, Vector init)
    : target_(&target), cfg_(cfg), rng_(cfg.seed), state_(std::move(init)) {
  cfg_.validate();
  require_dim(state_.x.size(), target.dim(), "chain initial state");
  require(state_.x.allFinite(), ErrorCode::kInvalidArgument,
          "chain initial state must be finite");
}

IterationResult Chain::step() {
  IterationResult r;
  switch (cfg_.sampler) {
    case SamplerKind::kHmc:
      r = hmc_iteration(*target_, state_, cfg_, rng_, counters_);
      break;
    case SamplerKind::kMala:
      r = mala_iteration(*target_, state_, cfg_, rng_, counters_);
      break;
    case SamplerKind::kMrw:
      r = mrw_iteration(*target_, state_, cfg_, rng_, counters_);
      break;
  }
  ++iterations_;
  if (!r.lazy_hold) ++non_lazy_;
  if (r.accepted) ++accepted_;
  if (non_lazy_ >= 20 &&
      static_cast<double>(counters_.divergences) >
          cfg_.max_divergence_fraction * static_cast<double>(non_lazy_)) {
    fail(ErrorCode::kNumericalDivergence,
         "chain aborted: " + std::to_string(counters_.divergences) + " of " +
             std::to_string(non_lazy_) +
             " proposals diverged; step size is likely too large");
  }
  return r;
}

std::uint64_t Chain::eval_count_paper() const noexcept {
  return cfg_.sampler == SamplerKind::kHmc
             ? non_lazy_ * static_cast<std::uint64_t>(cfg_.leapfrog_steps)
             : non_lazy_;
}

ChainTrace run_chain(const TargetModel& target, const ChainConfig& cfg,
                     const Vector& init, std::size_t n_iters) {
  Chain chain(target, cfg, init);
  ChainTrace trace;
  trace.sampler = cfg.sampler;
  trace.leapfrog_steps = cfg.leapfrog_steps;
  trace.states.reserve(n_iters + 1);
  trace.accepted.reserve(n_iters);
  trace.lazy_hold.reserve(n_iters);
  trace.states.push_back(init);
  for (std::size_t i = 0; i < n_iters; ++i) {
    const IterationResult r = chain.step();
    trace.accepted.push_back(r.accepted);
    trace.lazy_hold.push_back(r.lazy_hold);
    trace.states.push_back(chain.state());
  }
  trace.counters = chain.counters();
  return trace;
}

Vector sample_init(InitKind kind, const TargetModel& target, Rng& rng,
                   const Vector* custom) {
  if (kind == InitKind::kCustom) {
    require(custom != nullptr, ErrorCode::kInvalidArgument,
            "sample_init: custom start requires a state");
    require_dim(custom->size(), target.dim(), "sample_init custom state");
    return *custom;
  }
  require(target.mode().has_value(), ErrorCode::kPrecondition,
          "sample_init: feasible start needs a declared mode");
  require(target.smoothness() > 0, ErrorCode::kPrecondition,
          "sample_init: feasible start needs L > 0");
  const double sd = 1.0 / std::sqrt(target.smoothness());
  Vector x = rng.normal_vector(target.dim());
  return *target.mode() + sd * x;
}

}  // namespace hmcmix
