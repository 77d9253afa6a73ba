#include "hmcmix/suite.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "hmcmix/config.hpp"
#include "hmcmix/samplers.hpp"
#include "hmcmix/theory.hpp"
#include "hmcmix/tuning.hpp"

namespace hmcmix {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

std::string fmt_vec(const Vector& v) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i) s += ",";
    s += fmt(v[i]);
  }
  return s + "]";
}

std::string fmt_mat(const Matrix& m) {
  std::string s = "[";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    if (i) s += ",";
    s += fmt_vec(m.row(i).transpose());
  }
  return s + "]";
}

class Tally {
 public:
  explicit Tally(std::string name) { r_.name = std::move(name); r_.worst_margin = kInf; }

  // Records one instance; `serialize` is only called for the first failure.
  template <typename F>
  void record(double margin, bool ok, F&& serialize) {
    ++r_.instances;
    r_.worst_margin = std::min(r_.worst_margin, margin);
    if (!ok) {
      if (r_.failures == 0) r_.failing_instance = serialize();
      ++r_.failures;
    }
  }
  CheckResult done(std::string note = {}) {
    r_.note = std::move(note);
    return r_;
  }

 private:
  CheckResult r_;
};

int uniform_int(Rng& rng, int lo, int hi) {
  return lo + static_cast<int>(std::floor(rng.uniform() * (hi - lo + 1)));
}

Vector random_unit(Rng& rng, Eigen::Index d) {
  Vector v = rng.normal_vector(d);
  while (v.norm() == 0) v = rng.normal_vector(d);
  return v / v.norm();
}

std::string gaussian_case(const GaussianTarget& t, std::uint64_t seed, int K,
                          double eta) {
  return "seed=" + std::to_string(seed) + " " + describe_gaussian(t) +
         " K=" + std::to_string(K) + " eta=" + fmt(eta);
}

std::string chain_case(const ChainInstance& c, std::uint64_t seed) {
  return "seed=" + std::to_string(seed) + " n=" + std::to_string(c.energies.size()) +
         " zeta=" + fmt(c.zeta) + " energies=" + fmt_vec(c.energies) +
         " kernel=" + fmt_mat(c.kernel);
}

ChainInstance chain_for(std::uint64_t seed, int max_states) {
  Rng rng(seed);
  const int n = uniform_int(rng, 3, max_states);
  const double scale = 0.5 + 3.5 * rng.uniform();
  return random_chain_instance(n, 0.5, rng, scale);
}

}  // namespace

GaussianTarget random_gaussian_instance(Rng& rng, int max_d, double max_kappa) {
  const int d = uniform_int(rng, 1, max_d);
  const double kappa = std::exp(rng.uniform() * std::log(max_kappa));
  const double top = std::sqrt(kappa);
  std::vector<double> s(static_cast<std::size_t>(d));
  for (auto& x : s) x = 1.0 + (top - 1.0) * rng.uniform();
  s.front() = 1.0;
  if (d > 1) s.back() = top;
  if (d > 1 && rng.uniform() < 0.5) {
    const Matrix q = random_orthonormal(d, static_cast<std::uint64_t>(rng.engine()()));
    return gaussian_from_spectrum(s, &q);
  }
  return gaussian_from_spectrum(s);
}

std::string describe_gaussian(const GaussianTarget& t) {
  std::string s = "d=" + std::to_string(t.dim()) +
                  " sqrt_eigenvalues=" + fmt_vec(t.sqrt_eigenvalues());
  if (!t.diagonal()) s += " basis=" + fmt_mat(t.eigenbasis());
  return s;
}

CheckResult check_mala_hmc_equivalence(std::size_t n, std::uint64_t seed) {
  Tally t("mala_hmc_equivalence");
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t s = derive_seed(seed, i);
    Rng rng(s);
    std::optional<GaussianTarget> g;
    std::optional<TargetModel> lc;
    std::string desc;
    if (i % 2 == 0) {
      g = random_gaussian_instance(rng);
      desc = describe_gaussian(*g);
    } else {
      const int d = uniform_int(rng, 1, 16);
      Vector a(d), b(d);
      for (int j = 0; j < d; ++j) {
        a[j] = 2.0 * rng.uniform();
        b[j] = 0.1 + rng.uniform();
      }
      lc = logcosh_target(a, b);
      desc = "logcosh a=" + fmt_vec(a) + " b=" + fmt_vec(b);
    }
    const TargetModel& target = g ? g->model() : *lc;
    const Eigen::Index d = target.dim();
    const double eta = (0.05 + 0.95 * rng.uniform()) / std::sqrt(target.smoothness());
    const Vector x = 2.0 * rng.normal_vector(d);
    const Vector xi = rng.normal_vector(d);

    const HmcProposal prop = hmc_propose_from(target, x, xi, 1, eta);
    const double eta_mala = eta * eta / 2.0;
    const Vector z = mala_propose_from(target, x, eta_mala, xi);
    const double dq = (prop.qK - z).cwiseAbs().maxCoeff();
    const double dl = std::fabs(hmc_log_accept_ratio(target, prop) -
                                mala_log_accept_ratio(target, x, z, eta_mala));
    const double margin = std::min(1.0 - dq / 1e-12, 1.0 - dl / 1e-10);
    t.record(margin, dq <= 1e-12 && dl <= 1e-10, [&] {
      return "seed=" + std::to_string(s) + " " + desc + " eta=" + fmt(eta) +
             " x=" + fmt_vec(x) + " xi=" + fmt_vec(xi) + " proposal_diff=" + fmt(dq) +
             " log_ratio_diff=" + fmt(dl);
    });
  }
  return t.done("margins relative to tolerances 1e-12 (proposal) and 1e-10 (log ratio)");
}

namespace {

struct LeapfrogInstance {
  std::uint64_t seed;
  GaussianTarget target;
  int K;
  double eta;
  Vector q0, p0;
};

LeapfrogInstance leapfrog_instance(std::uint64_t seed) {
  Rng rng(seed);
  GaussianTarget g = random_gaussian_instance(rng);
  const int K = uniform_int(rng, 1, 32);
  const double eta = (0.02 + 0.98 * rng.uniform()) / std::sqrt(g.smoothness());
  Vector q0 = g.eigenbasis() * (g.sqrt_eigenvalues().array() *
                                rng.normal_vector(g.dim()).array()).matrix();
  Vector p0 = rng.normal_vector(g.dim());
  return {seed, std::move(g), K, eta, std::move(q0), std::move(p0)};
}

}  // namespace

CheckResult check_leapfrog_reversibility(std::size_t n, std::uint64_t seed) {
  Tally t("leapfrog_reversibility");
  for (std::size_t i = 0; i < n; ++i) {
    const LeapfrogInstance in = leapfrog_instance(derive_seed(seed, i));
    const HmcProposal fwd = hmc_propose_from(in.target, in.q0, in.p0, in.K, in.eta);
    const HmcProposal back =
        hmc_propose_from(in.target, fwd.qK, -fwd.pK, in.K, in.eta);
    const double scale = 1.0 + std::max(in.q0.cwiseAbs().maxCoeff(),
                                        in.p0.cwiseAbs().maxCoeff());
    const double err = std::max((back.qK - in.q0).cwiseAbs().maxCoeff(),
                                (back.pK + in.p0).cwiseAbs().maxCoeff()) /
                       scale;
    t.record(1.0 - err / 1e-12, err <= 1e-12, [&] {
      return gaussian_case(in.target, in.seed, in.K, in.eta) +
             " q0=" + fmt_vec(in.q0) + " p0=" + fmt_vec(in.p0) + " error=" + fmt(err);
    });
  }
  return t.done("round-trip error relative to 1 + max|(q0, p0)|, tolerance 1e-12");
}

CheckResult check_leapfrog_symplectic(std::size_t n, std::uint64_t seed) {
  Tally t("leapfrog_phase_determinant");
  for (std::size_t i = 0; i < n; ++i) {
    const LeapfrogInstance in = leapfrog_instance(derive_seed(seed, i));
    const LinearLeapfrogMap m = gaussian_leapfrog_map(in.target, in.K, in.eta);
    const double det = m.phase_map().partialPivLu().determinant();
    const double err = std::fabs(det - 1.0);
    t.record(1.0 - err / 1e-9, err <= 1e-9, [&] {
      return gaussian_case(in.target, in.seed, in.K, in.eta) + " det=" + fmt(det);
    });
  }
  return t.done("|det - 1| relative to tolerance 1e-9");
}

CheckResult check_linear_map_crosscheck(std::size_t n, std::uint64_t seed) {
  Tally t("linear_map_crosscheck");
  for (std::size_t i = 0; i < n; ++i) {
    const LeapfrogInstance in = leapfrog_instance(derive_seed(seed, i));
    const LinearLeapfrogMap m = gaussian_leapfrog_map(in.target, in.K, in.eta);
    const HmcProposal fwd = hmc_propose_from(in.target, in.q0, in.p0, in.K, in.eta);
    const Vector q = m.A * in.q0 + m.B * in.p0;
    const Vector p = m.C * in.q0 + m.D * in.p0;
    const double scale = 1.0 + std::max(fwd.qK.cwiseAbs().maxCoeff(),
                                        fwd.pK.cwiseAbs().maxCoeff());
    const double err = std::max((q - fwd.qK).cwiseAbs().maxCoeff(),
                                (p - fwd.pK).cwiseAbs().maxCoeff()) /
                       scale;
    t.record(1.0 - err / 1e-10, err <= 1e-10, [&] {
      return gaussian_case(in.target, in.seed, in.K, in.eta) + " error=" + fmt(err);
    });
  }
  return t.done("linear map versus composed leapfrog, tolerance 1e-10 relative");
}

CheckResult check_jacobian_bound(std::size_t n, std::uint64_t seed) {
  Tally t("jacobian_bound");
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t s = derive_seed(seed, i);
    Rng rng(s);
    const GaussianTarget g = random_gaussian_instance(rng);
    const int K = uniform_int(rng, 1, 32);
    const double eta =
        (0.05 + 0.95 * rng.uniform()) / (2.0 * K * std::sqrt(g.smoothness()));
    const JacobianReport r = verify_jacobian_bound(g, K, eta);
    const double ke = K * eta;
    const double margin =
        std::min((r.bound - r.norm_dev) / ke, (r.eig_min - 7.0 / 8.0 * ke) / ke);
    t.record(margin, r.holds, [&] {
      return gaussian_case(g, s, K, eta) + " norm_dev=" + fmt(r.norm_dev) +
             " eig_min=" + fmt(r.eig_min);
    });
  }
  return t.done("margins in units of K eta");
}

CheckResult check_proposal_overlap(std::size_t n, std::uint64_t seed) {
  Tally t("proposal_overlap");
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t s = derive_seed(seed, i);
    Rng rng(s);
    const GaussianTarget g = random_gaussian_instance(rng);
    const int K = uniform_int(rng, 1, 32);
    const double d = static_cast<double>(g.dim());
    const double eta = std::sqrt((0.05 + 0.95 * rng.uniform()) /
                                 (4.0 * std::sqrt(d) * g.smoothness() * K * K));
    const Vector q0 = rng.normal_vector(g.dim());
    const Vector q1 = q0 + (K * eta / 4.0) * rng.uniform() * random_unit(rng, g.dim());
    const double tv = gaussian_proposal_tv(g, q0, q1, K, eta);
    t.record(0.5 - tv, tv <= 0.5, [&] {
      return gaussian_case(g, s, K, eta) + " q0=" + fmt_vec(q0) +
             " q0_alt=" + fmt_vec(q1) + " tv=" + fmt(tv);
    });
  }
  return t.done("margin = 1/2 - TV");
}

CheckResult check_accept_distortion(std::size_t n, std::size_t n_mc,
                                    double strict_c, std::uint64_t seed) {
  Tally t("accept_distortion");
  std::size_t halvings = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t s = derive_seed(seed, i);
    Rng rng(s);
    const GaussianTarget g = random_gaussian_instance(rng);
    TuningRequest req;
    req.d = static_cast<int>(g.dim());
    req.kappa = g.condition_number();
    req.L = g.smoothness();
    req.constant_c = strict_c;
    req.k_multiplier = 1.0;
    req.start = StartKind::kWarm;
    const ParamChoice pc = select_hmc_params(req);
    double eta = pc.eta;
    for (int h = 0; h < 60 && !step_condition_for(req, pc.K, eta).holds; ++h) {
      eta *= 0.5;
      ++halvings;
    }
    const double s_warm = req.epsilon * req.epsilon / (3.0 * req.beta);
    const double radius = ball_radius(s_warm, req.d, g.strong_convexity());
    const Vector x = radius * random_unit(rng, g.dim());
    const DistortionEstimate e =
        accept_distortion_estimate(g, x, pc.K, eta, n_mc, rng);
    const double value = e.estimate + e.radius;
    t.record((0.125 - value) / 0.125, value <= 0.125, [&] {
      return gaussian_case(g, s, pc.K, eta) + " x=" + fmt_vec(x) +
             " estimate=" + fmt(e.estimate) + " radius=" + fmt(e.radius);
    });
  }
  return t.done("x on the boundary of the high-mass ball, c = " + fmt(strict_c) +
                ", n_mc = " + std::to_string(n_mc) + ", step halvings to meet the "
                "condition: " + std::to_string(halvings));
}

CheckResult check_flow_symmetry(std::size_t n, int max_states, std::uint64_t seed) {
  Tally t("flow_symmetry");
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t s = derive_seed(seed, i);
    const ChainInstance c = chain_for(s, max_states);
    Rng rng(derive_seed(s, 1));
    double worst = 0.0;
    for (int k = 0; k < 32; ++k) {
      StateSet S(static_cast<std::size_t>(c.chain.n()));
      bool any = false, all = true;
      for (auto&& b : S) {
        b = rng.uniform() < 0.5;
        any = any || b;
        all = all && b;
      }
      if (!any || all) continue;
      StateSet Sc(S.size());
      for (std::size_t j = 0; j < S.size(); ++j) Sc[j] = !S[j];
      worst = std::max(worst, std::fabs(flow(c.chain, S) - flow(c.chain, Sc)));
    }
    t.record(1.0 - worst / 1e-12, worst <= 1e-12,
             [&] { return chain_case(c, s) + " error=" + fmt(worst); });
  }
  return t.done("|flow(S) - flow(S^c)| relative to tolerance 1e-12");
}

CheckResult check_profile_relation(std::size_t n, int max_states,
                                   std::uint64_t seed) {
  Tally t("spectral_vs_conductance_profile");
  std::size_t gaps = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t s = derive_seed(seed, i);
    const ChainInstance c = chain_for(s, max_states);
    const StateSet omega(static_cast<std::size_t>(c.chain.n()), true);
    const double lo = c.chain.pi.minCoeff();
    std::vector<double> grid;
    const int points = 24;
    for (int k = 0; k < points; ++k) {
      grid.push_back(lo * std::pow(0.5 / lo, k / double(points - 1)));
    }
    grid.back() = 0.5;
    const ConductanceProfile cp = conductance_profile(c.chain, omega, grid);
    const SpectralProfile sp = spectral_profile(c.chain, omega, grid);
    double margin = kInf;
    bool ok = true;
    std::size_t bad = 0;
    for (std::size_t k = 0; k < grid.size(); ++k) {
      const double need = cp.phi[k] * cp.phi[k] / 4.0;
      if (!std::isfinite(need)) continue;
      const double have = sp.lambda[k];
      if (sp.constraint_gap[k]) ++gaps;
      margin = std::min(margin, (have - need) / std::max(need, 1e-300));
      if (have < need * (1.0 - 1e-9)) {
        ok = false;
        bad = k;
      }
    }
    t.record(margin, ok, [&] {
      return chain_case(c, s) + " v=" + fmt(grid[bad]) + " phi=" + fmt(cp.phi[bad]) +
             " lambda=" + fmt(sp.lambda[bad]);
    });
  }
  return t.done("margin = (Lambda - Phi^2/4) / (Phi^2/4); grid points where the "
                "indicator bound differs from the eigenvalue: " + std::to_string(gaps));
}

CheckResult check_mixing_bound(std::size_t n, int max_states, std::uint64_t seed) {
  Tally t("profile_mixing_bound");
  for (std::size_t i = 0; i < n; ++i) {
    const std::uint64_t s = derive_seed(seed, i);
    const ChainInstance c = chain_for(s, max_states);
    for (double beta : {2.0, 8.0}) {
      for (double eps : {0.1, 0.01}) {
        const Lemma1Report r = verify_lemma1(c.chain, beta, eps, 0.5);
        const double margin =
            r.bound_infinite ? 1.0 : (r.bound - r.exact) / std::max(r.bound, 1e-300);
        t.record(margin, r.holds, [&] {
          return chain_case(c, s) + " beta=" + fmt(beta) + " epsilon=" + fmt(eps) +
                 " bound=" + fmt(r.bound) + " exact=" + fmt(r.exact);
        });
      }
    }
  }
  return t.done("instances are (chain, beta, epsilon) triples; margin = "
                "(bound - exact) / bound");
}

bool TheoryReport::passed() const {
  return std::all_of(checks.begin(), checks.end(),
                     [](const CheckResult& c) { return c.passed(); });
}

std::string TheoryReport::to_text() const {
  std::ostringstream o;
  o << "theory suite seed=" << seed << " mode=" << (quick ? "quick" : "full") << "\n";
  for (const auto& c : checks) {
    o << (c.passed() ? "PASS " : "FAIL ") << c.name << " instances=" << c.instances
      << " failures=" << c.failures << " worst_margin=" << fmt(c.worst_margin) << "\n";
    if (!c.note.empty()) o << "  note: " << c.note << "\n";
    if (!c.failing_instance.empty()) o << "  failing_instance: " << c.failing_instance << "\n";
  }
  o << "overall: " << (passed() ? "PASS" : "FAIL") << "\n";
  return o.str();
}

TheoryReport run_theory_suite(const TheorySuiteOptions& opts) {
  TheoryReport rep;
  rep.seed = opts.seed;
  rep.quick = opts.quick;
  const std::size_t f = opts.quick ? 5 : 1;
  const int states = opts.quick ? 8 : 12;
  auto sub = [&](std::uint64_t k) { return derive_seed(opts.seed, k); };
  rep.checks.push_back(check_mala_hmc_equivalence(1000 / f, sub(1)));
  rep.checks.push_back(check_leapfrog_reversibility(100 / f, sub(2)));
  rep.checks.push_back(check_leapfrog_symplectic(100 / f, sub(3)));
  rep.checks.push_back(check_linear_map_crosscheck(100 / f, sub(4)));
  rep.checks.push_back(check_jacobian_bound(100 / f, sub(5)));
  rep.checks.push_back(check_proposal_overlap(200 / f, sub(6)));
  rep.checks.push_back(
      check_accept_distortion(20 / f, opts.quick ? 2000 : 10000, opts.strict_c, sub(7)));
  rep.checks.push_back(check_flow_symmetry(50 / f, states, sub(8)));
  rep.checks.push_back(check_profile_relation(50 / f, states, sub(9)));
  rep.checks.push_back(check_mixing_bound(50 / f, states, sub(10)));
  return rep;
}

}  // namespace hmcmix
