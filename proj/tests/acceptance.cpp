#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "hmcmix/config.hpp"
#include "hmcmix/harness.hpp"
#include "hmcmix/suite.hpp"

using namespace hmcmix;

namespace {

struct Range {
  double lo, hi;
};

int g_failed = 0;

void line(int id, bool ok, const std::string& what, const std::string& detail) {
  std::printf("criterion %d: %s  %s  %s\n", id, ok ? "PASS" : "FAIL", what.c_str(),
              detail.c_str());
  std::fflush(stdout);
  if (!ok) ++g_failed;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

int workers() {
  const unsigned n = std::thread::hardware_concurrency();
  return n == 0 ? 1 : static_cast<int>(n);
}

ExperimentSpec scaling_spec(bool power) {
  ExperimentSpec s;
  s.d_grid = {2, 4, 8, 16, 32, 64};
  s.replicas = 25;
  s.repeats = 3;
  s.delta = 0.04;
  s.constants.c = 1.0;
  s.constants.k_multiplier = 4.0;
  if (power) {
    s.kappa_rule.kind = KappaRule::Kind::kPowerOfD;
    s.kappa_rule.value = 2.0 / 3.0;
  } else {
    s.kappa_rule.kind = KappaRule::Kind::kConstant;
    s.kappa_rule.value = 4.0;
  }
  s.workers = workers();
  return s;
}

ExperimentResult slopes(int id, bool power, const std::map<StudySampler, Range>& ranges,
                        double budget_s) {
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentResult r = run_scaling_experiment(scaling_spec(power));
  const double secs = seconds_since(t0);
  bool ok = secs <= budget_s;
  std::ostringstream o;
  for (const FitRow& f : r.fits) {
    const Range rg = ranges.at(f.sampler);
    o << study_sampler_name(f.sampler) << "=";
    if (f.fit) {
      const bool in = f.fit->slope >= rg.lo && f.fit->slope <= rg.hi;
      ok = ok && in;
      char buf[96];
      std::snprintf(buf, sizeof buf, "%.3f(+-%.3f)%s[%.2f,%.2f] ", f.fit->slope,
                    f.fit->stderr_slope, in ? " in " : " outside ", rg.lo, rg.hi);
      o << buf;
    } else {
      ok = false;
      o << "no-fit ";
    }
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "runtime=%.1fs", secs);
  o << buf;
  line(id, ok, power ? "slopes kappa=d^(2/3)" : "slopes kappa=4", o.str());
  return r;
}

std::string check_detail(const CheckResult& c) {
  std::ostringstream o;
  o << c.name << " instances=" << c.instances << " failures=" << c.failures
    << " worst_margin=" << format_double(c.worst_margin);
  if (!c.note.empty()) o << " note=" << c.note;
  return o.str();
}

void from_checks(int id, const std::string& what, const std::vector<CheckResult>& checks,
                 std::size_t want_instances, double elapsed = -1, double budget = -1) {
  bool ok = true;
  std::string detail;
  for (const CheckResult& c : checks) {
    ok = ok && c.passed() && c.instances >= want_instances;
    if (!detail.empty()) detail += "; ";
    detail += check_detail(c);
    if (!c.failing_instance.empty()) std::printf("  failing instance: %s\n", c.failing_instance.c_str());
  }
  if (budget > 0) {
    ok = ok && elapsed <= budget;
    char buf[48];
    std::snprintf(buf, sizeof buf, "; runtime=%.1fs", elapsed);
    detail += buf;
  }
  line(id, ok, what, detail);
}

}  // namespace

int main() {
  const std::uint64_t seed = 20190101;

  const ExperimentResult k4 =
      slopes(1, false,
             {{StudySampler::kHmc, {0.55, 1.05}},
              {StudySampler::kMala, {0.68, 1.18}},
              {StudySampler::kMrw, {0.71, 1.21}},
              {StudySampler::kHmcAgg, {0.30, 0.90}}},
             600.0);
  slopes(2, true,
         {{StudySampler::kHmc, {1.30, 1.90}},
          {StudySampler::kHmcAgg, {0.95, 1.75}},
          {StudySampler::kMala, {1.34, 1.94}},
          {StudySampler::kMrw, {1.90, 2.60}}},
         900.0);

  {
    std::map<StudySampler, std::map<int, double>> means;
    for (StudySampler s : {StudySampler::kHmc, StudySampler::kMala, StudySampler::kMrw}) {
      for (const auto& [d, y] : fit_points(k4, s)) means[s][static_cast<int>(d)] = y;
    }
    bool ok = true;
    std::ostringstream o;
    for (int d : {16, 32, 64}) {
      const auto h = means[StudySampler::kHmc].find(d);
      const auto a = means[StudySampler::kMala].find(d);
      const auto w = means[StudySampler::kMrw].find(d);
      const bool have = h != means[StudySampler::kHmc].end() &&
                        a != means[StudySampler::kMala].end() &&
                        w != means[StudySampler::kMrw].end();
      const bool good = have && h->second < a->second && a->second < w->second;
      ok = ok && good;
      o << "d=" << d << ":";
      if (have) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%.0f<%.0f<%.0f ", h->second, a->second, w->second);
        o << buf;
      } else {
        o << "missing ";
      }
    }
    line(3, ok, "eval ordering HMC<MALA<MRW for d>=16", o.str());
  }

  from_checks(4, "MALA equals HMC(K=1)", {check_mala_hmc_equivalence(1000, seed)}, 1000);
  from_checks(5, "leapfrog reversibility and unit determinant",
              {check_leapfrog_reversibility(100, seed), check_leapfrog_symplectic(100, seed)},
              100);
  from_checks(6, "Jacobian bound", {check_jacobian_bound(100, seed)}, 100);
  from_checks(7, "proposal overlap TV<=1/2", {check_proposal_overlap(200, seed)}, 200);
  from_checks(8, "acceptance distortion <=1/8 (c=2000)",
              {check_accept_distortion(20, 10000, 2000.0, seed)}, 20);
  {
    const auto t0 = std::chrono::steady_clock::now();
    CheckResult a = check_profile_relation(50, 12, seed);
    CheckResult b = check_mixing_bound(50, 12, seed);
    from_checks(9, "discrete-chain profile relation and mixing bound", {a, b}, 50,
                seconds_since(t0), 120.0);
  }

  {
    const std::vector<double> s{1.0, 2.0};
    const GaussianTarget t = gaussian_from_spectrum(s);
    RunSpec run;
    run.sampler = "hmc";
    run.iterations = 200000;
    run.start = "feasible";
    run.seed = seed;
    const RunSummary r = run_single(run, t);
    const double rate = r.accept_rate.value_or(0.0);
    const bool ok = r.covariance_rel_error <= 0.10 && rate >= 0.4 && rate <= 0.99;
    char buf[160];
    std::snprintf(buf, sizeof buf, "K=%d eta=%.4f cov_rel_frobenius=%.4f accept=%.4f", r.K, r.eta,
                  r.covariance_rel_error, rate);
    line(10, ok, "stationarity 2D kappa=4", buf);
  }

  std::printf("acceptance: %d of 10 criteria failed\n", g_failed);
  return g_failed == 0 ? 0 : 1;
}
