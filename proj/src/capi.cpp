#include "hmcmix/hmcmix.h"

#include <cstring>
#include <memory>
#include <new>
#include <string>
#include <vector>

#include "hmcmix/config.hpp"
#include "hmcmix/harness.hpp"
#include "hmcmix/suite.hpp"

using namespace hmcmix;

struct hmcmix_text {
  std::string value;
};

struct hmcmix_target {
  GaussianTarget target;
};

struct hmcmix_trace {
  ChainTrace trace;
};

struct hmcmix_experiment {
  ExperimentSpec spec;
  std::optional<ExperimentResult> result;
};

struct hmcmix_theory_report {
  TheoryReport report;
};

namespace {

thread_local std::string g_last_error;

hmcmix_status to_status(ErrorCode code) {
  return static_cast<hmcmix_status>(static_cast<int>(code));
}

template <typename F>
hmcmix_status guarded(F&& body) {
  try {
    body();
    g_last_error.clear();
    return HMCMIX_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return HMCMIX_E_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return HMCMIX_E_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  require(p != nullptr, ErrorCode::kInvalidArgument, std::string(what) + " is NULL");
}

hmcmix_text* make_text(std::string s) { return new hmcmix_text{std::move(s)}; }

TuningRequest to_request(const hmcmix_tune_request& r) {
  TuningRequest q;
  q.d = r.d;
  q.kappa = r.kappa;
  q.L = r.L;
  q.L_H = r.L_H;
  q.epsilon = r.epsilon;
  q.beta = r.beta;
  q.start = r.start == HMCMIX_START_FEASIBLE ? StartKind::kFeasible : StartKind::kWarm;
  q.constant_c = r.constant_c;
  q.k_multiplier = r.k_multiplier;
  return q;
}

void copy_string(char* dst, std::size_t cap, const std::string& src) {
  std::strncpy(dst, src.c_str(), cap - 1);
  dst[cap - 1] = '\0';
}

const ExperimentResult& finished(const hmcmix_experiment* exp) {
  need(exp, "experiment");
  require(exp->result.has_value(), ErrorCode::kPrecondition,
          "experiment has not been run yet");
  return *exp->result;
}

}  // namespace

extern "C" {

const char* hmcmix_version(void) { return HMCMIX_VERSION_STRING; }

const char* hmcmix_status_name(hmcmix_status s) {
  switch (s) {
    case HMCMIX_OK: return "ok";
    case HMCMIX_E_INVALID_ARGUMENT: return "invalid_argument";
    case HMCMIX_E_INVALID_SPECTRUM: return "invalid_spectrum";
    case HMCMIX_E_INVALID_BASIS: return "invalid_basis";
    case HMCMIX_E_DIMENSION_MISMATCH: return "dimension_mismatch";
    case HMCMIX_E_NUMERICAL_DIVERGENCE: return "numerical_divergence";
    case HMCMIX_E_DOMAIN: return "domain";
    case HMCMIX_E_CONFIG: return "config";
    case HMCMIX_E_IO: return "io";
    case HMCMIX_E_PRECONDITION: return "precondition";
    case HMCMIX_E_SINGULAR_COVARIANCE: return "singular_covariance";
    case HMCMIX_E_INTERNAL: return "internal";
  }
  return "unknown";
}

const char* hmcmix_last_error(void) { return g_last_error.c_str(); }

const char* hmcmix_text_str(const hmcmix_text* text) {
  return text ? text->value.c_str() : "";
}

void hmcmix_text_free(hmcmix_text* text) { delete text; }

hmcmix_status hmcmix_target_gaussian(const double* sqrt_eigs, size_t d,
                                     const double* basis, hmcmix_target** out) {
  return guarded([&] {
    need(sqrt_eigs, "sqrt_eigs");
    need(out, "out");
    *out = nullptr;
    const std::vector<double> s(sqrt_eigs, sqrt_eigs + d);
    if (basis) {
      const auto n = static_cast<Eigen::Index>(d);
      Matrix q(n, n);
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) q(i, j) = basis[i * n + j];
      }
      *out = new hmcmix_target{gaussian_from_spectrum(s, &q)};
    } else {
      *out = new hmcmix_target{gaussian_from_spectrum(s)};
    }
  });
}

hmcmix_status hmcmix_target_from_config(const char* path, hmcmix_target** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    const Config cfg = load_config(path);
    require(cfg.target.has_value(), ErrorCode::kConfig,
            std::string("config '") + path + "' has no [target] section");
    *out = new hmcmix_target{build_target(*cfg.target)};
  });
}

void hmcmix_target_free(hmcmix_target* target) { delete target; }

size_t hmcmix_target_dim(const hmcmix_target* target) {
  return target ? static_cast<size_t>(target->target.dim()) : 0;
}

hmcmix_status hmcmix_target_constants(const hmcmix_target* target, double* L, double* m,
                                      double* kappa) {
  return guarded([&] {
    need(target, "target");
    if (L) *L = target->target.smoothness();
    if (m) *m = target->target.strong_convexity();
    if (kappa) *kappa = target->target.condition_number();
  });
}

hmcmix_status hmcmix_target_potential(const hmcmix_target* target, const double* x,
                                      double* f) {
  return guarded([&] {
    need(target, "target");
    need(x, "x");
    need(f, "f");
    const Vector v = Eigen::Map<const Vector>(x, target->target.dim());
    *f = eval_potential(target->target, v);
  });
}

hmcmix_status hmcmix_target_gradient(const hmcmix_target* target, const double* x,
                                     double* grad) {
  return guarded([&] {
    need(target, "target");
    need(x, "x");
    need(grad, "grad");
    const Vector v = Eigen::Map<const Vector>(x, target->target.dim());
    Eigen::Map<Vector>(grad, target->target.dim()) = eval_grad(target->target, v);
  });
}

void hmcmix_tune_request_default(hmcmix_tune_request* req) {
  if (!req) return;
  *req = hmcmix_tune_request{1, 1.0, 1.0, 0.0, 0.1, 1.0, HMCMIX_START_WARM, 1.0, 1.0, 0.1, 0.1};
}

hmcmix_status hmcmix_tune(const hmcmix_tune_request* req, const char* sampler,
                          hmcmix_param_choice* out) {
  return guarded([&] {
    need(req, "req");
    need(sampler, "sampler");
    need(out, "out");
    const TuneOutput t = run_tune(to_request(*req), sampler, req->c1, req->c2);
    out->K = t.choice.K;
    out->eta = t.choice.eta;
    out->satisfies_conditions = t.choice.satisfies_conditions ? 1 : 0;
    copy_string(out->regime, sizeof out->regime, std::string(regime_name(t.choice.regime)));
  });
}

hmcmix_status hmcmix_tune_report(const hmcmix_tune_request* req, const char* sampler,
                                 int format, hmcmix_text** out) {
  return guarded([&] {
    need(req, "req");
    need(sampler, "sampler");
    need(out, "out");
    *out = nullptr;
    require(format >= 0 && format <= 2, ErrorCode::kInvalidArgument,
            "tune report: format must be 0, 1 or 2");
    const TuneOutput t = run_tune(to_request(*req), sampler, req->c1, req->c2);
    std::string s;
    if (format != 1) s += format_tune_human(t);
    if (format == 2) s += "\n";
    if (format != 0) s += format_tune_kv(t);
    *out = make_text(std::move(s));
  });
}

void hmcmix_chain_config_default(hmcmix_chain_config* cfg) {
  if (!cfg) return;
  *cfg = hmcmix_chain_config{HMCMIX_SAMPLER_HMC, 0.1, 1, 0.0, 0, 0, 0.5};
}

hmcmix_status hmcmix_feasible_init(const hmcmix_target* target, uint64_t seed,
                                   double* out) {
  return guarded([&] {
    need(target, "target");
    need(out, "out");
    Rng rng(seed);
    Eigen::Map<Vector>(out, target->target.dim()) =
        sample_init(InitKind::kGaussianFeasible, target->target, rng);
  });
}

hmcmix_status hmcmix_run_chain(const hmcmix_target* target, const hmcmix_chain_config* cfg,
                               const double* init, size_t n_iters, hmcmix_trace** out) {
  return guarded([&] {
    need(target, "target");
    need(cfg, "cfg");
    need(init, "init");
    need(out, "out");
    *out = nullptr;
    ChainConfig c;
    require(cfg->sampler >= HMCMIX_SAMPLER_MRW && cfg->sampler <= HMCMIX_SAMPLER_HMC,
            ErrorCode::kInvalidArgument, "chain config: unknown sampler");
    c.sampler = cfg->sampler == HMCMIX_SAMPLER_MRW    ? SamplerKind::kMrw
                : cfg->sampler == HMCMIX_SAMPLER_MALA ? SamplerKind::kMala
                                                      : SamplerKind::kHmc;
    c.step = cfg->step;
    c.leapfrog_steps = cfg->leapfrog_steps;
    c.laziness = cfg->laziness;
    c.seed = cfg->seed;
    c.accounting = cfg->uncached_gradients ? GradientAccounting::kUncached
                                           : GradientAccounting::kCached;
    c.max_divergence_fraction = cfg->max_divergence_fraction;
    const Vector x0 = Eigen::Map<const Vector>(init, target->target.dim());
    *out = new hmcmix_trace{run_chain(target->target, c, x0, n_iters)};
  });
}

void hmcmix_trace_free(hmcmix_trace* trace) { delete trace; }

size_t hmcmix_trace_iterations(const hmcmix_trace* trace) {
  return trace ? trace->trace.iterations() : 0;
}

hmcmix_status hmcmix_trace_state(const hmcmix_trace* trace, size_t index, double* out) {
  return guarded([&] {
    need(trace, "trace");
    need(out, "out");
    require(index < trace->trace.states.size(), ErrorCode::kInvalidArgument,
            "trace state index out of range");
    const Vector& x = trace->trace.states[index];
    Eigen::Map<Vector>(out, x.size()) = x;
  });
}

hmcmix_status hmcmix_trace_accepted(const hmcmix_trace* trace, size_t index, int* accepted,
                                    int* lazy_hold) {
  return guarded([&] {
    need(trace, "trace");
    require(index < trace->trace.iterations(), ErrorCode::kInvalidArgument,
            "trace iteration index out of range");
    if (accepted) *accepted = trace->trace.accepted[index] ? 1 : 0;
    if (lazy_hold) *lazy_hold = trace->trace.lazy_hold[index] ? 1 : 0;
  });
}

hmcmix_status hmcmix_trace_counters(const hmcmix_trace* trace, hmcmix_counters* out) {
  return guarded([&] {
    need(trace, "trace");
    need(out, "out");
    out->grad_evals = trace->trace.counters.grad_evals;
    out->fn_evals = trace->trace.counters.fn_evals;
    out->divergences = trace->trace.counters.divergences;
    out->eval_count = trace->trace.eval_count_paper();
  });
}

hmcmix_status hmcmix_trace_acceptance_rate(const hmcmix_trace* trace, double* rate,
                                           int* defined) {
  return guarded([&] {
    need(trace, "trace");
    need(rate, "rate");
    need(defined, "defined");
    const auto r = acceptance_rate(trace->trace);
    *defined = r ? 1 : 0;
    *rate = r.value_or(0.0);
  });
}

void hmcmix_run_options_default(hmcmix_run_options* opts) {
  if (!opts) return;
  const RunSpec r;
  std::memset(opts, 0, sizeof *opts);
  copy_string(opts->sampler, sizeof opts->sampler, r.sampler);
  copy_string(opts->start, sizeof opts->start, r.start);
  opts->iterations = r.iterations;
  opts->step = 0.0;
  opts->leapfrog_steps = 0;
  opts->laziness = r.laziness;
  opts->seed = r.seed;
  opts->epsilon = r.epsilon;
  opts->beta = r.beta;
  opts->constant_c = r.c;
  opts->k_multiplier = r.k_multiplier;
}

hmcmix_status hmcmix_run_options_from_config(const char* path, hmcmix_run_options* opts) {
  return guarded([&] {
    need(path, "path");
    need(opts, "opts");
    const Config cfg = load_config(path);
    if (!cfg.run) return;
    const RunSpec& r = *cfg.run;
    copy_string(opts->sampler, sizeof opts->sampler, r.sampler);
    copy_string(opts->start, sizeof opts->start, r.start);
    opts->iterations = r.iterations;
    if (r.step) opts->step = *r.step;
    if (r.leapfrog_steps) opts->leapfrog_steps = *r.leapfrog_steps;
    opts->laziness = r.laziness;
    opts->seed = r.seed;
    opts->epsilon = r.epsilon;
    opts->beta = r.beta;
    opts->constant_c = r.c;
    opts->k_multiplier = r.k_multiplier;
  });
}

hmcmix_status hmcmix_run_summary(const hmcmix_target* target, const hmcmix_run_options* opts,
                                 hmcmix_text** out) {
  return guarded([&] {
    need(target, "target");
    need(opts, "opts");
    need(out, "out");
    *out = nullptr;
    RunSpec r;
    r.sampler = opts->sampler;
    r.start = opts->start;
    r.iterations = opts->iterations;
    if (opts->step > 0) r.step = opts->step;
    if (opts->leapfrog_steps > 0) r.leapfrog_steps = opts->leapfrog_steps;
    r.laziness = opts->laziness;
    r.seed = opts->seed;
    r.epsilon = opts->epsilon;
    r.beta = opts->beta;
    r.c = opts->constant_c;
    r.k_multiplier = opts->k_multiplier;
    *out = make_text(format_run_summary(run_single(r, target->target)));
  });
}

namespace {

hmcmix_status experiment_from(const Config& cfg, hmcmix_experiment** out) {
  require(cfg.experiment.has_value(), ErrorCode::kConfig,
          "config has no [experiment] section");
  *out = new hmcmix_experiment{*cfg.experiment, std::nullopt};
  return HMCMIX_OK;
}

}  // namespace

hmcmix_status hmcmix_experiment_from_config(const char* path, hmcmix_experiment** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    experiment_from(load_config(path), out);
  });
}

hmcmix_status hmcmix_experiment_from_text(const char* text, hmcmix_experiment** out) {
  return guarded([&] {
    need(text, "text");
    need(out, "out");
    *out = nullptr;
    experiment_from(parse_config_text(text), out);
  });
}

void hmcmix_experiment_free(hmcmix_experiment* exp) { delete exp; }

hmcmix_status hmcmix_experiment_set_seed(hmcmix_experiment* exp, uint64_t seed) {
  return guarded([&] {
    need(exp, "experiment");
    exp->spec.base_seed = seed;
  });
}

hmcmix_status hmcmix_experiment_set_output_dir(hmcmix_experiment* exp, const char* dir) {
  return guarded([&] {
    need(exp, "experiment");
    need(dir, "dir");
    exp->spec.output_dir = dir;
  });
}

hmcmix_status hmcmix_experiment_set_workers(hmcmix_experiment* exp, int workers) {
  return guarded([&] {
    need(exp, "experiment");
    require(workers >= 1, ErrorCode::kInvalidArgument, "workers must be >= 1");
    exp->spec.workers = workers;
  });
}

hmcmix_status hmcmix_experiment_set_constant_c(hmcmix_experiment* exp, double c) {
  return guarded([&] {
    need(exp, "experiment");
    require(c > 0, ErrorCode::kInvalidArgument, "constant c must be > 0");
    exp->spec.constants.c = c;
  });
}

hmcmix_status hmcmix_experiment_run(hmcmix_experiment* exp, hmcmix_progress_fn progress,
                                    void* user) {
  return guarded([&] {
    need(exp, "experiment");
    ProgressFn fn;
    if (progress) {
      fn = [progress, user](const RawRow& r) {
        progress(study_sampler_name(r.sampler).c_str(), r.d, r.repeat,
                 r.mixing_iters ? 1 : 0, r.eval_count.value_or(0.0), user);
      };
    }
    exp->result = run_scaling_experiment(exp->spec, fn);
  });
}

hmcmix_status hmcmix_experiment_emit(const hmcmix_experiment* exp, const char* dir) {
  return guarded([&] {
    const ExperimentResult& r = finished(exp);
    emit_report(r, dir ? std::string(dir) : r.spec.output_dir);
  });
}

hmcmix_status hmcmix_experiment_fit(const hmcmix_experiment* exp, const char* sampler,
                                    double* slope, double* stderr_slope, size_t* n_points,
                                    int* available) {
  return guarded([&] {
    const ExperimentResult& r = finished(exp);
    need(sampler, "sampler");
    need(available, "available");
    const StudySampler s = parse_study_sampler(sampler);
    *available = 0;
    for (const auto& f : r.fits) {
      if (f.sampler != s || !f.fit) continue;
      *available = 1;
      if (slope) *slope = f.fit->slope;
      if (stderr_slope) *stderr_slope = f.fit->stderr_slope;
      if (n_points) *n_points = f.fit->n_points;
    }
  });
}

hmcmix_status hmcmix_experiment_mean_evals(const hmcmix_experiment* exp, const char* sampler,
                                           int d, double* mean, int* available) {
  return guarded([&] {
    const ExperimentResult& r = finished(exp);
    need(sampler, "sampler");
    need(mean, "mean");
    need(available, "available");
    *available = 0;
    for (const auto& [x, y] : fit_points(r, parse_study_sampler(sampler))) {
      if (static_cast<int>(x) == d) {
        *available = 1;
        *mean = y;
      }
    }
  });
}

hmcmix_status hmcmix_experiment_text(const hmcmix_experiment* exp, const char* name,
                                     hmcmix_text** out) {
  return guarded([&] {
    const ExperimentResult& r = finished(exp);
    need(name, "name");
    need(out, "out");
    *out = nullptr;
    const std::string n = name;
    if (n == "raw.csv") {
      *out = make_text(raw_csv(r));
    } else if (n == "fits.csv") {
      *out = make_text(fits_csv(r));
    } else if (n == "manifest.txt") {
      *out = make_text(manifest_text(r));
    } else if (n == "warnings") {
      std::string s;
      for (const auto& w : r.warnings) s += w + "\n";
      *out = make_text(std::move(s));
    } else {
      fail(ErrorCode::kInvalidArgument, "unknown experiment text '" + n + "'");
    }
  });
}

hmcmix_status hmcmix_theory_run(int quick, uint64_t seed, double strict_c,
                                hmcmix_theory_report** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    require(strict_c > 0, ErrorCode::kInvalidArgument, "strict_c must be > 0");
    TheorySuiteOptions o;
    o.quick = quick != 0;
    o.seed = seed;
    o.strict_c = strict_c;
    *out = new hmcmix_theory_report{run_theory_suite(o)};
  });
}

void hmcmix_theory_free(hmcmix_theory_report* report) { delete report; }

int hmcmix_theory_passed(const hmcmix_theory_report* report) {
  return report && report->report.passed() ? 1 : 0;
}

size_t hmcmix_theory_check_count(const hmcmix_theory_report* report) {
  return report ? report->report.checks.size() : 0;
}

hmcmix_status hmcmix_theory_check(const hmcmix_theory_report* report, size_t index,
                                  hmcmix_check_info* out) {
  return guarded([&] {
    need(report, "report");
    need(out, "out");
    require(index < report->report.checks.size(), ErrorCode::kInvalidArgument,
            "check index out of range");
    const CheckResult& c = report->report.checks[index];
    out->name = c.name.c_str();
    out->instances = c.instances;
    out->failures = c.failures;
    out->worst_margin = c.worst_margin;
    out->failing_instance = c.failing_instance.c_str();
    out->note = c.note.c_str();
  });
}

hmcmix_status hmcmix_theory_text(const hmcmix_theory_report* report, hmcmix_text** out) {
  return guarded([&] {
    need(report, "report");
    need(out, "out");
    *out = make_text(report->report.to_text());
  });
}

}  // extern "C"
