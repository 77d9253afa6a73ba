#include "hmcmix/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>

#include "hmcmix/normal.hpp"

namespace hmcmix {

namespace {

constexpr std::size_t kBlockRows = 256;

std::string fmt(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

SamplerKind chain_kind(StudySampler s) {
  switch (s) {
    case StudySampler::kMrw: return SamplerKind::kMrw;
    case StudySampler::kMala: return SamplerKind::kMala;
    default: return SamplerKind::kHmc;
  }
}

std::string key_of(StudySampler s, int d) {
  return study_sampler_name(s) + ".d" + std::to_string(d);
}

}  // namespace

GaussianTarget study_target(const ExperimentSpec& spec, int d, int repeat) {
  const double kappa = spec.kappa_rule.at(d);
  const std::vector<double> s = linear_spacing(
      spec.sqrt_eig_min, spec.sqrt_eig_min * std::sqrt(kappa),
      static_cast<std::size_t>(d));
  if (spec.basis == BasisKind::kRandomOrthonormal) {
    const std::uint64_t seed = derive_seed(derive_seed(spec.base_seed, 0xB0515ULL),
                                           static_cast<std::uint64_t>(d) * 1000003ULL +
                                               static_cast<std::uint64_t>(repeat));
    const Matrix q = random_orthonormal(d, seed);
    return gaussian_from_spectrum(s, &q);
  }
  return gaussian_from_spectrum(s);
}

CellParams tune_cell(const ExperimentSpec& spec, StudySampler sampler, int d) {
  CellParams p;
  p.sampler = sampler;
  p.d = d;
  p.kappa = spec.kappa_rule.at(d);
  const double L = 1.0 / (spec.sqrt_eig_min * spec.sqrt_eig_min);
  TuningRequest req;
  req.d = d;
  // The spectrum's endpoints fix kappa; recompute it the same way the target does.
  const double top = spec.sqrt_eig_min * std::sqrt(p.kappa);
  req.kappa = d == 1 ? 1.0 : (top / spec.sqrt_eig_min) * (top / spec.sqrt_eig_min);
  req.L = L;
  req.epsilon = spec.epsilon;
  req.beta = spec.beta;
  req.start = StartKind::kWarm;
  req.constant_c = spec.constants.c;
  req.k_multiplier = spec.constants.k_multiplier;
  ParamChoice choice;
  switch (sampler) {
    case StudySampler::kHmc: choice = select_hmc_params(req); break;
    case StudySampler::kHmcAgg: choice = select_hmcagg_params(req); break;
    case StudySampler::kMala:
    case StudySampler::kMrw: {
      const MalaMrwSteps st =
          mala_mrw_steps(d, req.kappa, L, spec.constants.c1, spec.constants.c2);
      choice.K = 1;
      choice.eta = sampler == StudySampler::kMala ? st.eta_mala : st.eta_mrw;
      choice.regime = sampler == StudySampler::kMala ? Regime::kMalaThm3 : Regime::kMrwThm3;
      choice.satisfies_conditions = true;
      break;
    }
  }
  p.K = choice.K;
  p.eta = choice.eta;
  p.regime = std::string(regime_name(choice.regime));
  p.satisfies_conditions = choice.satisfies_conditions;
  return p;
}

std::uint64_t replica_seed(const ExperimentSpec& spec, StudySampler sampler, int d,
                           int repeat, int replica) {
  std::uint64_t s = derive_seed(spec.base_seed, static_cast<std::uint64_t>(sampler) + 1);
  s = derive_seed(s, static_cast<std::uint64_t>(d));
  s = derive_seed(s, static_cast<std::uint64_t>(repeat));
  return derive_seed(s, static_cast<std::uint64_t>(replica));
}

RawRow run_cell(const ExperimentSpec& spec, const CellParams& params,
                const GaussianTarget& target, int repeat) {
  RawRow row;
  row.sampler = params.sampler;
  row.d = params.d;
  row.kappa = params.kappa;
  row.repeat = repeat;

  const Vector dir = target.max_variance_direction();
  QuantileSpec q;
  q.level = spec.level;
  q.delta = spec.delta;
  q.direction = dir;
  q.truth = gaussian_projected_truth(target, dir, spec.level);

  const int R = spec.replicas;
  std::vector<Chain> chains;
  chains.reserve(static_cast<std::size_t>(R));
  std::vector<double> proj(static_cast<std::size_t>(R));
  for (int r = 0; r < R; ++r) {
    const std::uint64_t seed = replica_seed(spec, params.sampler, params.d, repeat, r);
    Rng init_rng(derive_seed(seed, 0x1417ULL));
    Vector init = sample_init(InitKind::kGaussianFeasible, target, init_rng);
    proj[static_cast<std::size_t>(r)] = dir.dot(init);
    ChainConfig cfg;
    cfg.sampler = chain_kind(params.sampler);
    cfg.step = params.eta;
    cfg.leapfrog_steps = params.K;
    cfg.laziness = spec.laziness;
    cfg.seed = seed;
    chains.emplace_back(target, cfg, std::move(init));
  }

  auto finish = [&](bool aborted) {
    std::uint64_t acc = 0, nl = 0;
    for (const auto& c : chains) {
      acc += c.accepted();
      nl += c.non_lazy();
      row.diverged += c.counters().divergences;
    }
    if (nl > 0) row.accept_rate = static_cast<double>(acc) / static_cast<double>(nl);
    if (aborted) {
      row.mixing_iters.reset();
      row.eval_count.reset();
    }
    return row;
  };

  if (quantile_error(proj, q) < q.delta) {
    row.mixing_iters = 0;
    row.eval_count = 0.0;
    return finish(false);
  }

  Matrix block_proj(static_cast<Eigen::Index>(kBlockRows), R);
  Matrix block_evals(static_cast<Eigen::Index>(kBlockRows), R);
  std::vector<char> failed(static_cast<std::size_t>(R), 0);
  const int workers = std::max(1, std::min(spec.workers, R));
  std::size_t done = 0;
  while (done < spec.max_iters) {
    const std::size_t rows = std::min(kBlockRows, spec.max_iters - done);
    auto work = [&](int w) {
      for (int r = w; r < R; r += workers) {
        Chain& c = chains[static_cast<std::size_t>(r)];
        try {
          for (std::size_t b = 0; b < rows; ++b) {
            c.step();
            const auto bi = static_cast<Eigen::Index>(b);
            block_proj(bi, r) = dir.dot(c.state());
            block_evals(bi, r) = static_cast<double>(c.eval_count_paper());
          }
        } catch (const Error& e) {
          if (e.code() != ErrorCode::kNumericalDivergence) throw;
          failed[static_cast<std::size_t>(r)] = 1;
        }
      }
    };
    if (workers == 1) {
      work(0);
    } else {
      std::vector<std::thread> pool;
      for (int w = 0; w < workers; ++w) pool.emplace_back(work, w);
      for (auto& t : pool) t.join();
    }
    if (std::any_of(failed.begin(), failed.end(), [](char f) { return f != 0; })) {
      return finish(true);
    }
    for (std::size_t b = 0; b < rows; ++b) {
      const auto bi = static_cast<Eigen::Index>(b);
      for (int r = 0; r < R; ++r) proj[static_cast<std::size_t>(r)] = block_proj(bi, r);
      if (quantile_error(proj, q) < q.delta) {
        row.mixing_iters = done + b + 1;
        row.eval_count = block_evals.row(bi).mean();
        return finish(false);
      }
    }
    done += rows;
  }
  return finish(false);
}

std::vector<std::pair<double, double>> fit_points(const ExperimentResult& result,
                                                  StudySampler sampler) {
  std::map<int, std::pair<double, int>> acc;
  for (const auto& r : result.rows) {
    if (r.sampler != sampler || !r.eval_count) continue;
    auto& a = acc[r.d];
    a.first += *r.eval_count;
    a.second += 1;
  }
  std::vector<std::pair<double, double>> pts;
  for (const auto& [d, a] : acc) {
    const double mean = a.first / a.second;
    if (mean > 0) pts.emplace_back(static_cast<double>(d), mean);
  }
  return pts;
}

ExperimentResult run_scaling_experiment(const ExperimentSpec& spec,
                                        const ProgressFn& progress) {
  spec.validate();
  const auto t0 = std::chrono::steady_clock::now();
  ExperimentResult res;
  res.spec = spec;
  for (StudySampler s : spec.samplers) {
    for (int d : spec.d_grid) res.params.push_back(tune_cell(spec, s, d));
  }
  auto params_of = [&](StudySampler s, int d) -> const CellParams& {
    return *std::find_if(res.params.begin(), res.params.end(),
                         [&](const CellParams& p) { return p.sampler == s && p.d == d; });
  };
  for (int d : spec.d_grid) {
    for (int rep = 0; rep < spec.repeats; ++rep) {
      const GaussianTarget target = study_target(spec, d, rep);
      for (StudySampler s : spec.samplers) {
        RawRow row = run_cell(spec, params_of(s, d), target, rep);
        if (!row.mixing_iters) {
          res.warnings.push_back(key_of(s, d) + " repeat " + std::to_string(rep) +
                                 (row.diverged ? " diverged" : " did not mix") +
                                 " within max_iters; excluded from the fit");
        }
        if (progress) progress(row);
        res.rows.push_back(std::move(row));
      }
    }
  }
  std::stable_sort(res.rows.begin(), res.rows.end(), [&](const RawRow& a, const RawRow& b) {
    const auto ia = std::find(spec.samplers.begin(), spec.samplers.end(), a.sampler);
    const auto ib = std::find(spec.samplers.begin(), spec.samplers.end(), b.sampler);
    return std::tie(ia, a.d, a.repeat) < std::tie(ib, b.d, b.repeat);
  });
  for (StudySampler s : spec.samplers) {
    FitRow f;
    f.sampler = s;
    const auto pts = fit_points(res, s);
    if (pts.size() >= 3) {
      f.fit = fit_loglog_slope(pts);
    } else {
      res.warnings.push_back(study_sampler_name(s) + ": only " +
                             std::to_string(pts.size()) +
                             " usable dimensions, slope fit needs at least 3");
    }
    res.fits.push_back(f);
  }
  res.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return res;
}

std::string raw_csv(const ExperimentResult& result) {
  std::ostringstream o;
  o << "sampler,d,kappa,repeat,eval_count,mixing_iters,accept_rate,diverged\n";
  for (const auto& r : result.rows) {
    o << study_sampler_name(r.sampler) << ',' << r.d << ',' << fmt(r.kappa) << ','
      << r.repeat << ',' << (r.eval_count ? fmt(*r.eval_count) : "NA") << ','
      << (r.mixing_iters ? std::to_string(*r.mixing_iters) : "NA") << ','
      << (r.accept_rate ? fmt(*r.accept_rate) : "NA") << ',' << r.diverged << '\n';
  }
  return o.str();
}

std::string fits_csv(const ExperimentResult& result) {
  std::ostringstream o;
  o << "sampler,slope,stderr,intercept,n_points\n";
  for (const auto& f : result.fits) {
    if (!f.fit) continue;
    o << study_sampler_name(f.sampler) << ',' << fmt(f.fit->slope) << ','
      << fmt(f.fit->stderr_slope) << ',' << fmt(f.fit->intercept) << ','
      << f.fit->n_points << '\n';
  }
  return o.str();
}

std::string manifest_text(const ExperimentResult& result) {
  std::ostringstream o;
  const std::time_t now = std::time(nullptr);
  char stamp[32];
  std::strftime(stamp, sizeof stamp, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  o << "[manifest]\n";
  o << "library_version = " << HMCMIX_VERSION_STRING << "\n";
  o << "written_utc = " << stamp << "\n";
  o << "wall_clock_seconds = " << fmt(result.wall_seconds) << "\n";
  o << "seed_scheme = replica seed = derive(derive(derive(derive(base_seed, "
       "sampler_index + 1), d), repeat), replica); derive(a, b) = a xor splitmix64(b)\n";
  o << "warnings = " << result.warnings.size() << "\n\n";
  o << experiment_to_ini(result.spec) << "\n";
  o << "[params]\n";
  for (const auto& p : result.params) {
    const std::string k = key_of(p.sampler, p.d);
    o << k << ".kappa = " << fmt(p.kappa) << "\n";
    o << k << ".K = " << p.K << "\n";
    o << k << ".eta = " << fmt(p.eta) << "\n";
    o << k << ".regime = " << p.regime << "\n";
    o << k << ".satisfies_conditions = " << (p.satisfies_conditions ? 1 : 0) << "\n";
  }
  o << "\n[seeds]\n";
  for (StudySampler s : result.spec.samplers) {
    for (int d : result.spec.d_grid) {
      for (int rep = 0; rep < result.spec.repeats; ++rep) {
        o << key_of(s, d) << ".repeat" << rep << ".replica0 = "
          << replica_seed(result.spec, s, d, rep, 0) << "\n";
      }
    }
  }
  if (!result.warnings.empty()) {
    o << "\n[warnings]\n";
    for (std::size_t i = 0; i < result.warnings.size(); ++i) {
      o << "w" << i << " = " << result.warnings[i] << "\n";
    }
  }
  return o.str();
}

void emit_report(const ExperimentResult& result, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  require(!ec, ErrorCode::kIo, "emit_report: cannot create '" + dir + "': " + ec.message());
  auto write = [&](const char* name, const std::string& text) {
    const auto path = std::filesystem::path(dir) / name;
    std::ofstream out(path);
    require(out.good(), ErrorCode::kIo, "emit_report: cannot write " + path.string());
    out << text;
    require(out.good(), ErrorCode::kIo, "emit_report: write failed for " + path.string());
  };
  write("raw.csv", raw_csv(result));
  write("fits.csv", fits_csv(result));
  write("manifest.txt", manifest_text(result));
}

TuneOutput run_tune(const TuningRequest& req, const std::string& sampler, double c1,
                    double c2) {
  req.validate();
  TuneOutput out;
  out.request = req;
  out.sampler = sampler;
  if (sampler == "hmc") {
    out.choice = select_hmc_params(req);
  } else if (sampler == "hmcagg") {
    out.choice = select_hmcagg_params(req);
  } else if (sampler == "hmc_fixed") {
    out.choice = select_hmc_feasible_fixed(req);
  } else if (sampler == "mala" || sampler == "mrw") {
    const MalaMrwSteps st = mala_mrw_steps(req.d, req.kappa, req.L, c1, c2);
    out.choice.K = 1;
    out.choice.eta = sampler == "mala" ? st.eta_mala : st.eta_mrw;
    out.choice.regime = sampler == "mala" ? Regime::kMalaThm3 : Regime::kMrwThm3;
    out.choice.satisfies_conditions = true;
    return out;
  } else {
    fail(ErrorCode::kInvalidArgument, "tune: unknown sampler '" + sampler +
                                          "' (expected hmc, hmcagg, hmc_fixed, mala, mrw)");
  }
  TuningRequest cond = req;
  if (sampler == "hmcagg") cond.start = StartKind::kWarm;
  if (sampler == "hmc_fixed") cond.start = StartKind::kFeasible;
  out.condition = step_condition_for(cond, out.choice.K, out.choice.eta);
  return out;
}

std::string format_tune_human(const TuneOutput& t) {
  std::ostringstream o;
  o << "sampler    " << t.sampler << "\n";
  o << "regime     " << regime_name(t.choice.regime) << "\n";
  o << "K          " << t.choice.K << "\n";
  o << "eta        " << fmt(t.choice.eta) << "\n";
  o << "eta^2      " << fmt(t.choice.eta * t.choice.eta) << "\n";
  if (t.condition.terms.empty()) {
    o << "condition  not applicable\n";
  } else {
    o << "condition  " << (t.condition.holds ? "holds" : "violated") << "\n";
    char line[256];
    std::snprintf(line, sizeof line, "  %-4s %-24s %-24s %-24s %-3s %s\n", "id", "value", "bound",
                  "slack", "ok", "term");
    o << line;
    for (std::size_t i = 0; i < t.condition.terms.size(); ++i) {
      const auto& term = t.condition.terms[i];
      std::snprintf(line, sizeof line, "  t%-3zu %-24s %-24s %-24s %-3s %s\n", i,
                    fmt(term.value).c_str(), fmt(term.bound).c_str(), fmt(term.slack()).c_str(),
                    term.ok() ? "yes" : "no", term.name.c_str());
      o << line;
    }
  }
  for (const auto& w : t.choice.warnings) o << "warning    " << w << "\n";
  return o.str();
}

std::string format_tune_kv(const TuneOutput& t) {
  std::ostringstream o;
  o << "sampler=" << t.sampler << "\n";
  o << "regime=" << regime_name(t.choice.regime) << "\n";
  o << "K=" << t.choice.K << "\n";
  o << "eta=" << fmt(t.choice.eta) << "\n";
  o << "eta2=" << fmt(t.choice.eta * t.choice.eta) << "\n";
  if (!t.condition.terms.empty()) {
    o << "condition.holds=" << (t.condition.holds ? 1 : 0) << "\n";
    for (std::size_t i = 0; i < t.condition.terms.size(); ++i) {
      const auto& term = t.condition.terms[i];
      const std::string key = "condition.t" + std::to_string(i);
      o << key << ".term=" << term.name << "\n";
      o << key << ".value=" << fmt(term.value) << "\n";
      o << key << ".bound=" << fmt(term.bound) << "\n";
      o << key << ".slack=" << fmt(term.slack()) << "\n";
      o << key << ".ok=" << (term.ok() ? 1 : 0) << "\n";
    }
  }
  for (std::size_t i = 0; i < t.choice.warnings.size(); ++i) {
    o << "warning." << i << "=" << t.choice.warnings[i] << "\n";
  }
  return o.str();
}

RunSummary run_single(const RunSpec& run, const GaussianTarget& target) {
  require(run.iterations >= 1, ErrorCode::kInvalidArgument, "run: iterations >= 1");
  RunSummary s;
  s.sampler = run.sampler;
  const int d = static_cast<int>(target.dim());
  TuningRequest req;
  req.d = d;
  req.kappa = target.condition_number();
  req.L = target.smoothness();
  req.epsilon = run.epsilon;
  req.beta = run.beta;
  req.constant_c = run.c;
  req.k_multiplier = run.k_multiplier;
  require(run.start == "warm" || run.start == "feasible", ErrorCode::kInvalidArgument,
          "run: start must be 'warm' or 'feasible'");
  req.start = run.start == "warm" ? StartKind::kWarm : StartKind::kFeasible;
  SamplerKind kind;
  if (run.sampler == "hmc" || run.sampler == "hmcagg") {
    kind = SamplerKind::kHmc;
    const ParamChoice pc =
        run.sampler == "hmc" ? select_hmc_params(req) : select_hmcagg_params(req);
    s.K = run.leapfrog_steps.value_or(pc.K);
    s.eta = run.step.value_or(pc.eta);
  } else if (run.sampler == "mala" || run.sampler == "mrw") {
    kind = run.sampler == "mala" ? SamplerKind::kMala : SamplerKind::kMrw;
    const MalaMrwSteps st = mala_mrw_steps(d, req.kappa, req.L, StudyConstants{}.c1, StudyConstants{}.c2);
    s.eta = run.step.value_or(kind == SamplerKind::kMala ? st.eta_mala : st.eta_mrw);
  } else {
    fail(ErrorCode::kInvalidArgument,
         "run: unknown sampler '" + run.sampler + "' (expected hmc, hmcagg, mala, mrw)");
  }
  ChainConfig cfg;
  cfg.sampler = kind;
  cfg.step = s.eta;
  cfg.leapfrog_steps = s.K;
  cfg.laziness = run.laziness;
  cfg.seed = run.seed;
  cfg.validate();
  Rng init_rng(derive_seed(run.seed, 0x1417ULL));
  Chain chain(target, cfg, sample_init(InitKind::kGaussianFeasible, target, init_rng));
  s.mean = Vector::Zero(d);
  Matrix m2 = Matrix::Zero(d, d);
  for (std::size_t i = 0; i < run.iterations; ++i) {
    chain.step();
    const Vector& x = chain.state();
    const double n = static_cast<double>(i + 1);
    const Vector delta = x - s.mean;
    s.mean += delta / n;
    m2.noalias() += delta * (x - s.mean).transpose();
  }
  s.iterations = run.iterations;
  s.covariance = run.iterations > 1
                     ? Matrix(m2 / static_cast<double>(run.iterations - 1))
                     : Matrix::Zero(d, d);
  const Matrix sigma = target.covariance();
  s.covariance_rel_error = (s.covariance - sigma).norm() / sigma.norm();
  if (chain.non_lazy() > 0) {
    s.accept_rate =
        static_cast<double>(chain.accepted()) / static_cast<double>(chain.non_lazy());
  }
  s.counters = chain.counters();
  s.eval_count_paper = chain.eval_count_paper();
  return s;
}

std::string format_run_summary(const RunSummary& s) {
  std::ostringstream o;
  o << "sampler=" << s.sampler << "\n";
  o << "K=" << s.K << "\n";
  o << "eta=" << fmt(s.eta) << "\n";
  o << "iterations=" << s.iterations << "\n";
  o << "accept_rate=" << (s.accept_rate ? fmt(*s.accept_rate) : "NA") << "\n";
  o << "grad_evals=" << s.counters.grad_evals << "\n";
  o << "fn_evals=" << s.counters.fn_evals << "\n";
  o << "divergences=" << s.counters.divergences << "\n";
  o << "eval_count=" << s.eval_count_paper << "\n";
  o << "covariance_rel_frobenius_error=" << fmt(s.covariance_rel_error) << "\n";
  o << "mean=";
  for (Eigen::Index i = 0; i < s.mean.size(); ++i) o << (i ? "," : "") << fmt(s.mean[i]);
  o << "\n";
  return o.str();
}

}  // namespace hmcmix
