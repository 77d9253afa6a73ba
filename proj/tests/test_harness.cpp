#include <gtest/gtest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "hmcmix/config.hpp"
#include "hmcmix/harness.hpp"

using namespace hmcmix;

namespace {

ExperimentSpec small_spec() {
  ExperimentSpec s;
  s.d_grid = {2, 4, 8};
  s.replicas = 8;
  s.repeats = 2;
  s.max_iters = 5000;
  s.delta = 0.1;
  return s;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

std::string section(const std::string& text, const std::string& name) {
  const std::string head = "[" + name + "]";
  const auto at = text.find(head);
  if (at == std::string::npos) return "";
  const auto end = text.find("\n[", at + 1);
  return text.substr(at, end == std::string::npos ? std::string::npos : end - at);
}

}  // namespace

TEST(Config, ParsesExperimentSections) {
  const Config c = parse_config_text(
      "[experiment]\n"
      "d_grid = 2, 4, 8\n"
      "kappa_rule = power_of_d\n"
      "kappa_exponent = 2/3\n"
      "samplers = HMC, mala\n"
      "replicas = 10\n"
      "base_seed = 77\n"
      "[constants]\n"
      "c1 = 0.5\n"
      "k_multiplier = 2\n");
  ASSERT_TRUE(c.experiment.has_value());
  const ExperimentSpec& e = *c.experiment;
  EXPECT_EQ(e.d_grid, (std::vector<int>{2, 4, 8}));
  EXPECT_EQ(e.kappa_rule.kind, KappaRule::Kind::kPowerOfD);
  EXPECT_NEAR(e.kappa_rule.at(8), 4.0, 1e-12);
  EXPECT_EQ(e.samplers, (std::vector<StudySampler>{StudySampler::kHmc, StudySampler::kMala}));
  EXPECT_EQ(e.replicas, 10);
  EXPECT_EQ(e.base_seed, 77u);
  EXPECT_DOUBLE_EQ(e.constants.c1, 0.5);
  EXPECT_DOUBLE_EQ(e.constants.k_multiplier, 2.0);
  EXPECT_DOUBLE_EQ(e.constants.c, 1.0);
}

TEST(Config, RejectsInvalidSpecs) {
  auto code = [](const std::string& text) {
    try {
      parse_config_text(text);
    } catch (const Error& e) {
      return static_cast<int>(e.code());
    }
    return 0;
  };
  const int cfg = static_cast<int>(ErrorCode::kConfig);
  EXPECT_EQ(code("[experiment]\nreplicas = 1\n"), cfg);
  EXPECT_EQ(code("[experiment]\nd_grid = 4, 2\n"), cfg);
  EXPECT_EQ(code("[experiment]\nrepeats = 0\n"), cfg);
  EXPECT_EQ(code("[experiment]\nbogus = 1\n"), cfg);
  EXPECT_EQ(code("[nonsense]\nx = 1\n"), cfg);
  EXPECT_EQ(code("[experiment]\nsamplers = NUTS\n"), cfg);
  EXPECT_EQ(code("[experiment]\nreplicas = ten\n"), cfg);
}

TEST(Config, RoundTripsThroughIni) {
  ExperimentSpec s = small_spec();
  s.kappa_rule.kind = KappaRule::Kind::kPowerOfD;
  s.kappa_rule.value = 2.0 / 3.0;
  s.constants.c2 = 0.123456789012345;
  s.base_seed = 0xFFFFFFFFFFFFFFFFULL;
  const Config c = parse_config_text(experiment_to_ini(s));
  ASSERT_TRUE(c.experiment.has_value());
  EXPECT_EQ(experiment_to_ini(*c.experiment), experiment_to_ini(s));
  EXPECT_EQ(c.experiment->kappa_rule.value, s.kappa_rule.value);
  EXPECT_EQ(c.experiment->constants.c2, s.constants.c2);
  EXPECT_EQ(c.experiment->base_seed, s.base_seed);
}

TEST(Config, FormatDoubleRoundTrips) {
  for (double x : {0.1, 1.0 / 3.0, 2.0 / 3.0, 1e-300, 123456789.125, -0.0625}) {
    EXPECT_EQ(std::stod(format_double(x)), x);
  }
  EXPECT_EQ(format_double(0.25), "0.25");
}

TEST(Config, TargetAndRunSections) {
  const Config c = parse_config_text(
      "[target]\nkind = gaussian_spectrum\nmin = 1\nmax = 3\ncount = 3\n"
      "basis = random_orthonormal\nbasis_seed = 5\n"
      "[run]\nsampler = MALA\niterations = 50\nstep = 0.2\n");
  ASSERT_TRUE(c.target && c.run);
  EXPECT_EQ(c.target->resolve_spectrum(), (std::vector<double>{1.0, 2.0, 3.0}));
  const GaussianTarget t = build_target(*c.target);
  EXPECT_NEAR(t.condition_number(), 9.0, 1e-12);
  EXPECT_EQ(c.run->sampler, "mala");
  EXPECT_EQ(*c.run->step, 0.2);
}

TEST(Config, MissingFileIsIoError) {
  try {
    load_config("/nonexistent/hmcmix.ini");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}

TEST(Harness, StudyTargetSpectrum) {
  ExperimentSpec s;
  const GaussianTarget t = study_target(s, 16, 0);
  EXPECT_EQ(t.dim(), 16);
  EXPECT_NEAR(t.condition_number(), 4.0, 1e-12);
  EXPECT_NEAR(t.smoothness(), 1.0, 1e-12);
  s.kappa_rule.kind = KappaRule::Kind::kPowerOfD;
  s.kappa_rule.value = 2.0 / 3.0;
  EXPECT_NEAR(study_target(s, 64, 0).condition_number(), 16.0, 1e-9);
}

TEST(Harness, TuneCellMatchesTuner) {
  ExperimentSpec s;
  for (int d : {2, 16, 64}) {
    TuningRequest r;
    r.d = d;
    r.kappa = 4.0;
    r.k_multiplier = 4.0;
    const ParamChoice hmc = select_hmc_params(r);
    const CellParams p = tune_cell(s, StudySampler::kHmc, d);
    EXPECT_EQ(p.K, hmc.K);
    EXPECT_EQ(p.eta, hmc.eta);
    const ParamChoice agg = select_hmcagg_params(r);
    const CellParams q = tune_cell(s, StudySampler::kHmcAgg, d);
    EXPECT_EQ(q.K, agg.K);
    EXPECT_EQ(q.eta, agg.eta);
    const MalaMrwSteps st = mala_mrw_steps(d, 4.0, 1.0, s.constants.c1, s.constants.c2);
    EXPECT_EQ(tune_cell(s, StudySampler::kMala, d).eta, st.eta_mala);
    EXPECT_EQ(tune_cell(s, StudySampler::kMrw, d).eta, st.eta_mrw);
    EXPECT_GE(p.K, 1);
    EXPECT_GT(p.eta, 0.0);
  }
}

TEST(Harness, DeterministicAcrossRunsAndWorkers) {
  ExperimentSpec s = small_spec();
  const ExperimentResult a = run_scaling_experiment(s);
  const ExperimentResult b = run_scaling_experiment(s);
  s.workers = 3;
  const ExperimentResult c = run_scaling_experiment(s);
  EXPECT_EQ(raw_csv(a), raw_csv(b));
  EXPECT_EQ(raw_csv(a), raw_csv(c));
  EXPECT_EQ(fits_csv(a), fits_csv(c));
  s.base_seed = 2;
  EXPECT_NE(raw_csv(run_scaling_experiment(s)), raw_csv(a));
}

TEST(Harness, ManifestRoundTripReproducesRows) {
  const ExperimentResult a = run_scaling_experiment(small_spec());
  const std::string manifest = manifest_text(a);
  const Config c = parse_config_text(manifest);
  ASSERT_TRUE(c.experiment.has_value());
  const ExperimentResult b = run_scaling_experiment(*c.experiment);
  EXPECT_EQ(raw_csv(a), raw_csv(b));
}

TEST(Harness, ManifestRecordsTunedParams) {
  const ExperimentResult a = run_scaling_experiment(small_spec());
  const std::string params = section(manifest_text(a), "params");
  ASSERT_FALSE(params.empty());
  for (const CellParams& p : a.params) {
    const CellParams t = tune_cell(a.spec, p.sampler, p.d);
    const std::string key = study_sampler_name(p.sampler) + ".d" + std::to_string(p.d);
    EXPECT_NE(params.find(key + ".K = " + std::to_string(t.K) + "\n"), std::string::npos) << key;
    char eta[40];
    std::snprintf(eta, sizeof eta, "%.17g", t.eta);
    EXPECT_NE(params.find(key + ".eta = " + eta + "\n"), std::string::npos) << key;
  }
}

TEST(Harness, RawRowsAndFits) {
  const ExperimentResult a = run_scaling_experiment(small_spec());
  EXPECT_EQ(a.rows.size(), 4u * 3u * 2u);
  std::istringstream raw(raw_csv(a));
  std::string line;
  std::getline(raw, line);
  EXPECT_EQ(line, "sampler,d,kappa,repeat,eval_count,mixing_iters,accept_rate,diverged");
  int n = 0;
  while (std::getline(raw, line)) ++n;
  EXPECT_EQ(n, 24);
  for (const RawRow& r : a.rows) {
    if (r.mixing_iters && r.eval_count) {
      if (r.sampler == StudySampler::kMrw || r.sampler == StudySampler::kMala) {
        EXPECT_LE(*r.eval_count, static_cast<double>(*r.mixing_iters));
      }
    }
  }
  for (const FitRow& f : a.fits) {
    const auto pts = fit_points(a, f.sampler);
    if (pts.size() >= 3) {
      ASSERT_TRUE(f.fit.has_value());
      EXPECT_EQ(f.fit->slope, fit_loglog_slope(pts).slope);
    }
  }
}

TEST(Harness, SingleDimensionRefusesFit) {
  ExperimentSpec s = small_spec();
  s.d_grid = {4};
  const ExperimentResult a = run_scaling_experiment(s);
  EXPECT_EQ(a.rows.size(), 8u);
  for (const FitRow& f : a.fits) EXPECT_FALSE(f.fit.has_value());
  EXPECT_FALSE(a.warnings.empty());
  EXPECT_EQ(fits_csv(a), "sampler,slope,stderr,intercept,n_points\n");
}

TEST(Harness, NotMixedRowsAreFlagged) {
  ExperimentSpec s = small_spec();
  s.samplers = {StudySampler::kMrw};
  s.max_iters = 1;
  s.delta = 1e-9;
  const ExperimentResult a = run_scaling_experiment(s);
  for (const RawRow& r : a.rows) {
    EXPECT_FALSE(r.mixing_iters.has_value());
    EXPECT_FALSE(r.eval_count.has_value());
  }
  EXPECT_GE(a.warnings.size(), a.rows.size());
  EXPECT_NE(raw_csv(a).find(",NA,NA,"), std::string::npos);
}

TEST(Harness, EmptyResultWritesHeaderOnlyFiles) {
  ExperimentResult empty;
  EXPECT_EQ(raw_csv(empty), "sampler,d,kappa,repeat,eval_count,mixing_iters,accept_rate,diverged\n");
  EXPECT_EQ(fits_csv(empty), "sampler,slope,stderr,intercept,n_points\n");
  const auto dir = std::filesystem::temp_directory_path() / "hmcmix_empty_report";
  std::filesystem::remove_all(dir);
  emit_report(empty, dir.string());
  EXPECT_EQ(slurp(dir / "raw.csv"), raw_csv(empty));
  EXPECT_TRUE(std::filesystem::exists(dir / "manifest.txt"));
}

TEST(Harness, UnwritableDirectoryIsIoError) {
  ExperimentResult empty;
  try {
    emit_report(empty, "/proc/hmcmix_cannot_write_here");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIo);
  }
}

TEST(Harness, TuneOutputFormats) {
  TuningRequest r;
  r.d = 16;
  r.kappa = 2.0;
  r.start = StartKind::kFeasible;
  const TuneOutput t = run_tune(r, "hmc");
  const std::string kv = format_tune_kv(t);
  EXPECT_NE(kv.find("K=2\n"), std::string::npos);
  EXPECT_NE(kv.find("regime=table4_row1\n"), std::string::npos);
  EXPECT_NE(kv.find("eta=" + format_double(std::sqrt(1.0 / (16.0 * std::sqrt(2.0))))),
            std::string::npos);
  EXPECT_NE(format_tune_human(t).find("K          2"), std::string::npos);
  EXPECT_THROW(run_tune(r, "nuts"), Error);
}

TEST(Harness, SingleRunSummary) {
  const GaussianTarget t = gaussian_from_spectrum(std::vector<double>{1.0, 2.0});
  RunSpec r;
  r.iterations = 20000;
  r.start = "feasible";
  const RunSummary s = run_single(r, t);
  EXPECT_EQ(s.iterations, 20000u);
  ASSERT_TRUE(s.accept_rate.has_value());
  EXPECT_LT(s.covariance_rel_error, 0.2);
  EXPECT_EQ(s.eval_count_paper, 20000u * static_cast<std::uint64_t>(s.K));
  r.sampler = "bogus";
  EXPECT_THROW(run_single(r, t), Error);
}
