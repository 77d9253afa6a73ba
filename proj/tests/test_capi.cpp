#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <string>
#include <vector>

#include "hmcmix/hmcmix.h"

TEST(CApi, VersionAndStatusNames) {
  EXPECT_GT(std::strlen(hmcmix_version()), 0u);
  EXPECT_STREQ(hmcmix_status_name(HMCMIX_OK), "ok");
  EXPECT_STREQ(hmcmix_status_name(HMCMIX_E_CONFIG), "config");
}

TEST(CApi, TargetLifecycle) {
  const double s[2] = {1.0, 2.0};
  hmcmix_target* t = nullptr;
  ASSERT_EQ(hmcmix_target_gaussian(s, 2, nullptr, &t), HMCMIX_OK);
  EXPECT_EQ(hmcmix_target_dim(t), 2u);
  double L = 0, m = 0, kappa = 0;
  ASSERT_EQ(hmcmix_target_constants(t, &L, &m, &kappa), HMCMIX_OK);
  EXPECT_DOUBLE_EQ(L, 1.0);
  EXPECT_DOUBLE_EQ(m, 0.25);
  EXPECT_DOUBLE_EQ(kappa, 4.0);
  const double x[2] = {1.0, 2.0};
  double f = 0, g[2] = {0, 0};
  ASSERT_EQ(hmcmix_target_potential(t, x, &f), HMCMIX_OK);
  EXPECT_NEAR(f, 1.0, 1e-15);
  ASSERT_EQ(hmcmix_target_gradient(t, x, g), HMCMIX_OK);
  EXPECT_NEAR(g[1], 0.5, 1e-15);
  hmcmix_target_free(t);
}

TEST(CApi, ErrorsSetCodeAndMessage) {
  const double bad[2] = {1.0, -2.0};
  hmcmix_target* t = reinterpret_cast<hmcmix_target*>(0x1);
  EXPECT_EQ(hmcmix_target_gaussian(bad, 2, nullptr, &t), HMCMIX_E_INVALID_SPECTRUM);
  EXPECT_EQ(t, nullptr);
  EXPECT_GT(std::strlen(hmcmix_last_error()), 0u);
  const double basis[4] = {1.0, 1.0, 0.0, 1.0};
  const double ok[2] = {1.0, 2.0};
  EXPECT_EQ(hmcmix_target_gaussian(ok, 2, basis, &t), HMCMIX_E_INVALID_BASIS);
  EXPECT_EQ(hmcmix_target_dim(nullptr), 0u);
  EXPECT_EQ(hmcmix_target_potential(nullptr, ok, nullptr), HMCMIX_E_INVALID_ARGUMENT);
  hmcmix_experiment* e = nullptr;
  EXPECT_EQ(hmcmix_experiment_from_config("/nonexistent.ini", &e), HMCMIX_E_IO);
  EXPECT_EQ(hmcmix_experiment_from_text("[experiment]\nreplicas = 1\n", &e), HMCMIX_E_CONFIG);
}

TEST(CApi, TuneMatchesTable4) {
  hmcmix_tune_request r;
  hmcmix_tune_request_default(&r);
  r.d = 16;
  r.kappa = 2.0;
  r.start = HMCMIX_START_FEASIBLE;
  hmcmix_param_choice p;
  ASSERT_EQ(hmcmix_tune(&r, "hmc", &p), HMCMIX_OK);
  EXPECT_EQ(p.K, 2);
  EXPECT_NEAR(p.eta * p.eta, 1.0 / (16.0 * std::sqrt(2.0)), 1e-15);
  EXPECT_STREQ(p.regime, "table4_row1");
  hmcmix_text* text = nullptr;
  ASSERT_EQ(hmcmix_tune_report(&r, "hmc", 1, &text), HMCMIX_OK);
  EXPECT_NE(std::string(hmcmix_text_str(text)).find("K=2\n"), std::string::npos);
  hmcmix_text_free(text);
  EXPECT_EQ(hmcmix_tune(&r, "nuts", &p), HMCMIX_E_INVALID_ARGUMENT);
}

TEST(CApi, ChainRun) {
  const double s[2] = {1.0, 2.0};
  hmcmix_target* t = nullptr;
  ASSERT_EQ(hmcmix_target_gaussian(s, 2, nullptr, &t), HMCMIX_OK);
  double x0[2];
  ASSERT_EQ(hmcmix_feasible_init(t, 3, x0), HMCMIX_OK);
  hmcmix_chain_config cfg;
  hmcmix_chain_config_default(&cfg);
  cfg.sampler = HMCMIX_SAMPLER_HMC;
  cfg.step = 0.3;
  cfg.leapfrog_steps = 4;
  cfg.seed = 11;
  hmcmix_trace* tr = nullptr;
  ASSERT_EQ(hmcmix_run_chain(t, &cfg, x0, 500, &tr), HMCMIX_OK);
  EXPECT_EQ(hmcmix_trace_iterations(tr), 500u);
  double state[2];
  ASSERT_EQ(hmcmix_trace_state(tr, 0, state), HMCMIX_OK);
  EXPECT_EQ(state[0], x0[0]);
  EXPECT_EQ(hmcmix_trace_state(tr, 501, state), HMCMIX_E_INVALID_ARGUMENT);
  hmcmix_counters c;
  ASSERT_EQ(hmcmix_trace_counters(tr, &c), HMCMIX_OK);
  EXPECT_EQ(c.grad_evals, 500u * 5u);
  EXPECT_EQ(c.eval_count, 2000u);
  double rate = 0;
  int defined = 0;
  ASSERT_EQ(hmcmix_trace_acceptance_rate(tr, &rate, &defined), HMCMIX_OK);
  EXPECT_EQ(defined, 1);
  EXPECT_GT(rate, 0.5);
  hmcmix_trace_free(tr);
  cfg.step = -1.0;
  EXPECT_EQ(hmcmix_run_chain(t, &cfg, x0, 10, &tr), HMCMIX_E_INVALID_ARGUMENT);
  hmcmix_target_free(t);
}

TEST(CApi, RunSummary) {
  const double s[2] = {1.0, 2.0};
  hmcmix_target* t = nullptr;
  ASSERT_EQ(hmcmix_target_gaussian(s, 2, nullptr, &t), HMCMIX_OK);
  hmcmix_run_options o;
  hmcmix_run_options_default(&o);
  o.iterations = 1000;
  hmcmix_text* text = nullptr;
  ASSERT_EQ(hmcmix_run_summary(t, &o, &text), HMCMIX_OK);
  EXPECT_NE(std::string(hmcmix_text_str(text)).find("iterations=1000"), std::string::npos);
  hmcmix_text_free(text);
  hmcmix_target_free(t);
}

TEST(CApi, ExperimentLifecycle) {
  hmcmix_experiment* e = nullptr;
  ASSERT_EQ(hmcmix_experiment_from_text("[experiment]\nd_grid = 2, 4, 8\nsamplers = MALA\n"
                                        "replicas = 6\nrepeats = 1\ndelta = 0.2\n",
                                        &e),
            HMCMIX_OK);
  double slope = 0;
  int available = 0;
  EXPECT_EQ(hmcmix_experiment_fit(e, "MALA", &slope, nullptr, nullptr, &available),
            HMCMIX_E_PRECONDITION);
  ASSERT_EQ(hmcmix_experiment_set_workers(e, 2), HMCMIX_OK);
  EXPECT_EQ(hmcmix_experiment_set_workers(e, 0), HMCMIX_E_INVALID_ARGUMENT);
  int calls = 0;
  auto cb = [](const char*, int, int, int, double, void* user) { ++*static_cast<int*>(user); };
  ASSERT_EQ(hmcmix_experiment_run(e, cb, &calls), HMCMIX_OK);
  EXPECT_EQ(calls, 3);
  hmcmix_text* raw = nullptr;
  ASSERT_EQ(hmcmix_experiment_text(e, "raw.csv", &raw), HMCMIX_OK);
  EXPECT_EQ(std::string(hmcmix_text_str(raw)).rfind("sampler,d,kappa", 0), 0u);
  hmcmix_text_free(raw);
  hmcmix_text* nope = nullptr;
  EXPECT_EQ(hmcmix_experiment_text(e, "plot.png", &nope), HMCMIX_E_INVALID_ARGUMENT);
  hmcmix_experiment_free(e);
}

TEST(CApi, TheoryReport) {
  hmcmix_theory_report* r = nullptr;
  ASSERT_EQ(hmcmix_theory_run(1, 5, 2000.0, &r), HMCMIX_OK);
  EXPECT_GT(hmcmix_theory_check_count(r), 5u);
  hmcmix_check_info info;
  ASSERT_EQ(hmcmix_theory_check(r, 0, &info), HMCMIX_OK);
  EXPECT_GT(std::strlen(info.name), 0u);
  EXPECT_GT(info.instances, 0u);
  EXPECT_EQ(hmcmix_theory_passed(r), 1);
  EXPECT_EQ(hmcmix_theory_check(r, 1000, &info), HMCMIX_E_INVALID_ARGUMENT);
  hmcmix_theory_free(r);
}
