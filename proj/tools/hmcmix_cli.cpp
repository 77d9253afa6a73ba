#include <cmath>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "hmcmix/hmcmix.h"

namespace {

constexpr double kStrictC = 2000.0;

struct Globals {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
  bool strict = false;
  int workers = 1;
};

int report(hmcmix_status s, const char* what) {
  std::cerr << "error: " << what << ": " << hmcmix_status_name(s) << ": "
            << hmcmix_last_error() << "\n";
  return 1;
}

struct Text {
  hmcmix_text* t = nullptr;
  ~Text() { hmcmix_text_free(t); }
  const char* str() const { return hmcmix_text_str(t); }
};

int write_file(const std::string& path, const std::string& body) {
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << body)) {
    std::cerr << "error: cannot write '" << path << "'\n";
    return 1;
  }
  return 0;
}

struct TuneArgs {
  int d = 16;
  double kappa = 4.0;
  double L = 1.0;
  double L_H = 0.0;
  double epsilon = 0.1;
  double beta = 1.0;
  std::string start = "warm";
  double c = 1.0;
  double k_multiplier = 4.0;
  double c1 = 0.1;
  double c2 = 0.1;
  std::string sampler = "hmc";
};

int cmd_tune(const Globals& g, const TuneArgs& a) {
  hmcmix_tune_request req;
  hmcmix_tune_request_default(&req);
  req.d = a.d;
  req.kappa = a.kappa;
  req.L = a.L;
  req.L_H = a.L_H;
  req.epsilon = a.epsilon;
  req.beta = a.beta;
  req.start = a.start == "feasible" ? HMCMIX_START_FEASIBLE : HMCMIX_START_WARM;
  req.constant_c = g.strict ? kStrictC : a.c;
  req.k_multiplier = a.k_multiplier;
  req.c1 = a.c1;
  req.c2 = a.c2;
  Text text;
  if (auto s = hmcmix_tune_report(&req, a.sampler.c_str(), 2, &text.t)) return report(s, "tune");
  std::cout << text.str();
  return 0;
}

struct RunArgs {
  std::optional<int> d;
  std::optional<double> kappa;
  std::optional<std::string> sampler;
  std::optional<std::size_t> iterations;
  std::optional<double> step;
  std::optional<int> leapfrog_steps;
  std::optional<double> laziness;
  std::optional<std::string> start;
};

int cmd_run(const Globals& g, const RunArgs& a) {
  hmcmix_target* target = nullptr;
  hmcmix_run_options opts;
  hmcmix_run_options_default(&opts);
  if (!g.config.empty()) {
    if (auto s = hmcmix_target_from_config(g.config.c_str(), &target)) return report(s, "run");
    if (auto s = hmcmix_run_options_from_config(g.config.c_str(), &opts)) {
      hmcmix_target_free(target);
      return report(s, "run");
    }
  } else {
    const int d = a.d.value_or(2);
    const double kappa = a.kappa.value_or(4.0);
    if (d < 1 || !(kappa >= 1.0)) {
      std::cerr << "error: run: --d must be >= 1 and --kappa >= 1\n";
      return 1;
    }
    std::vector<double> s(static_cast<std::size_t>(d));
    for (int i = 0; i < d; ++i) {
      const double t = d == 1 ? 0.0 : static_cast<double>(i) / (d - 1);
      s[static_cast<std::size_t>(i)] = 1.0 + t * (std::sqrt(kappa) - 1.0);
    }
    if (auto st = hmcmix_target_gaussian(s.data(), s.size(), nullptr, &target))
      return report(st, "run");
  }
  auto put = [](char* dst, std::size_t cap, const std::string& v) {
    std::snprintf(dst, cap, "%s", v.c_str());
  };
  if (a.sampler) put(opts.sampler, sizeof opts.sampler, *a.sampler);
  if (a.start) put(opts.start, sizeof opts.start, *a.start);
  if (a.iterations) opts.iterations = *a.iterations;
  if (a.step) opts.step = *a.step;
  if (a.leapfrog_steps) opts.leapfrog_steps = *a.leapfrog_steps;
  if (a.laziness) opts.laziness = *a.laziness;
  if (g.seed) opts.seed = *g.seed;
  if (g.strict) opts.constant_c = kStrictC;
  Text text;
  const hmcmix_status s = hmcmix_run_summary(target, &opts, &text.t);
  hmcmix_target_free(target);
  if (s) return report(s, "run");
  std::cout << text.str();
  return 0;
}

void on_progress(const char* sampler, int d, int repeat, int mixed, double evals, void*) {
  std::cerr << sampler << " d=" << d << " repeat=" << repeat;
  if (mixed) {
    std::cerr << " evals=" << evals << "\n";
  } else {
    std::cerr << " not mixed\n";
  }
}

int cmd_experiment(const Globals& g, bool quiet) {
  if (g.config.empty()) {
    std::cerr << "error: experiment requires --config PATH\n";
    return 1;
  }
  hmcmix_experiment* exp = nullptr;
  if (auto s = hmcmix_experiment_from_config(g.config.c_str(), &exp))
    return report(s, "experiment");
  hmcmix_status s = HMCMIX_OK;
  if (!s && g.seed) s = hmcmix_experiment_set_seed(exp, *g.seed);
  if (!s && !g.out.empty()) s = hmcmix_experiment_set_output_dir(exp, g.out.c_str());
  if (!s) s = hmcmix_experiment_set_workers(exp, g.workers);
  if (!s && g.strict) s = hmcmix_experiment_set_constant_c(exp, kStrictC);
  if (!s) s = hmcmix_experiment_run(exp, quiet ? nullptr : on_progress, nullptr);
  if (!s) s = hmcmix_experiment_emit(exp, nullptr);
  Text fits, warnings;
  if (!s) s = hmcmix_experiment_text(exp, "fits.csv", &fits.t);
  if (!s) s = hmcmix_experiment_text(exp, "warnings", &warnings.t);
  hmcmix_experiment_free(exp);
  if (s) return report(s, "experiment");
  std::cout << fits.str();
  if (std::strlen(warnings.str()) > 0) std::cerr << "warnings:\n" << warnings.str();
  return 0;
}

int cmd_theory(const Globals& g, bool quick) {
  hmcmix_theory_report* rep = nullptr;
  const std::uint64_t seed = g.seed.value_or(20190101);
  if (auto s = hmcmix_theory_run(quick ? 1 : 0, seed, kStrictC, &rep)) return report(s, "theory");
  Text text;
  const hmcmix_status s = hmcmix_theory_text(rep, &text.t);
  const bool passed = hmcmix_theory_passed(rep) != 0;
  hmcmix_theory_free(rep);
  if (s) return report(s, "theory");
  std::cout << text.str();
  if (!g.out.empty()) {
    std::error_code ec;
    std::filesystem::create_directories(g.out, ec);
    if (int rc = write_file((std::filesystem::path(g.out) / "theory_report.txt").string(),
                            text.str()))
      return rc;
  }
  return passed ? 0 : 2;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"hmcmix: Metropolized sampler mixing-time study"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(hmcmix_version()));

  Globals g;
  app.add_option("--config", g.config, "Config file (INI)");
  app.add_option("--seed", g.seed, "Base seed");
  app.add_option("--out", g.out, "Output directory");
  app.add_flag("--strict-constants", g.strict, "Use the conservative constant c = 2000");
  app.add_option("--workers", g.workers, "Worker threads per cell")->check(CLI::PositiveNumber);

  TuneArgs ta;
  auto* tune = app.add_subcommand("tune", "Select (K, eta) and check the step conditions");
  tune->fallthrough();
  tune->add_option("--d", ta.d, "Dimension")->check(CLI::PositiveNumber);
  tune->add_option("--kappa", ta.kappa, "Condition number");
  tune->add_option("--L", ta.L, "Smoothness constant");
  tune->add_option("--LH", ta.L_H, "Hessian-Lipschitz constant");
  tune->add_option("--epsilon", ta.epsilon, "Target accuracy");
  tune->add_option("--beta", ta.beta, "Warmness");
  tune->add_option("--start", ta.start, "warm or feasible")
      ->check(CLI::IsMember({"warm", "feasible"}));
  tune->add_option("--c", ta.c, "Universal constant c");
  tune->add_option("--k-multiplier", ta.k_multiplier, "Leapfrog step multiplier");
  tune->add_option("--c1", ta.c1, "MALA constant");
  tune->add_option("--c2", ta.c2, "MRW constant");
  tune->add_option("--sampler", ta.sampler, "hmc, hmcagg, hmc_fixed, mala or mrw")
      ->check(CLI::IsMember({"hmc", "hmcagg", "hmc_fixed", "mala", "mrw"}));

  RunArgs ra;
  auto* run = app.add_subcommand("run", "Run one chain and print a summary");
  run->fallthrough();
  run->add_option("--d", ra.d, "Dimension when no [target] is configured");
  run->add_option("--kappa", ra.kappa, "Condition number when no [target] is configured");
  run->add_option("--sampler", ra.sampler, "hmc, hmcagg, mala or mrw");
  run->add_option("--iterations", ra.iterations, "Chain length");
  run->add_option("--step", ra.step, "Step size (tuned when absent)");
  run->add_option("--K", ra.leapfrog_steps, "Leapfrog steps (tuned when absent)");
  run->add_option("--laziness", ra.laziness, "Lazy holding probability");
  run->add_option("--start", ra.start, "warm or feasible");

  bool quiet = false;
  auto* experiment = app.add_subcommand("experiment", "Run the scaling study from --config");
  experiment->fallthrough();
  experiment->add_flag("--quiet", quiet, "Suppress per-cell progress");

  bool quick = false;
  auto* theory = app.add_subcommand("theory", "Run the lemma verification suite");
  theory->fallthrough();
  theory->add_flag("--quick", quick, "Reduced instance counts");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    std::cerr << app.help();
    return 1;
  }

  if (*tune) return cmd_tune(g, ta);
  if (*run) return cmd_run(g, ra);
  if (*experiment) return cmd_experiment(g, quiet);
  return cmd_theory(g, quick);
}
