#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "hmcmix/config.hpp"
#include "hmcmix/diagnostics.hpp"
#include "hmcmix/samplers.hpp"
#include "hmcmix/suite.hpp"
#include "hmcmix/tuning.hpp"

namespace hmcmix {

/// Parameters chosen for one (sampler, d) cell of a scaling study.
struct CellParams {
  StudySampler sampler = StudySampler::kHmc;
  int d = 1;
  double kappa = 1.0;
  int K = 1;
  double eta = 0.0;
  std::string regime;
  bool satisfies_conditions = false;
};

/// The Gaussian of the scaling study: diagonal covariance whose square-root
/// eigenvalues are linearly spaced from sqrt_eig_min to sqrt_eig_min sqrt(kappa).
GaussianTarget study_target(const ExperimentSpec& spec, int d, int repeat);

CellParams tune_cell(const ExperimentSpec& spec, StudySampler sampler, int d);

struct RawRow {
  StudySampler sampler = StudySampler::kHmc;
  int d = 1;
  double kappa = 1.0;
  int repeat = 0;
  std::optional<double> eval_count;  // unset when not mixed
  std::optional<std::size_t> mixing_iters;
  std::optional<double> accept_rate;
  std::uint64_t diverged = 0;
};

struct FitRow {
  StudySampler sampler = StudySampler::kHmc;
  std::optional<SlopeFit> fit;  // unset when fewer than 3 usable points
};

struct ExperimentResult {
  ExperimentSpec spec;
  std::vector<RawRow> rows;
  std::vector<FitRow> fits;
  std::vector<CellParams> params;
  std::vector<std::string> warnings;
  double wall_seconds = 0.0;
};

/// Seed of replica `replica` in cell (sampler, d, repeat).
std::uint64_t replica_seed(const ExperimentSpec& spec, StudySampler sampler,
                           int d, int repeat, int replica);

/// Runs `replicas` chains of one cell in lockstep blocks and returns its row.
RawRow run_cell(const ExperimentSpec& spec, const CellParams& params,
                const GaussianTarget& target, int repeat);

using ProgressFn = std::function<void(const RawRow&)>;

ExperimentResult run_scaling_experiment(const ExperimentSpec& spec,
                                        const ProgressFn& progress = {});

/// Mean eval_count over mixed repeats, per (sampler, d), for the fit.
std::vector<std::pair<double, double>> fit_points(const ExperimentResult& result,
                                                  StudySampler sampler);

std::string raw_csv(const ExperimentResult& result);
std::string fits_csv(const ExperimentResult& result);
std::string manifest_text(const ExperimentResult& result);

/// Writes raw.csv, fits.csv and manifest.txt into `dir` (created if needed).
void emit_report(const ExperimentResult& result, const std::string& dir);

struct TuneOutput {
  TuningRequest request;
  std::string sampler = "hmc";
  ParamChoice choice;
  StepConditionReport condition;
};

/// sampler is one of hmc, hmcagg, hmc_fixed, mala, mrw.
TuneOutput run_tune(const TuningRequest& req, const std::string& sampler,
                    double c1 = 0.1, double c2 = 0.1);
std::string format_tune_human(const TuneOutput& t);
std::string format_tune_kv(const TuneOutput& t);

struct RunSummary {
  std::string sampler;
  int K = 1;
  double eta = 0.0;
  std::size_t iterations = 0;
  std::optional<double> accept_rate;
  EvalCounters counters;
  std::uint64_t eval_count_paper = 0;
  Vector mean;
  Matrix covariance;
  double covariance_rel_error = 0.0;  // relative Frobenius error vs the target
};

/// Single chain on a Gaussian target from the feasible start.
RunSummary run_single(const RunSpec& run, const GaussianTarget& target);
std::string format_run_summary(const RunSummary& s);

}  // namespace hmcmix
