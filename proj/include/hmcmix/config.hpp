#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hmcmix/targets.hpp"

namespace hmcmix {

/// Which chain a scaling-study column refers to. HMCAGG is HMC with the
/// aggressive leapfrog/step rule.
enum class StudySampler { kMrw, kMala, kHmc, kHmcAgg };

std::string study_sampler_name(StudySampler s);
StudySampler parse_study_sampler(const std::string& name);

enum class BasisKind { kIdentity, kRandomOrthonormal };

struct TargetSpec {
  std::string kind = "gaussian_spectrum";
  std::vector<double> sqrt_eigenvalues;  // explicit list, or
  double min = 1.0;                      // linear spacing from min to max
  double max = 2.0;
  std::size_t count = 0;
  BasisKind basis = BasisKind::kIdentity;
  std::uint64_t basis_seed = 0;

  std::vector<double> resolve_spectrum() const;
  void validate() const;
};

GaussianTarget build_target(const TargetSpec& spec);

struct KappaRule {
  enum class Kind { kConstant, kPowerOfD } kind = Kind::kConstant;
  double value = 4.0;  // kappa, or the exponent of d
  double at(int d) const;
};

struct StudyConstants {
  double c = 1.0;
  double c1 = 0.1;
  double c2 = 0.1;
  double k_multiplier = 4.0;
};

struct ExperimentSpec {
  std::vector<int> d_grid{2, 4, 8, 16, 32, 64};
  KappaRule kappa_rule;
  std::vector<StudySampler> samplers{StudySampler::kMrw, StudySampler::kMala,
                                     StudySampler::kHmc, StudySampler::kHmcAgg};
  int replicas = 25;
  int repeats = 3;
  double delta = 0.04;
  double level = 0.75;
  std::size_t max_iters = 200000;
  std::uint64_t base_seed = 1;
  StudyConstants constants;
  std::string init = "feasible";
  std::string output_dir = "out";
  double epsilon = 0.1;
  double beta = 1.0;
  double laziness = 0.0;
  double sqrt_eig_min = 1.0;
  BasisKind basis = BasisKind::kIdentity;
  int workers = 1;

  void validate() const;
};

struct RunSpec {
  std::string sampler = "hmc";
  std::size_t iterations = 1000;
  std::optional<double> step;  // tuned when absent
  std::optional<int> leapfrog_steps;
  double laziness = 0.0;
  std::uint64_t seed = 1;
  std::string start = "warm";
  double epsilon = 0.1;
  double beta = 1.0;
  double c = 1.0;
  double k_multiplier = 4.0;
};

struct Config {
  std::optional<ExperimentSpec> experiment;
  std::optional<TargetSpec> target;
  std::optional<RunSpec> run;
};

/// INI file with sections [experiment], [constants], [target], [run].
Config parse_config_text(const std::string& text);
Config load_config(const std::string& path);

/// Serializes the spec as the [experiment] and [constants] sections of a
/// config file; parse_config_text reads it back to an equal spec.
std::string experiment_to_ini(const ExperimentSpec& spec);

/// Shortest decimal that round-trips, capped at 17 significant digits.
std::string format_double(double x);

}  // namespace hmcmix
