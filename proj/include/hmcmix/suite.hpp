#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "hmcmix/rng.hpp"
#include "hmcmix/targets.hpp"

namespace hmcmix {

/// Outcome of one randomized numerical check. `worst_margin` is the
/// smallest normalized slack seen (negative on failure).
struct CheckResult {
  std::string name;
  std::size_t instances = 0;
  std::size_t failures = 0;
  double worst_margin = 0.0;
  std::string failing_instance;  // serialized first failure, empty if none
  std::string note;

  bool passed() const noexcept { return failures == 0 && instances > 0; }
};

struct TheorySuiteOptions {
  bool quick = false;
  std::uint64_t seed = 20190101;
  double strict_c = 2000.0;
};

struct TheoryReport {
  std::vector<CheckResult> checks;
  std::uint64_t seed = 0;
  bool quick = false;

  bool passed() const;
  std::string to_text() const;
};

/// Random Gaussian with d in [1, max_d], kappa log-uniform in [1, max_kappa],
/// sqrt eigenvalues in [1, sqrt(kappa)] with both ends attained, and a
/// random orthonormal basis with probability 1/2.
GaussianTarget random_gaussian_instance(Rng& rng, int max_d = 16,
                                        double max_kappa = 100.0);

std::string describe_gaussian(const GaussianTarget& target);

CheckResult check_mala_hmc_equivalence(std::size_t n, std::uint64_t seed);
CheckResult check_leapfrog_reversibility(std::size_t n, std::uint64_t seed);
CheckResult check_leapfrog_symplectic(std::size_t n, std::uint64_t seed);
CheckResult check_linear_map_crosscheck(std::size_t n, std::uint64_t seed);
CheckResult check_jacobian_bound(std::size_t n, std::uint64_t seed);
CheckResult check_proposal_overlap(std::size_t n, std::uint64_t seed);
CheckResult check_accept_distortion(std::size_t n, std::size_t n_mc,
                                    double strict_c, std::uint64_t seed);
CheckResult check_flow_symmetry(std::size_t n, int max_states,
                                std::uint64_t seed);
CheckResult check_profile_relation(std::size_t n, int max_states,
                                   std::uint64_t seed);
CheckResult check_mixing_bound(std::size_t n, int max_states,
                               std::uint64_t seed);

TheoryReport run_theory_suite(const TheorySuiteOptions& opts);

}  // namespace hmcmix
