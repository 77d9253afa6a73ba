#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace hmcmix {

enum class StartKind { kWarm, kFeasible };

struct TuningRequest {
  int d = 1;
  double kappa = 1.0;
  double L = 1.0;
  double L_H = 0.0;
  double epsilon = 0.1;  // in (0, 1)
  double beta = 1.0;     // warmness, >= 1
  StartKind start = StartKind::kWarm;
  double constant_c = 1.0;
  double k_multiplier = 1.0;

  void validate() const;
};

enum class Regime {
  kWarmCor2a,
  kFeasibleCor2b,
  kTable4Row1,
  kTable4Row2,
  kTable4Row3,
  kTable4Row4,
  kHmcAgg,
  kMalaThm3,
  kMrwThm3,
};

std::string_view regime_name(Regime regime);

struct ParamChoice {
  int K = 1;
  double eta = 0.0;
  Regime regime = Regime::kWarmCor2a;
  bool satisfies_conditions = false;
  std::vector<std::string> warnings;
};

/// r(s) = 1 + max{ (log(1/s)/d)^{1/4}, (log(1/s)/d)^{1/2} } for s in (0, 1].
double radius_r(double s, int d);
/// Same function, parameterized by log(1/s) >= 0 so that tiny s (e.g.
/// eps^2 / (2 kappa^d)) does not underflow.
double radius_r_log(double log_inv_s, int d);

/// sqrt( 1 / (c L r(eps^2/(3 beta)) d^{7/6}) ). When eps^2/(3 beta) > 1 the
/// argument is clamped to 1 and a warning appended to `warnings`.
double eta_warm(const TuningRequest& req,
                std::vector<std::string>* warnings = nullptr);

/// sqrt( 1/(c L r(eps^2/(2 kappa^d))) * min{ 1/(d kappa^{1/2}),
///   1/(d^{2/3} kappa^{5/6}), 1/(d^{1/2} kappa^{3/2}) } ).
double eta_feasible(const TuningRequest& req);

/// Warm start: K = ceil(k_multiplier d^{1/4}), eta = eta_warm.
/// Feasible start: leapfrog count and step from the kappa-vs-d regime table.
ParamChoice select_hmc_params(const TuningRequest& req);

/// Aggressive choice for targets with negligible Hessian-Lipschitz constant:
/// K = ceil(k_multiplier d^{1/8} kappa^{1/4}), eta^2 = 1/(c L K d^{1/2}).
ParamChoice select_hmcagg_params(const TuningRequest& req);


struct MalaMrwSteps {
  double eta_mala;
  double eta_mrw;
};

/// eta_MALA = c1 / (L d max{1, sqrt(kappa/d)}), eta_MRW = c2 / (L d kappa).
MalaMrwSteps mala_mrw_steps(int d, double kappa, double L, double c1,
                            double c2);

enum class ConditionForm {
  kOverlap,     // trajectory bound plus six-term step bound with M supplied
  kCorollary3,  // seven-term bound written in kappa and r(s)
};

struct StepConditionInputs {
  int K = 1;
  double eta = 0.0;
  int d = 1;
  double L = 1.0;
  double L_H = 0.0;
  double M = 0.0;  // gradient bound on the high-mass region
  double c = 1.0;
  ConditionForm form = ConditionForm::kOverlap;
  // Only read by the Corollary 3 form.
  double kappa = 1.0;
  double r_s = 1.0;
};

struct ConditionTerm {
  std::string name;
  double value;  // left-hand side (K^2 eta^2 or eta^2)
  double bound;  // right-hand side; +inf when the term drops out
  double slack() const { return bound - value; }
  bool ok() const { return value <= bound; }
};

struct StepConditionReport {
  bool holds = true;
  std::vector<ConditionTerm> terms;
};

StepConditionReport check_step_condition(const StepConditionInputs& in);

/// M = L sqrt(d/m) r(s): gradient norm bound on the high-mass ball.
double grad_bound_M(double s, int d, double m, double L);
/// Radius r(s) sqrt(d/m) of the ball around the mode.
double ball_radius(double s, int d, double m);

/// ceil that ignores floating-point noise just above an integer (relative
/// 1e-12), floored at 1.
int ceil_count(double x);

/// Feasible start with K = ceil(k_multiplier kappa^{3/4}) and eta = eta_feasible.
ParamChoice select_hmc_feasible_fixed(const TuningRequest& req);

/// Overlap-form step condition for (K, eta) with M and r(s) taken from the
/// request's start kind (warm: s = eps^2/(3 beta); feasible: eps^2/(2 kappa^d)).
StepConditionReport step_condition_for(const TuningRequest& req, int K,
                                       double eta,
                                       ConditionForm form = ConditionForm::kOverlap);

}  // namespace hmcmix
