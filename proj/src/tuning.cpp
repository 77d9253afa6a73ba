#include "hmcmix/tuning.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "hmcmix/error.hpp"

namespace hmcmix {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
}

void TuningRequest::validate() const {
  require(d >= 1, ErrorCode::kInvalidArgument, "tuning: d must be >= 1");
  require(kappa >= 1.0, ErrorCode::kInvalidArgument, "tuning: kappa must be >= 1");
  require(L > 0, ErrorCode::kInvalidArgument, "tuning: L must be > 0");
  require(L_H >= 0, ErrorCode::kInvalidArgument, "tuning: L_H must be >= 0");
  require(epsilon > 0 && epsilon < 1, ErrorCode::kInvalidArgument,
          "tuning: epsilon must lie in (0, 1)");
  require(beta >= 1, ErrorCode::kInvalidArgument, "tuning: beta must be >= 1");
  require(constant_c > 0, ErrorCode::kInvalidArgument,
          "tuning: constant_c must be > 0");
  require(k_multiplier > 0, ErrorCode::kInvalidArgument,
          "tuning: k_multiplier must be > 0");
}

std::string_view regime_name(Regime regime) {
  switch (regime) {
    case Regime::kWarmCor2a: return "warm_cor2a";
    case Regime::kFeasibleCor2b: return "feasible_cor2b";
    case Regime::kTable4Row1: return "table4_row1";
    case Regime::kTable4Row2: return "table4_row2";
    case Regime::kTable4Row3: return "table4_row3";
    case Regime::kTable4Row4: return "table4_row4";
    case Regime::kHmcAgg: return "hmcagg";
    case Regime::kMalaThm3: return "mala_thm3";
    case Regime::kMrwThm3: return "mrw_thm3";
  }
  return "?";
}

int ceil_count(double x) {
  if (!(x > 1.0)) return 1;
  return static_cast<int>(std::ceil(x * (1.0 - 1e-12)));
}

double radius_r_log(double log_inv_s, int d) {
  require(log_inv_s >= 0 && !std::isnan(log_inv_s), ErrorCode::kDomain,
          "radius_r: s must lie in (0, 1]");
  require(d >= 1, ErrorCode::kDomain, "radius_r: d must be >= 1");
  const double t = log_inv_s / d;
  return 1.0 + std::max(std::pow(t, 0.25), std::sqrt(t));
}

double radius_r(double s, int d) {
  require(s > 0 && s <= 1, ErrorCode::kDomain, "radius_r: s must lie in (0, 1]");
  return radius_r_log(-std::log(s), d);
}

double eta_warm(const TuningRequest& req, std::vector<std::string>* warnings) {
  req.validate();
  double s = req.epsilon * req.epsilon / (3.0 * req.beta);
  if (s > 1.0) {
    if (warnings) {
      warnings->push_back("eps^2/(3 beta) > 1; clamped radius argument to 1");
    }
    s = 1.0;
  }
  const double r = radius_r(s, req.d);
  return std::sqrt(1.0 / (req.constant_c * req.L * r *
                          std::pow(static_cast<double>(req.d), 7.0 / 6.0)));
}

namespace {

double feasible_log_inv_s(const TuningRequest& req) {
  // log(2 kappa^d / eps^2)
  return req.d * std::log(req.kappa) +
         std::log(2.0 / (req.epsilon * req.epsilon));
}

}  // namespace

double eta_feasible(const TuningRequest& req) {
  req.validate();
  const double d = req.d;
  const double k = req.kappa;
  const double r = radius_r_log(feasible_log_inv_s(req), req.d);
  const double term = std::min({1.0 / (d * std::sqrt(k)),
                                1.0 / (std::pow(d, 2.0 / 3.0) * std::pow(k, 5.0 / 6.0)),
                                1.0 / (std::sqrt(d) * std::pow(k, 1.5))});
  return std::sqrt(term / (req.constant_c * req.L * r));
}

namespace {

double warm_log_inv_s(const TuningRequest& req) {
  const double s = req.epsilon * req.epsilon / (3.0 * req.beta);
  return s >= 1.0 ? 0.0 : -std::log(s);
}

double start_log_inv_s(const TuningRequest& req) {
  return req.start == StartKind::kWarm ? warm_log_inv_s(req)
                                       : feasible_log_inv_s(req);
}

void attach_condition(const TuningRequest& req, ParamChoice& choice) {
  choice.satisfies_conditions =
      step_condition_for(req, choice.K, choice.eta).holds;
}

}  // namespace

StepConditionReport step_condition_for(const TuningRequest& req, int K,
                                       double eta, ConditionForm form) {
  req.validate();
  const double m = req.L / req.kappa;
  const double r = radius_r_log(start_log_inv_s(req), req.d);
  StepConditionInputs in;
  in.K = K;
  in.eta = eta;
  in.d = req.d;
  in.L = req.L;
  in.L_H = req.L_H;
  in.M = req.L * std::sqrt(req.d / m) * r;
  in.c = req.constant_c;
  in.form = form;
  in.kappa = req.kappa;
  in.r_s = r;
  return check_step_condition(in);
}

ParamChoice select_hmc_feasible_fixed(const TuningRequest& req) {
  req.validate();
  ParamChoice out;
  out.regime = Regime::kFeasibleCor2b;
  out.K = ceil_count(req.k_multiplier * std::pow(req.kappa, 0.75));
  out.eta = eta_feasible(req);
  TuningRequest feas = req;
  feas.start = StartKind::kFeasible;
  attach_condition(feas, out);
  return out;
}

ParamChoice select_hmc_params(const TuningRequest& req) {
  req.validate();
  ParamChoice out;
  const double d = req.d;
  const double k = req.kappa;
  const double cL = req.constant_c * req.L;
  if (req.start == StartKind::kWarm) {
    out.regime = Regime::kWarmCor2a;
    out.K = ceil_count(req.k_multiplier * std::pow(d, 0.25));
    out.eta = eta_warm(req, &out.warnings);
    attach_condition(req, out);
    return out;
  }
  const double lo = std::cbrt(d);
  const double hi = std::pow(d, 2.0 / 3.0);
  double eta2;
  if (k < lo) {
    out.regime = Regime::kTable4Row1;
    out.K = ceil_count(std::pow(k, 0.75));
    eta2 = 1.0 / (cL * d * std::sqrt(k));
  } else if (k <= hi) {
    out.regime = Regime::kTable4Row2;
    out.K = ceil_count(std::pow(d, 0.25));
    eta2 = 1.0 / (cL * std::pow(d, 7.0 / 6.0));
  } else if (k <= d) {
    out.regime = Regime::kTable4Row3;
    out.K = ceil_count(std::pow(d, 0.75) * std::pow(k, -0.75));
    eta2 = std::sqrt(k) / (cL * std::pow(d, 1.5));
  } else {
    out.regime = Regime::kTable4Row4;
    out.K = 1;
    eta2 = 1.0 / (cL * std::sqrt(d) * std::sqrt(k));
  }
  out.eta = std::sqrt(eta2);
  attach_condition(req, out);
  return out;
}

ParamChoice select_hmcagg_params(const TuningRequest& req) {
  req.validate();
  ParamChoice out;
  out.regime = Regime::kHmcAgg;
  if (req.L_H > 0) {
    out.warnings.push_back(
        "aggressive parameters assume a negligible Hessian-Lipschitz "
        "constant, but L_H > 0 was declared");
  }
  const double d = req.d;
  out.K = ceil_count(req.k_multiplier * std::pow(d, 0.125) *
                     std::pow(req.kappa, 0.25));
  out.eta =
      std::sqrt(1.0 / (req.constant_c * req.L * out.K * std::sqrt(d)));
  TuningRequest warm = req;
  warm.start = StartKind::kWarm;
  attach_condition(warm, out);
  return out;
}

MalaMrwSteps mala_mrw_steps(int d, double kappa, double L, double c1,
                            double c2) {
  require(d >= 1 && kappa > 0 && L > 0 && c1 > 0 && c2 > 0,
          ErrorCode::kInvalidArgument, "mala_mrw_steps: inputs must be positive");
  const double dd = d;
  return {c1 / (L * dd * std::max(1.0, std::sqrt(kappa / dd))),
          c2 / (L * dd * kappa)};
}

namespace {

// x / y with x / 0 = +inf for x > 0.
double ratio(double x, double y) { return y == 0.0 ? kInf : x / y; }

}  // namespace

StepConditionReport check_step_condition(const StepConditionInputs& in) {
  require(in.K >= 1 && in.eta > 0 && in.d >= 1 && in.L > 0 && in.c > 0 &&
              in.L_H >= 0 && in.M >= 0,
          ErrorCode::kInvalidArgument, "check_step_condition: invalid inputs");
  const double K = in.K;
  const double d = in.d;
  const double L = in.L;
  const double eta2 = in.eta * in.eta;
  const double lh23 = std::pow(in.L_H, 2.0 / 3.0);
  const double theta = ratio(L, lh23);  // L / L_H^{2/3}
  StepConditionReport rep;
  auto add = [&rep](std::string name, double value, double bound) {
    rep.terms.push_back({std::move(name), value, bound});
  };
  const double prefactor = 1.0 / (in.c * L);

  if (in.form == ConditionForm::kOverlap) {
    add("K^2 eta^2 <= 1/(4 max{d^1/2 L, d^2/3 L_H^2/3})", K * K * eta2,
        1.0 / (4.0 * std::max(std::sqrt(d) * L, std::pow(d, 2.0 / 3.0) * lh23)));
    const double m_term = in.M / std::sqrt(L);  // M / L^{1/2}
    add("eta^2 <= 1/(cL K^2)", eta2, prefactor / (K * K));
    add("eta^2 <= 1/(cL K d^1/2)", eta2, prefactor / (K * std::sqrt(d)));
    add("eta^2 <= 1/(cL K^2/3 d^1/3 (M^2/L)^1/3)", eta2,
        prefactor * ratio(1.0, std::pow(K, 2.0 / 3.0) * std::cbrt(d) *
                                   std::cbrt(in.M * in.M / L)));
    add("eta^2 <= 1/(cL K M/L^1/2)", eta2, prefactor * ratio(1.0, K * m_term));
    add("eta^2 <= L/L_H^2/3 / (cL K^2/3 d)", eta2,
        prefactor * theta / (std::pow(K, 2.0 / 3.0) * d));
    const double t6 = ratio(1.0, std::pow(K, 4.0 / 3.0) * m_term);
    add("eta^2 <= (L/L_H^2/3)^1/2 / (cL K^4/3 M/L^1/2)", eta2,
        prefactor * (t6 == kInf || theta == kInf ? kInf : t6 * std::sqrt(theta)));
  } else {
    const double kap = in.kappa;
    const double r = in.r_s;
    add("eta^2 <= 1/(cL K^2 d^1/2)", eta2, prefactor / (K * K * std::sqrt(d)));
    add("eta^2 <= L/L_H^2/3 / (cL K^2 d^2/3)", eta2,
        prefactor * theta / (K * K * std::pow(d, 2.0 / 3.0)));
    add("eta^2 <= 1/(cL K d^1/2)", eta2, prefactor / (K * std::sqrt(d)));
    add("eta^2 <= 1/(cL K^2/3 d^2/3 kappa^1/3 r^2/3)", eta2,
        prefactor / (std::pow(K, 2.0 / 3.0) * std::pow(d, 2.0 / 3.0) *
                     std::cbrt(kap) * std::pow(r, 2.0 / 3.0)));
    add("eta^2 <= 1/(cL K d^1/2 kappa^1/2 r)", eta2,
        prefactor / (K * std::sqrt(d) * std::sqrt(kap) * r));
    add("eta^2 <= L/L_H^2/3 / (cL K^2/3 d)", eta2,
        prefactor * theta / (std::pow(K, 2.0 / 3.0) * d));
    add("eta^2 <= (L/L_H^2/3)^1/2 / (cL K^4/3 d^1/2 kappa^1/2 r)", eta2,
        prefactor * std::sqrt(theta) /
            (std::pow(K, 4.0 / 3.0) * std::sqrt(d) * std::sqrt(kap) * r));
  }
  for (const auto& t : rep.terms) rep.holds = rep.holds && t.ok();
  return rep;
}

double grad_bound_M(double s, int d, double m, double L) {
  require(m > 0, ErrorCode::kPrecondition,
          "grad_bound_M: strong convexity m > 0 is required");
  return L * std::sqrt(d / m) * radius_r(s, d);
}

double ball_radius(double s, int d, double m) {
  require(m > 0, ErrorCode::kPrecondition,
          "ball_radius: strong convexity m > 0 is required");
  return radius_r(s, d) * std::sqrt(d / m);
}

}  // namespace hmcmix
