#include "hmcmix/config.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

namespace hmcmix {

namespace pt = boost::property_tree;

std::string study_sampler_name(StudySampler s) {
  switch (s) {
    case StudySampler::kMrw: return "MRW";
    case StudySampler::kMala: return "MALA";
    case StudySampler::kHmc: return "HMC";
    case StudySampler::kHmcAgg: return "HMCAGG";
  }
  return "?";
}

StudySampler parse_study_sampler(const std::string& name) {
  const std::string n = boost::to_upper_copy(boost::trim_copy(name));
  if (n == "MRW") return StudySampler::kMrw;
  if (n == "MALA") return StudySampler::kMala;
  if (n == "HMC") return StudySampler::kHmc;
  if (n == "HMCAGG") return StudySampler::kHmcAgg;
  fail(ErrorCode::kConfig, "unknown sampler '" + name +
                               "' (expected MRW, MALA, HMC or HMCAGG)");
}

std::string format_double(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

namespace {

double to_double(const std::string& key, const std::string& raw) {
  const std::string s = boost::trim_copy(raw);
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  require(!s.empty() && end == s.c_str() + s.size(), ErrorCode::kConfig,
          "config: '" + key + "' expects a number, got '" + raw + "'");
  return v;
}

std::uint64_t to_u64(const std::string& key, const std::string& raw) {
  const std::string s = boost::trim_copy(raw);
  std::uint64_t v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  require(!s.empty() && ec == std::errc() && ptr == s.data() + s.size(),
          ErrorCode::kConfig,
          "config: '" + key + "' expects a nonnegative integer, got '" + raw + "'");
  return v;
}

int to_int(const std::string& key, const std::string& raw) {
  const std::uint64_t v = to_u64(key, raw);
  require(v <= 1'000'000'000ULL, ErrorCode::kConfig,
          "config: '" + key + "' is out of range");
  return static_cast<int>(v);
}

std::vector<std::string> split_list(const std::string& raw) {
  std::vector<std::string> parts;
  boost::split(parts, raw, boost::is_any_of(","));
  std::vector<std::string> out;
  for (auto& p : parts) {
    boost::trim(p);
    if (!p.empty()) out.push_back(p);
  }
  return out;
}

// d^(2/3) style exponents are accepted as "2/3".
double to_ratio(const std::string& key, const std::string& raw) {
  const auto slash = raw.find('/');
  if (slash == std::string::npos) return to_double(key, raw);
  const double num = to_double(key, raw.substr(0, slash));
  const double den = to_double(key, raw.substr(slash + 1));
  require(den != 0, ErrorCode::kConfig, "config: '" + key + "' divides by zero");
  return num / den;
}

BasisKind to_basis(const std::string& raw) {
  const std::string b = boost::trim_copy(raw);
  if (b == "identity") return BasisKind::kIdentity;
  if (b == "random_orthonormal") return BasisKind::kRandomOrthonormal;
  fail(ErrorCode::kConfig,
       "config: basis must be 'identity' or 'random_orthonormal', got '" + raw + "'");
}

std::string basis_name(BasisKind b) {
  return b == BasisKind::kIdentity ? "identity" : "random_orthonormal";
}

class Section {
 public:
  Section(const pt::ptree* tree, std::string name)
      : tree_(tree), name_(std::move(name)) {}

  std::optional<std::string> get(const std::string& key) {
    seen_.push_back(key);
    if (!tree_) return std::nullopt;
    auto v = tree_->get_optional<std::string>(pt::ptree::path_type(key, '\0'));
    if (!v) return std::nullopt;
    return boost::trim_copy(*v);
  }

  void reject_unknown() const {
    if (!tree_) return;
    for (const auto& [k, _] : *tree_) {
      require(std::find(seen_.begin(), seen_.end(), k) != seen_.end(),
              ErrorCode::kConfig,
              "config: unknown key '" + k + "' in section [" + name_ + "]");
    }
  }

 private:
  const pt::ptree* tree_;
  std::string name_;
  std::vector<std::string> seen_;
};

ExperimentSpec parse_experiment(Section& s, Section& c) {
  ExperimentSpec e;
  if (auto v = s.get("d_grid")) {
    e.d_grid.clear();
    for (const auto& x : split_list(*v)) e.d_grid.push_back(to_int("d_grid", x));
  }
  const auto rule = s.get("kappa_rule");
  const auto kappa = s.get("kappa");
  const auto exponent = s.get("kappa_exponent");
  if (rule && *rule == "power_of_d") {
    e.kappa_rule.kind = KappaRule::Kind::kPowerOfD;
    require(exponent.has_value(), ErrorCode::kConfig,
            "config: kappa_rule = power_of_d requires kappa_exponent");
    e.kappa_rule.value = to_ratio("kappa_exponent", *exponent);
  } else {
    require(!rule || *rule == "constant", ErrorCode::kConfig,
            "config: kappa_rule must be 'constant' or 'power_of_d'");
    if (kappa) e.kappa_rule.value = to_double("kappa", *kappa);
  }
  if (auto v = s.get("samplers")) {
    e.samplers.clear();
    for (const auto& x : split_list(*v)) e.samplers.push_back(parse_study_sampler(x));
  }
  if (auto v = s.get("replicas")) e.replicas = to_int("replicas", *v);
  if (auto v = s.get("repeats")) e.repeats = to_int("repeats", *v);
  if (auto v = s.get("delta")) e.delta = to_double("delta", *v);
  if (auto v = s.get("level")) e.level = to_double("level", *v);
  if (auto v = s.get("max_iters")) e.max_iters = to_u64("max_iters", *v);
  if (auto v = s.get("base_seed")) e.base_seed = to_u64("base_seed", *v);
  if (auto v = s.get("init")) e.init = *v;
  if (auto v = s.get("output_dir")) e.output_dir = *v;
  if (auto v = s.get("epsilon")) e.epsilon = to_double("epsilon", *v);
  if (auto v = s.get("beta")) e.beta = to_double("beta", *v);
  if (auto v = s.get("laziness")) e.laziness = to_double("laziness", *v);
  if (auto v = s.get("sqrt_eig_min")) e.sqrt_eig_min = to_double("sqrt_eig_min", *v);
  if (auto v = s.get("basis")) e.basis = to_basis(*v);
  if (auto v = s.get("workers")) e.workers = to_int("workers", *v);
  if (auto v = c.get("c")) e.constants.c = to_double("c", *v);
  if (auto v = c.get("c1")) e.constants.c1 = to_double("c1", *v);
  if (auto v = c.get("c2")) e.constants.c2 = to_double("c2", *v);
  if (auto v = c.get("k_multiplier")) e.constants.k_multiplier = to_double("k_multiplier", *v);
  e.validate();
  return e;
}

TargetSpec parse_target(Section& s) {
  TargetSpec t;
  if (auto v = s.get("kind")) t.kind = *v;
  if (auto v = s.get("sqrt_eigenvalues")) {
    for (const auto& x : split_list(*v)) {
      t.sqrt_eigenvalues.push_back(to_double("sqrt_eigenvalues", x));
    }
  }
  if (auto v = s.get("spacing")) {
    require(*v == "linear", ErrorCode::kConfig, "config: spacing must be 'linear'");
  }
  if (auto v = s.get("min")) t.min = to_double("min", *v);
  if (auto v = s.get("max")) t.max = to_double("max", *v);
  if (auto v = s.get("count")) t.count = to_u64("count", *v);
  if (auto v = s.get("basis")) t.basis = to_basis(*v);
  if (auto v = s.get("basis_seed")) t.basis_seed = to_u64("basis_seed", *v);
  t.validate();
  return t;
}

RunSpec parse_run(Section& s) {
  RunSpec r;
  if (auto v = s.get("sampler")) r.sampler = boost::to_lower_copy(*v);
  if (auto v = s.get("iterations")) r.iterations = to_u64("iterations", *v);
  if (auto v = s.get("step")) r.step = to_double("step", *v);
  if (auto v = s.get("leapfrog_steps")) r.leapfrog_steps = to_int("leapfrog_steps", *v);
  if (auto v = s.get("laziness")) r.laziness = to_double("laziness", *v);
  if (auto v = s.get("seed")) r.seed = to_u64("seed", *v);
  if (auto v = s.get("start")) r.start = *v;
  if (auto v = s.get("epsilon")) r.epsilon = to_double("epsilon", *v);
  if (auto v = s.get("beta")) r.beta = to_double("beta", *v);
  if (auto v = s.get("c")) r.c = to_double("c", *v);
  if (auto v = s.get("k_multiplier")) r.k_multiplier = to_double("k_multiplier", *v);
  return r;
}

}  // namespace

std::vector<double> TargetSpec::resolve_spectrum() const {
  if (!sqrt_eigenvalues.empty()) return sqrt_eigenvalues;
  return linear_spacing(min, max, count);
}

void TargetSpec::validate() const {
  require(kind == "gaussian_spectrum", ErrorCode::kConfig,
          "config: target kind must be 'gaussian_spectrum'");
  if (sqrt_eigenvalues.empty()) {
    require(count >= 1, ErrorCode::kConfig,
            "config: target needs sqrt_eigenvalues or min/max/count");
    require(min > 0 && max >= min, ErrorCode::kConfig,
            "config: target requires 0 < min <= max");
  }
}

GaussianTarget build_target(const TargetSpec& spec) {
  spec.validate();
  const std::vector<double> s = spec.resolve_spectrum();
  if (spec.basis == BasisKind::kRandomOrthonormal) {
    const Matrix q = random_orthonormal(static_cast<Eigen::Index>(s.size()),
                                        spec.basis_seed);
    return gaussian_from_spectrum(s, &q);
  }
  return gaussian_from_spectrum(s);
}

double KappaRule::at(int d) const {
  return kind == Kind::kConstant ? value : std::pow(static_cast<double>(d), value);
}

void ExperimentSpec::validate() const {
  require(!d_grid.empty(), ErrorCode::kConfig, "experiment: d_grid is empty");
  for (std::size_t i = 0; i < d_grid.size(); ++i) {
    require(d_grid[i] >= 1, ErrorCode::kConfig, "experiment: d must be positive");
    require(i == 0 || d_grid[i] > d_grid[i - 1], ErrorCode::kConfig,
            "experiment: d_grid must be strictly increasing");
  }
  for (int d : d_grid) {
    require(kappa_rule.at(d) >= 1.0, ErrorCode::kConfig,
            "experiment: kappa must be >= 1 on the whole d grid");
  }
  require(!samplers.empty(), ErrorCode::kConfig, "experiment: no samplers");
  require(replicas >= 2, ErrorCode::kConfig, "experiment: replicas >= 2");
  require(repeats >= 1, ErrorCode::kConfig, "experiment: repeats >= 1");
  require(delta > 0, ErrorCode::kConfig, "experiment: delta > 0");
  require(level > 0.5 && level < 1, ErrorCode::kConfig,
          "experiment: level must lie in (0.5, 1)");
  require(max_iters >= 1, ErrorCode::kConfig, "experiment: max_iters >= 1");
  require(init == "feasible", ErrorCode::kConfig, "experiment: init must be 'feasible'");
  require(epsilon > 0 && epsilon < 1, ErrorCode::kConfig,
          "experiment: epsilon must lie in (0, 1)");
  require(beta >= 1, ErrorCode::kConfig, "experiment: beta >= 1");
  require(laziness >= 0 && laziness < 1, ErrorCode::kConfig,
          "experiment: laziness must lie in [0, 1)");
  require(sqrt_eig_min > 0, ErrorCode::kConfig, "experiment: sqrt_eig_min > 0");
  require(constants.c > 0 && constants.c1 > 0 && constants.c2 > 0 &&
              constants.k_multiplier > 0,
          ErrorCode::kConfig, "experiment: constants must be positive");
  require(workers >= 1, ErrorCode::kConfig, "experiment: workers >= 1");
}

Config parse_config_text(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    fail(ErrorCode::kConfig, std::string("config: ") + e.message() +
                                 " (line " + std::to_string(e.line()) + ")");
  }
  for (const auto& [name, _] : tree) {
    // Manifest-only sections are ignored so a manifest parses as a config.
    if (name == "manifest" || name == "params" || name == "seeds" || name == "warnings") {
      continue;
    }
    require(name == "experiment" || name == "constants" || name == "target" ||
                name == "run",
            ErrorCode::kConfig, "config: unknown section [" + name + "]");
  }
  auto child = [&tree](const char* name) -> const pt::ptree* {
    auto c = tree.get_child_optional(name);
    return c ? &*c : nullptr;
  };
  Config cfg;
  Section exp(child("experiment"), "experiment");
  Section con(child("constants"), "constants");
  if (child("experiment") || child("constants")) {
    cfg.experiment = parse_experiment(exp, con);
    exp.reject_unknown();
    con.reject_unknown();
  }
  if (child("target")) {
    Section t(child("target"), "target");
    cfg.target = parse_target(t);
    t.reject_unknown();
  }
  if (child("run")) {
    Section r(child("run"), "run");
    cfg.run = parse_run(r);
    r.reject_unknown();
  }
  return cfg;
}

Config load_config(const std::string& path) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kIo, "config: cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config_text(ss.str());
}

std::string experiment_to_ini(const ExperimentSpec& e) {
  std::ostringstream o;
  auto join = [](const auto& xs, auto fmt) {
    std::string s;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      if (i) s += ",";
      s += fmt(xs[i]);
    }
    return s;
  };
  o << "[experiment]\n";
  o << "d_grid = " << join(e.d_grid, [](int d) { return std::to_string(d); }) << "\n";
  if (e.kappa_rule.kind == KappaRule::Kind::kConstant) {
    o << "kappa_rule = constant\nkappa = " << format_double(e.kappa_rule.value) << "\n";
  } else {
    o << "kappa_rule = power_of_d\nkappa_exponent = "
      << format_double(e.kappa_rule.value) << "\n";
  }
  o << "samplers = " << join(e.samplers, study_sampler_name) << "\n";
  o << "replicas = " << e.replicas << "\n";
  o << "repeats = " << e.repeats << "\n";
  o << "delta = " << format_double(e.delta) << "\n";
  o << "level = " << format_double(e.level) << "\n";
  o << "max_iters = " << e.max_iters << "\n";
  o << "base_seed = " << e.base_seed << "\n";
  o << "init = " << e.init << "\n";
  o << "output_dir = " << e.output_dir << "\n";
  o << "epsilon = " << format_double(e.epsilon) << "\n";
  o << "beta = " << format_double(e.beta) << "\n";
  o << "laziness = " << format_double(e.laziness) << "\n";
  o << "sqrt_eig_min = " << format_double(e.sqrt_eig_min) << "\n";
  o << "basis = " << basis_name(e.basis) << "\n";
  o << "workers = " << e.workers << "\n";
  o << "\n[constants]\n";
  o << "c = " << format_double(e.constants.c) << "\n";
  o << "c1 = " << format_double(e.constants.c1) << "\n";
  o << "c2 = " << format_double(e.constants.c2) << "\n";
  o << "k_multiplier = " << format_double(e.constants.k_multiplier) << "\n";
  return o.str();
}

}  // namespace hmcmix
