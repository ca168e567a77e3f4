// Experiment driver: ladder profiles, DA/WW convergence runs, WW cost bounds,
// oracle verification and rule export.
#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <string>
#include <vector>

#include "sparsesphere/da_solver.hpp"
#include "sparsesphere/design.hpp"
#include "sparsesphere/errors.hpp"
#include "sparsesphere/experiment.hpp"
#include "sparsesphere/ladder_profile.hpp"
#include "sparsesphere/rule_assembly.hpp"
#include "sparsesphere/ww_solver.hpp"

namespace ss = sparsesphere;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 2;
constexpr int kExitData = 3;
constexpr int kExitVerify = 4;

struct Config {
  double r = 3.0;
  double g = 0.5;
  int d = 4;
  double eps = 1e-6;
  std::uint64_t max_points = 100000;
  int max_norm = 20;
  std::string ladder = "builtin";
  int levels = -1;
  std::string algo = "both";
  std::string out = ".";
  int eta_grid = 19;
  double bound_eps = 1e-5;
};

class ConfigError : public std::runtime_error {
  using std::runtime_error::runtime_error;
};

void check(const Config& c) {
  if (!(c.g > 0.0 && c.g <= 1.0)) throw ConfigError("--g must lie in (0, 1]");
  if (c.d < 1 || c.d > 16) throw ConfigError("--d must lie in 1..16");
  if (!(c.eps > 0.0 && c.eps < 1.0)) throw ConfigError("--eps must lie in (0, 1)");
  if (c.max_points < 1) throw ConfigError("--max-points must be >= 1");
  if (c.max_norm < 0) throw ConfigError("--max-norm must be >= 0");
  if (c.eta_grid < 1) throw ConfigError("--eta-grid must be >= 1");
  if (!(c.bound_eps > 0.0 && c.bound_eps < 1.0)) throw ConfigError("--eps must lie in (0, 1)");
  if (c.algo != "da" && c.algo != "ww" && c.algo != "both") {
    throw ConfigError("--algo must be da, ww or both");
  }
}

std::vector<std::string> algos(const Config& c) {
  if (c.algo == "both") return {"da", "ww"};
  return {c.algo};
}

std::string out_path(const Config& c, const std::string& name) {
  std::filesystem::create_directories(c.out);
  return (std::filesystem::path(c.out) / name).string();
}

std::string tag(const Config& c) {
  return "r" + ss::name_number(c.r) + "-d" + std::to_string(c.d) + "-g" + ss::name_number(c.g);
}

std::vector<double> eta_grid(const Config& c) {
  std::vector<double> g;
  for (int i = 1; i <= c.eta_grid; ++i) g.push_back(static_cast<double>(i) / (c.eta_grid + 1));
  return g;
}

ss::DaOptions options(const Config& c) {
  return {c.eps, c.max_points, c.max_norm};
}

ss::DaResult run_algo(const std::string& algo, const ss::Experiment& ex,
                      const ss::SpaceParams& space, const ss::DaOptions& opt) {
  const auto items = ex.items(space);
  if (algo == "da") return ss::run_da(items, opt);
  return ss::run_ww(items, ex.ww_params(space), opt);
}

void print_calibration(const ss::CalibrationResult& cal) {
  std::printf("calibration: C=%.6g D=%.6g rho=%.6g growth_criterion=%s\n", cal.C, cal.D, cal.rho,
              cal.growth_criterion_ok ? "ok" : "violated");
}

int cmd_profile(const Config& c) {
  const ss::Experiment ex(ss::load_ladder(c.ladder, c.levels), c.r);
  for (const auto& w : ex.ladder().warnings()) std::fprintf(stderr, "warning: %s\n", w.c_str());
  const auto path = out_path(c, "profile-r" + ss::name_number(c.r) + ".csv");
  ss::write_file_atomic(path, [&](std::ostream& o) { ss::write_profile_csv(o, ex.unit_profile()); });
  print_calibration(ex.calibration());
  std::printf("wrote %s\n", path.c_str());
  return kExitOk;
}

int cmd_run(const Config& c) {
  const ss::Experiment ex(ss::load_ladder(c.ladder, c.levels), c.r);
  const auto space = ss::SpaceParams::geometric(c.r, c.g, c.d);
  for (const auto& algo : algos(c)) {
    const auto res = run_algo(algo, ex, space, options(c));
    const auto& t = res.trace;
    const auto run = out_path(c, "run-" + algo + "-" + tag(c) + ".csv");
    const auto trace = out_path(c, "trace-" + algo + "-" + tag(c) + ".csv");
    ss::write_file_atomic(run, [&](std::ostream& o) { ss::write_convergence_csv(o, t); });
    ss::write_file_atomic(trace, [&](std::ostream& o) { ss::write_trace_csv(o, t); });
    std::printf("%s: steps=%zu cost=%llu error=%.6g terminal=%s\n", algo.c_str(), t.steps.size(),
                static_cast<unsigned long long>(t.steps.back().cost_cum), t.steps.back().error,
                ss::to_string(t.terminal).c_str());
    std::printf("wrote %s\n", run.c_str());
  }
  return kExitOk;
}

int cmd_bound(const Config& c) {
  const ss::Experiment ex(ss::load_ladder(c.ladder, c.levels), c.r);
  const auto space = ss::SpaceParams::geometric(c.r, c.g, c.d);
  const auto params = ex.ww_params(space);
  const auto grid = eta_grid(c);
  const auto path = out_path(c, "bound-" + tag(c) + ".csv");
  ss::write_file_atomic(path, [&](std::ostream& o) {
    o << "Eps,Bound_Cost\n";
    char buf[64];
    for (int i = 1;; ++i) {
      const double eps = std::pow(10.0, -i / 10.0);
      if (eps < c.bound_eps * (1.0 - 1e-12)) break;
      std::snprintf(buf, sizeof buf, "%.17g,%.17g\n", eps,
                    ss::min_ww_cost_bound(eps, params, grid).bound);
      o << buf;
    }
  });
  print_calibration(ex.calibration());
  std::printf("wrote %s\n", path.c_str());
  return kExitOk;
}

struct Report {
  int failures = 0;
  void line(bool ok, const std::string& name, const std::string& detail) {
    if (!ok) ++failures;
    std::printf("%s %s: %s\n", ok ? "PASS" : "FAIL", name.c_str(), detail.c_str());
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

int cmd_verify(const Config& c) {
  const ss::Experiment ex(ss::load_ladder(c.ladder, c.levels), c.r);
  Report rep;

  for (const auto& design : ex.ladder().designs()) {
    const auto s = ss::verify_strength(design, ss::kDefaultStrengthTolerance);
    rep.line(s.passed, "strength " + design.label + " (" + design.source + ")",
             "m=" + std::to_string(design.cardinality()) + " t=" + std::to_string(design.strength) +
                 fmt(" max_residual=%.3g", s.max_residual));
  }

  const auto& prof = ex.unit_profile();
  double telescoped = 0.0, worst_tel = 0.0;
  for (int j = 0; j < prof.levels(); ++j) {
    const auto i = static_cast<std::size_t>(j);
    const double bound = 1e-8 * static_cast<double>(prof.n[i]);
    if (!(prof.flags[i] & ss::kLevelLeastSquares)) {
      rep.line(prof.residuals[i] <= bound, "weight residual level " + std::to_string(j),
               fmt("%.3g", prof.residuals[i]) + fmt(" <= %.3g", bound));
    }
    telescoped += prof.delta2[i];
    if (!(prof.flags[i] & ss::kLevelTerminal)) {
      worst_tel = std::max(worst_tel, std::abs(telescoped + prof.e2[i] - 1.0));
    }
  }
  rep.line(worst_tel <= 1e-10, "telescoping identity", fmt("max deviation %.3g", worst_tel));

  const auto space = ss::SpaceParams::geometric(c.r, 0.5, 2);
  const auto profiles = ex.profiles(space);
  const auto items = ss::SeparableItems::from_profiles(profiles);
  const auto small = ss::run_da(items, {1e-6, 150, c.max_norm});
  const auto rule = ss::materialize(small.set, profiles, ex.ladder());
  const double direct = ss::verify_error_direct(rule, space);
  rep.line(std::abs(direct - rule.declared_e2()) <= 1e-8, "declared vs direct e2 (d=2)",
           "n=" + std::to_string(rule.size()) + fmt(" |diff|=%.3g", direct - rule.declared_e2()));

  std::vector<int> ext(2, std::min(4, items.depth(0)));
  ext[1] = std::min(4, items.depth(1));
  std::vector<double> p;
  std::vector<std::uint64_t> nu;
  for (int a = 0; a < ext[0]; ++a)
    for (int b = 0; b < ext[1]; ++b) {
      const auto it = *items.item(ss::MultiIndex{a, b});
      p.push_back(it.p);
      nu.push_back(it.nu);
    }
  const ss::BoxItems box(ext, p, nu);
  const ss::DownsetFront front(box);
  const auto da = ss::run_da(box, {1e-12, c.max_points, c.max_norm});
  bool optimal = true;
  for (const auto& s : da.trace.steps) {
    const auto best = front.min_cost(s.p_cum * (1.0 - 1e-12));
    optimal = optimal && best && *best == s.cost_cum;
  }
  rep.line(optimal, "DA prefix optimality (d=2 box)",
           std::to_string(da.trace.steps.size()) + " prefixes vs " +
               std::to_string(front.downsets_enumerated()) + " down-sets");

  return rep.failures ? kExitVerify : kExitOk;
}

int cmd_assemble(const Config& c) {
  const ss::Experiment ex(ss::load_ladder(c.ladder, c.levels), c.r);
  const auto space = ss::SpaceParams::geometric(c.r, c.g, c.d);
  const auto profiles = ex.profiles(space);
  int rc = kExitOk;
  for (const auto& algo : algos(c)) {
    const auto res = run_algo(algo, ex, space, options(c));
    const auto rule = ss::materialize(res.set, profiles, ex.ladder());
    const double e2 = ss::verify_error(rule, ex.solver().gram(), space);
    const double diff = e2 - rule.declared_e2();
    const auto path = out_path(c, "rule-" + algo + "-" + tag(c) + ".csv");
    ss::write_file_atomic(path, [&](std::ostream& o) { ss::write_rule_csv(o, rule); });
    std::printf("%s: nodes=%zu pruned=%zu declared_e2=%.17g verified_e2=%.17g diff=%.3g\n",
                algo.c_str(), rule.size(), rule.pruned(), rule.declared_e2(), e2, diff);
    std::printf("wrote %s\n", path.c_str());
    if (!(std::abs(diff) <= 1e-8)) rc = kExitVerify;
  }
  return rc;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dimension-adaptive sparse-grid quadrature on products of spheres"};
  app.require_subcommand(1);
  Config cfg;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--r", cfg.r, "Kernel smoothness r")->capture_default_str();
    sub->add_option("--ladder", cfg.ladder, "Ladder manifest path or 'builtin'")
        ->capture_default_str();
    sub->add_option("--levels", cfg.levels, "Highest ladder level to use (-1: all)")
        ->capture_default_str();
    sub->add_option("--out", cfg.out, "Output directory")->capture_default_str();
  };
  auto space = [&](CLI::App* sub) {
    sub->add_option("--g", cfg.g, "Weight decay base, gamma_k = g^k")->capture_default_str();
    sub->add_option("--d", cfg.d, "Dimension")->capture_default_str();
    sub->add_option("--max-norm", cfg.max_norm, "Index 1-norm cap")->capture_default_str();
  };
  auto run_opts = [&](CLI::App* sub) {
    sub->add_option("--eps", cfg.eps, "Target error")->capture_default_str();
    sub->add_option("--max-points", cfg.max_points, "Point budget")->capture_default_str();
    sub->add_option("--algo", cfg.algo, "da, ww or both")->capture_default_str();
  };

  auto* profile = app.add_subcommand("profile", "Profile the ladder and calibrate C, D, rho");
  common(profile);
  auto* run = app.add_subcommand("run", "Convergence run (Cost,Error per step)");
  common(run);
  space(run);
  run_opts(run);
  auto* bound = app.add_subcommand("bound", "Eta-minimized WW cost bound curve");
  common(bound);
  space(bound);
  bound->add_option("--eps", cfg.bound_eps, "Smallest eps on the grid")->capture_default_str();
  bound->add_option("--eta-grid", cfg.eta_grid, "Number of eta values in (0,1)")
      ->capture_default_str();
  auto* verify = app.add_subcommand("verify", "Run the oracle checks");
  common(verify);
  verify->add_option("--max-norm", cfg.max_norm, "Index 1-norm cap")->capture_default_str();
  verify->add_option("--max-points", cfg.max_points, "Point budget")->capture_default_str();
  auto* assemble = app.add_subcommand("assemble", "Materialize and verify the rule");
  common(assemble);
  space(assemble);
  run_opts(assemble);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    check(cfg);
    if (profile->parsed()) return cmd_profile(cfg);
    if (run->parsed()) return cmd_run(cfg);
    if (bound->parsed()) return cmd_bound(cfg);
    if (verify->parsed()) return cmd_verify(cfg);
    if (assemble->parsed()) return cmd_assemble(cfg);
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const ss::ContractError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const ss::DomainError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const ss::CapacityError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitConfig;
  } catch (const ss::LoadError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const ss::LadderError& e) {
    std::fprintf(stderr, "data error: %s\n", e.what());
    return kExitData;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return kExitOk;
}
