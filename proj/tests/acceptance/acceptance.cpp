// Acceptance checks. One PASS/FAIL line per criterion. The exit status counts
// failures not listed with --known-failure N.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <random>
#include <set>
#include <string>

#include "oracles.hpp"
#include "sparsesphere/da_solver.hpp"
#include "sparsesphere/design.hpp"
#include "sparsesphere/errors.hpp"
#include "sparsesphere/experiment.hpp"
#include "sparsesphere/index_lattice.hpp"
#include "sparsesphere/ladder_profile.hpp"
#include "sparsesphere/rule_assembly.hpp"
#include "sparsesphere/ww_solver.hpp"

using namespace sparsesphere;
using Clock = std::chrono::steady_clock;

namespace {

std::set<int> failed;

void report(int id, bool ok, const std::string& detail, Clock::time_point start) {
  const double secs = std::chrono::duration<double>(Clock::now() - start).count();
  std::printf("%s criterion %d: %s [%.1fs]\n", ok ? "PASS" : "FAIL", id, detail.c_str(), secs);
  std::fflush(stdout);
  if (!ok) failed.insert(id);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

const Experiment& experiment() {
  static const Experiment ex(load_ladder("builtin"), 3.0);
  return ex;
}

void knapsack_optimality() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(20240601);
  std::uniform_int_distribution<int> side(1, 5);
  int instances = 0, prefixes = 0, mismatches = 0, resampled = 0;
  while (instances < 240) {
    const int d = 1 + instances % 3;
    std::vector<int> ext;
    for (int k = 0; k < d; ++k) ext.push_back(side(rng));
    const auto syn = oracle::synthetic_box(rng, ext);
    const BoxItems box(syn.extents, syn.p, syn.nu);
    std::optional<DownsetFront> front;
    try {
      front.emplace(box);
    } catch (const CapacityError&) {
      ++resampled;  // too many down-sets to enumerate; draw another box
      continue;
    }
    const auto res = run_da(box, {1e-12, std::uint64_t{1} << 40, 64});
    for (const auto& s : res.trace.steps) {
      ++prefixes;
      if (front->min_cost(s.p_cum) != s.cost_cum) ++mismatches;
    }
    ++instances;
  }
  const double secs = std::chrono::duration<double>(Clock::now() - t0).count();
  report(1, mismatches == 0 && secs < 60.0,
         std::to_string(instances) + " instances, " + std::to_string(prefixes) + " prefixes, " +
             std::to_string(mismatches) + " mismatches, " + std::to_string(resampled) +
             " oversized boxes redrawn",
         t0);
}

void frontier_correctness() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(4711);
  int checks = 0, mismatches = 0;
  std::string sizes;
  for (std::size_t d = 1; d <= 4; ++d) {
    IndexSet s(d);
    std::set<MultiIndex> members;
    // d = 1 is a chain; the per-component cap limits it.
    const int target = d == 1 ? kMaxIndexComponent - 1 : 1000;
    int inserted = 0;
    while (inserted < target) {
      std::vector<MultiIndex> cand;
      for (const auto& f : s.frontier()) {
        int top = 0;
        for (int v : f.components()) top = std::max(top, v);
        if (top < kMaxIndexComponent - 1) cand.push_back(f);
      }
      if (cand.empty()) break;
      const auto j = cand[std::uniform_int_distribution<std::size_t>(0, cand.size() - 1)(rng)];
      s.insert(j);
      members.insert(j);
      ++inserted;
      if (d >= 3 && inserted % 10 != 0 && inserted != target) continue;
      std::vector<int> ext(d, 0);
      for (const auto& m : members)
        for (std::size_t k = 0; k < d; ++k) ext[k] = std::max(ext[k], m[k] + 1);
      ++checks;
      if (oracle::minimal_complement(members, ext) != s.frontier() || !s.is_down_set()) {
        ++mismatches;
      }
    }
    sizes += (d > 1 ? "," : "") + std::to_string(inserted);
  }
  report(2, mismatches == 0,
         "insertions per d=1..4: " + sizes + "; " + std::to_string(checks) + " comparisons, " +
             std::to_string(mismatches) + " mismatches",
         t0);
}

void error_identity() {
  const auto t0 = Clock::now();
  const auto& ex = experiment();
  std::mt19937_64 rng(99);
  int rules = 0;
  double worst = 0.0;
  std::size_t largest = 0;
  for (int d : {1, 2, 3, 4, 6}) {
    for (double g : {0.1, 0.5, 0.9}) {
      const auto space = SpaceParams::geometric(3.0, g, d);
      const auto profs = ex.profiles(space);
      const auto res = run_da(SeparableItems::from_profiles(profs), {1e-12, 3000, 20});
      // Every prefix of the trace is itself a down-set; sample a few.
      std::vector<std::size_t> cuts = {res.trace.steps.size()};
      for (int t = 0; t < 2; ++t) {
        cuts.push_back(std::uniform_int_distribution<std::size_t>(1, res.trace.steps.size())(rng));
      }
      for (std::size_t cut : cuts) {
        IndexSet set(static_cast<std::size_t>(d));
        for (std::size_t i = 0; i < cut; ++i) set.insert(res.trace.steps[i].index);
        const auto rule = materialize(set, profs, ex.ladder());
        if (rule.size() > 3000) continue;
        const double e2 = verify_error(rule, ex.solver().gram(), space);
        worst = std::max(worst, std::abs(e2 - rule.declared_e2()));
        largest = std::max(largest, rule.size());
        ++rules;
      }
    }
  }
  report(3, worst <= 1e-8,
         std::to_string(rules) + " rules up to " + std::to_string(largest) +
             " nodes, max |declared - verified| = " + fmt("%.3g", worst),
         t0);
}

void single_sphere_decay() {
  const auto t0 = Clock::now();
  const auto& ex = experiment();
  const auto& prof = ex.unit_profile();
  std::vector<double> j, le;
  for (int i = 0; i < prof.usable_levels(); ++i) {
    j.push_back(i);
    le.push_back(std::log(prof.e2[static_cast<std::size_t>(i)]));
  }
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double n = static_cast<double>(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) {
    sx += j[i];
    sy += le[i];
    sxx += j[i] * j[i];
    sxy += j[i] * le[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double limit = -3.0 * std::log(2.0) + 0.3;
  report(4, prof.levels() >= 7 && slope <= limit,
         fmt("%g levels, slope %.4f (limit %.4f)", prof.levels(), slope, limit) +
             fmt(", calibrated C = %.4f (reference-design check needs external files)",
                 ex.calibration().C),
         t0);
}

void optimal_below_qmc() {
  const auto t0 = Clock::now();
  const auto& ex = experiment();
  const auto& gram = ex.solver().gram();
  double worst = -HUGE_VAL;
  int checks = 0;
  for (double g : {0.1, 0.5, 1.0}) {
    const auto prof = ex.solver().profile(g);
    for (int j = 0; j < prof.levels(); ++j) {
      const auto m = static_cast<Eigen::Index>(prof.n[static_cast<std::size_t>(j)]);
      // Equal weights: (1 - 1)^2 + gamma 1'G1 / m^2.
      const double qmc = g * gram.topLeftCorner(m, m).sum() / (double(m) * double(m));
      worst = std::max(worst, prof.e2[static_cast<std::size_t>(j)] - qmc);
      ++checks;
    }
  }
  report(5, worst <= 1e-12,
         std::to_string(checks) + " level/gamma pairs, max e2(opt) - e2(qmc) = " +
             fmt("%.3g", worst),
         t0);
}

struct Runs {
  int d;
  double g;
  DaResult da;
  DaResult ww;
  WwParams params;
};

const std::vector<Runs>& comparison_runs() {
  static const auto runs = [] {
    std::vector<Runs> out;
    const auto& ex = experiment();
    for (int d : {1, 2, 4}) {
      for (double g : {0.1, 0.5}) {
        const auto space = SpaceParams::geometric(3.0, g, d);
        const auto items = ex.items(space);
        const auto wp = ex.ww_params(space);
        const DaOptions opt{1e-12, 20000, 20};
        out.push_back({d, g, run_da(items, opt), run_ww(items, wp, opt), wp});
      }
    }
    return out;
  }();
  return runs;
}

void da_below_ww() {
  const auto t0 = Clock::now();
  int compared = 0, violations = 0, unmatched = 0;
  std::string where;
  for (const auto& r : comparison_runs()) {
    for (const auto& st : r.ww.trace.steps) {
      const auto c = cost_for_error(r.da.trace, st.error);
      if (!c) {
        ++unmatched;
        continue;
      }
      ++compared;
      if (*c > st.cost_cum) {
        if (violations == 0) {
          where = fmt(" (first at d=%g g=%g, WW cost %g", r.d, r.g, double(st.cost_cum)) +
                  fmt(" vs DA %g)", double(*c));
        }
        ++violations;
      }
    }
  }
  // The weaker statement that does hold for greedy prefixes: WW never reaches
  // the profit of a DA prefix at lower cost.
  int prefix_checks = 0, prefix_violations = 0;
  for (const auto& r : comparison_runs()) {
    for (const auto& q : r.da.trace.steps) {
      for (const auto& st : r.ww.trace.steps) {
        if (st.p_cum >= q.p_cum) {
          ++prefix_checks;
          if (st.cost_cum < q.cost_cum) ++prefix_violations;
          break;
        }
      }
    }
  }
  where += "; at DA prefix levels " + std::to_string(prefix_violations) + " of " +
           std::to_string(prefix_checks) + " WW cheaper";
  report(6, violations == 0 && unmatched == 0,
         std::to_string(compared) + " WW error levels compared, " + std::to_string(violations) +
             " with DA costlier, " + std::to_string(unmatched) + " unmatched" + where,
         t0);
}

void bound_dominance() {
  const auto t0 = Clock::now();
  const auto& ex = experiment();
  const auto& cal = ex.calibration();
  const bool calibrated =
      cal.growth_criterion_ok && decay_criterion_holds(ex.unit_profile(), cal.C, cal.D);
  const auto grid = default_eta_grid();
  int checks = 0, violations = 0;
  double tightest = HUGE_VAL;
  for (const auto& r : comparison_runs()) {
    for (const auto* t : {&r.da.trace, &r.ww.trace}) {
      for (const auto& st : t->steps) {
        const double b = min_ww_cost_bound(st.error, r.params, grid).bound;
        ++checks;
        tightest = std::min(tightest, b / static_cast<double>(st.cost_cum));
        if (b < static_cast<double>(st.cost_cum)) ++violations;
      }
    }
  }
  report(7, calibrated && violations == 0,
         std::string(calibrated ? "calibration criteria hold; " : "calibration criteria FAIL; ") +
             std::to_string(checks) + " trace points, " + std::to_string(violations) +
             " above the bound, min bound/cost = " + fmt("%.3g", tightest),
         t0);
}

void d1_slope() {
  const auto t0 = Clock::now();
  const auto& ex = experiment();
  const auto items = ex.items(SpaceParams::geometric(3.0, 0.1, 1));
  const auto res = run_da(items, {1e-12, 100000, 20});
  const std::size_t tail = std::min<std::size_t>(6, res.trace.steps.size());
  const double s = tail_slope(res.trace, tail);
  report(8, s >= -1.9 && s <= -1.1,
         fmt("tail slope over last %g steps = %.4f (window [-1.9, -1.1])", double(tail), s), t0);
}

void weight_decay_ordering() {
  const auto t0 = Clock::now();
  const auto& ex = experiment();
  std::vector<double> err;
  std::string detail;
  for (double g : {0.1, 0.5, 0.9}) {
    const auto res = run_da(ex.items(SpaceParams::geometric(3.0, g, 8)), {1e-12, 5000, 20});
    const auto e = error_at_cost(res.trace, 5000);
    err.push_back(e.value_or(HUGE_VAL));
    if (!detail.empty()) detail += ", ";
    detail += fmt("g=%g: %.4g", g, err.back());
  }
  report(9, err[0] < err[1] && err[1] < err[2], "errors at n=5000, d=8: " + detail, t0);
}

void strength_verification() {
  const auto t0 = Clock::now();
  int passed = 0, total = 0;
  for (const auto& name : builtin_design_names()) {
    ++total;
    if (verify_strength(builtin_design(name), 1e-9).passed) ++passed;
  }
  auto pole = builtin_design("pole");
  pole.strength = 1;
  const bool negative = !verify_strength(pole, 1e-9).passed;
  report(10, passed == total && negative,
         std::to_string(passed) + "/" + std::to_string(total) +
             " built-in designs pass; single point at strength 1 " +
             (negative ? "fails as expected" : "unexpectedly passes"),
         t0);
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> known;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--known-failure" && i + 1 < argc) {
      known.insert(std::stoi(argv[++i]));
    } else {
      std::fprintf(stderr, "usage: acceptance [--known-failure N]...\n");
      return 2;
    }
  }
  try {
    knapsack_optimality();
    frontier_correctness();
    error_identity();
    single_sphere_decay();
    optimal_below_qmc();
    da_below_ww();
    bound_dominance();
    d1_slope();
    weight_decay_ordering();
    strength_verification();
  } catch (const std::exception& e) {
    std::printf("FAIL aborted: %s\n", e.what());
    return 1;
  }
  int unexpected = 0;
  for (int id : failed) {
    if (!known.count(id)) ++unexpected;
  }
  for (int id : known) {
    if (!failed.count(id)) std::printf("note: criterion %d was listed as known failure but passed\n", id);
  }
  std::printf("%zu of 10 criteria failed (%d unexpected)\n", failed.size(), unexpected);
  return unexpected;
}
