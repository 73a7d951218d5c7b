// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "lp_oracle.hpp"
#include "motdual/discretize.hpp"
#include "motdual/hedging.hpp"
#include "motdual/lifting.hpp"
#include "motdual/marginals.hpp"
#include "motdual/mot.hpp"
#include "motdual/paths.hpp"
#include "motdual/payoffs.hpp"

using namespace motdual;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

PathTree make_tree(int N, int m, int J) {
  TreeConfig c;
  c.N = N;
  c.max_jumps = m;
  c.J = J;
  return PathTree::build(c);
}

// Every primal/dual pair solved anywhere in the suite, for the weak duality check.
struct SolvedPair {
  std::string label;
  double primal, dual;
};
std::vector<SolvedPair> g_solved;

void record(const std::string& label, const DualityInstance& d) {
  if (d.primal.status == LpStatus::Optimal && d.dual.status == LpStatus::Optimal)
    g_solved.push_back({label, d.primal.value, d.dual.value});
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

Outcome strong_duality() {
  auto t0 = Clock::now();
  Rng rng(101);
  const int Ns[] = {1, 2, 4};
  const std::function<Claim(double)> claims[] = {
      [](double) { return Claim::lookback_max(); },
      [](double) { return Claim::asian_average(); },
      [](double K) { return Claim::vanilla_call(K); },
      [](double K) { return Claim::lookback_put_on_max(K + 0.5); },
  };
  Outcome o;
  const int count = 24;
  double worst = 0.0;
  for (int i = 0; i < count; ++i) {
    int N = Ns[i % 3], m = 1 + (i / 3) % 3, J = 1 + (i / 9) % 2;
    PathTree tree = make_tree(N, m, J);
    GridMarginal nu = random_terminal_marginal(tree, rng);
    Claim g = claims[i % 4](0.6 + 0.8 * rng.uniform());
    DualityInstance d = solve_duality(tree, g, nu);
    record("duality " + std::to_string(i), d);
    double rel = std::abs(d.dual.value - d.primal.value) / (1.0 + std::abs(d.primal.value));
    worst = std::max(worst, rel);
    if (d.primal.status != LpStatus::Optimal || d.dual.status != LpStatus::Optimal || rel > 1e-8) o.pass = false;
  }
  double t = seconds_since(t0);
  if (t > 120.0) o.pass = false;
  char buf[160];
  std::snprintf(buf, sizeof buf, "%d instances, max relative gap %.3g, %.1f s", count, worst, t);
  o.detail = buf;
  return o;
}

Outcome terminal_identity() {
  Rng rng(202);
  Outcome o;
  double worst = 0.0;
  for (int i = 0; i < 10; ++i) {
    int N = 1 << (i % 3), m = 1 + i % 3;
    PathTree tree = make_tree(N, m, 2);
    GridMarginal nu = random_terminal_marginal(tree, rng);
    double K = 0.5 + rng.uniform();
    double direct = 0.0;
    for (const auto& [k, w] : nu.weights) direct += w * std::max(static_cast<double>(k) / N - K, 0.0);
    DualityInstance d = solve_duality(tree, Claim::vanilla_call(K), nu);
    record("vanilla " + std::to_string(i), d);
    double err = std::max(std::abs(d.primal.value - direct), std::abs(d.dual.value - direct));
    worst = std::max(worst, err);
    if (d.primal.status != LpStatus::Optimal || err > 1e-8) o.pass = false;
  }
  char buf[96];
  std::snprintf(buf, sizeof buf, "10 instances, max error %.3g", worst);
  o.detail = buf;
  return o;
}

Outcome lookback_golden() {
  Marginal mu = Marginal::atomic({{0.5, 0.5}, {1.5, 0.5}});
  GridMarginal nu = project_marginal(mu, 2);
  Outcome o;
  std::string values;
  for (int m = 1; m <= 4; ++m) {
    PathTree tree = make_tree(2, m, m <= 3 ? 3 : 2);
    DualityInstance d = solve_duality(tree, Claim::lookback_max(), nu);
    record("lookback m=" + std::to_string(m), d);
    if (d.primal.status != LpStatus::Optimal || std::abs(d.primal.value - 1.25) > 1e-8 ||
        std::abs(d.dual.value - 1.25) > 1e-8)
      o.pass = false;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%sm=%d: %.12f/%.12f", m > 1 ? ", " : "", m, d.primal.value, d.dual.value);
    values += buf;
  }
  o.detail = values;
  return o;
}

Outcome discrepancy_bound() {
  auto t0 = Clock::now();
  PathGeneratorConfig cfg;
  cfg.volatility = 0.3;
  cfg.step_count = 64;
  cfg.seed = 303;
  const std::size_t n = 10000;
  std::vector<SampledPath> paths = generate_paths(cfg, n);
  const Claim claims[] = {Claim::lookback_max(), Claim::asian_average(), Claim::vanilla_call(1.0)};
  std::size_t bound_violations = 0, shortfall_violations = 0, checks = 0;
  double worst_ratio = 0.0;
  for (int N : {4, 16, 64}) {
    for (const SampledPath& p : paths) {
      SnappedGaps snapped = snap_gaps(crossing_times(p, N));
      if (snapped.total_shortfall > 1.0 / N) ++shortfall_violations;
      for (const Claim& g : claims) {
        DiscrepancyCheck c = discrepancy_bound_check(g, p, N);
        ++checks;
        if (!c.ok) ++bound_violations;
        if (c.rhs > 0.0) worst_ratio = std::max(worst_ratio, c.lhs / c.rhs);
      }
    }
  }
  double t = seconds_since(t0);
  Outcome o;
  o.pass = bound_violations == 0 && shortfall_violations == 0 && t <= 180.0;
  char buf[200];
  std::snprintf(buf, sizeof buf, "%zu checks, %zu bound violations, %zu shortfall violations, max lhs/rhs %.3f, %.1f s",
                checks, bound_violations, shortfall_violations, worst_ratio, t);
  o.detail = buf;
  return o;
}

Outcome alpha_hedge_check() {
  PathGeneratorConfig cfg;
  cfg.volatility = 0.5;
  cfg.step_count = 64;
  cfg.seed = 404;
  std::vector<SampledPath> paths = generate_paths(cfg, 10000);
  std::size_t violations = 0, reached = 0;
  double worst = INFINITY;
  for (double K : {2.0, 4.0}) {
    for (int N : {8, 32}) {
      SemiStaticPortfolio pi = alpha_hedge(N, K, 2.0);
      for (const SampledPath& p : paths) {
        AlphaHedgeCheck c = check_alpha_hedge(pi, K, p);
        violations += c.violations;
        worst = std::min(worst, c.min_margin);
        if (sup_norm(p) >= K) ++reached;
      }
    }
  }
  Outcome o;
  o.pass = violations == 0;
  char buf[160];
  std::snprintf(buf, sizeof buf, "40000 path checks, %zu violations, min margin %.4g, %zu reach K", violations, worst,
                reached);
  o.detail = buf;
  return o;
}

Marginal random_atomic(Rng& rng, int atoms) {
  std::vector<Atom> a;
  double mean = 0.0, mass = 0.0;
  for (int i = 0; i < atoms; ++i) {
    double x = 0.05 + 2.5 * rng.uniform(), w = 0.1 + rng.uniform();
    a.push_back({x, w});
    mass += w;
  }
  for (Atom& t : a) {
    t.weight /= mass;
    mean += t.x * t.weight;
  }
  for (Atom& t : a) t.x /= mean;
  return Marginal::atomic(std::move(a));
}

// Linear interpolation of h between grid levels, written out here rather
// than taken from the library.
double interpolate(const std::vector<double>& h, int N, double x) {
  double s = x * N;
  long k = static_cast<long>(std::floor(s));
  double f = s - k;
  return (1.0 - f) * h.at(k) + f * h.at(k + 1);
}

Outcome pairing() {
  Rng rng(505);
  Outcome o;
  double worst_pair = 0.0, worst_moment = 0.0, worst_prokhorov = 0.0;
  for (int i = 0; i < 100; ++i) {
    int N = 1 << (i % 4);
    Marginal mu = random_atomic(rng, 2 + i % 9);
    std::vector<double> h(static_cast<std::size_t>(std::ceil(mu.support_max() * N)) + 2);
    for (double& v : h) v = 4.0 * rng.uniform() - 2.0;
    GridFunction hf = [&h](long k) { return h.at(k); };
    PairingCheck pc = pairing_identity_check(hf, mu, N);
    GridMarginal nu = project_marginal(mu, N);
    double lhs = 0.0, rhs = 0.0;
    for (const auto& [k, w] : nu.weights) lhs += w * h.at(k);
    for (const Atom& a : mu.atoms()) rhs += a.weight * interpolate(h, N, a.x);
    double err = std::max({std::abs(lhs - rhs), std::abs(pc.lhs - lhs), std::abs(pc.rhs - rhs)});
    worst_pair = std::max(worst_pair, err);
    double moment = std::max(std::abs(nu.mass() - 1.0), std::abs(nu.mean() - mu.mean()));
    worst_moment = std::max(worst_moment, moment);
    double d = prokhorov_distance(nu.as_marginal(), mu);
    worst_prokhorov = std::max(worst_prokhorov, d * N);
    if (!pc.ok || err > 1e-12 || moment > 1e-12 || d > 1.0 / N) o.pass = false;
  }
  char buf[160];
  std::snprintf(buf, sizeof buf, "100 pairs, pairing error %.3g, moment error %.3g, max N*d %.3f", worst_pair,
                worst_moment, worst_prokhorov);
  o.detail = buf;
  return o;
}

Outcome lifting() {
  auto t0 = Clock::now();
  Rng rng(606);
  PathTree tree = make_tree(2, 2, 2);
  TreeMeasure q = random_tree_measure(tree, rng);
  ConditionalTables tables = extract_conditionals(tree, q);
  const std::size_t n = 100000;
  LiftRun run = simulate_lift(compute_thresholds(tables), n, 607);
  IdentityReport rep = verify_identity(run, tables);

  // Control: move one up-probability and simulate from the wrong tables.
  const auto& [h, e] = *tables.entries.begin();
  int l = 1;
  while (!(e.psi[l] > e.psi[l - 1])) ++l;
  ConditionalTables bad = perturb_phi(tables, h, l, 0.1);
  LiftRun bad_run = simulate_lift(compute_thresholds(bad), n, 608);
  IdentityReport bad_rep = verify_identity(bad_run, tables);
  double t = seconds_since(t0);

  Outcome o;
  o.pass = rep.chi_square.p_value > 1e-3 && bad_rep.chi_square.p_value < 1e-6 && rep.z_identity.ok &&
           rep.z_identity.max_error <= 1e-12 && t <= 120.0;
  char buf[200];
  std::snprintf(buf, sizeof buf, "p %.4f (dof %d), perturbed p %.3g, Z error %.3g, %.1f s", rep.chi_square.p_value,
                rep.chi_square.dof, bad_rep.chi_square.p_value, rep.z_identity.max_error, t);
  o.detail = buf;
  return o;
}

Outcome weak_duality() {
  // Band instances add relaxed problems to the record.
  Rng rng(707);
  for (int i = 0; i < 6; ++i) {
    PathTree tree = make_tree(2, 2, 2);
    GridMarginal nu = random_terminal_marginal(tree, rng);
    record("band " + std::to_string(i),
           solve_duality(tree, Claim::lookback_max(), nu, MarginalMode::band(0.25 * i)));
  }
  Marginal mu = Marginal::atomic({{0.5, 0.5}, {1.5, 0.5}});
  std::vector<RefineStep> schedule{{1, 1, 1}, {2, 1, 1}, {2, 2, 2}, {2, 3, 2}, {4, 2, 2}, {4, 3, 2}};
  std::vector<RefineRow> rows = refine_experiment(Claim::lookback_max(), mu, schedule);
  Outcome o;
  std::size_t refine_solved = 0;
  for (const RefineRow& r : rows) {
    std::printf("  refine N=%d m=%d J=%d nodes=%d primal=%.10f dual=%.10f trend=%s%s%s\n", r.step.N, r.step.m,
                r.step.J, r.nodes, r.primal, r.dual, r.trend ? std::to_string(*r.trend).c_str() : "-",
                r.note.empty() ? "" : " note: ", r.note.c_str());
    if (r.primal_status == LpStatus::Optimal && r.dual_status == LpStatus::Optimal) {
      ++refine_solved;
      g_solved.push_back({"refine", r.primal, r.dual});
    }
  }
  std::size_t bad = 0;
  for (const SolvedPair& s : g_solved)
    if (s.dual < s.primal - kDualityTolerance) {
      ++bad;
      std::printf("  weak duality broken: %s primal %.12f dual %.12f\n", s.label.c_str(), s.primal, s.dual);
    }
  o.pass = bad == 0 && refine_solved > 0;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%zu solved instances, %zu violations, %zu refine rows solved", g_solved.size(), bad,
                refine_solved);
  o.detail = buf;
  return o;
}

Outcome lp_oracle() {
  Rng rng(909);
  int optimal = 0, infeasible = 0, mismatches = 0;
  double worst = 0.0;
  while (optimal < 50) {
    LinearProgram lp = oracle::random_bounded_lp(rng);
    auto best = oracle::vertex_enumeration(lp);
    LpResult r = solve_lp(lp);
    if (!best) {
      ++infeasible;
      if (r.status != LpStatus::Infeasible) ++mismatches;
      continue;
    }
    ++optimal;
    if (r.status != LpStatus::Optimal) {
      ++mismatches;
      continue;
    }
    worst = std::max(worst, std::abs(r.value - *best));
    if (std::abs(r.value - *best) > 1e-9) ++mismatches;
  }
  Outcome o;
  o.pass = mismatches == 0;
  char buf[128];
  std::snprintf(buf, sizeof buf, "%d optimal and %d infeasible LPs, max error %.3g", optimal, infeasible, worst);
  o.detail = buf;
  return o;
}

}  // namespace

int main() {
  struct Criterion {
    const char* name;
    Outcome (*run)();
  };
  const Criterion criteria[] = {
      {"strong duality on random instances", strong_duality},
      {"terminal-only pricing identity", terminal_identity},
      {"lookback value 1.25 for m = 1..4", lookback_golden},
      {"discretization discrepancy bound", discrepancy_bound},
      {"alpha hedge pathwise inequality", alpha_hedge_check},
      {"pairing identity and projection", pairing},
      {"lifting fidelity", lifting},
      {"weak duality and refinement diagnostics", weak_duality},
      {"LP engine against vertex enumeration", lp_oracle},
  };
  int failed = 0, index = 0;
  for (const Criterion& c : criteria) {
    ++index;
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::printf("[%s] %d %s: %s\n", o.pass ? "PASS" : "FAIL", index, c.name, o.detail.c_str());
    std::fflush(stdout);
    failed += !o.pass;
  }
  std::printf("%d/%d criteria passed\n", index - failed, index);
  return failed == 0 ? 0 : 1;
}
