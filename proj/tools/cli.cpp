#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "motdual/discretize.hpp"
#include "motdual/errors.hpp"
#include "motdual/hedging.hpp"
#include "motdual/io.hpp"
#include "motdual/lifting.hpp"
#include "motdual/marginals.hpp"
#include "motdual/mot.hpp"
#include "motdual/payoffs.hpp"
#include "motdual/rng.hpp"
#include "motdual/version.hpp"

namespace motdual::cli {

namespace {

using Json = nlohmann::ordered_json;

struct Settings {
  // Shared.
  std::string claim = "vanilla";
  double K = 1.0;
  double rate = 0.0;
  double T = 1.0;
  std::string marginal;
  int N = 2;
  int m = 2;
  int J = 3;
  std::optional<double> B;
  std::string mode = "exact";
  double band_K = 0.0;
  std::uint64_t seed = 42;
  std::string out;
  bool timings = false;
  std::size_t node_cap = 200'000;

  // discretize
  std::string input;
  std::string grid_out;
  std::string diagnostics;

  // price / hedge
  std::string measure_out;
  std::string certificate_out;

  // verify-hedge
  std::string certificate;
  std::string paths;
  bool penalized = false;
  bool alpha = false;
  double p = 2.0;
  double M = 1.0;
  double tolerance = 1e-9;
  std::size_t generate = 0;
  std::string model = "geometric-brownian";
  double volatility = 0.2;
  int steps = 64;

  // lift
  std::string measure;
  std::size_t samples = 100'000;
  double perturb = 0.0;

  // duality-suite
  std::size_t random_instances = 0;

  // report
  std::string schedule;
  std::string csv;
};

class Failed : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

using Clock = std::chrono::steady_clock;

Claim make_claim(const Settings& s) {
  if (s.claim == "vanilla") return Claim::vanilla_call(s.K, s.rate);
  if (s.claim == "lookback") return Claim::lookback_max(s.rate);
  if (s.claim == "asian") return Claim::asian_average(s.T, s.rate);
  if (s.claim == "lookback-put") return Claim::lookback_put_on_max(s.K, s.rate);
  if (s.claim == "alpha") return alpha_claim(s.K);
  throw ConfigError("unknown claim '" + s.claim + "' (vanilla, lookback, asian, lookback-put, alpha)");
}

MarginalMode make_mode(const Settings& s) {
  if (s.mode == "exact") return MarginalMode::exact();
  if (s.mode == "band") return MarginalMode::band(s.band_K);
  throw ConfigError("unknown marginal mode '" + s.mode + "' (exact, band)");
}

TreeConfig make_tree_config(const Settings& s) {
  TreeConfig c;
  c.N = s.N;
  c.max_jumps = s.m;
  c.J = s.J;
  c.B = s.B;
  c.T = s.T;
  c.node_cap = s.node_cap;
  return c;
}

const Marginal& require_marginal(const Settings& s, std::optional<Marginal>& cache) {
  if (s.marginal.empty()) throw ConfigError("--marginal is required");
  if (!cache) cache = read_marginal_csv(s.marginal);
  return *cache;
}

Json claim_json(const Settings& s, const Claim& claim) {
  Json j{{"kind", s.claim}, {"description", claim.describe()}, {"lipschitz", claim.lipschitz()}};
  if (s.claim == "vanilla" || s.claim == "lookback-put" || s.claim == "alpha") j["K"] = s.K;
  if (s.claim != "alpha") j["rate"] = s.rate;
  return j;
}

Json tree_inputs(const Settings& s) {
  Json j{{"N", s.N}, {"m", s.m}, {"J", s.J}, {"T", s.T}, {"node_cap", s.node_cap}};
  j["B"] = s.B ? Json(*s.B) : Json(nullptr);
  return j;
}

Json mode_json(const MarginalMode& mode) {
  Json j{{"kind", mode.kind == MarginalMode::Kind::Exact ? "exact" : "band"}};
  if (mode.kind == MarginalMode::Kind::Band) j["K"] = mode.K;
  return j;
}

Json tree_json(const PathTree& tree) {
  auto levels = tree.reachable_levels();
  return {{"nodes", tree.size()},
          {"roots", tree.roots().size()},
          {"price_cap", tree.cap()},
          {"capped_branches", tree.capped_branches()},
          {"lowest_level", levels.empty() ? 0 : levels.front()},
          {"highest_level", levels.empty() ? 0 : levels.back()},
          {"truncation",
           "gap menus keep the first J elements of each gap family per depth; the omitted part of the "
           "gap sets is not quantified"}};
}

Json lp_json(const LpResult& r) {
  return {{"status", to_string(r.status)},
          {"iterations", r.iterations},
          {"primal_residual", r.primal_residual},
          {"presolve_rows_removed", r.presolve_rows_removed},
          {"presolve_columns_removed", r.presolve_columns_removed},
          {"diagnostics", r.diagnostics}};
}

Json lp_tolerances() {
  LpOptions o;
  return {{"pivot", o.pivot_tolerance},
          {"feasibility", o.feasibility_tolerance},
          {"duality", kDualityTolerance},
          {"measure_check", 1e-9}};
}

Json marginal_json(const Settings& s, const Marginal& mu) {
  MarginalCheck c = check_marginal(mu);
  return {{"file", s.marginal}, {"mass", c.mass}, {"mean", c.mean}, {"second_moment", c.p_moment}, {"ok", c.ok}};
}

Json base_report(const std::string& command, const Settings& s) {
  return {{"command", command},
          {"version", kVersion},
          {"rng", {{"algorithm", std::string(kRngAlgorithm)}, {"seed", s.seed}}}};
}

void emit(const Json& report, const Settings& s, std::ostream& out) {
  std::string text = report.dump(2) + "\n";
  if (s.out.empty())
    out << text;
  else
    write_text_file(s.out, text);
}

void add_timing(Json& report, const Settings& s, Clock::time_point start) {
  if (!s.timings) return;
  double secs = std::chrono::duration<double>(Clock::now() - start).count();
  report["timings"] = {{"total_seconds", secs}};
}

// --- subcommands -----------------------------------------------------------

int cmd_discretize(const Settings& s, std::ostream& out) {
  auto start = Clock::now();
  if (s.input.empty()) throw ConfigError("--input is required");
  if (s.N < 1) throw ConfigError("--N must be at least 1");
  std::vector<SampledPath> paths = read_paths_csv(s.input);
  std::vector<GridPath> grids;
  Json rows = Json::array();
  double worst = 0.0;
  std::size_t floored = 0, invalid = 0;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    Embedding e = embed(paths[i], s.N);
    GridValidation v = validate_grid_path(e.grid);
    worst = std::max(worst, e.snapped.total_shortfall);
    if (e.snapped.floored) ++floored;
    if (!v.ok()) ++invalid;
    rows.push_back({{"path", i},
                    {"crossings", e.crossings.crossings()},
                    {"jumps", e.grid.jump_count()},
                    {"initial", e.grid.initial},
                    {"terminal", e.grid.terminal()},
                    {"gap_shortfall", e.snapped.total_shortfall},
                    {"floored", e.snapped.floored},
                    {"grid_valid", v.ok()}});
    grids.push_back(std::move(e.grid));
  }
  if (!s.grid_out.empty()) write_grid_paths_csv(s.grid_out, grids);
  Json report = base_report("discretize", s);
  report["inputs"] = {{"input", s.input}, {"N", s.N}, {"grid_out", s.grid_out}};
  report["result"] = {{"paths", paths.size()},
                      {"max_gap_shortfall", worst},
                      {"shortfall_bound", 1.0 / s.N},
                      {"floored_paths", floored},
                      {"invalid_grid_paths", invalid},
                      {"per_path", rows}};
  report["tolerances"] = {{"min_snapped_gap", kMinSnappedGap}};
  add_timing(report, s, start);
  Settings copy = s;
  if (!s.diagnostics.empty()) copy.out = s.diagnostics;
  emit(report, copy, out);
  return kOk;
}

int cmd_price(const Settings& s, std::ostream& out) {
  auto start = Clock::now();
  std::optional<Marginal> cache;
  const Marginal& mu = require_marginal(s, cache);
  Claim claim = make_claim(s);
  MarginalMode mode = make_mode(s);
  PathTree tree = PathTree::build(make_tree_config(s));
  GridMarginal nu = project_marginal(mu, s.N);
  PricingResult r = primal_lp(tree, claim, nu, mode);

  Json report = base_report("price", s);
  report["inputs"] = {{"claim", claim_json(s, claim)},
                      {"marginal", marginal_json(s, mu)},
                      {"tree", tree_inputs(s)},
                      {"mode", mode_json(mode)}};
  report["tree"] = tree_json(tree);
  Json result{{"status", to_string(r.status)}, {"value", r.status == LpStatus::Optimal ? Json(r.value) : Json(nullptr)}};
  if (r.status == LpStatus::Optimal) {
    MeasureReport m = verify_measure(tree, r.measure, &nu, mode);
    result["residuals"] = {{"lp_primal", r.lp.primal_residual},
                           {"normalization", m.normalization_residual},
                           {"martingale", m.max_martingale_residual},
                           {"terminal_law", m.terminal_residual},
                           {"min_mass", m.min_mass},
                           {"measure_ok", m.ok}};
    if (!s.measure_out.empty()) {
      write_measure_json(s.measure_out, tree, r.measure);
      result["measure"] = s.measure_out;
    }
  }
  result["lp"] = lp_json(r.lp);
  report["result"] = result;
  report["tolerances"] = lp_tolerances();
  add_timing(report, s, start);
  emit(report, s, out);
  if (r.status != LpStatus::Optimal) throw Failed("pricing LP " + std::string(to_string(r.status)) + ": " + r.lp.diagnostics);
  return kOk;
}

int cmd_hedge(const Settings& s, std::ostream& out) {
  auto start = Clock::now();
  std::optional<Marginal> cache;
  const Marginal& mu = require_marginal(s, cache);
  Claim claim = make_claim(s);
  MarginalMode mode = make_mode(s);
  PathTree tree = PathTree::build(make_tree_config(s));
  GridMarginal nu = project_marginal(mu, s.N);
  HedgeResult r = dual_lp(tree, claim, nu, mode);

  Json report = base_report("hedge", s);
  report["inputs"] = {{"claim", claim_json(s, claim)},
                      {"marginal", marginal_json(s, mu)},
                      {"tree", tree_inputs(s)},
                      {"mode", mode_json(mode)}};
  report["tree"] = tree_json(tree);
  Json result{{"status", to_string(r.status)}, {"value", r.status == LpStatus::Optimal ? Json(r.value) : Json(nullptr)}};
  if (r.status == LpStatus::Optimal) {
    result["residuals"] = {{"lp_primal", r.lp.primal_residual}, {"min_leaf_margin", r.min_leaf_margin}};
    result["certificate"] = {{"levels", r.certificate.h.size()},
                             {"cash", r.certificate.cash},
                             {"lambda", r.certificate.lambda}};
    if (!s.certificate_out.empty()) {
      write_certificate_json(s.certificate_out, tree, r.certificate);
      result["certificate"]["file"] = s.certificate_out;
    }
  }
  result["lp"] = lp_json(r.lp);
  report["result"] = result;
  report["tolerances"] = lp_tolerances();
  add_timing(report, s, start);
  emit(report, s, out);
  if (r.status != LpStatus::Optimal) throw Failed("hedging LP " + std::string(to_string(r.status)) + ": " + r.lp.diagnostics);
  return kOk;
}

std::vector<SampledPath> load_paths(const Settings& s, Json& inputs) {
  if (!s.paths.empty()) {
    inputs["paths"] = s.paths;
    return read_paths_csv(s.paths);
  }
  if (s.generate == 0) throw ConfigError("give --paths or --generate");
  PathGeneratorConfig g;
  g.model = parse_path_model(s.model);
  g.volatility = s.volatility;
  g.step_count = s.steps;
  g.seed = s.seed;
  g.horizon = s.T;
  inputs["generated"] = {{"count", s.generate},
                         {"model", std::string(to_string(g.model))},
                         {"volatility", s.volatility},
                         {"steps", s.steps}};
  return generate_paths(g, s.generate);
}

int cmd_verify_hedge(const Settings& s, std::ostream& out) {
  auto start = Clock::now();
  Json report = base_report("verify-hedge", s);
  Json inputs;
  bool ok = true;
  Json result;
  if (s.alpha) {
    SemiStaticPortfolio pi = alpha_hedge(s.N, s.K, s.p);
    std::vector<SampledPath> paths = load_paths(s, inputs);
    inputs["portfolio"] = {{"kind", "alpha-hedge"}, {"N", s.N}, {"K", s.K}, {"p", s.p}};
    double worst = std::numeric_limits<double>::infinity();
    Json bad = Json::array();
    for (std::size_t i = 0; i < paths.size(); ++i) {
      AlphaHedgeCheck c = check_alpha_hedge(pi, s.K, paths[i], s.tolerance);
      worst = std::min(worst, c.min_margin);
      if (c.violations) bad.push_back(i);
    }
    ok = bad.empty();
    result = {{"paths", paths.size()}, {"min_margin", paths.empty() ? 0.0 : worst}, {"violations", bad}, {"ok", ok}};
  } else {
    if (s.certificate.empty()) throw ConfigError("--certificate is required (or --alpha)");
    StoredCertificate stored = read_certificate_json(s.certificate);
    PathTree tree = PathTree::build(stored.tree);
    SemiStaticPortfolio pi = lift_tree_hedge(tree, stored.certificate);
    pi.M = s.M;
    pi.p = s.p;
    Claim claim = make_claim(s);
    std::vector<SampledPath> paths = load_paths(s, inputs);
    inputs["certificate"] = s.certificate;
    inputs["claim"] = claim_json(s, claim);
    inputs["penalized"] = s.penalized;
    std::function<double(const SampledPath&)> shift;
    const double L = claim.lipschitz();
    const int N = tree.N();
    if (s.penalized) shift = [L, N](const SampledPath& p) { return 5.0 * L * sup_norm(p) / N; };
    SuperReplicationReport r = check_superreplication(pi, claim, shift, paths, s.tolerance);
    Json margins = Json::array();
    for (double m : r.margins) margins.push_back(std::isnan(m) ? Json(nullptr) : Json(m));
    ok = r.violations.empty() && r.admissibility_violations.empty() && r.out_of_tree.empty();
    result = {{"paths", r.paths},
              {"min_margin", r.min_margin},
              {"violations", r.violations},
              {"admissibility_violations", r.admissibility_violations},
              {"admissibility", {{"M", pi.M}, {"p", pi.p}}},
              {"out_of_tree", r.out_of_tree},
              {"margins", margins},
              {"ok", ok}};
  }
  inputs["tolerance"] = s.tolerance;
  report["inputs"] = inputs;
  report["result"] = result;
  report["tolerances"] = {{"margin", s.tolerance}};
  add_timing(report, s, start);
  emit(report, s, out);
  if (!ok) throw Failed("portfolio fails to super-replicate on some paths, or some paths leave the tree");
  return kOk;
}

int cmd_lift(const Settings& s, std::ostream& out) {
  auto start = Clock::now();
  Json inputs;
  std::unique_ptr<PathTree> tree;
  TreeMeasure q;
  if (!s.measure.empty()) {
    StoredMeasure stored = read_measure_json(s.measure);
    tree = std::make_unique<PathTree>(PathTree::build(stored.tree));
    q = std::move(stored.measure);
    inputs["measure"] = s.measure;
  } else {
    tree = std::make_unique<PathTree>(PathTree::build(make_tree_config(s)));
    Rng rng(s.seed, 0xfeedULL);
    q = random_tree_measure(*tree, rng);
    inputs["measure"] = "random martingale measure";
    inputs["tree"] = tree_inputs(s);
  }
  inputs["samples"] = s.samples;
  MeasureReport check = verify_measure(*tree, q);
  ConditionalTables tables = extract_conditionals(*tree, q);
  ConditionalTables simulated = tables;
  if (s.perturb != 0.0) {
    // Shift phi at the first charged (history, gap) with positive probability.
    bool done = false;
    for (const auto& [h, e] : tables.entries) {
      for (std::size_t l = 1; l < e.psi.size() && !done; ++l) {
        if (e.psi[l] - e.psi[l - 1] > 0.0) {
          simulated = perturb_phi(tables, h, static_cast<int>(l), s.perturb);
          inputs["perturbation"] = {{"history", to_string(h)}, {"gap", tables.alphabet[l]}, {"shift", s.perturb}};
          done = true;
        }
      }
      if (done) break;
    }
    if (!done) throw ConfigError("measure has no jump to perturb");
  }
  ThresholdTables thr = compute_thresholds(simulated);
  LiftRun run = simulate_lift(thr, s.samples, s.seed);
  IdentityReport id = verify_identity(run, tables);

  Json report = base_report("lift", s);
  report["inputs"] = inputs;
  report["result"] = {
      {"measure_ok", check.ok},
      {"alphabet", tables.alphabet},
      {"charged_histories", tables.entries.size()},
      {"samples", id.samples},
      {"tail_samples", run.tail_count},
      {"uncharged_samples", run.uncharged_count},
      {"chi_square",
       {{"statistic", id.chi_square.statistic},
        {"dof", id.chi_square.dof},
        {"p_value", id.chi_square.p_value},
        {"cells", id.chi_square.cells},
        {"pooled_cells", id.chi_square.pooled_cells},
        {"unexpected", id.chi_square.unexpected}}},
      {"z_identity", {{"max_error", id.z_identity.max_error}, {"ok", id.z_identity.ok}}},
      {"terminal_prokhorov", id.terminal_prokhorov},
      {"prokhorov_band", id.prokhorov_band},
      {"accepted", id.chi_square.p_value > 1e-3}};
  report["tolerances"] = {{"p_value_threshold", 1e-3},
                          {"z_identity", 1e-12},
                          {"min_expected_count", 5.0},
                          {"prokhorov_alpha", 1e-3}};
  add_timing(report, s, start);
  emit(report, s, out);
  return kOk;
}

Json duality_row(const DualityInstance& d) {
  return {{"primal_status", to_string(d.primal.status)},
          {"dual_status", to_string(d.dual.status)},
          {"primal", d.primal.value},
          {"dual", d.dual.value},
          {"gap", d.gap},
          {"strong", d.strong},
          {"weak", d.weak},
          {"primal_residual", d.primal.lp.primal_residual},
          {"dual_residual", d.dual.lp.primal_residual}};
}

int cmd_duality_suite(const Settings& s, std::ostream& out) {
  auto start = Clock::now();
  Json report = base_report("duality-suite", s);
  Json rows = Json::array();
  bool all_solved = true, all_strong = true, all_weak = true;
  double worst = 0.0;
  if (s.random_instances > 0) {
    report["inputs"] = {{"random_instances", s.random_instances}};
    Rng rng(s.seed);
    const int Ns[] = {1, 2, 4};
    for (std::size_t i = 0; i < s.random_instances; ++i) {
      TreeConfig cfg;
      cfg.N = Ns[rng.next() % 3];
      cfg.max_jumps = 1 + static_cast<int>(rng.next() % 3);
      cfg.J = 1 + static_cast<int>(rng.next() % 2);
      PathTree tree = PathTree::build(cfg);
      GridMarginal nu = random_terminal_marginal(tree, rng);
      Settings c = s;
      const char* kinds[] = {"vanilla", "lookback", "asian", "lookback-put"};
      c.claim = kinds[rng.next() % 4];
      c.K = 0.5 + rng.uniform();
      Claim claim = make_claim(c);
      MarginalMode mode = rng.uniform() < 0.25 ? MarginalMode::band(rng.uniform()) : MarginalMode::exact();
      DualityInstance d = solve_duality(tree, claim, nu, mode);
      Json row{{"N", cfg.N}, {"m", cfg.max_jumps}, {"J", cfg.J}, {"claim", claim_json(c, claim)}, {"mode", mode_json(mode)}};
      row.update(duality_row(d));
      rows.push_back(row);
      all_solved = all_solved && d.primal.status == LpStatus::Optimal && d.dual.status == LpStatus::Optimal;
      all_strong = all_strong && d.strong;
      all_weak = all_weak && d.weak;
      worst = std::max(worst, std::abs(d.gap) / (1.0 + std::abs(d.primal.value)));
    }
  } else {
    std::optional<Marginal> cache;
    const Marginal& mu = require_marginal(s, cache);
    Claim claim = make_claim(s);
    MarginalMode mode = make_mode(s);
    PathTree tree = PathTree::build(make_tree_config(s));
    GridMarginal nu = project_marginal(mu, s.N);
    DualityInstance d = solve_duality(tree, claim, nu, mode);
    report["inputs"] = {{"claim", claim_json(s, claim)},
                        {"marginal", marginal_json(s, mu)},
                        {"tree", tree_inputs(s)},
                        {"mode", mode_json(mode)}};
    report["tree"] = tree_json(tree);
    rows.push_back(duality_row(d));
    all_solved = d.primal.status == LpStatus::Optimal && d.dual.status == LpStatus::Optimal;
    all_strong = d.strong;
    all_weak = d.weak;
    worst = std::abs(d.gap) / (1.0 + std::abs(d.primal.value));
  }
  report["result"] = {{"instances", rows},
                      {"all_solved", all_solved},
                      {"all_strong", all_strong},
                      {"all_weak", all_weak},
                      {"max_relative_gap", worst}};
  report["tolerances"] = lp_tolerances();
  add_timing(report, s, start);
  emit(report, s, out);
  if (!all_solved) throw Failed("some duality instance did not solve to optimality");
  return kOk;
}

std::vector<RefineStep> parse_schedule(const std::string& text) {
  std::vector<RefineStep> steps;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    RefineStep st{};
    char c1 = 0, c2 = 0;
    std::istringstream is(item);
    if (!(is >> st.N >> c1 >> st.m >> c2 >> st.J) || c1 != ':' || c2 != ':' || !(is >> std::ws).eof())
      throw ConfigError("bad schedule entry '" + item + "' (expected N:m:J)");
    steps.push_back(st);
  }
  if (steps.empty()) throw ConfigError("--schedule is empty");
  return steps;
}

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(17);
  os << x;
  return os.str();
}

int cmd_report(const Settings& s, std::ostream& out) {
  auto start = Clock::now();
  std::optional<Marginal> cache;
  const Marginal& mu = require_marginal(s, cache);
  Claim claim = make_claim(s);
  MarginalMode mode = make_mode(s);
  if (s.schedule.empty()) throw ConfigError("--schedule is required");
  std::vector<RefineStep> schedule = parse_schedule(s.schedule);
  std::vector<RefineRow> rows = refine_experiment(claim, mu, schedule, mode, s.node_cap);

  Json table = Json::array();
  std::ostringstream csv;
  csv << "N,m,J,nodes,capped_branches,primal_status,dual_status,primal,dual,gap,weak_duality,trend,note\n";
  bool weak = true;
  for (const RefineRow& r : rows) {
    table.push_back({{"N", r.step.N},
                     {"m", r.step.m},
                     {"J", r.step.J},
                     {"nodes", r.nodes},
                     {"capped_branches", r.capped_branches},
                     {"primal_status", to_string(r.primal_status)},
                     {"dual_status", to_string(r.dual_status)},
                     {"primal", r.primal},
                     {"dual", r.dual},
                     {"gap", r.gap},
                     {"weak_duality", r.weak_duality},
                     {"trend", r.trend ? Json(*r.trend) : Json(nullptr)},
                     {"note", r.note}});
    std::string note = r.note;
    for (char& ch : note)
      if (ch == ',' || ch == '\n') ch = ';';
    csv << r.step.N << "," << r.step.m << "," << r.step.J << "," << r.nodes << "," << r.capped_branches << ","
        << to_string(r.primal_status) << "," << to_string(r.dual_status) << "," << fmt(r.primal) << ","
        << fmt(r.dual) << "," << fmt(r.gap) << "," << (r.weak_duality ? "true" : "false") << ","
        << (r.trend ? fmt(*r.trend) : "") << "," << note << "\n";
    if (r.primal_status == LpStatus::Optimal) weak = weak && r.weak_duality;
  }
  if (!s.csv.empty()) write_text_file(s.csv, csv.str());

  Json report = base_report("report", s);
  report["inputs"] = {{"claim", claim_json(s, claim)},
                      {"marginal", marginal_json(s, mu)},
                      {"schedule", s.schedule},
                      {"mode", mode_json(mode)},
                      {"node_cap", s.node_cap},
                      {"csv", s.csv}};
  report["result"] = {{"rows", table},
                      {"weak_duality_everywhere", weak},
                      {"note", "trends are reported, not asserted: truncation in (m, J) breaks exact nesting"}};
  report["tolerances"] = lp_tolerances();
  add_timing(report, s, start);
  emit(report, s, out);
  return kOk;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Settings s;
  CLI::App app{"Robust pricing and hedging through finite martingale transport problems", "motdual"};
  app.set_version_flag("--version", std::string(kVersion));
  app.set_config("--config", "", "key = value file; [subcommand] sections hold subcommand options");
  app.fallthrough();
  app.require_subcommand(1);

  app.add_option("--claim", s.claim, "vanilla | lookback | asian | lookback-put | alpha")->capture_default_str();
  app.add_option("--K", s.K, "claim strike (also the alpha level)")->capture_default_str();
  app.add_option("--rate", s.rate, "discount rate r >= 0")->capture_default_str();
  app.add_option("--T", s.T, "horizon")->capture_default_str();
  app.add_option("--marginal", s.marginal, "terminal law CSV (x,weight or x,density)");
  app.add_option("--N", s.N, "grid resolution")->capture_default_str();
  app.add_option("--m", s.m, "maximal number of jumps")->capture_default_str();
  app.add_option("--J", s.J, "gap menu size per family and depth")->capture_default_str();
  app.add_option("--B", s.B, "price cap (default 1 + (m + 1) / N)");
  app.add_option("--mode", s.mode, "exact | band")->capture_default_str();
  app.add_option("--band-K", s.band_K, "band radius: l1 distance to the marginal at most K / N")->capture_default_str();
  app.add_option("--seed", s.seed, "random seed")->capture_default_str();
  app.add_option("--out", s.out, "report file (stdout when absent)");
  app.add_flag("--timings", s.timings, "add wall-clock timings to the report");
  app.add_option("--node-cap", s.node_cap, "largest path tree to build")->capture_default_str();

  auto* discretize = app.add_subcommand("discretize", "crossing times and the embedding into the grid paths");
  discretize->add_option("--input", s.input, "paths CSV");
  discretize->add_option("--grid-out", s.grid_out, "grid paths CSV");
  discretize->add_option("--diagnostics", s.diagnostics, "diagnostics JSON (replaces --out)");

  auto* price = app.add_subcommand("price", "maximal model price over martingale measures on the tree");
  price->add_option("--measure-out", s.measure_out, "write the optimal measure as JSON");

  auto* hedge = app.add_subcommand("hedge", "minimal semi-static super-hedging cost on the tree");
  hedge->add_option("--certificate-out", s.certificate_out, "write the optimal hedge as JSON");

  auto* verify = app.add_subcommand("verify-hedge", "replay a hedge on continuous paths");
  verify->add_option("--certificate", s.certificate, "tree hedge JSON from `hedge`");
  verify->add_option("--paths", s.paths, "paths CSV");
  verify->add_option("--generate", s.generate, "generate this many paths instead of reading them");
  verify->add_option("--model", s.model, "geometric-brownian | arithmetic-brownian-reflected | piecewise-linear-custom")
      ->capture_default_str();
  verify->add_option("--volatility", s.volatility)->capture_default_str();
  verify->add_option("--steps", s.steps)->capture_default_str();
  verify->add_flag("--penalized", s.penalized, "check against G - 5 L ||S|| / N");
  verify->add_flag("--alpha", s.alpha, "check the explicit alpha hedge instead of a certificate");
  verify->add_option("--p", s.p, "moment exponent of the alpha hedge")->capture_default_str();
  verify->add_option("--M", s.M, "admissibility witness: Z >= -M (1 + running max ^ p)")->capture_default_str();
  verify->add_option("--tolerance", s.tolerance)->capture_default_str();

  auto* lift = app.add_subcommand("lift", "simulate a tree measure on a Brownian driver and test the law");
  lift->add_option("--measure", s.measure, "measure JSON from `price` (random measure on the tree otherwise)");
  lift->add_option("--samples", s.samples)->capture_default_str();
  lift->add_option("--perturb", s.perturb, "shift one up-probability before simulating (control run)");

  auto* suite = app.add_subcommand("duality-suite", "solve primal and dual and compare");
  suite->add_option("--random-instances", s.random_instances, "random feasible instances instead of one");

  auto* rep = app.add_subcommand("report", "refinement experiment over a schedule of (N, m, J)");
  rep->add_option("--schedule", s.schedule, "comma separated N:m:J entries");
  rep->add_option("--csv", s.csv, "CSV table output");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kConfigError;
  }

  try {
    if (discretize->parsed()) return cmd_discretize(s, out);
    if (price->parsed()) return cmd_price(s, out);
    if (hedge->parsed()) return cmd_hedge(s, out);
    if (verify->parsed()) return cmd_verify_hedge(s, out);
    if (lift->parsed()) return cmd_lift(s, out);
    if (suite->parsed()) return cmd_duality_suite(s, out);
    if (rep->parsed()) return cmd_report(s, out);
  } catch (const Failed& e) {
    err << "motdual: " << e.what() << "\n";
    return kSolveFailed;
  } catch (const std::exception& e) {
    err << "motdual: " << e.what() << "\n";
    return kConfigError;
  }
  return kConfigError;
}

}  // namespace motdual::cli
