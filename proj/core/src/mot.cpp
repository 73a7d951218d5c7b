#include "motdual/mot.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <sstream>

#include "motdual/errors.hpp"
#include "motdual/gap_set.hpp"

namespace motdual {

namespace {

struct Builder {
  PathTree::Node root_template;
  int N, m;
  double T;
  long cap_level;
  std::size_t node_cap;
  const std::vector<std::vector<double>>* menus;
  std::vector<PathTree::Node>* nodes;
  std::size_t capped = 0;

  int grow(int parent, int depth, long level, double elapsed, int gap_index, int sign) {
    if (nodes->size() >= node_cap) {
      std::ostringstream os;
      os << "path tree exceeds the cap of " << node_cap << " nodes (N=" << N << ", m=" << m
         << "); try a smaller number of jumps m or menu size J";
      throw SizeError(os.str());
    }
    int v = static_cast<int>(nodes->size());
    PathTree::Node node;
    node.parent = parent;
    node.depth = depth;
    node.level = level;
    node.elapsed = elapsed;
    node.gap_index = gap_index;
    node.sign = sign;
    nodes->push_back(node);
    if (depth < m && level > 0) {
      const std::vector<double>& menu = (*menus)[depth];
      std::vector<PathTree::Branch> branches;
      for (int g = 0; g < static_cast<int>(menu.size()); ++g) {
        double t = elapsed + menu[g];
        if (!(t < T)) continue;
        if (level + 1 > cap_level) {
          ++capped;
          continue;
        }
        int up = grow(v, depth + 1, level + 1, t, g, 1);
        int down = grow(v, depth + 1, level - 1, t, g, -1);
        branches.push_back({g, menu[g], up, down});
      }
      (*nodes)[v].branches = std::move(branches);
    }
    (*nodes)[v].subtree_end = static_cast<int>(nodes->size());
    return v;
  }
};

}  // namespace

PathTree PathTree::build(const TreeConfig& cfg) {
  if (cfg.N < 1) throw ConfigError("path tree: N must be at least 1");
  if (cfg.max_jumps < 0) throw ConfigError("path tree: m must be nonnegative");
  if (cfg.J < 1) throw ConfigError("path tree: J must be at least 1");
  if (!(cfg.T > 0.0) || !std::isfinite(cfg.T)) throw ConfigError("path tree: T must be positive");
  double B = cfg.B.value_or(1.0 + static_cast<double>(cfg.max_jumps + 1) / cfg.N);
  if (B + 1e-12 < 1.0 + static_cast<double>(cfg.max_jumps) / cfg.N) {
    std::ostringstream os;
    os << "path tree: price cap B = " << B << " is below 1 + m/N";
    throw ConfigError(os.str());
  }
  PathTree tree;
  tree.N_ = cfg.N;
  tree.m_ = cfg.max_jumps;
  tree.J_ = cfg.J;
  tree.T_ = cfg.T;
  tree.cap_level_ = static_cast<long>(std::floor(B * cfg.N + 1e-9));
  tree.node_cap_ = cfg.node_cap;
  for (int k = 1; k <= cfg.max_jumps; ++k) tree.menus_.push_back(gap_menu(k, cfg.N, cfg.J));

  Builder b{{}, cfg.N, cfg.max_jumps, cfg.T, tree.cap_level_, cfg.node_cap, &tree.menus_, &tree.nodes_};
  for (long root : {static_cast<long>(cfg.N) - 1, static_cast<long>(cfg.N) + 1}) {
    if (root > tree.cap_level_) continue;
    tree.roots_.push_back(b.grow(-1, 0, root, 0.0, -1, 0));
  }
  tree.capped_branches_ = b.capped;
  return tree;
}

std::vector<long> PathTree::reachable_levels() const {
  std::set<long> levels;
  for (const Node& n : nodes_) levels.insert(n.level);
  return {levels.begin(), levels.end()};
}

std::vector<int> PathTree::lineage(int v) const {
  std::vector<int> out;
  for (int u = v; u >= 0; u = nodes_[u].parent) out.push_back(u);
  std::reverse(out.begin(), out.end());
  return out;
}

GridPath PathTree::leaf_path(int v) const {
  GridPath g;
  g.N = N_;
  g.T = T_;
  std::vector<int> line = lineage(v);
  g.initial = static_cast<double>(nodes_[line.front()].level) / N_;
  for (std::size_t i = 1; i < line.size(); ++i) {
    g.jump_times.push_back(nodes_[line[i]].elapsed);
    g.signs.push_back(nodes_[line[i]].sign);
  }
  return g;
}

int PathTree::child(int v, int gap_index, int sign) const {
  for (const Branch& b : nodes_[v].branches)
    if (b.gap_index == gap_index) return sign > 0 ? b.up : b.down;
  return -1;
}

std::string PathTree::describe_history(int v) const {
  std::ostringstream os;
  std::vector<int> line = lineage(v);
  os << "start " << static_cast<double>(nodes_[line.front()].level) / N_;
  for (std::size_t i = 1; i < line.size(); ++i) {
    const Node& n = nodes_[line[i]];
    os << (i == 1 ? ", jumps " : " ") << (n.sign > 0 ? '+' : '-') << "@" << n.elapsed;
  }
  return os.str();
}

double TreeMeasure::subtree_mass(const PathTree& tree, int v) const {
  double s = 0.0;
  for (int u = v; u < tree.node(v).subtree_end; ++u) s += mass[u];
  return s;
}

std::map<long, double> TreeMeasure::terminal_law(const PathTree& tree) const {
  std::map<long, double> law;
  for (int v = 0; v < tree.size(); ++v)
    if (mass[v] != 0.0) law[tree.node(v).level] += mass[v];
  return law;
}

TreeMeasure random_tree_measure(const PathTree& tree, Rng& rng) {
  TreeMeasure q;
  q.mass.assign(tree.size(), 0.0);
  std::vector<std::pair<int, double>> stack;
  const auto& roots = tree.roots();
  std::vector<double> w(roots.size());
  double total = 0.0;
  for (double& x : w) total += (x = rng.uniform());
  for (std::size_t r = 0; r < roots.size(); ++r) stack.push_back({roots[r], w[r] / total});
  while (!stack.empty()) {
    auto [v, M] = stack.back();
    stack.pop_back();
    const auto& branches = tree.node(v).branches;
    if (branches.empty()) {
      q.mass[v] = M;
      continue;
    }
    double stop = rng.uniform();
    std::vector<double> bw(branches.size());
    double sum = stop;
    for (double& x : bw) sum += (x = rng.uniform());
    q.mass[v] = M * stop / sum;
    for (std::size_t b = 0; b < branches.size(); ++b) {
      double half = 0.5 * M * bw[b] / sum;
      stack.push_back({branches[b].up, half});
      stack.push_back({branches[b].down, half});
    }
  }
  return q;
}

GridMarginal random_terminal_marginal(const PathTree& tree, Rng& rng) {
  TreeMeasure q = random_tree_measure(tree, rng);
  const double share = 1.0 / static_cast<double>(tree.roots().size());
  for (int r : tree.roots()) {
    double s = q.subtree_mass(tree, r);
    for (int v = r; v < tree.node(r).subtree_end; ++v) q.mass[v] *= share / s;
  }
  GridMarginal nu;
  nu.N = tree.N();
  nu.weights = q.terminal_law(tree);
  return nu;
}

namespace {

void check_instance(const PathTree& tree, const GridMarginal& nu, MarginalMode mode) {
  if (tree.N() != nu.N) {
    std::ostringstream os;
    os << "tree resolution N=" << tree.N() << " differs from marginal resolution N=" << nu.N;
    throw ConfigError(os.str());
  }
  if (mode.kind == MarginalMode::Kind::Band && !(mode.K >= 0.0))
    throw ConfigError("band radius K must be nonnegative");
}

std::vector<long> terminal_levels(const PathTree& tree, const GridMarginal& nu) {
  std::set<long> levels;
  for (const auto& n : tree.nodes()) levels.insert(n.level);
  for (const auto& [k, w] : nu.weights)
    if (w != 0.0) levels.insert(k);
  return {levels.begin(), levels.end()};
}

std::vector<double> leaf_payoffs(const PathTree& tree, const Claim& claim) {
  std::vector<double> g(tree.size());
  for (int v = 0; v < tree.size(); ++v) g[v] = claim(tree.leaf_path(v));
  return g;
}

// Branch index through which each non-root node is reached from its parent.
std::vector<int> parent_branches(const PathTree& tree) {
  std::vector<int> pb(tree.size(), -1);
  for (int v = 0; v < tree.size(); ++v) {
    const auto& br = tree.node(v).branches;
    for (int b = 0; b < static_cast<int>(br.size()); ++b) {
      pb[br[b].up] = b;
      pb[br[b].down] = b;
    }
  }
  return pb;
}

}  // namespace

PricingResult primal_lp(const PathTree& tree, const Claim& claim, const GridMarginal& nu,
                        MarginalMode mode, const LpOptions& options) {
  check_instance(tree, nu, mode);
  const int n = tree.size();
  const double step = 1.0 / tree.N();
  const bool band = mode.kind == MarginalMode::Kind::Band;
  std::vector<double> payoff = leaf_payoffs(tree, claim);

  LinearProgram lp(Objective::Maximize);
  for (int v = 0; v < n; ++v) lp.add_variable(payoff[v]);
  for (int v = 0; v < n; ++v) {
    for (const auto& b : tree.node(v).branches) {
      std::vector<std::pair<int, double>> row;
      for (int u = b.up; u < tree.node(b.up).subtree_end; ++u) row.push_back({u, step});
      for (int u = b.down; u < tree.node(b.down).subtree_end; ++u) row.push_back({u, -step});
      lp.add_row(std::move(row), RowSense::Equal, 0.0);
    }
  }
  std::map<long, std::vector<std::pair<int, double>>> by_level;
  for (long l : terminal_levels(tree, nu)) by_level[l];
  for (int v = 0; v < n; ++v) by_level[tree.node(v).level].push_back({v, 1.0});
  std::vector<std::pair<int, double>> budget;
  for (auto& [level, row] : by_level) {
    if (band) {
      int sp = lp.add_variable(0.0);
      int sm = lp.add_variable(0.0);
      row.push_back({sp, -1.0});
      row.push_back({sm, 1.0});
      budget.push_back({sp, 1.0});
      budget.push_back({sm, 1.0});
    }
    lp.add_row(row, RowSense::Equal, nu.weight(level));
  }
  if (band) {
    lp.add_row(budget, RowSense::LessEqual, mode.K * step);
    std::vector<std::pair<int, double>> total;
    for (int v = 0; v < n; ++v) total.push_back({v, 1.0});
    lp.add_row(total, RowSense::Equal, 1.0);
  }

  PricingResult res;
  res.lp = solve_lp(lp, options);
  res.status = res.lp.status;
  if (res.status == LpStatus::Optimal) {
    res.value = res.lp.value;
    res.measure.mass.assign(res.lp.x.begin(), res.lp.x.begin() + n);
  }
  return res;
}

double DualCertificate::leaf_value(const PathTree& tree, int v) const {
  auto it = h.find(tree.node(v).level);
  if (it == h.end()) throw OutOfTreeError("certificate has no static payoff at the level of " + tree.describe_history(v));
  double value = it->second + cash;
  const double step = 1.0 / tree.N();
  for (int u = v; tree.node(u).parent >= 0; u = tree.node(u).parent) {
    int p = tree.node(u).parent;
    const auto& br = tree.node(p).branches;
    for (int b = 0; b < static_cast<int>(br.size()); ++b) {
      if (br[b].up == u || br[b].down == u) {
        value += gamma[p][b] * tree.node(u).sign * step;
        break;
      }
    }
  }
  return value;
}

HedgeResult dual_lp(const PathTree& tree, const Claim& claim, const GridMarginal& nu,
                    MarginalMode mode, const LpOptions& options) {
  check_instance(tree, nu, mode);
  const int n = tree.size();
  const double step = 1.0 / tree.N();
  const bool band = mode.kind == MarginalMode::Kind::Band;
  std::vector<double> payoff = leaf_payoffs(tree, claim);
  std::vector<int> pb = parent_branches(tree);

  LinearProgram lp(Objective::Minimize);
  std::map<long, int> h_var;
  for (long l : terminal_levels(tree, nu)) h_var[l] = lp.add_variable(nu.weight(l), true);
  std::vector<std::vector<int>> g_var(n);
  for (int v = 0; v < n; ++v)
    for (std::size_t b = 0; b < tree.node(v).branches.size(); ++b)
      g_var[v].push_back(lp.add_variable(0.0, true));
  int cash = -1, lambda = -1;
  if (band) {
    cash = lp.add_variable(1.0, true);
    lambda = lp.add_variable(mode.K * step);
  }
  for (int v = 0; v < n; ++v) {
    std::vector<std::pair<int, double>> row{{h_var.at(tree.node(v).level), 1.0}};
    if (band) row.push_back({cash, 1.0});
    for (int u = v; tree.node(u).parent >= 0; u = tree.node(u).parent)
      row.push_back({g_var[tree.node(u).parent][pb[u]], tree.node(u).sign * step});
    lp.add_row(std::move(row), RowSense::GreaterEqual, payoff[v]);
  }
  if (band) {
    for (const auto& [l, j] : h_var) {
      lp.add_row({{lambda, 1.0}, {j, -1.0}}, RowSense::GreaterEqual, 0.0);
      lp.add_row({{lambda, 1.0}, {j, 1.0}}, RowSense::GreaterEqual, 0.0);
    }
  }

  HedgeResult res;
  res.lp = solve_lp(lp, options);
  res.status = res.lp.status;
  if (res.status == LpStatus::Unbounded) {
    // An unbounded hedging problem means no martingale measure fits nu.
    res.status = LpStatus::Infeasible;
    res.lp.diagnostics = "hedging LP unbounded below, pricing problem infeasible (" + res.lp.diagnostics + ")";
  }
  if (res.status != LpStatus::Optimal) return res;
  res.value = res.lp.value;
  DualCertificate& c = res.certificate;
  for (const auto& [l, j] : h_var) c.h[l] = res.lp.x[j];
  if (band) {
    c.cash = res.lp.x[cash];
    c.lambda = res.lp.x[lambda];
  }
  c.gamma.resize(n);
  for (int v = 0; v < n; ++v)
    for (int j : g_var[v]) c.gamma[v].push_back(res.lp.x[j]);
  res.min_leaf_margin = std::numeric_limits<double>::infinity();
  for (int v = 0; v < n; ++v)
    res.min_leaf_margin = std::min(res.min_leaf_margin, c.leaf_value(tree, v) - payoff[v]);
  return res;
}

MeasureReport verify_measure(const PathTree& tree, const TreeMeasure& q, const GridMarginal* nu,
                             MarginalMode mode, double tol) {
  MeasureReport r;
  if (static_cast<int>(q.mass.size()) != tree.size())
    throw DomainError("verify_measure: measure size does not match the tree");
  double total = 0.0;
  r.min_mass = q.mass.empty() ? 0.0 : *std::min_element(q.mass.begin(), q.mass.end());
  for (double x : q.mass) total += x;
  r.normalization_residual = std::abs(total - 1.0);
  for (int v = 0; v < tree.size(); ++v) {
    const auto& br = tree.node(v).branches;
    for (int b = 0; b < static_cast<int>(br.size()); ++b) {
      double res = q.subtree_mass(tree, br[b].up) - q.subtree_mass(tree, br[b].down);
      r.max_martingale_residual = std::max(r.max_martingale_residual, std::abs(res));
      if (std::abs(res) > tol) r.violations.push_back({v, b, res});
    }
  }
  if (nu) {
    std::map<long, double> law = q.terminal_law(tree);
    std::set<long> levels;
    for (const auto& [k, w] : law) levels.insert(k);
    for (const auto& [k, w] : nu->weights) levels.insert(k);
    double l1 = 0.0;
    for (long k : levels) l1 += std::abs((law.count(k) ? law[k] : 0.0) - nu->weight(k));
    r.terminal_residual = mode.kind == MarginalMode::Kind::Band ? std::max(0.0, l1 - mode.K / tree.N()) : l1;
  }
  r.ok = r.min_mass >= -tol && r.normalization_residual <= tol && r.violations.empty() &&
         r.terminal_residual <= tol;
  return r;
}

DualityInstance solve_duality(const PathTree& tree, const Claim& claim, const GridMarginal& nu,
                              MarginalMode mode, const LpOptions& options) {
  DualityInstance d;
  d.primal = primal_lp(tree, claim, nu, mode, options);
  d.dual = dual_lp(tree, claim, nu, mode, options);
  if (d.primal.status == LpStatus::Optimal && d.dual.status == LpStatus::Optimal) {
    d.gap = d.dual.value - d.primal.value;
    d.weak = d.gap >= -kDualityTolerance;
    d.strong = std::abs(d.gap) <= kDualityTolerance * (1.0 + std::abs(d.primal.value));
  } else if (d.primal.status == LpStatus::Infeasible && d.dual.status == LpStatus::Infeasible) {
    // Both sides agree there is nothing to price; weak duality holds vacuously.
    d.weak = true;
  }
  return d;
}

std::vector<RefineRow> refine_experiment(const Claim& claim, const Marginal& mu,
                                         const std::vector<RefineStep>& schedule, MarginalMode mode,
                                         std::size_t node_cap) {
  std::vector<RefineRow> rows;
  std::optional<double> previous;
  int previous_N = 0;
  for (const RefineStep& s : schedule) {
    RefineRow row;
    row.step = s;
    if (s.N < previous_N) row.note = "resolution decreased; ";
    previous_N = std::max(previous_N, s.N);
    try {
      TreeConfig cfg;
      cfg.N = s.N;
      cfg.max_jumps = s.m;
      cfg.J = s.J;
      cfg.node_cap = node_cap;
      PathTree tree = PathTree::build(cfg);
      row.nodes = tree.size();
      row.capped_branches = tree.capped_branches();
      GridMarginal nu = project_marginal(mu, s.N);
      DualityInstance d = solve_duality(tree, claim, nu, mode);
      row.primal_status = d.primal.status;
      row.dual_status = d.dual.status;
      row.primal = d.primal.value;
      row.dual = d.dual.value;
      row.gap = d.gap;
      row.weak_duality = d.weak;
      if (d.primal.status == LpStatus::Optimal) {
        if (previous) row.trend = row.primal - *previous;
        previous = row.primal;
      } else {
        row.note += std::string("primal ") + to_string(d.primal.status) + ": " + d.primal.lp.diagnostics;
      }
    } catch (const std::exception& e) {
      row.note += e.what();
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace motdual
