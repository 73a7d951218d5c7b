#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "motdual/lp.hpp"
#include "motdual/marginals.hpp"
#include "motdual/paths.hpp"
#include "motdual/payoffs.hpp"
#include "motdual/rng.hpp"

namespace motdual {

struct TreeConfig {
  int N = 1;
  int max_jumps = 1;  // m
  int J = 3;          // menu size per gap family and depth
  std::optional<double> B;  // price cap; default 1 + (m + 1) / N
  double T = 1.0;
  std::size_t node_cap = 200'000;
};

// Histories of truncated D^(N) paths. Nodes are stored in depth-first
// order, so the subtree of node v is the index range [v, subtree_end(v)).
// Every node doubles as the leaf "stop here and stay constant until T".
class PathTree {
 public:
  struct Branch {
    int gap_index;  // into menu(depth + 1)
    double gap;
    int up;
    int down;
  };

  struct Node {
    int parent = -1;
    int depth = 0;       // number of jumps so far
    long level = 0;      // value * N
    double elapsed = 0;  // time of the last jump (0 at the roots)
    int gap_index = -1;  // menu index of the gap that led here
    int sign = 0;        // sign of the jump that led here
    int subtree_end = 0;
    std::vector<Branch> branches;
  };

  // Throws ConfigError for invalid parameters and SizeError when the node
  // count would exceed cfg.node_cap.
  static PathTree build(const TreeConfig& cfg);

  int N() const { return N_; }
  int max_jumps() const { return m_; }
  int J() const { return J_; }
  double T() const { return T_; }
  double cap() const { return static_cast<double>(cap_level_) / N_; }
  long cap_level() const { return cap_level_; }
  std::size_t node_cap() const { return node_cap_; }

  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& node(int v) const { return nodes_[v]; }
  int size() const { return static_cast<int>(nodes_.size()); }
  const std::vector<int>& roots() const { return roots_; }
  // Gap menu for the k-th jump, k = 1..m.
  const std::vector<double>& menu(int k) const { return menus_[k - 1]; }

  // Up-jumps dropped because the child would exceed the cap.
  std::size_t capped_branches() const { return capped_branches_; }
  std::vector<long> reachable_levels() const;

  // The stop leaf at v as an element of D^(N).
  GridPath leaf_path(int v) const;
  // Jump path from the root: nodes root, ..., v.
  std::vector<int> lineage(int v) const;
  // Child of v through (gap_index, sign), or -1.
  int child(int v, int gap_index, int sign) const;
  std::string describe_history(int v) const;

 private:
  int N_ = 1, m_ = 0, J_ = 1;
  double T_ = 1.0;
  long cap_level_ = 0;
  std::size_t node_cap_ = 0;
  std::size_t capped_branches_ = 0;
  std::vector<std::vector<double>> menus_;
  std::vector<Node> nodes_;
  std::vector<int> roots_;
};

// Probability mass of each stop leaf, indexed like the tree nodes.
struct TreeMeasure {
  std::vector<double> mass;

  double subtree_mass(const PathTree& tree, int v) const;
  std::map<long, double> terminal_law(const PathTree& tree) const;
};

// Random martingale measure: at every node a random stop fraction, the
// rest spread over the branches and split evenly between up and down.
TreeMeasure random_tree_measure(const PathTree& tree, Rng& rng);

// Terminal law of a random martingale measure whose roots carry equal mass,
// so the exact-marginal problem is feasible and the mean is 1.
GridMarginal random_terminal_marginal(const PathTree& tree, Rng& rng);

struct MarginalMode {
  enum class Kind { Exact, Band };
  Kind kind = Kind::Exact;
  double K = 0.0;  // band radius: sum |Q(S_T = k/N) - nu(k/N)| <= K / N

  static MarginalMode exact() { return {}; }
  static MarginalMode band(double K) { return {Kind::Band, K}; }
};

struct PricingResult {
  LpResult lp;
  LpStatus status = LpStatus::SolverFailure;
  double value = 0.0;
  TreeMeasure measure;
};

struct DualCertificate {
  std::map<long, double> h;  // static payoff on the grid levels
  double cash = 0.0;         // band mode only
  double lambda = 0.0;       // band mode only
  // gamma[v][b]: position held at node v for the jump through branch b.
  std::vector<std::vector<double>> gamma;

  // h(F_T) + cash + sum of gamma * jump along the stop leaf at v.
  double leaf_value(const PathTree& tree, int v) const;
};

struct HedgeResult {
  LpResult lp;
  LpStatus status = LpStatus::SolverFailure;
  double value = 0.0;
  DualCertificate certificate;
  // min over leaves of certificate value - G(leaf); >= -tol when feasible.
  double min_leaf_margin = 0.0;
};

// Throws ConfigError when the tree and nu differ in N.
PricingResult primal_lp(const PathTree& tree, const Claim& claim, const GridMarginal& nu,
                        MarginalMode mode = {}, const LpOptions& options = {});
HedgeResult dual_lp(const PathTree& tree, const Claim& claim, const GridMarginal& nu,
                    MarginalMode mode = {}, const LpOptions& options = {});

struct MartingaleViolation {
  int node;
  int branch;
  double residual;  // (up mass - down mass) through the branch
};

struct MeasureReport {
  double min_mass = 0.0;
  double normalization_residual = 0.0;
  double max_martingale_residual = 0.0;
  std::vector<MartingaleViolation> violations;
  double terminal_residual = 0.0;  // l1 distance to nu (0 if none given)
  bool ok = false;
};

MeasureReport verify_measure(const PathTree& tree, const TreeMeasure& q,
                             const GridMarginal* nu = nullptr, MarginalMode mode = {},
                             double tol = 1e-9);

struct DualityInstance {
  PricingResult primal;
  HedgeResult dual;
  double gap = 0.0;  // dual - primal
  bool strong = false;  // |gap| <= 1e-8 (1 + |primal|)
  bool weak = false;    // dual >= primal - 1e-8
};

inline constexpr double kDualityTolerance = 1e-8;

DualityInstance solve_duality(const PathTree& tree, const Claim& claim, const GridMarginal& nu,
                              MarginalMode mode = {}, const LpOptions& options = {});

struct RefineStep {
  int N;
  int m;
  int J;
};

struct RefineRow {
  RefineStep step;
  int nodes = 0;
  std::size_t capped_branches = 0;
  LpStatus primal_status = LpStatus::SolverFailure;
  LpStatus dual_status = LpStatus::SolverFailure;
  double primal = 0.0;
  double dual = 0.0;
  double gap = 0.0;
  bool weak_duality = false;
  // Change in primal value relative to the previous feasible row.
  std::optional<double> trend;
  std::string note;
};

// Solves each step of the schedule against mu^(N); rows that fail to
// build or solve carry a note instead of aborting the sweep.
std::vector<RefineRow> refine_experiment(const Claim& claim, const Marginal& mu,
                                         const std::vector<RefineStep>& schedule,
                                         MarginalMode mode = {}, std::size_t node_cap = 200'000);

}  // namespace motdual
