#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <string>
#include <vector>

#include "motdual/discretize.hpp"
#include "motdual/mot.hpp"
#include "motdual/payoffs.hpp"

namespace motdual {

// The part of a crossing decomposition visible at tau_k: crossing times
// and values up to index k only.
class CrossingHistory {
 public:
  CrossingHistory(const CrossingDecomposition& dec, int k);

  int N() const { return dec_->N; }
  int index() const { return k_; }
  double time(int i) const;   // tau_i, i <= k
  double value(int i) const;  // S_{tau_i}, i <= k
  long level(int i) const;    // N (S_{tau_i} - 1), i <= k
  double running_max() const;  // max_{i <= k} S_{tau_i}

 private:
  const CrossingDecomposition* dec_;
  int k_;
};

// gamma_k, held on (tau_k, tau_{k+1}].
using PositionRule = std::function<double(const CrossingHistory&)>;
using StaticPayoff = std::function<double(double)>;

struct SemiStaticPortfolio {
  StaticPayoff g;
  PositionRule gamma;
  int N = 1;
  // Admissibility witness: Z_t >= -M (1 + sup_{u <= t} S_u^p).
  double M = 1.0;
  double p = 2.0;
  std::string label;
};

// Value of the stock position and, at t == T, the static payoff.
double portfolio_value(const SemiStaticPortfolio& pi, const SampledPath& path, double t);

struct PortfolioTrace {
  CrossingDecomposition crossings;
  std::vector<double> positions;  // gamma_k for k = 0..H-1
  std::vector<double> gains;      // integral of gamma dS up to tau_k, k = 0..H
  double static_payoff = 0.0;     // g(S_T)
  double terminal = 0.0;          // Z_T
};

PortfolioTrace trace_portfolio(const SemiStaticPortfolio& pi, const SampledPath& path);

// Sum of two portfolios on the same N.
SemiStaticPortfolio operator+(const SemiStaticPortfolio& a, const SemiStaticPortfolio& b);

// Explicit super-hedge of S_bar / K + S_bar 1{S_bar >= K}. Throws DomainError
// unless p > 1 and N > K > 1.
SemiStaticPortfolio alpha_hedge(int N, double K, double p);

// S_bar / K + S_bar 1{S_bar >= K}.
double alpha_target(double running_max, double K);

struct AlphaHedgeCheck {
  double min_margin = 0.0;  // over all crossing times
  std::size_t violations = 0;
};

// Checks g(S_t) + int_0^t gamma dS >= alpha_target(S_bar_t, K) at every
// crossing time t = tau_k with the exact running maximum.
AlphaHedgeCheck check_alpha_hedge(const SemiStaticPortfolio& pi, double K, const SampledPath& path,
                                  double tol = 1e-12);

struct SuperReplicationReport {
  std::size_t paths = 0;
  double min_margin = 0.0;         // min over paths of Z_T - G(S)
  std::vector<std::size_t> violations;  // paths with margin < -tol
  std::vector<std::size_t> admissibility_violations;
  std::vector<std::size_t> out_of_tree;  // skipped: the portfolio is undefined there
  std::vector<double> margins;
  double tolerance = 0.0;
};

SuperReplicationReport check_superreplication(const SemiStaticPortfolio& pi, const Claim& claim,
                                              const std::vector<SampledPath>& paths,
                                              double tol = 1e-9);

// Same check against G - shift(S), e.g. shift = 5 L ||S|| / N.
SuperReplicationReport check_superreplication(const SemiStaticPortfolio& pi, const Claim& claim,
                                              const std::function<double(const SampledPath&)>& shift,
                                              const std::vector<SampledPath>& paths,
                                              double tol = 1e-9);

// Continuous-path portfolio from a tree hedge: g = L(h) and, on
// (tau_k, tau_{k+1}] for k >= 1, the tree position at the node reached by
// F^(N)(S) after k - 1 jumps, for the snapped k-th gap. gamma = 0 on
// [0, tau_1]. Evaluating it on a path whose embedding leaves the tree throws
// OutOfTreeError naming the history. The tree must outlive the portfolio.
SemiStaticPortfolio lift_tree_hedge(const PathTree& tree, const DualCertificate& certificate);

}  // namespace motdual
