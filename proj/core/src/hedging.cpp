#include "motdual/hedging.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <sstream>

#include "motdual/errors.hpp"
#include "motdual/gap_set.hpp"
#include "motdual/marginals.hpp"

namespace motdual {

CrossingHistory::CrossingHistory(const CrossingDecomposition& dec, int k) : dec_(&dec), k_(k) {
  if (k < 0 || k >= dec.crossings()) throw DomainError("crossing history index out of range");
}

double CrossingHistory::time(int i) const {
  if (i < 0 || i > k_) throw DomainError("crossing history: looking ahead of tau_k");
  return dec_->taus[i];
}

double CrossingHistory::value(int i) const {
  if (i < 0 || i > k_) throw DomainError("crossing history: looking ahead of tau_k");
  return dec_->value_at(i);
}

long CrossingHistory::level(int i) const {
  if (i < 0 || i > k_) throw DomainError("crossing history: looking ahead of tau_k");
  return dec_->levels[i];
}

double CrossingHistory::running_max() const {
  double m = 1.0;
  for (int i = 0; i <= k_; ++i) m = std::max(m, value(i));
  return m;
}

PortfolioTrace trace_portfolio(const SemiStaticPortfolio& pi, const SampledPath& path) {
  PortfolioTrace tr;
  tr.crossings = crossing_times(path, pi.N);
  const int H = tr.crossings.crossings();
  tr.gains.push_back(0.0);
  for (int k = 0; k < H; ++k) {
    double gamma = pi.gamma ? pi.gamma(CrossingHistory(tr.crossings, k)) : 0.0;
    tr.positions.push_back(gamma);
    double dS = tr.crossings.value_at(k + 1) - tr.crossings.value_at(k);
    tr.gains.push_back(tr.gains.back() + gamma * dS);
  }
  tr.static_payoff = pi.g ? pi.g(path.terminal()) : 0.0;
  tr.terminal = tr.gains.back() + tr.static_payoff;
  return tr;
}

double portfolio_value(const SemiStaticPortfolio& pi, const SampledPath& path, double t) {
  const double T = path.horizon();
  if (!(t >= 0.0 && t <= T)) throw DomainError("portfolio_value: t outside [0, T]");
  CrossingDecomposition dec = crossing_times(path, pi.N);
  double z = 0.0;
  for (int k = 0; k < dec.crossings() && dec.taus[k] < t; ++k) {
    double gamma = pi.gamma ? pi.gamma(CrossingHistory(dec, k)) : 0.0;
    double end = dec.taus[k + 1] <= t ? dec.value_at(k + 1) : path.value_at(t);
    z += gamma * (end - dec.value_at(k));
  }
  if (t == T && pi.g) z += pi.g(path.terminal());
  return z;
}

SemiStaticPortfolio operator+(const SemiStaticPortfolio& a, const SemiStaticPortfolio& b) {
  if (a.N != b.N) throw DomainError("portfolios trade on different resolutions");
  SemiStaticPortfolio c;
  c.N = a.N;
  c.M = a.M + b.M;
  c.p = std::max(a.p, b.p);
  c.label = a.label + " + " + b.label;
  c.g = [ga = a.g, gb = b.g](double x) { return (ga ? ga(x) : 0.0) + (gb ? gb(x) : 0.0); };
  c.gamma = [fa = a.gamma, fb = b.gamma](const CrossingHistory& h) {
    return (fa ? fa(h) : 0.0) + (fb ? fb(h) : 0.0);
  };
  return c;
}

double alpha_target(double running_max, double K) {
  return running_max / K + (running_max >= K ? running_max : 0.0);
}

SemiStaticPortfolio alpha_hedge(int N, double K, double p) {
  if (!(p > 1.0)) throw DomainError("alpha hedge: p must exceed 1");
  if (!(K > 1.0)) throw DomainError("alpha hedge: K must exceed 1");
  if (!(N > K)) throw DomainError("alpha hedge: N must exceed K");
  const double c = p / (p - 1.0);
  const double high = std::pow(c * (K - 1.0), p);
  SemiStaticPortfolio pi;
  pi.N = N;
  pi.p = p;
  pi.M = 1.0;
  std::ostringstream os;
  os << "alpha-hedge(N=" << N << ", K=" << K << ", p=" << p << ")";
  pi.label = os.str();
  pi.g = [=](double x) {
    double y = std::pow(c * x, p);
    return (1.0 + std::max(y - c, 0.0)) / K + std::max(y - high, 0.0) + 2.0 / N;
  };
  pi.gamma = [=](const CrossingHistory& h) {
    const int k = h.index();
    double all = 0.0;
    int theta = -1;
    double after = 0.0;
    for (int i = 0; i <= k; ++i) {
      double s = std::pow(h.value(i), p - 1.0);
      all = std::max(all, s);
      if (theta < 0 && h.value(i) >= K - 1.0) theta = i;
      if (theta >= 0) after = std::max(after, s);
    }
    double gamma = -p * p / (K * (p - 1.0)) * all;
    if (theta >= 0) gamma -= p * p / (p - 1.0) * after;
    return gamma;
  };
  return pi;
}

AlphaHedgeCheck check_alpha_hedge(const SemiStaticPortfolio& pi, double K, const SampledPath& path,
                                  double tol) {
  AlphaHedgeCheck out;
  out.min_margin = std::numeric_limits<double>::infinity();
  PortfolioTrace tr = trace_portfolio(pi, path);
  for (int k = 0; k <= tr.crossings.crossings(); ++k) {
    double t = tr.crossings.taus[k];
    double s = tr.crossings.value_at(k);
    double z = pi.g(s) + tr.gains[k];
    double margin = z - alpha_target(running_max(path, t), K);
    out.min_margin = std::min(out.min_margin, margin);
    if (margin < -tol) ++out.violations;
  }
  return out;
}

SuperReplicationReport check_superreplication(const SemiStaticPortfolio& pi, const Claim& claim,
                                              const std::function<double(const SampledPath&)>& shift,
                                              const std::vector<SampledPath>& paths, double tol) {
  SuperReplicationReport r;
  r.paths = paths.size();
  r.tolerance = tol;
  r.min_margin = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < paths.size(); ++i) {
    const SampledPath& s = paths[i];
    PortfolioTrace tr;
    try {
      tr = trace_portfolio(pi, s);
    } catch (const OutOfTreeError&) {
      r.out_of_tree.push_back(i);
      r.margins.push_back(std::numeric_limits<double>::quiet_NaN());
      continue;
    }
    double target = claim(s) - (shift ? shift(s) : 0.0);
    double margin = tr.terminal - target;
    r.margins.push_back(margin);
    r.min_margin = std::min(r.min_margin, margin);
    if (margin < -tol) r.violations.push_back(i);
    const int H = tr.crossings.crossings();
    for (int k = 0; k <= H; ++k) {
      double z = tr.gains[k] + (k == H ? tr.static_payoff : 0.0);
      double floor = -pi.M * (1.0 + std::pow(running_max(s, tr.crossings.taus[k]), pi.p));
      if (z < floor - tol) {
        r.admissibility_violations.push_back(i);
        break;
      }
    }
  }
  if (r.margins.empty() || r.out_of_tree.size() == paths.size()) r.min_margin = 0.0;
  return r;
}

SuperReplicationReport check_superreplication(const SemiStaticPortfolio& pi, const Claim& claim,
                                              const std::vector<SampledPath>& paths, double tol) {
  return check_superreplication(pi, claim, nullptr, paths, tol);
}

namespace {

int menu_index(const std::vector<double>& menu, double gap) {
  for (int i = 0; i < static_cast<int>(menu.size()); ++i)
    if (std::abs(menu[i] - gap) <= 1e-12 * menu[i]) return i;
  return -1;
}

[[noreturn]] void out_of_tree(const CrossingHistory& h, int k, const std::string& what) {
  std::ostringstream os;
  os << "embedded history leaves the tree (" << what << "); crossing values";
  for (int i = 0; i <= k; ++i) os << " " << h.value(i) << "@" << h.time(i);
  throw OutOfTreeError(os.str());
}

}  // namespace

SemiStaticPortfolio lift_tree_hedge(const PathTree& tree, const DualCertificate& certificate) {
  SemiStaticPortfolio pi;
  pi.N = tree.N();
  pi.label = "lifted tree hedge";
  auto h = std::make_shared<const std::map<long, double>>(certificate.h);
  auto gamma = std::make_shared<const std::vector<std::vector<double>>>(certificate.gamma);
  const double cash = certificate.cash;
  const int N = tree.N();
  pi.g = [h, cash, N](double x) {
    GridFunction f = [&h](long k) {
      auto it = h->find(k);
      if (it == h->end()) {
        std::ostringstream os;
        os << "no static payoff at grid level " << k;
        throw OutOfTreeError(os.str());
      }
      return it->second;
    };
    return lift_static_at(f, N, x) + cash;
  };
  const PathTree* t = &tree;
  pi.gamma = [t, gamma, N](const CrossingHistory& hist) {
    const int k = hist.index();
    if (k == 0) return 0.0;
    // Root of F^(N)(S) is S_{tau_1}.
    int node = -1;
    for (int r : t->roots())
      if (t->node(r).level == N + hist.level(1)) node = r;
    if (node < 0) out_of_tree(hist, k, "start value");
    for (int i = 1; i < k; ++i) {
      int sign = static_cast<int>(hist.level(i + 1) - hist.level(i));
      double gap = snap_gap(i, N, hist.time(i) - hist.time(i - 1));
      int gi = i <= t->max_jumps() ? menu_index(t->menu(i), gap) : -1;
      int next = gi >= 0 ? t->child(node, gi, sign) : -1;
      if (next < 0) out_of_tree(hist, k, "jump " + std::to_string(i));
      node = next;
    }
    double gap = snap_gap(k, N, hist.time(k) - hist.time(k - 1));
    int gi = k <= t->max_jumps() ? menu_index(t->menu(k), gap) : -1;
    const auto& br = t->node(node).branches;
    for (int b = 0; b < static_cast<int>(br.size()); ++b)
      if (br[b].gap_index == gi) return (*gamma)[node][b];
    out_of_tree(hist, k, "jump " + std::to_string(k));
  };
  return pi;
}

}  // namespace motdual
