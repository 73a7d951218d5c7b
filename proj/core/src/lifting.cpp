#include "motdual/lifting.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <sstream>

#include <boost/math/special_functions/gamma.hpp>

#include "motdual/errors.hpp"
#include "motdual/marginals.hpp"
#include "motdual/normal.hpp"
#include "motdual/rng.hpp"

namespace motdual {

std::string to_string(const LiftHistory& history) {
  std::ostringstream os;
  os << "[";
  for (std::size_t i = 0; i < history.depth(); ++i) {
    if (i) os << " ";
    os << (history.signs[i] > 0 ? '+' : '-') << "g" << history.gaps[i];
  }
  os << "]";
  return os.str();
}

const ConditionalTables::Entry* ConditionalTables::find(const LiftHistory& h) const {
  auto it = entries.find(h);
  return it == entries.end() ? nullptr : &it->second;
}

int ConditionalTables::alphabet_index(double gap) const {
  for (int l = 0; l < static_cast<int>(alphabet.size()); ++l)
    if (std::abs(alphabet[l] - gap) <= 1e-12 * alphabet[l]) return l;
  return -1;
}

ConditionalTables extract_conditionals(const PathTree& tree, const TreeMeasure& q) {
  if (static_cast<int>(q.mass.size()) != tree.size())
    throw DomainError("measure and tree differ in size");
  ConditionalTables t;
  t.N = tree.N();
  t.m = tree.max_jumps();
  t.alphabet.push_back(tree.T());
  for (int k = 1; k <= t.m; ++k)
    for (double g : tree.menu(k))
      if (t.alphabet_index(g) < 0) t.alphabet.push_back(g);
  std::sort(t.alphabet.begin() + 1, t.alphabet.end(), std::greater<>());
  const int L = static_cast<int>(t.alphabet.size());

  // Raw masses per history: stop mass and (up, down) per alphabet gap.
  struct Raw {
    double stop = 0.0;
    std::vector<double> up, down;
  };
  std::map<LiftHistory, Raw> raw;
  std::vector<LiftHistory> hist(tree.size());
  std::vector<double> prefix(tree.size() + 1, 0.0);
  for (int v = 0; v < tree.size(); ++v) prefix[v + 1] = prefix[v] + q.mass[v];
  auto subtree = [&](int v) { return prefix[tree.node(v).subtree_end] - prefix[v]; };
  for (int v = 0; v < tree.size(); ++v) {
    const auto& n = tree.node(v);
    if (n.parent >= 0) {
      hist[v] = hist[n.parent];
      hist[v].gaps.push_back(t.alphabet_index(tree.menu(n.depth)[n.gap_index]));
      hist[v].signs.push_back(n.sign);
    }
    if (n.depth >= t.m) continue;
    Raw& r = raw[hist[v]];
    if (r.up.empty()) r.up.assign(L, 0.0), r.down.assign(L, 0.0);
    r.stop += q.mass[v];
    for (const auto& b : n.branches) {
      int l = t.alphabet_index(b.gap);
      r.up[l] += subtree(b.up);
      r.down[l] += subtree(b.down);
    }
  }
  for (auto& [h, r] : raw) {
    double total = r.stop;
    for (int l = 0; l < L; ++l) total += r.up[l] + r.down[l];
    if (!(total > 0.0)) continue;
    ConditionalTables::Entry e;
    e.mass = total;
    e.psi.assign(L, 0.0);
    e.phi.assign(L, 0.0);
    double cum = r.stop;
    e.psi[0] = cum / total;
    for (int l = 1; l < L; ++l) {
      cum += r.up[l] + r.down[l];
      e.psi[l] = std::min(1.0, cum / total);
      double through = r.up[l] + r.down[l];
      if (through > 0.0) e.phi[l] = r.up[l] / through;
    }
    e.psi[L - 1] = 1.0;
    t.entries.emplace(h, std::move(e));
  }
  return t;
}

ThresholdTables compute_thresholds(const ConditionalTables& tables) {
  ThresholdTables out;
  out.N = tables.N;
  out.m = tables.m;
  out.alphabet = tables.alphabet;
  const int L = static_cast<int>(tables.alphabet.size());
  for (const auto& [h, e] : tables.entries) {
    ThresholdTables::Entry te;
    te.theta.resize(L);
    te.gamma.resize(L);
    for (int l = 0; l < L; ++l) {
      double next_t = l + 1 < L ? tables.alphabet[l + 1] : 0.0;
      double next_psi = l + 1 < L ? e.psi[l + 1] : 1.0;
      double ratio = next_psi > 0.0 ? std::clamp(e.psi[l] / next_psi, 0.0, 1.0) : 0.0;
      te.theta[l] = std::sqrt(tables.alphabet[l] - next_t) * gaussian_quantile(ratio);
      te.gamma[l] = std::sqrt(tables.alphabet[l]) * gaussian_quantile(std::clamp(e.phi[l], 0.0, 1.0));
    }
    out.entries.emplace(h, std::move(te));
  }
  return out;
}

LiftRun simulate_lift(const ThresholdTables& thr, std::size_t n_samples, std::uint64_t seed) {
  LiftRun run;
  run.samples.reserve(n_samples);
  const int L = static_cast<int>(thr.alphabet.size());
  for (std::size_t i = 0; i < n_samples; ++i) {
    Rng rng(seed, i);
    LiftSample s;
    while (static_cast<int>(s.history.depth()) < thr.m) {
      auto it = thr.entries.find(s.history);
      if (it == thr.entries.end()) {
        s.uncharged = true;
        break;
      }
      const auto& e = it->second;
      int gap = 0;  // stop
      for (int l = L - 1; l >= 0; --l) {
        double width = thr.alphabet[l] - (l + 1 < L ? thr.alphabet[l + 1] : 0.0);
        double inc = std::sqrt(width) * rng.normal();
        if (inc > e.theta[l]) {
          gap = l + 1;
          break;
        }
      }
      if (gap == L) {
        s.tail = true;
        break;
      }
      if (gap == 0) break;
      double w = std::sqrt(thr.alphabet[gap]) * rng.normal();
      s.history.gaps.push_back(gap);
      s.history.signs.push_back(w < e.gamma[gap] ? 1 : -1);
    }
    if (s.tail) ++run.tail_count;
    if (s.uncharged) ++run.uncharged_count;
    run.samples.push_back(std::move(s));
  }
  return run;
}

LiftRun sample_tree_direct(const ConditionalTables& tables, std::size_t n_samples,
                           std::uint64_t seed) {
  LiftRun run;
  run.samples.reserve(n_samples);
  const int L = static_cast<int>(tables.alphabet.size());
  for (std::size_t i = 0; i < n_samples; ++i) {
    Rng rng(seed, i);
    LiftSample s;
    while (static_cast<int>(s.history.depth()) < tables.m) {
      const auto* e = tables.find(s.history);
      if (!e) {
        s.uncharged = true;
        break;
      }
      double u = rng.uniform();
      int gap = 0;
      while (gap < L - 1 && u >= e->psi[gap]) ++gap;
      if (gap == 0) break;
      s.history.gaps.push_back(gap);
      s.history.signs.push_back(rng.uniform() < e->phi[gap] ? 1 : -1);
    }
    if (s.uncharged) ++run.uncharged_count;
    run.samples.push_back(std::move(s));
  }
  return run;
}

std::map<LiftHistory, double> outcome_law(const ConditionalTables& tables) {
  std::map<LiftHistory, double> law;
  const int L = static_cast<int>(tables.alphabet.size());
  std::function<void(const LiftHistory&, double)> walk = [&](const LiftHistory& h, double p) {
    if (!(p > 0.0)) return;
    if (static_cast<int>(h.depth()) >= tables.m) {
      law[h] += p;
      return;
    }
    const auto* e = tables.find(h);
    if (!e) {
      law[h] += p;
      return;
    }
    if (e->psi[0] > 0.0) law[h] += p * e->psi[0];
    for (int l = 1; l < L; ++l) {
      double pg = p * (e->psi[l] - e->psi[l - 1]);
      if (!(pg > 0.0)) continue;
      for (int sign : {1, -1}) {
        LiftHistory next = h;
        next.gaps.push_back(l);
        next.signs.push_back(sign);
        walk(next, pg * (sign > 0 ? e->phi[l] : 1.0 - e->phi[l]));
      }
    }
  };
  walk({}, 1.0);
  return law;
}

ChiSquareResult chi_square_gof(const std::vector<LiftSample>& samples,
                               const std::map<LiftHistory, double>& law) {
  ChiSquareResult r;
  const double n = static_cast<double>(samples.size());
  std::map<LiftHistory, double> observed;
  for (const auto& s : samples) {
    if (s.tail || s.uncharged || !law.count(s.history)) {
      ++r.unexpected;
      continue;
    }
    observed[s.history] += 1.0;
  }
  struct Cell {
    double expected = 0.0, observed = 0.0;
  };
  std::vector<Cell> cells;
  Cell pooled;
  for (const auto& [h, p] : law) {
    if (!(p > 0.0)) continue;
    auto it = observed.find(h);
    Cell c{n * p, it == observed.end() ? 0.0 : it->second};
    if (c.expected < 5.0) {
      pooled.expected += c.expected;
      pooled.observed += c.observed;
      ++r.pooled_cells;
    } else {
      cells.push_back(c);
    }
  }
  if (r.pooled_cells > 0) {
    if (pooled.expected >= 5.0 || cells.empty()) {
      cells.push_back(pooled);
    } else {
      auto smallest = std::min_element(cells.begin(), cells.end(), [](const Cell& a, const Cell& b) {
        return a.expected < b.expected;
      });
      smallest->expected += pooled.expected;
      smallest->observed += pooled.observed;
    }
  }
  r.cells = cells.size();
  for (const Cell& c : cells)
    if (c.expected > 0.0) r.statistic += (c.observed - c.expected) * (c.observed - c.expected) / c.expected;
  r.dof = static_cast<int>(cells.size()) - 1;
  if (r.unexpected > 0)
    r.p_value = 0.0;
  else if (r.dof <= 0)
    r.p_value = 1.0;
  else
    r.p_value = boost::math::gamma_q(0.5 * r.dof, 0.5 * r.statistic);
  return r;
}

namespace {

// E[sum of future Y | history], from the tables.
double expected_future(const ConditionalTables& tables, const LiftHistory& h,
                       std::map<LiftHistory, double>& memo) {
  if (static_cast<int>(h.depth()) >= tables.m) return 0.0;
  auto it = memo.find(h);
  if (it != memo.end()) return it->second;
  const auto* e = tables.find(h);
  double v = 0.0;
  if (e) {
    const int L = static_cast<int>(tables.alphabet.size());
    for (int l = 1; l < L; ++l) {
      double pg = e->psi[l] - e->psi[l - 1];
      if (!(pg > 0.0)) continue;
      LiftHistory up = h, down = h;
      up.gaps.push_back(l);
      up.signs.push_back(1);
      down.gaps.push_back(l);
      down.signs.push_back(-1);
      double phi = e->phi[l];
      v += pg * (phi * (1.0 + expected_future(tables, up, memo)) +
                 (1.0 - phi) * (-1.0 + expected_future(tables, down, memo)));
    }
  }
  memo.emplace(h, v);
  return v;
}

}  // namespace

ZIdentityCheck check_z_identity(const ConditionalTables& tables, const std::vector<LiftSample>& samples) {
  ZIdentityCheck out;
  std::map<LiftHistory, double> memo;
  const double N = tables.N;
  for (const auto& s : samples) {
    LiftHistory prefix;
    double partial = 0.0;
    for (std::size_t k = 0; k <= s.history.depth(); ++k) {
      if (k > 0) {
        prefix.gaps.push_back(s.history.gaps[k - 1]);
        prefix.signs.push_back(s.history.signs[k - 1]);
        partial += s.history.signs[k - 1];
      }
      double z = 1.0 + (partial + expected_future(tables, prefix, memo)) / N;
      out.max_error = std::max(out.max_error, std::abs(z - (1.0 + partial / N)));
    }
  }
  out.ok = out.max_error <= 1e-12;
  return out;
}

IdentityReport verify_identity(const LiftRun& run, const ConditionalTables& tables) {
  IdentityReport r;
  r.samples = run.samples.size();
  auto law = outcome_law(tables);
  r.chi_square = chi_square_gof(run.samples, law);
  r.z_identity = check_z_identity(tables, run.samples);

  // Terminal values 1 + sum Y / N, translated so that every atom is nonnegative.
  const double offset = 1.0 + static_cast<double>(tables.m) / tables.N;
  auto terminal = [&](const LiftHistory& h) {
    long s = 0;
    for (int y : h.signs) s += y;
    return s;
  };
  std::map<long, double> exact, empirical;
  double total = 0.0;
  for (const auto& [h, p] : law) {
    exact[terminal(h)] += p;
    total += p;
  }
  auto to_marginal = [&](const std::map<long, double>& w, double mass) {
    std::vector<Atom> atoms;
    for (const auto& [k, x] : w)
      if (x > 0.0) atoms.push_back({offset + static_cast<double>(k) / tables.N, x / mass});
    return atoms;
  };
  for (const auto& s : run.samples) empirical[terminal(s.history)] += 1.0;
  if (!run.samples.empty() && total > 0.0) {
    auto a = to_marginal(exact, total);
    auto b = to_marginal(empirical, static_cast<double>(run.samples.size()));
    // Renormalize against rounding in the atom weights.
    auto fix = [](std::vector<Atom>& v) {
      double s = 0.0;
      for (const Atom& x : v) s += x.weight;
      for (Atom& x : v) x.weight /= s;
    };
    fix(a);
    fix(b);
    r.terminal_prokhorov = prokhorov_distance(Marginal::atomic(a), Marginal::atomic(b));
    const double alpha = 1e-3;
    r.prokhorov_band = std::sqrt((static_cast<double>(exact.size()) * std::log(2.0) + std::log(1.0 / alpha)) /
                                 (2.0 * static_cast<double>(run.samples.size())));
  }
  return r;
}

ConditionalTables perturb_phi(const ConditionalTables& tables, const LiftHistory& history, int l,
                              double shift) {
  ConditionalTables out = tables;
  auto it = out.entries.find(history);
  if (it == out.entries.end()) throw DomainError("perturb_phi: history " + to_string(history) + " is not charged");
  if (l <= 0 || l >= static_cast<int>(out.alphabet.size()))
    throw DomainError("perturb_phi: gap index out of range");
  it->second.phi[l] = std::clamp(it->second.phi[l] + shift, 0.0, 1.0);
  return out;
}

}  // namespace motdual
