#include "motdual/marginals.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "motdual/errors.hpp"

namespace motdual {

namespace {

constexpr double kMassTolerance = 1e-12;

double simpson(const std::function<double(double)>& f, double a, double b) {
  return (b - a) / 6.0 * (f(a) + 4.0 * f(0.5 * (a + b)) + f(b));
}

double density_at(std::span<const DensityKnot> knots, double x) {
  if (x < knots.front().x || x > knots.back().x) return 0.0;
  auto it = std::upper_bound(knots.begin(), knots.end(), x,
                             [](double s, const DensityKnot& k) { return s < k.x; });
  if (it == knots.end()) return knots.back().density;
  const DensityKnot& b = *it;
  const DensityKnot& a = *(it - 1);
  return a.density + (b.density - a.density) * (x - a.x) / (b.x - a.x);
}

}  // namespace

Marginal Marginal::atomic(std::vector<Atom> atoms) {
  if (atoms.empty()) throw DomainError("marginal: no atoms");
  std::sort(atoms.begin(), atoms.end(), [](const Atom& a, const Atom& b) { return a.x < b.x; });
  Marginal m;
  double total = 0.0;
  for (const Atom& a : atoms) {
    if (!(a.x >= 0.0) || !std::isfinite(a.x)) throw DomainError("marginal: atoms must lie in [0, inf)");
    if (!(a.weight > 0.0) || !std::isfinite(a.weight))
      throw DomainError("marginal: atom weights must be positive");
    total += a.weight;
    if (!m.atoms_.empty() && m.atoms_.back().x == a.x)
      m.atoms_.back().weight += a.weight;
    else
      m.atoms_.push_back(a);
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "marginal: total mass " << total << " is not 1";
    throw DomainError(os.str());
  }
  return m;
}

Marginal Marginal::density(std::vector<DensityKnot> knots) {
  if (knots.size() < 2) throw DomainError("marginal: a density needs at least two knots");
  double total = 0.0;
  for (std::size_t i = 0; i < knots.size(); ++i) {
    const DensityKnot& k = knots[i];
    if (!(k.x >= 0.0) || !std::isfinite(k.x)) throw DomainError("marginal: density knots must lie in [0, inf)");
    if (!(k.density >= 0.0) || !std::isfinite(k.density))
      throw DomainError("marginal: density values must be nonnegative");
    if (i > 0) {
      if (!(k.x > knots[i - 1].x)) throw DomainError("marginal: density knots must be increasing");
      total += 0.5 * (k.x - knots[i - 1].x) * (k.density + knots[i - 1].density);
    }
  }
  if (std::abs(total - 1.0) > kMassTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << "marginal: density integrates to " << total << ", not 1";
    throw DomainError(os.str());
  }
  Marginal m;
  m.knots_ = std::move(knots);
  return m;
}

double Marginal::integrate(const std::function<double(double)>& f,
                           std::span<const double> breakpoints) const {
  if (is_atomic()) {
    double s = 0.0;
    for (const Atom& a : atoms_) s += f(a.x) * a.weight;
    return s;
  }
  std::vector<double> cuts;
  for (const DensityKnot& k : knots_) cuts.push_back(k.x);
  for (double b : breakpoints)
    if (b > knots_.front().x && b < knots_.back().x) cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double a = cuts[i], b = cuts[i + 1];
    // Density is affine on [a, b]; evaluate it from the interior to pick the right piece.
    double fa = density_at(knots_, a), fb = density_at(knots_, b);
    auto dens = [&](double x) { return fa + (fb - fa) * (x - a) / (b - a); };
    s += simpson([&](double x) { return f(x) * dens(x); }, a, b);
  }
  return s;
}

double Marginal::mass() const {
  return integrate([](double) { return 1.0; });
}

double Marginal::mean() const {
  return integrate([](double x) { return x; });
}

double Marginal::moment(double p) const {
  if (is_atomic()) return integrate([p](double x) { return std::pow(x, p); });
  // Refine each piece so non-integer powers are integrated accurately.
  std::vector<double> cuts;
  for (std::size_t i = 0; i + 1 < knots_.size(); ++i) {
    for (int j = 1; j < 64; ++j)
      cuts.push_back(knots_[i].x + (knots_[i + 1].x - knots_[i].x) * j / 64.0);
  }
  return integrate([p](double x) { return std::pow(x, p); }, cuts);
}

double Marginal::call_price(double strike) const {
  double b[] = {strike};
  return integrate([strike](double x) { return std::max(x - strike, 0.0); }, b);
}

double Marginal::support_max() const {
  return is_atomic() ? atoms_.back().x : knots_.back().x;
}

MarginalCheck check_marginal(const Marginal& mu, double p, double mean_tol) {
  MarginalCheck c;
  c.mass = mu.mass();
  c.mean = mu.mean();
  c.p_moment = p > 1.0 ? mu.moment(p) : std::numeric_limits<double>::infinity();
  c.ok = std::abs(c.mass - 1.0) <= kMassTolerance && std::abs(c.mean - 1.0) <= mean_tol &&
         std::isfinite(c.p_moment);
  return c;
}

double GridMarginal::mass() const {
  double s = 0.0;
  for (const auto& [k, w] : weights) s += w;
  return s;
}

double GridMarginal::mean() const {
  double s = 0.0;
  for (const auto& [k, w] : weights) s += w * (static_cast<double>(k) / N);
  return s;
}

double GridMarginal::weight(long k) const {
  auto it = weights.find(k);
  return it == weights.end() ? 0.0 : it->second;
}

double GridMarginal::call_price(double strike) const {
  double s = 0.0;
  for (const auto& [k, w] : weights) s += w * std::max(static_cast<double>(k) / N - strike, 0.0);
  return s;
}

Marginal GridMarginal::as_marginal() const {
  std::vector<Atom> atoms;
  double total = 0.0;
  for (const auto& [k, w] : weights) {
    if (w > 0.0) {
      atoms.push_back({static_cast<double>(k) / N, w});
      total += w;
    }
  }
  // Absorb rounding so the result passes the unit-mass check.
  if (!atoms.empty()) atoms.back().weight += 1.0 - total;
  return Marginal::atomic(std::move(atoms));
}

GridMarginal project_marginal(const Marginal& mu, int N) {
  if (N < 1) throw DomainError("project_marginal: N must be at least 1");
  GridMarginal g;
  g.N = N;
  auto add = [&](long k, double w) {
    if (w != 0.0) g.weights[k] += w;
  };
  if (mu.is_atomic()) {
    for (const Atom& a : mu.atoms()) {
      double y = a.x * N;
      double k = std::floor(y);
      double frac = y - k;
      add(static_cast<long>(k), (1.0 - frac) * a.weight);
      if (frac > 0.0) add(static_cast<long>(k) + 1, frac * a.weight);
    }
    return g;
  }
  auto knots = mu.knots();
  std::vector<double> cuts;
  for (const DensityKnot& k : knots) cuts.push_back(k.x);
  long j0 = static_cast<long>(std::floor(knots.front().x * N));
  long j1 = static_cast<long>(std::ceil(knots.back().x * N));
  for (long j = j0; j <= j1; ++j) {
    double x = static_cast<double>(j) / N;
    if (x > knots.front().x && x < knots.back().x) cuts.push_back(x);
  }
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double a = cuts[i], b = cuts[i + 1];
    long j = static_cast<long>(std::floor(0.5 * (a + b) * N));
    double fa = density_at(knots, a), fb = density_at(knots, b);
    auto dens = [&](double x) { return fa + (fb - fa) * (x - a) / (b - a); };
    add(j, simpson([&](double x) { return (static_cast<double>(j + 1) - N * x) * dens(x); }, a, b));
    add(j + 1, simpson([&](double x) { return (N * x - static_cast<double>(j)) * dens(x); }, a, b));
  }
  return g;
}

double lift_static_at(const GridFunction& h, int N, double x) {
  if (!(x >= 0.0)) throw DomainError("lift_static: x must be nonnegative");
  double y = x * N;
  double k = std::floor(y);
  double frac = y - k;
  long kk = static_cast<long>(k);
  if (frac == 0.0) return h(kk);
  return (1.0 - frac) * h(kk) + frac * h(kk + 1);
}

std::function<double(double)> lift_static(GridFunction h, int N) {
  if (N < 1) throw DomainError("lift_static: N must be at least 1");
  return [h = std::move(h), N](double x) { return lift_static_at(h, N, x); };
}

PairingCheck pairing_identity_check(const GridFunction& h, const Marginal& mu, int N) {
  PairingCheck c;
  GridMarginal g = project_marginal(mu, N);
  for (const auto& [k, w] : g.weights) c.lhs += h(k) * w;
  std::vector<double> grid;
  if (!mu.is_atomic()) {
    auto knots = mu.knots();
    for (long j = static_cast<long>(std::floor(knots.front().x * N));
         j <= static_cast<long>(std::ceil(knots.back().x * N)); ++j)
      grid.push_back(static_cast<double>(j) / N);
  }
  c.rhs = mu.integrate([&](double x) { return lift_static_at(h, N, x); }, grid);
  c.ok = std::abs(c.lhs - c.rhs) <= kPairingTolerance * (1.0 + std::abs(c.lhs));
  return c;
}

namespace {

// max over A of a(A) - b(N_D(A)), where N_D(A) collects the atoms of b
// within distance D of A. The relation is an interval in sorted b for each
// atom of a, with nondecreasing endpoints, so a greedy leftmost assignment
// yields a maximum flow.
double deficiency(std::span<const Atom> a, std::span<const Atom> b, double D) {
  std::vector<double> cap(b.size());
  for (std::size_t j = 0; j < b.size(); ++j) cap[j] = b[j].weight;
  double flow = 0.0;
  std::size_t lo = 0;
  for (const Atom& x : a) {
    while (lo < b.size() && !(std::abs(b[lo].x - x.x) <= D) && b[lo].x < x.x) ++lo;
    double need = x.weight;
    for (std::size_t j = lo; j < b.size() && need > 0.0; ++j) {
      if (!(std::abs(b[j].x - x.x) <= D)) {
        if (b[j].x > x.x) break;
        continue;
      }
      double take = std::min(need, cap[j]);
      cap[j] -= take;
      need -= take;
      flow += take;
    }
  }
  double total = 0.0;
  for (const Atom& x : a) total += x.weight;
  return std::max(0.0, total - flow);
}

}  // namespace

double prokhorov_distance(const Marginal& a, const Marginal& b) {
  if (!a.is_atomic() || !b.is_atomic())
    throw UnsupportedError("prokhorov_distance: inputs must be atomic; discretize densities first");
  std::vector<double> D{0.0};
  for (const Atom& x : a.atoms())
    for (const Atom& y : b.atoms()) D.push_back(std::abs(x.x - y.x));
  std::sort(D.begin(), D.end());
  D.erase(std::unique(D.begin(), D.end()), D.end());
  double best = 1.0;
  for (std::size_t i = 0; i < D.size() && D[i] < best; ++i) {
    double c = std::max(deficiency(a.atoms(), b.atoms(), D[i]), deficiency(b.atoms(), a.atoms(), D[i]));
    double candidate = std::max(D[i], c);
    double upper = i + 1 < D.size() ? D[i + 1] : std::numeric_limits<double>::infinity();
    if (candidate <= upper) best = std::min(best, candidate);
  }
  return best;
}

}  // namespace motdual
