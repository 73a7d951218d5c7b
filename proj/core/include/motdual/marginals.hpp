#pragma once

#include <functional>
#include <map>
#include <span>
#include <vector>

namespace motdual {

struct Atom {
  double x;
  double weight;
};

struct DensityKnot {
  double x;
  double density;
};

// Terminal law on [0, inf): finitely many atoms, or a continuous
// piecewise-linear density on [x_0, x_last] (zero outside).
class Marginal {
 public:
  // Merges atoms at equal x and sorts. Throws DomainError for negative x,
  // nonpositive weights, or total mass off 1 by more than 1e-12.
  static Marginal atomic(std::vector<Atom> atoms);
  // Throws DomainError for unsorted knots, negative x or density, or an
  // integral off 1 by more than 1e-12.
  static Marginal density(std::vector<DensityKnot> knots);

  bool is_atomic() const { return !atoms_.empty(); }
  std::span<const Atom> atoms() const { return atoms_; }
  std::span<const DensityKnot> knots() const { return knots_; }

  double mass() const;
  double mean() const;
  double moment(double p) const;  // int x^p dmu, exact for atoms, Simpson per piece otherwise
  // Call price C(K) = int (x - K)^+ dmu.
  double call_price(double strike) const;
  // int f dmu; exact when f is piecewise linear with kinks in `breakpoints`
  // (density case; integrates each piece between breakpoints with Simpson).
  double integrate(const std::function<double(double)>& f,
                   std::span<const double> breakpoints = {}) const;
  double support_max() const;

 private:
  std::vector<Atom> atoms_;
  std::vector<DensityKnot> knots_;
};

struct MarginalCheck {
  double mass = 0.0;
  double mean = 0.0;
  double p_moment = 0.0;
  bool ok = false;
};

// Mass 1, mean 1 within `mean_tol`, finite p-th moment (p > 1).
MarginalCheck check_marginal(const Marginal& mu, double p = 2.0, double mean_tol = 1e-9);

// Finitely supported law on the grid {k / N : k >= 0}.
struct GridMarginal {
  int N = 1;
  std::map<long, double> weights;  // k -> mass at k / N

  double mass() const;
  double mean() const;
  double weight(long k) const;
  double call_price(double strike) const;
  Marginal as_marginal() const;  // atoms at k / N, zero weights dropped
};

GridMarginal project_marginal(const Marginal& mu, int N);

// Grid function h(k / N), indexed by k.
using GridFunction = std::function<double(long)>;

// Linear interpolation g(x) = (1 + [Nx] - Nx) h([Nx]) + (Nx - [Nx]) h([Nx] + 1).
double lift_static_at(const GridFunction& h, int N, double x);
std::function<double(double)> lift_static(GridFunction h, int N);

struct PairingCheck {
  double lhs = 0.0;  // int h dmu^(N)
  double rhs = 0.0;  // int L(h) dmu
  bool ok = false;
};

inline constexpr double kPairingTolerance = 1e-12;

PairingCheck pairing_identity_check(const GridFunction& h, const Marginal& mu, int N);

// Prokhorov distance between atomic laws, exact. Throws UnsupportedError
// for density inputs.
double prokhorov_distance(const Marginal& a, const Marginal& b);

}  // namespace motdual
