#pragma once

#include <functional>
#include <string>
#include <string_view>
#include <vector>

#include "motdual/paths.hpp"

namespace motdual {

// Path statistics of the undiscounted price X_t = e^{rt} S_t. Running
// extrema include the path's anchor when it has one.
struct PathFeatures {
  double terminal = 0.0;
  double min = 0.0;
  double max = 0.0;
  double average = 0.0;  // (1/T) * integral of X over [0, T]
};

PathFeatures path_features(const PiecewisePath& path, double rate = 0.0);

enum class ClaimKind {
  VanillaCall,       // e^{-rT} (X_T - K)^+
  LookbackMax,       // e^{-rT} max X
  AsianAverage,      // e^{-rT} (1/T) int X dt
  LookbackPutOnMax,  // e^{-rT} (K - max X)^+
  AlphaK,            // ||S|| 1{||S|| >= K} + ||S|| / K
  Composite,         // e^{-rT} H(X_T, min X, max X, avg X)
};

std::string_view to_string(ClaimKind kind);

// Path-dependent European claim with its sup-norm Lipschitz constant.
class Claim {
 public:
  using CompositeFn = std::function<double(const PathFeatures&)>;

  ClaimKind kind() const { return kind_; }
  double strike() const { return strike_; }
  double rate() const { return rate_; }
  double lipschitz() const { return lipschitz_; }
  // False only for the alpha claim, which jumps at ||S|| = K.
  bool lipschitz_in_sup_norm() const { return kind_ != ClaimKind::AlphaK; }
  std::string describe() const;

  double operator()(const PiecewisePath& path) const;

  static Claim vanilla_call(double strike, double rate = 0.0);
  static Claim lookback_max(double rate = 0.0);
  // Lipschitz constant max(1, 1/T) so both Lipschitz clauses hold for T < 1.
  static Claim asian_average(double horizon = 1.0, double rate = 0.0);
  static Claim lookback_put_on_max(double strike, double rate = 0.0);
  // `h_lipschitz` is the constant of H with respect to the max-norm on its
  // four arguments, each of which is 1-Lipschitz in the path.
  static Claim composite(CompositeFn h, double h_lipschitz, double rate = 0.0,
                         std::string label = "composite");

  friend Claim alpha_claim(double K);
  friend Claim truncate_above(const Claim& claim, double cap);
  friend Claim floor_below(const Claim& claim, double c);

 private:
  struct Clamp {
    bool upper;  // true: min(value, level); false: max(value, level)
    double level;
  };

  Claim(ClaimKind kind, double strike, double rate, double lipschitz);

  double raw_value(const PiecewisePath& path) const;

  ClaimKind kind_;
  double strike_ = 0.0;
  double rate_ = 0.0;
  double lipschitz_ = 1.0;
  CompositeFn composite_;
  std::string label_;
  std::vector<Clamp> clamps_;
};

// alpha_K(S) = ||S|| 1{||S|| >= K} + ||S|| / K. Throws DomainError for K <= 1.
Claim alpha_claim(double K);

// G ^ cap and G v (-c); both keep the Lipschitz constant.
Claim truncate_above(const Claim& claim, double cap);
Claim floor_below(const Claim& claim, double c);

double eval_claim(const Claim& claim, const PiecewisePath& path);

struct DiscrepancyCheck {
  double lhs = 0.0;  // |G(S) - G(F^(N)(S))|
  double rhs = 0.0;  // 4 L ||S|| / N
  bool ok = false;
};

inline constexpr double kDiscrepancySlack = 1e-12;

// Throws DomainError for claims that are not sup-norm Lipschitz.
DiscrepancyCheck discrepancy_bound_check(const Claim& claim, const SampledPath& path, int N);

}  // namespace motdual
