#include "motdual/payoffs.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "motdual/discretize.hpp"
#include "motdual/errors.hpp"

namespace motdual {

namespace {

// Integral of e^{rt} (a + b (t - t0)) over [t0, t0 + h].
double exp_affine_integral(double r, double t0, double h, double a, double b) {
  if (r == 0.0) return h * (a + 0.5 * b * h);
  double em1 = std::expm1(r * h);
  return std::exp(r * t0) * (a * em1 / r + b * (h * (em1 + 1.0) / r - em1 / (r * r)));
}

}  // namespace

PathFeatures path_features(const PiecewisePath& path, double rate) {
  PathFeatures f;
  const double T = path.horizon();
  f.terminal = std::exp(rate * T) * path.terminal();
  f.min = f.max = f.terminal;
  if (auto anchor = path.anchor()) {
    f.min = std::min(f.min, *anchor);
    f.max = std::max(f.max, *anchor);
  }
  double integral = 0.0;
  for (const auto& p : path.pieces()) {
    double h = p.t1 - p.t0;
    double b = h > 0.0 ? (p.v1 - p.v0) / h : 0.0;
    double x0 = std::exp(rate * p.t0) * p.v0;
    double x1 = std::exp(rate * p.t1) * p.v1;
    f.min = std::min({f.min, x0, x1});
    f.max = std::max({f.max, x0, x1});
    if (rate > 0.0 && b != 0.0) {
      double ts = p.t0 - p.v0 / b - 1.0 / rate;
      if (ts > p.t0 && ts < p.t1) {
        double xs = std::exp(rate * ts) * (p.v0 + b * (ts - p.t0));
        f.min = std::min(f.min, xs);
        f.max = std::max(f.max, xs);
      }
    }
    integral += exp_affine_integral(rate, p.t0, h, p.v0, b);
  }
  f.average = integral / T;
  return f;
}

std::string_view to_string(ClaimKind kind) {
  switch (kind) {
    case ClaimKind::VanillaCall: return "vanilla-call";
    case ClaimKind::LookbackMax: return "lookback-max";
    case ClaimKind::AsianAverage: return "asian-average";
    case ClaimKind::LookbackPutOnMax: return "lookback-put-on-max";
    case ClaimKind::AlphaK: return "alpha";
    case ClaimKind::Composite: return "composite";
  }
  return "?";
}

Claim::Claim(ClaimKind kind, double strike, double rate, double lipschitz)
    : kind_(kind), strike_(strike), rate_(rate), lipschitz_(lipschitz) {
  if (!(rate >= 0.0) || !std::isfinite(rate)) throw DomainError("claim: rate must be >= 0");
}

Claim Claim::vanilla_call(double strike, double rate) {
  return Claim(ClaimKind::VanillaCall, strike, rate, 1.0);
}

Claim Claim::lookback_max(double rate) { return Claim(ClaimKind::LookbackMax, 0.0, rate, 1.0); }

Claim Claim::asian_average(double horizon, double rate) {
  if (!(horizon > 0.0)) throw DomainError("asian claim: horizon must be positive");
  return Claim(ClaimKind::AsianAverage, 0.0, rate, std::max(1.0, 1.0 / horizon));
}

Claim Claim::lookback_put_on_max(double strike, double rate) {
  return Claim(ClaimKind::LookbackPutOnMax, strike, rate, 1.0);
}

Claim Claim::composite(CompositeFn h, double h_lipschitz, double rate, std::string label) {
  if (!h) throw ConfigError("composite claim: empty function");
  if (!(h_lipschitz > 0.0)) throw DomainError("composite claim: Lipschitz constant must be positive");
  Claim c(ClaimKind::Composite, 0.0, rate, h_lipschitz);
  c.composite_ = std::move(h);
  c.label_ = std::move(label);
  return c;
}

Claim alpha_claim(double K) {
  if (!(K > 1.0)) throw DomainError("alpha claim: K must exceed 1");
  return Claim(ClaimKind::AlphaK, K, 0.0, 1.0 + 1.0 / K);
}

Claim truncate_above(const Claim& claim, double cap) {
  Claim c = claim;
  c.clamps_.push_back({true, cap});
  return c;
}

Claim floor_below(const Claim& claim, double c) {
  Claim out = claim;
  out.clamps_.push_back({false, -c});
  return out;
}

std::string Claim::describe() const {
  std::ostringstream os;
  os << (kind_ == ClaimKind::Composite ? label_ : std::string(to_string(kind_)));
  if (kind_ == ClaimKind::VanillaCall || kind_ == ClaimKind::LookbackPutOnMax ||
      kind_ == ClaimKind::AlphaK)
    os << "(K=" << strike_ << ")";
  if (rate_ != 0.0) os << " r=" << rate_;
  for (const Clamp& c : clamps_) os << (c.upper ? " ^ " : " v ") << c.level;
  return os.str();
}

double Claim::raw_value(const PiecewisePath& path) const {
  const double disc = std::exp(-rate_ * path.horizon());
  PathFeatures f = path_features(path, rate_);
  switch (kind_) {
    case ClaimKind::VanillaCall: return disc * std::max(f.terminal - strike_, 0.0);
    case ClaimKind::LookbackMax: return disc * f.max;
    case ClaimKind::AsianAverage: return disc * f.average;
    case ClaimKind::LookbackPutOnMax: return disc * std::max(strike_ - f.max, 0.0);
    case ClaimKind::AlphaK: {
      double norm = f.max;
      return (norm >= strike_ ? norm : 0.0) + norm / strike_;
    }
    case ClaimKind::Composite: return disc * composite_(f);
  }
  throw ConfigError("unsupported claim kind");
}

double Claim::operator()(const PiecewisePath& path) const {
  double v = raw_value(path);
  for (const Clamp& c : clamps_) v = c.upper ? std::min(v, c.level) : std::max(v, c.level);
  return v;
}

double eval_claim(const Claim& claim, const PiecewisePath& path) { return claim(path); }

DiscrepancyCheck discrepancy_bound_check(const Claim& claim, const SampledPath& path, int N) {
  if (!claim.lipschitz_in_sup_norm())
    throw DomainError("discrepancy check needs a sup-norm Lipschitz claim, got " + claim.describe());
  DiscrepancyCheck out;
  GridPath f = embed_F(path, N);
  out.lhs = std::abs(claim(path) - claim(f));
  out.rhs = 4.0 * claim.lipschitz() * sup_norm(path) / N;
  out.ok = out.lhs <= out.rhs + kDiscrepancySlack;
  return out;
}

}  // namespace motdual
