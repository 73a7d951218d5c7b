#include "motdual/paths.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "motdual/errors.hpp"
#include "motdual/gap_set.hpp"
#include "motdual/rng.hpp"

namespace motdual {

SampledPath::SampledPath(std::vector<Knot> knots) : knots_(std::move(knots)) {
  if (knots_.size() < 2) throw DomainError("SampledPath: at least two knots required");
  if (knots_.front().t != 0.0) throw DomainError("SampledPath: first knot must be at t = 0");
  if (std::abs(knots_.front().value - 1.0) > 1e-12)
    throw DomainError("SampledPath: value at t = 0 must be 1");
  for (std::size_t i = 0; i < knots_.size(); ++i) {
    const Knot& k = knots_[i];
    if (!std::isfinite(k.t) || !std::isfinite(k.value))
      throw DomainError("SampledPath: non-finite knot");
    if (!(k.value > 0.0)) {
      std::ostringstream os;
      os << "SampledPath: value " << k.value << " at t = " << k.t << " is not positive";
      throw DomainError(os.str());
    }
    if (i > 0 && !(k.t > knots_[i - 1].t))
      throw DomainError("SampledPath: knot times must be strictly increasing");
  }
}

double SampledPath::value_at(double t) const {
  if (t <= 0.0) return knots_.front().value;
  if (t >= horizon()) return knots_.back().value;
  auto it = std::upper_bound(knots_.begin(), knots_.end(), t,
                             [](double s, const Knot& k) { return s < k.t; });
  const Knot& b = *it;
  const Knot& a = *(it - 1);
  return a.value + (b.value - a.value) * (t - a.t) / (b.t - a.t);
}

long GridPath::initial_index() const { return std::lround(initial * N); }

double GridPath::value_after(std::size_t k) const {
  long level = initial_index();
  for (std::size_t i = 0; i < k && i < signs.size(); ++i) level += signs[i];
  return static_cast<double>(level) / N;
}

PiecewisePath::PiecewisePath(const SampledPath& path)
    : horizon_(path.horizon()), terminal_(path.terminal()) {
  auto knots = path.knots();
  pieces_.reserve(knots.size() - 1);
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    pieces_.push_back({knots[i].t, knots[i + 1].t, knots[i].value, knots[i + 1].value});
  }
}

PiecewisePath::PiecewisePath(const StepFunction& step) : horizon_(step.T), terminal_(step.terminal) {
  for (std::size_t i = 0; i < step.times.size(); ++i) {
    double t1 = i + 1 < step.times.size() ? step.times[i + 1] : step.T;
    if (t1 > step.times[i]) pieces_.push_back({step.times[i], t1, step.values[i], step.values[i]});
  }
}

PiecewisePath::PiecewisePath(const GridPath& grid)
    : horizon_(grid.T), terminal_(grid.terminal()), anchor_(1.0) {
  double t0 = 0.0;
  for (std::size_t k = 0; k <= grid.jump_count(); ++k) {
    double t1 = k < grid.jump_count() ? grid.jump_times[k] : grid.T;
    double v = grid.value_after(k);
    if (t1 > t0) pieces_.push_back({t0, t1, v, v});
    t0 = std::max(t0, t1);
  }
}

namespace {

const PiecewisePath::Piece& piece_at(std::span<const PiecewisePath::Piece> pieces, double t) {
  auto it = std::upper_bound(pieces.begin(), pieces.end(), t,
                             [](double s, const PiecewisePath::Piece& p) { return s < p.t0; });
  if (it != pieces.begin()) --it;
  return *it;
}

double affine(const PiecewisePath::Piece& p, double t) {
  if (p.v0 == p.v1) return p.v0;
  return p.v0 + (p.v1 - p.v0) * (t - p.t0) / (p.t1 - p.t0);
}

}  // namespace

double sup_norm_distance(const PiecewisePath& a, const PiecewisePath& b) {
  if (std::abs(a.horizon() - b.horizon()) > 1e-12 * std::max(1.0, a.horizon()))
    throw DomainError("sup_norm_distance: paths have different horizons");
  std::vector<double> cuts;
  for (const auto& p : a.pieces()) cuts.push_back(p.t0);
  for (const auto& p : b.pieces()) cuts.push_back(p.t0);
  cuts.push_back(a.horizon());
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());

  double best = std::abs(a.terminal() - b.terminal());
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    double s0 = cuts[i], s1 = cuts[i + 1];
    double mid = 0.5 * (s0 + s1);
    const auto& pa = piece_at(a.pieces(), mid);
    const auto& pb = piece_at(b.pieces(), mid);
    best = std::max(best, std::abs(affine(pa, s0) - affine(pb, s0)));
    best = std::max(best, std::abs(affine(pa, s1) - affine(pb, s1)));
  }
  return best;
}

double running_max(const SampledPath& path, double t) {
  if (!(t >= 0.0 && t <= path.horizon())) throw DomainError("running_max: t outside [0, T]");
  double best = path.value_at(t);
  for (const Knot& k : path.knots()) {
    if (k.t > t) break;
    best = std::max(best, k.value);
  }
  return best;
}

double sup_norm(const SampledPath& path) { return running_max(path, path.horizon()); }

GridValidation validate_grid_path(const GridPath& f) {
  GridValidation report;
  auto add = [&](int condition, std::string detail) {
    report.violations.push_back({condition, std::move(detail)});
  };
  if (f.N < 1) {
    add(1, "N must be a positive integer");
    return report;
  }
  double scaled = f.initial * f.N;
  if (std::abs(scaled - (f.N + 1)) > 1e-9 && std::abs(scaled - (f.N - 1)) > 1e-9) {
    std::ostringstream os;
    os << "initial value " << f.initial << " is not 1 +- 1/N";
    add(1, os.str());
  }
  if (f.jump_times.size() != f.signs.size()) add(3, "jump times and signs differ in length");
  double prev = 0.0;
  for (std::size_t k = 0; k < f.jump_times.size(); ++k) {
    double t = f.jump_times[k];
    std::ostringstream os;
    if (!(t > prev)) {
      os << "jump " << k + 1 << " at t = " << t << " does not follow the previous jump";
      add(2, os.str());
    } else if (!(t < f.T)) {
      os << "jump " << k + 1 << " at t = " << t << " is not before T";
      add(2, os.str());
    } else if (!in_gap_set(static_cast<int>(k) + 1, f.N, t - prev)) {
      os << "gap " << k + 1 << " = " << t - prev << " is not in U_" << k + 1;
      add(4, os.str());
    }
    prev = std::max(prev, t);
  }
  long level = f.initial_index();
  if (level < 0) add(5, "negative initial value");
  for (std::size_t k = 0; k < f.signs.size(); ++k) {
    if (f.signs[k] != 1 && f.signs[k] != -1) {
      std::ostringstream os;
      os << "jump " << k + 1 << " has size " << f.signs[k] << "/N";
      add(3, os.str());
    }
    level += f.signs[k];
    if (level < 0) {
      std::ostringstream os;
      os << "value after jump " << k + 1 << " is negative";
      add(5, os.str());
    }
  }
  return report;
}

PathModel parse_path_model(std::string_view name) {
  if (name == "geometric-brownian" || name == "gbm") return PathModel::GeometricBrownian;
  if (name == "arithmetic-brownian-reflected" || name == "abm")
    return PathModel::ArithmeticBrownianReflected;
  if (name == "piecewise-linear-custom" || name == "custom") return PathModel::PiecewiseLinearCustom;
  throw ConfigError("unknown path model '" + std::string(name) + "'");
}

std::string_view to_string(PathModel model) {
  switch (model) {
    case PathModel::GeometricBrownian: return "geometric-brownian";
    case PathModel::ArithmeticBrownianReflected: return "arithmetic-brownian-reflected";
    case PathModel::PiecewiseLinearCustom: return "piecewise-linear-custom";
  }
  return "?";
}

namespace {

void check_config(const PathGeneratorConfig& cfg) {
  if (cfg.step_count < 2) throw ConfigError("path generator: step_count must be at least 2");
  if (!(cfg.volatility >= 0.0) || !std::isfinite(cfg.volatility))
    throw ConfigError("path generator: volatility must be a finite nonnegative number");
  if (!(cfg.horizon > 0.0) || !std::isfinite(cfg.horizon))
    throw ConfigError("path generator: horizon must be positive");
}

double reflect(double x) {
  if (x < kPositivityFloor) x = 2.0 * kPositivityFloor - x;
  return std::max(x, kPositivityFloor);
}

}  // namespace

SampledPath generate_path(const PathGeneratorConfig& cfg, std::size_t index) {
  check_config(cfg);
  Rng rng(cfg.seed, index);
  const int n = cfg.step_count;
  const double dt = cfg.horizon / n;
  const double sigma = cfg.volatility;
  const double sd = sigma * std::sqrt(dt);
  std::vector<Knot> knots;
  knots.reserve(n + 1);
  knots.push_back({0.0, 1.0});
  double s = 1.0;
  for (int i = 1; i <= n; ++i) {
    switch (cfg.model) {
      case PathModel::GeometricBrownian:
        s *= std::exp(-0.5 * sigma * sigma * dt + sd * rng.normal());
        break;
      case PathModel::ArithmeticBrownianReflected:
        s = reflect(s + sd * rng.normal());
        break;
      case PathModel::PiecewiseLinearCustom:
        // Uniform increments with the same variance as the Brownian step.
        s = reflect(s + sd * std::sqrt(3.0) * (2.0 * rng.uniform() - 1.0));
        break;
    }
    double t = i == n ? cfg.horizon : dt * i;
    knots.push_back({t, s});
  }
  return SampledPath(std::move(knots));
}

std::vector<SampledPath> generate_paths(const PathGeneratorConfig& cfg, std::size_t count) {
  check_config(cfg);
  std::vector<SampledPath> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) out.push_back(generate_path(cfg, i));
  return out;
}

}  // namespace motdual
