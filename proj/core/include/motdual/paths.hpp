#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace motdual {

struct Knot {
  double t;
  double value;
};

// Strictly positive continuous path on [0, T], linear between knots and
// normalized to start at 1. Immutable once constructed.
class SampledPath {
 public:
  // Throws DomainError unless: at least two knots, times strictly increasing
  // from 0, value 1 at time 0 (within 1e-12), every value > 0.
  explicit SampledPath(std::vector<Knot> knots);

  double horizon() const { return knots_.back().t; }
  std::span<const Knot> knots() const { return knots_; }
  double terminal() const { return knots_.back().value; }

  // Linear interpolation; t is clamped to [0, T].
  double value_at(double t) const;

 private:
  std::vector<Knot> knots_;
};

// Candidate element of D^(N): a step path on the 1/N lattice. Plain data;
// use validate_grid_path() to check membership.
struct GridPath {
  int N = 1;
  double T = 1.0;
  double initial = 1.0;
  std::vector<double> jump_times;
  std::vector<int> signs;

  std::size_t jump_count() const { return jump_times.size(); }
  // Lattice index (value * N) before the first jump; rounds `initial`.
  long initial_index() const;
  // Value on [t_k, t_{k+1}) for k = 0..jump_count().
  double value_after(std::size_t k) const;
  double terminal() const { return value_after(jump_count()); }
};

// Right-continuous step function on [0, T] whose value at the single point
// T may differ from the last step (the approximation S-hat uses this).
struct StepFunction {
  double T = 1.0;
  std::vector<double> times;   // times[0] == 0, strictly increasing, all < T
  std::vector<double> values;  // values[i] holds on [times[i], times[i+1])
  double terminal = 1.0;       // value at t == T
};

// Uniform view used for norms and claim evaluation: affine pieces covering
// [0, T), a terminal value at T, and an optional anchor level that takes part
// in running extrema only. A GridPath is anchored at the common start S_0 = 1
// of the continuous paths it approximates.
class PiecewisePath {
 public:
  struct Piece {
    double t0, t1;  // [t0, t1)
    double v0, v1;  // value at t0 and left limit at t1
  };

  PiecewisePath(const SampledPath& path);  // NOLINT(google-explicit-constructor)
  PiecewisePath(const StepFunction& step);  // NOLINT(google-explicit-constructor)
  PiecewisePath(const GridPath& grid);      // NOLINT(google-explicit-constructor)

  double horizon() const { return horizon_; }
  std::span<const Piece> pieces() const { return pieces_; }
  double terminal() const { return terminal_; }
  std::optional<double> anchor() const { return anchor_; }

 private:
  double horizon_ = 1.0;
  std::vector<Piece> pieces_;
  double terminal_ = 1.0;
  std::optional<double> anchor_;
};

// sup_{t in [0,T]} |a_t - b_t|, exact for piecewise-affine inputs.
// Throws DomainError when the horizons differ.
double sup_norm_distance(const PiecewisePath& a, const PiecewisePath& b);

// max_{0 <= u <= t} S_u; throws DomainError for t outside [0, T].
double running_max(const SampledPath& path, double t);

// Sup norm of a positive path, i.e. running_max(path, T).
double sup_norm(const SampledPath& path);

struct GridViolation {
  int condition;  // 1-4: conditions of D^(N) membership; 5: nonnegativity
  std::string detail;
};

struct GridValidation {
  std::vector<GridViolation> violations;
  bool ok() const { return violations.empty(); }
};

// Reports every violated membership condition; never throws.
GridValidation validate_grid_path(const GridPath& path);

enum class PathModel { GeometricBrownian, ArithmeticBrownianReflected, PiecewiseLinearCustom };

PathModel parse_path_model(std::string_view name);  // throws ConfigError
std::string_view to_string(PathModel model);

struct PathGeneratorConfig {
  PathModel model = PathModel::GeometricBrownian;
  double volatility = 0.2;
  int step_count = 64;
  std::uint64_t seed = 1;
  double horizon = 1.0;
};

// Lower bound enforced by reflection for models that could reach zero.
inline constexpr double kPositivityFloor = 1e-9;

// Path i is drawn from Rng(seed, i), so output is reproducible and any
// sub-range can be regenerated independently. Throws ConfigError for
// invalid configurations.
std::vector<SampledPath> generate_paths(const PathGeneratorConfig& cfg, std::size_t count);
SampledPath generate_path(const PathGeneratorConfig& cfg, std::size_t index);

}  // namespace motdual
