#pragma once

#include <vector>

#include "motdual/gap_set.hpp"
#include "motdual/paths.hpp"

namespace motdual {

// Crossing times of a path at resolution N.
//
// taus[0] = 0 and taus[k] is the first time after taus[k-1] at which the path
// has moved by exactly 1/N from its value there, capped at T. The lattice
// levels hit at taus[1..H-1] are kept as integers (value = 1 + level / N), so
// successive crossing values differ by exactly one lattice step.
struct CrossingDecomposition {
  int N = 1;
  std::vector<double> taus;  // size H + 1, taus.back() == T
  std::vector<long> levels;  // size H, levels[0] == 0
  double terminal = 1.0;     // S_T

  int crossings() const { return static_cast<int>(taus.size()) - 1; }  // H
  // S evaluated at taus[k]; k == H gives S_T.
  double value_at(int k) const;
};

CrossingDecomposition crossing_times(const SampledPath& path, int N);

// sign(x) with sign(0) := +1, as used by S-hat and F^(N).
inline int crossing_sign(double x) { return x < 0.0 ? -1 : 1; }

// Piecewise-constant approximation S-hat: S_{tau_k} on [tau_k, tau_{k+1}) and
// S_{tau_{n-1}} + sign(S_T - S_{tau_{n-1}})/N at T.
StepFunction hat_path(const SampledPath& path, int N);
StepFunction hat_path(const CrossingDecomposition& dec);

// Jump times moved onto the gap sets: gaps[i-1] = u_floor(i, N, tau_i - tau_{i-1})
// for i < n; hat_taus = (0, partial sums..., T).
struct SnappedGaps {
  std::vector<double> hat_taus;
  std::vector<double> gaps;
  // Sum over i < n of (tau_i - tau_{i-1}) - gaps[i-1]; bounded by 1/N.
  double total_shortfall = 0.0;
  // Some gap fell below kMinSnappedGap and was raised to it.
  bool floored = false;
};

// Smallest snapped gap representable without entering the subnormal regime.
inline constexpr double kMinSnappedGap = 0x1p-52;

SnappedGaps snap_gaps(const CrossingDecomposition& dec);

// One snapped gap: u_floor(i, N, delta), raised to kMinSnappedGap if smaller.
double snap_gap(int i, int N, double delta);

// F^(N)(S): the element of D^(N) whose k-th jump reproduces the (k+1)-th
// crossing move of S at the snapped time hat_tau_k. Not adapted to the
// filtration of S (it looks one crossing ahead); only suitable for lifting
// adapted maps from D^(N) back to continuous paths.
GridPath embed_F(const SampledPath& path, int N);

struct Embedding {
  CrossingDecomposition crossings;
  SnappedGaps snapped;
  GridPath grid;
};

Embedding embed(const SampledPath& path, int N);

}  // namespace motdual
