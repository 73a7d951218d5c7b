#include "motdual/discretize.hpp"

#include <algorithm>
#include <cmath>

#include "motdual/errors.hpp"

namespace motdual {

double CrossingDecomposition::value_at(int k) const {
  if (k >= crossings()) return terminal;
  return 1.0 + static_cast<double>(levels[k]) / N;
}

CrossingDecomposition crossing_times(const SampledPath& path, int N) {
  if (N < 1) throw DomainError("crossing_times: N must be at least 1");
  CrossingDecomposition dec;
  dec.N = N;
  dec.terminal = path.terminal();
  dec.taus.push_back(0.0);
  dec.levels.push_back(0);
  const double T = path.horizon();
  auto knots = path.knots();
  long level = 0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i) {
    const Knot& a = knots[i];
    const Knot& b = knots[i + 1];
    for (;;) {
      double up = 1.0 + static_cast<double>(level + 1) / N;
      double down = 1.0 + static_cast<double>(level - 1) / N;
      double target;
      int step;
      if (b.value > a.value && b.value >= up) {
        target = up;
        step = 1;
      } else if (b.value < a.value && b.value <= down) {
        target = down;
        step = -1;
      } else {
        break;
      }
      double t = a.t + (b.t - a.t) * ((target - a.value) / (b.value - a.value));
      if (t < dec.taus.back()) t = dec.taus.back();
      if (t >= T) {
        dec.taus.push_back(T);
        return dec;
      }
      dec.taus.push_back(t);
      level += step;
      dec.levels.push_back(level);
    }
  }
  dec.taus.push_back(T);
  return dec;
}

StepFunction hat_path(const CrossingDecomposition& dec) {
  StepFunction s;
  s.T = dec.taus.back();
  const int n = dec.crossings();
  for (int k = 0; k < n; ++k) {
    s.times.push_back(dec.taus[k]);
    s.values.push_back(dec.value_at(k));
  }
  double last = dec.value_at(n - 1);
  s.terminal = last + crossing_sign(dec.terminal - last) / static_cast<double>(dec.N);
  return s;
}

StepFunction hat_path(const SampledPath& path, int N) { return hat_path(crossing_times(path, N)); }

double snap_gap(int i, int N, double delta) {
  double gap = delta > 0.0 ? u_floor(i, N, delta) : 0.0;
  return std::max(gap, kMinSnappedGap);
}

SnappedGaps snap_gaps(const CrossingDecomposition& dec) {
  SnappedGaps out;
  const int n = dec.crossings();
  out.hat_taus.push_back(0.0);
  for (int i = 1; i < n; ++i) {
    double delta = dec.taus[i] - dec.taus[i - 1];
    double gap = snap_gap(i, dec.N, delta);
    if (!(delta > 0.0) || u_floor(i, dec.N, delta) < kMinSnappedGap) out.floored = true;
    out.gaps.push_back(gap);
    out.total_shortfall += delta - gap;
    out.hat_taus.push_back(out.hat_taus.back() + gap);
  }
  out.hat_taus.push_back(dec.taus.back());
  return out;
}

namespace {

GridPath build_F(const CrossingDecomposition& dec, const SnappedGaps& snapped) {
  GridPath f;
  f.N = dec.N;
  f.T = dec.taus.back();
  const int n = dec.crossings();
  const double step = 1.0 / dec.N;
  if (n == 1) {
    f.initial = 1.0 + crossing_sign(dec.terminal - 1.0) * step;
    return f;
  }
  f.initial = dec.value_at(1);
  for (int k = 1; k < n; ++k) {
    int sign = k + 1 < n ? static_cast<int>(dec.levels[k + 1] - dec.levels[k])
                         : crossing_sign(dec.terminal - dec.value_at(n - 1));
    f.jump_times.push_back(snapped.hat_taus[k]);
    f.signs.push_back(sign);
  }
  return f;
}

}  // namespace

GridPath embed_F(const SampledPath& path, int N) {
  CrossingDecomposition dec = crossing_times(path, N);
  return build_F(dec, snap_gaps(dec));
}

Embedding embed(const SampledPath& path, int N) {
  Embedding e;
  e.crossings = crossing_times(path, N);
  e.snapped = snap_gaps(e.crossings);
  e.grid = build_F(e.crossings, e.snapped);
  return e;
}

}  // namespace motdual
