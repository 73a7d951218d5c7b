#include <algorithm>
#include <cmath>
#include <map>
#include <memory>

#include <gtest/gtest.h>

#include "motdual/errors.hpp"
#include "motdual/marginals.hpp"
#include "motdual/rng.hpp"

using namespace motdual;

namespace {

Marginal random_atomic(Rng& rng, int n, double spread = 2.0) {
  std::vector<Atom> atoms;
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    atoms.push_back({spread * rng.uniform(), 0.05 + rng.uniform()});
    total += atoms.back().weight;
  }
  for (Atom& a : atoms) a.weight /= total;
  // Renormalize again so the sum is 1 to rounding.
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < atoms.size(); ++i) s += atoms[i].weight;
  atoms.back().weight = 1.0 - s;
  return Marginal::atomic(std::move(atoms));
}

Marginal random_density(Rng& rng, int pieces) {
  std::vector<DensityKnot> knots;
  double x = 0.2 * rng.uniform();
  for (int i = 0; i <= pieces; ++i) {
    knots.push_back({x, i == 0 || i == pieces ? 0.0 : rng.uniform()});
    x += 0.1 + 0.6 * rng.uniform();
  }
  double integral = 0.0;
  for (std::size_t i = 0; i + 1 < knots.size(); ++i)
    integral += 0.5 * (knots[i].density + knots[i + 1].density) * (knots[i + 1].x - knots[i].x);
  for (auto& k : knots) k.density /= integral;
  return Marginal::density(std::move(knots));
}

// Hat-function weights by composite Simpson on a fine uniform grid.
std::map<long, double> quadrature_projection(const Marginal& mu, int N) {
  auto knots = mu.knots();
  double a = knots.front().x, b = knots.back().x;
  auto dens = [&](double x) {
    for (std::size_t i = 0; i + 1 < knots.size(); ++i)
      if (x >= knots[i].x && x <= knots[i + 1].x) {
        double w = (x - knots[i].x) / (knots[i + 1].x - knots[i].x);
        return (1 - w) * knots[i].density + w * knots[i + 1].density;
      }
    return 0.0;
  };
  std::map<long, double> out;
  const int n = 400000;
  const double h = (b - a) / n;
  for (long k = static_cast<long>(std::floor(a * N)); k <= static_cast<long>(std::ceil(b * N)); ++k) {
    double s = 0.0;
    for (int i = 0; i <= n; ++i) {
      double x = a + i * h;
      double hat = std::max(0.0, 1.0 - std::abs(N * x - k));
      s += hat * dens(x) * (i == 0 || i == n ? 1.0 : (i % 2 ? 4.0 : 2.0));
    }
    out[k] = s * h / 3.0;
  }
  return out;
}

// Prokhorov distance by bisection on delta with every subset checked.
double brute_prokhorov(const Marginal& a, const Marginal& b) {
  auto one_way = [](std::span<const Atom> p, std::span<const Atom> q, double d) {
    for (unsigned mask = 1; mask < (1u << p.size()); ++mask) {
      double pa = 0.0, qa = 0.0;
      for (std::size_t i = 0; i < p.size(); ++i)
        if (mask >> i & 1u) pa += p[i].weight;
      for (const Atom& y : q) {
        bool near = false;
        for (std::size_t i = 0; i < p.size(); ++i)
          if ((mask >> i & 1u) && std::abs(p[i].x - y.x) < d) near = true;
        if (near) qa += y.weight;
      }
      if (pa > qa + d + 1e-15) return false;
    }
    return true;
  };
  auto feasible = [&](double d) {
    return one_way(a.atoms(), b.atoms(), d) && one_way(b.atoms(), a.atoms(), d);
  };
  double lo = 0.0, hi = 1.0;
  if (feasible(0.0)) return 0.0;
  for (int it = 0; it < 80; ++it) {
    double mid = 0.5 * (lo + hi);
    (feasible(mid) ? hi : lo) = mid;
  }
  return hi;
}

GridFunction random_h(Rng& rng) {
  auto values = std::make_shared<std::map<long, double>>();
  for (long k = -2; k < 200; ++k) (*values)[k] = 4.0 * rng.uniform() - 2.0;
  return [values](long k) { return values->at(k); };
}

}  // namespace

TEST(Marginal, Validation) {
  EXPECT_THROW(Marginal::atomic({{-0.1, 1.0}}), DomainError);
  EXPECT_THROW(Marginal::atomic({{1.0, 0.5}}), DomainError);
  EXPECT_THROW(Marginal::atomic({{1.0, 0.0}, {2.0, 1.0}}), DomainError);
  EXPECT_THROW(Marginal::density({{1.0, 1.0}, {0.0, 1.0}}), DomainError);
  EXPECT_THROW(Marginal::density({{0.0, 0.5}, {1.0, 0.5}}), DomainError);
  EXPECT_THROW(Marginal::density({{0.0, -0.5}, {1.0, 2.5}}), DomainError);
  Marginal m = Marginal::atomic({{1.5, 0.25}, {0.5, 0.5}, {1.5, 0.25}});
  ASSERT_EQ(m.atoms().size(), 2u);
  EXPECT_DOUBLE_EQ(m.atoms()[0].x, 0.5);
  EXPECT_DOUBLE_EQ(m.atoms()[1].weight, 0.5);
}

TEST(Marginal, MomentsAndCalls) {
  Marginal two = Marginal::atomic({{0.5, 0.5}, {1.5, 0.5}});
  EXPECT_DOUBLE_EQ(two.mean(), 1.0);
  EXPECT_DOUBLE_EQ(two.moment(2.0), 1.25);
  EXPECT_DOUBLE_EQ(two.call_price(1.0), 0.25);
  Marginal uni = Marginal::density({{0.0, 0.5}, {2.0, 0.5}});
  EXPECT_NEAR(uni.mean(), 1.0, 1e-15);
  EXPECT_NEAR(uni.moment(2.0), 4.0 / 3.0, 1e-14);
  EXPECT_NEAR(uni.call_price(1.0), 0.25, 1e-15);
  EXPECT_TRUE(check_marginal(two).ok);
  EXPECT_FALSE(check_marginal(Marginal::atomic({{1.1, 1.0}})).ok);
}

TEST(Projection, Examples) {
  auto d = project_marginal(Marginal::atomic({{1.0, 1.0}}), 3);
  EXPECT_EQ(d.weights, (std::map<long, double>{{3, 1.0}}));
  auto two = project_marginal(Marginal::atomic({{0.5, 0.5}, {1.5, 0.5}}), 1);
  EXPECT_EQ(two.weights, (std::map<long, double>{{0, 0.25}, {1, 0.5}, {2, 0.25}}));
  auto uni = project_marginal(Marginal::density({{0.0, 0.5}, {2.0, 0.5}}), 1);
  ASSERT_EQ(uni.weights.size(), 3u);
  EXPECT_NEAR(uni.weight(0), 0.25, 1e-15);
  EXPECT_NEAR(uni.weight(1), 0.5, 1e-15);
  EXPECT_NEAR(uni.weight(2), 0.25, 1e-15);
}

TEST(Projection, DensityMatchesQuadrature) {
  Rng rng(31);
  for (int trial = 0; trial < 6; ++trial) {
    Marginal mu = random_density(rng, 2 + trial % 3);
    int N = 1 + trial;
    auto g = project_marginal(mu, N);
    for (const auto& [k, w] : quadrature_projection(mu, N)) EXPECT_NEAR(g.weight(k), w, 1e-9) << k;
  }
}

TEST(Projection, PreservesMassAndMean) {
  Rng rng(32);
  for (int trial = 0; trial < 100; ++trial) {
    Marginal mu = trial % 2 ? random_atomic(rng, 1 + trial % 7) : random_density(rng, 2 + trial % 4);
    int N = 1 << (trial % 5);
    auto g = project_marginal(mu, N);
    EXPECT_NEAR(g.mass(), mu.mass(), 1e-12);
    EXPECT_NEAR(g.mean(), mu.mean(), 1e-12);
    for (const auto& [k, w] : g.weights) EXPECT_GE(w, 0.0);
  }
}

TEST(Projection, CallPricesDominate) {
  // Hat projection is a convex-order increase, so call prices cannot drop.
  Rng rng(33);
  for (int trial = 0; trial < 50; ++trial) {
    Marginal mu = random_atomic(rng, 4);
    auto g = project_marginal(mu, 2);
    for (double K : {0.25, 0.6, 1.0, 1.37})
      EXPECT_GE(g.call_price(K), mu.call_price(K) - 1e-15);
  }
}

TEST(LiftStatic, Interpolates) {
  GridFunction h = [](long k) { return static_cast<double>(k * k); };
  EXPECT_DOUBLE_EQ(lift_static_at(h, 2, 0.75), 2.5);
  EXPECT_DOUBLE_EQ(lift_static_at(h, 2, 1.0), 4.0);
  EXPECT_DOUBLE_EQ(lift_static_at(h, 2, 0.0), 0.0);
  EXPECT_THROW(lift_static_at(h, 2, -0.1), DomainError);
  auto g = lift_static(h, 4);
  EXPECT_DOUBLE_EQ(g(0.125), 0.5);
}

TEST(Pairing, IdentityHoldsForRandomPairs) {
  Rng rng(34);
  for (int trial = 0; trial < 100; ++trial) {
    Marginal mu = trial % 3 ? random_atomic(rng, 1 + trial % 9) : random_density(rng, 2 + trial % 4);
    int N = 1 + trial % 8;
    auto c = pairing_identity_check(random_h(rng), mu, N);
    EXPECT_TRUE(c.ok) << c.lhs << " vs " << c.rhs;
    EXPECT_NEAR(c.lhs, c.rhs, 1e-12 * (1.0 + std::abs(c.lhs)));
  }
}

TEST(Prokhorov, Examples) {
  auto d0 = Marginal::atomic({{0.0, 1.0}});
  EXPECT_DOUBLE_EQ(prokhorov_distance(d0, d0), 0.0);
  EXPECT_DOUBLE_EQ(prokhorov_distance(d0, Marginal::atomic({{0.3, 1.0}})), 0.3);
  EXPECT_DOUBLE_EQ(prokhorov_distance(d0, Marginal::atomic({{2.0, 1.0}})), 1.0);
  EXPECT_DOUBLE_EQ(prokhorov_distance(d0, Marginal::atomic({{0.0, 0.5}, {1.0, 0.5}})), 0.5);
  EXPECT_THROW(prokhorov_distance(d0, Marginal::density({{0.0, 0.5}, {2.0, 0.5}})), UnsupportedError);
}

TEST(Prokhorov, MatchesSubsetBisection) {
  Rng rng(35);
  for (int trial = 0; trial < 80; ++trial) {
    Marginal a = random_atomic(rng, 1 + trial % 6, 1.0), b = random_atomic(rng, 1 + (trial / 6) % 6, 1.0);
    double d = prokhorov_distance(a, b);
    EXPECT_NEAR(d, brute_prokhorov(a, b), 1e-12);
    EXPECT_DOUBLE_EQ(d, prokhorov_distance(b, a));
  }
}

TEST(Prokhorov, ProjectionIsWithinOneStep) {
  Rng rng(36);
  for (int trial = 0; trial < 60; ++trial) {
    Marginal mu = random_atomic(rng, 1 + trial % 8);
    for (int N : {1, 2, 4, 16, 64})
      EXPECT_LE(prokhorov_distance(project_marginal(mu, N).as_marginal(), mu), 1.0 / N + 1e-15);
  }
}
