#include "motdual/gap_set.hpp"

#include <algorithm>
#include <cmath>

#include "motdual/errors.hpp"

namespace motdual {

namespace {

void check(int k, int N) {
  if (k < 1) throw DomainError("gap set index k must be at least 1");
  if (N < 1) throw DomainError("resolution N must be at least 1");
}

// Past this ratio the coarse family is denser than the doubles around x.
constexpr double kUnresolved = 0x1p52;

}  // namespace

double gap_quantum(int k, int N) {
  check(k, N);
  return std::ldexp(1.0 / N, -k);
}

double u_floor(int k, int N, double x) {
  check(k, N);
  if (!(x > 0.0)) throw DomainError("u_floor: x must be positive");
  const double q = gap_quantum(k, N);
  if (!(x / q < kUnresolved)) return std::nextafter(x, 0.0);
  if (x > q) {
    double i = std::ceil(x / q) - 1.0;
    while ((i + 1.0) * q < x) i += 1.0;
    while (i > 1.0 && i * q >= x) i -= 1.0;
    return i * q;
  }
  if (!(q / x < kUnresolved)) return std::nextafter(x, 0.0);
  double i = std::floor(q / x) + 1.0;
  while (q / i >= x) i += 1.0;
  while (i > 1.0 && q / (i - 1.0) < x) i -= 1.0;
  return q / i;
}

double u_ceil_strict(int k, int N, double x) {
  check(k, N);
  if (!(x > 0.0)) throw DomainError("u_ceil_strict: x must be positive");
  const double q = gap_quantum(k, N);
  if (!(x / q < kUnresolved)) return std::nextafter(x, INFINITY);
  if (x >= q) {
    double i = std::floor(x / q) + 1.0;
    while ((i - 1.0) * q > x && i > 1.0) i -= 1.0;
    while (i * q <= x) i += 1.0;
    return i * q;
  }
  if (!(q / x < kUnresolved)) return std::nextafter(x, INFINITY);
  double i = std::ceil(q / x) - 1.0;
  while (q / i <= x) i -= 1.0;
  while (q / (i + 1.0) > x) i += 1.0;
  return q / i;
}

bool in_gap_set(int k, int N, double x, double rel_tol) {
  if (k < 1 || N < 1 || !(x > 0.0)) return false;
  const double q = gap_quantum(k, N);
  double r = x / q;
  if (r >= 0.5 && std::abs(r - std::round(r)) <= rel_tol * r) return std::round(r) >= 1.0;
  double s = q / x;
  return std::round(s) >= 1.0 && std::abs(s - std::round(s)) <= rel_tol * s;
}

std::vector<double> gap_menu(int k, int N, int J) {
  check(k, N);
  if (J < 1) throw DomainError("gap menu size J must be at least 1");
  const double q = gap_quantum(k, N);
  std::vector<double> menu;
  for (int i = 1; i <= J; ++i) {
    menu.push_back(i * q);
    menu.push_back(q / i);
  }
  std::sort(menu.begin(), menu.end());
  menu.erase(std::unique(menu.begin(), menu.end()), menu.end());
  return menu;
}

}  // namespace motdual
