#pragma once

#include <vector>

namespace motdual {

// The admissible k-th inter-jump gaps for resolution N:
//   U_k = { i q : i >= 1 } u { q / i : i >= 1 },   q = 1 / (2^k N).
// The coarse family is spaced by q; the harmonic family accumulates at 0, so
// every positive x has a largest element of U_k strictly below it.

double gap_quantum(int k, int N);

// max{u in U_k : u < x}. Throws DomainError for x <= 0, k < 1 or N < 1.
double u_floor(int k, int N, double x);

// Smallest element of U_k strictly above x (x >= 0).
double u_ceil_strict(int k, int N, double x);

// Membership with relative tolerance `rel_tol` on the index i.
bool in_gap_set(int k, int N, double x, double rel_tol = 1e-9);

// Finite menu used by path trees: the first J elements of each family,
// merged, deduplicated and sorted ascending.
std::vector<double> gap_menu(int k, int N, int J);

}  // namespace motdual
