#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace motdual {

enum class RowSense { LessEqual, Equal, GreaterEqual };
enum class Objective { Maximize, Minimize };

struct LpRow {
  std::vector<std::pair<int, double>> entries;  // (variable, coefficient)
  RowSense sense = RowSense::Equal;
  double rhs = 0.0;
};

// Sparse-input linear program: variables are nonnegative unless declared free.
class LinearProgram {
 public:
  explicit LinearProgram(Objective objective = Objective::Maximize) : objective_(objective) {}

  int add_variable(double cost, bool free = false);
  int add_row(std::vector<std::pair<int, double>> entries, RowSense sense, double rhs);

  Objective objective() const { return objective_; }
  int variable_count() const { return static_cast<int>(cost_.size()); }
  int row_count() const { return static_cast<int>(rows_.size()); }
  double cost(int j) const { return cost_[j]; }
  bool is_free(int j) const { return free_[j]; }
  const LpRow& row(int i) const { return rows_[i]; }

  double objective_value(const std::vector<double>& x) const;
  // Largest violation of any row or sign constraint.
  double max_violation(const std::vector<double>& x) const;

 private:
  Objective objective_;
  std::vector<double> cost_;
  std::vector<bool> free_;
  std::vector<LpRow> rows_;
};

enum class LpStatus { Optimal, Infeasible, Unbounded, SolverFailure };

const char* to_string(LpStatus status);

struct LpOptions {
  double pivot_tolerance = 1e-9;
  double feasibility_tolerance = 1e-9;
  std::size_t max_iterations = 2'000'000;
  bool presolve = true;
  // Guard against dense tableaux that would not fit in memory (8 bytes each).
  double max_tableau_entries = 6e7;
};

struct LpResult {
  LpStatus status = LpStatus::SolverFailure;
  double value = 0.0;
  std::vector<double> x;
  std::size_t iterations = 0;
  double primal_residual = 0.0;
  int presolve_rows_removed = 0;
  int presolve_columns_removed = 0;
  std::string diagnostics;
};

// Two-phase dense tableau simplex with Bland's rule after a reducing
// presolve. Deterministic. Residuals refer to the original program.
LpResult solve_lp(const LinearProgram& lp, const LpOptions& options = {});

}  // namespace motdual
