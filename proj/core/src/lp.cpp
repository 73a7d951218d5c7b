#include "motdual/lp.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "motdual/errors.hpp"

namespace motdual {

int LinearProgram::add_variable(double cost, bool free) {
  if (!std::isfinite(cost)) throw DomainError("LP: non-finite cost");
  cost_.push_back(cost);
  free_.push_back(free);
  return static_cast<int>(cost_.size()) - 1;
}

int LinearProgram::add_row(std::vector<std::pair<int, double>> entries, RowSense sense, double rhs) {
  if (!std::isfinite(rhs)) throw DomainError("LP: non-finite right-hand side");
  for (const auto& [j, a] : entries) {
    if (j < 0 || j >= variable_count()) throw DomainError("LP: row references unknown variable");
    if (!std::isfinite(a)) throw DomainError("LP: non-finite coefficient");
  }
  rows_.push_back({std::move(entries), sense, rhs});
  return static_cast<int>(rows_.size()) - 1;
}

double LinearProgram::objective_value(const std::vector<double>& x) const {
  double v = 0.0;
  for (int j = 0; j < variable_count(); ++j) v += cost_[j] * x[j];
  return v;
}

double LinearProgram::max_violation(const std::vector<double>& x) const {
  double worst = 0.0;
  for (int j = 0; j < variable_count(); ++j)
    if (!free_[j]) worst = std::max(worst, -x[j]);
  for (const LpRow& r : rows_) {
    double lhs = 0.0;
    for (const auto& [j, a] : r.entries) lhs += a * x[j];
    double d = lhs - r.rhs;
    switch (r.sense) {
      case RowSense::LessEqual: worst = std::max(worst, d); break;
      case RowSense::GreaterEqual: worst = std::max(worst, -d); break;
      case RowSense::Equal: worst = std::max(worst, std::abs(d)); break;
    }
  }
  return worst;
}

const char* to_string(LpStatus status) {
  switch (status) {
    case LpStatus::Optimal: return "optimal";
    case LpStatus::Infeasible: return "infeasible";
    case LpStatus::Unbounded: return "unbounded";
    case LpStatus::SolverFailure: return "solver-failure";
  }
  return "?";
}

namespace {

// Removal record for a zero-cost column whose rows can always be satisfied
// by pushing the column in `direction`.
struct DroppedColumn {
  int var;
  int direction;
  std::vector<int> rows;
};

struct Presolved {
  std::vector<bool> row_active;
  std::vector<bool> var_active;
  std::vector<DroppedColumn> dropped;  // in removal order
  int rows_removed = 0;
  int columns_removed = 0;
  bool infeasible = false;
  std::string note;
};

Presolved presolve(const LinearProgram& lp, double tol, bool enabled) {
  const int n = lp.variable_count();
  const int m = lp.row_count();
  Presolved p;
  p.row_active.assign(m, true);
  p.var_active.assign(n, true);
  if (!enabled) return p;

  std::vector<std::vector<int>> col_rows(n);
  for (int i = 0; i < m; ++i)
    for (const auto& [j, a] : lp.row(i).entries)
      if (a != 0.0) col_rows[j].push_back(i);

  const bool maximize = lp.objective() == Objective::Maximize;
  auto remove_row = [&](int i) {
    if (p.row_active[i]) {
      p.row_active[i] = false;
      ++p.rows_removed;
    }
  };
  auto remove_var = [&](int j) {
    if (p.var_active[j]) {
      p.var_active[j] = false;
      ++p.columns_removed;
    }
  };

  bool changed = true;
  while (changed && !p.infeasible) {
    changed = false;
    // Empty and forcing rows.
    for (int i = 0; i < m; ++i) {
      if (!p.row_active[i]) continue;
      const LpRow& r = lp.row(i);
      bool any = false, has_free = false, all_pos = true, all_neg = true;
      for (const auto& [j, a] : r.entries) {
        if (!p.var_active[j] || a == 0.0) continue;
        any = true;
        if (lp.is_free(j)) has_free = true;
        if (a > 0.0) all_neg = false;
        if (a < 0.0) all_pos = false;
      }
      if (!any) {
        bool ok = r.sense == RowSense::Equal      ? std::abs(r.rhs) <= tol
                  : r.sense == RowSense::LessEqual ? r.rhs >= -tol
                                                   : r.rhs <= tol;
        if (!ok) {
          p.infeasible = true;
          std::ostringstream os;
          os << "presolve: row " << i << " has no variables but needs rhs " << r.rhs;
          p.note = os.str();
          return p;
        }
        remove_row(i);
        changed = true;
        continue;
      }
      if (has_free || r.rhs != 0.0) continue;
      // Nonnegative variables with one-signed coefficients and zero rhs.
      bool forcing = (r.sense == RowSense::Equal && (all_pos || all_neg)) ||
                     (r.sense == RowSense::LessEqual && all_pos) ||
                     (r.sense == RowSense::GreaterEqual && all_neg);
      if (!forcing) continue;
      for (const auto& [j, a] : r.entries)
        if (p.var_active[j] && a != 0.0) remove_var(j);
      remove_row(i);
      changed = true;
    }
    // Columns.
    for (int j = 0; j < n; ++j) {
      if (!p.var_active[j]) continue;
      double c = lp.cost(j);
      std::vector<int> rows;
      for (int i : col_rows[j])
        if (p.row_active[i]) rows.push_back(i);
      if (rows.empty()) {
        // No constraints: the variable is decided by its cost alone.
        double gain = maximize ? c : -c;
        if (gain == 0.0 || (gain < 0.0 && !lp.is_free(j))) {
          p.dropped.push_back({j, 0, {}});
          remove_var(j);
          changed = true;
        }
        continue;
      }
      if (c != 0.0) continue;
      for (int dir : {1, -1}) {
        if (dir == -1 && !lp.is_free(j)) break;
        bool relaxes = true;
        for (int i : rows) {
          const LpRow& r = lp.row(i);
          double a = 0.0;
          for (const auto& [k, v] : r.entries)
            if (k == j) a += v;
          double s = a * dir;
          if (r.sense == RowSense::Equal || (r.sense == RowSense::LessEqual && !(s < 0.0)) ||
              (r.sense == RowSense::GreaterEqual && !(s > 0.0))) {
            relaxes = false;
            break;
          }
        }
        if (relaxes) {
          for (int i : rows) remove_row(i);
          p.dropped.push_back({j, dir, rows});
          remove_var(j);
          changed = true;
          break;
        }
      }
    }
  }
  return p;
}

// Largest basis re-solved with LU after the simplex.
constexpr std::size_t kRefineLimit = 800;

// Dense tableau simplex on min c^T x, A x = b, x >= 0, b >= 0.
class Tableau {
 public:
  Tableau(Eigen::MatrixXd A, Eigen::VectorXd b, Eigen::VectorXd c, std::vector<int> natural_basis,
          const LpOptions& opt)
      : A_(std::move(A)), b_(std::move(b)), c_(std::move(c)), opt_(opt) {
    m_ = static_cast<int>(A_.rows());
    n_ = static_cast<int>(A_.cols());
    // Artificial columns for rows without a natural basic variable.
    basis_.assign(m_, -1);
    int art = 0;
    for (int i = 0; i < m_; ++i) {
      if (natural_basis[i] >= 0)
        basis_[i] = natural_basis[i];
      else
        ++art;
    }
    total_ = n_ + art;
    T_ = Eigen::MatrixXd::Zero(m_ + 1, total_ + 1);
    T_.block(0, 0, m_, n_) = A_;
    T_.block(0, total_, m_, 1) = b_;
    int a = n_;
    for (int i = 0; i < m_; ++i) {
      if (basis_[i] < 0) {
        T_(i, a) = 1.0;
        basis_[i] = a++;
      }
    }
    row_alive_.assign(m_, true);
  }

  LpStatus run(std::size_t& iterations, std::string& diag) {
    // Phase 1: minimize the sum of artificials.
    if (total_ > n_) {
      T_.row(m_).setZero();
      for (int j = n_; j < total_; ++j) T_(m_, j) = 1.0;
      for (int i = 0; i < m_; ++i)
        if (basis_[i] >= n_) T_.row(m_) -= T_.row(i);
      LpStatus s = iterate(total_, iterations, diag);
      if (s != LpStatus::Optimal) return s;
      double infeas = -T_(m_, total_);
      if (infeas > opt_.feasibility_tolerance * std::max(1.0, b_.cwiseAbs().maxCoeff())) {
        std::ostringstream os;
        os << "phase 1 ended with infeasibility " << infeas;
        diag = os.str();
        return LpStatus::Infeasible;
      }
      // Drive artificials out of the basis; rows that cannot be pivoted are redundant.
      for (int i = 0; i < m_; ++i) {
        if (basis_[i] < n_) continue;
        int entering = -1;
        for (int j = 0; j < n_; ++j) {
          if (std::abs(T_(i, j)) > opt_.pivot_tolerance) {
            entering = j;
            break;
          }
        }
        if (entering >= 0) {
          pivot(i, entering);
        } else {
          row_alive_[i] = false;
          T_.row(i).setZero();
        }
      }
    }
    // Phase 2.
    T_.row(m_).setZero();
    for (int j = 0; j < n_; ++j) T_(m_, j) = c_(j);
    for (int i = 0; i < m_; ++i) {
      if (!row_alive_[i]) continue;
      int bj = basis_[i];
      if (bj < n_ && c_(bj) != 0.0) T_.row(m_) -= c_(bj) * T_.row(i);
    }
    return iterate(n_, iterations, diag);
  }

  // Primal solution of the structural columns, refined by re-solving the
  // basis system against the original data.
  Eigen::VectorXd solution() const {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(n_);
    std::vector<int> rows, cols;
    for (int i = 0; i < m_; ++i) {
      if (!row_alive_[i]) continue;
      if (basis_[i] < n_) {
        x(basis_[i]) = std::max(0.0, T_(i, total_));
        rows.push_back(i);
        cols.push_back(basis_[i]);
      }
    }
    const auto alive = static_cast<std::size_t>(std::count(row_alive_.begin(), row_alive_.end(), true));
    if (!rows.empty() && rows.size() == alive && rows.size() <= kRefineLimit) {
      const int k = static_cast<int>(rows.size());
      Eigen::MatrixXd B(k, k);
      Eigen::VectorXd rhs(k);
      for (int r = 0; r < k; ++r) {
        rhs(r) = b_(rows[r]);
        for (int c = 0; c < k; ++c) B(r, c) = A_(rows[r], cols[c]);
      }
      Eigen::PartialPivLU<Eigen::MatrixXd> lu(B);
      Eigen::VectorXd xb = lu.solve(rhs);
      if (xb.allFinite() && xb.minCoeff() >= -opt_.feasibility_tolerance &&
          (B * xb - rhs).cwiseAbs().maxCoeff() <= opt_.feasibility_tolerance) {
        for (int c = 0; c < k; ++c) x(cols[c]) = std::max(0.0, xb(c));
      }
    }
    return x;
  }

 private:
  void pivot(int r, int j) {
    double pv = T_(r, j);
    T_.row(r) /= pv;
    Eigen::VectorXd col = T_.col(j);
    col(r) = 0.0;
    T_.noalias() -= col * T_.row(r);
    basis_[r] = j;
  }

  // Bland's rule: lowest-index improving column, lowest-index leaving
  // variable among ratio ties.
  LpStatus iterate(int limit, std::size_t& iterations, std::string& diag) {
    const double tol = opt_.pivot_tolerance;
    for (;;) {
      if (iterations >= opt_.max_iterations) {
        std::ostringstream os;
        os << "iteration cap " << opt_.max_iterations << " reached";
        diag = os.str();
        return LpStatus::SolverFailure;
      }
      int entering = -1;
      for (int j = 0; j < limit; ++j) {
        if (T_(m_, j) < -tol) {
          entering = j;
          break;
        }
      }
      if (entering < 0) return LpStatus::Optimal;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < m_; ++i) {
        if (!row_alive_[i]) continue;
        double a = T_(i, entering);
        if (a <= tol) continue;
        double ratio = T_(i, total_) / a;
        if (leave < 0 || ratio < best - 1e-12 * std::max(1.0, std::abs(best)) ||
            (std::abs(ratio - best) <= 1e-12 * std::max(1.0, std::abs(best)) && basis_[i] < basis_[leave])) {
          best = ratio;
          leave = i;
        }
      }
      if (leave < 0) {
        std::ostringstream os;
        os << "column " << entering << " improves without bound";
        diag = os.str();
        return LpStatus::Unbounded;
      }
      pivot(leave, entering);
      ++iterations;
      if (!T_.allFinite()) {
        diag = "numerical breakdown: non-finite tableau entry";
        return LpStatus::SolverFailure;
      }
    }
  }

  Eigen::MatrixXd A_;
  Eigen::VectorXd b_, c_;
  LpOptions opt_;
  int m_ = 0, n_ = 0, total_ = 0;
  Eigen::MatrixXd T_;
  std::vector<int> basis_;
  std::vector<bool> row_alive_;
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp, const LpOptions& options) {
  LpResult res;
  const int n = lp.variable_count();
  const double tol = options.feasibility_tolerance;
  Presolved pre = presolve(lp, tol, options.presolve);
  res.presolve_rows_removed = pre.rows_removed;
  res.presolve_columns_removed = pre.columns_removed;
  res.x.assign(n, 0.0);
  if (pre.infeasible) {
    res.status = LpStatus::Infeasible;
    res.diagnostics = pre.note;
    return res;
  }

  // Standard form: split free variables, add slacks, make rhs nonnegative.
  std::vector<int> pos(n, -1), neg(n, -1);
  int cols = 0;
  for (int j = 0; j < n; ++j) {
    if (!pre.var_active[j]) continue;
    pos[j] = cols++;
    if (lp.is_free(j)) neg[j] = cols++;
  }
  std::vector<int> active_rows;
  for (int i = 0; i < lp.row_count(); ++i)
    if (pre.row_active[i]) active_rows.push_back(i);
  const int m = static_cast<int>(active_rows.size());
  int slack_cols = 0;
  for (int i : active_rows)
    if (lp.row(i).sense != RowSense::Equal) ++slack_cols;
  const int total = cols + slack_cols;

  const double cells = static_cast<double>(m + 1) * static_cast<double>(total + m + 1);
  if (cells > options.max_tableau_entries) {
    std::ostringstream os;
    os << "dense tableau of " << m << " rows and " << total << " columns exceeds the limit of "
       << options.max_tableau_entries << " entries";
    res.status = LpStatus::SolverFailure;
    res.diagnostics = os.str();
    return res;
  }
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(m, total);
  Eigen::VectorXd b(m), c = Eigen::VectorXd::Zero(total);
  std::vector<int> natural(m, -1);
  const double sgn = lp.objective() == Objective::Maximize ? -1.0 : 1.0;
  for (int j = 0; j < n; ++j) {
    if (pos[j] < 0) continue;
    c(pos[j]) = sgn * lp.cost(j);
    if (neg[j] >= 0) c(neg[j]) = -sgn * lp.cost(j);
  }
  int s = cols;
  for (int r = 0; r < m; ++r) {
    const LpRow& row = lp.row(active_rows[r]);
    for (const auto& [j, a] : row.entries) {
      if (pos[j] < 0) continue;
      A(r, pos[j]) += a;
      if (neg[j] >= 0) A(r, neg[j]) -= a;
    }
    b(r) = row.rhs;
    int slack = -1;
    if (row.sense == RowSense::LessEqual) {
      A(r, s) = 1.0;
      slack = s++;
    } else if (row.sense == RowSense::GreaterEqual) {
      A(r, s) = -1.0;
      slack = s++;
    }
    if (b(r) < 0.0) {
      A.row(r) *= -1.0;
      b(r) = -b(r);
    }
    if (slack >= 0 && A(r, slack) > 0.0) natural[r] = slack;
  }

  Eigen::VectorXd xs = Eigen::VectorXd::Zero(total);
  if (m > 0) {
    Tableau tab(A, b, c, natural, options);
    res.status = tab.run(res.iterations, res.diagnostics);
    if (res.status != LpStatus::Optimal) return res;
    xs = tab.solution();
  } else {
    // Nothing left but bounds: presolve kept only columns with a favorable cost.
    for (int j = 0; j < total; ++j) {
      if (c(j) < 0.0) {
        res.status = LpStatus::Unbounded;
        res.diagnostics = "objective improves without bound";
        return res;
      }
    }
    res.status = LpStatus::Optimal;
  }
  for (int j = 0; j < n; ++j) {
    if (pos[j] < 0) continue;
    res.x[j] = xs(pos[j]) - (neg[j] >= 0 ? xs(neg[j]) : 0.0);
  }

  // Postsolve dropped columns in reverse order of removal.
  for (auto it = pre.dropped.rbegin(); it != pre.dropped.rend(); ++it) {
    const DroppedColumn& d = *it;
    double value = lp.is_free(d.var) && !d.rows.empty()
                       ? (d.direction > 0 ? -std::numeric_limits<double>::infinity()
                                          : std::numeric_limits<double>::infinity())
                       : 0.0;
    for (int i : d.rows) {
      const LpRow& row = lp.row(i);
      double other = 0.0, a = 0.0;
      for (const auto& [k, v] : row.entries) {
        if (k == d.var)
          a += v;
        else
          other += v * res.x[k];
      }
      double bound = (row.rhs - other) / a;
      value = d.direction > 0 ? std::max(value, bound) : std::min(value, bound);
    }
    if (!lp.is_free(d.var)) value = std::max(value, 0.0);
    res.x[d.var] = value;
  }
  res.value = lp.objective_value(res.x);
  res.primal_residual = lp.max_violation(res.x);
  return res;
}

}  // namespace motdual
