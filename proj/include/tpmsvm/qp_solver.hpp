#pragma once

#include <string>
#include <vector>

#include "tpmsvm/kernels.hpp"

namespace tpmsvm {

/// maximize  -1/2 l'Ql + q'l   s.t.  sum(l) = nu,  0 <= l <= ub.
struct QpProblem {
  Matrix Q;
  Vector q;
  double nu = 0.0;
  double ub = 0.0;
};

enum class QpStatus { Optimal, MaxIter, Infeasible };

std::string to_string(QpStatus status);

struct QpSolution {
  Vector lambda;
  double objective = 0.0;  // maximization form, evaluated with the (possibly repaired) Q
  double kkt_residual = 0.0;
  long iterations = 0;
  QpStatus status = QpStatus::MaxIter;
  double jitter = 0.0;  // diagonal shift added by PSD repair, 0 when untouched
  std::vector<std::string> warnings;
};

struct QpOptions {
  double tol = 1e-8;
  long max_iter = 0;  // 0 selects 100 * m^2
};

/// Pairwise coordinate exchange (SMO) with maximal-violating-pair selection.
/// Throws Infeasible when nu > m * ub and InvalidInput on malformed data.
QpSolution solve_box_simplex_qp(const QpProblem& problem, const QpOptions& options = {});

/// Maximization objective -1/2 l'Ql + q'l.
double qp_objective(const QpProblem& problem, const VectorRef& lambda);

/// Best-mu projected-gradient KKT violation of `lambda` for the minimization form.
double qp_kkt_residual(const QpProblem& problem, const VectorRef& lambda);

/// Indices whose multiplier is strictly inside (margin_tol, ub - margin_tol).
std::vector<int> interior_index_set(const QpSolution& solution, double ub, double margin_tol);

}  // namespace tpmsvm
