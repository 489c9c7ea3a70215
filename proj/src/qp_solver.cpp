#include "tpmsvm/qp_solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tpmsvm/error.hpp"

namespace tpmsvm {

std::string to_string(QpStatus status) {
  switch (status) {
    case QpStatus::Optimal: return "Optimal";
    case QpStatus::MaxIter: return "MaxIter";
    case QpStatus::Infeasible: return "Infeasible";
  }
  return "?";
}

namespace {

void validate(const QpProblem& p) {
  const auto m = p.Q.rows();
  if (m == 0) throw Error(ErrorCode::InvalidInput, "empty QP");
  if (p.Q.cols() != m || p.q.size() != m)
    throw Error(ErrorCode::InvalidInput, "QP dimensions disagree");
  if (!p.Q.allFinite() || !p.q.allFinite() || !std::isfinite(p.nu) || !std::isfinite(p.ub))
    throw Error(ErrorCode::InvalidInput, "QP data contains non-finite entries");
  if (!(p.nu > 0.0) || !(p.ub > 0.0))
    throw Error(ErrorCode::InvalidInput, "QP requires nu > 0 and ub > 0");
  const double scale = std::max(1.0, p.Q.cwiseAbs().maxCoeff());
  if ((p.Q - p.Q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale)
    throw Error(ErrorCode::InvalidInput, "QP matrix is not symmetric");
  if (p.nu > static_cast<double>(m) * p.ub * (1.0 + 1e-12)) {
    std::ostringstream msg;
    msg << "nu = " << p.nu << " exceeds m * ub = " << static_cast<double>(m) * p.ub;
    throw Error(ErrorCode::Infeasible, msg.str());
  }
}

// Most violating pair: `up` may increase (l < ub) with the smallest gradient,
// `down` may decrease (l > 0) with the largest. Lowest index wins ties.
struct Pair {
  Eigen::Index up = -1;
  Eigen::Index down = -1;
  double gap = 0.0;
};

Pair select_pair(const Vector& lambda, const Vector& grad, double ub) {
  Pair pair;
  double g_up = std::numeric_limits<double>::infinity();
  double g_down = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda[i] < ub && grad[i] < g_up) {
      g_up = grad[i];
      pair.up = i;
    }
    if (lambda[i] > 0.0 && grad[i] > g_down) {
      g_down = grad[i];
      pair.down = i;
    }
  }
  pair.gap = (pair.up < 0 || pair.down < 0) ? 0.0 : g_down - g_up;
  return pair;
}

}  // namespace

double qp_objective(const QpProblem& problem, const VectorRef& lambda) {
  return -0.5 * lambda.dot(problem.Q * lambda) + problem.q.dot(lambda);
}

double qp_kkt_residual(const QpProblem& problem, const VectorRef& lambda) {
  const Vector grad = problem.Q * lambda - problem.q;
  const Pair pair = select_pair(lambda, grad, problem.ub);
  return std::max(0.0, 0.5 * pair.gap);
}

QpSolution solve_box_simplex_qp(const QpProblem& input, const QpOptions& options) {
  validate(input);
  const auto m = input.Q.rows();
  const double ub = input.ub;
  const long max_iter = options.max_iter > 0 ? options.max_iter : 100L * m * m;

  QpSolution sol;
  QpProblem repaired;
  const QpProblem* problem = &input;

  // PSD repair for indefinite Gram matrices (sigmoid kernels).
  {
    Eigen::SelfAdjointEigenSolver<Matrix> eig(input.Q, Eigen::EigenvaluesOnly);
    const Vector& ev = eig.eigenvalues();
    const double norm = std::max(std::abs(ev[0]), std::abs(ev[m - 1]));
    if (ev[0] < -1e-8 * norm) {
      const double eta = -ev[0] + 1e-10 * std::abs(input.Q.trace()) / static_cast<double>(m);
      repaired = input;
      repaired.Q.diagonal().array() += eta;
      problem = &repaired;
      sol.jitter = eta;
      std::ostringstream msg;
      msg << "QP matrix indefinite (min eigenvalue " << ev[0] << "); added " << eta << " * I";
      sol.warnings.push_back(msg.str());
    }
  }
  const Matrix& Q = problem->Q;

  // Feasible start: fill coordinates in index order up to the bound.
  Vector lambda = Vector::Zero(m);
  double remaining = problem->nu;
  for (Eigen::Index i = 0; i < m && remaining > 0.0; ++i) {
    lambda[i] = std::min(ub, remaining);
    remaining -= lambda[i];
  }

  Vector grad = Q * lambda - problem->q;
  const double curvature_floor = 1e-15 * std::max(1.0, Q.diagonal().cwiseAbs().maxCoeff());

  long iter = 0;
  bool converged = false;
  for (; iter < max_iter; ++iter) {
    const Pair pair = select_pair(lambda, grad, ub);
    if (pair.up < 0 || pair.down < 0 || pair.gap <= options.tol) {
      converged = true;
      break;
    }
    const auto i = pair.up;
    const auto j = pair.down;
    const double room_i = ub - lambda[i];
    const double room_j = lambda[j];
    const double room = std::min(room_i, room_j);
    const double eta = Q(i, i) + Q(j, j) - 2.0 * Q(i, j);
    double step = eta > curvature_floor ? std::min(room, pair.gap / eta) : room;
    if (step <= 0.0) {
      converged = true;
      break;
    }
    if (step == room_i) {
      lambda[i] = ub;
    } else {
      lambda[i] += step;
    }
    if (step == room_j) {
      lambda[j] = 0.0;
    } else {
      lambda[j] -= step;
    }
    grad += step * (Q.col(i) - Q.col(j));
    if ((iter + 1) % 1000 == 0) grad = Q * lambda - problem->q;
  }

  sol.lambda = std::move(lambda);
  sol.iterations = iter;
  sol.objective = qp_objective(*problem, sol.lambda);
  sol.kkt_residual = qp_kkt_residual(*problem, sol.lambda);
  sol.status = converged && sol.kkt_residual <= options.tol ? QpStatus::Optimal : QpStatus::MaxIter;
  return sol;
}

std::vector<int> interior_index_set(const QpSolution& solution, double ub, double margin_tol) {
  std::vector<int> out;
  for (Eigen::Index i = 0; i < solution.lambda.size(); ++i) {
    const double l = solution.lambda[i];
    if (l > margin_tol && l < ub - margin_tol) out.push_back(static_cast<int>(i));
  }
  return out;
}

}  // namespace tpmsvm
