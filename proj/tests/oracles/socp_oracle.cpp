#include <cmath>

#include "socp_oracle.hpp"

namespace tpmsvm::oracle {

Vector project_cone(const ConicProgram& program, const VectorRef& x) {
  Vector out = x;
  int at = 0;
  for (const auto& cone : program.cones) {
    switch (cone.kind) {
      case ConeKind::Free:
        break;
      case ConeKind::NonNeg:
        for (int i = at; i < at + cone.dim; ++i) out[i] = std::max(0.0, out[i]);
        break;
      case ConeKind::SecondOrder: {
        const double t = out[at];
        const double r = out.segment(at + 1, cone.dim - 1).norm();
        if (r <= t) break;
        if (r <= -t) {
          out.segment(at, cone.dim).setZero();
          break;
        }
        const double a = 0.5 * (t + r);
        out[at] = a;
        out.segment(at + 1, cone.dim - 1) *= a / r;
        break;
      }
    }
    at += cone.dim;
  }
  return out;
}

SocpOracleResult solve_first_order(const ConicProgram& program, double tol, long max_iter) {
  const Matrix& A = program.A;
  const Eigen::LDLT<Matrix> AAt(A * A.transpose());
  // Scale the step so the objective and the geometry are balanced.
  const double gamma = 1.0 / std::max(1.0, program.c.lpNorm<Eigen::Infinity>());
  auto affine_prox = [&](const Vector& v) {
    const Vector u = v - gamma * program.c;
    return Vector(u - A.transpose() * AAt.solve(A * u - program.b));
  };
  SocpOracleResult res;
  Vector z = Vector::Zero(program.num_vars());
  Vector x = z;
  for (long it = 1; it <= max_iter; ++it) {
    x = project_cone(program, z);
    const Vector y = affine_prox(2.0 * x - z);
    const Vector step = y - x;
    z += step;
    res.iterations = it;
    if (step.lpNorm<Eigen::Infinity>() <= tol * (1.0 + x.lpNorm<Eigen::Infinity>())) {
      res.converged = true;
      break;
    }
  }
  // x is in the cone; report the affine residual separately.
  res.x = x;
  res.objective = program.c.dot(x) + program.objective_offset;
  res.primal_residual = (A * x - program.b).lpNorm<Eigen::Infinity>();
  return res;
}

}  // namespace tpmsvm::oracle
