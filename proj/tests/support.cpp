#include <cmath>

#include "support.hpp"

namespace tpmsvm::testing {

QpProblem random_box_simplex(SplitMix64& rng, int m) {
  Matrix G(m + 2, m);
  for (int i = 0; i < G.rows(); ++i)
    for (int j = 0; j < m; ++j) G(i, j) = rng.normal();
  QpProblem p;
  p.Q = G.transpose() * G;
  p.q.resize(m);
  for (int i = 0; i < m; ++i) p.q[i] = 2.0 * rng.normal();
  p.ub = rng.uniform(0.2, 1.0);
  p.nu = rng.uniform(0.05, 0.95) * m * p.ub;
  return p;
}

ConicProgram random_conic_program(SplitMix64& rng, int num_vars, int num_rows) {
  ConicProgram p;
  int used = 0, free = 0;
  while (used < num_vars) {
    const int left = num_vars - used;
    const auto pick = rng.below(3);
    if (pick == 0 && free < num_rows) {
      // Free columns stay fewer than the rows so they remain determined.
      p.cones.push_back({ConeKind::Free, 1});
      ++free;
    } else if (pick == 1 || left < 2) {
      p.cones.push_back({ConeKind::NonNeg, static_cast<int>(1 + rng.below(std::min(left, 3)))});
    } else {
      p.cones.push_back({ConeKind::SecondOrder, static_cast<int>(2 + rng.below(std::min(left - 1, 3)))});
    }
    used += p.cones.back().dim;
  }
  // Interior primal point x0 and dual slack s0 (zero on free blocks).
  Vector x0(num_vars), s0(num_vars);
  int at = 0;
  for (const auto& cone : p.cones) {
    for (int i = at; i < at + cone.dim; ++i) {
      x0[i] = rng.normal();
      s0[i] = rng.normal();
    }
    if (cone.kind == ConeKind::NonNeg) {
      for (int i = at; i < at + cone.dim; ++i) {
        x0[i] = std::abs(x0[i]) + 0.1;
        s0[i] = std::abs(s0[i]) + 0.1;
      }
    } else if (cone.kind == ConeKind::SecondOrder) {
      x0[at] = x0.segment(at + 1, cone.dim - 1).norm() + 0.1 + std::abs(x0[at]);
      s0[at] = s0.segment(at + 1, cone.dim - 1).norm() + 0.1 + std::abs(s0[at]);
    } else {
      s0[at] = 0.0;
    }
    at += cone.dim;
  }
  p.A.resize(num_rows, num_vars);
  for (int i = 0; i < num_rows; ++i)
    for (int j = 0; j < num_vars; ++j) p.A(i, j) = rng.normal();
  p.b = p.A * x0;
  Vector y0(num_rows);
  for (int i = 0; i < num_rows; ++i) y0[i] = rng.normal();
  p.c = p.A.transpose() * y0 + s0;
  return p;
}

Dataset random_classes(SplitMix64& rng, int m, int n, int C, double shift) {
  Matrix X(m, n);
  std::vector<int> y(static_cast<std::size_t>(m));
  for (int i = 0; i < m; ++i) {
    y[static_cast<std::size_t>(i)] = 1 + i % C;
    const int c = y[static_cast<std::size_t>(i)];
    // centres on a circle in the first two coordinates, on a line when n == 1
    const double angle = 2.0 * M_PI * c / C;
    for (int j = 0; j < n; ++j) X(i, j) = rng.normal();
    if (n == 1) {
      X(i, 0) += shift * c;
    } else {
      X(i, 0) += shift * std::cos(angle);
      X(i, 1) += shift * std::sin(angle);
    }
  }
  return Dataset::make(X, y, C);
}

Dataset gaussian_blobs(SplitMix64& rng, int per, double spread) {
  const double centres[3][2] = {{0.25, 0.3}, {0.75, 0.3}, {0.5, 0.75}};
  Matrix X(3 * per, 2);
  std::vector<int> y;
  for (int c = 0; c < 3; ++c)
    for (int i = 0; i < per; ++i) {
      const int r = c * per + i;
      X(r, 0) = centres[c][0] + spread * rng.normal();
      X(r, 1) = centres[c][1] + spread * rng.normal();
      y.push_back(c + 1);
    }
  return Dataset::make(X, y, 3);
}

Hyperparams random_hyperparams(SplitMix64& rng) {
  const double alpha = std::ldexp(1.0, static_cast<int>(rng.below(9)) - 4);
  return {alpha * (0.1 + 0.2 * static_cast<double>(rng.below(5))), alpha};
}

double linear_term_scale(const Dataset& data, int c, const Hyperparams& h, const VectorRef& w, double theta) {
  const ClassView view = ClassView::of(data, c);
  const double coef = h.nu / view.m_rest();
  const Vector g = view.Xc * w;
  double slack = 0.0;
  for (Eigen::Index i = 0; i < g.size(); ++i) slack += std::max(0.0, -(g[i] + theta));
  return 0.5 * w.squaredNorm() + std::abs(coef * (view.Xrest * w).sum()) + std::abs(h.nu * theta) +
         h.alpha / view.m_c() * slack;
}

double kernel_term_scale(const Dataset& data, int c, const Hyperparams& h, const Matrix& K, const VectorRef& beta,
                         double theta) {
  const ClassView view = ClassView::of(data, c);
  const double coef = h.nu / view.m_rest();
  const Vector kb = K * beta;
  double slack = 0.0, rest = 0.0;
  for (int i : view.in_class) slack += std::max(0.0, -(kb[i] + theta));
  for (int i : view.rest) rest += kb[i];
  return 0.5 * beta.dot(kb) + std::abs(coef * rest) + std::abs(h.nu * theta) + h.alpha / view.m_c() * slack;
}

}  // namespace tpmsvm::testing
