#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tpmsvm/conic.hpp"
#include "tpmsvm/error.hpp"

namespace tpmsvm {

std::string to_string(ConicStatus status) {
  switch (status) {
    case ConicStatus::Optimal: return "Optimal";
    case ConicStatus::Infeasible: return "Infeasible";
    case ConicStatus::Unbounded: return "Unbounded";
    case ConicStatus::MaxIter: return "MaxIter";
  }
  return "?";
}

void ConicProgram::validate() const {
  const auto n = c.size();
  if (A.cols() != n || A.rows() != b.size())
    throw Error(ErrorCode::InvalidInput, "conic program: A is " + std::to_string(A.rows()) + "x" +
                                             std::to_string(A.cols()) + ", c has " + std::to_string(n) +
                                             " entries, b has " + std::to_string(b.size()));
  Eigen::Index total = 0;
  for (const auto& cone : cones) {
    if (cone.dim < 1) throw Error(ErrorCode::InvalidInput, "conic program: empty cone block");
    if (cone.kind == ConeKind::SecondOrder && cone.dim < 2)
      throw Error(ErrorCode::InvalidInput, "conic program: second-order block needs dim >= 2");
    total += cone.dim;
  }
  if (total != n)
    throw Error(ErrorCode::InvalidInput, "conic program: cone dims sum to " + std::to_string(total) +
                                             " but there are " + std::to_string(n) + " variables");
  if (!c.allFinite() || !A.allFinite() || !b.allFinite() || !std::isfinite(objective_offset))
    throw Error(ErrorCode::InvalidInput, "conic program contains non-finite data");
}

double cone_violation(const ConicProgram& program, const VectorRef& x) {
  double worst = 0.0;
  Eigen::Index off = 0;
  for (const auto& cone : program.cones) {
    const auto seg = x.segment(off, cone.dim);
    if (cone.kind == ConeKind::NonNeg) {
      worst = std::max(worst, -seg.minCoeff());
    } else if (cone.kind == ConeKind::SecondOrder) {
      worst = std::max(worst, seg.tail(cone.dim - 1).norm() - seg[0]);
    }
    off += cone.dim;
  }
  return worst;
}

namespace {

// ---------------------------------------------------------------------------
// Presolve

struct Presolved {
  ConicProgram reduced;
  std::vector<int> var_map;  // reduced variable -> original variable
  std::vector<int> row_map;  // reduced row -> original row
  Vector fixed;              // values of fixed variables (original indexing)
  std::vector<bool> is_fixed;
  std::vector<std::pair<int, int>> pins;  // (row, var) in the order they were fixed
  bool infeasible = false;
};

Presolved presolve(const ConicProgram& p) {
  const int n = p.num_vars();
  const int m = p.num_rows();
  Presolved out;
  out.fixed = Vector::Zero(n);
  out.is_fixed.assign(n, false);

  std::vector<ConeKind> kind(n);
  {
    int off = 0;
    for (const auto& cone : p.cones) {
      for (int k = 0; k < cone.dim; ++k) kind[off + k] = cone.kind;
      off += cone.dim;
    }
  }

  Vector b = p.b;
  double offset = p.objective_offset;
  std::vector<bool> row_active(m, true);
  const double b_scale = 1.0 + (m > 0 ? p.b.cwiseAbs().maxCoeff() : 0.0);
  const double zero_tol = 1e-12 * b_scale;

  bool changed = true;
  while (changed && !out.infeasible) {
    changed = false;
    for (int r = 0; r < m && !out.infeasible; ++r) {
      if (!row_active[r]) continue;
      int count = 0;
      int var = -1;
      for (int k = 0; k < n; ++k) {
        if (!out.is_fixed[k] && p.A(r, k) != 0.0) {
          ++count;
          var = k;
        }
      }
      if (count == 0) {
        if (std::abs(b[r]) > zero_tol) out.infeasible = true;
        row_active[r] = false;
        changed = true;
      } else if (count == 1 && kind[var] != ConeKind::SecondOrder) {
        double value = b[r] / p.A(r, var);
        if (kind[var] == ConeKind::NonNeg) {
          if (value < -zero_tol) {
            out.infeasible = true;
            break;
          }
          value = std::max(value, 0.0);
        }
        out.fixed[var] = value;
        out.is_fixed[var] = true;
        for (int r2 = 0; r2 < m; ++r2) b[r2] -= p.A(r2, var) * value;
        offset += p.c[var] * value;
        row_active[r] = false;
        out.pins.emplace_back(r, var);
        changed = true;
      }
    }
  }

  // Exact duplicate rows.
  for (int i = 0; i < m && !out.infeasible; ++i) {
    if (!row_active[i]) continue;
    for (int j = i + 1; j < m; ++j) {
      if (!row_active[j]) continue;
      bool same = true;
      for (int k = 0; k < n && same; ++k)
        if (!out.is_fixed[k] && p.A(i, k) != p.A(j, k)) same = false;
      if (!same) continue;
      if (std::abs(b[i] - b[j]) > zero_tol) {
        out.infeasible = true;
        break;
      }
      row_active[j] = false;
    }
  }

  for (int k = 0; k < n; ++k)
    if (!out.is_fixed[k]) out.var_map.push_back(k);
  for (int r = 0; r < m; ++r)
    if (row_active[r]) out.row_map.push_back(r);

  auto& red = out.reduced;
  const auto nr = static_cast<Eigen::Index>(out.var_map.size());
  const auto mr = static_cast<Eigen::Index>(out.row_map.size());
  red.c.resize(nr);
  red.A.resize(mr, nr);
  red.b.resize(mr);
  for (Eigen::Index j = 0; j < nr; ++j) {
    red.c[j] = p.c[out.var_map[j]];
    for (Eigen::Index i = 0; i < mr; ++i) red.A(i, j) = p.A(out.row_map[i], out.var_map[j]);
  }
  for (Eigen::Index i = 0; i < mr; ++i) red.b[i] = b[out.row_map[i]];
  red.objective_offset = offset;
  int off = 0;
  for (const auto& cone : p.cones) {
    int kept = 0;
    for (int k = 0; k < cone.dim; ++k)
      if (!out.is_fixed[off + k]) ++kept;
    if (kept > 0) red.cones.push_back({cone.kind, kept});
    off += cone.dim;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Cone algebra. Cone-space vectors stack all non-free variables block by block.

struct Block {
  ConeKind kind;
  Eigen::Index offset;  // into the cone-space vector
  Eigen::Index dim;
};

struct Scaling {
  // NonNeg: w = sqrt(s / z) elementwise. SecondOrder: W = eta * Wbar(wbar).
  Vector w;
  double eta = 1.0;
};

double soc_residual(const VectorRef& u) {
  const double tail = u.tail(u.size() - 1).norm();
  return (u[0] - tail) * (u[0] + tail);
}

Scaling soc_scaling(const VectorRef& s, const VectorRef& z) {
  const double sr = std::sqrt(std::max(soc_residual(s), std::numeric_limits<double>::min()));
  const double zr = std::sqrt(std::max(soc_residual(z), std::numeric_limits<double>::min()));
  const Vector sb = s / sr;
  const Vector zb = z / zr;
  const double gamma = std::sqrt(std::max(0.5 * (1.0 + sb.dot(zb)), std::numeric_limits<double>::min()));
  Scaling sc;
  sc.w.resize(s.size());
  sc.w[0] = (sb[0] + zb[0]) / (2.0 * gamma);
  sc.w.tail(s.size() - 1) = (sb.tail(s.size() - 1) - zb.tail(s.size() - 1)) / (2.0 * gamma);
  sc.eta = std::sqrt(sr / zr);
  return sc;
}

// W v for one block.
Vector apply_w(const Block& blk, const Scaling& sc, const VectorRef& v) {
  if (blk.kind == ConeKind::NonNeg) return sc.w.cwiseProduct(v);
  const Eigen::Index d = blk.dim;
  const double w0 = sc.w[0];
  const auto w1 = sc.w.tail(d - 1);
  const double w1v1 = w1.dot(v.tail(d - 1));
  Vector out(d);
  out[0] = w0 * v[0] + w1v1;
  out.tail(d - 1) = v.tail(d - 1) + (v[0] + w1v1 / (1.0 + w0)) * w1;
  return sc.eta * out;
}

// W^{-1} v for one block.
Vector apply_winv(const Block& blk, const Scaling& sc, const VectorRef& v) {
  if (blk.kind == ConeKind::NonNeg) return v.cwiseQuotient(sc.w);
  const Eigen::Index d = blk.dim;
  const double w0 = sc.w[0];
  const auto w1 = sc.w.tail(d - 1);
  const double w1v1 = w1.dot(v.tail(d - 1));
  Vector out(d);
  out[0] = w0 * v[0] - w1v1;
  out.tail(d - 1) = v.tail(d - 1) + (-v[0] + w1v1 / (1.0 + w0)) * w1;
  return out / sc.eta;
}

Matrix dense_w(const Block& blk, const Scaling& sc) {
  if (blk.kind == ConeKind::NonNeg) return sc.w.asDiagonal();
  const Eigen::Index d = blk.dim;
  Matrix w(d, d);
  const double w0 = sc.w[0];
  const auto w1 = sc.w.tail(d - 1);
  w(0, 0) = w0;
  w.block(0, 1, 1, d - 1) = w1.transpose();
  w.block(1, 0, d - 1, 1) = w1;
  w.block(1, 1, d - 1, d - 1) = Matrix::Identity(d - 1, d - 1) + w1 * w1.transpose() / (1.0 + w0);
  return sc.eta * w;
}

// u o v (Jordan product).
Vector jordan(const Block& blk, const VectorRef& u, const VectorRef& v) {
  if (blk.kind == ConeKind::NonNeg) return u.cwiseProduct(v);
  const Eigen::Index d = blk.dim;
  Vector out(d);
  out[0] = u.dot(v);
  out.tail(d - 1) = u[0] * v.tail(d - 1) + v[0] * u.tail(d - 1);
  return out;
}

// Solves lambda o x = r for x.
Vector jordan_solve(const Block& blk, const VectorRef& lambda, const VectorRef& r) {
  if (blk.kind == ConeKind::NonNeg) return r.cwiseQuotient(lambda);
  const Eigen::Index d = blk.dim;
  const double l0 = lambda[0];
  const auto l1 = lambda.tail(d - 1);
  const double det = soc_residual(lambda);
  Vector out(d);
  out[0] = (l0 * r[0] - l1.dot(r.tail(d - 1))) / det;
  out.tail(d - 1) = (r.tail(d - 1) - out[0] * l1) / l0;
  return out;
}

// Largest alpha with u + alpha * du still in the cone (infinity if unbounded).
double max_step(const Block& blk, const VectorRef& u, const VectorRef& du) {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (blk.kind == ConeKind::NonNeg) {
    double alpha = inf;
    for (Eigen::Index i = 0; i < u.size(); ++i)
      if (du[i] < 0.0) alpha = std::min(alpha, -u[i] / du[i]);
    return alpha;
  }
  const Eigen::Index d = blk.dim;
  const double a = du[0] * du[0] - du.tail(d - 1).squaredNorm();
  const double b = u[0] * du[0] - u.tail(d - 1).dot(du.tail(d - 1));
  const double c = std::max(soc_residual(u), 0.0);
  double alpha = inf;
  if (a < 0.0) {
    const double disc = std::sqrt(std::max(b * b - a * c, 0.0));
    alpha = b <= 0.0 ? c / (-b + disc) : (b + disc) / (-a);
  } else if (b < 0.0) {
    const double disc2 = b * b - a * c;
    if (disc2 >= 0.0) alpha = c / (-b + std::sqrt(disc2));
  }
  if (du[0] < 0.0) alpha = std::min(alpha, -u[0] / du[0]);
  return std::max(alpha, 0.0);
}

// ---------------------------------------------------------------------------
// Interior point method on the reduced program.

class Ipm {
 public:
  Ipm(const ConicProgram& p, const ConicOptions& opt) : p_(p), opt_(opt) {
    Eigen::Index off = 0;
    Eigen::Index koff = 0;
    for (const auto& cone : p.cones) {
      if (cone.kind == ConeKind::Free) {
        for (int k = 0; k < cone.dim; ++k) free_.push_back(static_cast<int>(off + k));
      } else {
        blocks_.push_back({cone.kind, koff, cone.dim});
        for (int k = 0; k < cone.dim; ++k) cone_.push_back(static_cast<int>(off + k));
        degree_ += cone.kind == ConeKind::NonNeg ? cone.dim : 1;
        koff += cone.dim;
      }
      off += cone.dim;
    }
    const auto m = p.A.rows();
    af_.resize(m, static_cast<Eigen::Index>(free_.size()));
    ak_.resize(m, static_cast<Eigen::Index>(cone_.size()));
    cf_.resize(static_cast<Eigen::Index>(free_.size()));
    ck_.resize(static_cast<Eigen::Index>(cone_.size()));
    for (std::size_t j = 0; j < free_.size(); ++j) {
      af_.col(static_cast<Eigen::Index>(j)) = p.A.col(free_[j]);
      cf_[static_cast<Eigen::Index>(j)] = p.c[free_[j]];
    }
    for (std::size_t j = 0; j < cone_.size(); ++j) {
      ak_.col(static_cast<Eigen::Index>(j)) = p.A.col(cone_[j]);
      ck_[static_cast<Eigen::Index>(j)] = p.c[cone_[j]];
    }
  }

  ConicSolution run();
  const Matrix& free_columns() const { return af_; }

 private:
  struct Direction {
    Vector xf, xk, y, z;
    double tau = 0.0, kappa = 0.0;
  };

  Vector identity() const {
    Vector e = Vector::Zero(ak_.cols());
    for (const auto& blk : blocks_) {
      if (blk.kind == ConeKind::NonNeg)
        e.segment(blk.offset, blk.dim).setOnes();
      else
        e[blk.offset] = 1.0;
    }
    return e;
  }

  void compute_scaling() {
    scal_.clear();
    lambda_.resize(xk_.size());
    for (const auto& blk : blocks_) {
      const auto s = xk_.segment(blk.offset, blk.dim);
      const auto z = z_.segment(blk.offset, blk.dim);
      Scaling sc;
      if (blk.kind == ConeKind::NonNeg) {
        sc.w = (s.array() / z.array()).sqrt().matrix();
      } else {
        sc = soc_scaling(s, z);
      }
      lambda_.segment(blk.offset, blk.dim) = apply_w(blk, sc, z);
      scal_.push_back(std::move(sc));
    }
  }

  Vector w_times(const Vector& v) const {
    Vector out(v.size());
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const auto& blk = blocks_[b];
      out.segment(blk.offset, blk.dim) = apply_w(blk, scal_[b], v.segment(blk.offset, blk.dim));
    }
    return out;
  }

  Vector winv_times(const Vector& v) const {
    Vector out(v.size());
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const auto& blk = blocks_[b];
      out.segment(blk.offset, blk.dim) = apply_winv(blk, scal_[b], v.segment(blk.offset, blk.dim));
    }
    return out;
  }

  Vector jordan_all(const Vector& u, const Vector& v) const {
    Vector out(u.size());
    for (const auto& blk : blocks_)
      out.segment(blk.offset, blk.dim) =
          jordan(blk, u.segment(blk.offset, blk.dim), v.segment(blk.offset, blk.dim));
    return out;
  }

  Vector jordan_solve_all(const Vector& l, const Vector& r) const {
    Vector out(l.size());
    for (const auto& blk : blocks_)
      out.segment(blk.offset, blk.dim) =
          jordan_solve(blk, l.segment(blk.offset, blk.dim), r.segment(blk.offset, blk.dim));
    return out;
  }

  double step_to_boundary(const Vector& u, const Vector& du) const {
    double alpha = std::numeric_limits<double>::infinity();
    for (const auto& blk : blocks_)
      alpha = std::min(alpha, max_step(blk, u.segment(blk.offset, blk.dim), du.segment(blk.offset, blk.dim)));
    return alpha;
  }

  void factor() {
    const auto m = ak_.rows();
    const auto nf = af_.cols();
    Matrix aw(m, ak_.cols());
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
      const auto& blk = blocks_[b];
      if (blk.kind == ConeKind::NonNeg) {
        aw.middleCols(blk.offset, blk.dim) =
            ak_.middleCols(blk.offset, blk.dim) * scal_[b].w.asDiagonal();
      } else {
        aw.middleCols(blk.offset, blk.dim) = ak_.middleCols(blk.offset, blk.dim) * dense_w(blk, scal_[b]);
      }
    }
    kkt_.setZero(m + nf, m + nf);
    kkt_.topLeftCorner(m, m).noalias() = aw * aw.transpose();
    kkt_.topRightCorner(m, nf) = af_;
    kkt_.bottomLeftCorner(nf, m) = af_.transpose();
    lu_.compute(kkt_);
  }

  Vector solve_kkt(const Vector& rhs) const {
    Vector u = lu_.solve(rhs);
    for (int k = 0; k < 2; ++k) {
      const Vector res = rhs - kkt_ * u;
      u += lu_.solve(res);
    }
    return u;
  }

  // Newton direction for residual weight `eta`, scaled complementarity target
  // `ds` (W^{-1} dx + W dz = ds) and tau-kappa target `dtk`.
  Direction direction(double eta, const Vector& ds, double dtk) const {
    const auto m = ak_.rows();
    const auto nf = af_.cols();
    auto w2 = [this](const Vector& v) { return w_times(w_times(v)); };

    Vector rhs0(m + nf), rhs1(m + nf);
    rhs0.head(m) = -eta * rp_ - ak_ * w_times(ds) + eta * (ak_ * w2(rdk_));
    rhs0.tail(nf) = eta * rdf_;
    rhs1.head(m) = p_.b + ak_ * w2(ck_);
    rhs1.tail(nf) = cf_;
    const Vector u0 = solve_kkt(rhs0);
    const Vector u1 = solve_kkt(rhs1);

    const Vector y0 = u0.head(m), y1 = u1.head(m);
    const Vector xf0 = u0.tail(nf), xf1 = u1.tail(nf);
    const Vector z0 = -ak_.transpose() * y0 + eta * rdk_;
    const Vector z1 = -ak_.transpose() * y1 + ck_;
    const Vector xk0 = w_times(ds) - w2(z0);
    const Vector xk1 = -w2(z1);

    const double num = -eta * rg_ - p_.b.dot(y0) + cf_.dot(xf0) + ck_.dot(xk0) + dtk / tau_;
    const double den = p_.b.dot(y1) - cf_.dot(xf1) - ck_.dot(xk1) + kappa_ / tau_;
    Direction d;
    d.tau = num / den;
    d.y = y0 + d.tau * y1;
    d.xf = xf0 + d.tau * xf1;
    d.z = z0 + d.tau * z1;
    d.xk = xk0 + d.tau * xk1;
    d.kappa = (dtk - kappa_ * d.tau) / tau_;
    return d;
  }

  static bool finite(const Direction& d) {
    return d.xf.allFinite() && d.xk.allFinite() && d.y.allFinite() && d.z.allFinite() && std::isfinite(d.tau) &&
           std::isfinite(d.kappa);
  }

  double max_alpha(const Direction& d) const {
    double alpha = std::min(step_to_boundary(xk_, d.xk), step_to_boundary(z_, d.z));
    if (d.tau < 0.0) alpha = std::min(alpha, -tau_ / d.tau);
    if (d.kappa < 0.0) alpha = std::min(alpha, -kappa_ / d.kappa);
    return alpha;
  }

  void residuals() {
    rp_ = af_ * xf_ + ak_ * xk_ - p_.b * tau_;
    rdf_ = -af_.transpose() * y_ + cf_ * tau_;
    rdk_ = -ak_.transpose() * y_ - z_ + ck_ * tau_;
    rg_ = p_.b.dot(y_) - cf_.dot(xf_) - ck_.dot(xk_) - kappa_;
  }

  const ConicProgram& p_;
  ConicOptions opt_;
  std::vector<int> free_, cone_;
  std::vector<Block> blocks_;
  int degree_ = 0;
  Matrix af_, ak_;
  Vector cf_, ck_;

  Vector xf_, xk_, y_, z_;
  double tau_ = 1.0, kappa_ = 1.0;
  Vector rp_, rdf_, rdk_;
  double rg_ = 0.0;
  std::vector<Scaling> scal_;
  Vector lambda_;
  Matrix kkt_;
  Eigen::PartialPivLU<Matrix> lu_;

};

ConicSolution Ipm::run() {
  const auto m = ak_.rows();
  xf_ = Vector::Zero(af_.cols());
  xk_ = identity();
  z_ = identity();
  y_ = Vector::Zero(m);
  tau_ = 1.0;
  kappa_ = 1.0;

  const double b_norm = m > 0 ? p_.b.cwiseAbs().maxCoeff() : 0.0;
  const double c_norm = p_.c.size() > 0 ? p_.c.cwiseAbs().maxCoeff() : 0.0;

  ConicSolution sol;
  sol.status = ConicStatus::MaxIter;
  int iter = 0;
  for (;; ++iter) {
    residuals();

    // Normalized iterate quality.
    const double pres = (af_ * xf_ + ak_ * xk_ - p_.b * tau_).cwiseAbs().maxCoeff() / tau_ / (1.0 + b_norm);
    const double dres_f = cf_.size() ? (rdf_ / tau_).cwiseAbs().maxCoeff() : 0.0;
    const double dres_k = ck_.size() ? (rdk_ / tau_).cwiseAbs().maxCoeff() : 0.0;
    const double dres = std::max(dres_f, dres_k) / (1.0 + c_norm);
    const double pobj = (cf_.dot(xf_) + ck_.dot(xk_)) / tau_;
    const double dobj = p_.b.dot(y_) / tau_;
    const double compl_ = xk_.dot(z_) / (tau_ * tau_);
    const double gap = std::max(std::abs(pobj - dobj), compl_) / (1.0 + std::abs(pobj));
    sol.primal_residual = m > 0 ? pres : 0.0;
    sol.dual_residual = dres;
    sol.gap = gap;
    if (sol.primal_residual <= opt_.tol && dres <= opt_.tol && gap <= opt_.tol) {
      sol.status = ConicStatus::Optimal;
      break;
    }

    // Certificates: b'y > 0 with A'y + z = 0 proves primal infeasibility;
    // c'x < 0 with Ax = 0 proves dual infeasibility (unbounded primal).
    const double by = p_.b.dot(y_);
    if (by > 0.0) {
      const double rf = cf_.size() ? (af_.transpose() * y_).cwiseAbs().maxCoeff() : 0.0;
      const double rk = ck_.size() ? (ak_.transpose() * y_ + z_).cwiseAbs().maxCoeff() : 0.0;
      if (std::max(rf, rk) <= opt_.tol * by) {
        sol.status = ConicStatus::Infeasible;
        break;
      }
    }
    const double cx = cf_.dot(xf_) + ck_.dot(xk_);
    if (cx < 0.0 && m > 0) {
      const double ra = (af_ * xf_ + ak_ * xk_).cwiseAbs().maxCoeff();
      if (ra <= opt_.tol * -cx) {
        sol.status = ConicStatus::Unbounded;
        break;
      }
    }
    if (iter >= opt_.max_iter) break;

    const double mu = (xk_.dot(z_) + tau_ * kappa_) / (degree_ + 1);
    compute_scaling();
    factor();

    // Predictor.
    const Direction aff = direction(1.0, -lambda_, -tau_ * kappa_);
    if (!finite(aff)) break;
    const double alpha_aff = std::min(1.0, max_alpha(aff));
    const double sigma = std::clamp(std::pow(1.0 - alpha_aff, 3), 0.0, 1.0);

    // Corrector.
    const Vector corr = jordan_all(winv_times(aff.xk), w_times(aff.z));
    const Vector target = sigma * mu * identity() - jordan_all(lambda_, lambda_) - corr;
    const Vector ds = jordan_solve_all(lambda_, target);
    const double dtk = sigma * mu - tau_ * kappa_ - aff.tau * aff.kappa;
    const Direction dir = direction(1.0 - sigma, ds, dtk);
    const double alpha = std::min(1.0, 0.99 * max_alpha(dir));
    if (!finite(dir) || !(alpha > 1e-12) || !std::isfinite(alpha)) break;

    xf_ += alpha * dir.xf;
    xk_ += alpha * dir.xk;
    y_ += alpha * dir.y;
    z_ += alpha * dir.z;
    tau_ += alpha * dir.tau;
    kappa_ += alpha * dir.kappa;
  }
  sol.iterations = iter;

  const double scale = sol.status == ConicStatus::Infeasible || sol.status == ConicStatus::Unbounded ? 1.0 : tau_;
  sol.x = Vector::Zero(p_.num_vars());
  sol.z = Vector::Zero(p_.num_vars());
  for (std::size_t j = 0; j < free_.size(); ++j) sol.x[free_[j]] = xf_[static_cast<Eigen::Index>(j)] / scale;
  for (std::size_t j = 0; j < cone_.size(); ++j) {
    sol.x[cone_[j]] = xk_[static_cast<Eigen::Index>(j)] / scale;
    sol.z[cone_[j]] = z_[static_cast<Eigen::Index>(j)] / scale;
  }
  sol.y = y_ / scale;
  return sol;
}

}  // namespace

Matrix nt_scaling(const VectorRef& s, const VectorRef& z) {
  if (s.size() < 2 || s.size() != z.size() || soc_residual(s) <= 0.0 || soc_residual(z) <= 0.0 || s[0] <= 0.0 ||
      z[0] <= 0.0)
    throw Error(ErrorCode::InvalidInput, "NT scaling needs two interior points of one second-order cone");
  const Block blk{ConeKind::SecondOrder, 0, s.size()};
  return dense_w(blk, soc_scaling(s, z));
}

ConicSolution solve_socp(const ConicProgram& program, const ConicOptions& options) {
  program.validate();
  Presolved pre = presolve(program);
  if (pre.infeasible) {
    ConicSolution sol;
    sol.status = ConicStatus::Infeasible;
    sol.x = Vector::Zero(program.num_vars());
    sol.y = Vector::Zero(program.num_rows());
    sol.z = Vector::Zero(program.num_vars());
    return sol;
  }
  const ConicProgram& red = pre.reduced;
  if (red.num_rows() > 0) {
    Eigen::ColPivHouseholderQR<Matrix> qr(red.A.transpose());
    if (qr.rank() < red.num_rows())
      throw Error(ErrorCode::InvalidInput, "equality matrix is rank deficient after presolve (rank " +
                                               std::to_string(qr.rank()) + " < " +
                                               std::to_string(red.num_rows()) + " rows)");
  }

  ConicSolution sol;
  if (red.num_vars() > 0) {
    Ipm ipm(red, options);
    if (ipm.free_columns().cols() > 0) {
      Eigen::ColPivHouseholderQR<Matrix> qr(ipm.free_columns());
      if (qr.rank() < ipm.free_columns().cols())
        throw Error(ErrorCode::InvalidInput, "free variables are not determined by the equality constraints");
    }
    sol = ipm.run();
  } else {
    sol.status = ConicStatus::Optimal;
    sol.x = Vector::Zero(0);
    sol.z = Vector::Zero(0);
    sol.y = Vector::Zero(0);
  }

  // Map back to the original indexing.
  const int n = program.num_vars();
  const int m = program.num_rows();
  Vector x = pre.fixed;
  Vector z = Vector::Zero(n);
  for (std::size_t j = 0; j < pre.var_map.size(); ++j) {
    x[pre.var_map[j]] = sol.x[static_cast<Eigen::Index>(j)];
    z[pre.var_map[j]] = sol.z[static_cast<Eigen::Index>(j)];
  }
  Vector y = Vector::Zero(m);
  for (std::size_t i = 0; i < pre.row_map.size(); ++i) y[pre.row_map[i]] = sol.y[static_cast<Eigen::Index>(i)];
  // Pinned variables keep zero reduced cost; recover their row multipliers in reverse order.
  for (auto it = pre.pins.rbegin(); it != pre.pins.rend(); ++it) {
    const auto [row, var] = *it;
    const double others = program.A.col(var).dot(y) - program.A(row, var) * y[row];
    y[row] = (program.c[var] - others) / program.A(row, var);
  }

  ConicSolution out;
  out.status = sol.status;
  out.iterations = sol.iterations;
  out.x = std::move(x);
  out.y = std::move(y);
  out.z = std::move(z);
  out.objective = program.c.dot(out.x) + program.objective_offset;
  if (out.status == ConicStatus::Optimal || out.status == ConicStatus::MaxIter) {
    const double b_norm = m > 0 ? program.b.cwiseAbs().maxCoeff() : 0.0;
    out.primal_residual = m > 0 ? (program.A * out.x - program.b).cwiseAbs().maxCoeff() / (1.0 + b_norm) : 0.0;
    out.dual_residual = sol.dual_residual;
    out.gap = sol.gap;
  }
  return out;
}

}  // namespace tpmsvm
