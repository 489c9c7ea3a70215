#include <algorithm>
#include <cmath>
#include <numeric>

#include "tpmsvm/trainer.hpp"

namespace tpmsvm {

void Hyperparams::validate() const {
  if (!std::isfinite(nu) || !std::isfinite(alpha) || !(nu > 0.0) || !(alpha > 0.0))
    throw Error(ErrorCode::InvalidHyperparams, "nu and alpha must be finite and positive");
  if (nu > alpha)
    throw Error(ErrorCode::InvalidHyperparams,
                "nu = " + std::to_string(nu) + " exceeds alpha = " + std::to_string(alpha));
}

UncertaintySpec UncertaintySpec::uniform(NormOrder p, double eps, int m) {
  UncertaintySpec u;
  u.p = p;
  u.eps = Vector::Constant(m, eps);
  return u;
}

UncertaintySpec UncertaintySpec::uniform_direct(NormOrder p, double eps, int m) {
  UncertaintySpec u = uniform(p, eps, m);
  u.feature_eps = u.eps;
  return u;
}

void UncertaintySpec::validate(int m) const {
  if (eps.size() != m)
    throw Error(ErrorCode::InvalidInput, "uncertainty radii: expected " + std::to_string(m) + ", got " +
                                             std::to_string(eps.size()));
  if (!eps.allFinite() || (m > 0 && eps.minCoeff() < 0.0))
    throw Error(ErrorCode::InvalidInput, "uncertainty radii must be finite and nonnegative");
  if (feature_eps) {
    if (feature_eps->size() != m || !feature_eps->allFinite() || (m > 0 && feature_eps->minCoeff() < 0.0))
      throw Error(ErrorCode::InvalidInput, "feature-space radii must be finite, nonnegative, one per sample");
    for (int i = 0; i < m; ++i)
      if (eps[i] == 0.0 && (*feature_eps)[i] != 0.0)
        throw Error(ErrorCode::InvalidInput, "feature-space radius must vanish where the input radius does");
  }
}

Vector UncertaintySpec::feature_radii(const KernelSpec& kernel, int n) const {
  if (feature_eps) return *feature_eps;
  Vector out(eps.size());
  for (Eigen::Index i = 0; i < eps.size(); ++i) out[i] = feature_radius(kernel, p, eps[i], n);
  return out;
}

KernelCache KernelCache::build(const KernelSpec& kernel, const MatrixRef& samples) {
  KernelCache cache;
  cache.kernel = kernel;
  cache.samples = std::make_shared<const Matrix>(samples);
  cache.K = gram(kernel, samples);
  return cache;
}

const Matrix& KernelCache::factor() {
  if (L.size() > 0 || K.rows() == 0) return L;
  const auto m = K.rows();
  const double scale = std::abs(K.trace()) / static_cast<double>(m);
  const double base = scale > 0.0 ? scale : 1.0;
  for (double shift = 1e-10 * base; shift <= 1e-4 * base * (1.0 + 1e-12); shift *= 10.0) {
    Matrix shifted = K;
    shifted.diagonal().array() += shift;
    Eigen::LLT<Matrix> llt(shifted);
    if (llt.info() != Eigen::Success) continue;
    Matrix lower = llt.matrixL();
    if (!lower.allFinite() || lower.diagonal().minCoeff() <= 0.0) continue;
    L = std::move(lower);
    jitter = shift;
    return L;
  }
  throw Error(ErrorCode::IndefiniteKernel,
              "Gram matrix of " + kernel.label() + " is not positive semidefinite within the jitter schedule");
}

double optimal_intercept(const VectorRef& g, double nu, double alpha) {
  const auto m = g.size();
  if (m == 0) return 0.0;
  std::vector<double> a(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) a[static_cast<std::size_t>(i)] = -g[i];
  std::sort(a.begin(), a.end(), std::greater<>());
  auto nth = [&](long k) { return a[static_cast<std::size_t>(k - 1)]; };  // 1-based, descending

  const double target = nu * static_cast<double>(m) / alpha;
  const double slack = 1e-9 * std::max(1.0, target);
  if (target >= static_cast<double>(m) - slack) return nth(m);
  const long nearest = std::lround(target);
  if (nearest >= 1 && std::abs(target - static_cast<double>(nearest)) <= slack)
    return 0.5 * (nth(nearest) + nth(nearest + 1));
  return nth(static_cast<long>(std::ceil(target)));
}

namespace {

std::string strip_code(const Error& e) {
  std::string what = e.what();
  const std::string prefix = std::string(to_string(e.code())) + ": ";
  return what.rfind(prefix, 0) == 0 ? what.substr(prefix.size()) : what;
}

// The tolerance is taken relative to the size of the dual gradient.
QpSolution solve_class_qp(const QpProblem& qp, const QpOptions& options) {
  QpOptions scaled = options;
  const double grad = qp.q.cwiseAbs().maxCoeff() + qp.nu * qp.Q.cwiseAbs().maxCoeff();
  if (grad > 0.0) scaled.tol = options.tol * grad;
  try {
    return solve_box_simplex_qp(qp, scaled);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Infeasible) throw Error(ErrorCode::InvalidHyperparams, strip_code(e));
    throw;
  }
}

// Intercept from the interior multipliers; the optimal interval midpoint when none are interior.
double recover_intercept(const Vector& g, const Vector& lambda, const Hyperparams& h, double ub,
                         double margin_tol, std::vector<std::string>& warnings) {
  const double margin = margin_tol * ub;
  double sum = 0.0;
  int count = 0;
  for (Eigen::Index i = 0; i < lambda.size(); ++i) {
    if (lambda[i] > margin && lambda[i] < ub - margin) {
      sum -= g[i];
      ++count;
    }
  }
  if (count > 0) return sum / count;
  warnings.push_back("no multiplier strictly inside its bounds; intercept taken from the optimal interval");
  return optimal_intercept(g, h.nu, h.alpha);
}

void note_qp(const QpSolution& sol, std::vector<std::string>& warnings) {
  warnings.insert(warnings.end(), sol.warnings.begin(), sol.warnings.end());
  if (sol.status != QpStatus::Optimal)
    warnings.push_back("QP stopped with status " + to_string(sol.status) + ", KKT residual " +
                       std::to_string(sol.kkt_residual));
}

std::shared_ptr<const Matrix> shared_samples(const Dataset& data, const TrainOptions& options) {
  if (options.cache && options.cache->samples) return options.cache->samples;
  return std::make_shared<const Matrix>(data.features);
}

void check_cache(const Dataset& data, const KernelSpec& kernel, const KernelCache& cache) {
  if (!(cache.kernel == kernel) || cache.K.rows() != data.size())
    throw Error(ErrorCode::InvalidInput, "kernel cache does not match the training data or kernel");
}

// w is a difference of two terms; when they cancel to solver precision the optimum is w = 0.
void check_cancellation(double norm, double positive_part, double negative_part) {
  if (norm <= 1e-6 * (positive_part + negative_part))
    throw Error(ErrorCode::DegenerateClassifier, "normal vector cancels to zero (norm " + std::to_string(norm) +
                                                     " against terms of size " +
                                                     std::to_string(positive_part + negative_part) + ")");
}

bool acceptable(const ConicSolution& sol) {
  if (sol.status == ConicStatus::Optimal) return true;
  return sol.status == ConicStatus::MaxIter && sol.primal_residual <= 1e-6 && sol.dual_residual <= 1e-6 &&
         sol.gap <= 1e-6;
}

struct RobustLinearLayout {
  int w = 0;
  int theta = 0;
};

ConicProgram build_robust_linear(const Dataset& data, int c, const Hyperparams& h, const UncertaintySpec& u,
                                 RobustLinearLayout& layout) {
  const ClassView view = ClassView::of(data, c);
  const int n = data.dim();
  const int mc = view.m_c();
  const double coef = h.nu / view.m_rest();

  ConicBuilder b;
  const int t = b.add_block(ConeKind::SecondOrder, n + 1);
  const int w = t + 1;
  const int g = b.add_block(ConeKind::SecondOrder, 3);  // (u, t, v)
  const int theta = b.add_block(ConeKind::Free, 1);
  const int xi = b.add_block(ConeKind::NonNeg, mc);
  const int sigma = b.add_block(ConeKind::NonNeg, mc);
  b.add_row({{g + 1, 1.0}, {t, -1.0}}, 0.0);
  b.add_row({{g, 1.0}, {g + 2, 1.0}}, 1.0);

  LinearExpr term;
  const bool any_eps = u.eps.size() > 0 && u.eps.maxCoeff() > 0.0;
  if (any_eps) {
    const NormOrder dual = dual_norm(u.p);
    if (dual == NormOrder::L2) {
      term = {{t, 1.0}};
    } else {
      std::vector<int> widx(static_cast<std::size_t>(n));
      std::iota(widx.begin(), widx.end(), w);
      term = encode_norm_epigraph(b, widx, dual);
    }
  }

  for (int k = 0; k < mc; ++k) {
    const int i = view.in_class[static_cast<std::size_t>(k)];
    LinearExpr row;
    for (int j = 0; j < n; ++j) row.emplace_back(w + j, data.features(i, j));
    row.emplace_back(theta, 1.0);
    for (const auto& [var, a] : term) row.emplace_back(var, -u.eps[i] * a);
    row.emplace_back(xi + k, 1.0);
    row.emplace_back(sigma + k, -1.0);
    b.add_row(std::move(row), 0.0);
  }

  b.add_cost(g, 0.5);
  b.add_cost(g + 2, -0.5);
  const Vector s = view.Xrest.colwise().sum().transpose();
  for (int j = 0; j < n; ++j) b.add_cost(w + j, coef * s[j]);
  double eps_sum = 0.0;
  for (int i : view.rest) eps_sum += u.eps[i];
  if (!term.empty()) b.add_cost(term, coef * eps_sum);
  b.add_cost(theta, h.nu);
  for (int k = 0; k < mc; ++k) b.add_cost(xi + k, h.alpha / mc);

  layout.w = w;
  layout.theta = theta;
  return b.build();
}

struct RobustKernelLayout {
  int beta = 0;
  int theta = 0;
};

ConicProgram build_robust_kernel(const Dataset& data, int c, const Hyperparams& h, const Matrix& K, const Matrix& L,
                                 const Vector& feps, RobustKernelLayout& layout) {
  const ClassView view = ClassView::of(data, c);
  const int m = data.size();
  const int mc = view.m_c();
  const double coef = h.nu / view.m_rest();

  ConicBuilder b;
  const int beta = b.add_block(ConeKind::Free, m);
  const int theta = b.add_block(ConeKind::Free, 1);
  const int t = b.add_block(ConeKind::SecondOrder, m + 1);
  const int r = t + 1;
  const int g = b.add_block(ConeKind::SecondOrder, 3);
  const int xi = b.add_block(ConeKind::NonNeg, mc);
  const int sigma = b.add_block(ConeKind::NonNeg, mc);

  for (int i : view.rest) b.add_row({{beta + i, 1.0}}, -coef);
  // r = L' beta, so ||r|| = sqrt(beta' (K + jitter) beta).
  for (int k = 0; k < m; ++k) {
    LinearExpr row{{r + k, 1.0}};
    for (int j = k; j < m; ++j)
      if (L(j, k) != 0.0) row.emplace_back(beta + j, -L(j, k));
    b.add_row(std::move(row), 0.0);
  }
  b.add_row({{g + 1, 1.0}, {t, -1.0}}, 0.0);
  b.add_row({{g, 1.0}, {g + 2, 1.0}}, 1.0);

  for (int k = 0; k < mc; ++k) {
    const int i = view.in_class[static_cast<std::size_t>(k)];
    LinearExpr row{{theta, 1.0}};
    if (feps[i] != 0.0) row.emplace_back(t, -feps[i]);
    for (int j = 0; j < m; ++j) row.emplace_back(beta + j, K(i, j));
    row.emplace_back(xi + k, 1.0);
    row.emplace_back(sigma + k, -1.0);
    b.add_row(std::move(row), 0.0);
  }

  b.add_cost(g, 0.5);
  b.add_cost(g + 2, -0.5);
  double feps_sum = 0.0;
  Vector ksum = Vector::Zero(m);
  for (int i : view.rest) {
    feps_sum += feps[i];
    ksum += K.row(i).transpose();
  }
  if (feps_sum != 0.0) b.add_cost(t, coef * feps_sum);
  for (int j = 0; j < m; ++j) b.add_cost(beta + j, coef * ksum[j]);
  b.add_cost(theta, h.nu);
  for (int k = 0; k < mc; ++k) b.add_cost(xi + k, h.alpha / mc);

  layout.beta = beta;
  layout.theta = theta;
  return b.build();
}

}  // namespace

LinearClassFit train_linear_class(const Dataset& data, int c, const Hyperparams& h, const TrainOptions& options) {
  data.validate();
  h.validate();
  const ClassView view = ClassView::of(data, c);
  const double coef = h.nu / view.m_rest();
  const Vector s = view.Xrest.colwise().sum().transpose();

  QpProblem qp;
  qp.Q = view.Xc * view.Xc.transpose();
  qp.q = coef * (view.Xc * s);
  qp.nu = h.nu;
  qp.ub = h.alpha / view.m_c();

  LinearClassFit fit;
  fit.qp = solve_class_qp(qp, options.qp);
  note_qp(fit.qp, fit.warnings);
  const Vector pull = view.Xc.transpose() * fit.qp.lambda;
  Vector w = pull - coef * s;
  check_cancellation(w.norm(), pull.norm(), coef * s.norm());
  const Vector g = view.Xc * w;
  const double theta = recover_intercept(g, fit.qp.lambda, h, qp.ub, options.margin_tol, fit.warnings);
  fit.model = LinearClassModel::make(std::move(w), theta);
  fit.dual_objective = fit.qp.objective - 0.5 * coef * coef * s.squaredNorm();
  fit.primal_objective = linear_primal_objective(data, c, h, fit.model.w, fit.model.theta);
  return fit;
}

KernelClassFit train_kernel_class(const Dataset& data, int c, const Hyperparams& h, const KernelSpec& kernel,
                                  const TrainOptions& options) {
  data.validate();
  h.validate();
  kernel.validate();
  Matrix local;
  const Matrix* K = nullptr;
  if (options.cache) {
    check_cache(data, kernel, *options.cache);
    K = &options.cache->K;
  } else {
    local = gram(kernel, data.features);
    K = &local;
  }
  const ClassView view = ClassView::of(data, c);
  const double coef = h.nu / view.m_rest();
  const Matrix Kcr = (*K)(view.in_class, view.rest);

  QpProblem qp;
  qp.Q = (*K)(view.in_class, view.in_class);
  qp.q = coef * Kcr.rowwise().sum();
  qp.nu = h.nu;
  qp.ub = h.alpha / view.m_c();

  KernelClassFit fit;
  fit.qp = solve_class_qp(qp, options.qp);
  note_qp(fit.qp, fit.warnings);

  Vector beta(data.size());
  for (int k = 0; k < view.m_c(); ++k) beta[view.in_class[static_cast<std::size_t>(k)]] = fit.qp.lambda[k];
  for (int i : view.rest) beta[i] = -coef;
  const Matrix Krr = (*K)(view.rest, view.rest);
  check_cancellation(std::sqrt(std::max(beta.dot(*K * beta), 0.0)),
                     std::sqrt(std::max(fit.qp.lambda.dot(qp.Q * fit.qp.lambda), 0.0)),
                     coef * std::sqrt(std::max(Krr.sum(), 0.0)));
  const Vector g = (*K)(view.in_class, Eigen::all) * beta;
  const double theta = recover_intercept(g, fit.qp.lambda, h, qp.ub, options.margin_tol, fit.warnings);
  fit.model = KernelClassModel::make(std::move(beta), theta, kernel, shared_samples(data, options), K);
  fit.dual_objective = fit.qp.objective - 0.5 * coef * coef * Krr.sum();
  fit.primal_objective = kernel_primal_objective(data, c, h, *K, fit.model.beta, fit.model.theta);
  return fit;
}

ConicProgram robust_linear_program(const Dataset& data, int c, const Hyperparams& h, const UncertaintySpec& u) {
  data.validate();
  h.validate();
  u.validate(data.size());
  RobustLinearLayout layout;
  return build_robust_linear(data, c, h, u, layout);
}

ConicProgram robust_kernel_program(const Dataset& data, int c, const Hyperparams& h, const Matrix& K,
                                   const Matrix& L, const Vector& feature_eps) {
  data.validate();
  h.validate();
  RobustKernelLayout layout;
  return build_robust_kernel(data, c, h, K, L, feature_eps, layout);
}

RobustLinearFit train_robust_linear_class(const Dataset& data, int c, const Hyperparams& h,
                                          const UncertaintySpec& u, const TrainOptions& options) {
  data.validate();
  h.validate();
  u.validate(data.size());
  RobustLinearLayout layout;
  ConicProgram program = build_robust_linear(data, c, h, u, layout);
  ConicSolution sol = solve_socp(program, options.conic);
  if (!acceptable(sol))
    throw ConicFailure("robust linear program for class " + std::to_string(c) + " ended with status " +
                           to_string(sol.status),
                       std::move(program), std::move(sol));
  RobustLinearFit fit;
  fit.model = LinearClassModel::make(sol.x.segment(layout.w, data.dim()), sol.x[layout.theta]);
  fit.solution = std::move(sol);
  return fit;
}

RobustKernelFit train_robust_kernel_class(const Dataset& data, int c, const Hyperparams& h,
                                          const KernelSpec& kernel, const UncertaintySpec& u,
                                          const TrainOptions& options) {
  data.validate();
  h.validate();
  kernel.validate();
  u.validate(data.size());
  KernelCache local;
  KernelCache* cache = options.cache;
  if (cache) {
    check_cache(data, kernel, *cache);
  } else {
    local = KernelCache::build(kernel, data.features);
    cache = &local;
  }
  const Matrix& L = cache->factor();
  const Vector feps = u.feature_radii(kernel, data.dim());

  RobustKernelLayout layout;
  ConicProgram program = build_robust_kernel(data, c, h, cache->K, L, feps, layout);
  ConicSolution sol = solve_socp(program, options.conic);
  if (!acceptable(sol))
    throw ConicFailure("robust kernel program for class " + std::to_string(c) + " ended with status " +
                           to_string(sol.status),
                       std::move(program), std::move(sol));
  RobustKernelFit fit;
  auto samples = cache->samples ? cache->samples : std::make_shared<const Matrix>(data.features);
  fit.model = KernelClassModel::make(sol.x.segment(layout.beta, data.size()), sol.x[layout.theta], kernel,
                                     std::move(samples), &cache->K);
  fit.solution = std::move(sol);
  return fit;
}

BinaryFit train_binary(const Dataset& data, const Hyperparams& h_pos, const Hyperparams& h_neg,
                       const std::optional<KernelSpec>& kernel, const TrainOptions& options) {
  data.validate();
  if (data.num_classes != 2)
    throw Error(ErrorCode::InvalidInput, "binary training needs exactly two classes, got " +
                                             std::to_string(data.num_classes));
  BinaryFit fit;
  auto& pair = fit.model.hyperplanes;
  pair.label_names = data.label_names;
  if (kernel) {
    KernelCache local;
    TrainOptions opts = options;
    if (!opts.cache) {
      local = KernelCache::build(*kernel, data.features);
      opts.cache = &local;
    }
    KernelClassFit pos = train_kernel_class(data, 1, h_pos, *kernel, opts);
    KernelClassFit neg = train_kernel_class(data, 2, h_neg, *kernel, opts);
    KernelClassModel flipped = neg.model;
    flipped.beta = -flipped.beta;
    flipped.theta = -flipped.theta;
    pair.kernel = {pos.model, flipped};
    fit.positive_primal = pos.primal_objective;
    fit.positive_dual = pos.dual_objective;
    fit.negative_primal = neg.primal_objective;
    fit.negative_dual = neg.dual_objective;
    fit.warnings = pos.warnings;
    fit.warnings.insert(fit.warnings.end(), neg.warnings.begin(), neg.warnings.end());
  } else {
    LinearClassFit pos = train_linear_class(data, 1, h_pos, options);
    LinearClassFit neg = train_linear_class(data, 2, h_neg, options);
    pair.linear = {pos.model, LinearClassModel::make(-neg.model.w, -neg.model.theta)};
    fit.positive_primal = pos.primal_objective;
    fit.positive_dual = pos.dual_objective;
    fit.negative_primal = neg.primal_objective;
    fit.negative_dual = neg.dual_objective;
    fit.warnings = pos.warnings;
    fit.warnings.insert(fit.warnings.end(), neg.warnings.begin(), neg.warnings.end());
  }
  return fit;
}

MulticlassModel train_multiclass(const Dataset& data, const Hyperparams& h, const std::optional<KernelSpec>& kernel,
                                 const std::optional<UncertaintySpec>& uncertainty, DecisionRule rule,
                                 const TrainOptions& options) {
  data.validate();
  h.validate();
  if (data.num_classes < 2) throw Error(ErrorCode::InvalidInput, "need at least two classes");
  if (uncertainty) uncertainty->validate(data.size());

  MulticlassModel model;
  model.rule = rule;
  model.label_names = data.label_names;
  if (uncertainty) {
    model.provenance.robust = true;
    model.provenance.p = uncertainty->p;
    model.provenance.eps = uncertainty->eps.size() > 0 ? uncertainty->eps.maxCoeff() : 0.0;
  }

  KernelCache local;
  TrainOptions opts = options;
  if (kernel && !opts.cache) {
    local = KernelCache::build(*kernel, data.features);
    opts.cache = &local;
  }

  for (int c = 1; c <= data.num_classes; ++c) {
    try {
      if (kernel) {
        model.kernel.push_back(uncertainty ? train_robust_kernel_class(data, c, h, *kernel, *uncertainty, opts).model
                                           : train_kernel_class(data, c, h, *kernel, opts).model);
      } else {
        model.linear.push_back(uncertainty ? train_robust_linear_class(data, c, h, *uncertainty, opts).model
                                           : train_linear_class(data, c, h, opts).model);
      }
    } catch (const Error& e) {
      throw Error(e.code(), "class " + std::to_string(c) + ": " + strip_code(e));
    }
  }
  return model;
}

double linear_primal_objective(const Dataset& data, int c, const Hyperparams& h, const VectorRef& w, double theta,
                               const UncertaintySpec* u) {
  const ClassView view = ClassView::of(data, c);
  const double coef = h.nu / view.m_rest();
  const double term = u ? norm_of(w, dual_norm(u->p)) : 0.0;
  double value = 0.5 * w.squaredNorm() + h.nu * theta;
  for (int i : view.rest) value += coef * (data.features.row(i).dot(w) + (u ? u->eps[i] * term : 0.0));
  double slack = 0.0;
  for (int i : view.in_class) {
    const double margin = data.features.row(i).dot(w) + theta - (u ? u->eps[i] * term : 0.0);
    slack += std::max(0.0, -margin);
  }
  return value + h.alpha / view.m_c() * slack;
}

double kernel_primal_objective(const Dataset& data, int c, const Hyperparams& h, const Matrix& K,
                               const VectorRef& beta, double theta, const Vector* feature_eps) {
  const ClassView view = ClassView::of(data, c);
  const double coef = h.nu / view.m_rest();
  const Vector kb = K * beta;
  const double sq = beta.dot(kb);
  const double nh = std::sqrt(std::max(sq, 0.0));
  double value = 0.5 * sq + h.nu * theta;
  for (int i : view.rest) value += coef * ((feature_eps ? (*feature_eps)[i] * nh : 0.0) + kb[i]);
  double slack = 0.0;
  for (int i : view.in_class) {
    const double margin = theta - (feature_eps ? (*feature_eps)[i] * nh : 0.0) + kb[i];
    slack += std::max(0.0, -margin);
  }
  return value + h.alpha / view.m_c() * slack;
}

double kernel_norm_expansion(const Matrix& K, const ClassView& view, const VectorRef& beta) {
  const Vector lambda = beta(view.in_class);
  const Vector rest = beta(view.rest);
  const Matrix Kcc = K(view.in_class, view.in_class);
  const Matrix Kcr = K(view.in_class, view.rest);
  const Matrix Krr = K(view.rest, view.rest);
  return lambda.dot(Kcc * lambda) + lambda.dot(Kcr * rest) + rest.dot(Kcr.transpose() * lambda) +
         rest.dot(Krr * rest);
}

}  // namespace tpmsvm
