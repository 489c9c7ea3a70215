#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "tpmsvm/conic.hpp"
#include "tpmsvm/dataset.hpp"
#include "tpmsvm/error.hpp"
#include "tpmsvm/model.hpp"
#include "tpmsvm/qp_solver.hpp"

namespace tpmsvm {

struct Hyperparams {
  double nu = 0.5;
  double alpha = 1.0;
  /// Throws InvalidHyperparams unless 0 < nu <= alpha, both finite.
  void validate() const;
};

/// Per-sample radii of the l_p uncertainty balls, indexed like the dataset rows.
/// `feature_eps`, when set, gives the feature-space radii used by kernel models
/// directly; otherwise they are derived from `eps` with feature_radius().
struct UncertaintySpec {
  NormOrder p = NormOrder::L2;
  Vector eps;
  std::optional<Vector> feature_eps;

  static UncertaintySpec uniform(NormOrder p, double eps, int m);
  /// Same radius used as the feature-space radius (no mapping).
  static UncertaintySpec uniform_direct(NormOrder p, double eps, int m);

  void validate(int m) const;
  Vector feature_radii(const KernelSpec& kernel, int n) const;
};

/// Gram matrix of a training set plus a lazily computed jittered Cholesky factor.
struct KernelCache {
  KernelSpec kernel;
  std::shared_ptr<const Matrix> samples;
  Matrix K;
  Matrix L;  // K + jitter I = L L'; empty until factor() is called
  double jitter = 0.0;

  static KernelCache build(const KernelSpec& kernel, const MatrixRef& samples);
  /// Jitter starts at 1e-10 trace/m and grows tenfold up to 1e-4 trace/m;
  /// throws IndefiniteKernel if no shift makes the factorization succeed.
  const Matrix& factor();
};

struct TrainOptions {
  QpOptions qp{1e-10, 0};  // tol relative to the largest dual gradient entry
  ConicOptions conic{1e-10, 200};
  double margin_tol = 1e-8;  // relative to the upper bound alpha/m_c
  KernelCache* cache = nullptr;  // must match the dataset and kernel when set
};

struct LinearClassFit {
  LinearClassModel model;
  QpSolution qp;
  double dual_objective = 0.0;    // full dual value, including the constant term
  double primal_objective = 0.0;  // primal value at the recovered (w, theta)
  std::vector<std::string> warnings;
};

struct KernelClassFit {
  KernelClassModel model;
  QpSolution qp;
  double dual_objective = 0.0;
  double primal_objective = 0.0;
  std::vector<std::string> warnings;
};

struct RobustLinearFit {
  LinearClassModel model;
  ConicSolution solution;
};

struct RobustKernelFit {
  KernelClassModel model;
  ConicSolution solution;
};

/// Raised when the conic solver stops without an optimal solution.
class ConicFailure : public Error {
 public:
  ConicFailure(const std::string& what, ConicProgram program, ConicSolution solution)
      : Error(ErrorCode::SolverFailure, what), program_(std::move(program)), solution_(std::move(solution)) {}
  const ConicProgram& program() const { return program_; }
  const ConicSolution& solution() const { return solution_; }

 private:
  ConicProgram program_;
  ConicSolution solution_;
};

LinearClassFit train_linear_class(const Dataset& data, int c, const Hyperparams& h,
                                  const TrainOptions& options = {});

KernelClassFit train_kernel_class(const Dataset& data, int c, const Hyperparams& h, const KernelSpec& kernel,
                                  const TrainOptions& options = {});

RobustLinearFit train_robust_linear_class(const Dataset& data, int c, const Hyperparams& h,
                                          const UncertaintySpec& u, const TrainOptions& options = {});

RobustKernelFit train_robust_kernel_class(const Dataset& data, int c, const Hyperparams& h,
                                          const KernelSpec& kernel, const UncertaintySpec& u,
                                          const TrainOptions& options = {});

/// Conic encodings used by the robust trainers, exposed for inspection and cross-checking.
ConicProgram robust_linear_program(const Dataset& data, int c, const Hyperparams& h, const UncertaintySpec& u);
ConicProgram robust_kernel_program(const Dataset& data, int c, const Hyperparams& h, const Matrix& K,
                                   const Matrix& L, const Vector& feature_eps);

struct BinaryFit {
  BinaryModel model;
  double positive_primal = 0.0, positive_dual = 0.0;
  double negative_primal = 0.0, negative_dual = 0.0;
  std::vector<std::string> warnings;
};

/// Two-class problem; class 1 is the positive class, class 2 the negative one.
BinaryFit train_binary(const Dataset& data, const Hyperparams& h_pos, const Hyperparams& h_neg,
                       const std::optional<KernelSpec>& kernel = std::nullopt, const TrainOptions& options = {});

MulticlassModel train_multiclass(const Dataset& data, const Hyperparams& h,
                                 const std::optional<KernelSpec>& kernel,
                                 const std::optional<UncertaintySpec>& uncertainty, DecisionRule rule,
                                 const TrainOptions& options = {});

/// Primal objective of the (robust) linear class model with slacks taken pointwise.
/// A null `u` means the deterministic model.
double linear_primal_objective(const Dataset& data, int c, const Hyperparams& h, const VectorRef& w,
                               double theta, const UncertaintySpec* u = nullptr);

/// Kernel analogue over beta; a null `feature_eps` means the deterministic model.
double kernel_primal_objective(const Dataset& data, int c, const Hyperparams& h, const Matrix& K,
                               const VectorRef& beta, double theta, const Vector* feature_eps = nullptr);

/// Squared feature-space norm of a class model by the four-term block expansion.
double kernel_norm_expansion(const Matrix& K, const ClassView& view, const VectorRef& beta);

/// Intercept minimizing nu*theta + (alpha/m_c) sum max(0, -(g_i + theta)): the midpoint
/// of the optimal interval (its finite end when the interval is unbounded).
double optimal_intercept(const VectorRef& g, double nu, double alpha);

}  // namespace tpmsvm
