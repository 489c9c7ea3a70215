#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tpmsvm/kernels.hpp"

namespace tpmsvm {

enum class ConeKind { Free, NonNeg, SecondOrder };

/// SecondOrder(d): x0 >= ||(x1, ..., x_{d-1})||_2.
struct ConeBlock {
  ConeKind kind = ConeKind::Free;
  int dim = 0;
  bool operator==(const ConeBlock&) const = default;
};

/// minimize c'x + offset  s.t.  A x = b,  x in K1 x K2 x ... (blocks in order).
struct ConicProgram {
  Vector c;
  Matrix A;
  Vector b;
  std::vector<ConeBlock> cones;
  double objective_offset = 0.0;

  int num_vars() const { return static_cast<int>(c.size()); }
  int num_rows() const { return static_cast<int>(b.size()); }
  /// Throws InvalidInput on inconsistent shapes or cone partition.
  void validate() const;
};

enum class ConicStatus { Optimal, Infeasible, Unbounded, MaxIter };

std::string to_string(ConicStatus status);

struct ConicSolution {
  Vector x;
  Vector y;  // equality multipliers
  Vector z;  // dual cone slack, c - A'y (zero on free variables)
  double objective = 0.0;  // c'x + offset
  double primal_residual = 0.0;  // ||Ax - b||_inf / (1 + ||b||_inf)
  double dual_residual = 0.0;    // ||A'y + z - c||_inf / (1 + ||c||_inf)
  double gap = 0.0;              // max(|c'x - b'y|, x'z) / (1 + |c'x|)
  int iterations = 0;
  ConicStatus status = ConicStatus::MaxIter;
};

struct ConicOptions {
  double tol = 1e-8;
  int max_iter = 200;
};

/// Primal-dual interior point method on the homogeneous self-dual embedding
/// with Nesterov-Todd scaling. Presolve drops zero/duplicate rows and fixes
/// free or nonnegative variables pinned by singleton equalities. Throws
/// InvalidInput if the remaining equality matrix is rank deficient.
ConicSolution solve_socp(const ConicProgram& program, const ConicOptions& options = {});

/// Dense Nesterov-Todd scaling W of one second-order block for interior s, z:
/// symmetric, with W z = W^{-1} s.
Matrix nt_scaling(const VectorRef& s, const VectorRef& z);

/// Largest violation of cone membership of `x` (0 when inside).
double cone_violation(const ConicProgram& program, const VectorRef& x);

using LinearExpr = std::vector<std::pair<int, double>>;

/// Incremental construction of a ConicProgram. Variables are allocated
/// block by block, so indices returned by add_block are contiguous.
class ConicBuilder {
 public:
  int add_block(ConeKind kind, int dim);
  int num_vars() const { return num_vars_; }
  void add_cost(int var, double coef);
  void add_cost(const LinearExpr& expr, double scale);
  void add_objective_constant(double value) { offset_ += value; }
  void add_row(LinearExpr terms, double rhs);
  ConicProgram build() const;

 private:
  std::vector<ConeBlock> blocks_;
  int num_vars_ = 0;
  std::vector<double> cost_;
  std::vector<std::pair<LinearExpr, double>> rows_;
  double offset_ = 0.0;
};

/// Epigraph gadget for ||w||_norm over the variables `w`. Returns a linear
/// expression that upper-bounds the norm and is tight at any optimum that
/// minimizes it:
///   l_inf: scalar s >= 0 with s >= +-w_j,
///   l_1:   s_j >= 0 with s_j >= +-w_j, expression sum_j s_j,
///   l_2:   one SecondOrder block (t, r) with r = w, expression t.
LinearExpr encode_norm_epigraph(ConicBuilder& builder, std::span<const int> w, NormOrder norm);

/// Plain-text interchange format (see README) for cross-checking against other solvers.
void write_conic_text(const ConicProgram& program, std::ostream& out);
ConicProgram read_conic_text(std::istream& in);

}  // namespace tpmsvm
