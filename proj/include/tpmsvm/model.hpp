#pragma once

#include <memory>
#include <string>
#include <vector>

#include "tpmsvm/kernels.hpp"

namespace tpmsvm {

/// Hyperplane w'x + theta = 0.
struct LinearClassModel {
  Vector w;
  double theta = 0.0;
  double norm_w = 0.0;

  /// Caches ||w||; throws DegenerateClassifier when w is (numerically) zero or not finite.
  static LinearClassModel make(Vector w, double theta);

  double response(const VectorRef& x) const { return w.dot(x) + theta; }
};

/// Feature-space hyperplane sum_i beta_i k(x^i, x) + theta = 0 over stored training samples.
struct KernelClassModel {
  Vector beta;
  double theta = 0.0;
  double norm_h = 0.0;  // sqrt(beta' K beta)
  KernelSpec kernel;
  std::shared_ptr<const Matrix> samples;  // m x n, rows aligned with beta

  /// Computes norm_h from the Gram matrix of `samples` (or the one supplied).
  static KernelClassModel make(Vector beta, double theta, const KernelSpec& kernel,
                               std::shared_ptr<const Matrix> samples, const Matrix* gram = nullptr);

  double response(const VectorRef& x) const;
};

enum class DecisionRule { Argmin, Argmax };

std::string to_string(DecisionRule rule);
DecisionRule parse_decision_rule(const std::string& name);

struct Provenance {
  bool robust = false;
  NormOrder p = NormOrder::L2;
  double eps = 0.0;
  bool operator==(const Provenance&) const = default;
};

/// One class model per class id; either all linear or all kernel.
struct MulticlassModel {
  std::vector<LinearClassModel> linear;
  std::vector<KernelClassModel> kernel;
  DecisionRule rule = DecisionRule::Argmin;
  Provenance provenance;
  std::vector<std::string> label_names;

  bool is_kernel() const { return !kernel.empty(); }
  int num_classes() const { return static_cast<int>(is_kernel() ? kernel.size() : linear.size()); }
  int dim() const;
  /// Throws InvalidInput if models are mixed, missing, or of inconsistent dimension.
  void validate() const;
};

/// Binary pair in the two-hyperplane sign convention: class model 0 is H+, class model 1 is H-.
/// A point is positive when d+(x) + d-(x) >= 0.
struct BinaryModel {
  MulticlassModel hyperplanes;
};

}  // namespace tpmsvm
