#pragma once

#include <map>
#include <string>

#include <Eigen/Dense>

namespace tpmsvm {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using VectorRef = Eigen::Ref<const Eigen::VectorXd>;
using MatrixRef = Eigen::Ref<const Eigen::MatrixXd>;

enum class KernelFamily {
  Linear,
  HomogeneousPolynomial,
  InhomogeneousPolynomial,
  Gaussian,
  Sigmoid,
};

/// Order p of the input-space uncertainty ball.
enum class NormOrder { L1, L2, LInf };

std::string to_string(KernelFamily family);
KernelFamily parse_kernel_family(const std::string& name);
std::string to_string(NormOrder p);
NormOrder parse_norm_order(const std::string& name);
/// Hölder conjugate p' with 1/p + 1/p' = 1.
NormOrder dual_norm(NormOrder p);
double norm_of(const VectorRef& v, NormOrder p);

struct KernelSpec {
  KernelFamily family = KernelFamily::Linear;
  int degree = 1;        // polynomial families
  double gamma = 0.0;    // inhomogeneous offset
  double sigma = 1.0;    // gaussian width
  double slope = 1.0;    // sigmoid a
  double intercept = 0.0;  // sigmoid b

  static KernelSpec linear() { return {}; }
  static KernelSpec homogeneous_polynomial(int d) {
    return {KernelFamily::HomogeneousPolynomial, d};
  }
  static KernelSpec inhomogeneous_polynomial(int d, double gamma) {
    return {KernelFamily::InhomogeneousPolynomial, d, gamma};
  }
  static KernelSpec gaussian(double sigma) {
    return {KernelFamily::Gaussian, 1, 0.0, sigma};
  }
  static KernelSpec sigmoid(double a, double b) {
    return {KernelFamily::Sigmoid, 1, 0.0, 1.0, a, b};
  }

  /// Throws InvalidInput when a parameter is out of range.
  void validate() const;

  /// Short human-readable label, e.g. "inhom-poly(d=2,gamma=1.5)".
  std::string label() const;

  /// Flat `kernel.*` key-value fragment used by experiment config files.
  std::map<std::string, std::string> to_key_values() const;
  static KernelSpec from_key_values(const std::map<std::string, std::string>& kv);

  bool operator==(const KernelSpec&) const = default;
};

double eval_kernel(const KernelSpec& spec, const VectorRef& x, const VectorRef& y);

/// Cross Gram matrix between the rows of `a` and the rows of `b`.
Matrix gram(const KernelSpec& spec, const MatrixRef& a, const MatrixRef& b);

/// Symmetric Gram matrix of the rows of `a`; each unordered pair is evaluated once.
Matrix gram(const KernelSpec& spec, const MatrixRef& a);

/// Radius of the input-space l_p ball of radius `eps` in dimension `n`, measured in l_2.
double l2_enclosing_radius(NormOrder p, double eps, int n);

/// Feature-space radius bounding ||phi(x + delta) - phi(x)|| over ||delta||_p <= eps.
/// Only the linear and gaussian families have a closed form; others throw
/// UnsupportedRadiusMapping unless eps == 0.
double feature_radius(const KernelSpec& spec, NormOrder p, double eps, int n);

/// Smallest eigenvalue of a symmetric matrix relative to its largest magnitude eigenvalue.
double relative_min_eigenvalue(const MatrixRef& symmetric);

}  // namespace tpmsvm
