#include <cmath>

#include "tpmsvm/error.hpp"
#include "tpmsvm/model.hpp"

namespace tpmsvm {

namespace {
constexpr double kDegenerateNorm = 1e-12;
}

LinearClassModel LinearClassModel::make(Vector w, double theta) {
  if (!w.allFinite() || !std::isfinite(theta))
    throw Error(ErrorCode::DegenerateClassifier, "hyperplane has non-finite parameters");
  LinearClassModel m;
  m.norm_w = w.norm();
  if (!(m.norm_w > kDegenerateNorm))
    throw Error(ErrorCode::DegenerateClassifier, "normal vector vanishes (||w|| = " + std::to_string(m.norm_w) + ")");
  m.w = std::move(w);
  m.theta = theta;
  return m;
}

KernelClassModel KernelClassModel::make(Vector beta, double theta, const KernelSpec& kernel,
                                        std::shared_ptr<const Matrix> samples, const Matrix* gram_matrix) {
  if (!samples || samples->rows() != beta.size())
    throw Error(ErrorCode::InvalidInput, "kernel model needs one coefficient per stored sample");
  if (!beta.allFinite() || !std::isfinite(theta))
    throw Error(ErrorCode::DegenerateClassifier, "kernel model has non-finite parameters");
  KernelClassModel m;
  double sq = 0.0;
  if (gram_matrix) {
    sq = beta.dot(*gram_matrix * beta);
  } else {
    sq = beta.dot(gram(kernel, *samples) * beta);
  }
  if (!(sq > kDegenerateNorm * kDegenerateNorm))
    throw Error(ErrorCode::DegenerateClassifier,
                "feature-space normal vanishes (beta'K beta = " + std::to_string(sq) + ")");
  m.norm_h = std::sqrt(sq);
  m.beta = std::move(beta);
  m.theta = theta;
  m.kernel = kernel;
  m.samples = std::move(samples);
  return m;
}

double KernelClassModel::response(const VectorRef& x) const {
  double s = theta;
  for (Eigen::Index i = 0; i < beta.size(); ++i) s += beta[i] * eval_kernel(kernel, samples->row(i).transpose(), x);
  return s;
}

std::string to_string(DecisionRule rule) { return rule == DecisionRule::Argmin ? "argmin" : "argmax"; }

DecisionRule parse_decision_rule(const std::string& name) {
  if (name == "argmin") return DecisionRule::Argmin;
  if (name == "argmax") return DecisionRule::Argmax;
  throw Error(ErrorCode::InvalidInput, "decision rule must be argmin or argmax, got '" + name + "'");
}

int MulticlassModel::dim() const {
  if (is_kernel()) return static_cast<int>(kernel.front().samples->cols());
  return linear.empty() ? 0 : static_cast<int>(linear.front().w.size());
}

void MulticlassModel::validate() const {
  if (!linear.empty() && !kernel.empty())
    throw Error(ErrorCode::InvalidInput, "model mixes linear and kernel class models");
  if (num_classes() < 2) throw Error(ErrorCode::InvalidInput, "model needs at least two class models");
  const int n = dim();
  for (const auto& m : linear)
    if (m.w.size() != n) throw Error(ErrorCode::InvalidInput, "class models disagree on the feature dimension");
  for (const auto& m : kernel)
    if (!m.samples || m.samples->cols() != n || m.samples->rows() != m.beta.size())
      throw Error(ErrorCode::InvalidInput, "kernel class model has inconsistent training samples");
  if (!label_names.empty() && static_cast<int>(label_names.size()) != num_classes())
    throw Error(ErrorCode::InvalidInput, "label names do not match the number of classes");
}

}  // namespace tpmsvm
