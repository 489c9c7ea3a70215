#include <cmath>
#include <ostream>

#include "tpmsvm/error.hpp"
#include "tpmsvm/predict.hpp"

namespace tpmsvm {

namespace {

void check_dim(Eigen::Index expected, Eigen::Index got) {
  if (expected != got)
    throw Error(ErrorCode::InvalidInput, "expected " + std::to_string(expected) + " features, got " +
                                             std::to_string(got));
}

void check_norm(double norm) {
  if (!(norm > 0.0) || !std::isfinite(norm))
    throw Error(ErrorCode::DegenerateClassifier, "class model has zero or non-finite norm");
}

}  // namespace

double signed_distance(const LinearClassModel& model, const VectorRef& x) {
  check_dim(model.w.size(), x.size());
  check_norm(model.norm_w);
  return model.response(x) / model.norm_w;
}

double signed_distance(const KernelClassModel& model, const VectorRef& x) {
  check_dim(model.samples->cols(), x.size());
  check_norm(model.norm_h);
  return model.response(x) / model.norm_h;
}

Vector distances(const MulticlassModel& model, const VectorRef& x) {
  Vector d(model.num_classes());
  for (int c = 0; c < model.num_classes(); ++c)
    d[c] = model.is_kernel() ? signed_distance(model.kernel[static_cast<std::size_t>(c)], x)
                             : signed_distance(model.linear[static_cast<std::size_t>(c)], x);
  return d;
}

Matrix distance_matrix(const MulticlassModel& model, const MatrixRef& X) {
  const int C = model.num_classes();
  check_dim(model.dim(), X.cols());
  Matrix D(X.rows(), C);
  if (!model.is_kernel()) {
    for (int c = 0; c < C; ++c) {
      const auto& m = model.linear[static_cast<std::size_t>(c)];
      check_norm(m.norm_w);
      D.col(c) = ((X * m.w).array() + m.theta).matrix() / m.norm_w;
    }
    return D;
  }
  // Class models trained together share their samples and kernel; evaluate the cross Gram once.
  const auto& first = model.kernel.front();
  bool shared = true;
  for (const auto& m : model.kernel) shared = shared && m.samples == first.samples && m.kernel == first.kernel;
  Matrix G;
  if (shared) G = gram(first.kernel, X, *first.samples);
  for (int c = 0; c < C; ++c) {
    const auto& m = model.kernel[static_cast<std::size_t>(c)];
    check_norm(m.norm_h);
    const Matrix Gc = shared ? Matrix() : gram(m.kernel, X, *m.samples);
    const Vector r = (shared ? G : Gc) * m.beta;
    D.col(c) = (r.array() + m.theta).matrix() / m.norm_h;
  }
  return D;
}

int select_class(DecisionRule rule, const VectorRef& d) {
  if (d.size() == 0) throw Error(ErrorCode::InvalidInput, "empty distance vector");
  if (!d.allFinite()) throw Error(ErrorCode::DegenerateClassifier, "non-finite class distance");
  int best = 0;
  for (Eigen::Index c = 1; c < d.size(); ++c) {
    const bool better = rule == DecisionRule::Argmin ? std::abs(d[c]) < std::abs(d[best]) : d[c] > d[best];
    if (better) best = static_cast<int>(c);
  }
  return best + 1;
}

int classify_argmin(const MulticlassModel& model, const VectorRef& x) {
  return select_class(DecisionRule::Argmin, distances(model, x));
}

int classify_argmax(const MulticlassModel& model, const VectorRef& x) {
  return select_class(DecisionRule::Argmax, distances(model, x));
}

int classify(const MulticlassModel& model, const VectorRef& x) { return select_class(model.rule, distances(model, x)); }

std::vector<int> classify_batch(const MulticlassModel& model, const MatrixRef& X) {
  const Matrix D = distance_matrix(model, X);
  std::vector<int> out(static_cast<std::size_t>(X.rows()));
  for (Eigen::Index i = 0; i < X.rows(); ++i) out[static_cast<std::size_t>(i)] = select_class(model.rule, D.row(i).transpose());
  return out;
}

int classify_binary(const BinaryModel& model, const VectorRef& x) {
  if (model.hyperplanes.num_classes() != 2)
    throw Error(ErrorCode::InvalidInput, "binary model needs exactly two hyperplanes");
  const Vector d = distances(model.hyperplanes, x);
  return d[0] + d[1] >= 0.0 ? 1 : -1;
}

double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size() || truth.empty())
    throw Error(ErrorCode::InvalidInput, "accuracy needs two nonempty label lists of equal length");
  std::size_t hits = 0;
  for (std::size_t i = 0; i < truth.size(); ++i) hits += predicted[i] == truth[i];
  return 100.0 * static_cast<double>(hits) / static_cast<double>(truth.size());
}

void write_predictions_csv(const MulticlassModel& model, const MatrixRef& X, std::ostream& out) {
  const Matrix D = distance_matrix(model, X);
  const int C = model.num_classes();
  const auto old_prec = out.precision(17);
  out << "row,class,label";
  for (int c = 1; c <= C; ++c) out << ",d_" << c;
  out << '\n';
  for (Eigen::Index i = 0; i < X.rows(); ++i) {
    const int k = select_class(model.rule, D.row(i).transpose());
    out << i << ',' << k << ',';
    if (!model.label_names.empty()) out << model.label_names[static_cast<std::size_t>(k - 1)];
    for (int c = 0; c < C; ++c) out << ',' << D(i, c);
    out << '\n';
  }
  out.precision(old_prec);
}

}  // namespace tpmsvm
