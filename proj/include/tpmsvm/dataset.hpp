#pragma once

#include <span>
#include <string>
#include <vector>

#include "tpmsvm/kernels.hpp"

namespace tpmsvm {

/// Labeled samples. Rows of `features` are samples; labels are class ids 1..C.
struct Dataset {
  Matrix features;
  std::vector<int> labels;
  int num_classes = 0;
  std::vector<std::string> label_names;  // optional, index c-1 names class c

  /// Infers C as the largest label when `num_classes` is 0 and validates.
  static Dataset make(Matrix features, std::vector<int> labels, int num_classes = 0);

  int size() const { return static_cast<int>(features.rows()); }
  int dim() const { return static_cast<int>(features.cols()); }
  std::vector<int> class_counts() const;

  /// Throws InvalidInput unless every class 1..C occurs, labels are in range
  /// and all features are finite.
  void validate() const;

  /// Rows `rows` in the given order; keeps C and label names.
  Dataset subset(std::span<const int> rows) const;
};

/// One-versus-all partition for class c.
struct ClassView {
  int c = 0;
  std::vector<int> in_class;  // indices of X_c in dataset order
  std::vector<int> rest;      // indices of X_{-c}
  Matrix Xc;                  // m_c x n
  Matrix Xrest;               // m_{-c} x n

  static ClassView of(const Dataset& data, int c);
  int m_c() const { return static_cast<int>(in_class.size()); }
  int m_rest() const { return static_cast<int>(rest.size()); }
};

}  // namespace tpmsvm
