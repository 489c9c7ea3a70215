#include <algorithm>

#include "tpmsvm/dataset.hpp"
#include "tpmsvm/error.hpp"

namespace tpmsvm {

Dataset Dataset::make(Matrix features, std::vector<int> labels, int num_classes) {
  Dataset d;
  d.features = std::move(features);
  d.labels = std::move(labels);
  d.num_classes = num_classes > 0 ? num_classes
                                  : (d.labels.empty() ? 0 : *std::max_element(d.labels.begin(), d.labels.end()));
  d.validate();
  return d;
}

std::vector<int> Dataset::class_counts() const {
  std::vector<int> counts(static_cast<std::size_t>(std::max(num_classes, 0)), 0);
  for (int y : labels)
    if (y >= 1 && y <= num_classes) ++counts[static_cast<std::size_t>(y - 1)];
  return counts;
}

void Dataset::validate() const {
  if (static_cast<int>(labels.size()) != size())
    throw Error(ErrorCode::InvalidInput, "dataset has " + std::to_string(size()) + " rows but " +
                                             std::to_string(labels.size()) + " labels");
  if (size() == 0) throw Error(ErrorCode::InvalidInput, "dataset is empty");
  if (num_classes < 1) throw Error(ErrorCode::InvalidInput, "dataset has no classes");
  for (std::size_t i = 0; i < labels.size(); ++i)
    if (labels[i] < 1 || labels[i] > num_classes)
      throw Error(ErrorCode::InvalidInput, "label " + std::to_string(labels[i]) + " at row " + std::to_string(i) +
                                               " outside 1.." + std::to_string(num_classes));
  const auto counts = class_counts();
  for (int c = 1; c <= num_classes; ++c)
    if (counts[static_cast<std::size_t>(c - 1)] == 0)
      throw Error(ErrorCode::InvalidInput, "class " + std::to_string(c) + " has no samples");
  if (!features.allFinite()) throw Error(ErrorCode::InvalidInput, "dataset contains non-finite features");
}

Dataset Dataset::subset(std::span<const int> rows) const {
  Dataset d;
  d.features.resize(static_cast<Eigen::Index>(rows.size()), features.cols());
  d.labels.reserve(rows.size());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const int r = rows[i];
    if (r < 0 || r >= size()) throw Error(ErrorCode::InvalidInput, "subset row out of range");
    d.features.row(static_cast<Eigen::Index>(i)) = features.row(r);
    d.labels.push_back(labels[static_cast<std::size_t>(r)]);
  }
  d.num_classes = num_classes;
  d.label_names = label_names;
  return d;
}

ClassView ClassView::of(const Dataset& data, int c) {
  if (c < 1 || c > data.num_classes)
    throw Error(ErrorCode::InvalidInput, "class " + std::to_string(c) + " outside 1.." +
                                             std::to_string(data.num_classes));
  ClassView v;
  v.c = c;
  for (int i = 0; i < data.size(); ++i) (data.labels[static_cast<std::size_t>(i)] == c ? v.in_class : v.rest).push_back(i);
  if (v.in_class.empty()) throw Error(ErrorCode::InvalidInput, "class " + std::to_string(c) + " has no samples");
  if (v.rest.empty()) throw Error(ErrorCode::InvalidInput, "class " + std::to_string(c) + " has no opposing samples");
  v.Xc = data.features(v.in_class, Eigen::all);
  v.Xrest = data.features(v.rest, Eigen::all);
  return v;
}

}  // namespace tpmsvm
