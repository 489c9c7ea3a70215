#pragma once

#include <iosfwd>
#include <vector>

#include "tpmsvm/model.hpp"

namespace tpmsvm {

/// (w'x + theta) / ||w||.
double signed_distance(const LinearClassModel& model, const VectorRef& x);
/// (sum_i beta_i k(x^i, x) + theta) / sqrt(beta' K beta).
double signed_distance(const KernelClassModel& model, const VectorRef& x);

/// Distances of one point to every class hyperplane (entry c-1 for class c).
Vector distances(const MulticlassModel& model, const VectorRef& x);
/// Row i holds the distances of sample row i of `X`.
Matrix distance_matrix(const MulticlassModel& model, const MatrixRef& X);

/// Class id chosen from a distance vector; ties go to the smallest id.
int select_class(DecisionRule rule, const VectorRef& d);

int classify_argmin(const MulticlassModel& model, const VectorRef& x);
int classify_argmax(const MulticlassModel& model, const VectorRef& x);
/// Uses the model's own rule.
int classify(const MulticlassModel& model, const VectorRef& x);
std::vector<int> classify_batch(const MulticlassModel& model, const MatrixRef& X);

/// +1 or -1 from sign(d+(x) + d-(x)); a zero sum is +1.
int classify_binary(const BinaryModel& model, const VectorRef& x);

/// Percentage of matching entries.
double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth);

/// CSV with header row,class,label,d_1..d_C; rows are the samples of `X` in order.
void write_predictions_csv(const MulticlassModel& model, const MatrixRef& X, std::ostream& out);

}  // namespace tpmsvm
