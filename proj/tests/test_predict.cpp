#include <sstream>

#include <doctest.h>

#include "support.hpp"
#include "tpmsvm/error.hpp"
#include "tpmsvm/predict.hpp"
#include "tpmsvm/trainer.hpp"

using namespace tpmsvm;

namespace {

Vector vec(std::initializer_list<double> v) {
  Vector out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out[i++] = x;
  return out;
}

MulticlassModel three_lines() {
  // Fig. 3 style toy: three hyperplanes in the plane.
  MulticlassModel m;
  m.linear = {LinearClassModel::make(vec({1, 0}), -0.2), LinearClassModel::make(vec({0, 1}), -0.8),
              LinearClassModel::make(vec({1, 1}), -1.5)};
  return m;
}

}  // namespace

TEST_CASE("signed distance") {
  const auto m = LinearClassModel::make(vec({3, 4}), -5.0);
  CHECK(signed_distance(m, vec({1, 1})) == doctest::Approx(0.4));
  CHECK(signed_distance(m, vec({1, 0.5})) == doctest::Approx(0.0).scale(1.0));
  CHECK_THROWS_AS(signed_distance(m, vec({1, 1, 1})), Error);
}

TEST_CASE("decision rules and ties") {
  CHECK(select_class(DecisionRule::Argmin, vec({0.1, -0.5, 2.0})) == 1);
  CHECK(select_class(DecisionRule::Argmin, vec({0.3, -0.3, 1})) == 1);
  CHECK(select_class(DecisionRule::Argmax, vec({0.1, -0.5, 2.0})) == 3);
  CHECK(select_class(DecisionRule::Argmax, vec({0.7, 0.7, -1})) == 1);
  CHECK_THROWS_AS(select_class(DecisionRule::Argmin, vec({NAN, 1.0})), Error);
}

TEST_CASE("toy configuration matches brute force") {
  MulticlassModel m = three_lines();
  SplitMix64 rng(61);
  for (int t = 0; t < 500; ++t) {
    const Vector x = vec({rng.uniform(-1, 2), rng.uniform(-1, 2)});
    int arg_min = 1, arg_max = 1;
    double best_abs = INFINITY, best = -INFINITY;
    for (int c = 0; c < 3; ++c) {
      const auto& l = m.linear[static_cast<std::size_t>(c)];
      const double d = (l.w.dot(x) + l.theta) / l.w.norm();
      if (std::abs(d) < best_abs) best_abs = std::abs(d), arg_min = c + 1;
      if (d > best) best = d, arg_max = c + 1;
    }
    CHECK(classify_argmin(m, x) == arg_min);
    CHECK(classify_argmax(m, x) == arg_max);
  }
  // Points on each hyperplane belong to it.
  CHECK(classify_argmin(m, vec({0.2, 3.0})) == 1);
  CHECK(classify_argmin(m, vec({-3.0, 0.8})) == 2);
  CHECK(classify_argmin(m, vec({0.75, 0.75})) == 3);
}

TEST_CASE("classification is scale invariant") {
  SplitMix64 rng(62);
  const Dataset d = testing::random_classes(rng, 30, 3, 3);
  MulticlassModel m = train_multiclass(d, {0.3, 1.0}, std::nullopt, std::nullopt, DecisionRule::Argmin);
  const auto before = classify_batch(m, d.features);
  m.rule = DecisionRule::Argmax;
  const auto before_max = classify_batch(m, d.features);
  for (auto& l : m.linear) l = LinearClassModel::make(l.w * 3.7, l.theta * 3.7);
  CHECK(classify_batch(m, d.features) == before_max);
  m.rule = DecisionRule::Argmin;
  CHECK(classify_batch(m, d.features) == before);
  for (int i = 0; i < d.size(); ++i) CHECK(classify(m, d.features.row(i).transpose()) == before[static_cast<std::size_t>(i)]);
}

TEST_CASE("binary decisions") {
  MulticlassModel pair;
  pair.linear = {LinearClassModel::make(vec({1, 0}), 0.0), LinearClassModel::make(vec({1, 0}), 0.0)};
  CHECK(classify_binary({pair}, vec({0.4, 0})) == 1);
  CHECK(classify_binary({pair}, vec({-0.4, 0})) == -1);
  CHECK(classify_binary({pair}, vec({0.0, 1})) == 1);

  // Mirror-symmetric training set: reflected points get opposite labels.
  Matrix X(6, 2);
  X << 1, 0.2, 2, -0.5, 1.5, 1, -1, 0.2, -2, -0.5, -1.5, 1;
  const Dataset d = Dataset::make(X, {1, 1, 1, 2, 2, 2});
  const BinaryFit f = train_binary(d, {0.5, 1.0}, {0.5, 1.0});
  SplitMix64 rng(63);
  for (int t = 0; t < 200; ++t) {
    const double a = rng.uniform(0.01, 3.0), b = rng.uniform(-2, 2);
    CHECK(classify_binary(f.model, vec({a, b})) == -classify_binary(f.model, vec({-a, b})));
  }
}

TEST_CASE("kernel and linear predictions agree") {
  SplitMix64 rng(64);
  int agree = 0, total = 0;
  for (int t = 0; t < 5; ++t) {
    const Dataset d = testing::random_classes(rng, 45, 3, 3);
    const Dataset test = testing::random_classes(rng, 60, 3, 3);
    try {
      const auto l = train_multiclass(d, {0.3, 1.0}, std::nullopt, std::nullopt, DecisionRule::Argmin);
      const auto k = train_multiclass(d, {0.3, 1.0}, KernelSpec::linear(), std::nullopt, DecisionRule::Argmin);
      const auto a = classify_batch(l, test.features), b = classify_batch(k, test.features);
      for (std::size_t i = 0; i < a.size(); ++i) agree += a[i] == b[i];
      total += static_cast<int>(a.size());
    } catch (const Error&) {
    }
  }
  REQUIRE(total > 0);
  CHECK(agree >= 0.99 * total);
}

TEST_CASE("prediction csv") {
  MulticlassModel m = three_lines();
  m.label_names = {"a", "b", "c"};
  Matrix X(2, 2);
  X << 0.2, 3.0, 0.75, 0.75;
  std::stringstream out;
  write_predictions_csv(m, X, out);
  std::string header, first, second;
  std::getline(out, header);
  std::getline(out, first);
  std::getline(out, second);
  CHECK(header == "row,class,label,d_1,d_2,d_3");
  CHECK(first.rfind("0,1,a,", 0) == 0);
  CHECK(second.rfind("1,3,c,", 0) == 0);
  CHECK(accuracy({1, 2, 3, 3}, {1, 2, 3, 1}) == 75.0);
}
