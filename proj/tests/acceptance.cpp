// One line per acceptance criterion; exit status 1 if any selected criterion fails.
// Usage: acceptance [criterion numbers...]

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>
#include <string>

#include "oracles/qp_oracle.hpp"
#include "oracles/socp_oracle.hpp"
#include "support.hpp"
#include "tpmsvm/bench.hpp"
#include "tpmsvm/error.hpp"
#include "tpmsvm/predict.hpp"
#include "tpmsvm/trainer.hpp"

using namespace tpmsvm;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, ...) __attribute__((format(printf, 1, 2)));
std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  std::vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

ExperimentConfig experiment(const std::string& dataset, DecisionRule rule) {
  ExperimentConfig c;
  c.manifest = std::string(TPMSVM_DATA_DIR) + "/datasets.cfg";
  c.dataset = dataset;
  c.rule = rule;
  return c;
}

bool degenerate(const Error& e) { return e.code() == ErrorCode::DegenerateClassifier; }

Outcome iris_argmin() {
  const auto t0 = std::chrono::steady_clock::now();
  const Summary s = run_repeated_experiment(experiment("iris", DecisionRule::Argmin));
  const double secs = elapsed(t0);
  const bool ok = std::abs(s.mean - 91.78) <= 3.0 && secs < 120.0;
  return {ok, fmt("Iris linear argmin over %zu runs: %.2f +- %.2f (target 91.78 +- 3.0), %.1f s (limit 120 s)",
                  s.records.size(), s.mean, s.stddev, secs)};
}

Outcome iris_argmax() {
  const Summary mx = run_repeated_experiment(experiment("iris", DecisionRule::Argmax));
  const Summary mn = run_repeated_experiment(experiment("iris", DecisionRule::Argmin));
  const bool ok = std::abs(mx.mean - 73.30) <= 4.0 && mx.mean < mn.mean;
  return {ok, fmt("Iris linear argmax: %.2f +- %.2f (target 73.30 +- 4.0), below argmin %.2f", mx.mean, mx.stddev,
                  mn.mean)};
}

Outcome wine_linear() {
  const Summary mn = run_repeated_experiment(experiment("wine", DecisionRule::Argmin));
  const Summary mx = run_repeated_experiment(experiment("wine", DecisionRule::Argmax));
  const bool ok = std::abs(mn.mean - 96.91) <= 2.5 && std::abs(mx.mean - 96.77) <= 2.5;
  return {ok, fmt("Wine linear argmin %.2f +- %.2f (target 96.91 +- 2.5), argmax %.2f +- %.2f (target 96.77 +- 2.5)",
                  mn.mean, mn.stddev, mx.mean, mx.stddev)};
}

Outcome iris_robust() {
  ExperimentConfig c = experiment("iris", DecisionRule::Argmin);
  const Summary det = run_repeated_experiment(c);
  c.robust = RobustBlock{NormOrder::L1, 0.1};
  const Summary rob = run_repeated_experiment(c);
  const bool ok = std::abs(rob.mean - 94.49) <= 3.0 && rob.mean >= det.mean - 1.0;
  return {ok, fmt("Iris robust linear p=1 eps=0.1 argmin: %.2f +- %.2f (target 94.49 +- 3.0), deterministic %.2f",
                  rob.mean, rob.stddev, det.mean)};
}

Outcome noisy_blobs() {
  // Per seed: three planar blobs, 75/25 split, grid search on clean training data,
  // test points perturbed by uniform noise in the l_inf ball of radius 0.1.
  double det_sum = 0.0, rob_sum = 0.0;
  const int seeds = 20;
  for (int s = 0; s < seeds; ++s) {
    SplitMix64 rng(1000 + static_cast<std::uint64_t>(s));
    const Dataset d = testing::gaussian_blobs(rng, 40, 0.1);
    const SplitPlan plan = stratified_split(d.labels, 3, 0.75, 77 + static_cast<std::uint64_t>(s));
    const auto train_rows = plan.train(), test_rows = plan.test(d.size());
    const Dataset train = d.subset(train_rows), test = d.subset(test_rows);
    Matrix noisy = test.features;
    for (Eigen::Index i = 0; i < noisy.rows(); ++i)
      for (Eigen::Index j = 0; j < noisy.cols(); ++j) noisy(i, j) += rng.uniform(-0.1, 0.1);
    ExperimentConfig c;
    const GridResult det = grid_search(train, c);
    c.robust = RobustBlock{NormOrder::LInf, 0.1};
    const GridResult rob = grid_search(train, c);
    det_sum += accuracy(classify_batch(det.model, noisy), test.labels);
    rob_sum += accuracy(classify_batch(rob.model, noisy), test.labels);
  }
  const double det = det_sum / seeds, rob = rob_sum / seeds;
  return {rob >= det, fmt("noisy blobs over %d seeds: robust p=inf eps=0.1 %.2f vs deterministic %.2f", seeds, rob, det)};
}

Outcome collapse() {
  SplitMix64 rng(2024);
  double worst_lin = 0.0, worst_ker = 0.0;
  long agree_lin = 0, agree_ker = 0, total = 0;
  int instances = 0, skipped = 0;
  const NormOrder ps[] = {NormOrder::L1, NormOrder::L2, NormOrder::LInf};
  while (instances < 50) {
    const int n = 1 + static_cast<int>(rng.below(5));
    const int C = 2 + static_cast<int>(rng.below(2));
    const int m = 10 + static_cast<int>(rng.below(21));
    const Dataset d = testing::random_classes(rng, m, n, C);
    const Dataset held = testing::random_classes(rng, 60, n, C);
    const Hyperparams h = testing::random_hyperparams(rng);
    const NormOrder p = ps[instances % 3];
    const KernelSpec spec = instances % 2 ? KernelSpec::gaussian(1.0) : KernelSpec::inhomogeneous_polynomial(2, 1.0);
    const auto u = UncertaintySpec::uniform(p, 0.0, m);
    try {
      const Matrix K = gram(spec, d.features);
      double wl = 0.0, wk = 0.0;
      for (int c = 1; c <= C; ++c) {
        const LinearClassFit l = train_linear_class(d, c, h);
        const RobustLinearFit rl = train_robust_linear_class(d, c, h, u);
        wl = std::max(wl, std::abs(rl.solution.objective - l.dual_objective) /
                              testing::linear_term_scale(d, c, h, l.model.w, l.model.theta));
        const KernelClassFit k = train_kernel_class(d, c, h, spec);
        const RobustKernelFit rk = train_robust_kernel_class(d, c, h, spec, u);
        wk = std::max(wk, std::abs(rk.solution.objective - k.dual_objective) /
                              testing::kernel_term_scale(d, c, h, K, k.model.beta, k.model.theta));
      }
      const auto det_l = train_multiclass(d, h, std::nullopt, std::nullopt, DecisionRule::Argmin);
      const auto rob_l = train_multiclass(d, h, std::nullopt, u, DecisionRule::Argmin);
      const auto det_k = train_multiclass(d, h, spec, std::nullopt, DecisionRule::Argmin);
      const auto rob_k = train_multiclass(d, h, spec, u, DecisionRule::Argmin);
      const auto a = classify_batch(det_l, held.features), b = classify_batch(rob_l, held.features);
      const auto ak = classify_batch(det_k, held.features), bk = classify_batch(rob_k, held.features);
      for (std::size_t i = 0; i < a.size(); ++i) {
        agree_lin += a[i] == b[i];
        agree_ker += ak[i] == bk[i];
      }
      total += static_cast<long>(a.size());
      worst_lin = std::max(worst_lin, wl);
      worst_ker = std::max(worst_ker, wk);
      ++instances;
    } catch (const Error& e) {
      if (!degenerate(e)) throw;
      ++skipped;
    }
  }
  const double fl = static_cast<double>(agree_lin) / static_cast<double>(total);
  const double fk = static_cast<double>(agree_ker) / static_cast<double>(total);
  const bool ok = worst_lin <= 1e-6 && worst_ker <= 1e-6 && fl >= 0.99 && fk >= 0.99;
  return {ok, fmt("zero-radius collapse on %d instances (%d degenerate skipped): objective gap linear %.2e, kernel "
                  "%.2e (limit 1e-6); held-out agreement linear %.2f%%, kernel %.2f%% (limit 99%%)",
                  instances, skipped, worst_lin, worst_ker, 100 * fl, 100 * fk)};
}

Outcome qp_oracle() {
  SplitMix64 rng(7);
  double worst = 0.0;
  for (int t = 0; t < 200; ++t) {
    const int m = 1 + static_cast<int>(rng.below(6));
    const QpProblem p = testing::random_box_simplex(rng, m);
    const QpSolution s = solve_box_simplex_qp(p, {1e-12, 0});
    const auto o = oracle::solve_exhaustive(p);
    if (!o.feasible) return {false, fmt("oracle found no feasible point for instance %d", t)};
    worst = std::max(worst, std::abs(s.objective - o.objective) / std::max(1.0, std::abs(o.objective)));
  }
  return {worst <= 1e-8, fmt("200 box-simplex QPs vs exhaustive active-set oracle: worst gap %.2e (limit 1e-8)", worst)};
}

double analytic_worst() {
  double worst = 0.0;
  auto check = [&](double got, double want) { worst = std::max(worst, std::abs(got - want)); };
  {
    ConicBuilder b;
    const int x = b.add_block(ConeKind::SecondOrder, 3);
    b.add_cost(x, 1.0);
    b.add_row({{x + 1, 1.0}}, 3.0);
    b.add_row({{x + 2, 1.0}}, 4.0);
    check(solve_socp(b.build()).objective, 5.0);
  }
  {
    ConicBuilder b;
    const int s = b.add_block(ConeKind::SecondOrder, 3);
    b.add_row({{s, 1.0}, {s + 2, 1.0}}, 1.0);
    b.add_row({{s + 1, 1.0}}, 1.0);
    b.add_cost(s, 0.5);
    b.add_cost(s + 2, -0.5);
    const ConicSolution r = solve_socp(b.build());
    check(r.x[s], 1.0);
    check(r.x[s + 2], 0.0);
    check(r.objective, 0.5);
  }
  struct Case {
    NormOrder norm;
    double w0, w1, want;
  };
  for (const Case& cs : {Case{NormOrder::LInf, 2, -3, 3}, Case{NormOrder::L1, 2, -3, 5}, Case{NormOrder::L2, 3, 4, 5}}) {
    ConicBuilder b;
    const int w = b.add_block(ConeKind::Free, 2);
    b.add_row({{w, 1.0}}, cs.w0);
    b.add_row({{w + 1, 1.0}}, cs.w1);
    const int idx[] = {w, w + 1};
    b.add_cost(encode_norm_epigraph(b, idx, cs.norm), 1.0);
    check(solve_socp(b.build()).objective, cs.want);
  }
  return worst;
}

Outcome socp() {
  const double analytic = analytic_worst();
  SplitMix64 rng(8);
  double worst = 0.0;
  int not_converged = 0;
  for (int t = 0; t < 100; ++t) {
    const int N = 4 + static_cast<int>(rng.below(9));
    const ConicProgram p = testing::random_conic_program(rng, N, 1 + static_cast<int>(rng.below(N - 1)));
    const ConicSolution s = solve_socp(p);
    const auto ref = oracle::solve_first_order(p, 1e-10);
    not_converged += !ref.converged;
    if (s.status != ConicStatus::Optimal) return {false, fmt("random program %d ended %s", t, to_string(s.status).c_str())};
    worst = std::max(worst, std::abs(s.objective - ref.objective) / (1.0 + std::abs(ref.objective)));
  }
  const bool ok = analytic <= 1e-6 && worst <= 1e-5 && not_converged == 0;
  return {ok, fmt("analytic instances worst error %.2e (limit 1e-6); 100 random programs vs first-order reference "
                  "worst %.2e (limit 1e-5), %d reference runs unconverged",
                  analytic, worst, not_converged)};
}

// Maximizer of delta'w over ||delta||_p <= eps.
Vector analytic_maximizer(const Vector& w, NormOrder p, double eps) {
  Vector d = Vector::Zero(w.size());
  switch (p) {
    case NormOrder::LInf:
      for (Eigen::Index i = 0; i < w.size(); ++i) d[i] = eps * (w[i] >= 0.0 ? 1.0 : -1.0);
      break;
    case NormOrder::L2:
      d = eps * w / w.norm();
      break;
    case NormOrder::L1: {
      Eigen::Index j = 0;
      w.cwiseAbs().maxCoeff(&j);
      d[j] = eps * (w[j] >= 0.0 ? 1.0 : -1.0);
      break;
    }
  }
  return d;
}

Outcome dual_norm_property() {
  SplitMix64 rng(9);
  long violations = 0;
  double worst_gap = 0.0;
  for (NormOrder p : {NormOrder::L1, NormOrder::L2, NormOrder::LInf}) {
    const NormOrder q = dual_norm(p);
    for (int t = 0; t < 100; ++t) {
      const int n = 1 + static_cast<int>(rng.below(6));
      Vector w(n);
      for (int i = 0; i < n; ++i) w[i] = rng.normal();
      const double eps = rng.uniform(1e-3, 1.0);
      const double bound = eps * norm_of(w, q);
      Vector d(n);
      for (int k = 0; k < 100000; ++k) {
        for (int i = 0; i < n; ++i) d[i] = rng.uniform(-1.0, 1.0);
        // half the samples on the sphere, half inside the ball
        d *= eps * (k % 2 ? rng.uniform() : 1.0) / norm_of(d, p);
        if (d.dot(w) > bound * (1.0 + 1e-14)) ++violations;
      }
      const Vector star = analytic_maximizer(w, p, eps);
      if (norm_of(star, p) > eps * (1.0 + 1e-15)) ++violations;
      worst_gap = std::max(worst_gap, std::abs(star.dot(w) - bound) / std::max(1.0, bound));
    }
  }
  const bool ok = violations == 0 && worst_gap <= 1e-12;
  return {ok, fmt("sampled perturbations above eps*||w||_p': %ld of 3e7; analytic maximizer gap %.2e (limit 1e-12)",
                  violations, worst_gap)};
}

Outcome strong_duality() {
  SplitMix64 rng(10);
  double worst = 0.0, worst_norm = 0.0;
  int instances = 0, skipped = 0;
  while (instances < 100) {
    const int n = 1 + static_cast<int>(rng.below(5));
    const int C = 2 + static_cast<int>(rng.below(2));
    const Dataset d = testing::random_classes(rng, 10 + static_cast<int>(rng.below(21)), n, C);
    const Hyperparams h = testing::random_hyperparams(rng), h2 = testing::random_hyperparams(rng);
    const KernelSpec spec = instances % 2 ? KernelSpec::gaussian(rng.uniform(0.3, 3.0))
                                          : KernelSpec::inhomogeneous_polynomial(2 + instances % 2, rng.uniform(0.0, 2.0));
    const Matrix K = gram(spec, d.features);
    try {
      double w = 0.0, wn = 0.0;
      for (int c = 1; c <= C; ++c) {
        const LinearClassFit l = train_linear_class(d, c, h);
        w = std::max(w, std::abs(l.primal_objective - l.dual_objective) /
                            testing::linear_term_scale(d, c, h, l.model.w, l.model.theta));
        const KernelClassFit k = train_kernel_class(d, c, h, spec);
        w = std::max(w, std::abs(k.primal_objective - k.dual_objective) /
                            testing::kernel_term_scale(d, c, h, K, k.model.beta, k.model.theta));
        const double direct = k.model.beta.dot(K * k.model.beta);
        wn = std::max(wn, std::abs(kernel_norm_expansion(K, ClassView::of(d, c), k.model.beta) - direct) / std::abs(direct));
      }
      if (C == 2) {
        for (const auto& kern : {std::optional<KernelSpec>{}, std::optional<KernelSpec>{spec}}) {
          const BinaryFit b = train_binary(d, h, h2, kern);
          const auto& hp = b.model.hyperplanes;
          const double s1 = kern ? testing::kernel_term_scale(d, 1, h, K, hp.kernel[0].beta, hp.kernel[0].theta)
                                 : testing::linear_term_scale(d, 1, h, hp.linear[0].w, hp.linear[0].theta);
          const double s2 = kern ? testing::kernel_term_scale(d, 2, h2, K, -hp.kernel[1].beta, -hp.kernel[1].theta)
                                 : testing::linear_term_scale(d, 2, h2, -hp.linear[1].w, -hp.linear[1].theta);
          w = std::max(w, std::abs(b.positive_primal - b.positive_dual) / s1);
          w = std::max(w, std::abs(b.negative_primal - b.negative_dual) / s2);
        }
      }
      worst = std::max(worst, w);
      worst_norm = std::max(worst_norm, wn);
      ++instances;
    } catch (const Error& e) {
      if (!degenerate(e)) throw;
      ++skipped;
    }
  }
  const bool ok = worst <= 1e-6 && worst_norm <= 1e-9;
  return {ok, fmt("primal-dual gap over %d instances (%d degenerate skipped): worst %.2e (limit 1e-6); norm expansion "
                  "worst %.2e (limit 1e-9)",
                  instances, skipped, worst, worst_norm)};
}

Outcome determinism() {
  namespace fs = std::filesystem;
  const fs::path root = fs::temp_directory_path() / "tpmsvm_acceptance_determinism";
  fs::remove_all(root);
  std::string bytes[2];
  for (int k = 0; k < 2; ++k) {
    const Summary s = run_repeated_experiment(experiment("iris", DecisionRule::Argmin));
    std::vector<ReportEntry> entries{accuracy_entry(s)};
    mark_best(entries);
    const fs::path dir = root / std::to_string(k);
    emit_report(entries, dir.string(), "iris");
    std::ifstream in(dir / "iris.csv", std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    bytes[k] = buf.str();
  }
  fs::remove_all(root);
  const bool ok = !bytes[0].empty() && bytes[0] == bytes[1];
  return {ok, fmt("two Iris experiment reports: %zu and %zu bytes, %s", bytes[0].size(), bytes[1].size(),
                  bytes[0] == bytes[1] ? "identical" : "different")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::function<Outcome()>> criteria = {
      iris_argmin, iris_argmax, wine_linear, iris_robust, noisy_blobs, collapse,
      qp_oracle,   socp,        dual_norm_property, strong_duality, determinism};
  std::set<int> selected;
  for (int i = 1; i < argc; ++i) selected.insert(std::atoi(argv[i]));
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    const int id = static_cast<int>(k) + 1;
    if (!selected.empty() && !selected.count(id)) continue;
    Outcome o;
    try {
      o = criteria[k]();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    std::printf("criterion %2d %s  %s\n", id, o.pass ? "PASS" : "FAIL", o.detail.c_str());
    std::fflush(stdout);
    failures += !o.pass;
  }
  return failures ? 1 : 0;
}
