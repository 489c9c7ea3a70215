#include <cstdio>
#include <fstream>
#include <iostream>

#include <CLI11.hpp>

#include "tpmsvm/bench.hpp"
#include "tpmsvm/data_pipeline.hpp"
#include "tpmsvm/error.hpp"
#include "tpmsvm/model_io.hpp"
#include "tpmsvm/predict.hpp"
#include "tpmsvm/trainer.hpp"

using namespace tpmsvm;

namespace {

struct Common {
  std::string config;
  std::string dataset;
  std::string manifest = TPMSVM_DEFAULT_MANIFEST;
  std::string model;
  std::string rule;
  std::string p;
  double eps = -1.0;
  std::string radius;
  int runs = 0;
  long long seed = -1;
  std::string scaling;
  std::string out = "results";
  std::string stem;
};

void add_common(CLI::App* app, Common& o, bool sweep) {
  app->add_option("--config", o.config, "flat key = value file; flags override it");
  app->add_option("--dataset", o.dataset, "dataset name in the manifest");
  app->add_option("--manifest", o.manifest, "dataset manifest")->capture_default_str();
  app->add_option("--rule", o.rule, "argmin or argmax");
  if (!sweep) {
    app->add_option("--p", o.p, "uncertainty norm: 1, 2 or inf (enables the robust model)");
    app->add_option("--eps", o.eps, "uncertainty radius");
  }
  app->add_option("--feature-radius", o.radius, "kernel radius mode: direct or mapped");
  app->add_option("--runs", o.runs, "number of repeated splits");
  app->add_option("--seed", o.seed, "base seed; run r uses seed + r");
  app->add_option("--scaling", o.scaling, "whole or train");
  app->add_option("--out", o.out, "output directory")->capture_default_str();
  app->add_option("--stem", o.stem, "report file stem");
}

ExperimentConfig build_config(const Common& o) {
  ExperimentConfig c;
  c.manifest = o.manifest;
  if (!o.config.empty()) c.apply(read_key_values(o.config));
  std::map<std::string, std::string> kv;
  if (!o.dataset.empty()) kv["dataset"] = o.dataset;
  if (!o.model.empty()) kv["model"] = o.model;
  if (!o.rule.empty()) kv["rule"] = o.rule;
  if (!o.p.empty()) kv["robust.p"] = o.p;
  if (o.eps >= 0.0) kv["robust.eps"] = format_number(o.eps);
  if (!o.radius.empty()) kv["robust.feature_radius"] = o.radius;
  if (o.runs > 0) kv["runs"] = std::to_string(o.runs);
  if (o.seed >= 0) kv["seed"] = std::to_string(o.seed);
  if (!o.scaling.empty()) kv["scaling"] = o.scaling;
  c.apply(kv);
  c.validate();
  return c;
}

void progress(const RunRecord& r) {
  std::fprintf(stderr, "  run %d seed %llu: test %.2f%% (alpha=%g, nu=%g, param=%g)\n", r.run,
               static_cast<unsigned long long>(r.seed), r.test_accuracy, r.chosen.alpha, r.chosen.nu,
               r.chosen.parameter);
}

std::vector<std::string> split_csv_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto item = s.substr(start, comma == std::string::npos ? std::string::npos : comma - start);
    if (!item.empty()) out.push_back(item);
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

int cmd_experiment(const Common& o, const std::string& models, const std::string& rules) {
  const ExperimentConfig base = build_config(o);
  const RawTable table = load_dataset(base);
  std::vector<ReportEntry> entries;
  const auto model_list = models.empty() ? std::vector<std::string>{base.model.token} : split_csv_list(models);
  const auto rule_list = rules.empty() ? std::vector<std::string>{to_string(base.rule)} : split_csv_list(rules);
  for (const auto& r : rule_list)
    for (const auto& m : model_list) {
      ExperimentConfig c = base;
      c.model = ModelKind::parse(m);
      c.rule = parse_decision_rule(r);
      std::fprintf(stderr, "%s %s %s: %d runs, %zu grid points\n", c.dataset.c_str(), m.c_str(), r.c_str(), c.runs,
                   c.grid_size());
      const Summary s = run_repeated_experiment(c, table, progress);
      std::fprintf(stderr, "  mean %.2f +- %.2f\n", s.mean, s.stddev);
      entries.push_back(accuracy_entry(s));
    }
  mark_best(entries);
  const std::string stem = o.stem.empty() ? base.dataset + "_experiment" : o.stem;
  emit_report(entries, o.out, stem);
  write_markdown(entries, std::cout);
  return 0;
}

int cmd_sweep(const Common& o, const std::string& ps_text, const std::string& eps_text, bool with_zero,
              bool with_deterministic) {
  ExperimentConfig base = build_config(o);
  const RawTable table = load_dataset(base);
  std::vector<NormOrder> ps;
  for (const auto& p : split_csv_list(ps_text)) ps.push_back(parse_norm_order(p));
  std::vector<double> epss;
  if (with_zero) epss.push_back(0.0);
  for (const auto& e : split_csv_list(eps_text)) epss.push_back(std::stod(e));
  std::vector<ReportEntry> entries;
  if (with_deterministic) {
    ExperimentConfig det = base;
    det.robust.reset();
    std::fprintf(stderr, "deterministic\n");
    const ReportEntry d = sweep_entry(run_repeated_experiment(det, table));
    for (NormOrder p : ps) {
      ReportEntry e = d;
      e.row = "p=" + to_string(p);
      entries.push_back(e);
    }
  }
  robust_sweep(base, table, ps, epss, [&](const Summary& s) {
    std::fprintf(stderr, "p=%s eps=%g: mean %.2f +- %.2f\n", to_string(s.config.robust->p).c_str(),
                 s.config.robust->eps, s.mean, s.stddev);
    entries.push_back(sweep_entry(s));
  });
  // Keep each row's cells together: deterministic first, then increasing eps.
  std::stable_sort(entries.begin(), entries.end(),
                   [](const ReportEntry& a, const ReportEntry& b) { return a.row < b.row; });
  mark_best(entries);
  const std::string stem = o.stem.empty() ? base.dataset + "_sweep" : o.stem;
  emit_report(entries, o.out, stem);
  write_markdown(entries, std::cout);
  return 0;
}

int cmd_train(const Common& o, const std::string& data, const std::string& label, double alpha, double nu,
              double param, const std::string& model_out) {
  ExperimentConfig c = build_config(o);
  RawTable raw;
  if (!data.empty()) {
    raw = load_csv(data, label);
  } else {
    raw = load_dataset(c);
  }
  ScaledTable scaled = scale_unit_interval(raw, c.scaling);
  for (const auto& w : scaled.warnings) std::fprintf(stderr, "warning: %s\n", w.c_str());
  const Dataset d = scaled.table.to_dataset();
  std::optional<KernelSpec> kernel;
  if (c.model.is_kernel()) kernel = c.model.kernel(param);
  std::optional<UncertaintySpec> u;
  if (c.robust) {
    u = kernel && c.robust->radius == RadiusMode::Direct ? UncertaintySpec::uniform_direct(c.robust->p, c.robust->eps, d.size())
                                                         : UncertaintySpec::uniform(c.robust->p, c.robust->eps, d.size());
  }
  SavedModel saved;
  saved.model = train_multiclass(d, Hyperparams{nu, alpha}, kernel, u, c.rule);
  saved.model.label_names = raw.label_names;
  saved.scaling = scaled.params;
  saved.clamp = c.scaling == ScalingMode::FitOnTrain;
  save_model(saved, model_out);
  const double acc = accuracy(classify_batch(saved.model, d.features), d.labels);
  std::fprintf(stderr, "trained %d class models; training accuracy %.2f%%\n", saved.model.num_classes(), acc);
  return 0;
}

int cmd_predict(const std::string& model_path, const std::string& data, const std::string& label,
                const std::string& out_path) {
  const SavedModel saved = load_model(model_path);
  Matrix X;
  std::vector<int> truth;
  if (!label.empty()) {
    const RawTable t = load_csv(data, label);
    X = t.features;
    // Map the file's labels onto the model's class ids by name.
    for (int y : t.labels) {
      const auto& name = t.label_names[static_cast<std::size_t>(y - 1)];
      const auto& names = saved.model.label_names;
      const auto it = std::find(names.begin(), names.end(), name);
      truth.push_back(it == names.end() ? 0 : static_cast<int>(it - names.begin()) + 1);
    }
  } else {
    // Feature-only file: parse with a synthetic label column.
    std::ifstream in(data);
    if (!in) throw Error(ErrorCode::IoError, "cannot open '" + data + "'");
    std::stringstream patched;
    std::string line;
    bool header = true;
    while (std::getline(in, line)) {
      if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
      patched << line << (header ? ",__label" : ",_") << '\n';
      header = false;
    }
    X = parse_csv(patched, "__label", data).features;
  }
  if (saved.scaling) X = saved.scaling->apply(X, saved.clamp);
  if (out_path.empty() || out_path == "-") {
    write_predictions_csv(saved.model, X, std::cout);
  } else {
    std::ofstream out(out_path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + out_path + "'");
    write_predictions_csv(saved.model, X, out);
  }
  if (!truth.empty()) std::fprintf(stderr, "accuracy %.2f%%\n", accuracy(classify_batch(saved.model, X), truth));
  return 0;
}

int cmd_report(const std::string& in_path, const std::string& out_path) {
  std::ifstream in(in_path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + in_path + "'");
  auto entries = read_summary_csv(in);
  mark_best(entries);
  if (out_path.empty() || out_path == "-") {
    write_markdown(entries, std::cout);
  } else {
    std::ofstream out(out_path);
    if (!out) throw Error(ErrorCode::IoError, "cannot write '" + out_path + "'");
    write_markdown(entries, out);
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Twin parametric-margin SVM: training, prediction and benchmark tables"};
  app.require_subcommand(1);

  Common train_o, exp_o, sweep_o;
  std::string data, label = "class", model_out = "model.json";
  double alpha = 1.0, nu = 0.5, param = 1.0;
  auto* train = app.add_subcommand("train", "train a multiclass model on a whole CSV and save it as JSON");
  add_common(train, train_o, false);
  train->add_option("--data", data, "CSV file (overrides --dataset)");
  train->add_option("--label", label, "label column of --data")->capture_default_str();
  train->add_option("--model", train_o.model, "linear, hom-poly2, hom-poly3, inhom-poly1..3 or gaussian");
  train->add_option("--alpha", alpha)->capture_default_str();
  train->add_option("--nu", nu)->capture_default_str();
  train->add_option("--param", param, "gamma or sigma of the kernel")->capture_default_str();
  train->add_option("-o,--output", model_out, "model file")->capture_default_str();

  std::string model_path, pred_data, pred_label, pred_out;
  auto* predict = app.add_subcommand("predict", "classify the rows of a CSV with a saved model");
  predict->add_option("--model", model_path, "model JSON")->required();
  predict->add_option("--data", pred_data, "CSV with a header row")->required();
  predict->add_option("--label", pred_label, "label column to skip and score against");
  predict->add_option("-o,--output", pred_out, "predictions CSV (default stdout)");

  std::string models, rules;
  auto* experiment = app.add_subcommand("experiment", "repeated split / grid search / test accuracy");
  add_common(experiment, exp_o, false);
  experiment->add_option("--models", models, "comma-separated model tokens");
  experiment->add_option("--rules", rules, "comma-separated decision rules");

  std::string ps = "1,2,inf", epss = "0.001,0.01,0.1";
  bool no_zero = false, no_det = false;
  auto* sweep = app.add_subcommand("sweep", "robust experiments over norms and radii");
  add_common(sweep, sweep_o, true);
  sweep->add_option("--model", sweep_o.model, "model token");
  sweep->add_option("--ps", ps, "comma-separated norms")->capture_default_str();
  sweep->add_option("--eps-list", epss, "comma-separated radii")->capture_default_str();
  sweep->add_flag("--no-zero", no_zero, "omit the eps = 0 column");
  sweep->add_flag("--no-deterministic", no_det, "omit the deterministic column");

  std::string report_in, report_out;
  auto* report = app.add_subcommand("report", "render a summary CSV as markdown");
  report->add_option("--in", report_in, "summary CSV")->required();
  report->add_option("-o,--output", report_out, "markdown file (default stdout)");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*train) return cmd_train(train_o, data, label, alpha, nu, param, model_out);
    if (*predict) return cmd_predict(model_path, pred_data, pred_label, pred_out);
    if (*experiment) return cmd_experiment(exp_o, models, rules);
    if (*sweep) return cmd_sweep(sweep_o, ps, epss, !no_zero, !no_det);
    if (*report) return cmd_report(report_in, report_out);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
