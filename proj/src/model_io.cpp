#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tpmsvm/error.hpp"
#include "tpmsvm/model_io.hpp"

namespace tpmsvm {

namespace {

using nlohmann::json;

json to_json(const VectorRef& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v[i]);
  return a;
}

Vector vector_from(const json& a, const std::string& what) {
  if (!a.is_array()) throw Error(ErrorCode::ParseError, what + " must be an array");
  Vector v(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i].is_number()) throw Error(ErrorCode::ParseError, what + " holds a non-number");
    v[static_cast<Eigen::Index>(i)] = a[i].get<double>();
  }
  return v;
}

std::string hex(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

json kernel_json(const KernelSpec& k) {
  json j = json::object();
  for (const auto& [key, value] : k.to_key_values()) j[key.substr(std::strlen("kernel."))] = value;
  return j;
}

KernelSpec kernel_from(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "kernel must be an object");
  std::map<std::string, std::string> kv;
  for (const auto& [key, value] : j.items()) kv["kernel." + key] = value.get<std::string>();
  return KernelSpec::from_key_values(kv);
}

}  // namespace

std::uint64_t sample_digest(const Matrix& samples) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&h](const void* data, std::size_t bytes) {
    const auto* p = static_cast<const unsigned char*>(data);
    for (std::size_t i = 0; i < bytes; ++i) {
      h ^= p[i];
      h *= 0x100000001b3ULL;
    }
  };
  const std::int64_t shape[2] = {samples.rows(), samples.cols()};
  feed(shape, sizeof shape);
  for (Eigen::Index i = 0; i < samples.rows(); ++i)
    for (Eigen::Index j = 0; j < samples.cols(); ++j) {
      const double v = samples(i, j);
      feed(&v, sizeof v);
    }
  return h;
}

std::string model_to_json(const SavedModel& saved) {
  const MulticlassModel& m = saved.model;
  m.validate();
  json doc;
  doc["format"] = "tpmsvm-model";
  doc["version"] = kModelFormatVersion;
  doc["kind"] = m.is_kernel() ? "kernel" : "linear";
  doc["rule"] = to_string(m.rule);
  doc["provenance"] = {{"robust", m.provenance.robust}, {"p", to_string(m.provenance.p)}, {"eps", m.provenance.eps}};
  doc["labels"] = m.label_names;
  doc["dim"] = m.dim();
  json classes = json::array();
  if (m.is_kernel()) {
    // Class models normally share one sample block; store each distinct block once.
    std::vector<std::shared_ptr<const Matrix>> blocks;
    json sample_docs = json::array();
    for (const auto& k : m.kernel) {
      std::size_t b = 0;
      while (b < blocks.size() && blocks[b] != k.samples) ++b;
      if (b == blocks.size()) {
        blocks.push_back(k.samples);
        const Matrix& X = *k.samples;
        json rows = json::array();
        for (Eigen::Index i = 0; i < X.rows(); ++i) rows.push_back(to_json(X.row(i).transpose()));
        sample_docs.push_back({{"digest", hex(sample_digest(X))}, {"rows", rows}});
      }
      classes.push_back({{"beta", to_json(k.beta)},
                         {"theta", k.theta},
                         {"norm", k.norm_h},
                         {"kernel", kernel_json(k.kernel)},
                         {"samples", b},
                         {"sample_digest", hex(sample_digest(*k.samples))}});
    }
    doc["samples"] = sample_docs;
  } else {
    for (const auto& l : m.linear) classes.push_back({{"w", to_json(l.w)}, {"theta", l.theta}, {"norm", l.norm_w}});
  }
  doc["classes"] = classes;
  if (saved.scaling) {
    doc["scaling"] = {{"min", to_json(saved.scaling->min)}, {"max", to_json(saved.scaling->max)}, {"clamp", saved.clamp}};
  }
  return doc.dump(1);
}

SavedModel model_from_json(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("model is not valid JSON: ") + e.what());
  }
  SavedModel saved;
  try {
    if (doc.value("format", "") != "tpmsvm-model") throw Error(ErrorCode::ParseError, "not a tpmsvm model document");
    const int version = doc.at("version").get<int>();
    if (version != kModelFormatVersion)
      throw Error(ErrorCode::ParseError, "unsupported model version " + std::to_string(version));
    MulticlassModel& m = saved.model;
    m.rule = parse_decision_rule(doc.at("rule").get<std::string>());
    const json& prov = doc.at("provenance");
    m.provenance.robust = prov.at("robust").get<bool>();
    m.provenance.p = parse_norm_order(prov.at("p").get<std::string>());
    m.provenance.eps = prov.at("eps").get<double>();
    m.label_names = doc.at("labels").get<std::vector<std::string>>();
    const std::string kind = doc.at("kind").get<std::string>();
    const json& classes = doc.at("classes");
    if (kind == "linear") {
      for (const auto& c : classes) {
        LinearClassModel l;
        l.w = vector_from(c.at("w"), "w");
        l.theta = c.at("theta").get<double>();
        l.norm_w = c.at("norm").get<double>();
        m.linear.push_back(std::move(l));
      }
    } else if (kind == "kernel") {
      std::vector<std::shared_ptr<const Matrix>> blocks;
      for (const auto& s : doc.at("samples")) {
        const json& rows = s.at("rows");
        const int n = doc.at("dim").get<int>();
        auto X = std::make_shared<Matrix>(static_cast<Eigen::Index>(rows.size()), n);
        for (std::size_t i = 0; i < rows.size(); ++i) {
          const Vector r = vector_from(rows[i], "sample row");
          if (r.size() != n) throw Error(ErrorCode::ParseError, "sample row has the wrong length");
          X->row(static_cast<Eigen::Index>(i)) = r.transpose();
        }
        if (hex(sample_digest(*X)) != s.at("digest").get<std::string>())
          throw Error(ErrorCode::ParseError, "training-sample digest mismatch");
        blocks.push_back(std::move(X));
      }
      for (const auto& c : classes) {
        KernelClassModel k;
        k.beta = vector_from(c.at("beta"), "beta");
        k.theta = c.at("theta").get<double>();
        k.norm_h = c.at("norm").get<double>();
        k.kernel = kernel_from(c.at("kernel"));
        const auto b = c.at("samples").get<std::size_t>();
        if (b >= blocks.size()) throw Error(ErrorCode::ParseError, "class refers to a missing sample block");
        k.samples = blocks[b];
        if (hex(sample_digest(*k.samples)) != c.at("sample_digest").get<std::string>())
          throw Error(ErrorCode::ParseError, "class sample digest mismatch");
        m.kernel.push_back(std::move(k));
      }
    } else {
      throw Error(ErrorCode::ParseError, "unknown model kind '" + kind + "'");
    }
    if (doc.contains("scaling")) {
      const json& s = doc.at("scaling");
      saved.scaling = ScalingParams{vector_from(s.at("min"), "scaling.min"), vector_from(s.at("max"), "scaling.max")};
      saved.clamp = s.at("clamp").get<bool>();
    }
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, std::string("malformed model document: ") + e.what());
  }
  try {
    saved.model.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, std::string("inconsistent model document: ") + e.what());
  }
  return saved;
}

void save_model(const SavedModel& saved, const std::string& path) {
  const std::string text = model_to_json(saved);
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  out << text << '\n';
  if (!out) throw Error(ErrorCode::IoError, "write to '" + path + "' failed");
}

SavedModel load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return model_from_json(buf.str());
}

}  // namespace tpmsvm
