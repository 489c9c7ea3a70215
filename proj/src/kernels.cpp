#include "tpmsvm/kernels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "tpmsvm/error.hpp"

namespace tpmsvm {

namespace {

double integer_power(double base, int exponent) {
  double result = 1.0;
  for (int i = 0; i < exponent; ++i) result *= base;
  return result;
}

// Plain loops keep the summation order fixed regardless of vectorization width.
double dot(const VectorRef& x, const VectorRef& y) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) s += x[k] * y[k];
  return s;
}

double squared_distance(const VectorRef& x, const VectorRef& y) {
  double s = 0.0;
  for (Eigen::Index k = 0; k < x.size(); ++k) {
    const double d = x[k] - y[k];
    s += d * d;
  }
  return s;
}

double parse_double(const std::string& key, const std::string& text) {
  std::size_t used = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != text.size())
    throw Error(ErrorCode::ParseError, "key '" + key + "' expects a number, got '" + text + "'");
  return value;
}

}  // namespace

std::string to_string(KernelFamily family) {
  switch (family) {
    case KernelFamily::Linear: return "linear";
    case KernelFamily::HomogeneousPolynomial: return "hom-poly";
    case KernelFamily::InhomogeneousPolynomial: return "inhom-poly";
    case KernelFamily::Gaussian: return "gaussian";
    case KernelFamily::Sigmoid: return "sigmoid";
  }
  return "unknown";
}

KernelFamily parse_kernel_family(const std::string& name) {
  if (name == "linear") return KernelFamily::Linear;
  if (name == "hom-poly" || name == "homogeneous-polynomial") return KernelFamily::HomogeneousPolynomial;
  if (name == "inhom-poly" || name == "inhomogeneous-polynomial")
    return KernelFamily::InhomogeneousPolynomial;
  if (name == "gaussian" || name == "rbf") return KernelFamily::Gaussian;
  if (name == "sigmoid") return KernelFamily::Sigmoid;
  throw Error(ErrorCode::InvalidInput, "unknown kernel family '" + name + "'");
}

std::string to_string(NormOrder p) {
  switch (p) {
    case NormOrder::L1: return "1";
    case NormOrder::L2: return "2";
    case NormOrder::LInf: return "inf";
  }
  return "?";
}

NormOrder parse_norm_order(const std::string& name) {
  if (name == "1") return NormOrder::L1;
  if (name == "2") return NormOrder::L2;
  if (name == "inf" || name == "infinity" || name == "Inf") return NormOrder::LInf;
  throw Error(ErrorCode::InvalidInput, "norm order must be 1, 2 or inf, got '" + name + "'");
}

NormOrder dual_norm(NormOrder p) {
  switch (p) {
    case NormOrder::L1: return NormOrder::LInf;
    case NormOrder::L2: return NormOrder::L2;
    case NormOrder::LInf: return NormOrder::L1;
  }
  return NormOrder::L2;
}

double norm_of(const VectorRef& v, NormOrder p) {
  switch (p) {
    case NormOrder::L1: return v.lpNorm<1>();
    case NormOrder::L2: return v.norm();
    case NormOrder::LInf: return v.size() == 0 ? 0.0 : v.lpNorm<Eigen::Infinity>();
  }
  return 0.0;
}

void KernelSpec::validate() const {
  auto fail = [this](const std::string& why) {
    throw Error(ErrorCode::InvalidInput, "kernel " + to_string(family) + ": " + why);
  };
  switch (family) {
    case KernelFamily::Linear:
      break;
    case KernelFamily::HomogeneousPolynomial:
      if (degree < 1) fail("degree must be >= 1");
      break;
    case KernelFamily::InhomogeneousPolynomial:
      if (degree < 1) fail("degree must be >= 1");
      if (!(gamma >= 0.0) || !std::isfinite(gamma)) fail("gamma must be finite and >= 0");
      break;
    case KernelFamily::Gaussian:
      if (!(sigma > 0.0) || !std::isfinite(sigma)) fail("sigma must be finite and > 0");
      break;
    case KernelFamily::Sigmoid:
      if (!std::isfinite(slope) || !std::isfinite(intercept)) fail("a and b must be finite");
      break;
  }
}

std::string KernelSpec::label() const {
  std::ostringstream out;
  out << to_string(family);
  switch (family) {
    case KernelFamily::Linear: break;
    case KernelFamily::HomogeneousPolynomial: out << "(d=" << degree << ")"; break;
    case KernelFamily::InhomogeneousPolynomial:
      out << "(d=" << degree << ",gamma=" << gamma << ")";
      break;
    case KernelFamily::Gaussian: out << "(sigma=" << sigma << ")"; break;
    case KernelFamily::Sigmoid: out << "(a=" << slope << ",b=" << intercept << ")"; break;
  }
  return out.str();
}

std::map<std::string, std::string> KernelSpec::to_key_values() const {
  auto num = [](double v) {
    std::ostringstream s;
    s.precision(17);
    s << v;
    return s.str();
  };
  return {
      {"kernel.family", to_string(family)}, {"kernel.d", std::to_string(degree)},
      {"kernel.gamma", num(gamma)},         {"kernel.sigma", num(sigma)},
      {"kernel.a", num(slope)},             {"kernel.b", num(intercept)},
  };
}

KernelSpec KernelSpec::from_key_values(const std::map<std::string, std::string>& kv) {
  KernelSpec spec;
  if (auto it = kv.find("kernel.family"); it != kv.end()) spec.family = parse_kernel_family(it->second);
  if (auto it = kv.find("kernel.d"); it != kv.end()) {
    const double d = parse_double(it->first, it->second);
    if (d != std::floor(d)) throw Error(ErrorCode::ParseError, "kernel.d must be an integer");
    spec.degree = static_cast<int>(d);
  }
  if (auto it = kv.find("kernel.gamma"); it != kv.end()) spec.gamma = parse_double(it->first, it->second);
  if (auto it = kv.find("kernel.sigma"); it != kv.end()) spec.sigma = parse_double(it->first, it->second);
  if (auto it = kv.find("kernel.a"); it != kv.end()) spec.slope = parse_double(it->first, it->second);
  if (auto it = kv.find("kernel.b"); it != kv.end()) spec.intercept = parse_double(it->first, it->second);
  spec.validate();
  return spec;
}

double eval_kernel(const KernelSpec& spec, const VectorRef& x, const VectorRef& y) {
  if (x.size() != y.size())
    throw Error(ErrorCode::InvalidInput, "kernel arguments have dimensions " + std::to_string(x.size()) +
                                             " and " + std::to_string(y.size()));
  switch (spec.family) {
    case KernelFamily::Linear:
      return dot(x, y);
    case KernelFamily::HomogeneousPolynomial:
      return integer_power(dot(x, y), spec.degree);
    case KernelFamily::InhomogeneousPolynomial:
      return integer_power(spec.gamma + dot(x, y), spec.degree);
    case KernelFamily::Gaussian:
      return std::exp(-squared_distance(x, y) / (2.0 * spec.sigma * spec.sigma));
    case KernelFamily::Sigmoid:
      return std::tanh(spec.slope * dot(x, y) + spec.intercept);
  }
  return 0.0;
}

Matrix gram(const KernelSpec& spec, const MatrixRef& a, const MatrixRef& b) {
  if (a.cols() != b.cols())
    throw Error(ErrorCode::InvalidInput, "gram blocks have feature dimensions " + std::to_string(a.cols()) +
                                             " and " + std::to_string(b.cols()));
  Matrix k(a.rows(), b.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const Vector ai = a.row(i).transpose();
    for (Eigen::Index j = 0; j < b.rows(); ++j) k(i, j) = eval_kernel(spec, ai, b.row(j).transpose());
  }
  return k;
}

Matrix gram(const KernelSpec& spec, const MatrixRef& a) {
  Matrix k(a.rows(), a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const Vector ai = a.row(i).transpose();
    for (Eigen::Index j = 0; j <= i; ++j) {
      const double v = eval_kernel(spec, ai, a.row(j).transpose());
      k(i, j) = v;
      k(j, i) = v;
    }
  }
  return k;
}

double l2_enclosing_radius(NormOrder p, double eps, int n) {
  // ||d||_2 <= n^{max(0, 1/2 - 1/p)} ||d||_p, tight at the corners of the box for p = inf.
  return p == NormOrder::LInf ? eps * std::sqrt(static_cast<double>(n)) : eps;
}

double feature_radius(const KernelSpec& spec, NormOrder p, double eps, int n) {
  if (!(eps >= 0.0) || !std::isfinite(eps))
    throw Error(ErrorCode::InvalidInput, "uncertainty radius must be finite and >= 0");
  if (eps == 0.0) return 0.0;
  spec.validate();
  const double r2 = l2_enclosing_radius(p, eps, n);
  switch (spec.family) {
    case KernelFamily::Linear:
      return r2;
    case KernelFamily::Gaussian: {
      const double k = std::exp(-r2 * r2 / (2.0 * spec.sigma * spec.sigma));
      return std::sqrt(std::max(0.0, 2.0 - 2.0 * k));
    }
    default:
      throw Error(ErrorCode::UnsupportedRadiusMapping,
                  "no closed-form feature-space radius for " + spec.label() +
                      "; supply the feature-space radius explicitly");
  }
}

double relative_min_eigenvalue(const MatrixRef& symmetric) {
  if (symmetric.rows() == 0) return 0.0;
  Eigen::SelfAdjointEigenSolver<Matrix> eig(symmetric, Eigen::EigenvaluesOnly);
  const Vector& ev = eig.eigenvalues();
  const double scale = std::max(std::abs(ev[0]), std::abs(ev[ev.size() - 1]));
  if (scale == 0.0) return 0.0;
  return ev[0] / scale;
}

}  // namespace tpmsvm
