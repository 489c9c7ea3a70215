#include <iomanip>
#include <istream>
#include <ostream>
#include <sstream>

#include "tpmsvm/conic.hpp"
#include "tpmsvm/error.hpp"

namespace tpmsvm {

int ConicBuilder::add_block(ConeKind kind, int dim) {
  if (dim < 1 || (kind == ConeKind::SecondOrder && dim < 2))
    throw Error(ErrorCode::InvalidInput, "invalid cone block dimension " + std::to_string(dim));
  const int first = num_vars_;
  blocks_.push_back({kind, dim});
  num_vars_ += dim;
  cost_.resize(static_cast<std::size_t>(num_vars_), 0.0);
  return first;
}

void ConicBuilder::add_cost(int var, double coef) {
  if (var < 0 || var >= num_vars_) throw Error(ErrorCode::InvalidInput, "cost on unknown variable");
  cost_[static_cast<std::size_t>(var)] += coef;
}

void ConicBuilder::add_cost(const LinearExpr& expr, double scale) {
  for (const auto& [var, coef] : expr) add_cost(var, scale * coef);
}

void ConicBuilder::add_row(LinearExpr terms, double rhs) {
  for (const auto& term : terms)
    if (term.first < 0 || term.first >= num_vars_)
      throw Error(ErrorCode::InvalidInput, "constraint on unknown variable");
  rows_.emplace_back(std::move(terms), rhs);
}

ConicProgram ConicBuilder::build() const {
  ConicProgram p;
  p.c = Eigen::Map<const Vector>(cost_.data(), num_vars_);
  p.A = Matrix::Zero(static_cast<Eigen::Index>(rows_.size()), num_vars_);
  p.b.resize(static_cast<Eigen::Index>(rows_.size()));
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    const auto r = static_cast<Eigen::Index>(i);
    for (const auto& [var, coef] : rows_[i].first) p.A(r, var) += coef;
    p.b[r] = rows_[i].second;
  }
  p.cones = blocks_;
  p.objective_offset = offset_;
  return p;
}

LinearExpr encode_norm_epigraph(ConicBuilder& builder, std::span<const int> w, NormOrder norm) {
  const int n = static_cast<int>(w.size());
  switch (norm) {
    case NormOrder::LInf: {
      const int s = builder.add_block(ConeKind::NonNeg, 1);
      const int slack = builder.add_block(ConeKind::NonNeg, 2 * n);
      for (int j = 0; j < n; ++j) {
        builder.add_row({{s, 1.0}, {w[j], -1.0}, {slack + 2 * j, -1.0}}, 0.0);
        builder.add_row({{s, 1.0}, {w[j], 1.0}, {slack + 2 * j + 1, -1.0}}, 0.0);
      }
      return {{s, 1.0}};
    }
    case NormOrder::L1: {
      const int s = builder.add_block(ConeKind::NonNeg, n);
      const int slack = builder.add_block(ConeKind::NonNeg, 2 * n);
      LinearExpr sum;
      for (int j = 0; j < n; ++j) {
        builder.add_row({{s + j, 1.0}, {w[j], -1.0}, {slack + 2 * j, -1.0}}, 0.0);
        builder.add_row({{s + j, 1.0}, {w[j], 1.0}, {slack + 2 * j + 1, -1.0}}, 0.0);
        sum.emplace_back(s + j, 1.0);
      }
      return sum;
    }
    case NormOrder::L2: {
      const int t = builder.add_block(ConeKind::SecondOrder, n + 1);
      for (int j = 0; j < n; ++j) builder.add_row({{t + 1 + j, 1.0}, {w[j], -1.0}}, 0.0);
      return {{t, 1.0}};
    }
  }
  return {};
}

namespace {

const char* cone_name(ConeKind kind) {
  switch (kind) {
    case ConeKind::Free: return "free";
    case ConeKind::NonNeg: return "nonneg";
    case ConeKind::SecondOrder: return "soc";
  }
  return "?";
}

ConeKind parse_cone(const std::string& word) {
  if (word == "free") return ConeKind::Free;
  if (word == "nonneg") return ConeKind::NonNeg;
  if (word == "soc") return ConeKind::SecondOrder;
  throw Error(ErrorCode::ParseError, "unknown cone kind '" + word + "'");
}

void expect(std::istream& in, const std::string& word) {
  std::string got;
  if (!(in >> got) || got != word)
    throw Error(ErrorCode::ParseError, "conic text: expected '" + word + "', got '" + got + "'");
}

template <class T>
T read_value(std::istream& in, const char* what) {
  T v{};
  if (!(in >> v)) throw Error(ErrorCode::ParseError, std::string("conic text: cannot read ") + what);
  return v;
}

}  // namespace

void write_conic_text(const ConicProgram& program, std::ostream& out) {
  program.validate();
  const auto old_prec = out.precision(17);
  out << "conic 1\n";
  out << "vars " << program.num_vars() << " rows " << program.num_rows() << "\n";
  out << "cones " << program.cones.size() << "\n";
  for (const auto& cone : program.cones) out << cone_name(cone.kind) << ' ' << cone.dim << '\n';
  out << "offset " << program.objective_offset << "\n";
  out << "c\n";
  for (Eigen::Index j = 0; j < program.c.size(); ++j) out << program.c[j] << '\n';
  out << "b\n";
  for (Eigen::Index i = 0; i < program.b.size(); ++i) out << program.b[i] << '\n';
  Eigen::Index nnz = 0;
  for (Eigen::Index i = 0; i < program.A.rows(); ++i)
    for (Eigen::Index j = 0; j < program.A.cols(); ++j)
      if (program.A(i, j) != 0.0) ++nnz;
  out << "A " << nnz << "\n";
  for (Eigen::Index i = 0; i < program.A.rows(); ++i)
    for (Eigen::Index j = 0; j < program.A.cols(); ++j)
      if (program.A(i, j) != 0.0) out << i << ' ' << j << ' ' << program.A(i, j) << '\n';
  out.precision(old_prec);
}

ConicProgram read_conic_text(std::istream& in) {
  expect(in, "conic");
  if (read_value<int>(in, "version") != 1) throw Error(ErrorCode::ParseError, "conic text: unsupported version");
  expect(in, "vars");
  const auto n = read_value<Eigen::Index>(in, "variable count");
  expect(in, "rows");
  const auto m = read_value<Eigen::Index>(in, "row count");
  if (n < 0 || m < 0) throw Error(ErrorCode::ParseError, "conic text: negative size");
  expect(in, "cones");
  const auto k = read_value<std::size_t>(in, "cone count");
  ConicProgram p;
  for (std::size_t i = 0; i < k; ++i) {
    const auto kind = parse_cone(read_value<std::string>(in, "cone kind"));
    p.cones.push_back({kind, read_value<int>(in, "cone dim")});
  }
  expect(in, "offset");
  p.objective_offset = read_value<double>(in, "offset");
  expect(in, "c");
  p.c.resize(n);
  for (Eigen::Index j = 0; j < n; ++j) p.c[j] = read_value<double>(in, "c entry");
  expect(in, "b");
  p.b.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) p.b[i] = read_value<double>(in, "b entry");
  expect(in, "A");
  const auto nnz = read_value<Eigen::Index>(in, "nonzero count");
  p.A = Matrix::Zero(m, n);
  for (Eigen::Index e = 0; e < nnz; ++e) {
    const auto i = read_value<Eigen::Index>(in, "row index");
    const auto j = read_value<Eigen::Index>(in, "column index");
    const auto v = read_value<double>(in, "coefficient");
    if (i < 0 || i >= m || j < 0 || j >= n) throw Error(ErrorCode::ParseError, "conic text: index out of range");
    p.A(i, j) = v;
  }
  try {
    p.validate();
  } catch (const Error& e) {
    throw Error(ErrorCode::ParseError, e.what());
  }
  return p;
}

}  // namespace tpmsvm
