// Copyright (c) 2026 The morcert developers. All rights reserved.
// SPDX-License-Identifier: Apache-2.0

#include "morcert/io.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <sstream>
#include <vector>

#include <json.hpp>

#include "morcert/errors.hpp"

namespace morcert::io
{

namespace fs = std::filesystem;
using nlohmann::json;

namespace
{

constexpr int kSchemaVersion = 1;

std::string format_index(Index i) { return std::to_string(i); }

Index parse_index(const std::string &text)
{
  long long v = 0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
  {
    throw IoError("malformed integer \"" + text + "\"");
  }
  return static_cast<Index>(v);
}

// Empty cell <-> NaN, used for the optional numeric CSV columns.
std::string format_optional(double x) { return std::isnan(x) ? std::string() : format_double(x); }

double parse_optional(const std::string &text)
{
  return text.empty() ? std::numeric_limits<double>::quiet_NaN() : parse_double(text);
}

std::vector<std::string> split(const std::string &line, char sep)
{
  std::vector<std::string> cells;
  size_t start = 0;
  while (true)
  {
    const size_t pos = line.find(sep, start);
    if (pos == std::string::npos)
    {
      cells.push_back(line.substr(start));
      return cells;
    }
    cells.push_back(line.substr(start, pos - start));
    start = pos + 1;
  }
}

std::vector<std::string> split_lines(const std::string &text)
{
  std::vector<std::string> lines;
  std::string current;
  for (const char c : text)
  {
    if (c == '\n')
    {
      if (!current.empty() && current.back() == '\r')
      {
        current.pop_back();
      }
      lines.push_back(std::move(current));
      current.clear();
    }
    else
    {
      current.push_back(c);
    }
  }
  if (!current.empty())
  {
    lines.push_back(std::move(current));
  }
  return lines;
}

// ---------------------------------------------------------------- matrices

enum class MmFormat
{
  Coordinate,
  Array
};

enum class MmField
{
  Real,
  Integer,
  Complex
};

enum class MmShape
{
  General,
  Symmetric,
  Hermitian,
  SkewSymmetric
};

std::string lower(std::string s)
{
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

void write_coordinate(std::ostream &os, const SparseMatrix &m)
{
  os << "%%MatrixMarket matrix coordinate complex general\n";
  os << m.rows() << ' ' << m.cols() << ' ' << m.nonZeros() << '\n';
  for (Index k = 0; k < m.outerSize(); ++k)
  {
    for (SparseMatrix::InnerIterator it(m, k); it; ++it)
    {
      os << (it.row() + 1) << ' ' << (it.col() + 1) << ' ' << format_double(it.value().real())
         << ' ' << format_double(it.value().imag()) << '\n';
    }
  }
}

void write_array(std::ostream &os, const DenseMatrix &m)
{
  os << "%%MatrixMarket matrix array complex general\n";
  os << m.rows() << ' ' << m.cols() << '\n';
  for (Index j = 0; j < m.cols(); ++j)
  {
    for (Index i = 0; i < m.rows(); ++i)
    {
      os << format_double(m(i, j).real()) << ' ' << format_double(m(i, j).imag()) << '\n';
    }
  }
}

// Feeds whitespace-separated tokens from the post-banner body, skipping
// whole-line comments.
class TokenReader
{
public:
  TokenReader(const std::vector<std::string> &lines, size_t first, std::string path)
      : lines_(lines), line_(first), path_(std::move(path))
  {
  }

  bool next(std::string &out)
  {
    while (true)
    {
      if (stream_.has_value() && (*stream_ >> out))
      {
        return true;
      }
      stream_.reset();
      while (line_ < lines_.size())
      {
        const std::string &l = lines_[line_++];
        const size_t pos = l.find_first_not_of(" \t");
        if (pos == std::string::npos || l[pos] == '%')
        {
          continue;
        }
        stream_.emplace(l);
        break;
      }
      if (!stream_.has_value())
      {
        return false;
      }
    }
  }

  std::string demand(const char *what)
  {
    std::string out;
    if (!next(out))
    {
      throw IoError(path_ + ": unexpected end of file while reading " + what);
    }
    return out;
  }

private:
  const std::vector<std::string> &lines_;
  size_t line_ = 0;
  std::optional<std::istringstream> stream_;
  std::string path_;
};

Complex read_value(TokenReader &tokens, MmField field)
{
  const double re = parse_double(tokens.demand("a matrix value"));
  const double im =
      field == MmField::Complex ? parse_double(tokens.demand("an imaginary part")) : 0.0;
  return Complex(re, im);
}

Complex mirror_value(const Complex &v, MmShape shape)
{
  switch (shape)
  {
    case MmShape::Symmetric:
      return v;
    case MmShape::Hermitian:
      return std::conj(v);
    case MmShape::SkewSymmetric:
      return -v;
    case MmShape::General:
      break;
  }
  return v;
}

} // namespace

std::string format_double(double x)
{
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

double parse_double(const std::string &text)
{
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (res.ec == std::errc::result_out_of_range)
  {
    // Out-of-range magnitudes round to 0 / +-inf like strtod.
    return std::strtod(text.c_str(), nullptr);
  }
  if (res.ec != std::errc() || res.ptr != text.data() + text.size())
  {
    throw IoError("malformed number \"" + text + "\"");
  }
  return v;
}

void write_text_file(const std::string &path, const std::string &text)
{
  const fs::path target(path);
  std::error_code ec;
  if (target.has_parent_path())
  {
    fs::create_directories(target.parent_path(), ec);
  }
  std::ofstream os(target, std::ios::binary | std::ios::trunc);
  if (!os)
  {
    throw IoError("cannot open \"" + path + "\" for writing");
  }
  os.write(text.data(), static_cast<std::streamsize>(text.size()));
  os.flush();
  if (!os)
  {
    throw IoError("short write to \"" + path + "\"");
  }
}

std::string read_text_file(const std::string &path)
{
  std::ifstream is(path, std::ios::binary);
  if (!is)
  {
    throw IoError("cannot open \"" + path + "\" for reading");
  }
  std::ostringstream os;
  os << is.rdbuf();
  if (is.bad())
  {
    throw IoError("read failure on \"" + path + "\"");
  }
  return os.str();
}

void write_matrix(const std::string &path, const ComplexMatrix &m)
{
  std::ostringstream os;
  if (m.is_sparse())
  {
    write_coordinate(os, m.sparse());
  }
  else
  {
    write_array(os, m.dense());
  }
  write_text_file(path, os.str());
}

ComplexMatrix read_matrix(const std::string &path)
{
  const std::vector<std::string> lines = split_lines(read_text_file(path));
  if (lines.empty())
  {
    throw IoError(path + ": empty file");
  }
  std::istringstream banner(lines[0]);
  std::string magic, object, format_name, field_name, shape_name;
  banner >> magic >> object >> format_name >> field_name >> shape_name;
  if (magic != "%%MatrixMarket" || lower(object) != "matrix")
  {
    throw IoError(path + ": not a Matrix Market matrix file");
  }

  MmFormat format;
  if (lower(format_name) == "coordinate")
  {
    format = MmFormat::Coordinate;
  }
  else if (lower(format_name) == "array")
  {
    format = MmFormat::Array;
  }
  else
  {
    throw IoError(path + ": unsupported format \"" + format_name + "\"");
  }

  MmField field;
  const std::string f = lower(field_name);
  if (f == "real")
  {
    field = MmField::Real;
  }
  else if (f == "integer")
  {
    field = MmField::Integer;
  }
  else if (f == "complex")
  {
    field = MmField::Complex;
  }
  else if (f == "pattern")
  {
    throw IoError(path + ": pattern matrices carry no values");
  }
  else
  {
    throw IoError(path + ": unsupported field \"" + field_name + "\"");
  }

  MmShape shape;
  const std::string s = lower(shape_name);
  if (s == "general")
  {
    shape = MmShape::General;
  }
  else if (s == "symmetric")
  {
    shape = MmShape::Symmetric;
  }
  else if (s == "hermitian")
  {
    shape = MmShape::Hermitian;
  }
  else if (s == "skew-symmetric")
  {
    shape = MmShape::SkewSymmetric;
  }
  else
  {
    throw IoError(path + ": unsupported shape \"" + shape_name + "\"");
  }

  TokenReader tokens(lines, 1, path);
  const Index rows = parse_index(tokens.demand("the row count"));
  const Index cols = parse_index(tokens.demand("the column count"));
  if (rows < 0 || cols < 0)
  {
    throw IoError(path + ": negative dimensions");
  }
  if (shape != MmShape::General && rows != cols)
  {
    throw IoError(path + ": a " + lower(shape_name) + " matrix must be square");
  }

  try
  {
    if (format == MmFormat::Coordinate)
    {
      const Index nnz = parse_index(tokens.demand("the entry count"));
      std::vector<Eigen::Triplet<Complex>> triplets;
      triplets.reserve(static_cast<size_t>(2 * nnz));
      for (Index k = 0; k < nnz; ++k)
      {
        const Index i = parse_index(tokens.demand("a row index")) - 1;
        const Index j = parse_index(tokens.demand("a column index")) - 1;
        if (i < 0 || i >= rows || j < 0 || j >= cols)
        {
          throw IoError(path + ": entry index out of range");
        }
        const Complex v = read_value(tokens, field);
        triplets.emplace_back(i, j, v);
        if (shape != MmShape::General && i != j)
        {
          triplets.emplace_back(j, i, mirror_value(v, shape));
        }
      }
      std::string extra;
      if (tokens.next(extra))
      {
        throw IoError(path + ": trailing data after the last entry");
      }
      SparseMatrix sp(rows, cols);
      sp.setFromTriplets(triplets.begin(), triplets.end());
      sp.makeCompressed();
      return ComplexMatrix(std::move(sp));
    }

    DenseMatrix d = DenseMatrix::Zero(rows, cols);
    for (Index j = 0; j < cols; ++j)
    {
      Index first = 0;
      if (shape == MmShape::Symmetric || shape == MmShape::Hermitian)
      {
        first = j;
      }
      else if (shape == MmShape::SkewSymmetric)
      {
        first = j + 1;
      }
      for (Index i = first; i < rows; ++i)
      {
        const Complex v = read_value(tokens, field);
        d(i, j) = v;
        if (shape != MmShape::General && i != j)
        {
          d(j, i) = mirror_value(v, shape);
        }
      }
    }
    std::string extra;
    if (tokens.next(extra))
    {
      throw IoError(path + ": trailing data after the last entry");
    }
    return ComplexMatrix(std::move(d));
  }
  catch (const IoError &)
  {
    throw;
  }
  catch (const std::exception &e)
  {
    throw IoError(path + ": " + e.what());
  }
}

void write_grid(const std::string &path, const ParameterGrid &grid)
{
  std::ostringstream os;
  os << "# one parameter point per line: freq or freq:extra0:extra1:...\n";
  for (const ParameterPoint &pt : grid.points)
  {
    os << format_point(pt) << '\n';
  }
  write_text_file(path, os.str());
}

ParameterGrid read_grid(const std::string &path)
{
  ParameterGrid grid;
  grid.provenance = ParameterGrid::Provenance::File;
  for (const std::string &line : split_lines(read_text_file(path)))
  {
    const size_t pos = line.find_first_not_of(" \t");
    if (pos == std::string::npos || line[pos] == '#')
    {
      continue;
    }
    try
    {
      grid.points.push_back(parse_point(line.substr(pos)));
    }
    catch (const Error &e)
    {
      throw IoError(path + ": " + e.what());
    }
  }
  return grid;
}

// ----------------------------------------------------------------- bundles

namespace
{

json domain_to_json(const ParameterDomain &domain)
{
  json ranges = json::array();
  for (const auto &[lo, hi] : domain.extra_ranges)
  {
    ranges.push_back(json::array({lo, hi}));
  }
  return json{{"f_min", domain.f_min},
              {"f_max", domain.f_max},
              {"extra_ranges", std::move(ranges)},
              {"extra_ref", domain.extra_ref}};
}

ParameterDomain domain_from_json(const json &j)
{
  ParameterDomain domain;
  domain.f_min = j.at("f_min").get<double>();
  domain.f_max = j.at("f_max").get<double>();
  domain.extra_ref = j.at("extra_ref").get<double>();
  for (const json &range : j.at("extra_ranges"))
  {
    domain.extra_ranges.emplace_back(range.at(0).get<double>(), range.at(1).get<double>());
  }
  return domain;
}

json coeff_to_json(const Coefficient &c)
{
  return json{{"value", c.value}, {"s_power", c.s_power}, {"ratio_index", c.ratio_index}};
}

Coefficient coeff_from_json(const json &j)
{
  Coefficient c;
  c.value = j.at("value").get<double>();
  c.s_power = j.at("s_power").get<int>();
  c.ratio_index = j.at("ratio_index").get<int>();
  return c;
}

// Writes one matrix per list element as <prefix><q>.mtx and returns the
// manifest fragment describing the list.
template <typename TermList>
json dump_term_list(const fs::path &dir, const std::string &prefix, const TermList &terms)
{
  json out = json::array();
  for (size_t q = 0; q < terms.size(); ++q)
  {
    const std::string file = prefix + std::to_string(q) + ".mtx";
    write_matrix((dir / file).string(), ComplexMatrix(terms[q].matrix));
    json entry = coeff_to_json(terms[q].coeff);
    entry["file"] = file;
    out.push_back(std::move(entry));
  }
  return out;
}

json dump_matrix_list(const fs::path &dir, const std::string &prefix,
                      const std::vector<DenseMatrix> &mats)
{
  json out = json::array();
  for (size_t q = 0; q < mats.size(); ++q)
  {
    const std::string file = prefix + std::to_string(q) + ".mtx";
    write_matrix((dir / file).string(), ComplexMatrix(mats[q]));
    out.push_back(file);
  }
  return out;
}

std::vector<ReducedTerm> load_reduced_terms(const fs::path &dir, const json &list)
{
  std::vector<ReducedTerm> terms;
  for (const json &entry : list)
  {
    ReducedTerm t;
    t.coeff = coeff_from_json(entry);
    t.matrix = read_matrix((dir / entry.at("file").get<std::string>()).string()).to_dense();
    terms.push_back(std::move(t));
  }
  return terms;
}

std::vector<DenseMatrix> load_matrix_list(const fs::path &dir, const json &list)
{
  std::vector<DenseMatrix> mats;
  for (const json &entry : list)
  {
    mats.push_back(read_matrix((dir / entry.get<std::string>()).string()).to_dense());
  }
  return mats;
}

std::string dump_basis(const fs::path &dir, const std::string &file, const BasisMatrix &v)
{
  write_matrix((dir / file).string(), ComplexMatrix(v.matrix()));
  return file;
}

BasisMatrix load_basis(const fs::path &dir, const json &file)
{
  return BasisMatrix::from_orthonormal(
      read_matrix((dir / file.get<std::string>()).string()).to_dense());
}

void check_manifest(const json &j, const char *kind, const std::string &path)
{
  if (j.at("kind").get<std::string>() != kind)
  {
    throw IoError(path + ": manifest kind \"" + j.at("kind").get<std::string>() +
                  "\" (expected \"" + kind + "\")");
  }
  const int version = j.at("schema_version").get<int>();
  if (version != kSchemaVersion)
  {
    throw IoError(path + ": unsupported schema_version " + std::to_string(version));
  }
}

json load_manifest(const std::string &path)
{
  try
  {
    return json::parse(read_text_file(path));
  }
  catch (const json::exception &e)
  {
    throw IoError(path + ": " + e.what());
  }
}

} // namespace

void write_system_bundle(const std::string &dir, const AffineSystem &sys)
{
  const fs::path base(dir);
  std::error_code ec;
  fs::create_directories(base, ec);

  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "affine_system";
  j["dimension"] = sys.dimension();
  j["ports"] = sys.ports();
  j["scale"] = sys.scale();
  j["domain"] = domain_to_json(sys.domain());

  json terms = json::array();
  for (size_t q = 0; q < sys.terms().size(); ++q)
  {
    const std::string file = "A" + std::to_string(q) + ".mtx";
    write_matrix((base / file).string(), sys.terms()[q].matrix);
    json entry = coeff_to_json(sys.terms()[q].coeff);
    entry["file"] = file;
    terms.push_back(std::move(entry));
  }
  j["terms"] = std::move(terms);

  json rhs = json::array();
  for (size_t q = 0; q < sys.rhs_terms().size(); ++q)
  {
    const std::string file = "Q" + std::to_string(q) + ".mtx";
    write_matrix((base / file).string(), sys.rhs_terms()[q].matrix);
    json entry = coeff_to_json(sys.rhs_terms()[q].coeff);
    entry["file"] = file;
    rhs.push_back(std::move(entry));
  }
  j["rhs_terms"] = std::move(rhs);

  write_text_file((base / "system.json").string(), j.dump(2) + "\n");
}

AffineSystem read_system_bundle(const std::string &dir)
{
  const fs::path base(dir);
  const std::string manifest_path = (base / "system.json").string();
  const json j = load_manifest(manifest_path);
  try
  {
    check_manifest(j, "affine_system", manifest_path);
    const ParameterDomain domain = domain_from_json(j.at("domain"));

    std::vector<AffineTerm> terms;
    for (const json &entry : j.at("terms"))
    {
      AffineTerm t;
      t.coeff = coeff_from_json(entry);
      t.matrix = read_matrix((base / entry.at("file").get<std::string>()).string());
      terms.push_back(std::move(t));
    }
    std::vector<RhsTerm> rhs;
    for (const json &entry : j.at("rhs_terms"))
    {
      RhsTerm t;
      t.coeff = coeff_from_json(entry);
      t.matrix = read_matrix((base / entry.at("file").get<std::string>()).string());
      rhs.push_back(std::move(t));
    }

    AffineSystem sys(domain, std::move(terms), std::move(rhs), j.at("scale").get<double>());
    if (sys.dimension() != j.at("dimension").get<Index>() ||
        sys.ports() != j.at("ports").get<Index>())
    {
      throw IoError(manifest_path + ": matrix shapes disagree with the manifest");
    }
    return sys;
  }
  catch (const json::exception &e)
  {
    throw IoError(manifest_path + ": " + e.what());
  }
}

void write_rom_bundle(const std::string &dir, const ReducedModel &rm,
                      const EstimatorState *estimator)
{
  const fs::path base(dir);
  std::error_code ec;
  fs::create_directories(base, ec);

  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "reduced_model";
  j["full_dimension"] = rm.full_dimension();
  j["order"] = rm.order();
  j["ports"] = rm.ports();
  j["scale"] = rm.scale();
  j["offline_seconds"] = rm.offline_seconds();
  j["domain"] = domain_to_json(rm.domain());
  j["basis"] = dump_basis(base, "V.mtx", rm.basis());
  j["terms"] = dump_term_list(base, "Ahat", rm.terms());
  j["rhs_terms"] = dump_term_list(base, "bhat", rm.rhs_terms());
  j["term_products"] = dump_matrix_list(base, "AV", rm.term_products());

  if (estimator != nullptr)
  {
    json e;
    e["estimator_kind"] = to_string(estimator->kind);
    e["svd_cap"] = estimator->svd_cap;
    e["v_r"] = dump_basis(base, "est_v_r.mtx", estimator->v_r);
    e["v_e"] = dump_basis(base, "est_v_e.mtx", estimator->v_e);
    e["error_terms"] = dump_term_list(base, "est_error_term", estimator->error_terms);
    e["error_term_products"] =
        dump_matrix_list(base, "est_error_product", estimator->error_term_products);
    e["error_cross_terms"] = dump_term_list(base, "est_error_cross", estimator->error_cross_terms);
    e["error_rhs_terms"] = dump_term_list(base, "est_error_rhs", estimator->error_rhs_terms);
    write_matrix((base / "est_probes.mtx").string(), ComplexMatrix(estimator->probes));
    e["probes"] = "est_probes.mtx";
    e["v_rd"] = dump_basis(base, "est_v_rd.mtx", estimator->v_rd);
    e["dual_terms"] = dump_term_list(base, "est_dual_term", estimator->dual_terms);
    e["dual_cross_terms"] = dump_term_list(base, "est_dual_cross", estimator->dual_cross_terms);
    e["dual_rhs_terms"] = dump_term_list(base, "est_dual_rhs", estimator->dual_rhs_terms);
    write_matrix((base / "est_probe_projection.mtx").string(),
                 ComplexMatrix(estimator->probe_projection));
    e["probe_projection"] = "est_probe_projection.mtx";
    j["estimator"] = std::move(e);
  }

  write_text_file((base / "rom.json").string(), j.dump(2) + "\n");
}

RomBundle read_rom_bundle(const std::string &dir)
{
  const fs::path base(dir);
  const std::string manifest_path = (base / "rom.json").string();
  const json j = load_manifest(manifest_path);
  try
  {
    check_manifest(j, "reduced_model", manifest_path);

    RomBundle bundle;
    bundle.rom = ReducedModel::from_parts(
        load_basis(base, j.at("basis")), load_reduced_terms(base, j.at("terms")),
        load_reduced_terms(base, j.at("rhs_terms")),
        load_matrix_list(base, j.at("term_products")), domain_from_json(j.at("domain")),
        j.at("ports").get<Index>(), j.at("scale").get<double>(),
        j.at("offline_seconds").get<double>());
    if (bundle.rom.full_dimension() != j.at("full_dimension").get<Index>() ||
        bundle.rom.order() != j.at("order").get<Index>())
    {
      throw IoError(manifest_path + ": basis shape disagrees with the manifest");
    }

    if (j.contains("estimator"))
    {
      const json &e = j.at("estimator");
      EstimatorState st;
      st.kind = estimator_kind_from_string(e.at("estimator_kind").get<std::string>());
      st.svd_cap = e.at("svd_cap").get<Index>();
      st.v_r = load_basis(base, e.at("v_r"));
      st.v_e = load_basis(base, e.at("v_e"));
      st.error_terms = load_reduced_terms(base, e.at("error_terms"));
      st.error_term_products = load_matrix_list(base, e.at("error_term_products"));
      st.error_cross_terms = load_reduced_terms(base, e.at("error_cross_terms"));
      st.error_rhs_terms = load_reduced_terms(base, e.at("error_rhs_terms"));
      st.probes = read_matrix((base / e.at("probes").get<std::string>()).string()).to_dense();
      st.v_rd = load_basis(base, e.at("v_rd"));
      st.dual_terms = load_reduced_terms(base, e.at("dual_terms"));
      st.dual_cross_terms = load_reduced_terms(base, e.at("dual_cross_terms"));
      st.dual_rhs_terms = load_reduced_terms(base, e.at("dual_rhs_terms"));
      st.probe_projection =
          read_matrix((base / e.at("probe_projection").get<std::string>()).string()).to_dense();
      bundle.estimator = std::move(st);
      bundle.has_estimator = true;
    }
    return bundle;
  }
  catch (const json::exception &e)
  {
    throw IoError(manifest_path + ": " + e.what());
  }
}

// --------------------------------------------------------------------- CSV

namespace
{

std::string sweep_header(size_t extras, Index outputs)
{
  std::string header = "freq";
  for (size_t e = 0; e < extras; ++e)
  {
    header += ",extra" + std::to_string(e);
  }
  header += ",port,solved,estimate,true_error,effectivity";
  for (Index k = 0; k < outputs; ++k)
  {
    header += ",out" + std::to_string(k) + "_re,out" + std::to_string(k) + "_im";
  }
  return header;
}

std::string sanitize(std::string text)
{
  std::replace(text.begin(), text.end(), '\n', ' ');
  std::replace(text.begin(), text.end(), '\r', ' ');
  return text;
}

} // namespace

std::string sweep_to_csv(const SweepResult &result)
{
  const size_t extras = result.grid.points.empty() ? 0 : result.grid.points.front().extra.size();
  std::ostringstream os;
  os << "# morcert_sweep," << kSchemaVersion << '\n';
  os << "# ports," << result.ports << '\n';
  os << "# outputs," << result.output_count << '\n';
  os << "# extras," << extras << '\n';
  os << "# offline_seconds," << format_double(result.offline_seconds) << '\n';
  os << "# online_seconds," << format_double(result.online_seconds) << '\n';
  os << "# grid_provenance,"
     << (result.grid.provenance == ParameterGrid::Provenance::File ? "file" : "generated") << '\n';
  for (const std::string &w : result.warnings)
  {
    os << "# warning," << sanitize(w) << '\n';
  }
  os << sweep_header(extras, result.output_count) << '\n';
  for (const SweepRow &row : result.rows)
  {
    os << format_double(row.point.freq);
    for (const double e : row.point.extra)
    {
      os << ',' << format_double(e);
    }
    os << ',' << row.port << ',' << (row.solved ? 1 : 0);
    os << ',' << format_optional(row.estimate);
    os << ',' << format_optional(row.true_error);
    os << ',' << format_optional(row.effectivity);
    for (Index k = 0; k < result.output_count; ++k)
    {
      if (static_cast<size_t>(k) < row.outputs.size())
      {
        const Complex &y = row.outputs[static_cast<size_t>(k)];
        os << ',' << format_double(y.real()) << ',' << format_double(y.imag());
      }
      else
      {
        os << ",,";
      }
    }
    os << '\n';
  }
  return os.str();
}

SweepResult sweep_from_csv(const std::string &text)
{
  SweepResult result;
  size_t extras = 0;
  bool saw_magic = false;
  const std::vector<std::string> lines = split_lines(text);
  size_t li = 0;
  for (; li < lines.size(); ++li)
  {
    const std::string &line = lines[li];
    if (line.empty())
    {
      continue;
    }
    if (line[0] != '#')
    {
      break;
    }
    const std::string body = line.size() > 2 ? line.substr(2) : std::string();
    const size_t comma = body.find(',');
    const std::string key = body.substr(0, comma);
    const std::string value = comma == std::string::npos ? std::string() : body.substr(comma + 1);
    if (key == "morcert_sweep")
    {
      if (parse_index(value) != kSchemaVersion)
      {
        throw IoError("sweep table: unsupported schema version " + value);
      }
      saw_magic = true;
    }
    else if (key == "ports")
    {
      result.ports = parse_index(value);
    }
    else if (key == "outputs")
    {
      result.output_count = parse_index(value);
    }
    else if (key == "extras")
    {
      extras = static_cast<size_t>(parse_index(value));
    }
    else if (key == "offline_seconds")
    {
      result.offline_seconds = parse_double(value);
    }
    else if (key == "online_seconds")
    {
      result.online_seconds = parse_double(value);
    }
    else if (key == "grid_provenance")
    {
      result.grid.provenance = value == "file" ? ParameterGrid::Provenance::File
                                               : ParameterGrid::Provenance::Generated;
    }
    else if (key == "warning")
    {
      result.warnings.push_back(value);
    }
    else
    {
      throw IoError("sweep table: unknown metadata key \"" + key + "\"");
    }
  }
  if (!saw_magic)
  {
    throw IoError("sweep table: missing morcert_sweep header");
  }
  if (li >= lines.size() || lines[li] != sweep_header(extras, result.output_count))
  {
    throw IoError("sweep table: header row disagrees with the metadata");
  }
  ++li;

  const size_t fixed = 1 + extras + 5;
  const size_t total = fixed + 2 * static_cast<size_t>(result.output_count);
  for (; li < lines.size(); ++li)
  {
    if (lines[li].empty())
    {
      continue;
    }
    const std::vector<std::string> cells = split(lines[li], ',');
    if (cells.size() != total)
    {
      throw IoError("sweep table: row with " + std::to_string(cells.size()) + " cells (expected " +
                    std::to_string(total) + ")");
    }
    SweepRow row;
    size_t c = 0;
    row.point.freq = parse_double(cells[c++]);
    for (size_t e = 0; e < extras; ++e)
    {
      row.point.extra.push_back(parse_double(cells[c++]));
    }
    row.port = parse_index(cells[c++]);
    const std::string &solved = cells[c++];
    if (solved != "0" && solved != "1")
    {
      throw IoError("sweep table: solved flag must be 0 or 1");
    }
    row.solved = solved == "1";
    row.estimate = parse_optional(cells[c++]);
    row.true_error = parse_optional(cells[c++]);
    row.effectivity = parse_optional(cells[c++]);
    if (result.output_count > 0 && !cells[fixed].empty())
    {
      for (Index k = 0; k < result.output_count; ++k)
      {
        const double re = parse_double(cells[c++]);
        const double im = parse_double(cells[c++]);
        row.outputs.emplace_back(re, im);
      }
    }
    if (row.port == 0)
    {
      result.grid.points.push_back(row.point);
    }
    result.rows.push_back(std::move(row));
  }
  if (result.ports > 0 &&
      result.rows.size() != result.grid.points.size() * static_cast<size_t>(result.ports))
  {
    throw IoError("sweep table: row count is not grid size times ports");
  }
  return result;
}

std::string greedy_to_csv(const GreedyReport &report)
{
  std::ostringstream os;
  os << "# morcert_greedy," << kSchemaVersion << '\n';
  os << "# reason," << to_string(report.reason) << '\n';
  os << "# final_estimate," << format_double(report.final_estimate) << '\n';
  os << "# dual_seconds," << format_double(report.dual_seconds) << '\n';
  for (const std::string &w : report.warnings)
  {
    os << "# warning," << sanitize(w) << '\n';
  }
  os << "iteration,basis_size,error_basis_size,eps_est,eps_true,effectivity,mu_star,mu_e_star\n";
  for (const GreedyIteration &it : report.iterations)
  {
    os << it.iteration << ',' << it.basis_size << ',' << it.error_basis_size;
    os << ',' << format_double(it.eps_est);
    os << ',' << format_optional(it.eps_true);
    os << ',' << format_optional(it.effectivity);
    os << ',' << format_point(it.mu_star);
    os << ',' << (it.has_mu_e ? format_point(it.mu_e_star) : std::string());
    os << '\n';
  }
  return os.str();
}

namespace
{

// JSON numbers cannot carry inf; spell non-finite magnitudes out as strings
// ("inf") and absent diagnostics as null.
json json_number(double x)
{
  if (std::isnan(x))
  {
    return json();
  }
  return std::isfinite(x) ? json(x) : json(format_double(x));
}

} // namespace

std::string greedy_report_json(const GreedyReport &report)
{
  json j;
  j["schema_version"] = kSchemaVersion;
  j["kind"] = "greedy_report";
  j["reason"] = to_string(report.reason);
  j["final_estimate"] = json_number(report.final_estimate);
  j["dual_seconds"] = report.dual_seconds;
  j["warnings"] = report.warnings;
  json iterations = json::array();
  for (const GreedyIteration &it : report.iterations)
  {
    json entry;
    entry["iteration"] = it.iteration;
    entry["basis_size"] = it.basis_size;
    entry["error_basis_size"] = it.error_basis_size;
    entry["eps_est"] = json_number(it.eps_est);
    entry["eps_true"] = json_number(it.eps_true);
    entry["effectivity"] = json_number(it.effectivity);
    entry["mu_star"] = format_point(it.mu_star);
    entry["mu_e_star"] = it.has_mu_e ? json(format_point(it.mu_e_star)) : json();
    iterations.push_back(std::move(entry));
  }
  j["iterations"] = std::move(iterations);
  return j.dump(2) + "\n";
}

} // namespace morcert::io
