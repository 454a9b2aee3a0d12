#include "sgamg/matrix_market.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iomanip>
#include <sstream>
#include <string>
#include <vector>

namespace sgamg {

namespace {

std::string lower(std::string s) {
  std::ranges::transform(s, s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

bool blank(const std::string& line) {
  return std::ranges::all_of(line, [](unsigned char c) { return std::isspace(c); });
}

}  // namespace

CsrMatrix read_matrix_market(std::istream& in) {
  std::string line;
  long lineno = 0;
  if (!std::getline(in, line)) throw MatrixMarketError("empty input", 1);
  ++lineno;

  std::istringstream header(line);
  std::string banner, object, format, field, symmetry;
  header >> banner >> object >> format >> field >> symmetry;
  if (banner != "%%MatrixMarket") throw MatrixMarketError("missing %%MatrixMarket banner", lineno);
  object = lower(object);
  format = lower(format);
  field = lower(field);
  symmetry = lower(symmetry);
  if (object != "matrix") throw MatrixMarketError("unsupported object '" + object + "'", lineno);
  if (format != "coordinate")
    throw MatrixMarketError("unsupported format '" + format + "'", lineno);
  if (field != "real")
    throw MatrixMarketError("unsupported field '" + field + "' (only real)", lineno);
  if (symmetry != "general" && symmetry != "symmetric")
    throw MatrixMarketError("unsupported symmetry '" + symmetry + "'", lineno);
  const bool symmetric = symmetry == "symmetric";

  long nrows = -1, ncols = -1, nnz = -1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%' || blank(line)) continue;
    std::istringstream size(line);
    if (!(size >> nrows >> ncols >> nnz) || nrows < 0 || ncols < 0 || nnz < 0)
      throw MatrixMarketError("malformed size line", lineno);
    break;
  }
  if (nrows < 0) throw MatrixMarketError("missing size line", lineno);
  if (symmetric && nrows != ncols)
    throw MatrixMarketError("symmetric matrix must be square", lineno);

  std::vector<Triplet<double>> entries;
  entries.reserve(static_cast<size_t>(symmetric ? 2 * nnz : nnz));
  long read = 0;
  while (read < nnz && std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '%' || blank(line)) continue;
    std::istringstream entry(line);
    long i = 0, j = 0;
    double v = 0.0;
    if (!(entry >> i >> j >> v)) throw MatrixMarketError("malformed entry", lineno);
    if (i < 1 || i > nrows || j < 1 || j > ncols)
      throw MatrixMarketError("index (" + std::to_string(i) + ", " + std::to_string(j) +
                                  ") out of bounds",
                              lineno);
    entries.push_back({i - 1, j - 1, v});
    if (symmetric && i != j) entries.push_back({j - 1, i - 1, v});
    ++read;
  }
  if (read != nnz)
    throw MatrixMarketError("expected " + std::to_string(nnz) + " entries, found " +
                                std::to_string(read),
                            lineno);
  return CsrMatrix::from_triplets(nrows, ncols, entries);
}

CsrMatrix read_matrix_market(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  return read_matrix_market(in);
}

void write_matrix_market(const CsrMatrix& A, std::ostream& out) {
  out << "%%MatrixMarket matrix coordinate real general\n";
  out << A.rows() << ' ' << A.cols() << ' ' << A.nnz() << '\n';
  out << std::setprecision(17);
  for (Index i = 0; i < A.rows(); ++i) {
    const auto cols = A.row_cols(i);
    const auto vals = A.row_values(i);
    for (size_t k = 0; k < cols.size(); ++k)
      out << i + 1 << ' ' << cols[k] + 1 << ' ' << vals[k] << '\n';
  }
}

void write_matrix_market(const CsrMatrix& A, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  write_matrix_market(A, out);
}

}  // namespace sgamg
