#pragma once

#include "sgamg/csr.hpp"

#include <filesystem>
#include <iosfwd>
#include <stdexcept>

namespace sgamg {

/// Parse failure in a Matrix Market stream; `line()` is 1-based.
class MatrixMarketError : public std::runtime_error {
 public:
  MatrixMarketError(const std::string& what, long line)
      : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}
  long line() const { return line_; }

 private:
  long line_;
};

/// Reads `coordinate real {general|symmetric}`. Symmetric storage is expanded,
/// duplicates are summed and the result is canonical.
CsrMatrix read_matrix_market(std::istream& in);
CsrMatrix read_matrix_market(const std::filesystem::path& path);

/// Writes `coordinate real general` with 17 significant digits.
void write_matrix_market(const CsrMatrix& A, std::ostream& out);
void write_matrix_market(const CsrMatrix& A, const std::filesystem::path& path);

}  // namespace sgamg
