#pragma once

#include "sgamg/csr.hpp"

#include <Eigen/LU>

#include <string>
#include <string_view>
#include <vector>

namespace sgamg {

/// Strong-connection graph. `pattern` stores |a_ij| for every strong edge.
struct StrengthMatrix {
  CsrMatrix pattern;
  double threshold = 0.25;
};

enum class PointType : unsigned char { fine, coarse };

struct CfSplitting {
  std::vector<PointType> labels;
  /// coarse_index[i] in 0..n_c-1 for C points, -1 for F points.
  std::vector<Index> coarse_index;
  Index num_coarse = 0;

  bool is_coarse(Index i) const { return labels[i] == PointType::coarse; }
};

enum class Lumping { neighbors, diagonal };
enum class Variant { sparse, hybrid, nongalerkin };

std::string_view to_string(Lumping lumping);
std::string_view to_string(Variant variant);
Lumping parse_lumping(std::string_view name);
Variant parse_variant(std::string_view name);

/// Where a fraction of a dropped entry was added.
struct LumpDestination {
  Index row;
  Index col;
  double fraction;
};

struct DeltaRecord {
  Index row;
  Index col;
  double value_removed;
  std::vector<LumpDestination> destinations;
};

/// Exact record of what a sparsification removed and where it was lumped.
struct DeltaLog {
  double gamma = 0.0;
  std::vector<DeltaRecord> records;

  bool empty() const { return records.empty(); }
};

/// Per-level drop tolerances; gammas[0] is ignored since the finest operator
/// is never sparsified.
struct DropSchedule {
  std::vector<double> gammas;
  Lumping lumping = Lumping::diagonal;
  Variant variant = Variant::hybrid;

  void validate() const;
  /// Tolerance for level `level`, repeating the last entry past the end.
  double gamma_at(size_t level) const;
  /// Copy resized to `levels` entries (padding with the last value).
  DropSchedule fitted(size_t levels) const;
};

struct Level {
  CsrMatrix A;      ///< Galerkin operator
  CsrMatrix A_hat;  ///< operator used by relaxation and residuals
  CsrMatrix P;      ///< interpolation to the next level (empty on the coarsest)
  CsrMatrix P_inj;  ///< injection: unit entry on C rows, empty F rows
  StrengthMatrix S; ///< strength of A
  double gamma = 0.0;
  DeltaLog delta;

  Index size() const { return A.rows(); }
};

struct SetupParams {
  Index max_size = 300;
  double theta_s = 0.25;
  Index max_levels = 25;
  /// Keep at most this many interpolation weights per F row (0 = no truncation).
  Index trunc_max_elements = 0;
};

struct Hierarchy {
  std::vector<Level> levels;
  SetupParams params;
  /// Lumping/variant that produced the current A_hat operators.
  Lumping lumping = Lumping::diagonal;
  Variant variant = Variant::hybrid;
  bool stalled = false;
  Eigen::PartialPivLU<DenseMatrix<double>> coarsest;
  bool coarsest_singular = false;

  size_t num_levels() const { return levels.size(); }
  /// Refactors the dense coarsest-level solver from levels.back().A_hat.
  void factor_coarsest();
  std::vector<double> gammas() const;
};

}  // namespace sgamg
