#pragma once

#include "sgamg/hierarchy.hpp"

#include <iosfwd>
#include <utility>
#include <vector>

namespace sgamg::perf {

struct ModelParams {
  double alpha = 1.8e-6;  ///< seconds per message
  double beta = 1.8e-9;   ///< seconds per unit of message size
  double c = 1e-10;       ///< seconds per flop
  Index procs = 64;
  /// Units in which beta is charged: per 8-byte word (default) or per byte.
  enum class Unit { words, bytes } unit = Unit::words;

  void validate() const;
};

/// Half-open row range [begin, end) owned by one virtual process.
using RowRange = std::pair<Index, Index>;

/// Contiguous balanced blocks; the first n mod p blocks get one extra row.
std::vector<RowRange> partition_rows(Index n, Index procs);

struct ProcessStats {
  Index local_nnz = 0;
  Index rows = 0;
  /// (owner, words) for every remote owner this process receives from.
  std::vector<std::pair<Index, Index>> recv;
  /// (destination, words) for every process this owner sends to.
  std::vector<std::pair<Index, Index>> send;

  Index send_count() const { return static_cast<Index>(recv.size()); }
};

struct PartitionStats {
  std::vector<ProcessStats> procs;
  double nnz_p = 0.0;   ///< mean local nnz
  Index s_p_max = 0;    ///< max messages per process
  Index n_p_max = 0;    ///< largest single message, in words
  Index total_words = 0;
};

/// Row-wise partition of A over `procs` owners. Each owner receives, from
/// every remote owner r, the distinct columns owned by r that its rows
/// reference. The send count of a process is modelled by its receive count.
PartitionStats comm_stats(const CsrMatrix& A, Index procs);

/// T = 2 c nnz_p + s_p_max (alpha + beta n_p_max).
double modeled_spmv_time(const PartitionStats& stats, const ModelParams& params);

/// Median wall time of `repeats` SpMVs divided by 2 nnz.
double calibrate_c(const CsrMatrix& A, int repeats = 5);

struct LevelProfile {
  size_t level = 0;
  Index n = 0;
  Index nnz = 0;
  double nnz_per_row = 0.0;
  Index sends_max = 0;
  Index msg_words_max = 0;
  Index total_words = 0;
  double modeled_seconds = 0.0;
};

/// One record per level for A (use_sparsified = false) or A_hat. When
/// `calibrate` is set, c is measured per level.
std::vector<LevelProfile> hierarchy_profile(const Hierarchy& H, const ModelParams& params,
                                            bool use_sparsified, bool calibrate = false);

/// Sum over levels of s_p_max of the operators used in the solve.
Index hierarchy_sends(const Hierarchy& H, Index procs);

/// CSV: level,n,nnz,nnz_per_row,sends_max,msg_words_max,total_words,modeled_seconds
void write_profile_csv(const std::vector<LevelProfile>& profile, std::ostream& out);

}  // namespace sgamg::perf
