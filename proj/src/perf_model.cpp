#include "sgamg/perf_model.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <ostream>
#include <stdexcept>

namespace sgamg::perf {

void ModelParams::validate() const {
  if (!(alpha > 0.0 && beta > 0.0 && c > 0.0) || procs < 1)
    throw std::invalid_argument("model parameters must be positive");
}

std::vector<RowRange> partition_rows(Index n, Index procs) {
  if (procs < 1) throw std::invalid_argument("partition_rows: need at least one process");
  if (n < 0) throw std::invalid_argument("partition_rows: negative row count");
  std::vector<RowRange> ranges(procs);
  const Index base = n / procs, extra = n % procs;
  Index start = 0;
  for (Index q = 0; q < procs; ++q) {
    const Index len = base + (q < extra ? 1 : 0);
    ranges[q] = {start, start + len};
    start += len;
  }
  return ranges;
}

namespace {

Index owner_of(Index row, Index n, Index procs) {
  const Index base = n / procs, extra = n % procs;
  const Index split = extra * (base + 1);
  if (row < split) return row / (base + 1);
  return extra + (row - split) / base;
}

}  // namespace

PartitionStats comm_stats(const CsrMatrix& A, Index procs) {
  if (!A.is_square()) throw DimensionError("comm_stats: matrix is not square");
  const Index n = A.rows();
  const auto ranges = partition_rows(n, procs);
  PartitionStats stats;
  stats.procs.resize(procs);

  std::vector<Index> seen(n, -1);
  std::vector<Index> words(procs, 0);
  std::vector<Index> touched;
  for (Index q = 0; q < procs; ++q) {
    ProcessStats& ps = stats.procs[q];
    const auto [begin, end] = ranges[q];
    ps.rows = end - begin;
    touched.clear();
    for (Index i = begin; i < end; ++i) {
      ps.local_nnz += static_cast<Index>(A.row_cols(i).size());
      for (Index j : A.row_cols(i)) {
        if (j >= begin && j < end) continue;
        if (seen[j] == q) continue;
        seen[j] = q;
        const Index r = owner_of(j, n, procs);
        if (words[r]++ == 0) touched.push_back(r);
      }
    }
    std::sort(touched.begin(), touched.end());
    for (Index r : touched) {
      ps.recv.emplace_back(r, words[r]);
      words[r] = 0;
    }
  }
  for (Index q = 0; q < procs; ++q)
    for (const auto& [r, w] : stats.procs[q].recv) stats.procs[r].send.emplace_back(q, w);

  Index nnz_total = 0;
  for (const auto& ps : stats.procs) {
    nnz_total += ps.local_nnz;
    stats.s_p_max = std::max(stats.s_p_max, ps.send_count());
    for (const auto& [r, w] : ps.recv) {
      stats.n_p_max = std::max(stats.n_p_max, w);
      stats.total_words += w;
    }
  }
  stats.nnz_p = static_cast<double>(nnz_total) / static_cast<double>(procs);
  return stats;
}

double modeled_spmv_time(const PartitionStats& stats, const ModelParams& params) {
  const double size =
      static_cast<double>(stats.n_p_max) * (params.unit == ModelParams::Unit::bytes ? 8.0 : 1.0);
  return 2.0 * params.c * stats.nnz_p +
         static_cast<double>(stats.s_p_max) * (params.alpha + params.beta * size);
}

double calibrate_c(const CsrMatrix& A, int repeats) {
  if (A.nnz() == 0) throw std::invalid_argument("calibrate_c: matrix has no nonzeros");
  if (repeats < 3) throw std::invalid_argument("calibrate_c: need at least 3 repeats");
  const DenseVector x = DenseVector::Ones(A.cols());
  std::vector<double> times;
  volatile double sink = 0.0;
  for (int r = 0; r < repeats; ++r) {
    const auto t0 = std::chrono::steady_clock::now();
    const DenseVector y = spmv(A, x);
    const auto t1 = std::chrono::steady_clock::now();
    sink = sink + y.sum();
    times.push_back(std::chrono::duration<double>(t1 - t0).count());
  }
  std::nth_element(times.begin(), times.begin() + times.size() / 2, times.end());
  const double median = std::max(times[times.size() / 2], 1e-12);
  return median / (2.0 * static_cast<double>(A.nnz()));
}

std::vector<LevelProfile> hierarchy_profile(const Hierarchy& H, const ModelParams& params,
                                            bool use_sparsified, bool calibrate) {
  params.validate();
  std::vector<LevelProfile> out;
  for (size_t l = 0; l < H.levels.size(); ++l) {
    const CsrMatrix& A = use_sparsified ? H.levels[l].A_hat : H.levels[l].A;
    const PartitionStats stats = comm_stats(A, params.procs);
    ModelParams level_params = params;
    if (calibrate && A.nnz() > 0) level_params.c = calibrate_c(A, 5);
    LevelProfile rec;
    rec.level = l;
    rec.n = A.rows();
    rec.nnz = A.nnz();
    rec.nnz_per_row = A.rows() > 0 ? static_cast<double>(A.nnz()) / static_cast<double>(A.rows()) : 0.0;
    rec.sends_max = stats.s_p_max;
    rec.msg_words_max = stats.n_p_max;
    rec.total_words = stats.total_words;
    rec.modeled_seconds = modeled_spmv_time(stats, level_params);
    out.push_back(rec);
  }
  return out;
}

Index hierarchy_sends(const Hierarchy& H, Index procs) {
  Index total = 0;
  for (const auto& level : H.levels) total += comm_stats(level.A_hat, procs).s_p_max;
  return total;
}

void write_profile_csv(const std::vector<LevelProfile>& profile, std::ostream& out) {
  out << "level,n,nnz,nnz_per_row,sends_max,msg_words_max,total_words,modeled_seconds\n";
  char buf[256];
  for (const auto& r : profile) {
    std::snprintf(buf, sizeof buf, "%zu,%td,%td,%.6f,%td,%td,%td,%.9e\n", r.level, r.n, r.nnz,
                  r.nnz_per_row, r.sends_max, r.msg_words_max, r.total_words, r.modeled_seconds);
    out << buf;
  }
}

}  // namespace sgamg::perf
