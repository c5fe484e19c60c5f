// Row-streaming sparse Gaussian elimination over the reals, used to rank
// homogeneous constraint systems and to extract null-space vectors.
#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace nonloc {

/// Sorted (column, value) pairs.
using SparseRow = std::vector<std::pair<std::uint32_t, double>>;

inline double row_norm(const SparseRow& r) {
  double s = 0.0;
  for (const auto& [c, v] : r) s += v * v;
  return std::sqrt(s);
}

/// Thrown when elimination would exceed the configured fill-in budget.
class ResourceLimitError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Incremental row-echelon basis. Each accepted row is reduced against all
/// earlier pivots (in creation order) and normalized so its pivot entry is 1;
/// pivot k therefore vanishes on the pivot columns of pivots 0..k-1.
class SparseEliminator {
 public:
  /// `scale` is the reference magnitude (largest input row norm); a reduced
  /// row is independent iff its largest entry exceeds rank_tol * scale.
  SparseEliminator(std::size_t ncols, double scale, double rank_tol,
                   std::size_t max_nnz = 64'000'000)
      : ncols_(ncols),
        threshold_(rank_tol * scale),
        drop_(1e-13 * scale),
        max_nnz_(max_nnz),
        work_(ncols, 0.0),
        touched_flag_(ncols, 0),
        pivot_of_col_(ncols, -1) {}

  std::size_t cols() const { return ncols_; }
  std::size_t rank() const { return pivots_.size(); }
  std::size_t stored_nnz() const { return nnz_; }

  /// Returns true if the row was linearly independent of the current basis.
  bool add_row(const SparseRow& row) {
    for (const auto& [c, v] : row) {
      if (c >= ncols_) throw std::out_of_range("SparseEliminator: column out of range");
      touch(c);
      work_[c] += v;
    }
    using Item = std::int64_t;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> queue;
    for (auto c : touched_)
      if (pivot_of_col_[c] >= 0) queue.push(pivot_of_col_[c]);

    while (!queue.empty()) {
      const auto k = static_cast<std::size_t>(queue.top());
      queue.pop();
      const auto pc = pivot_col_[k];
      const double f = work_[pc];
      if (f == 0.0) continue;
      for (const auto& [c, v] : pivots_[k]) {
        if (!touched_flag_[c]) {
          touch(c);
          if (pivot_of_col_[c] >= 0) queue.push(pivot_of_col_[c]);
        }
        work_[c] -= f * v;
      }
      work_[pc] = 0.0;
    }

    double best = 0.0;
    std::uint32_t best_col = 0;
    for (auto c : touched_) {
      const double a = std::abs(work_[c]);
      if (a > best || (a == best && a > 0.0 && c < best_col)) {
        best = a;
        best_col = c;
      }
    }
    bool independent = best > threshold_;
    if (independent) {
      SparseRow r;
      const double inv = 1.0 / work_[best_col];
      std::sort(touched_.begin(), touched_.end());
      for (auto c : touched_) {
        const double v = work_[c];
        if (c == best_col)
          r.emplace_back(c, 1.0);
        else if (std::abs(v) > drop_ && pivot_of_col_[c] < 0)
          r.emplace_back(c, v * inv);
      }
      nnz_ += r.size();
      if (nnz_ > max_nnz_) {
        clear_work();
        throw ResourceLimitError("sparse elimination exceeded the fill-in budget of " +
                                 std::to_string(max_nnz_) + " stored entries");
      }
      pivot_of_col_[best_col] = static_cast<std::int64_t>(pivots_.size());
      pivot_col_.push_back(best_col);
      pivots_.push_back(std::move(r));
    }
    clear_work();
    return independent;
  }

  std::vector<std::uint32_t> free_columns() const {
    std::vector<std::uint32_t> f;
    for (std::uint32_t c = 0; c < ncols_; ++c)
      if (pivot_of_col_[c] < 0) f.push_back(c);
    return f;
  }

  /// Null-space vector with x[free_col] = 1 and every other free column 0.
  std::vector<double> null_vector(std::uint32_t free_col) const {
    if (free_col >= ncols_ || pivot_of_col_[free_col] >= 0)
      throw std::invalid_argument("null_vector: column is not free");
    std::vector<double> x(ncols_, 0.0);
    x[free_col] = 1.0;
    for (std::size_t k = pivots_.size(); k-- > 0;) {
      double acc = 0.0;
      for (const auto& [c, v] : pivots_[k])
        if (c != pivot_col_[k]) acc += v * x[c];
      x[pivot_col_[k]] = -acc;
    }
    return x;
  }

 private:
  void touch(std::uint32_t c) {
    if (!touched_flag_[c]) {
      touched_flag_[c] = 1;
      touched_.push_back(c);
    }
  }

  void clear_work() {
    for (auto c : touched_) {
      work_[c] = 0.0;
      touched_flag_[c] = 0;
    }
    touched_.clear();
  }

  std::size_t ncols_;
  double threshold_;
  double drop_;
  std::size_t max_nnz_;
  std::size_t nnz_ = 0;
  std::vector<double> work_;
  std::vector<char> touched_flag_;
  std::vector<std::uint32_t> touched_;
  std::vector<std::int64_t> pivot_of_col_;
  std::vector<std::uint32_t> pivot_col_;
  std::vector<SparseRow> pivots_;
};

}  // namespace nonloc
