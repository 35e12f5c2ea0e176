#pragma once

#include <algorithm>
#include <cstddef>
#include <map>
#include <memory>
#include <mutex>
#include <span>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "cosym/errors.hpp"

namespace cosym {

inline std::size_t binomial(int n, int k) {
  if (k < 0 || k > n) return 0;
  std::size_t r = 1;
  for (int i = 1; i <= k; ++i) r = r * static_cast<std::size_t>(n - k + i) / static_cast<std::size_t>(i);
  return r;
}

/// The strictly increasing k-subsets of {0, ..., n-1} in lexicographic order.
class MultiIndexSet {
 public:
  MultiIndexSet(int n, int k) : n_(n), k_(k) {
    std::vector<int> cur(static_cast<std::size_t>(k));
    build(0, 0, cur);
    for (std::size_t r = 0; r < sets_.size(); ++r) rank_.emplace(sets_[r], r);
  }

  int dimension() const noexcept { return n_; }
  int degree() const noexcept { return k_; }
  std::size_t size() const noexcept { return sets_.size(); }
  const std::vector<int>& operator[](std::size_t r) const { return sets_[r]; }

  /// Position of a strictly increasing index list.
  std::size_t rank_of(const std::vector<int>& sorted) const { return rank_.at(sorted); }

 private:
  void build(int start, int depth, std::vector<int>& cur) {
    if (depth == k_) {
      sets_.push_back(cur);
      return;
    }
    for (int i = start; i < n_; ++i) {
      cur[static_cast<std::size_t>(depth)] = i;
      build(i + 1, depth + 1, cur);
    }
  }

  int n_;
  int k_;
  std::vector<std::vector<int>> sets_;
  std::map<std::vector<int>, std::size_t> rank_;
};

/// Shared, lazily built index sets.
inline const MultiIndexSet& multi_indices(int n, int k) {
  static std::mutex mutex;
  static std::map<std::pair<int, int>, std::unique_ptr<MultiIndexSet>> cache;
  std::lock_guard lock(mutex);
  auto& slot = cache[{n, k}];
  if (!slot) slot = std::make_unique<MultiIndexSet>(n, k);
  return *slot;
}

/// Sorts `idx` in place and returns the sign of the sorting permutation, or 0
/// when an index repeats.
inline int sort_with_sign(std::vector<int>& idx) {
  int sign = 1;
  for (std::size_t i = 1; i < idx.size(); ++i) {
    for (std::size_t j = i; j > 0 && idx[j - 1] > idx[j]; --j) {
      std::swap(idx[j - 1], idx[j]);
      sign = -sign;
    }
  }
  for (std::size_t i = 1; i < idx.size(); ++i)
    if (idx[i] == idx[i - 1]) return 0;
  return sign;
}

/// Determinant of the submatrix with the given rows and columns.
inline double minor_det(const Eigen::MatrixXd& m, std::span<const int> rows, std::span<const int> cols) {
  const auto k = static_cast<Eigen::Index>(rows.size());
  if (k == 0) return 1.0;
  Eigen::MatrixXd sub(k, k);
  for (Eigen::Index a = 0; a < k; ++a)
    for (Eigen::Index b = 0; b < k; ++b) sub(a, b) = m(rows[static_cast<std::size_t>(a)], cols[static_cast<std::size_t>(b)]);
  if (k == 1) return sub(0, 0);
  if (k == 2) return sub(0, 0) * sub(1, 1) - sub(0, 1) * sub(1, 0);
  return sub.determinant();
}

}  // namespace cosym
