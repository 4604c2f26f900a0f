#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace csense {

using Index = Eigen::Index;

template <class Scalar>
using Vec = Eigen::Vector<Scalar, Eigen::Dynamic>;
template <class Scalar>
using Mat = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
template <class Scalar>
using CVec = Eigen::Vector<std::complex<Scalar>, Eigen::Dynamic>;

/// Strictly increasing 0-based index list. Plays the role of the row set
/// Omega (size n) or a support Lambda (size s).
class IndexSet {
 public:
  IndexSet() = default;

  explicit IndexSet(std::vector<Index> indices) : indices_(std::move(indices)) {
    if (indices_.empty()) throw std::invalid_argument("IndexSet: empty index list");
    std::sort(indices_.begin(), indices_.end());
    if (indices_.front() < 0) throw std::invalid_argument("IndexSet: negative index");
    if (std::adjacent_find(indices_.begin(), indices_.end()) != indices_.end())
      throw std::invalid_argument("IndexSet: duplicate index");
  }

  Index size() const { return static_cast<Index>(indices_.size()); }
  Index operator[](Index i) const { return indices_[static_cast<std::size_t>(i)]; }
  Index max_index() const { return indices_.back(); }

  bool contains(Index i) const {
    return std::binary_search(indices_.begin(), indices_.end(), i);
  }

  const std::vector<Index>& values() const { return indices_; }

  auto begin() const { return indices_.begin(); }
  auto end() const { return indices_.end(); }

  /// Indices of [0, ambient) not in the set, in increasing order.
  std::vector<Index> complement(Index ambient) const {
    std::vector<Index> out;
    out.reserve(static_cast<std::size_t>(ambient - size()));
    std::size_t k = 0;
    for (Index i = 0; i < ambient; ++i) {
      if (k < indices_.size() && indices_[k] == i) {
        ++k;
      } else {
        out.push_back(i);
      }
    }
    return out;
  }

 private:
  std::vector<Index> indices_;
};

inline IndexSet full_index_set(Index n) {
  std::vector<Index> v(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) v[static_cast<std::size_t>(i)] = i;
  return IndexSet(std::move(v));
}

}  // namespace csense
