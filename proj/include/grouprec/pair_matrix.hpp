#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <vector>

#include "grouprec/domain.hpp"

namespace grouprec {

/// Square member-by-member matrix. Rows and columns follow `members()`,
/// which is kept sorted by MemberId.
class PairMatrix {
 public:
  PairMatrix() = default;

  explicit PairMatrix(std::vector<MemberId> members, double fill = 0.0)
      : members_(std::move(members)), data_(members_.size() * members_.size(), fill) {
    std::sort(members_.begin(), members_.end());
  }

  std::size_t size() const noexcept { return members_.size(); }
  bool empty() const noexcept { return members_.empty(); }
  const std::vector<MemberId>& members() const noexcept { return members_; }

  double& operator()(std::size_t row, std::size_t col) { return data_[row * size() + col]; }
  double operator()(std::size_t row, std::size_t col) const { return data_[row * size() + col]; }

  std::optional<std::size_t> index_of(const MemberId& m) const {
    auto it = std::lower_bound(members_.begin(), members_.end(), m);
    if (it == members_.end() || *it != m) return std::nullopt;
    return static_cast<std::size_t>(it - members_.begin());
  }

  double at(const MemberId& row, const MemberId& col) const {
    auto r = index_of(row);
    auto c = index_of(col);
    if (!r || !c) throw Error(ErrorKind::unknown_member, "member not in matrix");
    return (*this)(*r, *c);
  }

  PairMatrix transposed() const {
    PairMatrix t(members_);
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = 0; j < size(); ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  const std::vector<double>& data() const noexcept { return data_; }

  friend bool operator==(const PairMatrix&, const PairMatrix&) = default;

 private:
  std::vector<MemberId> members_;
  std::vector<double> data_;
};

}  // namespace grouprec
