#pragma once

// Pearson correlation between members' explicit ratings.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "grouprec/domain.hpp"
#include "grouprec/pair_matrix.hpp"

namespace grouprec {

/// Pearson correlation of two equally long samples, centred on their own
/// means. Fewer than two points or a zero-variance side give 0.
template <typename T>
double pearson(std::span<const T> x, std::span<const T> y) {
  const std::size_t n = std::min(x.size(), y.size());
  if (n < 2) return 0.0;
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    mx += static_cast<double>(x[i]);
    my += static_cast<double>(y[i]);
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = static_cast<double>(x[i]) - mx;
    const double dy = static_cast<double>(y[i]) - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx == 0.0 || syy == 0.0) return 0.0;
  const double r = sxy / (std::sqrt(sxx) * std::sqrt(syy));
  return std::clamp(r, -1.0, 1.0);
}

/// Ratings of `u` and `v` on restaurants both rated explicitly, in
/// restaurant order. Implicit zeros never enter the overlap.
inline std::pair<std::vector<double>, std::vector<double>> co_rated(const MemberId& u,
                                                                    const MemberId& v,
                                                                    const RatingTable& ratings) {
  std::pair<std::vector<double>, std::vector<double>> out;
  const auto& ru = ratings.of(u);
  const auto& rv = ratings.of(v);
  auto a = ru.begin();
  auto b = rv.begin();
  while (a != ru.end() && b != rv.end()) {
    if (a->first < b->first) {
      ++a;
    } else if (b->first < a->first) {
      ++b;
    } else {
      out.first.push_back(a->second);
      out.second.push_back(b->second);
      ++a;
      ++b;
    }
  }
  return out;
}

inline double pcc(const MemberId& u, const MemberId& v, const RatingTable& ratings) {
  auto [x, y] = co_rated(u, v, ratings);
  return pearson<double>(x, y);
}

/// Symmetric matrix of pairwise PCC values with a zero diagonal.
inline PairMatrix similarity_matrix(const std::vector<MemberId>& group, const RatingTable& ratings) {
  PairMatrix m(group);
  const auto& ids = m.members();
  for (std::size_t i = 0; i < m.size(); ++i) {
    for (std::size_t j = i + 1; j < m.size(); ++j) {
      const double s = pcc(ids[i], ids[j], ratings);
      m(i, j) = s;
      m(j, i) = s;
    }
  }
  return m;
}

}  // namespace grouprec
