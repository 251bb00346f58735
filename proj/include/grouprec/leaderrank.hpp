#pragma once

// LeaderRank over the composite similarity/trust matrix.
//
// Graph: member v -> member u with weight max(M(v, u), 0) / max_positive(M),
// plus a ground node g linked to and from every member with weight 1. The
// scaling by the largest positive entry makes the result independent of the
// overall scale of M. Each step moves every node's score along its
// out-edges in proportion to edge weight, then adds epsilon * R(g) to every
// member. With epsilon > 0 that term injects mass, so the iterate is
// rescaled to the initial total n + 1 after every step (a no-op when
// epsilon = 0). After convergence R(g) is shared evenly among members.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "grouprec/domain.hpp"
#include "grouprec/pair_matrix.hpp"

namespace grouprec {

struct CompositeMatrix {
  PairMatrix matrix;
  double lambda1 = 0.5;  // similarity
  double lambda2 = 0.5;  // trust
};

inline CompositeMatrix composite_matrix(const PairMatrix& similarity, const PairMatrix& trust,
                                        double lambda1 = 0.5, double lambda2 = 0.5) {
  if (similarity.members() != trust.members()) {
    throw Error(ErrorKind::dimension_mismatch,
                "similarity and trust matrices cover different members");
  }
  CompositeMatrix out{PairMatrix(similarity.members()), lambda1, lambda2};
  for (std::size_t i = 0; i < similarity.size(); ++i) {
    for (std::size_t j = 0; j < similarity.size(); ++j) {
      if (i != j) out.matrix(i, j) = lambda1 * similarity(i, j) + lambda2 * trust(i, j);
    }
  }
  return out;
}

struct LeaderRankParams {
  double ground_epsilon = 0.1;
  double tolerance = 1e-9;
  int max_iterations = 1000;
};

struct InfluenceScores {
  std::vector<MemberId> members;
  std::vector<double> scores;  // after the ground share is redistributed
  double ground = 0.0;         // R(g) at convergence, before redistribution
  int iterations = 0;
  bool converged = false;
  double mass_drift = 0.0;  // relative mass gained by the last raw step

  double of(const MemberId& m) const {
    for (std::size_t i = 0; i < members.size(); ++i)
      if (members[i] == m) return scores[i];
    throw Error(ErrorKind::unknown_member, "no score for " + m.str());
  }
};

/// Row-stochastic view of the member graph with the ground node appended
/// as the last node.
struct GroundedGraph {
  std::size_t members = 0;
  std::vector<double> weight;  // (members + 1)^2, row = source
  std::vector<double> out_degree;

  double w(std::size_t from, std::size_t to) const { return weight[from * (members + 1) + to]; }
};

inline GroundedGraph make_grounded_graph(const PairMatrix& m) {
  const std::size_t n = m.size();
  GroundedGraph g;
  g.members = n;
  g.weight.assign((n + 1) * (n + 1), 0.0);
  g.out_degree.assign(n + 1, 0.0);
  double scale = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) scale = std::max(scale, m(i, j));
  for (std::size_t v = 0; v < n; ++v) {
    for (std::size_t u = 0; u < n; ++u) {
      if (u == v || scale <= 0.0) continue;
      g.weight[v * (n + 1) + u] = std::max(m(v, u), 0.0) / scale;
    }
    g.weight[v * (n + 1) + n] = 1.0;  // member -> ground
    g.weight[n * (n + 1) + v] = 1.0;  // ground -> member
  }
  for (std::size_t v = 0; v <= n; ++v) {
    double d = 0.0;
    for (std::size_t u = 0; u <= n; ++u) d += g.weight[v * (n + 1) + u];
    g.out_degree[v] = d;
  }
  return g;
}

/// One propagation step on scores laid out as [members..., ground]. Returns
/// the total mass of `next`.
inline double leaderrank_step(const GroundedGraph& g, std::span<const double> current,
                              std::span<double> next, double ground_epsilon) {
  const std::size_t n = g.members;
  std::fill(next.begin(), next.end(), 0.0);
  for (std::size_t v = 0; v <= n; ++v) {
    const double share = current[v] / g.out_degree[v];
    for (std::size_t u = 0; u <= n; ++u) {
      const double w = g.w(v, u);
      if (w != 0.0) next[u] += w * share;
    }
  }
  if (ground_epsilon != 0.0) {
    for (std::size_t u = 0; u < n; ++u) next[u] += ground_epsilon * current[n];
  }
  double mass = 0.0;
  for (double x : next) mass += x;
  return mass;
}

inline InfluenceScores leaderrank_scores(const CompositeMatrix& composite,
                                         const LeaderRankParams& params = {}) {
  const PairMatrix& m = composite.matrix;
  const std::size_t n = m.size();
  if (n < 2) throw Error(ErrorKind::validation, "LeaderRank needs at least two members");

  const GroundedGraph g = make_grounded_graph(m);
  const double total = static_cast<double>(n + 1);
  std::vector<double> cur(n + 1, 1.0);
  std::vector<double> next(n + 1, 0.0);

  InfluenceScores out;
  out.members = m.members();
  for (int it = 1; it <= params.max_iterations; ++it) {
    const double mass = leaderrank_step(g, cur, next, params.ground_epsilon);
    out.mass_drift = mass / total - 1.0;
    if (params.ground_epsilon != 0.0) {
      for (double& x : next) x *= total / mass;
    }
    double change = 0.0;
    for (std::size_t i = 0; i <= n; ++i) change = std::max(change, std::abs(next[i] - cur[i]));
    cur.swap(next);
    out.iterations = it;
    if (change < params.tolerance) {
      out.converged = true;
      break;
    }
  }
  out.ground = cur[n];
  out.scores.assign(cur.begin(), cur.begin() + static_cast<std::ptrdiff_t>(n));
  for (double& s : out.scores) s += out.ground / static_cast<double>(n);
  return out;
}

/// Scores are compared after rounding to 1e-9 so that values equal up to
/// floating-point noise tie; ties go to the smallest MemberId.
inline long long score_key(double x) { return std::llround(x * 1e9); }

inline MemberId select_leader(const InfluenceScores& scores) {
  if (scores.members.empty()) throw Error(ErrorKind::validation, "no members to rank");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.members.size(); ++i) {
    const auto ki = score_key(scores.scores[i]);
    const auto kb = score_key(scores.scores[best]);
    if (ki > kb || (ki == kb && scores.members[i] < scores.members[best])) best = i;
  }
  return scores.members[best];
}

}  // namespace grouprec
