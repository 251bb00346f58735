#pragma once

// Discussion-termination monitor driven by the entropy of the trust and
// similarity matrices.
//
// Entropies are recorded on a fixed cadence from the start of the
// discussion. From the arm time onward each recorded tick updates one
// consecutive-satisfaction counter per criterion:
//   1. H_trust < H_similarity
//   2. |dH_trust| < eps and |dH_similarity| < eps against the previous tick
//   3. the mean of |dH| over the N changes preceding the current tick is
//      < eps, for both matrices
// A criterion whose counter reaches C stops the discussion; the hard stop
// applies regardless.

#include <array>
#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <limits>
#include <string>
#include <vector>

#include "grouprec/domain.hpp"
#include "grouprec/pair_matrix.hpp"

namespace grouprec {

/// Shannon entropy (nats) of the off-diagonal entries read as a
/// distribution. Entries are shifted up by the minimum when it is negative.
/// All-equal entries are the uniform case, log(n(n-1)).
inline double matrix_entropy(const PairMatrix& m) {
  const std::size_t n = m.size();
  if (n < 2) throw Error(ErrorKind::validation, "entropy needs at least two members");
  std::vector<double> values;
  values.reserve(n * (n - 1));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (i != j) values.push_back(m(i, j));
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) return std::log(static_cast<double>(values.size()));
  const double shift = *lo < 0.0 ? -*lo : 0.0;
  double total = 0.0;
  for (double& v : values) total += (v += shift);
  if (total <= 0.0) return 0.0;
  double h = 0.0;
  for (double v : values) {
    if (v <= 0.0) continue;
    const double p = v / total;
    h -= p * std::log(p);
  }
  return h;
}

struct TerminationConfig {
  Millis arm_ms = 600'000;
  Millis hard_stop_ms = 1'200'000;
  double epsilon = 0.01;
  int consecutive = 3;  // C
  int window = 3;       // N
  Millis interval_ms = 30'000;

  void validate() const {
    if (arm_ms >= hard_stop_ms) throw Error(ErrorKind::validation, "arm time must precede hard stop");
    if (consecutive < 1) throw Error(ErrorKind::validation, "consecutive count must be >= 1");
    if (window < 1) throw Error(ErrorKind::validation, "averaging window must be >= 1");
    if (interval_ms <= 0) throw Error(ErrorKind::validation, "tick interval must be > 0");
    if (!(epsilon > 0.0)) throw Error(ErrorKind::validation, "epsilon must be > 0");
  }
};

struct EntropyTick {
  std::size_t index = 0;
  Millis since_start = 0;
  double entropy_trust = 0.0;
  double entropy_similarity = 0.0;
  friend bool operator==(const EntropyTick&, const EntropyTick&) = default;
};

enum class StopKind { none, hard, criteria, forced };

struct TerminationDecision {
  StopKind kind = StopKind::none;
  std::vector<int> criteria;  // 1-based, only for StopKind::criteria

  bool stop() const { return kind != StopKind::none; }

  /// "hard_stop", "criterion2", "criterion1+criterion2", ...
  std::string reason() const {
    switch (kind) {
      case StopKind::none: return "";
      case StopKind::hard: return "hard_stop";
      case StopKind::forced: return "forced";
      case StopKind::criteria: break;
    }
    std::string out;
    for (int c : criteria) {
      if (!out.empty()) out += '+';
      out += "criterion" + std::to_string(c);
    }
    return out;
  }
};

class TerminationMonitor {
 public:
  explicit TerminationMonitor(TerminationConfig config = {}) : config_(config) {
    config_.validate();
  }

  const TerminationConfig& config() const { return config_; }

  void record_tick(const PairMatrix& trust, const PairMatrix& similarity, Millis since_start) {
    record_entropies(matrix_entropy(trust), matrix_entropy(similarity), since_start);
  }

  void record_entropies(double entropy_trust, double entropy_similarity, Millis since_start) {
    if (!history_.empty() && since_start < history_.back().since_start + config_.interval_ms) {
      throw Error(ErrorKind::out_of_order,
                  "entropy tick at " + std::to_string(since_start) + " ms arrives before " +
                      std::to_string(history_.back().since_start + config_.interval_ms) + " ms");
    }
    history_.push_back({ticks_, since_start, entropy_trust, entropy_similarity});
    ++ticks_;
    while (history_.size() > retained()) history_.pop_front();

    if (since_start < config_.arm_ms) return;
    const std::array<bool, 3> held{criterion1(), criterion2(), criterion3()};
    for (std::size_t i = 0; i < 3; ++i) counters_[i] = held[i] ? counters_[i] + 1 : 0;
  }

  TerminationDecision should_terminate(Millis since_start) const {
    if (since_start >= config_.hard_stop_ms) return {StopKind::hard, {}};
    if (since_start < config_.arm_ms) return {};
    TerminationDecision d;
    for (int i = 0; i < 3; ++i) {
      if (counters_[static_cast<std::size_t>(i)] >= config_.consecutive) d.criteria.push_back(i + 1);
    }
    if (!d.criteria.empty()) d.kind = StopKind::criteria;
    return d;
  }

  const std::deque<EntropyTick>& history() const { return history_; }
  std::size_t ticks_recorded() const { return ticks_; }
  const std::array<int, 3>& counters() const { return counters_; }

 private:
  std::size_t retained() const { return static_cast<std::size_t>(config_.window) + 2; }

  bool criterion1() const {
    const auto& t = history_.back();
    return t.entropy_trust < t.entropy_similarity;
  }

  bool criterion2() const {
    if (history_.size() < 2) return false;
    const auto& a = history_[history_.size() - 2];
    const auto& b = history_.back();
    return std::abs(b.entropy_trust - a.entropy_trust) < config_.epsilon &&
           std::abs(b.entropy_similarity - a.entropy_similarity) < config_.epsilon;
  }

  // Changes between ticks t-i and t-i-1 for i = 1..N.
  bool criterion3() const {
    const auto n = static_cast<std::size_t>(config_.window);
    if (history_.size() < n + 2) return false;
    const std::size_t t = history_.size() - 1;
    double dt = 0.0;
    double ds = 0.0;
    for (std::size_t i = 1; i <= n; ++i) {
      dt += std::abs(history_[t - i].entropy_trust - history_[t - i - 1].entropy_trust);
      ds += std::abs(history_[t - i].entropy_similarity - history_[t - i - 1].entropy_similarity);
    }
    return dt / static_cast<double>(n) < config_.epsilon &&
           ds / static_cast<double>(n) < config_.epsilon;
  }

  TerminationConfig config_;
  std::deque<EntropyTick> history_;
  std::size_t ticks_ = 0;
  std::array<int, 3> counters_{0, 0, 0};
};

}  // namespace grouprec
