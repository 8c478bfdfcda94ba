#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace curvlab {

/// Worst input found by a scan. Unused fields stay NaN / empty.
struct Witness {
  std::vector<double> points;
  double t = std::numeric_limits<double>::quiet_NaN();
  std::optional<std::size_t> index;
  std::string note;
};

/// Verdict of an inequality scan. max_violation is a signed margin:
/// negative or zero means the inequality held everywhere it was tested.
struct CurvatureReport {
  std::string kind;
  double K = 0.0;
  double N = std::numeric_limits<double>::infinity();
  double max_violation = -std::numeric_limits<double>::infinity();
  Witness witness;
  double tolerance = 0.0;
  double grid_step = 0.0;
  std::uint64_t seed = 0;
  bool passed = true;
  std::size_t evaluations = 0;
  std::size_t conjugate_skipped = 0;
  // Ordered key/value extras so serialization is deterministic.
  std::vector<std::pair<std::string, double>> extras;

  void set_extra(const std::string& key, double value) {
    for (auto& kv : extras) {
      if (kv.first == key) {
        kv.second = value;
        return;
      }
    }
    extras.emplace_back(key, value);
  }
  std::optional<double> extra(const std::string& key) const {
    for (const auto& kv : extras)
      if (kv.first == key) return kv.second;
    return std::nullopt;
  }

  /// Records margin if it beats the current worst; returns true when it did.
  bool observe(double margin, const Witness& w) {
    ++evaluations;
    if (margin > max_violation) {
      max_violation = margin;
      witness = w;
      return true;
    }
    return false;
  }

  void finish() { passed = max_violation <= tolerance; }
};

}  // namespace curvlab
