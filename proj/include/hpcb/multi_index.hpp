#pragma once

#include <algorithm>
#include <compare>
#include <cstdlib>
#include <initializer_list>
#include <numeric>
#include <ostream>
#include <span>
#include <vector>

#include "hpcb/error.hpp"

namespace hpcb {

/// Integer multi-index of fixed dimension. Ordering is lexicographic.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> entries) : entries_(std::move(entries)) {}
  MultiIndex(std::initializer_list<int> entries) : entries_(entries) {}

  static MultiIndex zeros(int dim) { return MultiIndex(std::vector<int>(dim, 0)); }
  static MultiIndex filled(int dim, int value) { return MultiIndex(std::vector<int>(dim, value)); }

  int dim() const { return static_cast<int>(entries_.size()); }
  int operator[](int i) const { return entries_[i]; }
  int& operator[](int i) { return entries_[i]; }
  std::span<const int> entries() const { return entries_; }

  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }

  /// Componentwise max(k_i, 0).
  MultiIndex nonneg_part() const {
    MultiIndex out(*this);
    for (auto& e : out.entries_) e = std::max(e, 0);
    return out;
  }

  MultiIndex abs() const {
    MultiIndex out(*this);
    for (auto& e : out.entries_) e = std::abs(e);
    return out;
  }

  /// Number of nonzero entries.
  int nonzero_count() const {
    return static_cast<int>(std::count_if(entries_.begin(), entries_.end(), [](int e) { return e != 0; }));
  }

  long sum() const { return std::accumulate(entries_.begin(), entries_.end(), 0L); }

  /// Sum of the nonnegative parts, used as the dyadic weight exponent of wavelet levels.
  long positive_sum() const {
    long s = 0;
    for (int e : entries_) s += std::max(e, 0);
    return s;
  }

  int max_abs() const {
    int m = 0;
    for (int e : entries_) m = std::max(m, std::abs(e));
    return m;
  }

  int max_entry() const { return *std::max_element(entries_.begin(), entries_.end()); }
  int min_entry() const { return *std::min_element(entries_.begin(), entries_.end()); }

  friend auto operator<=>(const MultiIndex&, const MultiIndex&) = default;
  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

  friend std::ostream& operator<<(std::ostream& os, const MultiIndex& k) {
    os << '(';
    for (int i = 0; i < k.dim(); ++i) os << (i ? "," : "") << k[i];
    return os << ')';
  }

 private:
  std::vector<int> entries_;
};

/// Wavelet index (level, shift) in N_{-1}^d x Z^d.
struct WaveletIndex {
  MultiIndex level;
  MultiIndex shift;

  friend auto operator<=>(const WaveletIndex&, const WaveletIndex&) = default;
  friend bool operator==(const WaveletIndex&, const WaveletIndex&) = default;
};

inline void require_same_dim(const MultiIndex& a, int dim) {
  if (a.dim() != dim) throw ConfigError("multi-index dimension mismatch");
}

}  // namespace hpcb
