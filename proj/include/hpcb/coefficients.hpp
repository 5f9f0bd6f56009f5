#pragma once

#include <cmath>
#include <iomanip>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "hpcb/error.hpp"
#include "hpcb/grid.hpp"
#include "hpcb/multi_index.hpp"

namespace hpcb {

enum class Basis { HalfPeriodCosine, TorusExponential, ChuiWangPrimal, ChuiWangDual };

inline std::string basis_name(Basis b) {
  switch (b) {
    case Basis::HalfPeriodCosine: return "hpc";
    case Basis::TorusExponential: return "torus_exp";
    case Basis::ChuiWangPrimal: return "cw_primal";
    case Basis::ChuiWangDual: return "cw_dual";
  }
  return "unknown";
}

/// Sparse frequency-indexed coefficients. Absent keys are zero.
class CoefficientMap {
 public:
  using Storage = std::map<MultiIndex, Complex>;

  CoefficientMap() = default;
  CoefficientMap(Basis basis, int dim) : basis_(basis), dim_(dim) {
    if (basis == Basis::ChuiWangPrimal || basis == Basis::ChuiWangDual)
      throw ConfigError("CoefficientMap holds frequency bases; use WaveletCoefficients");
  }

  Basis basis() const { return basis_; }
  int dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  bool empty() const { return entries_.empty(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  const Storage& entries() const { return entries_; }

  void set(const MultiIndex& k, Complex v) {
    require_same_dim(k, dim_);
    if (basis_ == Basis::HalfPeriodCosine && k.min_entry() < 0)
      throw ConfigError("half-period cosine keys must be nonnegative");
    entries_[k] = v;
  }
  void add(const MultiIndex& k, Complex v) {
    require_same_dim(k, dim_);
    entries_[k] += v;
  }
  Complex get(const MultiIndex& k) const {
    auto it = entries_.find(k);
    return it == entries_.end() ? Complex{} : it->second;
  }
  bool contains(const MultiIndex& k) const { return entries_.count(k) != 0; }

  int max_abs_frequency() const {
    int m = 0;
    for (const auto& [k, v] : entries_) m = std::max(m, k.max_abs());
    return m;
  }

  CoefficientMap scaled(Complex s) const {
    CoefficientMap out(*this);
    for (auto& [k, v] : out.entries_) v *= s;
    return out;
  }

  /// Entrywise max |a_k - b_k| over the union of supports.
  friend double max_abs_diff(const CoefficientMap& a, const CoefficientMap& b) {
    double m = 0.0;
    for (const auto& [k, v] : a.entries_) m = std::max(m, std::abs(v - b.get(k)));
    for (const auto& [k, v] : b.entries_)
      if (!a.contains(k)) m = std::max(m, std::abs(v));
    return m;
  }

  /// CSV rows `k_1,...,k_d,re,im`.
  void write_csv(std::ostream& os, bool header = true) const {
    if (header) {
      for (int i = 0; i < dim_; ++i) os << "k_" << (i + 1) << ',';
      os << "re,im\n";
    }
    for (const auto& [k, v] : entries_) {
      for (int i = 0; i < dim_; ++i) os << k[i] << ',';
      os << std::setprecision(17) << v.real() << ',' << v.imag() << '\n';
    }
  }

  static CoefficientMap read_csv(std::istream& is, Basis basis, int dim) {
    CoefficientMap out(basis, dim);
    std::string line;
    while (std::getline(is, line)) {
      if (line.empty() || line[0] == '#' || line[0] == 'k') continue;
      std::vector<std::string> cells;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      if (static_cast<int>(cells.size()) != dim + 2) throw ConfigError("coefficient csv: wrong column count");
      std::vector<int> k(dim);
      for (int i = 0; i < dim; ++i) k[i] = std::stoi(cells[i]);
      out.set(MultiIndex(std::move(k)), Complex(std::stod(cells[dim]), std::stod(cells[dim + 1])));
    }
    return out;
  }

 private:
  Basis basis_ = Basis::HalfPeriodCosine;
  int dim_ = 1;
  Storage entries_;
};

/// Sparse wavelet coefficients keyed by (level, shift).
class WaveletCoefficients {
 public:
  using Storage = std::map<WaveletIndex, double>;

  WaveletCoefficients() = default;
  WaveletCoefficients(Basis basis, int dim) : basis_(basis), dim_(dim) {
    if (basis != Basis::ChuiWangPrimal && basis != Basis::ChuiWangDual)
      throw ConfigError("WaveletCoefficients holds Chui-Wang bases only");
  }

  Basis basis() const { return basis_; }
  int dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  auto begin() const { return entries_.begin(); }
  auto end() const { return entries_.end(); }
  const Storage& entries() const { return entries_; }

  void set(const WaveletIndex& idx, double v) {
    require_same_dim(idx.level, dim_);
    require_same_dim(idx.shift, dim_);
    if (idx.level.min_entry() < -1) throw ConfigError("wavelet levels must be >= -1");
    entries_[idx] = v;
  }
  double get(const WaveletIndex& idx) const {
    auto it = entries_.find(idx);
    return it == entries_.end() ? 0.0 : it->second;
  }

  /// CSV rows `j_1,...,j_d,k_1,...,k_d,value`.
  void write_csv(std::ostream& os, bool header = true) const {
    if (header) {
      for (int i = 0; i < dim_; ++i) os << "j_" << (i + 1) << ',';
      for (int i = 0; i < dim_; ++i) os << "k_" << (i + 1) << ',';
      os << "value\n";
    }
    for (const auto& [idx, v] : entries_) {
      for (int i = 0; i < dim_; ++i) os << idx.level[i] << ',';
      for (int i = 0; i < dim_; ++i) os << idx.shift[i] << ',';
      os << std::setprecision(17) << v << '\n';
    }
  }

  static WaveletCoefficients read_csv(std::istream& is, Basis basis, int dim) {
    WaveletCoefficients out(basis, dim);
    std::string line;
    while (std::getline(is, line)) {
      if (line.empty() || line[0] == '#' || line[0] == 'j') continue;
      std::vector<std::string> cells;
      std::stringstream ss(line);
      std::string cell;
      while (std::getline(ss, cell, ',')) cells.push_back(cell);
      if (static_cast<int>(cells.size()) != 2 * dim + 1) throw ConfigError("wavelet csv: wrong column count");
      std::vector<int> j(dim), k(dim);
      for (int i = 0; i < dim; ++i) j[i] = std::stoi(cells[i]);
      for (int i = 0; i < dim; ++i) k[i] = std::stoi(cells[dim + i]);
      out.set({MultiIndex(std::move(j)), MultiIndex(std::move(k))}, std::stod(cells[2 * dim]));
    }
    return out;
  }

 private:
  Basis basis_ = Basis::ChuiWangPrimal;
  int dim_ = 1;
  Storage entries_;
};

}  // namespace hpcb
