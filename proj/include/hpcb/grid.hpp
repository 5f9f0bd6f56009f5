#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstring>
#include <functional>
#include <istream>
#include <limits>
#include <ostream>
#include <span>
#include <string>
#include <type_traits>
#include <vector>

#include "hpcb/error.hpp"

namespace hpcb {

using Complex = std::complex<double>;

/// Sampling domain of a grid function.
enum class Domain : std::uint32_t {
  UnitCube = 0,   // [0,1]^d, closed grid of 2^m+1 nodes per axis, x_i = i/2^m
  SymCube = 1,    // [-1,1]^d periodic, 2^{m+1} nodes per axis, x_i = -1 + i/2^m
  UnitTorus = 2,  // [0,1)^d periodic, 2^{m+1} nodes per axis, t_i = i/2^{m+1}
};

inline std::string domain_name(Domain d) {
  switch (d) {
    case Domain::UnitCube: return "unit_cube";
    case Domain::SymCube: return "sym_cube";
    case Domain::UnitTorus: return "unit_torus";
  }
  return "unknown";
}

inline int axis_points(Domain domain, int level) {
  return domain == Domain::UnitCube ? (1 << level) + 1 : (1 << (level + 1));
}

inline double axis_node(Domain domain, int level, int i) {
  switch (domain) {
    case Domain::UnitCube: return std::ldexp(static_cast<double>(i), -level);
    case Domain::SymCube: return -1.0 + std::ldexp(static_cast<double>(i), -level);
    case Domain::UnitTorus: return std::ldexp(static_cast<double>(i), -level - 1);
  }
  return 0.0;
}

/// Quadrature weight of node i: trapezoid on the closed grid, uniform on periodic grids.
inline double axis_weight(Domain domain, int level, int i) {
  switch (domain) {
    case Domain::UnitCube: {
      const double h = std::ldexp(1.0, -level);
      return (i == 0 || i == (1 << level)) ? 0.5 * h : h;
    }
    case Domain::SymCube: return std::ldexp(1.0, -level);
    case Domain::UnitTorus: return std::ldexp(1.0, -level - 1);
  }
  return 0.0;
}

/// Dense row-major matrix used for separable per-axis transforms.
template <class T>
struct AxisMatrix {
  int rows = 0;
  int cols = 0;
  std::vector<T> data;

  AxisMatrix() = default;
  AxisMatrix(int r, int c) : rows(r), cols(c), data(static_cast<std::size_t>(r) * c) {}
  T& operator()(int i, int j) { return data[static_cast<std::size_t>(i) * cols + j]; }
  const T& operator()(int i, int j) const { return data[static_cast<std::size_t>(i) * cols + j]; }
};

/// Apply `mat` (rows x shape[axis]) along one axis of a row-major tensor.
template <class T, class M>
auto apply_along_axis(const std::vector<T>& in, std::vector<int>& shape, int axis, const AxisMatrix<M>& mat) {
  using R = decltype(std::declval<T>() * std::declval<M>());
  if (mat.cols != shape[axis]) throw ConfigError("apply_along_axis: matrix/axis size mismatch");
  std::size_t outer = 1, inner = 1;
  for (int i = 0; i < axis; ++i) outer *= shape[i];
  for (int i = axis + 1; i < static_cast<int>(shape.size()); ++i) inner *= shape[i];
  const int n_in = shape[axis];
  const int n_out = mat.rows;
  std::vector<R> out(outer * n_out * inner, R{});
  // nonzero column range per row; banded wavelet matrices benefit
  std::vector<int> lo(n_out, n_in), hi(n_out, 0);
  for (int r = 0; r < n_out; ++r)
    for (int c = 0; c < n_in; ++c)
      if (mat(r, c) != M{}) {
        lo[r] = std::min(lo[r], c);
        hi[r] = c + 1;
      }
  for (std::size_t o = 0; o < outer; ++o) {
    const T* src = in.data() + o * n_in * inner;
    R* dst = out.data() + o * n_out * inner;
    for (int r = 0; r < n_out; ++r) {
      R* row = dst + r * inner;
      for (int c = lo[r]; c < hi[r]; ++c) {
        const M a = mat(r, c);
        if (a == M{}) continue;
        const T* s = src + c * inner;
        for (std::size_t t = 0; t < inner; ++t) row[t] += s[t] * a;
      }
    }
  }
  shape[axis] = n_out;
  return out;
}

/// Samples of a real or complex function on a uniform tensor grid.
template <class T>
class BasicGridFunction {
 public:
  using value_type = T;

  BasicGridFunction() = default;
  BasicGridFunction(Domain domain, int dim, int level)
      : domain_(domain), dim_(dim), level_(level), values_(total_size(domain, dim, level), T{}) {
    if (dim < 1) throw ConfigError("grid dimension must be >= 1");
    if (level < 0 || level > 24) throw ConfigError("grid level out of range");
  }
  BasicGridFunction(Domain domain, int dim, int level, std::vector<T> values)
      : domain_(domain), dim_(dim), level_(level), values_(std::move(values)) {
    if (values_.size() != total_size(domain, dim, level)) throw ConfigError("grid value count mismatch");
  }

  /// Sample `f` at every node.
  template <class F>
  static BasicGridFunction sample(Domain domain, int dim, int level, F&& f) {
    BasicGridFunction g(domain, dim, level);
    const int n = g.points_per_axis();
    std::vector<double> axis(n);
    for (int i = 0; i < n; ++i) axis[i] = axis_node(domain, level, i);
    std::vector<int> idx(dim, 0);
    std::vector<double> x(dim, axis[0]);
    for (std::size_t flat = 0; flat < g.values_.size(); ++flat) {
      g.values_[flat] = static_cast<T>(f(std::span<const double>(x)));
      for (int a = dim - 1; a >= 0; --a) {
        if (++idx[a] < n) {
          x[a] = axis[idx[a]];
          break;
        }
        idx[a] = 0;
        x[a] = axis[0];
      }
    }
    return g;
  }

  Domain domain() const { return domain_; }
  int dim() const { return dim_; }
  int level() const { return level_; }
  int points_per_axis() const { return axis_points(domain_, level_); }
  std::size_t size() const { return values_.size(); }
  std::vector<int> shape() const { return std::vector<int>(dim_, points_per_axis()); }

  const std::vector<T>& values() const { return values_; }
  std::vector<T>& values() { return values_; }
  T operator[](std::size_t i) const { return values_[i]; }
  T& operator[](std::size_t i) { return values_[i]; }

  std::size_t flat_index(std::span<const int> idx) const {
    std::size_t f = 0;
    const std::size_t n = points_per_axis();
    for (int a = 0; a < dim_; ++a) f = f * n + idx[a];
    return f;
  }
  T at(std::span<const int> idx) const { return values_[flat_index(idx)]; }

  std::vector<double> axis_nodes() const {
    std::vector<double> a(points_per_axis());
    for (int i = 0; i < points_per_axis(); ++i) a[i] = axis_node(domain_, level_, i);
    return a;
  }
  std::vector<double> axis_weights() const {
    std::vector<double> a(points_per_axis());
    for (int i = 0; i < points_per_axis(); ++i) a[i] = axis_weight(domain_, level_, i);
    return a;
  }

  /// Tensor quadrature weights, flattened like the values.
  std::vector<double> weights() const {
    const auto w1 = axis_weights();
    std::vector<double> w(values_.size());
    const int n = points_per_axis();
    std::vector<int> idx(dim_, 0);
    for (std::size_t flat = 0; flat < w.size(); ++flat) {
      double v = 1.0;
      for (int a = 0; a < dim_; ++a) v *= w1[idx[a]];
      w[flat] = v;
      for (int a = dim_ - 1; a >= 0; --a) {
        if (++idx[a] < n) break;
        idx[a] = 0;
      }
    }
    return w;
  }

  T integral() const {
    const auto w = weights();
    T s{};
    for (std::size_t i = 0; i < values_.size(); ++i) s += values_[i] * w[i];
    return s;
  }

  /// L_p norm under the grid quadrature; p = infinity gives the grid maximum.
  double lp_norm(double p) const {
    if (!(p > 0.0)) throw ConfigError("lp_norm requires p > 0");
    if (std::isinf(p)) {
      double m = 0.0;
      for (const auto& v : values_) m = std::max(m, static_cast<double>(std::abs(v)));
      return m;
    }
    return std::pow(lp_norm_pow(p), 1.0 / p);
  }

  /// sum_i w_i |f_i|^p (finite p).
  double lp_norm_pow(double p) const {
    const auto w = weights();
    double s = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i) s += w[i] * std::pow(std::abs(values_[i]), p);
    return s;
  }

  bool same_grid(const BasicGridFunction& o) const {
    return domain_ == o.domain_ && dim_ == o.dim_ && level_ == o.level_;
  }

  BasicGridFunction& operator+=(const BasicGridFunction& o) {
    require_same(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] += o.values_[i];
    return *this;
  }
  BasicGridFunction& operator-=(const BasicGridFunction& o) {
    require_same(o);
    for (std::size_t i = 0; i < values_.size(); ++i) values_[i] -= o.values_[i];
    return *this;
  }
  BasicGridFunction& operator*=(T s) {
    for (auto& v : values_) v *= s;
    return *this;
  }
  friend BasicGridFunction operator+(BasicGridFunction a, const BasicGridFunction& b) { return a += b; }
  friend BasicGridFunction operator-(BasicGridFunction a, const BasicGridFunction& b) { return a -= b; }
  friend BasicGridFunction operator*(T s, BasicGridFunction a) { return a *= s; }

  double max_abs_diff(const BasicGridFunction& o) const {
    require_same(o);
    double m = 0.0;
    for (std::size_t i = 0; i < values_.size(); ++i)
      m = std::max(m, static_cast<double>(std::abs(values_[i] - o.values_[i])));
    return m;
  }

  void require_same(const BasicGridFunction& o) const {
    if (!same_grid(o)) throw ConfigError("grid functions live on different grids");
  }

  /// Binary layout: 4 x uint32 LE (d, M, domain, kind) then LE float64 values
  /// (kind 0: real; kind 1: interleaved re/im).
  void write_binary(std::ostream& os) const {
    const std::uint32_t header[4] = {static_cast<std::uint32_t>(dim_), static_cast<std::uint32_t>(points_per_axis()),
                                     static_cast<std::uint32_t>(domain_), is_complex ? 1u : 0u};
    for (auto h : header) write_le(os, h);
    for (const auto& v : values_) {
      if constexpr (is_complex) {
        write_le(os, v.real());
        write_le(os, v.imag());
      } else {
        write_le(os, v);
      }
    }
  }

  static BasicGridFunction read_binary(std::istream& is) {
    std::uint32_t header[4];
    for (auto& h : header) h = read_le<std::uint32_t>(is);
    const auto domain = static_cast<Domain>(header[2]);
    if (header[2] > 2) throw ConfigError("grid file: bad domain tag");
    if (header[3] != (is_complex ? 1u : 0u)) throw ConfigError("grid file: value kind mismatch");
    const int m = static_cast<int>(header[1]);
    int level = -1;
    for (int l = 0; l <= 24; ++l)
      if (axis_points(domain, l) == m) level = l;
    if (level < 0) throw ConfigError("grid file: resolution is not a dyadic grid size");
    BasicGridFunction g(domain, static_cast<int>(header[0]), level);
    for (auto& v : g.values_) {
      if constexpr (is_complex) {
        const double re = read_le<double>(is);
        const double im = read_le<double>(is);
        v = T(re, im);
      } else {
        v = read_le<double>(is);
      }
    }
    if (!is) throw ConfigError("grid file: truncated");
    return g;
  }

 private:
  static constexpr bool is_complex = !std::is_floating_point_v<T>;

  static std::size_t total_size(Domain domain, int dim, int level) {
    std::size_t s = 1;
    for (int i = 0; i < dim; ++i) s *= axis_points(domain, level);
    return s;
  }

  template <class U>
  static void write_le(std::ostream& os, U v) {
    unsigned char buf[sizeof(U)];
    std::memcpy(buf, &v, sizeof(U));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(U));
    os.write(reinterpret_cast<const char*>(buf), sizeof(U));
  }
  template <class U>
  static U read_le(std::istream& is) {
    unsigned char buf[sizeof(U)] = {};
    is.read(reinterpret_cast<char*>(buf), sizeof(U));
    if constexpr (std::endian::native == std::endian::big) std::reverse(buf, buf + sizeof(U));
    U v;
    std::memcpy(&v, buf, sizeof(U));
    return v;
  }

  Domain domain_ = Domain::UnitCube;
  int dim_ = 1;
  int level_ = 0;
  std::vector<T> values_;
};

using GridFunction = BasicGridFunction<double>;
using ComplexGridFunction = BasicGridFunction<Complex>;

/// Unconjugated quadrature inner product sum_i w_i f_i g_i.
template <class T>
T inner(const BasicGridFunction<T>& f, const BasicGridFunction<T>& g) {
  f.require_same(g);
  const auto w = f.weights();
  T s{};
  for (std::size_t i = 0; i < f.size(); ++i) s += f[i] * g[i] * w[i];
  return s;
}

inline GridFunction real_part(const ComplexGridFunction& f) {
  std::vector<double> v(f.size());
  for (std::size_t i = 0; i < f.size(); ++i) v[i] = f[i].real();
  return GridFunction(f.domain(), f.dim(), f.level(), std::move(v));
}

inline ComplexGridFunction to_complex(const GridFunction& f) {
  std::vector<Complex> v(f.values().begin(), f.values().end());
  return ComplexGridFunction(f.domain(), f.dim(), f.level(), std::move(v));
}

}  // namespace hpcb
