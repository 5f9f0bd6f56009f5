#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <vector>

#include "hpcb/coefficients.hpp"
#include "hpcb/error.hpp"
#include "hpcb/grid.hpp"
#include "hpcb/index_sets.hpp"

namespace hpcb {

/// Tent map 1 - |2t - 1| on [0,1].
inline double tent(double t) {
  if (!(t >= 0.0 && t <= 1.0)) throw ConfigError("tent: argument outside [0,1]");
  return 1.0 - std::abs(2.0 * t - 1.0);
}

inline std::vector<double> tent(std::span<const double> x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = tent(x[i]);
  return out;
}

/// 2-periodic even extension of |x| restricted to [0,1].
inline double rho(double x) {
  double a = std::fmod(x, 2.0);
  if (a < 0.0) a += 2.0;
  double b = std::fmod(-x, 2.0);
  if (b < 0.0) b += 2.0;
  return std::min(a, b);
}

inline std::vector<double> rho(std::span<const double> x) {
  std::vector<double> out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) out[i] = rho(x[i]);
  return out;
}

/// Univariate half-period cosine: 1 for k = 0, sqrt(2) cos(pi k x) otherwise.
inline double hpc_basis(int k, double x) {
  return k == 0 ? 1.0 : std::numbers::sqrt2 * std::cos(std::numbers::pi * k * x);
}

inline double hpc_basis(const MultiIndex& k, std::span<const double> x) {
  double v = 1.0;
  for (int i = 0; i < k.dim(); ++i) v *= hpc_basis(k[i], x[i]);
  return v;
}

/// Normalized cosine on [-1,1]^d: 2^{-d/2} prod cos(pi k_i x_i).
inline double sym_cosine(const MultiIndex& k, std::span<const double> x) {
  double v = std::pow(2.0, -0.5 * k.dim());
  for (int i = 0; i < k.dim(); ++i) v *= std::cos(std::numbers::pi * k[i] * x[i]);
  return v;
}

/// Aliasing guard for quadrature at `level`: 2^level >= 4 max|k|.
inline void require_resolved(int level, int max_frequency) {
  if (static_cast<long>(max_frequency) * 4 > (1L << level))
    throw AliasingError("grid level " + std::to_string(level) + " resolves frequencies up to " +
                        std::to_string((1L << level) / 4) + ", requested " + std::to_string(max_frequency));
}

/// Smallest level satisfying the aliasing guard for `max_frequency`.
inline int resolving_level(int max_frequency, int min_level = 2) {
  int m = min_level;
  while (static_cast<long>(max_frequency) * 4 > (1L << m)) ++m;
  return m;
}

namespace detail {
template <class T, class F>
BasicGridFunction<T> remap_grid(const BasicGridFunction<T>& f, Domain target, F&& source_index) {
  BasicGridFunction<T> out(target, f.dim(), f.level());
  const int n = out.points_per_axis();
  const int d = f.dim();
  std::vector<int> map(n);
  for (int i = 0; i < n; ++i) map[i] = source_index(i);
  std::vector<int> idx(d, 0), src(d, 0);
  for (std::size_t flat = 0; flat < out.size(); ++flat) {
    for (int a = 0; a < d; ++a) src[a] = map[idx[a]];
    out[flat] = f.at(src);
    for (int a = d - 1; a >= 0; --a) {
      if (++idx[a] < n) break;
      idx[a] = 0;
    }
  }
  return out;
}
}  // namespace detail

/// P f = f o rho on the periodic grid of [-1,1]^d at the same level.
template <class T>
BasicGridFunction<T> periodize(const BasicGridFunction<T>& f) {
  if (f.domain() != Domain::UnitCube) throw ConfigError("periodize expects a unit-cube grid function");
  const int half = 1 << f.level();
  return detail::remap_grid(f, Domain::SymCube, [half](int i) { return std::abs(i - half); });
}

/// R f = f restricted to the closed grid of [0,1]^d.
template <class T>
BasicGridFunction<T> restrict_to_unit(const BasicGridFunction<T>& f) {
  if (f.domain() != Domain::SymCube) throw ConfigError("restrict expects a [-1,1]^d grid function");
  const int half = 1 << f.level();
  const int period = 2 * half;
  return detail::remap_grid(f, Domain::UnitCube, [half, period](int u) { return (u + half) % period; });
}

/// Average over all reflections x_i -> 1 - x_i.
template <class T>
BasicGridFunction<T> evenize(const BasicGridFunction<T>& f) {
  if (f.domain() != Domain::UnitCube) throw ConfigError("evenize expects a unit-cube grid function");
  BasicGridFunction<T> acc = f;
  const int last = (1 << f.level());
  for (int a = 0; a < f.dim(); ++a) {
    BasicGridFunction<T> mirrored(f.domain(), f.dim(), f.level());
    const int n = f.points_per_axis();
    std::vector<int> idx(f.dim(), 0), src(f.dim(), 0);
    for (std::size_t flat = 0; flat < acc.size(); ++flat) {
      src = idx;
      src[a] = last - idx[a];
      mirrored[flat] = acc.at(src);
      for (int b = f.dim() - 1; b >= 0; --b) {
        if (++idx[b] < n) break;
        idx[b] = 0;
      }
    }
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] = 0.5 * (acc[i] + mirrored[i]);
  }
  return acc;
}

/// f o tent on the periodic grid of [0,1)^d with twice as many nodes per axis.
template <class T>
BasicGridFunction<T> tent_compose(const BasicGridFunction<T>& f) {
  if (f.domain() != Domain::UnitCube) throw ConfigError("tent_compose expects a unit-cube grid function");
  const int half = 1 << f.level();
  // node t_i = i / 2^{m+1} is sent to 1 - |i/2^m - 1|, closed-grid index 2^m - |i - 2^m|
  return detail::remap_grid(f, Domain::UnitTorus, [half](int i) { return half - std::abs(i - half); });
}

namespace detail {
inline AxisMatrix<double> hpc_analysis_matrix(int level, int kmax) {
  const int n = axis_points(Domain::UnitCube, level);
  AxisMatrix<double> m(kmax + 1, n);
  for (int k = 0; k <= kmax; ++k)
    for (int i = 0; i < n; ++i)
      m(k, i) = axis_weight(Domain::UnitCube, level, i) * hpc_basis(k, axis_node(Domain::UnitCube, level, i));
  return m;
}

inline AxisMatrix<double> hpc_synthesis_matrix(int level, int kmax) {
  const int n = axis_points(Domain::UnitCube, level);
  AxisMatrix<double> m(n, kmax + 1);
  for (int i = 0; i < n; ++i)
    for (int k = 0; k <= kmax; ++k) m(i, k) = hpc_basis(k, axis_node(Domain::UnitCube, level, i));
  return m;
}

inline Complex torus_character(Domain domain, int k, double x) {
  using std::numbers::pi;
  if (domain == Domain::SymCube) return std::polar(1.0 / std::numbers::sqrt2, pi * k * x);
  return std::polar(1.0, 2.0 * pi * k * x);
}

inline AxisMatrix<Complex> fourier_analysis_matrix(Domain domain, int level, int kmax) {
  const int n = axis_points(domain, level);
  AxisMatrix<Complex> m(2 * kmax + 1, n);
  for (int k = -kmax; k <= kmax; ++k)
    for (int i = 0; i < n; ++i)
      m(k + kmax, i) = axis_weight(domain, level, i) * std::conj(torus_character(domain, k, axis_node(domain, level, i)));
  return m;
}

inline AxisMatrix<Complex> fourier_synthesis_matrix(Domain domain, int level, int kmax) {
  const int n = axis_points(domain, level);
  AxisMatrix<Complex> m(n, 2 * kmax + 1);
  for (int i = 0; i < n; ++i)
    for (int k = -kmax; k <= kmax; ++k) m(i, k + kmax) = torus_character(domain, k, axis_node(domain, level, i));
  return m;
}

inline std::size_t box_flat(const MultiIndex& k, int offset, int side) {
  std::size_t f = 0;
  for (int i = 0; i < k.dim(); ++i) f = f * side + static_cast<std::size_t>(k[i] + offset);
  return f;
}
}  // namespace detail

/// Coefficients <f, c_k> for k in `K` by trapezoidal quadrature on f's grid.
inline CoefficientMap hpc_analyze(const GridFunction& f, const IndexSet& K) {
  if (f.domain() != Domain::UnitCube) throw ConfigError("hpc_analyze expects a unit-cube grid function");
  if (K.dim() != f.dim()) throw ConfigError("hpc_analyze: index set dimension mismatch");
  if (!K.all_nonnegative()) throw ConfigError("hpc_analyze: index set must lie in N_0^d");
  CoefficientMap out(Basis::HalfPeriodCosine, f.dim());
  if (K.empty()) return out;
  const int kmax = K.max_abs();
  require_resolved(f.level(), kmax);
  const auto mat = detail::hpc_analysis_matrix(f.level(), kmax);
  auto shape = f.shape();
  std::vector<double> t = f.values();
  for (int a = 0; a < f.dim(); ++a) t = apply_along_axis(t, shape, a, mat);
  for (const auto& k : K) out.set(k, t[detail::box_flat(k, 0, kmax + 1)]);
  return out;
}

/// Evaluate sum_k a_k c_k on the closed grid of [0,1]^d at `level`.
inline GridFunction hpc_synthesize(const CoefficientMap& coeffs, int level) {
  if (coeffs.basis() != Basis::HalfPeriodCosine) throw ConfigError("hpc_synthesize expects hpc coefficients");
  const int d = coeffs.dim();
  const int kmax = coeffs.max_abs_frequency();
  const int side = kmax + 1;
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= side;
  std::vector<double> box(total, 0.0);
  for (const auto& [k, v] : coeffs) box[detail::box_flat(k, 0, side)] = v.real();
  const auto mat = detail::hpc_synthesis_matrix(level, kmax);
  std::vector<int> shape(d, side);
  for (int a = 0; a < d; ++a) box = apply_along_axis(box, shape, a, mat);
  return GridFunction(Domain::UnitCube, d, level, std::move(box));
}

/// Pointwise value of a finite half-period cosine expansion.
inline double hpc_eval(const CoefficientMap& coeffs, std::span<const double> x) {
  double s = 0.0;
  for (const auto& [k, v] : coeffs) s += v.real() * hpc_basis(k, x);
  return s;
}

/// Fourier coefficients against the orthonormal characters of the periodic domain:
/// 2^{-d/2} e^{i pi k.x} on [-1,1]^d, e^{2 pi i k.t} on [0,1)^d.
template <class T>
CoefficientMap fourier_analyze(const BasicGridFunction<T>& f, const IndexSet& K) {
  if (f.domain() == Domain::UnitCube) throw ConfigError("fourier_analyze expects a periodic grid function");
  if (K.dim() != f.dim()) throw ConfigError("fourier_analyze: index set dimension mismatch");
  CoefficientMap out(Basis::TorusExponential, f.dim());
  if (K.empty()) return out;
  const int kmax = K.max_abs();
  // periodic grids have 2^{m+1} nodes, matching the closed-grid guard at the same level
  require_resolved(f.level(), kmax);
  const auto mat = detail::fourier_analysis_matrix(f.domain(), f.level(), kmax);
  auto shape = f.shape();
  std::vector<Complex> t(f.values().begin(), f.values().end());
  for (int a = 0; a < f.dim(); ++a) t = apply_along_axis(t, shape, a, mat);
  for (const auto& k : K) out.set(k, t[detail::box_flat(k, kmax, 2 * kmax + 1)]);
  return out;
}

inline ComplexGridFunction fourier_synthesize(const CoefficientMap& coeffs, Domain domain, int level) {
  if (coeffs.basis() != Basis::TorusExponential) throw ConfigError("fourier_synthesize expects torus coefficients");
  if (domain == Domain::UnitCube) throw ConfigError("fourier_synthesize targets a periodic domain");
  const int d = coeffs.dim();
  const int kmax = coeffs.max_abs_frequency();
  const int side = 2 * kmax + 1;
  std::size_t total = 1;
  for (int i = 0; i < d; ++i) total *= side;
  std::vector<Complex> box(total, Complex{});
  for (const auto& [k, v] : coeffs) box[detail::box_flat(k, kmax, side)] = v;
  const auto mat = detail::fourier_synthesis_matrix(domain, level, kmax);
  std::vector<int> shape(d, side);
  for (int a = 0; a < d; ++a) box = apply_along_axis(box, shape, a, mat);
  return ComplexGridFunction(domain, d, level, std::move(box));
}

/// Bracket <k> = max(1, |k|).
inline double bracket(int k) { return std::max(1.0, std::abs(static_cast<double>(k))); }

struct DecayRow {
  MultiIndex k;
  double coefficient;  // |f_hpc(k)|
  double weighted;     // |f_hpc(k)| prod <k_i>^2
};

struct DecayReport {
  std::vector<DecayRow> rows;
  double sup_weighted = 0.0;
};

inline DecayReport coefficient_decay_report(const CoefficientMap& coeffs, int k_max) {
  DecayReport rep;
  for (const auto& [k, v] : coeffs) {
    if (k.max_abs() > k_max) continue;
    double w = std::abs(v);
    for (int e : k) w *= bracket(e) * bracket(e);
    rep.rows.push_back({k, std::abs(v), w});
    rep.sup_weighted = std::max(rep.sup_weighted, w);
  }
  return rep;
}

}  // namespace hpcb
