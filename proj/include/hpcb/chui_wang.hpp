#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "hpcb/coefficients.hpp"
#include "hpcb/error.hpp"
#include "hpcb/grid.hpp"
#include "hpcb/multi_index.hpp"
#include "hpcb/piecewise.hpp"

namespace hpcb {

/// Generator of a Chui-Wang level: the hat function (level -1) or the mother wavelet.
enum class Generator { Father = -1, Mother = 0 };

inline Generator generator_for_level(int l) { return l < 0 ? Generator::Father : Generator::Mother; }

/// Order-2 Chui-Wang system: piecewise linear, semi-orthogonal, two vanishing moments.
namespace cw {

/// Hat function N_2 on [0,2].
inline const PiecewisePolynomial& father() {
  static const PiecewisePolynomial f({0.0, 1.0, 2.0}, {Polynomial({0.0, 1.0}), Polynomial({1.0, -1.0})});
  return f;
}

/// Mother wavelet on [0,3] from its explicit half-integer breakpoint form.
inline const PiecewisePolynomial& mother() {
  static const PiecewisePolynomial m = [] {
    // global slope/intercept per piece on [i/2, (i+1)/2)
    const std::array<std::pair<double, double>, 6> lines = {{{1.0 / 6.0, 0.0},
                                                             {-7.0 / 6.0, 2.0 / 3.0},
                                                             {8.0 / 3.0, -19.0 / 6.0},
                                                             {-8.0 / 3.0, 29.0 / 6.0},
                                                             {7.0 / 6.0, -17.0 / 6.0},
                                                             {-1.0 / 6.0, 1.0 / 2.0}}};
    std::vector<double> breaks;
    std::vector<Polynomial> pieces;
    for (int i = 0; i <= 6; ++i) breaks.push_back(0.5 * i);
    for (int i = 0; i < 6; ++i) {
      const auto [slope, icpt] = lines[i];
      pieces.emplace_back(std::vector<double>{slope * breaks[i] + icpt, slope});
    }
    return PiecewisePolynomial(std::move(breaks), std::move(pieces));
  }();
  return m;
}

/// Refinement coefficients q_l = (-1)^l / 2 sum_i C(2,i) N_4(l - i + 1), l = 0..4.
inline std::array<double, 5> q_coefficients() {
  const PiecewisePolynomial n4 = cardinal_bspline(4);
  const double binom[3] = {1.0, 2.0, 1.0};
  std::array<double, 5> q{};
  for (int l = 0; l <= 4; ++l) {
    double s = 0.0;
    for (int i = 0; i <= 2; ++i) s += binom[i] * n4(static_cast<double>(l - i + 1));
    q[l] = (l % 2 ? -0.5 : 0.5) * s;
  }
  return q;
}

/// Mother wavelet assembled as sum_l q_l N_2(2x - l).
inline PiecewisePolynomial mother_from_qcoeffs() {
  const auto q = q_coefficients();
  PiecewisePolynomial out;
  for (int l = 0; l <= 4; ++l) out = out + father().dilated(2.0, l).scaled(q[l]);
  return out;
}

inline const PiecewisePolynomial& generator(Generator g) { return g == Generator::Father ? father() : mother(); }

/// psi_{l,k}(x) = psi(2^l x - k) for l >= 0, N_2(x - k) for l = -1, zero below.
inline PiecewisePolynomial wavelet(int l, int k) {
  if (l < -1) return {};
  if (l == -1) return father().dilated(1.0, k);
  return mother().dilated(std::ldexp(1.0, l), k);
}

inline double psi(int l, int k, double x) {
  if (l < -1) return 0.0;
  if (l == -1) return father()(x - k);
  return mother()(std::ldexp(x, l) - k);
}

inline double psi(const MultiIndex& l, const MultiIndex& k, std::span<const double> x) {
  double v = 1.0;
  for (int i = 0; i < l.dim() && v != 0.0; ++i) v *= psi(l[i], k[i], x[i]);
  return v;
}

/// Support [lo, hi] of psi_{l,k}.
inline std::pair<double, double> support(int l, int k) {
  if (l == -1) return {static_cast<double>(k), static_cast<double>(k + 2)};
  return {std::ldexp(static_cast<double>(k), -l), std::ldexp(static_cast<double>(k + 3), -l)};
}

/// Shifts k whose wavelet support meets the open interval (a, b).
inline std::pair<int, int> shift_range(int l, double a, double b) {
  if (l == -1) return {static_cast<int>(std::floor(a)) - 1, static_cast<int>(std::ceil(b)) - 1};
  const double s = std::ldexp(1.0, l);
  return {static_cast<int>(std::floor(s * a)) - 2, static_cast<int>(std::ceil(s * b)) - 1};
}

/// Gram sequence g_m = <gen, gen(. - m)> for m = 0..(support length - 1), exact.
inline std::vector<double> gram_sequence(Generator g) {
  const PiecewisePolynomial& f = generator(g);
  const int len = static_cast<int>(f.support_hi() - f.support_lo());
  std::vector<double> out;
  for (int m = 0; m < len; ++m) out.push_back(integrate_product(f, f.dilated(1.0, m)));
  return out;
}

}  // namespace cw

/// Two-sided symmetric coefficients a_n, |n| <= n_max, of a dual generator.
struct DualCoefficientSequence {
  Generator eps = Generator::Father;
  int n_max = 0;
  std::vector<double> a;  // a[n + n_max]
  double decay_base = 0.0;
  double decay_constant = 0.0;
  double tail_bound = 0.0;

  double operator[](int n) const { return std::abs(n) > n_max ? 0.0 : a[n + n_max]; }

  /// max_{|m| <= m_max} |sum_n a_n g_{m-n} - delta_{0,m}|.
  double residual(int m_max) const {
    const auto g = cw::gram_sequence(eps);
    const int band = static_cast<int>(g.size()) - 1;
    double r = 0.0;
    for (int m = -m_max; m <= m_max; ++m) {
      double s = 0.0;
      for (int n = m - band; n <= m + band; ++n) s += (*this)[n] * g[std::abs(m - n)];
      r = std::max(r, std::abs(s - (m == 0 ? 1.0 : 0.0)));
    }
    return r;
  }

  nlohmann::json to_json() const {
    return {{"eps", static_cast<int>(eps)}, {"n_max", n_max},        {"decay_base", decay_base},
            {"decay_constant", decay_constant}, {"tail_bound", tail_bound}, {"coefficients", a}};
  }
};

/// Solve the truncated Toeplitz system sum_n a_n g_{m-n} = delta_{0,m}, |m|,|n| <= n_max.
inline DualCoefficientSequence dual_coefficients(Generator eps, int n_max = 40, double tol = 1e-10) {
  if (n_max < 4) throw ConfigError("dual_coefficients: n_max must be >= 4");
  const auto g = cw::gram_sequence(eps);
  const int n = 2 * n_max + 1;
  Eigen::MatrixXd G = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const int m = std::abs(i - j);
      if (m < static_cast<int>(g.size())) G(i, j) = g[m];
    }
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  rhs(n_max) = 1.0;
  const Eigen::VectorXd sol = G.ldlt().solve(rhs);

  DualCoefficientSequence seq;
  seq.eps = eps;
  seq.n_max = n_max;
  seq.a.assign(sol.data(), sol.data() + n);

  // log|a_n| = log C - n log c over the interior window, away from truncation effects
  const int hi = n_max / 2;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int cnt = 0;
  for (int k = 1; k <= hi; ++k) {
    const double v = std::abs(seq[k]);
    if (v <= 0.0) continue;
    const double y = std::log(v);
    sx += k;
    sy += y;
    sxx += static_cast<double>(k) * k;
    sxy += k * y;
    ++cnt;
  }
  if (cnt < 2) throw TruncationError("dual_coefficients: not enough nonzero coefficients to fit decay");
  const double slope = (cnt * sxy - sx * sy) / (cnt * sxx - sx * sx);
  const double icpt = (sy - slope * sx) / cnt;
  seq.decay_base = std::exp(-slope);
  seq.decay_constant = std::exp(icpt);
  if (!(seq.decay_base > 1.0)) throw TruncationError("dual_coefficients: fitted decay base is not > 1");
  const double c = seq.decay_base;
  seq.tail_bound = 2.0 * seq.decay_constant * std::pow(c, -(n_max + 1)) / (1.0 - 1.0 / c);
  if (seq.tail_bound > tol)
    throw TruncationError("dual_coefficients: tail bound " + std::to_string(seq.tail_bound) + " exceeds tolerance");
  return seq;
}

/// Dual Chui-Wang system built from truncated dual coefficient sequences.
class DualSystem {
 public:
  explicit DualSystem(int n_max = 40, double tol = 1e-10)
      : father_(dual_coefficients(Generator::Father, n_max, tol)),
        mother_(dual_coefficients(Generator::Mother, n_max, tol)) {}

  const DualCoefficientSequence& sequence(Generator g) const { return g == Generator::Father ? father_ : mother_; }
  const DualCoefficientSequence& for_level(int l) const { return sequence(generator_for_level(l)); }
  int n_max() const { return father_.n_max; }

  /// Univariate dual wavelet value sum_n a_n psi_{l,k+n}(x).
  double dual_eval(int l, int k, double x) const {
    if (l < -1) return 0.0;
    const auto& a = for_level(l);
    // only shifts whose support contains x contribute
    const double y = l < 0 ? x : std::ldexp(x, l);
    const int c = static_cast<int>(std::floor(y)) - k;
    double s = 0.0;
    for (int n = std::max(-a.n_max, c - 3); n <= std::min(a.n_max, c + 1); ++n) s += a[n] * cw::psi(l, k + n, x);
    return s;
  }

  double dual_eval(const MultiIndex& l, const MultiIndex& k, std::span<const double> x) const {
    double v = 1.0;
    for (int i = 0; i < l.dim() && v != 0.0; ++i) v *= dual_eval(l[i], k[i], x[i]);
    return v;
  }

  /// <psi_{j,k}, dual psi_{l,m}> by exact piecewise integration.
  double biorthogonality(int j, int k, int l, int m) const {
    if (j < -1 || l < -1) return 0.0;
    const auto pj = cw::wavelet(j, k);
    const auto& a = for_level(l);
    double s = 0.0;
    for (int n = -a.n_max; n <= a.n_max; ++n) {
      const double an = a[n];
      if (an == 0.0) continue;
      s += an * integrate_product(pj, cw::wavelet(l, m + n));
    }
    return s;
  }

  double biorthogonality(const MultiIndex& j, const MultiIndex& k, const MultiIndex& l, const MultiIndex& m) const {
    double v = 1.0;
    for (int i = 0; i < j.dim(); ++i) v *= biorthogonality(j[i], k[i], l[i], m[i]);
    return v;
  }

 private:
  DualCoefficientSequence father_;
  DualCoefficientSequence mother_;
};

/// Expected value 2^{-(j_+ + l_+)/2} delta_{j,l} delta_{k,m} of the biorthogonality pairing.
inline double biorthogonality_target(const MultiIndex& j, const MultiIndex& k, const MultiIndex& l,
                                     const MultiIndex& m) {
  if (j != l || k != m) return 0.0;
  return std::pow(2.0, -0.5 * static_cast<double>(j.positive_sum() + l.positive_sum()));
}

/// Per-level table of univariate values indexed by shift.
struct LevelTable {
  int level = -1;
  int k_lo = 0;
  std::vector<double> values;

  int k_hi() const { return k_lo + static_cast<int>(values.size()) - 1; }
  double at(int k) const {
    const int i = k - k_lo;
    return (i < 0 || i >= static_cast<int>(values.size())) ? 0.0 : values[i];
  }
};

using AxisTables = std::vector<LevelTable>;  // index l + 1 for l = -1..J

/// Univariate inner products <f, psi_{l,k}> for l = -1..J by exact integration.
inline AxisTables cw_inner_products(const PiecewisePolynomial& f, int J) {
  AxisTables out;
  for (int l = -1; l <= J; ++l) {
    LevelTable t;
    t.level = l;
    const auto [klo, khi] = cw::shift_range(l, f.support_lo(), f.support_hi());
    t.k_lo = klo;
    for (int k = klo; k <= khi; ++k) t.values.push_back(integrate_product(f, cw::wavelet(l, k)));
    out.push_back(std::move(t));
  }
  return out;
}

/// Dual inner products <f, dual psi_{l,k}> = sum_n a_n <f, psi_{l,k+n}> from primal tables.
/// Dual wavelets are not compactly supported, so the output extends `margin` shifts past
/// the primal range on each side; a_n beyond the margin is below the fitted tail.
inline AxisTables dual_from_primal(const AxisTables& primal, const DualSystem& dual, int margin = 20) {
  margin = std::clamp(margin, 0, dual.n_max());
  AxisTables out;
  for (const auto& t : primal) {
    const auto& a = dual.for_level(t.level);
    LevelTable d;
    d.level = t.level;
    d.k_lo = t.k_lo - margin;
    d.values.assign(t.values.size() + 2 * margin, 0.0);
    for (int k = d.k_lo; k <= d.k_hi(); ++k) {
      double s = 0.0;
      for (int kk = t.k_lo; kk <= t.k_hi(); ++kk) s += a[kk - k] * t.at(kk);
      d.values[k - d.k_lo] = s;
    }
    out.push_back(std::move(d));
  }
  return out;
}

/// Tensor product c * prod_i f_i(x_i) of compactly supported piecewise polynomials.
struct TensorPiecewise {
  double scale = 1.0;
  std::vector<PiecewisePolynomial> factors;

  int dim() const { return static_cast<int>(factors.size()); }
  double operator()(std::span<const double> x) const {
    double v = scale;
    for (int i = 0; i < dim(); ++i) v *= factors[i](x[i]);
    return v;
  }
};

namespace detail {
inline void tensor_coefficients(const std::vector<AxisTables>& axes, double scale, int dim,
                                WaveletCoefficients& out) {
  std::vector<int> lvl(dim, 0);
  const int nl = static_cast<int>(axes[0].size());
  auto rec_level = [&](auto&& self, int axis) -> void {
    if (axis == dim) {
      auto level = MultiIndex::zeros(dim);
      for (int i = 0; i < dim; ++i) level[i] = axes[i][lvl[i]].level;
      const double w = std::ldexp(scale, static_cast<int>(level.positive_sum()));
      std::vector<int> k(dim);
      auto rec_shift = [&](auto&& self2, int ax, double acc) -> void {
        if (ax == dim) {
          out.set(WaveletIndex{level, MultiIndex(k)}, w * acc);
          return;
        }
        const auto& t = axes[ax][lvl[ax]];
        for (int kk = t.k_lo; kk <= t.k_hi(); ++kk) {
          k[ax] = kk;
          self2(self2, ax + 1, acc * t.at(kk));
        }
      };
      rec_shift(rec_shift, 0, 1.0);
      return;
    }
    for (int l = 0; l < nl; ++l) {
      lvl[axis] = l;
      self(self, axis + 1);
    }
  };
  rec_level(rec_level, 0);
}
}  // namespace detail

/// lambda_{j,k} = 2^{|j|_+} <f, psi_{j,k}> (primal) or with dual wavelets (dual), |j|_inf <= J.
inline WaveletCoefficients cw_analyze(const TensorPiecewise& f, int J, Basis basis, const DualSystem& dual,
                                      int dual_margin = 20) {
  if (J < 0) throw ConfigError("cw_analyze: J must be >= 0");
  if (f.dim() < 1) throw ConfigError("cw_analyze: empty tensor function");
  std::vector<AxisTables> axes;
  for (const auto& fi : f.factors) {
    auto t = cw_inner_products(fi, J);
    if (basis == Basis::ChuiWangDual) t = dual_from_primal(t, dual, dual_margin);
    else if (basis != Basis::ChuiWangPrimal) throw ConfigError("cw_analyze: basis must be a Chui-Wang basis");
    axes.push_back(std::move(t));
  }
  WaveletCoefficients out(basis, f.dim());
  detail::tensor_coefficients(axes, f.scale, f.dim(), out);
  return out;
}

/// Generic path: f evaluated on a tensor 2-point Gauss grid with panels of width
/// 2^{-quad_level} covering the support box [lo, hi]^d (rounded outward).
inline WaveletCoefficients cw_analyze(const std::function<double(std::span<const double>)>& f, int dim, double lo,
                                      double hi, int J, Basis basis, const DualSystem& dual, int quad_level = -1,
                                      int dual_margin = 20) {
  if (J < 0) throw ConfigError("cw_analyze: J must be >= 0");
  if (basis != Basis::ChuiWangPrimal && basis != Basis::ChuiWangDual)
    throw ConfigError("cw_analyze: basis must be a Chui-Wang basis");
  if (quad_level < 0) quad_level = J + 4;
  const double h = std::ldexp(1.0, -quad_level);
  const double a = std::floor(lo / h) * h, b = std::ceil(hi / h) * h;
  const int panels = static_cast<int>(std::llround((b - a) / h));
  const auto& gl = gauss_legendre(2);
  const int nq = 2 * panels;
  double total = 1.0;
  for (int i = 0; i < dim; ++i) total *= nq;
  if (total > static_cast<double>(1 << 26)) throw ConfigError("cw_analyze: quadrature grid too large; lower quad_level");
  std::vector<double> nodes(nq), weights(nq);
  for (int p = 0; p < panels; ++p)
    for (int q = 0; q < 2; ++q) {
      nodes[2 * p + q] = a + h * (p + 0.5 + 0.5 * gl.nodes[q]);
      weights[2 * p + q] = 0.5 * h * gl.weights[q];
    }
  std::size_t n_total = static_cast<std::size_t>(total);
  std::vector<double> samples(n_total);
  {
    std::vector<int> idx(dim, 0);
    std::vector<double> x(dim, nodes[0]);
    for (std::size_t flat = 0; flat < n_total; ++flat) {
      bool inside = true;
      for (int i = 0; i < dim; ++i) inside = inside && x[i] >= lo && x[i] <= hi;
      samples[flat] = inside ? f(x) : 0.0;
      for (int ax = dim - 1; ax >= 0; --ax) {
        if (++idx[ax] < nq) {
          x[ax] = nodes[idx[ax]];
          break;
        }
        idx[ax] = 0;
        x[ax] = nodes[0];
      }
    }
  }
  WaveletCoefficients out(basis, dim);
  std::vector<int> lvl(dim, -1);
  auto rec = [&](auto&& self, int axis) -> void {
    if (axis == dim) {
      std::vector<int> shape(dim, nq);
      std::vector<double> t = samples;
      std::vector<int> klo(dim);
      for (int i = 0; i < dim; ++i) {
        const auto [k0, k1] = cw::shift_range(lvl[i], lo, hi);
        klo[i] = k0;
        AxisMatrix<double> m(k1 - k0 + 1, nq);
        for (int k = k0; k <= k1; ++k)
          for (int q = 0; q < nq; ++q) m(k - k0, q) = weights[q] * cw::psi(lvl[i], k, nodes[q]);
        t = apply_along_axis(t, shape, i, m);
      }
      if (basis == Basis::ChuiWangDual) {
        const int margin = std::clamp(dual_margin, 0, dual.n_max());
        for (int i = 0; i < dim; ++i) {
          const auto& seq = dual.for_level(lvl[i]);
          const int nk = shape[i];
          AxisMatrix<double> conv(nk + 2 * margin, nk);
          for (int r = 0; r < nk + 2 * margin; ++r)
            for (int c = 0; c < nk; ++c) conv(r, c) = seq[c + margin - r];
          t = apply_along_axis(t, shape, i, conv);
          klo[i] -= margin;
        }
      }
      MultiIndex level(lvl);
      const double w = std::ldexp(1.0, static_cast<int>(level.positive_sum()));
      std::vector<int> kidx(dim, 0);
      for (std::size_t flat = 0; flat < t.size(); ++flat) {
        std::vector<int> k(dim);
        for (int i = 0; i < dim; ++i) k[i] = klo[i] + kidx[i];
        out.set(WaveletIndex{level, MultiIndex(std::move(k))}, w * t[flat]);
        for (int ax = dim - 1; ax >= 0; --ax) {
          if (++kidx[ax] < shape[ax]) break;
          kidx[ax] = 0;
        }
      }
      return;
    }
    for (int l = -1; l <= J; ++l) {
      lvl[axis] = l;
      self(self, axis + 1);
    }
  };
  rec(rec, 0);
  return out;
}

/// Synthesis on the closed grid of [0,1]^d: dual coefficients pair with primal
/// wavelets and primal coefficients with dual wavelets.
inline GridFunction cw_synthesize(const WaveletCoefficients& coeffs, int level, const DualSystem& dual) {
  const int d = coeffs.dim();
  GridFunction out(Domain::UnitCube, d, level);
  const auto xs = out.axis_nodes();
  const int n = out.points_per_axis();
  const bool use_dual = coeffs.basis() == Basis::ChuiWangPrimal;
  // group coefficients by level; each level is a dense shift box
  std::map<MultiIndex, std::vector<std::pair<MultiIndex, double>>> by_level;
  for (const auto& [idx, v] : coeffs) by_level[idx.level].emplace_back(idx.shift, v);
  for (const auto& [lvl, entries] : by_level) {
    std::vector<int> klo(d, std::numeric_limits<int>::max()), khi(d, std::numeric_limits<int>::min());
    for (const auto& [k, v] : entries)
      for (int i = 0; i < d; ++i) {
        klo[i] = std::min(klo[i], k[i]);
        khi[i] = std::max(khi[i], k[i]);
      }
    std::vector<int> shape(d);
    std::size_t total = 1;
    for (int i = 0; i < d; ++i) {
      shape[i] = khi[i] - klo[i] + 1;
      total *= shape[i];
    }
    std::vector<double> box(total, 0.0);
    for (const auto& [k, v] : entries) {
      std::size_t f = 0;
      for (int i = 0; i < d; ++i) f = f * shape[i] + (k[i] - klo[i]);
      box[f] = v;
    }
    for (int i = 0; i < d; ++i) {
      AxisMatrix<double> m(n, shape[i]);
      for (int x = 0; x < n; ++x)
        for (int k = 0; k < shape[i]; ++k)
          m(x, k) = use_dual ? dual.dual_eval(lvl[i], klo[i] + k, xs[x]) : cw::psi(lvl[i], klo[i] + k, xs[x]);
      box = apply_along_axis(box, shape, i, m);
    }
    for (std::size_t f = 0; f < box.size(); ++f) out[f] += box[f];
  }
  return out;
}

}  // namespace hpcb
