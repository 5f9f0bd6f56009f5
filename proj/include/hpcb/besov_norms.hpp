#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hpcb/chui_wang.hpp"
#include "hpcb/coefficients.hpp"
#include "hpcb/decomposition.hpp"
#include "hpcb/error.hpp"
#include "hpcb/grid.hpp"
#include "hpcb/hpc_transform.hpp"
#include "hpcb/index_sets.hpp"
#include "hpcb/piecewise.hpp"

namespace hpcb {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Smoothness r and integrability exponents p, q in (0, inf].
struct BesovParams {
  double r = 0.0;
  double p = 2.0;
  double q = 2.0;

  BesovParams() = default;
  BesovParams(double r_, double p_, double q_) : r(r_), p(p_), q(q_) {
    if (!(p > 0.0) || !(q > 0.0)) throw ConfigError("Besov parameters need p, q in (0, inf]");
  }

  double sigma_p() const { return std::max(0.0, 1.0 / p - 1.0); }
  bool valid() const { return r > sigma_p(); }
  void require_valid() const {
    if (!valid())
      throw ConfigError("Besov parameters need r > sigma_p = " + std::to_string(sigma_p()) + ", got r = " +
                        std::to_string(r));
  }

  static double conjugate(double e) { return e <= 1.0 ? kInf : (std::isinf(e) ? 1.0 : e / (e - 1.0)); }
  double p_conj() const { return conjugate(p); }
  double q_conj() const { return conjugate(q); }
  double r_conj() const { return -r + sigma_p(); }
};

/// Weighting used by seq_norm: the plain s^r_{p,q}b weight, or the dual space
/// s^{r'+1}_{p',q'}b paired with it in the discrete Hoelder inequality.
enum class SeqWeight { Standard, Dual };

struct SeqNormSpec {
  BesovParams params;
  SeqWeight weight = SeqWeight::Standard;

  /// Effective (r, p, q) the norm is evaluated with.
  BesovParams effective() const {
    if (weight == SeqWeight::Standard) return params;
    return BesovParams(params.r_conj() + 1.0, params.p_conj(), params.q_conj());
  }
};

/// Accumulates (sum_i v_i^e)^{1/e}, or max_i v_i for e = inf.
class LqAccumulator {
 public:
  explicit LqAccumulator(double e) : e_(e) {}
  void add(double v) {
    if (std::isinf(e_)) acc_ = std::max(acc_, v);
    else acc_ += std::pow(v, e_);
  }
  double value() const { return std::isinf(e_) ? acc_ : std::pow(acc_, 1.0 / e_); }

 private:
  double e_;
  double acc_ = 0.0;
};

/// One row of a norm report; CSV `norm_kind,r,p,q,J_max,value,tail_bound`.
struct NormReport {
  std::string kind;
  BesovParams params;
  int j_max = 0;
  double value = 0.0;
  double tail_bound = 0.0;

  static void write_csv_header(std::ostream& os) { os << "norm_kind,r,p,q,J_max,value,tail_bound\n"; }
  void write_csv_row(std::ostream& os) const {
    auto num = [](double v) {
      if (std::isinf(v)) return std::string("inf");
      std::ostringstream s;
      s << std::setprecision(12) << v;
      return s.str();
    };
    os << kind << ',' << num(params.r) << ',' << num(params.p) << ',' << num(params.q) << ',' << j_max << ','
       << num(value) << ',' << num(tail_bound) << '\n';
  }
};

// ---------------------------------------------------------------- sequence norms

/// Level weight exponent uses |j|_1 with level -1 counted as 0 (the positive part).
inline double seq_norm(const WaveletCoefficients::Storage& coeffs, const BesovParams& bp) {
  std::map<MultiIndex, LqAccumulator> inner;
  for (const auto& [idx, v] : coeffs) inner.try_emplace(idx.level, bp.p).first->second.add(std::abs(v));
  LqAccumulator outer(bp.q);
  for (const auto& [level, acc] : inner) {
    const double w = std::isinf(bp.p) ? bp.r : bp.r - 1.0 / bp.p;
    outer.add(std::exp2(static_cast<double>(level.positive_sum()) * w) * acc.value());
  }
  return outer.value();
}

inline double seq_norm(const WaveletCoefficients& coeffs, const SeqNormSpec& spec) {
  return seq_norm(coeffs.entries(), spec.effective());
}

struct HolderPair {
  double lhs = 0.0;  // sum |lambda mu|
  double rhs = 0.0;  // ||lambda||_{s^r_{p,q}b} ||mu||_{s^{r'+1}_{p',q'}b}
};

inline HolderPair holder_pairing_check(const WaveletCoefficients::Storage& lambda,
                                       const WaveletCoefficients::Storage& mu, const BesovParams& bp) {
  HolderPair out;
  for (const auto& [idx, v] : lambda) {
    auto it = mu.find(idx);
    if (it != mu.end()) out.lhs += std::abs(v * it->second);
  }
  out.rhs = seq_norm(lambda, bp) * seq_norm(mu, SeqNormSpec{bp, SeqWeight::Dual}.effective());
  return out;
}

// ---------------------------------------------------------------- hpc blocks

namespace detail {
inline CoefficientMap weighted_block(const CoefficientMap& coeffs, const MultiIndex& j,
                                     const DecompositionOfUnity& decomp, bool symmetric) {
  CoefficientMap out(coeffs.basis(), coeffs.dim());
  for (const auto& [k, v] : coeffs) {
    const double w = decomp.phi(j, symmetric ? k.abs() : k);
    if (w != 0.0) out.set(k, w * v);
  }
  return out;
}

inline void require_block_covered(const IndexSet& computed_on, const MultiIndex& j, const DecompositionOfUnity& decomp,
                                  bool symmetric) {
  for (const auto& k : dyadic_support(j, decomp)) {
    if (!symmetric) {
      if (!computed_on.contains(k)) throw PreconditionError("block support not covered by the computed coefficients");
      continue;
    }
    // every sign pattern of k must be present
    const int d = k.dim();
    for (int mask = 0; mask < (1 << d); ++mask) {
      MultiIndex s = k;
      for (int i = 0; i < d; ++i)
        if (mask >> i & 1) s[i] = -s[i];
      if (!computed_on.contains(s)) throw PreconditionError("block support not covered by the computed coefficients");
    }
  }
}
}  // namespace detail

/// f_j^hpc = sum_k phi_j(k) fhat(k) c_k on the closed grid at `level`.
inline GridFunction hpc_block(const CoefficientMap& coeffs, const MultiIndex& j, const DecompositionOfUnity& decomp,
                              int level) {
  if (coeffs.basis() != Basis::HalfPeriodCosine) throw ConfigError("hpc_block expects hpc coefficients");
  require_same_dim(j, coeffs.dim());
  if (j.min_entry() < 0) throw ConfigError("hpc_block: level must be nonnegative");
  return hpc_synthesize(detail::weighted_block(coeffs, j, decomp, false), level);
}

/// Same, but verifies that `computed_on` contains the whole block support first.
inline GridFunction hpc_block(const CoefficientMap& coeffs, const IndexSet& computed_on, const MultiIndex& j,
                              const DecompositionOfUnity& decomp, int level) {
  detail::require_block_covered(computed_on, j, decomp, false);
  return hpc_block(coeffs, j, decomp, level);
}

/// Littlewood-Paley block sum_k psi_j(k) fhat(k) exp_k on [-1,1]^d with psi_j(k) = phi_j(|k|).
inline ComplexGridFunction lp_block_torus(const CoefficientMap& coeffs, const MultiIndex& j,
                                          const DecompositionOfUnity& decomp, int level) {
  if (coeffs.basis() != Basis::TorusExponential) throw ConfigError("lp_block_torus expects torus coefficients");
  require_same_dim(j, coeffs.dim());
  if (j.min_entry() < 0) throw ConfigError("lp_block_torus: level must be nonnegative");
  return fourier_synthesize(detail::weighted_block(coeffs, j, decomp, true), Domain::SymCube, level);
}

inline ComplexGridFunction lp_block_torus(const CoefficientMap& coeffs, const IndexSet& computed_on,
                                          const MultiIndex& j, const DecompositionOfUnity& decomp, int level) {
  detail::require_block_covered(computed_on, j, decomp, true);
  return lp_block_torus(coeffs, j, decomp, level);
}

struct HpcNormOptions {
  int j_max = -1;       // -1: smallest J with every frequency below 2^{J-1}
  int grid_level = -1;  // -1: smallest level passing the aliasing guard
  DecompositionOfUnity decomp = DecompositionOfUnity::standard();
  double max_tail_ratio = 0.5;  // tail bound above this fraction of the value is an error
};

inline int default_block_level(int kmax) {
  int J = 1;
  while (kmax >= (1 << (J - 1))) ++J;
  return J;
}

/// Truncated quasi-norm (sum_j 2^{r q |j|_1} ||f_j^hpc||_p^q)^{1/q} over |j|_inf <= J_max. The tail bound
/// uses ||f_j||_inf <= sum |fhat(k)| phi_j(k) 2^{|k|_0/2} for the blocks beyond J_max.
inline NormReport hpc_besov_norm(const CoefficientMap& coeffs, const BesovParams& bp, const HpcNormOptions& opt = {}) {
  if (coeffs.basis() != Basis::HalfPeriodCosine) throw ConfigError("hpc_besov_norm expects hpc coefficients");
  bp.require_valid();
  const int d = coeffs.dim();
  const int kmax = std::max(coeffs.max_abs_frequency(), 1);
  const int J = opt.j_max >= 0 ? opt.j_max : default_block_level(kmax);
  const int level = opt.grid_level >= 0 ? opt.grid_level : resolving_level(std::min(kmax, 1 << (J + 1)));

  // blocks that see at least one coefficient, with their sup bound
  std::map<MultiIndex, double> sup_bound;
  for (const auto& [k, v] : coeffs) {
    std::vector<std::pair<int, int>> ranges(d);
    for (int i = 0; i < d; ++i) {
      int lo = 0;
      while (DecompositionOfUnity::support_hi(lo) <= k[i]) ++lo;
      ranges[i] = {lo, lo + 1};
    }
    MultiIndex j = MultiIndex::zeros(d);
    auto rec = [&](auto&& self, int axis) -> void {
      if (axis == d) {
        const double w = opt.decomp.phi(j, k);
        if (w != 0.0) sup_bound[j] += w * std::abs(v) * std::exp2(0.5 * k.nonzero_count());
        return;
      }
      for (int e = ranges[axis].first; e <= ranges[axis].second; ++e) {
        j[axis] = e;
        self(self, axis + 1);
      }
    };
    rec(rec, 0);
  }

  LqAccumulator body(bp.q), tail(bp.q);
  for (const auto& [j, bound] : sup_bound) {
    const double w = std::exp2(bp.r * static_cast<double>(j.sum()));
    if (j.max_abs() > J) {
      tail.add(w * bound);
      continue;
    }
    require_resolved(level, std::min(kmax, DecompositionOfUnity::support_hi(j.max_abs())));
    body.add(w * hpc_block(coeffs, j, opt.decomp, level).lp_norm(bp.p));
  }
  NormReport rep{"hpc", bp, J, body.value(), tail.value()};
  if (rep.tail_bound > opt.max_tail_ratio * rep.value && rep.tail_bound > 0.0)
    throw TruncationError("hpc_besov_norm: tail bound " + std::to_string(rep.tail_bound) +
                          " is not small against the truncated value; raise J_max");
  return rep;
}

struct BlockIdentity {
  double lhs = 0.0;  // ||f~_j||_p^p on the torus [-1,1]^d (grid sup for p = inf)
  double rhs = 0.0;  // 2^d ||f_j^hpc||_p^p on [0,1]^d (grid sup for p = inf)
};

/// Periodization principle per block: the torus block of P(f) equals P of the hpc block.
/// The torus side goes through samples of P(f) and fourier_analyze; the cube side through hpc_block.
inline BlockIdentity periodization_block_identity(const CoefficientMap& coeffs, const MultiIndex& j, double p,
                                                  const DecompositionOfUnity& decomp, int level) {
  if (coeffs.basis() != Basis::HalfPeriodCosine) throw ConfigError("block identity expects hpc coefficients");
  const int d = coeffs.dim();
  const GridFunction f = hpc_synthesize(coeffs, level);
  const GridFunction pf = periodize(f);
  const int kmax = coeffs.max_abs_frequency();
  const auto K = box(std::vector<int>(d, -kmax), std::vector<int>(d, kmax));
  const auto torus = fourier_analyze(pf, K);
  const ComplexGridFunction tb = lp_block_torus(torus, j, decomp, level);
  const GridFunction cb = hpc_block(coeffs, j, decomp, level);
  if (std::isinf(p)) return {tb.lp_norm(p), cb.lp_norm(p)};
  return {tb.lp_norm_pow(p), std::ldexp(cb.lp_norm_pow(p), d)};
}

// ---------------------------------------------------------------- tensor fast paths

/// hpc coefficients <f, c_k>, k = 0..kmax, of a univariate piecewise polynomial supported in [0,1].
inline std::vector<double> hpc_coefficients(const PiecewisePolynomial& f, int kmax) {
  if (f.support_lo() < 0.0 || f.support_hi() > 1.0) throw ConfigError("hpc_coefficients: support must lie in [0,1]");
  std::vector<double> out(kmax + 1);
  out[0] = f.integral();
  for (int k = 1; k <= kmax; ++k) out[k] = std::numbers::sqrt2 * f.cosine_integral(std::numbers::pi * k);
  return out;
}

/// Per-level contributions S(j) to a p-th power norm of a univariate factor, plus a geometric tail estimate.
struct LevelSums {
  int first_level = 0;
  std::vector<double> terms;
  double tail = 0.0;  // inf when the terms do not decay

  double total() const {
    double s = 0.0;
    for (double t : terms) s += t;
    return s;
  }
};

namespace detail {
inline double geometric_tail(const std::vector<double>& terms) {
  if (terms.size() < 3) return kInf;
  const double a = terms[terms.size() - 2], b = terms.back();
  if (b == 0.0) return 0.0;
  double total = 0.0;
  for (double t : terms) total += t;
  // terms already at round-off level: quadrature noise, not a trend
  if (b <= 1e-13 * total) return b;
  const double ratio = b / a;
  if (!(ratio < 0.9)) return kInf;
  return b * ratio / (1.0 - ratio);
}

inline void require_tensor_exponents(const BesovParams& bp) {
  if (bp.p != bp.q || std::isinf(bp.p)) throw ConfigError("tensor norm path needs finite p = q");
}

inline NormReport combine_axes(std::string kind, const BesovParams& bp, int J, double scale,
                               const std::vector<LevelSums>& axes) {
  double value = std::abs(scale), with_tail = std::abs(scale);
  for (const auto& a : axes) {
    value *= std::pow(a.total(), 1.0 / bp.p);
    with_tail *= std::pow(a.total() + a.tail, 1.0 / bp.p);
  }
  return {std::move(kind), bp, J, value, with_tail - value};
}
}  // namespace detail

/// S(l) = 2^{l_+ (r - 1/p) p} sum_k |lambda_{l,k}|^p, l = -1..J, with lambda = 2^{l_+}<f, psi_{l,k}>
/// (primal) or the dual analogue.
inline LevelSums cw_level_sums(const PiecewisePolynomial& f, const BesovParams& bp, int J, Basis basis,
                               const DualSystem* dual = nullptr) {
  if (basis != Basis::ChuiWangPrimal && basis != Basis::ChuiWangDual)
    throw ConfigError("cw_level_sums: basis must be a Chui-Wang basis");
  auto tabs = cw_inner_products(f, J);
  if (basis == Basis::ChuiWangDual) {
    if (!dual) throw ConfigError("cw_level_sums: dual system required");
    tabs = dual_from_primal(tabs, *dual);
  }
  LevelSums out{-1, {}, 0.0};
  for (const auto& t : tabs) {
    const int lp = std::max(t.level, 0);
    double s = 0.0;
    for (double v : t.values) s += std::pow(std::abs(std::ldexp(v, lp)), bp.p);
    out.terms.push_back(std::exp2(lp * (bp.r - 1.0 / bp.p) * bp.p) * s);
  }
  out.tail = detail::geometric_tail(out.terms);
  return out;
}

/// S(j) = 2^{r p j} ||f_j^hpc||_p^p, j = 0..J. p = 2 uses Parseval; other p sample each block.
inline LevelSums hpc_level_sums(const PiecewisePolynomial& f, const BesovParams& bp, int J,
                                const DecompositionOfUnity& decomp = DecompositionOfUnity::standard()) {
  if (bp.p != 2.0 && J > 10) throw ConfigError("hpc_level_sums: sampled path limited to J <= 10");
  const auto c = hpc_coefficients(f, DecompositionOfUnity::support_hi(J));
  LevelSums out{0, {}, 0.0};
  for (int j = 0; j <= J; ++j) {
    const int lo = DecompositionOfUnity::support_lo(j), hi = DecompositionOfUnity::support_hi(j);
    double s = 0.0;
    if (bp.p == 2.0) {
      for (int k = lo; k <= hi; ++k) {
        const double w = decomp.phi(j, k) * c[k];
        s += w * w;
      }
    } else {
      CoefficientMap blk(Basis::HalfPeriodCosine, 1);
      for (int k = lo; k <= hi; ++k)
        if (const double w = decomp.phi(j, k); w != 0.0) blk.set(MultiIndex{k}, w * c[k]);
      s = blk.empty() ? 0.0 : hpc_synthesize(blk, resolving_level(hi) + 2).lp_norm_pow(bp.p);
    }
    out.terms.push_back(std::exp2(bp.r * bp.p * j) * s);
  }
  out.tail = detail::geometric_tail(out.terms);
  return out;
}

namespace detail {
inline double binomial(int n, int k) {
  double b = 1.0;
  for (int i = 0; i < k; ++i) b = b * (n - i) / (i + 1);
  return b;
}

// int_{-1}^{1} |Delta^m_{h t} f(x)| dh, split where the stencil crosses a knot.
inline double mean_abs_difference(const PiecewisePolynomial& f, int m, double t, double x, int sub) {
  std::vector<double> hs = {-1.0, 0.0, 1.0};
  for (double kn : f.breaks())
    for (int i = 1; i <= m; ++i) {
      const double h = (kn - x) / (i * t);
      if (h > -1.0 && h < 1.0) hs.push_back(h);
    }
  std::sort(hs.begin(), hs.end());
  hs.erase(std::unique(hs.begin(), hs.end()), hs.end());
  const auto& gl = gauss_legendre(8);
  double s = 0.0;
  for (std::size_t a = 0; a + 1 < hs.size(); ++a) {
    const double w = (hs[a + 1] - hs[a]) / sub;
    for (int b = 0; b < sub; ++b)
      s += gl.integrate(
          [&](double h) {
            double v = 0.0;
            for (int i = 0; i <= m; ++i) v += ((m - i) % 2 ? -1.0 : 1.0) * binomial(m, i) * f(x + i * h * t);
            return std::abs(v);
          },
          hs[a] + b * w, hs[a] + (b + 1) * w);
  }
  return s;
}

// int_R (int_{-1}^{1} |Delta^m_{h t} f(x)| dh)^p dx
inline double mean_difference_power(const PiecewisePolynomial& f, int m, double t, double p, int sub) {
  std::vector<double> xs;
  for (double kn : f.breaks())
    for (int i = -m; i <= m; ++i) xs.push_back(kn + i * t);
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end(), [](double a, double b) { return std::abs(a - b) < 1e-15; }), xs.end());
  const auto& gl = gauss_legendre(8);
  double s = 0.0;
  for (std::size_t a = 0; a + 1 < xs.size(); ++a) {
    const double len = xs[a + 1] - xs[a];
    const int panels = len <= 2.0 * m * t ? 2 : 8;
    const double w = len / panels;
    for (int b = 0; b < panels; ++b)
      s += gl.integrate([&](double x) { return std::pow(mean_abs_difference(f, m, t, x, sub), p); },
                        xs[a] + b * w, xs[a] + (b + 1) * w);
  }
  return s;
}
}  // namespace detail

/// S(j) = 2^{r p j} ||R_m(f, 2^{-j}, .)||_p^p with R_m(f,t,x) = int_{[-1,1]} |Delta^m_{ht} f(x)| dh for j >= 1
/// and R(f,1,x) = 2|f(x)| at j = 0. `quad_error` receives the summed change under panel refinement.
inline LevelSums difference_level_sums(const PiecewisePolynomial& f, const BesovParams& bp, int m, int J,
                                       double* quad_error = nullptr) {
  if (m < 2 || m > 3) throw ConfigError("difference order must be 2 or 3");
  if (!(m > bp.r)) throw ConfigError("difference order must exceed r");
  LevelSums out{0, {}, 0.0};
  double err = 0.0;
  for (int j = 0; j <= J; ++j) {
    double s, coarse;
    if (j == 0) {
      const auto gl = gauss_legendre(20);
      s = 0.0;
      for (std::size_t i = 0; i + 1 < f.breaks().size(); ++i)
        s += gl.integrate([&](double x) { return std::pow(2.0 * std::abs(f(x)), bp.p); }, f.breaks()[i],
                          f.breaks()[i + 1]);
      coarse = s;
    } else {
      const double t = std::ldexp(1.0, -j);
      s = detail::mean_difference_power(f, m, t, bp.p, 4);
      coarse = quad_error ? detail::mean_difference_power(f, m, t, bp.p, 2) : s;
    }
    const double w = std::exp2(bp.r * bp.p * j);
    out.terms.push_back(w * s);
    err += w * std::abs(s - coarse);
  }
  out.tail = detail::geometric_tail(out.terms);
  if (quad_error) *quad_error = err;
  return out;
}

/// Chui-Wang sequence norm of a tensor piecewise polynomial, levels |j|_inf <= J, p = q.
inline NormReport cw_seq_norm_tensor(const TensorPiecewise& f, const BesovParams& bp, int J,
                                     Basis basis = Basis::ChuiWangPrimal, const DualSystem* dual = nullptr) {
  detail::require_tensor_exponents(bp);
  std::vector<LevelSums> axes;
  for (const auto& fi : f.factors) axes.push_back(cw_level_sums(fi, bp, J, basis, dual));
  return detail::combine_axes(basis == Basis::ChuiWangPrimal ? "cw" : "cw_dual", bp, J, f.scale, axes);
}

/// hpc Besov norm of a tensor piecewise polynomial supported in [0,1]^d, p = q.
inline NormReport hpc_besov_norm_tensor(const TensorPiecewise& f, const BesovParams& bp, int J,
                                        const DecompositionOfUnity& decomp = DecompositionOfUnity::standard()) {
  detail::require_tensor_exponents(bp);
  bp.require_valid();
  std::vector<LevelSums> axes;
  for (const auto& fi : f.factors) axes.push_back(hpc_level_sums(fi, bp, J, decomp));
  return detail::combine_axes("hpc", bp, J, f.scale, axes);
}

/// Rectangular-means-of-differences seminorm of a tensor piecewise polynomial on R^d, p = q.
inline NormReport difference_seminorm_tensor(const TensorPiecewise& f, const BesovParams& bp, int m, int J,
                                             double* quad_error = nullptr) {
  detail::require_tensor_exponents(bp);
  std::vector<LevelSums> axes;
  double err = 0.0;
  for (const auto& fi : f.factors) {
    double e = 0.0;
    axes.push_back(difference_level_sums(fi, bp, m, J, quad_error ? &e : nullptr));
    err = std::max(err, e / std::max(axes.back().total(), 1e-300));
  }
  if (quad_error) *quad_error = err;  // relative, worst axis
  return detail::combine_axes("diff", bp, J, f.scale, axes);
}

// ---------------------------------------------------------------- generic difference seminorm

struct DifferenceSeminorm {
  double value = 0.0;
  double sampling_error = 0.0;          // Monte-Carlo standard error (0 for tensor Gauss)
  std::map<MultiIndex, double> levels;  // ||R^{e(j)}_m(f, 2^{-j}, .)||_p per level
};

/// Truncated (sum_j 2^{|j|_1 r q} ||R^{e(j)}_m(f, 2^{-j}, .)||_p^q)^{1/q} for 1-periodic f on [0,1)^d.
/// x runs over a periodic grid of 2^{grid_level} points per axis; the h-integral uses 8-point Gauss on
/// [-1,0] and [0,1] per active axis for d <= 2, Monte-Carlo with `mc_samples` draws otherwise.
inline DifferenceSeminorm difference_seminorm(const std::function<double(std::span<const double>)>& f, int dim,
                                              const BesovParams& bp, int m, int J, int grid_level = 6,
                                              unsigned long seed = 1, int mc_samples = 4096) {
  if (m < 2 || m > 3) throw ConfigError("difference order must be 2 or 3");
  if (!(m > bp.r)) throw ConfigError("difference order must exceed r");
  if (dim < 1) throw ConfigError("difference_seminorm: dim must be >= 1");
  const int n = 1 << grid_level;
  const auto& gl = gauss_legendre(8);
  std::vector<double> hn, hw;
  for (int side = 0; side < 2; ++side)
    for (int i = 0; i < 8; ++i) {
      hn.push_back(0.5 * gl.nodes[i] + (side ? 0.5 : -0.5));
      hw.push_back(0.5 * gl.weights[i]);
    }
  const bool mc = dim > 2;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(-1.0, 1.0);

  DifferenceSeminorm out;
  LqAccumulator outer(bp.q);
  double var_acc = 0.0;
  std::vector<int> lv(dim, 0);
  auto per_level = [&]() {
    MultiIndex j(lv);
    std::vector<int> active;
    for (int i = 0; i < dim; ++i)
      if (lv[i] != 0) active.push_back(i);
    const int na = static_cast<int>(active.size());
    // h-samples and weights over [-1,1]^{active}; inactive axes contribute the factor 2
    std::vector<std::vector<double>> hs;
    std::vector<double> hwt;
    if (!mc) {
      int total = 1;
      for (int a = 0; a < na; ++a) total *= 16;
      for (int s = 0; s < total; ++s) {
        std::vector<double> h(na);
        double w = 1.0;
        int r = s;
        for (int a = 0; a < na; ++a) {
          h[a] = hn[r % 16];
          w *= hw[r % 16];
          r /= 16;
        }
        hs.push_back(h);
        hwt.push_back(w);
      }
    } else {
      const int ns = na == 0 ? 1 : mc_samples;
      for (int s = 0; s < ns; ++s) {
        std::vector<double> h(na);
        for (auto& v : h) v = unif(rng);
        hs.push_back(h);
        hwt.push_back(std::ldexp(1.0, na) / ns);
      }
    }
    const double inactive = std::ldexp(1.0, dim - na);
    std::vector<double> x(dim), y(dim);
    std::vector<int> xi(dim, 0);
    std::size_t npts = 1;
    for (int i = 0; i < dim; ++i) npts *= n;
    LqAccumulator lp(bp.p);
    double sq_err = 0.0;
    for (std::size_t flat = 0; flat < npts; ++flat) {
      for (int i = 0; i < dim; ++i) x[i] = static_cast<double>(xi[i]) / n;
      double sum = 0.0, sum2 = 0.0;
      for (std::size_t s = 0; s < hs.size(); ++s) {
        // mixed difference as a sum over the (m+1)^{na} stencil
        double delta = 0.0;
        int total = 1;
        for (int a = 0; a < na; ++a) total *= m + 1;
        for (int st = 0; st < total; ++st) {
          double c = 1.0;
          y = x;
          int r = st;
          for (int a = 0; a < na; ++a) {
            const int i = r % (m + 1);
            r /= m + 1;
            c *= ((m - i) % 2 ? -1.0 : 1.0) * detail::binomial(m, i);
            const double t = std::ldexp(1.0, -lv[active[a]]);
            y[active[a]] = x[active[a]] + i * hs[s][a] * t;
          }
          delta += c * f(y);
        }
        const double v = std::abs(delta);
        sum += hwt[s] * v;
        sum2 += hwt[s] * v * v;
      }
      const double rval = inactive * sum;
      if (mc && na > 0) {
        const double vol = std::ldexp(1.0, na);
        const double mean = sum / vol, var = std::max(0.0, sum2 / vol - mean * mean);
        sq_err += std::pow(inactive * vol, 2) * var / static_cast<double>(hs.size());
      }
      // periodic grid weight 1/n per axis
      lp.add(std::isinf(bp.p) ? rval : rval * std::pow(1.0 / static_cast<double>(npts), 1.0 / bp.p));
      for (int a = dim - 1; a >= 0; --a) {
        if (++xi[a] < n) break;
        xi[a] = 0;
      }
    }
    const double norm = lp.value();
    out.levels[j] = norm;
    outer.add(std::exp2(bp.r * static_cast<double>(j.sum())) * norm);
    var_acc += std::exp2(2.0 * bp.r * static_cast<double>(j.sum())) * sq_err / static_cast<double>(npts);
  };
  auto rec = [&](auto&& self, int axis) -> void {
    if (axis == dim) {
      per_level();
      return;
    }
    for (int l = 0; l <= J; ++l) {
      lv[axis] = l;
      self(self, axis + 1);
    }
  };
  rec(rec, 0);
  out.value = outer.value();
  out.sampling_error = std::sqrt(var_acc);
  return out;
}

}  // namespace hpcb
