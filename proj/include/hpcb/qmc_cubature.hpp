#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <limits>
#include <memory>
#include <numbers>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hpcb/error.hpp"
#include "hpcb/hpc_transform.hpp"
#include "hpcb/multi_index.hpp"
#include "hpcb/parallel.hpp"
#include "hpcb/test_corpus.hpp"

namespace hpcb {

/// How a rule was built. Wrapping kinds keep the rule they were applied to.
struct Provenance {
  enum class Kind { Fibonacci, Rank1Lattice, DigitalNet, TentTransformed, Shifted };

  Kind kind = Kind::Rank1Lattice;
  int fibonacci_index = 0;
  std::vector<long> generator;
  long points = 0;
  int net_m = 0;
  int interlace = 1;
  std::vector<double> shift;
  std::shared_ptr<const Provenance> inner;

  std::string describe() const {
    std::ostringstream os;
    switch (kind) {
      case Kind::Fibonacci: os << "fibonacci(" << fibonacci_index << ")"; break;
      case Kind::Rank1Lattice: {
        os << "rank1(z=";
        for (std::size_t i = 0; i < generator.size(); ++i) os << (i ? ":" : "") << generator[i];
        os << ",n=" << points << ")";
        break;
      }
      case Kind::DigitalNet: os << "net(m=" << net_m << ",alpha=" << interlace << ")"; break;
      case Kind::TentTransformed: os << "tent(" << inner->describe() << ")"; break;
      case Kind::Shifted: os << "shifted(" << inner->describe() << ")"; break;
    }
    return os.str();
  }
};

/// Equal-weight point set on [0,1]^d. Nodes of the basic rules lie in [0,1)^d;
/// the tent image may touch the upper face.
class CubatureRule {
 public:
  CubatureRule(int dim, std::vector<double> nodes, Provenance provenance)
      : dim_(dim), nodes_(std::move(nodes)), provenance_(std::move(provenance)) {
    if (dim_ < 1) throw ConfigError("cubature rule dimension must be >= 1");
    if (nodes_.empty() || nodes_.size() % dim_ != 0) throw ConfigError("cubature rule: node array shape mismatch");
  }

  int dim() const { return dim_; }
  std::size_t size() const { return nodes_.size() / dim_; }
  std::span<const double> node(std::size_t j) const { return {nodes_.data() + j * dim_, static_cast<std::size_t>(dim_)}; }
  const std::vector<double>& nodes() const { return nodes_; }
  const Provenance& provenance() const { return provenance_; }

  /// Every weight is 1 / weight_denominator().
  std::size_t weight_denominator() const { return size(); }
  double weight(std::size_t) const { return 1.0 / static_cast<double>(size()); }
  std::vector<double> weights() const { return std::vector<double>(size(), weight(0)); }

  /// CSV rows `x_1,...,x_d,weight`.
  void write_csv(std::ostream& os) const {
    for (int i = 0; i < dim_; ++i) os << "x_" << (i + 1) << ',';
    os << "weight\n" << std::setprecision(17);
    for (std::size_t j = 0; j < size(); ++j) {
      for (double v : node(j)) os << v << ',';
      os << weight(j) << '\n';
    }
  }

 private:
  int dim_;
  std::vector<double> nodes_;
  Provenance provenance_;
};

/// Fibonacci numbers with b_1 = b_2 = 1.
inline long fibonacci_number(int n) {
  if (n < 1 || n > 90) throw ConfigError("fibonacci index out of range [1, 90]");
  long a = 1, b = 1;
  for (int i = 3; i <= n; ++i) {
    const long c = a + b;
    a = b;
    b = c;
  }
  return b;
}

/// Nodes ({j z_1 / n}, ..., {j z_d / n}), j = 0..n-1, in exact integer arithmetic.
inline CubatureRule rank1_lattice(const std::vector<long>& z, long n) {
  if (z.empty()) throw ConfigError("rank-1 lattice needs a generating vector");
  if (n < 1 || n > (1L << 31)) throw ConfigError("rank-1 lattice size out of range");
  const int d = static_cast<int>(z.size());
  std::vector<std::uint64_t> zr(d);
  for (int i = 0; i < d; ++i) zr[i] = static_cast<std::uint64_t>(((z[i] % n) + n) % n);
  std::vector<double> nodes(static_cast<std::size_t>(n) * d);
  const auto un = static_cast<std::uint64_t>(n);
  for (std::uint64_t j = 0; j < un; ++j)
    for (int i = 0; i < d; ++i)
      nodes[j * d + i] = static_cast<double>((j * zr[i]) % un) / static_cast<double>(n);
  Provenance p;
  p.kind = Provenance::Kind::Rank1Lattice;
  p.generator = z;
  p.points = n;
  return CubatureRule(d, std::move(nodes), std::move(p));
}

/// Two-dimensional Fibonacci lattice: n = b_index, z = (1, b_{index-1}).
inline CubatureRule fibonacci_rule(int index) {
  if (index < 2) throw ConfigError("fibonacci rule needs index >= 2");
  auto r = rank1_lattice({1, fibonacci_number(index - 1)}, fibonacci_number(index));
  Provenance p;
  p.kind = Provenance::Kind::Fibonacci;
  p.fibonacci_index = index;
  p.generator = r.provenance().generator;
  p.points = r.provenance().points;
  return CubatureRule(2, r.nodes(), std::move(p));
}

namespace detail {

/// Sobol direction numbers (Joe and Kuo, new-joe-kuo-6.21201), dimensions 2..12.
struct SobolPolynomial {
  int degree;
  unsigned coeffs;
  std::array<unsigned, 5> m;
};

inline constexpr std::array<SobolPolynomial, 11> kSobolTable = {{
    {1, 0, {1}},
    {2, 1, {1, 3}},
    {3, 1, {1, 3, 1}},
    {3, 2, {1, 1, 1}},
    {4, 1, {1, 1, 3, 3}},
    {4, 4, {1, 3, 5, 13}},
    {5, 2, {1, 1, 5, 5, 17}},
    {5, 4, {1, 1, 5, 5, 5}},
    {5, 7, {1, 1, 7, 11, 19}},
    {5, 11, {1, 1, 5, 1, 1}},
    {5, 13, {1, 1, 1, 3, 11}},
}};

inline constexpr int kSobolMaxDim = 1 + static_cast<int>(kSobolTable.size());
inline constexpr int kSobolBits = 32;

/// Direction numbers v_1..v_32 as left-aligned 32-bit integers.
inline std::array<std::uint32_t, kSobolBits> sobol_directions(int dim_index) {
  std::array<std::uint32_t, kSobolBits> v{};
  if (dim_index == 0) {
    for (int i = 0; i < kSobolBits; ++i) v[i] = 1u << (kSobolBits - 1 - i);
    return v;
  }
  const auto& e = kSobolTable[dim_index - 1];
  const int s = e.degree;
  for (int i = 0; i < s; ++i) v[i] = e.m[i] << (kSobolBits - 1 - i);
  for (int i = s; i < kSobolBits; ++i) {
    v[i] = v[i - s] ^ (v[i - s] >> s);
    for (int k = 1; k < s; ++k)
      if ((e.coeffs >> (s - 1 - k)) & 1u) v[i] ^= v[i - k];
  }
  return v;
}

/// Coordinates of the first 2^m Sobol points in natural order, as 32-bit fractions.
inline std::vector<std::uint32_t> sobol_digits(int m, int dims) {
  const std::size_t n = std::size_t{1} << m;
  std::vector<std::uint32_t> out(n * dims);
  for (int a = 0; a < dims; ++a) {
    const auto v = sobol_directions(a);
    for (std::size_t j = 0; j < n; ++j) {
      std::uint32_t x = 0;
      for (int b = 0; (j >> b) != 0; ++b)
        if ((j >> b) & 1u) x ^= v[b];
      out[j * dims + a] = x;
    }
  }
  return out;
}

/// Digit interlacing of two 32-bit fractions: digits x1_1 x2_1 x1_2 x2_2 ...
inline std::uint64_t interlace2(std::uint32_t x1, std::uint32_t x2) {
  std::uint64_t z = 0;
  for (int b = 0; b < 32; ++b) {
    const std::uint64_t d1 = (x1 >> (31 - b)) & 1u, d2 = (x2 >> (31 - b)) & 1u;
    z |= d1 << (63 - 2 * b);
    z |= d2 << (62 - 2 * b);
  }
  return z;
}

}  // namespace detail

/// Base-2 digital net with 2^m points from the Sobol generating matrices. With
/// alpha = 2 the coordinates of a 2d-dimensional net are interlaced pairwise.
inline CubatureRule digital_net(int m, int dim, int alpha = 1) {
  if (m < 0 || m > 20) throw ConfigError("digital net: m must lie in [0, 20]");
  if (dim < 1) throw ConfigError("digital net: dimension must be >= 1");
  if (alpha != 1 && alpha != 2) throw ConfigError("digital net: interlacing factor must be 1 or 2");
  if (alpha * dim > detail::kSobolMaxDim)
    throw ConfigError("digital net: dimension " + std::to_string(alpha * dim) + " exceeds the direction-number table");
  const std::size_t n = std::size_t{1} << m;
  const int base_dims = alpha * dim;
  const auto digits = detail::sobol_digits(m, base_dims);
  std::vector<double> nodes(n * dim);
  for (std::size_t j = 0; j < n; ++j)
    for (int i = 0; i < dim; ++i) {
      if (alpha == 1) {
        nodes[j * dim + i] = std::ldexp(static_cast<double>(digits[j * base_dims + i]), -32);
      } else {
        const auto z = detail::interlace2(digits[j * base_dims + 2 * i], digits[j * base_dims + 2 * i + 1]);
        // keep 53 bits so the value stays below 1
        nodes[j * dim + i] = std::ldexp(static_cast<double>(z >> 11), -53);
      }
    }
  Provenance p;
  p.kind = Provenance::Kind::DigitalNet;
  p.net_m = m;
  p.interlace = alpha;
  return CubatureRule(dim, std::move(nodes), std::move(p));
}

/// Nodes mapped componentwise by the tent 1 - |2t - 1|; weights unchanged.
inline CubatureRule tent_transform_rule(const CubatureRule& rule) {
  std::vector<double> nodes(rule.nodes().size());
  for (std::size_t i = 0; i < nodes.size(); ++i) nodes[i] = tent(rule.nodes()[i]);
  Provenance p;
  p.kind = Provenance::Kind::TentTransformed;
  p.inner = std::make_shared<const Provenance>(rule.provenance());
  return CubatureRule(rule.dim(), std::move(nodes), std::move(p));
}

/// Nodes moved by `shift` modulo 1.
inline CubatureRule shifted_rule(const CubatureRule& rule, const std::vector<double>& shift) {
  if (static_cast<int>(shift.size()) != rule.dim()) throw ConfigError("shift dimension mismatch");
  std::vector<double> nodes(rule.nodes().size());
  for (std::size_t j = 0; j < rule.size(); ++j)
    for (int i = 0; i < rule.dim(); ++i) {
      double v = rule.nodes()[j * rule.dim() + i] + shift[i];
      v -= std::floor(v);
      nodes[j * rule.dim() + i] = v < 1.0 ? v : 0.0;
    }
  Provenance p;
  p.kind = Provenance::Kind::Shifted;
  p.shift = shift;
  p.inner = std::make_shared<const Provenance>(rule.provenance());
  return CubatureRule(rule.dim(), std::move(nodes), std::move(p));
}

using PointFunction = std::function<double(std::span<const double>)>;

/// Sum_j w_j f(x_j). The sum is formed before dividing by n so f = c returns c.
inline double integrate(const CubatureRule& rule, const PointFunction& f) {
  const double s = parallel_sum(rule.size(), [&](std::size_t j) { return f(rule.node(j)); });
  return s / static_cast<double>(rule.size());
}

/// Rule applied to the character exp(2 pi i k.x).
inline Complex integrate_character(const CubatureRule& rule, const MultiIndex& k) {
  require_same_dim(k, rule.dim());
  Complex s{};
  for (std::size_t j = 0; j < rule.size(); ++j) {
    double phase = 0.0;
    const auto x = rule.node(j);
    for (int i = 0; i < rule.dim(); ++i) phase += k[i] * x[i];
    phase -= std::floor(phase);
    s += std::polar(1.0, 2.0 * std::numbers::pi * phase);
  }
  return s / static_cast<double>(rule.size());
}

struct CubatureIdentity {
  double lhs;  // |Q(tent(X), f) - I(f)|
  double rhs;  // |Q(X, f o tent) - I(f o tent)|
};

/// Both sides of the tent cubature identity. The tent preserves Lebesgue measure,
/// so I(f o tent) = I(f) = `integral`.
inline CubatureIdentity tent_cubature_identity(const CubatureRule& rule, const PointFunction& f, double integral) {
  const double lhs = std::abs(integrate(tent_transform_rule(rule), f) - integral);
  const double q = integrate(rule, [&](std::span<const double> x) {
    thread_local std::vector<double> y;
    y.assign(x.begin(), x.end());
    for (auto& v : y) v = tent(v);
    return f(y);
  });
  return {lhs, std::abs(q - integral)};
}

struct RatePoint {
  double n;
  double error;
};

/// Least-squares line through (log n, log error - log_power log log n), skipping
/// the `skip` smallest n.
struct RateFit {
  std::vector<RatePoint> points;
  std::size_t skip = 2;
  double log_power = 0.0;
  double slope = std::numeric_limits<double>::quiet_NaN();
  double intercept = std::numeric_limits<double>::quiet_NaN();
  double residual = std::numeric_limits<double>::quiet_NaN();
  bool degenerate = false;  // some error in the window is at round-off level

  void write_csv(std::ostream& os, bool header = true) const {
    if (header) os << "n,error,log2n,log2err\n";
    os << std::setprecision(17);
    for (const auto& p : points) {
      os << p.n << ',' << p.error << ',' << std::log2(p.n) << ',';
      if (p.error > 0.0) {
        os << std::log2(p.error);
      } else {
        os << "-inf";
      }
      os << '\n';
    }
  }
};

inline RateFit fit_rate(std::vector<RatePoint> points, std::size_t skip = 2, double log_power = 0.0) {
  RateFit fit;
  fit.points = std::move(points);
  fit.skip = skip;
  fit.log_power = log_power;
  std::sort(fit.points.begin(), fit.points.end(), [](const RatePoint& a, const RatePoint& b) { return a.n < b.n; });
  double emax = 0.0;
  for (const auto& p : fit.points) emax = std::max(emax, p.error);
  std::vector<double> xs, ys;
  for (std::size_t i = skip; i < fit.points.size(); ++i) {
    const auto& p = fit.points[i];
    if (!(p.error > 1e-14 * std::max(emax, 1e-300)) || !(p.n > 1.0)) {
      fit.degenerate = true;
      continue;
    }
    const double ln = std::log(p.n);
    xs.push_back(ln);
    ys.push_back(std::log(p.error) - log_power * std::log(ln));
  }
  if (xs.size() < 2) {
    fit.degenerate = true;
    return fit;
  }
  const double m = static_cast<double>(xs.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    sx += xs[i];
    sy += ys[i];
    sxx += xs[i] * xs[i];
    sxy += xs[i] * ys[i];
  }
  fit.slope = (m * sxy - sx * sy) / (m * sxx - sx * sx);
  fit.intercept = (sy - fit.slope * sx) / m;
  double rss = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    const double e = ys[i] - fit.intercept - fit.slope * xs[i];
    rss += e * e;
  }
  fit.residual = std::sqrt(rss / m);
  return fit;
}

/// A parametrized family of rules: Fibonacci index, net exponent m, ...
struct RuleFamily {
  std::string name;
  std::function<CubatureRule(int)> make;
};

inline RuleFamily fibonacci_family() { return {"fibonacci", [](int i) { return fibonacci_rule(i); }}; }

inline RuleFamily digital_net_family(int dim, int alpha) {
  return {"net" + std::to_string(alpha), [dim, alpha](int m) { return digital_net(m, dim, alpha); }};
}

/// Fixed generating vector, n = 2^param.
inline RuleFamily rank1_family(std::vector<long> z) {
  return {"rank1", [z](int m) { return rank1_lattice(z, 1L << m); }};
}

struct CubatureOptions {
  bool tent = false;
  int shifts = 0;  // 0: no random shift; otherwise mean error over this many shifts
  std::uint64_t seed = 1;
  std::size_t skip = 2;
  double log_power = 0.0;
};

/// Error table and slope fit for one family over the parameters in `params`.
inline RateFit convergence_experiment(const RuleFamily& family, const TestFunction& f, const std::vector<int>& params,
                                      const CubatureOptions& opt = {}) {
  if (!f.exact_integral()) throw PreconditionError("convergence experiment: exact integral unavailable for " + f.name());
  if (params.size() < opt.skip + 2) throw ConfigError("convergence experiment: too few rule sizes for the fit window");
  const double exact = *f.exact_integral();
  const auto eval = f.evaluator();
  auto points = parallel_map<RatePoint>(params.size(), [&](std::size_t idx) {
    const auto base = family.make(params[idx]);
    if (base.dim() != f.dim()) throw ConfigError("rule dimension does not match the test function");
    auto one = [&](const CubatureRule& r) {
      return std::abs(integrate(opt.tent ? tent_transform_rule(r) : r, eval) - exact);
    };
    double err = 0.0;
    if (opt.shifts <= 0) {
      err = one(base);
    } else {
      // per-size stream so results do not depend on scheduling
      std::mt19937_64 rng(opt.seed + 0x9e3779b97f4a7c15ULL * (idx + 1));
      std::uniform_real_distribution<double> u(0.0, 1.0);
      for (int s = 0; s < opt.shifts; ++s) {
        std::vector<double> shift(base.dim());
        for (auto& v : shift) v = u(rng);
        err += one(shifted_rule(base, shift));
      }
      err /= opt.shifts;
    }
    return RatePoint{static_cast<double>(base.size()), err};
  });
  const auto [lo, hi] = std::minmax_element(points.begin(), points.end(),
                                            [](const RatePoint& a, const RatePoint& b) { return a.n < b.n; });
  if (hi->n < 8.0 * lo->n) throw ConfigError("convergence experiment: sizes must span at least three dyadic decades");
  return fit_rate(std::move(points), opt.skip, opt.log_power);
}

}  // namespace hpcb
