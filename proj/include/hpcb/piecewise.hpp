#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "hpcb/error.hpp"

namespace hpcb {

/// Polynomial with ascending coefficients.
class Polynomial {
 public:
  Polynomial() = default;
  explicit Polynomial(std::vector<double> c) : c_(std::move(c)) { trim(); }

  int degree() const { return c_.empty() ? -1 : static_cast<int>(c_.size()) - 1; }
  const std::vector<double>& coefficients() const { return c_; }
  double coefficient(int i) const { return i < static_cast<int>(c_.size()) ? c_[i] : 0.0; }

  double operator()(double x) const {
    double v = 0.0;
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) v = v * x + *it;
    return v;
  }

  Polynomial derivative() const {
    if (c_.size() <= 1) return {};
    std::vector<double> d(c_.size() - 1);
    for (std::size_t i = 1; i < c_.size(); ++i) d[i - 1] = c_[i] * static_cast<double>(i);
    return Polynomial(std::move(d));
  }

  /// Antiderivative vanishing at 0.
  Polynomial antiderivative() const {
    std::vector<double> a(c_.size() + 1, 0.0);
    for (std::size_t i = 0; i < c_.size(); ++i) a[i + 1] = c_[i] / static_cast<double>(i + 1);
    return Polynomial(std::move(a));
  }

  double integral(double a, double b) const {
    const auto p = antiderivative();
    return p(b) - p(a);
  }

  /// p(x + s) as a polynomial in x (Taylor shift).
  Polynomial shifted(double s) const {
    if (c_.empty()) return {};
    std::vector<double> out(c_.size(), 0.0);
    // Horner in polynomial arithmetic: out = (...(c_n)(x+s) + c_{n-1})...
    for (auto it = c_.rbegin(); it != c_.rend(); ++it) {
      for (std::size_t i = out.size() - 1; i > 0; --i) out[i] = out[i - 1] + s * out[i];
      out[0] = s * out[0] + *it;
    }
    return Polynomial(std::move(out));
  }

  /// p(a x)
  Polynomial scaled_argument(double a) const {
    std::vector<double> out(c_);
    double f = 1.0;
    for (auto& v : out) {
      v *= f;
      f *= a;
    }
    return Polynomial(std::move(out));
  }

  friend Polynomial operator*(const Polynomial& a, const Polynomial& b) {
    if (a.c_.empty() || b.c_.empty()) return {};
    std::vector<double> c(a.c_.size() + b.c_.size() - 1, 0.0);
    for (std::size_t i = 0; i < a.c_.size(); ++i)
      for (std::size_t j = 0; j < b.c_.size(); ++j) c[i + j] += a.c_[i] * b.c_[j];
    return Polynomial(std::move(c));
  }
  friend Polynomial operator+(const Polynomial& a, const Polynomial& b) {
    std::vector<double> c(std::max(a.c_.size(), b.c_.size()), 0.0);
    for (std::size_t i = 0; i < a.c_.size(); ++i) c[i] += a.c_[i];
    for (std::size_t i = 0; i < b.c_.size(); ++i) c[i] += b.c_[i];
    return Polynomial(std::move(c));
  }
  friend Polynomial operator*(double s, const Polynomial& a) {
    std::vector<double> c(a.c_);
    for (auto& v : c) v *= s;
    return Polynomial(std::move(c));
  }

 private:
  void trim() {
    while (!c_.empty() && c_.back() == 0.0) c_.pop_back();
  }
  std::vector<double> c_;
};

/// Gauss-Legendre nodes and weights on [-1,1].
struct GaussLegendre {
  std::vector<double> nodes;
  std::vector<double> weights;

  explicit GaussLegendre(int n) : nodes(n), weights(n) {
    if (n < 1) throw ConfigError("Gauss-Legendre order must be >= 1");
    for (int i = 0; i < n; ++i) {
      double x = std::cos(std::numbers::pi * (i + 0.75) / (n + 0.5));
      double dp = 0.0;
      for (int it = 0; it < 100; ++it) {
        double p0 = 1.0, p1 = x;
        for (int k = 2; k <= n; ++k) {
          const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
          p0 = p1;
          p1 = p2;
        }
        dp = n * (x * p1 - p0) / (x * x - 1.0);
        const double dx = p1 / dp;
        x -= dx;
        if (std::abs(dx) < 1e-16) break;
      }
      double p0 = 1.0, p1 = x;
      for (int k = 2; k <= n; ++k) {
        const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
      }
      dp = n * (x * p1 - p0) / (x * x - 1.0);
      nodes[i] = x;
      weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
    }
  }

  template <class F>
  auto integrate(F&& f, double a, double b) const {
    const double h = 0.5 * (b - a), c = 0.5 * (a + b);
    decltype(f(a)) s{};
    for (std::size_t i = 0; i < nodes.size(); ++i) s += weights[i] * f(c + h * nodes[i]);
    return s * h;
  }
};

inline const GaussLegendre& gauss_legendre(int n) {
  static const GaussLegendre g2(2), g8(8), g20(20);
  if (n == 2) return g2;
  if (n == 8) return g8;
  if (n == 20) return g20;
  throw ConfigError("cached Gauss-Legendre rules exist for n in {2, 8, 20}");
}

/// Compactly supported piecewise polynomial; piece i lives on [b_i, b_{i+1}) and is
/// stored in the local variable s = x - b_i. Zero outside [b_0, b_n].
class PiecewisePolynomial {
 public:
  PiecewisePolynomial() = default;
  PiecewisePolynomial(std::vector<double> breaks, std::vector<Polynomial> local_pieces)
      : breaks_(std::move(breaks)), pieces_(std::move(local_pieces)) {
    if (breaks_.size() != pieces_.size() + 1) throw ConfigError("piecewise polynomial: break/piece count mismatch");
    for (std::size_t i = 1; i < breaks_.size(); ++i)
      if (!(breaks_[i] > breaks_[i - 1])) throw ConfigError("piecewise polynomial: breaks must increase");
  }

  /// Continuous piecewise-linear interpolant of (x_i, y_i), zero outside [x_0, x_n].
  static PiecewisePolynomial linear(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw ConfigError("piecewise linear: need >= 2 matching nodes");
    std::vector<Polynomial> p;
    for (std::size_t i = 0; i + 1 < x.size(); ++i) p.emplace_back(std::vector<double>{y[i], (y[i + 1] - y[i]) / (x[i + 1] - x[i])});
    return PiecewisePolynomial(x, std::move(p));
  }

  const std::vector<double>& breaks() const { return breaks_; }
  const std::vector<Polynomial>& pieces() const { return pieces_; }
  bool empty() const { return pieces_.empty(); }
  double support_lo() const { return breaks_.empty() ? 0.0 : breaks_.front(); }
  double support_hi() const { return breaks_.empty() ? 0.0 : breaks_.back(); }
  int degree() const {
    int d = -1;
    for (const auto& p : pieces_) d = std::max(d, p.degree());
    return d;
  }

  double operator()(double x) const {
    if (pieces_.empty() || x < breaks_.front() || x >= breaks_.back()) {
      // right endpoint: continuous extension from the last piece
      if (!pieces_.empty() && x == breaks_.back()) {
        const std::size_t i = pieces_.size() - 1;
        return pieces_[i](x - breaks_[i]);
      }
      return 0.0;
    }
    const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
    const std::size_t i = static_cast<std::size_t>(it - breaks_.begin()) - 1;
    return pieces_[i](x - breaks_[i]);
  }

  /// g(x) = f(a x - shift) for a > 0.
  PiecewisePolynomial dilated(double a, double shift) const {
    if (!(a > 0.0)) throw ConfigError("dilation factor must be positive");
    std::vector<double> b(breaks_.size());
    for (std::size_t i = 0; i < b.size(); ++i) b[i] = (breaks_[i] + shift) / a;
    std::vector<Polynomial> p;
    p.reserve(pieces_.size());
    for (const auto& q : pieces_) p.push_back(q.scaled_argument(a));
    return PiecewisePolynomial(std::move(b), std::move(p));
  }

  PiecewisePolynomial scaled(double s) const {
    std::vector<Polynomial> p;
    for (const auto& q : pieces_) p.push_back(s * q);
    return PiecewisePolynomial(breaks_, std::move(p));
  }

  double integral() const {
    double s = 0.0;
    for (std::size_t i = 0; i < pieces_.size(); ++i) s += pieces_[i].integral(0.0, breaks_[i + 1] - breaks_[i]);
    return s;
  }

  /// Exact integral of x^n f(x), computed piecewise in shifted coordinates.
  double moment(int n) const {
    double s = 0.0;
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      std::vector<double> mono(n + 1, 0.0);
      mono[n] = 1.0;
      const Polynomial xn = Polynomial(mono).shifted(breaks_[i]);
      s += (xn * pieces_[i]).integral(0.0, breaks_[i + 1] - breaks_[i]);
    }
    return s;
  }

  /// Local polynomial of the piece containing [u, v], expressed in s = x - u.
  /// Returns an empty polynomial outside the support.
  Polynomial local_on(double u, double v) const {
    if (pieces_.empty() || v <= breaks_.front() || u >= breaks_.back()) return {};
    const double mid = 0.5 * (u + v);
    const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), mid);
    const std::size_t i = static_cast<std::size_t>(it - breaks_.begin()) - 1;
    return pieces_[i].shifted(u - breaks_[i]);
  }

  /// Pointwise sum; breakpoints are merged.
  friend PiecewisePolynomial operator+(const PiecewisePolynomial& f, const PiecewisePolynomial& g) {
    if (f.empty()) return g;
    if (g.empty()) return f;
    std::vector<double> pts(f.breaks_);
    pts.insert(pts.end(), g.breaks_.begin(), g.breaks_.end());
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    std::vector<Polynomial> pieces;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i)
      pieces.push_back(f.local_on(pts[i], pts[i + 1]) + g.local_on(pts[i], pts[i + 1]));
    return PiecewisePolynomial(std::move(pts), std::move(pieces));
  }

  /// Exact integral of f g over R.
  friend double integrate_product(const PiecewisePolynomial& f, const PiecewisePolynomial& g) {
    if (f.empty() || g.empty()) return 0.0;
    const double lo = std::max(f.support_lo(), g.support_lo());
    const double hi = std::min(f.support_hi(), g.support_hi());
    if (!(hi > lo)) return 0.0;
    std::vector<double> pts;
    for (double b : f.breaks_)
      if (b > lo && b < hi) pts.push_back(b);
    for (double b : g.breaks_)
      if (b > lo && b < hi) pts.push_back(b);
    pts.push_back(lo);
    pts.push_back(hi);
    std::sort(pts.begin(), pts.end());
    pts.erase(std::unique(pts.begin(), pts.end()), pts.end());
    double s = 0.0;
    for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
      const double u = pts[i], v = pts[i + 1];
      s += (f.local_on(u, v) * g.local_on(u, v)).integral(0.0, v - u);
    }
    return s;
  }

  /// Exact integral of f(x) e^{i w x} over R.
  std::complex<double> fourier_integral(double w) const {
    std::complex<double> s{};
    const auto& gl = gauss_legendre(20);
    for (std::size_t i = 0; i < pieces_.size(); ++i) {
      const double a = breaks_[i], len = breaks_[i + 1] - breaks_[i];
      const Polynomial& p = pieces_[i];
      std::complex<double> local{};
      if (std::abs(w) * len < 2.0) {
        // integrand is entire and slowly varying; 20-point Gauss is exact to round-off
        local = gl.integrate([&](double t) { return p(t) * std::polar(1.0, w * t); }, 0.0, len);
      } else {
        // repeated integration by parts: int p e^{iwt} = e^{iwt} sum_n (-1)^n p^{(n)}(t) / (iw)^{n+1}
        const std::complex<double> iw(0.0, w);
        auto bracket = [&](double t) {
          std::complex<double> acc{};
          Polynomial q = p;
          std::complex<double> denom = iw;
          double sign = 1.0;
          while (q.degree() >= 0) {
            acc += sign * q(t) / denom;
            q = q.derivative();
            denom *= iw;
            sign = -sign;
          }
          return acc * std::polar(1.0, w * t);
        };
        local = bracket(len) - bracket(0.0);
      }
      s += local * std::polar(1.0, w * a);
    }
    return s;
  }

  /// Exact integral of f(x) cos(w x).
  double cosine_integral(double w) const { return fourier_integral(w).real(); }

 private:
  std::vector<double> breaks_;
  std::vector<Polynomial> pieces_;
};

/// Cardinal B-spline of order `order` (degree order-1) supported on [0, order].
inline PiecewisePolynomial cardinal_bspline(int order) {
  if (order < 1 || order > 12) throw ConfigError("cardinal_bspline: order must be in [1,12]");
  // N_m(x) = 1/(m-1)! sum_i (-1)^i C(m,i) (x - i)_+^{m-1}
  const int deg = order - 1;
  double fact = 1.0;
  for (int i = 2; i <= deg; ++i) fact *= i;
  std::vector<double> breaks(order + 1);
  for (int i = 0; i <= order; ++i) breaks[i] = i;
  std::vector<Polynomial> pieces;
  for (int j = 0; j < order; ++j) {
    Polynomial acc;
    double binom = 1.0;
    for (int i = 0; i <= j; ++i) {
      // (s + j - i)^deg in the local variable s
      std::vector<double> mono(deg + 1, 0.0);
      mono[deg] = 1.0;
      const Polynomial term = Polynomial(mono).shifted(static_cast<double>(j - i));
      acc = acc + ((i % 2 ? -1.0 : 1.0) * binom / fact) * term;
      binom = binom * (order - i) / (i + 1);
    }
    pieces.push_back(acc);
  }
  return PiecewisePolynomial(std::move(breaks), std::move(pieces));
}

}  // namespace hpcb
