#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <iomanip>
#include <limits>
#include <memory>
#include <numbers>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "hpcb/coefficients.hpp"
#include "hpcb/error.hpp"
#include "hpcb/index_sets.hpp"
#include "hpcb/multi_index.hpp"
#include "hpcb/piecewise.hpp"

namespace hpcb {

/// Declared regularity: the function sits in S^r_{p,inf}B of the relevant scale.
/// Metadata only, used to choose target slopes.
struct SmoothnessTag {
  double r = std::numeric_limits<double>::infinity();
  double p = 2.0;
  std::string regime;
};

namespace detail {

/// Composite 20-point Gauss-Legendre on [0,1], panels split at `breaks`.
template <class F>
double integrate_unit(F&& f, const std::vector<double>& breaks, int panels) {
  std::vector<double> cuts;
  cuts.reserve(panels + breaks.size() + 1);
  for (int i = 0; i <= panels; ++i) cuts.push_back(static_cast<double>(i) / panels);
  for (double b : breaks)
    if (b > 0.0 && b < 1.0) cuts.push_back(b);
  std::sort(cuts.begin(), cuts.end());
  cuts.erase(std::unique(cuts.begin(), cuts.end()), cuts.end());
  const auto& gl = gauss_legendre(20);
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) s += gl.integrate(f, cuts[i], cuts[i + 1]);
  return s;
}

inline int oscillation_panels(int k) { return std::max(64, 4 * k); }

}  // namespace detail

/// One axis of a tensor-product test function, restricted to [0,1].
class UnivariateFactor {
 public:
  /// Exact integrals and coefficients from the piecewise representation.
  static UnivariateFactor piecewise(std::string name, PiecewisePolynomial p) {
    UnivariateFactor u;
    u.name_ = std::move(name);
    u.breaks_ = p.breaks();
    auto shared = std::make_shared<const PiecewisePolynomial>(std::move(p));
    u.eval_ = [shared](double x) { return (*shared)(x); };
    u.poly_ = shared;
    u.exact_ = true;
    return u;
  }

  /// Closed-form evaluator with known integral. `hpc` may be empty, in which case
  /// coefficients come from quadrature split at `breaks`.
  static UnivariateFactor analytic(std::string name, std::function<double(double)> f, double integral,
                                   std::function<double(int)> hpc = {}, std::vector<double> breaks = {}) {
    UnivariateFactor u;
    u.name_ = std::move(name);
    u.eval_ = std::move(f);
    u.integral_ = integral;
    u.hpc_ = std::move(hpc);
    u.breaks_ = std::move(breaks);
    u.exact_ = static_cast<bool>(u.hpc_);
    return u;
  }

  const std::string& name() const { return name_; }
  const std::vector<double>& breaks() const { return breaks_; }
  bool exact_coefficients() const { return exact_; }
  /// The piecewise form, when the factor was built from one.
  const PiecewisePolynomial* piecewise_form() const { return poly_.get(); }
  double operator()(double x) const { return eval_(x); }

  double integral() const {
    if (poly_) return restricted().integral();
    return integral_;
  }

  /// <f, c_k> on [0,1].
  double hpc_coefficient(int k) const {
    if (k < 0) throw ConfigError("hpc coefficient index must be nonnegative");
    if (poly_) {
      const double v = restricted().cosine_integral(std::numbers::pi * k);
      return k == 0 ? v : std::numbers::sqrt2 * v;
    }
    if (hpc_) return hpc_(k);
    return numeric_hpc(k);
  }

  /// Quadrature value of <f, c_k>, ignoring any closed form.
  double numeric_hpc(int k) const {
    const double w = std::numbers::pi * k;
    const double v = detail::integrate_unit([&](double x) { return eval_(x) * std::cos(w * x); }, breaks_,
                                            detail::oscillation_panels(k));
    return k == 0 ? v : std::numbers::sqrt2 * v;
  }

  /// sqrt(2) int_0^1 f(x) sin(2 pi k x) dx, the classical periodic sine coefficient.
  double sine_coefficient(int k) const {
    const double w = 2.0 * std::numbers::pi * k;
    if (poly_) return std::numbers::sqrt2 * restricted().fourier_integral(w).imag();
    return std::numbers::sqrt2 * detail::integrate_unit([&](double x) { return eval_(x) * std::sin(w * x); }, breaks_,
                                                        detail::oscillation_panels(2 * k));
  }

  /// int_0^1 f^2.
  double l2_norm_squared() const {
    if (poly_) {
      const auto r = restricted();
      return integrate_product(r, r);
    }
    return detail::integrate_unit([&](double x) { return eval_(x) * eval_(x); }, breaks_, 256);
  }

  /// Composite Gauss-Legendre with 2^level panels; kinks are declared as breaks.
  double quadrature_integral(int level) const {
    return detail::integrate_unit(eval_, breaks_, 1 << level);
  }

 private:
  UnivariateFactor() = default;

  // the piece on [0,1]; pieces outside contribute nothing on the cube
  PiecewisePolynomial restricted() const {
    std::vector<double> b;
    std::vector<Polynomial> p;
    const auto& br = poly_->breaks();
    const auto& pc = poly_->pieces();
    for (std::size_t i = 0; i < pc.size(); ++i) {
      const double lo = std::max(0.0, br[i]), hi = std::min(1.0, br[i + 1]);
      if (!(hi > lo)) continue;
      if (b.empty() || b.back() != lo) {
        if (!b.empty()) {
          // gap between pieces: insert a zero piece
          p.emplace_back();
        }
        b.push_back(lo);
      }
      p.push_back(pc[i].shifted(lo - br[i]));
      b.push_back(hi);
    }
    if (b.empty()) return {};
    return PiecewisePolynomial(std::move(b), std::move(p));
  }

  std::string name_;
  std::function<double(double)> eval_;
  std::shared_ptr<const PiecewisePolynomial> poly_;
  std::function<double(int)> hpc_;
  std::vector<double> breaks_;
  double integral_ = 0.0;
  bool exact_ = false;
};

/// A test function on [0,1]^d with known integral and declared smoothness.
class TestFunction {
 public:
  using Evaluator = std::function<double(std::span<const double>)>;

  /// Tensor product of univariate factors.
  TestFunction(std::string name, std::string description, SmoothnessTag tag, std::vector<UnivariateFactor> factors)
      : name_(std::move(name)), description_(std::move(description)), tag_(std::move(tag)),
        dim_(static_cast<int>(factors.size())), factors_(std::move(factors)) {
    if (dim_ < 1) throw ConfigError("test function needs at least one factor");
    double integral = 1.0;
    for (const auto& f : factors_) integral *= f.integral();
    exact_integral_ = integral;
  }

  /// Non-tensor function given by an evaluator.
  TestFunction(std::string name, std::string description, SmoothnessTag tag, int dim, Evaluator f,
               std::optional<double> exact_integral)
      : name_(std::move(name)), description_(std::move(description)), tag_(std::move(tag)), dim_(dim),
        eval_(std::move(f)), exact_integral_(exact_integral) {
    if (dim_ < 1) throw ConfigError("test function dimension must be >= 1");
  }

  const std::string& name() const { return name_; }
  const std::string& description() const { return description_; }
  const SmoothnessTag& tag() const { return tag_; }
  int dim() const { return dim_; }
  bool is_tensor() const { return !factors_.empty(); }
  const std::vector<UnivariateFactor>& factors() const { return factors_; }
  std::optional<double> exact_integral() const { return exact_integral_; }

  double operator()(std::span<const double> x) const {
    if (eval_) return eval_(x);
    double v = 1.0;
    for (int i = 0; i < dim_; ++i) v *= factors_[i](x[i]);
    return v;
  }

  Evaluator evaluator() const {
    return [self = *this](std::span<const double> x) { return self(x); };
  }

  bool has_closed_form_coefficients() const {
    return is_tensor() && std::all_of(factors_.begin(), factors_.end(),
                                      [](const UnivariateFactor& f) { return f.exact_coefficients(); });
  }

  /// <f, c_k> as a product of univariate coefficients.
  double hpc_coefficient(const MultiIndex& k) const {
    require_tensor("hpc_coefficient");
    require_same_dim(k, dim_);
    double v = 1.0;
    for (int i = 0; i < dim_; ++i) v *= factors_[i].hpc_coefficient(k[i]);
    return v;
  }

  CoefficientMap hpc_coefficients(const IndexSet& K) const {
    require_tensor("hpc_coefficients");
    CoefficientMap out(Basis::HalfPeriodCosine, dim_);
    const int kmax = K.max_abs();
    std::vector<std::vector<double>> tables(dim_, std::vector<double>(kmax + 1));
    for (int i = 0; i < dim_; ++i)
      for (int k = 0; k <= kmax; ++k) tables[i][k] = factors_[i].hpc_coefficient(k);
    for (const auto& k : K) {
      double v = 1.0;
      for (int i = 0; i < dim_; ++i) v *= tables[i][k[i]];
      out.set(k, v);
    }
    return out;
  }

  double l2_norm_squared() const {
    require_tensor("l2_norm_squared");
    double v = 1.0;
    for (const auto& f : factors_) v *= f.l2_norm_squared();
    return v;
  }

  /// |exact - quadrature| at the given level; tensor functions integrate axis by axis.
  double self_check_error(int level = 12) const {
    if (!exact_integral_) return 0.0;
    require_tensor("self_check_error");
    double q = 1.0;
    for (const auto& f : factors_) q *= f.quadrature_integral(level);
    return std::abs(q - *exact_integral_);
  }

 private:
  void require_tensor(const char* what) const {
    if (!is_tensor()) throw PreconditionError(std::string(what) + " needs a tensor-product test function");
  }

  std::string name_;
  std::string description_;
  SmoothnessTag tag_;
  int dim_ = 1;
  std::vector<UnivariateFactor> factors_;
  Evaluator eval_;
  std::optional<double> exact_integral_;
};

/// Kink location: 1/pi mod 1, irrational so it never meets a dyadic or lattice node.
inline constexpr double kKinkPoint = std::numbers::inv_pi;

namespace factors {

inline UnivariateFactor constant(double c) {
  return UnivariateFactor::piecewise("const", PiecewisePolynomial({0.0, 1.0}, {Polynomial({c})}));
}

inline UnivariateFactor identity() {
  return UnivariateFactor::piecewise("x", PiecewisePolynomial({0.0, 1.0}, {Polynomial({0.0, 1.0})}));
}

/// (x - a)_+ with the closed-form coefficients from two integrations by parts.
inline UnivariateFactor kink(double a = kKinkPoint) {
  const double pi = std::numbers::pi;
  auto hpc = [a, pi](int k) {
    if (k == 0) return 0.5 * (1 - a) * (1 - a);
    const double w = pi * k;
    return std::numbers::sqrt2 * ((k % 2 ? -1.0 : 1.0) - std::cos(w * a)) / (w * w);
  };
  return UnivariateFactor::analytic(
      "kink", [a](double x) { return std::max(0.0, x - a); }, 0.5 * (1 - a) * (1 - a), hpc, {a});
}

/// sqrt(2) cos(pi k x), or 1 for k = 0.
inline UnivariateFactor cosine(int k) {
  if (k < 0) throw ConfigError("cosine mode must be nonnegative");
  auto f = [k](double x) { return k == 0 ? 1.0 : std::numbers::sqrt2 * std::cos(std::numbers::pi * k * x); };
  return UnivariateFactor::analytic("cos" + std::to_string(k), f, k == 0 ? 1.0 : 0.0,
                                    [k](int j) { return j == k ? 1.0 : 0.0; });
}

/// N_order squeezed onto [0.1, 0.9].
inline UnivariateFactor bspline(int order) {
  const double a = order / 0.8;
  return UnivariateFactor::piecewise("N" + std::to_string(order), cardinal_bspline(order).dilated(a, 0.1 * a));
}

/// 1 + sin(2 pi x) / 2.
inline UnivariateFactor periodic() {
  const double pi = std::numbers::pi;
  auto hpc = [pi](int k) {
    if (k == 0) return 1.0;
    if (k % 2 == 0) return 0.0;
    return 2.0 * std::numbers::sqrt2 / (pi * (4.0 - double(k) * k));
  };
  return UnivariateFactor::analytic(
      "periodic", [pi](double x) { return 1.0 + 0.5 * std::sin(2 * pi * x); }, 1.0, hpc);
}

/// 1 + B_2(x) with B_2 the second Bernoulli polynomial; its periodic extension has
/// a kink at the integers.
inline UnivariateFactor bernoulli() {
  return UnivariateFactor::piecewise("bernoulli",
                                     PiecewisePolynomial({0.0, 1.0}, {Polynomial({1.0 + 1.0 / 6.0, -1.0, 1.0})}));
}

inline UnivariateFactor exponential() {
  auto hpc = [](int k) {
    if (k == 0) return std::numbers::e - 1.0;
    const double w = std::numbers::pi * k;
    return std::numbers::sqrt2 * (std::numbers::e * (k % 2 ? -1.0 : 1.0) - 1.0) / (1.0 + w * w);
  };
  return UnivariateFactor::analytic("exp", [](double x) { return std::exp(x); }, std::numbers::e - 1.0, hpc);
}

/// Smooth step (1 + tanh(4(x - 1/2))) / 2. f(0) != f(1); f(x) + f(1 - x) = 1 gives the integral.
inline UnivariateFactor smooth_step() {
  return UnivariateFactor::analytic(
      "step", [](double x) { return 0.5 * (1.0 + std::tanh(4.0 * (x - 0.5))); }, 0.5);
}

}  // namespace factors

inline TestFunction tensor_power(std::string name, std::string description, SmoothnessTag tag,
                                 const UnivariateFactor& f, int dim) {
  return TestFunction(std::move(name), std::move(description), std::move(tag),
                      std::vector<UnivariateFactor>(dim, f));
}

/// prod_i c_{k_i}(x_i).
inline TestFunction cosine_mode(const MultiIndex& k) {
  std::vector<UnivariateFactor> fs;
  std::string name = "cosine";
  for (int e : k) {
    fs.push_back(factors::cosine(e));
    name += "_" + std::to_string(e);
  }
  return TestFunction(name, "single half-period cosine mode", {std::numeric_limits<double>::infinity(), 2.0, "band-limited"}, std::move(fs));
}

namespace detail {

inline std::vector<TestFunction> build_corpus() {
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<TestFunction> out;
  for (int d = 1; d <= 3; ++d) {
    const std::string sfx = std::to_string(d) + "d";
    std::vector<UnivariateFactor> cst(d, factors::constant(1.0));
    cst[0] = factors::constant(1.5);
    out.emplace_back("constant" + sfx, "constant 1.5", SmoothnessTag{inf, 2.0, "constant"}, cst);
    out.push_back(tensor_power("monomial" + sfx, "prod x_i", {inf, 2.0, "polynomial, non-periodic"},
                               factors::identity(), d));
    std::vector<int> modes;
    for (int i = 0; i < d; ++i) modes.push_back(i + 1);
    auto cm = cosine_mode(MultiIndex(modes));
    out.emplace_back("cosine" + sfx, "prod c_i(x_i), mode (1,..,d)", cm.tag(), cm.factors());
    out.push_back(tensor_power("kink" + sfx, "prod (x_i - 1/pi)_+", {1.5, 2.0, "kink, r < 1 + 1/p"},
                               factors::kink(), d));
    out.push_back(tensor_power("bspline2_" + sfx, "prod N_2 on [0.1, 0.9]", {1.5, 2.0, "piecewise linear"},
                               factors::bspline(2), d));
    out.push_back(tensor_power("bspline4_" + sfx, "prod N_4 on [0.1, 0.9]", {3.5, 2.0, "cubic spline, C^2"},
                               factors::bspline(4), d));
    out.push_back(tensor_power("periodic" + sfx, "prod (1 + sin(2 pi x_i)/2)", {inf, 2.0, "smooth periodic"},
                               factors::periodic(), d));
    out.push_back(tensor_power("bernoulli" + sfx, "prod (1 + B_2(x_i))",
                               {2.0, 1.0, "periodic, kink on the torus"}, factors::bernoulli(), d));
    out.push_back(tensor_power("exp" + sfx, "prod exp(x_i)", {inf, 2.0, "smooth, non-periodic"},
                               factors::exponential(), d));
  }
  out.push_back(tensor_power("step1d", "(1 + tanh(4(x - 1/2)))/2, f(0) != f(1)", {inf, 2.0, "smooth, non-periodic"},
                             factors::smooth_step(), 1));
  for (const auto& f : out)
    if (f.self_check_error() > 1e-10) throw PreconditionError("corpus self-check failed for " + f.name());
  return out;
}

}  // namespace detail

/// Immutable registry, built once.
inline const std::vector<TestFunction>& corpus() {
  static const std::vector<TestFunction> registry = detail::build_corpus();
  return registry;
}

/// Lookup by exact name, or by family name plus dimension (`kink`, 2 -> `kink2d`,
/// `bspline2`, 2 -> `bspline2_2d`).
inline const TestFunction& find_test_function(const std::string& name, int dim = 0) {
  std::vector<std::string> candidates = {name};
  if (dim > 0) {
    candidates.push_back(name + std::to_string(dim) + "d");
    candidates.push_back(name + "_" + std::to_string(dim) + "d");
  }
  for (const auto& c : candidates)
    for (const auto& f : corpus())
      if (f.name() == c && (dim == 0 || f.dim() == dim)) return f;
  throw ConfigError("unknown test function '" + name + "'");
}

struct GibbsRow {
  int k;
  double fourier_weighted;  // |sine coefficient| k
  double hpc_weighted;      // |hpc coefficient| k^2
};

struct GibbsTable {
  std::string function;
  double boundary_jump = 0.0;  // f(1) - f(0)
  std::vector<GibbsRow> rows;

  double fourier_min() const { return column_extreme(&GibbsRow::fourier_weighted, false); }
  double fourier_max() const { return column_extreme(&GibbsRow::fourier_weighted, true); }
  double hpc_max() const { return column_extreme(&GibbsRow::hpc_weighted, true); }

  void write_csv(std::ostream& os) const {
    os << "k,fourier_sine_times_k,hpc_times_k2\n" << std::setprecision(17);
    for (const auto& r : rows) os << r.k << ',' << r.fourier_weighted << ',' << r.hpc_weighted << '\n';
  }

 private:
  double column_extreme(double GibbsRow::*col, bool want_max) const {
    if (rows.empty()) return 0.0;
    double v = rows.front().*col;
    for (const auto& r : rows) v = want_max ? std::max(v, r.*col) : std::min(v, r.*col);
    return v;
  }
};

/// Sine coefficients against hpc coefficients for k = 1..k_max: a boundary jump
/// forces k^{-1} decay of the former, while the latter keep k^{-2}.
inline GibbsTable gibbs_demo(const TestFunction& f, int k_max) {
  if (f.dim() != 1 || !f.is_tensor()) throw ConfigError("gibbs_demo needs a univariate test function");
  if (k_max < 1) throw ConfigError("gibbs_demo: k_max must be >= 1");
  const auto& u = f.factors().front();
  GibbsTable t;
  t.function = f.name();
  t.boundary_jump = u(1.0) - u(0.0);
  for (int k = 1; k <= k_max; ++k)
    t.rows.push_back({k, std::abs(u.sine_coefficient(k)) * k, std::abs(u.hpc_coefficient(k)) * double(k) * k});
  return t;
}

}  // namespace hpcb
