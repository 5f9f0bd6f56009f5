#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <istream>
#include <limits>
#include <numbers>
#include <optional>
#include <ostream>
#include <random>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "hpcb/coefficients.hpp"
#include "hpcb/error.hpp"
#include "hpcb/grid.hpp"
#include "hpcb/hpc_transform.hpp"
#include "hpcb/index_sets.hpp"
#include "hpcb/parallel.hpp"
#include "hpcb/qmc_cubature.hpp"
#include "hpcb/test_corpus.hpp"

namespace hpcb {

/// Linear approximation onto span{basis functions indexed by index_set}.
struct ApproxOperator {
  enum class Source { Quadrature, LeastSquares };

  Basis basis = Basis::HalfPeriodCosine;
  IndexSet index_set;
  Source source = Source::Quadrature;

  /// Expansion coefficients from grid samples by the grid quadrature.
  CoefficientMap coefficients(const GridFunction& samples) const {
    if (source != Source::Quadrature) throw ConfigError("grid coefficients need a quadrature operator");
    if (basis == Basis::HalfPeriodCosine) return hpc_analyze(samples, index_set);
    if (basis == Basis::TorusExponential) return fourier_analyze(samples, index_set);
    throw ConfigError("approximation operator: unsupported basis");
  }
};

/// Cross-level hpc operator: unsigned hyperbolic cross Gamma_N.
inline ApproxOperator hpc_operator(long N, int dim) {
  return {Basis::HalfPeriodCosine, hyperbolic_cross(N, dim, false), ApproxOperator::Source::Quadrature};
}

/// Torus operator on the signed cross; on even functions it acts on the evenized span.
inline ApproxOperator torus_operator(long N, int dim) {
  return {Basis::TorusExponential, hyperbolic_cross(N, dim, true), ApproxOperator::Source::Quadrature};
}

struct Projection {
  GridFunction approximant;
  CoefficientMap coefficients;
};

/// Closed-grid level used when the caller gives none: the aliasing guard for Gamma_N.
inline int projection_level(long N) { return resolving_level(static_cast<int>(std::max(1L, N - 1))); }

/// Truncated hpc expansion of sampled data over Gamma_N.
inline Projection hpc_project(const GridFunction& samples, long N) {
  if (samples.domain() != Domain::UnitCube) throw ConfigError("hpc_project expects unit-cube samples");
  const auto op = hpc_operator(N, samples.dim());
  auto c = op.coefficients(samples);
  auto a = hpc_synthesize(c, samples.level());
  return {std::move(a), std::move(c)};
}

inline Projection hpc_project(const PointFunction& f, int dim, long N, int level = -1) {
  if (level < 0) level = projection_level(N);
  return hpc_project(GridFunction::sample(Domain::UnitCube, dim, level, f), N);
}

struct ErrorTransfer {
  double lhs;  // ||f - A_hpc f||_p on [0,1]^d
  double rhs;  // ||f o tent - A f o tent||_p on the torus
};

/// Both approximation errors on matched grids: closed grid of level m on the cube,
/// periodic grid with 2^{m+1} nodes per axis on the torus.
inline ErrorTransfer error_transfer_check(const GridFunction& samples, long N, double p) {
  const int dim = samples.dim();
  const int level = samples.level();
  const auto cube = hpc_project(samples, N);
  const double lhs = (samples - cube.approximant).lp_norm(p);
  const auto on_torus = tent_compose(samples);
  const auto coeffs = torus_operator(N, dim).coefficients(on_torus);
  const auto approx = fourier_synthesize(coeffs, Domain::UnitTorus, level);
  const double rhs = (to_complex(on_torus) - approx).lp_norm(p);
  return {lhs, rhs};
}

inline ErrorTransfer error_transfer_check(const PointFunction& f, int dim, long N, double p, int level = -1) {
  if (level < 0) level = projection_level(N);
  return error_transfer_check(GridFunction::sample(Domain::UnitCube, dim, level, f), N, p);
}

struct Sample {
  std::vector<double> point;
  double value;
};

/// iid uniform points on [0,1]^d with their function values.
inline std::vector<Sample> uniform_samples(const PointFunction& f, int dim, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Sample> out(count);
  for (auto& s : out) {
    s.point.resize(dim);
    for (auto& x : s.point) x = u(rng);
  }
  parallel_for(count, [&](std::size_t i) { out[i].value = f(out[i].point); });
  return out;
}

/// CSV rows `x_1,...,x_d,value`.
inline void write_samples_csv(std::ostream& os, const std::vector<Sample>& samples) {
  if (samples.empty()) return;
  const std::size_t d = samples.front().point.size();
  for (std::size_t i = 0; i < d; ++i) os << "x_" << (i + 1) << ',';
  os << "value\n" << std::setprecision(17);
  for (const auto& s : samples) {
    for (double x : s.point) os << x << ',';
    os << s.value << '\n';
  }
}

inline std::vector<Sample> read_samples_csv(std::istream& is) {
  std::vector<Sample> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty() || line[0] == '#' || line[0] == 'x') continue;
    std::vector<double> cells;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(std::stod(cell));
    if (cells.size() < 2) throw ConfigError("sample csv: need at least one coordinate and a value");
    const double v = cells.back();
    cells.pop_back();
    if (!out.empty() && cells.size() != out.front().point.size()) throw ConfigError("sample csv: ragged rows");
    out.push_back({std::move(cells), v});
  }
  return out;
}

/// Row i holds sqrt(w_i) c_k(x_i) over the members of K.
inline Eigen::MatrixXd design_matrix(const std::vector<Sample>& samples, const IndexSet& K,
                                     const std::vector<double>* weights = nullptr) {
  const int d = K.dim();
  const int kmax = K.max_abs();
  Eigen::MatrixXd A(static_cast<Eigen::Index>(samples.size()), static_cast<Eigen::Index>(K.size()));
  parallel_for(samples.size(), [&](std::size_t i) {
    const auto& x = samples[i].point;
    if (static_cast<int>(x.size()) != d) throw ConfigError("sample dimension does not match the basis");
    std::vector<double> table(static_cast<std::size_t>(d) * (kmax + 1));
    for (int a = 0; a < d; ++a)
      for (int k = 0; k <= kmax; ++k) table[a * (kmax + 1) + k] = hpc_basis(k, x[a]);
    const double sw = weights ? std::sqrt((*weights)[i]) : 1.0;
    Eigen::Index col = 0;
    for (const auto& k : K) {
      double v = sw;
      for (int a = 0; a < d; ++a) v *= table[a * (kmax + 1) + k[a]];
      A(static_cast<Eigen::Index>(i), col++) = v;
    }
  });
  return A;
}

struct LeastSquaresResult {
  CoefficientMap coefficients;
  double condition = 0.0;      // sigma_max / sigma_min of the weighted design matrix
  double residual_norm = 0.0;  // || W^{1/2} (y - A c) ||_2
  std::size_t samples = 0;

  void write_report_csv(std::ostream& os) const {
    os << "samples,basis_size,condition,residual_norm\n" << std::setprecision(17);
    os << samples << ',' << coefficients.size() << ',' << condition << ',' << residual_norm << '\n';
  }
};

inline constexpr double kConditionLimit = 1e8;
inline constexpr double kMinOversampling = 2.0;

/// Weighted least squares in span{c_k : k in K}. Rank deficiency is reported, never
/// regularized away.
inline LeastSquaresResult ls_recover(const std::vector<Sample>& samples, const IndexSet& K,
                                     const std::optional<std::vector<double>>& weights = std::nullopt) {
  if (!K.all_nonnegative()) throw ConfigError("ls_recover: hpc indices must be nonnegative");
  if (K.empty()) throw ConfigError("ls_recover: empty basis");
  if (static_cast<double>(samples.size()) < kMinOversampling * static_cast<double>(K.size()))
    throw ConfigError("ls_recover: need at least " + std::to_string(static_cast<long>(kMinOversampling * K.size())) +
                      " samples for " + std::to_string(K.size()) + " basis functions");
  if (weights && weights->size() != samples.size()) throw ConfigError("ls_recover: one weight per sample");
  if (weights)
    for (double w : *weights)
      if (!(w > 0.0)) throw ConfigError("ls_recover: weights must be positive");
  const auto A = design_matrix(samples, K, weights ? &*weights : nullptr);
  Eigen::VectorXd y(A.rows());
  for (Eigen::Index i = 0; i < A.rows(); ++i)
    y(i) = samples[i].value * (weights ? std::sqrt((*weights)[i]) : 1.0);

  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(A);
  // singular values of R are those of A
  Eigen::MatrixXd R = qr.matrixR().topLeftCorner(A.cols(), A.cols());
  R.triangularView<Eigen::StrictlyLower>().setZero();
  const Eigen::BDCSVD<Eigen::MatrixXd> svd(R);
  const auto& sv = svd.singularValues();
  const double smin = sv(sv.size() - 1), smax = sv(0);
  LeastSquaresResult out;
  out.samples = samples.size();
  out.condition = smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity();
  if (out.condition > kConditionLimit)
    throw ConditioningError("ls_recover: design matrix condition " + std::to_string(out.condition) +
                            " exceeds " + std::to_string(kConditionLimit));
  const Eigen::VectorXd c = qr.solve(y);
  out.residual_norm = (y - A * c).norm();
  out.coefficients = CoefficientMap(Basis::HalfPeriodCosine, K.dim());
  Eigen::Index col = 0;
  for (const auto& k : K) out.coefficients.set(k, c(col++));
  return out;
}

/// Samples per basis function for logarithmic oversampling: factor (1 + log n) n.
inline std::size_t log_oversampled_count(std::size_t basis_size, double factor = 4.0) {
  const double n = static_cast<double>(basis_size);
  return static_cast<std::size_t>(std::ceil(factor * n * (1.0 + std::log(n))));
}

/// Grid level for L_2 error measurement: 10 per axis for d <= 2, 7 for d = 3.
inline int error_grid_level(int dim) { return dim <= 2 ? 10 : 7; }

/// ||f - sum c_k c_k||_2 under the closed-grid quadrature at `level`.
inline double l2_error_on_grid(const PointFunction& f, int dim, const CoefficientMap& coeffs, int level) {
  const auto g = GridFunction::sample(Domain::UnitCube, dim, level, f);
  return (g - hpc_synthesize(coeffs, level)).lp_norm(2.0);
}

namespace detail {
// Neumaier summation
struct CompensatedSum {
  double sum = 0.0, comp = 0.0;
  void add(double v) {
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};
}  // namespace detail

/// ||f - A_hpc,N f||_p for a test function. For p = 2 and closed-form coefficients
/// this is the Parseval tail; otherwise the grid quadrature at `grid_level`.
/// An explicit grid level, or a tail below the cancellation floor of Parseval,
/// selects the grid.
inline double projection_error(const TestFunction& f, long N, double p, int grid_level = -1) {
  if (p == 2.0 && f.has_closed_form_coefficients() && grid_level < 0) {
    const auto K = hyperbolic_cross(N, f.dim(), false);
    const auto c = f.hpc_coefficients(K);
    const double total = f.l2_norm_squared();
    detail::CompensatedSum s;
    s.add(total);
    for (const auto& [k, v] : c) s.add(-std::norm(v));
    if (s.value() > 1e-12 * total) return std::sqrt(s.value());
  }
  if (grid_level < 0) grid_level = std::max(error_grid_level(f.dim()), projection_level(N));
  const auto g = GridFunction::sample(Domain::UnitCube, f.dim(), grid_level, f.evaluator());
  return (g - hpc_project(g, N).approximant).lp_norm(p);
}

/// Projection errors against n = |Gamma_N| with the (log n)^{r(d-1)} factor divided out.
inline RateFit projection_error_rate(const TestFunction& f, const std::vector<long>& N_list, double p = 2.0,
                                     std::size_t skip = 2) {
  auto pts = parallel_map<RatePoint>(N_list.size(), [&](std::size_t i) {
    const double n = static_cast<double>(hyperbolic_cross(N_list[i], f.dim(), false).size());
    return RatePoint{n, projection_error(f, N_list[i], p)};
  });
  const double r = std::isfinite(f.tag().r) ? f.tag().r : 0.0;
  return fit_rate(std::move(pts), skip, r * (f.dim() - 1));
}

struct RecoveryComparison {
  long N;
  std::size_t basis_size;
  std::size_t samples;
  double ls_error;
  double projection_error;
  double condition;
};

/// Least squares from log-oversampled iid points against the projection on the same
/// cross, both measured on the error grid.
inline RecoveryComparison compare_recovery(const TestFunction& f, long N, std::uint64_t seed, double oversampling = 4.0) {
  const auto K = hyperbolic_cross(N, f.dim(), false);
  const std::size_t m = log_oversampled_count(K.size(), oversampling);
  const auto samples = uniform_samples(f.evaluator(), f.dim(), m, seed);
  const auto ls = ls_recover(samples, K);
  const int level = std::max(error_grid_level(f.dim()), resolving_level(K.max_abs()));
  const auto g = GridFunction::sample(Domain::UnitCube, f.dim(), level, f.evaluator());
  const double ls_err = (g - hpc_synthesize(ls.coefficients, level)).lp_norm(2.0);
  const double proj_err = (g - hpc_project(g, N).approximant).lp_norm(2.0);
  return {N, K.size(), m, ls_err, proj_err, ls.condition};
}

/// Least-squares L_2 errors against the sample count, one seed stream per N.
inline RateFit ls_error_rate(const TestFunction& f, const std::vector<long>& N_list, std::uint64_t seed,
                             double oversampling = 4.0, std::size_t skip = 2) {
  std::vector<RatePoint> pts;
  for (std::size_t i = 0; i < N_list.size(); ++i) {
    const auto c = compare_recovery(f, N_list[i], seed + 1000003ULL * i, oversampling);
    pts.push_back({static_cast<double>(c.samples), c.ls_error});
  }
  return fit_rate(std::move(pts), skip, 0.0);
}

}  // namespace hpcb
