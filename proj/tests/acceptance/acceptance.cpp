// End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero when any criterion fails.
#include <chrono>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>

#include "hpcb/hpcb.hpp"

using namespace hpcb;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string sci(double v, int digits = 3) {
  std::ostringstream s;
  s << std::scientific << std::setprecision(digits) << v;
  return s.str();
}

std::string fix(double v, int digits = 3) {
  std::ostringstream s;
  s << std::fixed << std::setprecision(digits) << v;
  return s.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1: exact periodization identities on 50 random polynomials per dimension
Outcome exact_identities() {
  const auto t0 = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::string worst_name;
  for (int d = 1; d <= 3; ++d)
    for (const auto& r : identity_suite(d, 20240601, 50))
      if (r.max_residual >= worst) {
        worst = r.max_residual;
        worst_name = r.name + " d=" + std::to_string(d);
      }
  const double t = seconds_since(t0);
  return {worst <= 1e-10 && t <= 60.0,
          "max relative residual " + sci(worst) + " (" + worst_name + "), limit 1e-10; " + fix(t, 1) + " s of 60"};
}

// 2: Gram matrix of the half-period cosines over Gamma_16
Outcome cosine_orthonormality() {
  double worst = 0.0;
  for (int d = 1; d <= 3; ++d) {
    const auto K = hyperbolic_cross(16, d, false);
    const int level = resolving_level(2 * K.max_abs());
    auto columns = parallel_map<double>(K.size(), [&](std::size_t col) {
      const MultiIndex& l = *std::next(K.begin(), static_cast<long>(col));
      const auto g = GridFunction::sample(Domain::UnitCube, d, level,
                                          [&](std::span<const double> x) { return hpc_basis(l, x); });
      const auto c = hpc_analyze(g, K);
      double dev = 0.0;
      for (const auto& k : K) dev = std::max(dev, std::abs(c.get(k).real() - (k == l ? 1.0 : 0.0)));
      return dev;
    });
    for (double v : columns) worst = std::max(worst, v);
  }
  return {worst <= 1e-10, "max |G - I| " + sci(worst) + " over Gamma_16, d = 1..3; limit 1e-10"};
}

// 3: Chui-Wang biorthogonality and vanishing moments
Outcome cw_biorthogonality() {
  const DualSystem dual(40, 1e-10);
  std::vector<std::pair<int, int>> pairs;
  for (int j = -1; j <= 2; ++j)
    for (int k = -4; k <= 4; ++k) pairs.emplace_back(j, k);
  double worst = 0.0;
  for (const auto& [j, k] : pairs)
    for (const auto& [l, m] : pairs)
      worst = std::max(worst, std::abs(dual.biorthogonality(j, k, l, m) -
                                       biorthogonality_target(MultiIndex{j}, MultiIndex{k}, MultiIndex{l}, MultiIndex{m})));
  // bivariate: every diagonal pair plus random off-diagonal pairs
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<std::size_t> pick(0, pairs.size() - 1);
  const std::size_t draws = 4000;
  for (std::size_t t = 0; t < pairs.size() * pairs.size() + draws; ++t) {
    std::size_t a0, a1, b0, b1;
    if (t < pairs.size() * pairs.size()) {
      a0 = b0 = t / pairs.size();
      a1 = b1 = t % pairs.size();
    } else {
      a0 = pick(rng), a1 = pick(rng), b0 = pick(rng), b1 = pick(rng);
    }
    const MultiIndex j{pairs[a0].first, pairs[a1].first}, k{pairs[a0].second, pairs[a1].second};
    const MultiIndex l{pairs[b0].first, pairs[b1].first}, m{pairs[b0].second, pairs[b1].second};
    worst = std::max(worst, std::abs(dual.biorthogonality(j, k, l, m) - biorthogonality_target(j, k, l, m)));
  }
  const double m0 = std::abs(cw::mother().moment(0)), m1 = std::abs(cw::mother().moment(1));
  return {worst <= 1e-7 && m0 <= 1e-14 && m1 <= 1e-14,
          "biorthogonality residual " + sci(worst) + " (limit 1e-7); moments " + sci(m0) + ", " + sci(m1) +
              " (limit 1e-14)"};
}

// 4: closed form of the father dual coefficients
Outcome dual_closed_form() {
  const auto a = dual_coefficients(Generator::Father, 40);
  const double s3 = std::sqrt(3.0);
  double worst = 0.0;
  for (int n = -20; n <= 20; ++n) worst = std::max(worst, std::abs(a[n] - s3 * std::pow(s3 - 2.0, std::abs(n))));
  return {worst <= 1e-9, "max deviation " + sci(worst) + " for |n| <= 20; limit 1e-9"};
}

// 5: weighted coefficient decay and the Gibbs separation
Outcome decay_and_gibbs() {
  bool ok = true;
  std::string worst;
  double worst_ratio = 1.0;
  for (const char* name : {"exp1d", "exp2d", "monomial2d", "periodic2d", "step1d", "exp3d"}) {
    const auto& f = find_test_function(name);
    const auto K = box(std::vector<int>(f.dim(), 0), std::vector<int>(f.dim(), f.dim() == 3 ? 32 : 64));
    CoefficientMap c;
    if (f.has_closed_form_coefficients()) {
      c = f.hpc_coefficients(K);
    } else {
      c = hpc_analyze(GridFunction::sample(Domain::UnitCube, f.dim(), resolving_level(K.max_abs()) + 2, f.evaluator()),
                      K);
    }
    const int full = K.max_abs();
    const double s_half = coefficient_decay_report(c, full / 2).sup_weighted;
    const double s_full = coefficient_decay_report(c, full).sup_weighted;
    const double ratio = s_full / s_half;
    if (!(std::isfinite(s_full) && ratio < 2.0)) ok = false;
    if (ratio >= worst_ratio) {
      worst_ratio = ratio;
      worst = name;
    }
  }
  const auto g = gibbs_demo(find_test_function("step1d"), 64);
  double first_half = 0.0, second_half = 0.0;
  for (const auto& r : g.rows) {
    double& half = r.k <= 32 ? first_half : second_half;
    half = std::max(half, r.hpc_weighted);
  }
  const bool gibbs = g.fourier_min() >= 0.1 * g.fourier_max() && std::isfinite(g.hpc_max()) && second_half <= 2.0 * first_half;
  return {ok && gibbs, "sup ratio on doubling " + fix(worst_ratio) + " (" + worst + ", limit 2); Gibbs sine*k min/max " +
                           fix(g.fourier_min() / g.fourier_max()) + " (limit 0.1), hpc*k^2 max " + fix(g.hpc_max())};
}

// 6: tent-transformed Fibonacci cubature on the smooth non-periodic family
Outcome cubature_rates() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto& f = find_test_function("exp2d");
  std::vector<int> idx;
  for (int i = 9; i <= 19; ++i) idx.push_back(i);  // b_n = 34 .. 4181
  CubatureOptions tent;
  tent.tent = true;
  tent.skip = 0;
  CubatureOptions plain;
  plain.skip = 0;
  const auto ft = convergence_experiment(fibonacci_family(), f, idx, tent);
  const auto fp = convergence_experiment(fibonacci_family(), f, idx, plain);
  const double t = seconds_since(t0);
  return {ft.slope <= -1.8 && fp.slope >= -1.2 && t <= 300.0,
          "exp2d over b_n 34..4181: tent slope " + fix(ft.slope) + " (limit -1.8), plain slope " + fix(fp.slope) +
              " (limit -1.2); " + fix(t, 1) + " s"};
}

// 7: projection rates on the kink family and least squares against projection
Outcome approximation_rates() {
  std::vector<long> N;
  for (int j = 2; j <= 12; ++j) N.push_back(1L << j);
  const auto f1 = projection_error_rate(find_test_function("kink1d"), N);
  const auto f2 = projection_error_rate(find_test_function("kink2d"), N);
  double worst = 0.0;
  for (const char* name : {"kink1d", "kink2d"})
    for (long n : {8L, 16L, 32L, 64L}) {
      const auto c = compare_recovery(find_test_function(name), n, 1000 + n, 4.0);
      worst = std::max(worst, c.ls_error / c.projection_error);
    }
  const bool ok = std::abs(f1.slope + 1.5) <= 0.2 && std::abs(f2.slope + 1.5) <= 0.25 && worst <= 3.0;
  return {ok, "kink1d slope " + fix(f1.slope) + " (-1.5 +- 0.2), kink2d slope " + fix(f2.slope) +
                  " after (log n)^" + fix(f2.log_power, 1) + " (-1.5 +- 0.25); LS/projection max " + fix(worst) +
                  " (limit 3)"};
}

// 8: norm-equivalence bands and the regime violation
Outcome norm_bands() {
  const auto rep = norm_band_experiment();
  const bool ok = rep.cw_band() <= 10.0 && rep.diff_band() <= 10.0 && rep.violation_spread() >= 10.0;
  return {ok, std::to_string(rep.rows.size()) + " evaluations: cw/hpc band " + fix(rep.cw_band()) +
                  ", diff/hpc band " + fix(rep.diff_band()) + " (limit 10); r=2.5 cw/hpc spread " +
                  fix(rep.violation_spread(), 1) + " (needs >= 10)"};
}

// 9: discrete Hoelder pairing on random sequences
Outcome holder_pairing() {
  std::mt19937_64 rng(99);
  const std::array<double, 4> ex = {1.0, 1.5, 2.0, kInf};
  std::uniform_int_distribution<int> lev(-1, 5), sh(-8, 8), count(1, 60), dim(1, 3);
  std::uniform_real_distribution<double> rr(-1.0, 3.0);
  std::normal_distribution<double> val(0.0, 1.0);
  auto sequence = [&](int d, int n) {
    WaveletCoefficients::Storage s;
    while (static_cast<int>(s.size()) < n) {
      std::vector<int> j(d), k(d);
      for (auto& e : j) e = lev(rng);
      for (auto& e : k) e = sh(rng);
      s[{MultiIndex(j), MultiIndex(k)}] = val(rng);
    }
    return s;
  };
  int violations = 0;
  double tightest = 0.0;
  for (int t = 0; t < 1000; ++t) {
    const double p = ex[t % 4], q = ex[(t / 4) % 4];
    const int d = dim(rng);
    auto lam = sequence(d, count(rng));
    // half the draws share support so the pairing is not trivially small
    auto mu = t % 2 ? lam : sequence(d, count(rng));
    if (t % 2)
      for (auto& [key, v] : mu) v = val(rng);
    const auto h = holder_pairing_check(lam, mu, BesovParams(rr(rng), p, q));
    if (h.lhs > h.rhs * (1 + 1e-12)) ++violations;
    if (h.rhs > 0) tightest = std::max(tightest, h.lhs / h.rhs);
  }
  return {violations == 0, std::to_string(violations) + " violations in 1000 pairs; max lhs/rhs " + fix(tightest, 4)};
}

// 10: repeated runs with fixed seeds give identical CSV bodies
Outcome determinism() {
  auto make = [](Command c, std::initializer_list<std::pair<const char*, const char*>> kv) {
    ExperimentConfig cfg(c);
    for (const auto& [k, v] : kv) cfg.set_from_string(k, v);
    return cfg;
  };
  const std::vector<ExperimentConfig> cfgs = {
      make(Command::Identities, {{"d", "2"}, {"count", "10"}, {"seed", "7"}}),
      make(Command::Cubature, {{"fn", "exp2d"}, {"rule", "net2"}, {"shifts", "8"}, {"seed", "5"}, {"nmax", "10"}}),
      make(Command::Recover, {{"fn", "kink2d"}, {"nmax", "5"}, {"seed", "11"}}),
      make(Command::Approx, {{"fn", "kink2d"}, {"nmax", "8"}}),
      make(Command::Coeffs, {{"fn", "step1d"}, {"N", "64"}}),
  };
  auto hash = [](const ExperimentResult& r) {
    std::ostringstream os;
    for (const auto& t : r.tables) write_table(os, t, r.config);
    return csv_body_hash(os.str());
  };
  int mismatches = 0;
  for (const auto& cfg : cfgs) {
    const auto h0 = hash(run(cfg));
    if (hash(run(cfg)) != h0) ++mismatches;
    setenv("HPC_BESOV_THREADS", "3", 1);
    if (hash(run(cfg)) != h0) ++mismatches;
    unsetenv("HPC_BESOV_THREADS");
  }
  return {mismatches == 0, std::to_string(cfgs.size()) + " configurations, 3 runs each (one with 3 threads): " +
                               std::to_string(mismatches) + " hash mismatches"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"exact identities", exact_identities},
      {"cosine orthonormality", cosine_orthonormality},
      {"Chui-Wang biorthogonality", cw_biorthogonality},
      {"dual coefficient closed form", dual_closed_form},
      {"coefficient decay and Gibbs", decay_and_gibbs},
      {"cubature rates", cubature_rates},
      {"approximation rates", approximation_rates},
      {"norm-equivalence bands", norm_bands},
      {"Hoelder pairing", holder_pairing},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << (i + 1) << ". " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
