#include <gtest/gtest.h>

#include <set>
#include <thread>

#include "hpcb/hpc_transform.hpp"
#include "hpcb/test_corpus.hpp"
#include "oracles/oracles.hpp"

using namespace hpcb;

namespace {
// <f, c_k> by Simpson on 4k+64 panels, split at a kink if one is given
double simpson_hpc(const std::function<double(double)>& f, int k, double kink = -1.0) {
  std::vector<double> cuts;
  const int panels = 64 + 4 * k;
  for (int i = 0; i <= panels; ++i) cuts.push_back(double(i) / panels);
  if (kink > 0.0) cuts.push_back(kink);
  std::sort(cuts.begin(), cuts.end());
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
    s += oracle::simpson([&](double x) { return f(x) * std::cos(oracle::pi * k * x); }, cuts[i], cuts[i + 1], 1e-15);
  return k == 0 ? s : oracle::sqrt2 * s;
}
}  // namespace

TEST(Corpus, RequiredMembersPresentAndSelfChecked) {
  std::set<std::string> names;
  for (const auto& f : corpus()) {
    EXPECT_TRUE(names.insert(f.name()).second) << "duplicate " << f.name();
    ASSERT_TRUE(f.exact_integral().has_value()) << f.name();
    EXPECT_LE(f.self_check_error(12), 1e-10) << f.name();
    EXPECT_TRUE(f.is_tensor());
  }
  for (int d = 1; d <= 3; ++d)
    for (const char* fam : {"constant", "monomial", "cosine", "kink", "bspline2", "bspline4", "periodic", "exp"})
      EXPECT_EQ(find_test_function(fam, d).dim(), d) << fam;
  EXPECT_EQ(find_test_function("step1d").dim(), 1);
  EXPECT_THROW(find_test_function("nonexistent"), ConfigError);
  EXPECT_THROW(find_test_function("kink2d", 3), ConfigError);
}

TEST(Corpus, ClosedFormIntegrals) {
  for (int d = 1; d <= 3; ++d) {
    EXPECT_NEAR(*find_test_function("monomial", d).exact_integral(), std::exp2(-d), 1e-15);
    EXPECT_NEAR(*find_test_function("exp", d).exact_integral(), std::pow(std::numbers::e - 1, d), 1e-13);
    EXPECT_NEAR(*find_test_function("cosine", d).exact_integral(), 0.0, 1e-15);
  }
  // triangle area
  EXPECT_NEAR(factors::kink(0.5).integral(), 0.125, 1e-15);
  EXPECT_NEAR(find_test_function("bspline2", 1).factors()[0].integral(), 0.8 / 2.0, 1e-15);
}

TEST(Corpus, KinkCoefficientsClosedFormAndDecay) {
  const auto kink = factors::kink();
  for (int k = 0; k <= 40; ++k) {
    EXPECT_NEAR(kink.hpc_coefficient(k), oracle::hpc_coeff_kink(k, kKinkPoint), 1e-15);
    EXPECT_NEAR(kink.hpc_coefficient(k), simpson_hpc([](double x) { return std::max(0.0, x - kKinkPoint); }, k, kKinkPoint), 1e-12);
  }
  // k^-2 decay: |c_k| k^2 bounded, and bounded away from 0 along odd k with a = 1/2
  const auto half = factors::kink(0.5);
  for (int k = 1; k < 400; k += 2) {
    const double w = std::abs(half.hpc_coefficient(k)) * k * k;
    EXPECT_NEAR(w, oracle::sqrt2 / (oracle::pi * oracle::pi), 1e-12);
  }
}

TEST(Corpus, OtherClosedFormsMatchQuadrature) {
  for (const char* name : {"exp1d", "periodic1d", "bernoulli1d", "bspline2_1d", "bspline4_1d", "monomial1d"}) {
    const auto& u = find_test_function(name).factors()[0];
    for (int k = 0; k <= 30; ++k) EXPECT_NEAR(u.hpc_coefficient(k), simpson_hpc(u, k, -1.0), 1e-11) << name << k;
  }
  const auto& e = find_test_function("exp1d").factors()[0];
  for (int k = 0; k <= 30; ++k) EXPECT_NEAR(e.hpc_coefficient(k), oracle::hpc_coeff_exp(k), 1e-14);
}

TEST(Corpus, NormSquaredMatchesParseval) {
  for (const char* name : {"kink1d", "bspline2_1d", "exp1d", "step1d"}) {
    const auto& u = find_test_function(name).factors()[0];
    double s = 0.0;
    // quadrature coefficients cost O(k) each, so the numeric factor stops earlier
    const int K = u.exact_coefficients() ? 4000 : 500;
    for (int k = 0; k < K; ++k) s += u.hpc_coefficient(k) * u.hpc_coefficient(k);
    // remaining tail is O(K^-3)
    EXPECT_NEAR(s, u.l2_norm_squared(), 1e-9) << name;
  }
}

TEST(Corpus, TensorCoefficientsFactorize) {
  for (int d = 2; d <= 3; ++d)
    for (const char* fam : {"kink", "exp", "bspline4"}) {
      const auto& f = find_test_function(fam, d);
      const int level = d == 2 ? 7 : 5;
      const auto g = GridFunction::sample(Domain::UnitCube, d, level, f.evaluator());
      const auto K = hyperbolic_cross(8, d, false);
      const auto full = hpc_analyze(g, K);
      std::vector<CoefficientMap> axis;
      for (int i = 0; i < d; ++i) {
        const auto& u = f.factors()[i];
        const auto g1 = GridFunction::sample(Domain::UnitCube, 1, level, [&](std::span<const double> x) { return u(x[0]); });
        axis.push_back(hpc_analyze(g1, hyperbolic_cross(8, 1, false)));
      }
      for (const auto& k : K) {
        double prod = 1.0;
        for (int i = 0; i < d; ++i) prod *= axis[i].get(MultiIndex{k[i]}).real();
        EXPECT_NEAR(full.get(k).real(), prod, 1e-12) << fam << d;
      }
      const auto exact = f.hpc_coefficients(K);
      for (const auto& k : K) {
        double prod = 1.0;
        for (int i = 0; i < d; ++i) prod *= f.factors()[i].hpc_coefficient(k[i]);
        EXPECT_NEAR(exact.get(k).real(), prod, 1e-15);
        EXPECT_NEAR(exact.get(k).real(), f.hpc_coefficient(k), 1e-15);
      }
    }
}

TEST(Corpus, CosineModeIsItsOwnExpansion) {
  const auto f = cosine_mode(MultiIndex{2, 0, 5});
  EXPECT_EQ(f.hpc_coefficient(MultiIndex{2, 0, 5}), 1.0);
  EXPECT_EQ(f.hpc_coefficient(MultiIndex{2, 1, 5}), 0.0);
  const double x[3] = {0.1, 0.7, 0.3};
  EXPECT_NEAR(f(x), 2.0 * std::cos(0.2 * oracle::pi) * std::cos(1.5 * oracle::pi), 1e-15);
}

TEST(Corpus, ConcurrentReadsSeeOneRegistry) {
  std::vector<const void*> seen(4);
  {
    std::vector<std::jthread> ts;
    for (int i = 0; i < 4; ++i) ts.emplace_back([&, i] { seen[i] = &corpus(); });
  }
  for (const void* p : seen) EXPECT_EQ(p, seen[0]);
}

TEST(Gibbs, IdentityClosedForm) {
  const auto t = gibbs_demo(find_test_function("monomial1d"), 64);
  ASSERT_EQ(t.rows.size(), 64u);
  EXPECT_NEAR(t.boundary_jump, 1.0, 1e-15);
  for (const auto& r : t.rows) {
    EXPECT_NEAR(r.fourier_weighted, 1.0 / (oracle::pi * oracle::sqrt2), 1e-12) << r.k;
    EXPECT_NEAR(r.hpc_weighted, r.k % 2 ? 2.0 * oracle::sqrt2 / (oracle::pi * oracle::pi) : 0.0, 1e-12) << r.k;
  }
}

TEST(Gibbs, StepSeparatesDecayRates) {
  const auto t = gibbs_demo(find_test_function("step1d"), 128);
  EXPECT_GT(std::abs(t.boundary_jump), 0.9);
  EXPECT_GE(t.fourier_min(), 0.1 * t.fourier_max());
  EXPECT_LT(t.hpc_max(), 1.0);
  // the sine column tends to jump / (sqrt(2) pi)
  EXPECT_NEAR(t.rows.back().fourier_weighted, std::abs(t.boundary_jump) / (oracle::sqrt2 * oracle::pi), 1e-3);
}

TEST(Gibbs, EvenFunctionHasNoSineCoefficients) {
  // N_4 on [0.1, 0.9] is symmetric about 1/2
  const auto t = gibbs_demo(find_test_function("bspline4_1d"), 32);
  for (const auto& r : t.rows) EXPECT_LE(r.fourier_weighted, 1e-13);
  EXPECT_THROW(gibbs_demo(find_test_function("kink2d"), 8), ConfigError);
}
