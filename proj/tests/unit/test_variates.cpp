#include <cmath>
#include <numbers>
#include <vector>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "svrg/variates.hpp"

using namespace svrg;

namespace {

template <class F>
std::vector<double> draw(int n, std::uint64_t seed, F&& f) {
  Rng rng(seed);
  std::vector<double> out(n);
  for (auto& v : out) v = f(rng);
  return out;
}

// mean of a positive density by quadrature in s = log x
double quadrature_mean(const std::function<double(double)>& log_kernel, double lo, double hi) {
  auto w0 = [&](double s) { return std::exp(log_kernel(std::exp(s)) + s); };
  auto w1 = [&](double s) { return std::exp(log_kernel(std::exp(s)) + 2.0 * s); };
  return oracle::integrate(w1, lo, hi, 2000) / oracle::integrate(w0, lo, hi, 2000);
}

}  // namespace

TEST(Primitives, UniformIsOpenInterval) {
  Rng rng(1);
  for (int i = 0; i < 100000; ++i) {
    const double u = uniform01(rng);
    ASSERT_GT(u, 0.0);
    ASSERT_LT(u, 1.0);
  }
}

TEST(Primitives, GammaMoments) {
  for (double shape : {0.3, 1.0, 4.5}) {
    auto xs = draw(200000, 7, [&](Rng& g) { return gamma_variate(shape, 2.0, g); });
    EXPECT_NEAR(oracle::mean(xs), shape / 2.0, 4.0 * oracle::standard_error(xs));
    EXPECT_NEAR(oracle::variance(xs), shape / 4.0, 0.03 * shape / 4.0);
  }
}

TEST(Primitives, SeedsAreReproducible) {
  auto a = draw(100, 99, [](Rng& g) { return standard_normal(g); });
  auto b = draw(100, 99, [](Rng& g) { return standard_normal(g); });
  EXPECT_EQ(a, b);
  EXPECT_NE(mix_seed(1, 0), mix_seed(1, 1));
}

TEST(TruncatedNormal, SymmetricUnitInterval) {
  auto xs = draw(200000, 3, [](Rng& g) { return sample_truncated_normal(0.0, 1.0, {-1.0, 1.0}, g); });
  EXPECT_NEAR(oracle::mean(xs), 0.0, 4.0 * oracle::standard_error(xs));
  for (double x : xs) ASSERT_TRUE(x >= -1.0 && x <= 1.0);
}

TEST(TruncatedNormal, UntruncatedMatchesNormal) {
  auto xs = draw(200000, 4, [](Rng& g) { return sample_truncated_normal(1.5, 4.0, {}, g); });
  EXPECT_NEAR(oracle::mean(xs), 1.5, 4.0 * oracle::standard_error(xs));
  EXPECT_NEAR(oracle::variance(xs), 4.0, 0.04);
}

TEST(TruncatedNormal, GoodnessOfFitInFarTail) {
  // N(0.9, 0.01) on (-1, 1) has its mass piled against the upper bound
  auto xs = draw(100000, 5, [](Rng& g) { return sample_truncated_normal(0.9, 0.01, {-1.0, 1.0}, g); });
  const double sd = 0.1;
  const double plo = 0.5 * std::erfc(-(-1.0 - 0.9) / sd / std::numbers::sqrt2);
  const double phi = 0.5 * std::erfc(-(1.0 - 0.9) / sd / std::numbers::sqrt2);
  auto cdf = [&](double x) { return (0.5 * std::erfc(-(x - 0.9) / sd / std::numbers::sqrt2) - plo) / (phi - plo); };
  EXPECT_GT(oracle::chi_square_gof(xs, cdf, -1.0, 1.0, 40).p_value, 0.01);

  auto tail = draw(100000, 6, [](Rng& g) { return sample_truncated_normal(0.0, 1.0, {4.0, 4.5}, g); });
  const double a = 0.5 * std::erfc(4.0 / std::numbers::sqrt2);
  const double b = 0.5 * std::erfc(4.5 / std::numbers::sqrt2);
  auto tcdf = [&](double x) { return (a - 0.5 * std::erfc(x / std::numbers::sqrt2)) / (a - b); };
  EXPECT_GT(oracle::chi_square_gof(tail, tcdf, 4.0, 4.5, 40).p_value, 0.01);
}

TEST(TruncatedNormal, EmptyRegionThrows) {
  Rng rng(1);
  EXPECT_THROW(sample_truncated_normal(0.0, 1.0, {1.0, 1.0}, rng), TruncationError);
}

TEST(TruncatedGamma, UpperTailMeanMatchesQuadrature) {
  auto xs = draw(200000, 8, [](Rng& g) { return sample_truncated_gamma(2.0, 1.0, {3.0, kInf}, g); });
  // closed form: E[X | X > 3] = Γ(3, 3) / Γ(2, 3)
  const double oracle = boost::math::tgamma(3.0, 3.0) / boost::math::tgamma(2.0, 3.0);
  EXPECT_NEAR(oracle::mean(xs), oracle, 4.0 * oracle::standard_error(xs));
  for (double x : xs) ASSERT_GE(x, 3.0);
}

TEST(TruncatedGamma, GoodnessOfFitAcrossRegimes) {
  struct Case {
    double shape, rate, lo, hi;
  };
  int seed = 10;
  for (Case c : {Case{0.5, 0.5, 2.0, kInf}, Case{0.5, 0.5, 30.0, kInf}, Case{2.0, 4.9348, 0.5, kInf},
                 Case{12.0, 1.0, 0.0, 3.0}, Case{3.0, 2.0, 1.0, 1.3}, Case{40.0, 2.0, 0.0, 30.0}}) {
    auto xs = draw(100000, seed++, [&](Rng& g) { return sample_truncated_gamma(c.shape, c.rate, {c.lo, c.hi}, g); });
    const double plo = boost::math::gamma_p(c.shape, c.rate * c.lo);
    const double phi = std::isinf(c.hi) ? 1.0 : boost::math::gamma_p(c.shape, c.rate * c.hi);
    auto cdf = [&](double x) { return (boost::math::gamma_p(c.shape, c.rate * x) - plo) / (phi - plo); };
    const double top = std::isinf(c.hi) ? c.lo + 200.0 / c.rate : c.hi;
    EXPECT_GT(oracle::chi_square_gof(xs, cdf, c.lo, top, 50).p_value, 0.01)
        << c.shape << " " << c.rate << " [" << c.lo << ", " << c.hi << "]";
  }
}

TEST(TruncatedInverseGamma, GoodnessOfFit) {
  // IG(2, π²/2) restricted to (0, 2]: the small-x branch of the range sampler
  const double scale = 0.5 * std::numbers::pi * std::numbers::pi;
  auto xs = draw(100000, 20, [&](Rng& g) { return sample_truncated_invgamma(2.0, scale, {0.0, 2.0}, g); });
  const double norm = boost::math::gamma_q(2.0, scale / 2.0);
  auto cdf = [&](double x) { return boost::math::gamma_q(2.0, scale / x) / norm; };
  EXPECT_GT(oracle::chi_square_gof(xs, cdf, 1e-6, 2.0, 40).p_value, 0.01);
  for (double x : xs) ASSERT_LE(x, 2.0);
}

TEST(Gig, InverseGaussianReduction) {
  // GIG(-1/2, 1, 1) is inverse Gaussian with mean 1 and shape 1
  auto xs = draw(1000000, 30, [](Rng& g) { return sample_gig({-0.5, 1.0, 1.0}, g); });
  EXPECT_NEAR(oracle::mean(xs), 1.0, 3.0 * oracle::standard_error(xs));
}

TEST(Gig, SmallDeltaApproachesGamma) {
  auto xs = draw(200000, 31, [](Rng& g) { return sample_gig({2.5, 1e-9, 1.2}, g); });
  const double rate = 0.5 * 1.2 * 1.2;
  EXPECT_NEAR(oracle::mean(xs), 2.5 / rate, 4.0 * oracle::standard_error(xs));
  EXPECT_NEAR(oracle::variance(xs), 2.5 / (rate * rate), 0.03 * 2.5 / (rate * rate));
  auto zs = draw(200000, 32, [](Rng& g) { return sample_gig({2.5, 0.0, 1.2}, g); });
  EXPECT_NEAR(oracle::mean(zs), 2.5 / rate, 4.0 * oracle::standard_error(zs));
}

TEST(Gig, MeanMatchesQuadrature) {
  const GigParams p{2.0, 1.5, 0.8};
  auto xs = draw(500000, 33, [&](Rng& g) { return sample_gig(p, g); });
  auto logk = [&](double x) { return (p.nu - 1.0) * std::log(x) - 0.5 * (p.delta * p.delta / x + p.gamma * p.gamma * x); };
  EXPECT_NEAR(oracle::mean(xs), quadrature_mean(logk, -15.0, 6.0), 3.0 * oracle::standard_error(xs));
}

TEST(Gig, GoodnessOfFitAcrossGenerators) {
  // cover the ratio-of-uniforms (with and without mode shift) and concave-hat paths
  int seed = 40;
  for (GigParams p : {GigParams{-0.5, 1.0, 1.0}, GigParams{3.0, 2.0, 2.0}, GigParams{0.4, 0.1, 0.5},
                      GigParams{-10.5, 6.0, 0.9}, GigParams{1.2, 0.7, 0.6}, GigParams{0.0, 0.05, 0.05}}) {
    auto xs = draw(100000, seed++, [&](Rng& g) { return sample_gig(p, g); });
    auto dens = [&](double s) {
      return std::exp(p.nu * s - 0.5 * (p.delta * p.delta * std::exp(-s) + p.gamma * p.gamma * std::exp(s)));
    };
    const double total = oracle::integrate(dens, -40.0, 12.0, 4000);
    auto cdf = [&](double x) { return oracle::integrate(dens, -40.0, std::log(x), 100) / total; };
    EXPECT_GT(oracle::chi_square_gof(xs, cdf, 1e-12, 1e4, 30).p_value, 0.01)
        << p.nu << " " << p.delta << " " << p.gamma;
  }
}

TEST(Gig, TruncatedGoodnessOfFit) {
  struct Case {
    GigParams p;
    double lo, hi;
  };
  int seed = 60;
  for (Case c : {Case{{-9.0, 3.0, 2.0}, 1.5, kInf}, Case{{-9.0, 3.0, 2.0}, 0.2, kInf}, Case{{-2.0, 1.0, 4.0}, 0.8, kInf},
                 Case{{1.5, 1.0, 1.0}, 0.5, 2.0}}) {
    auto xs = draw(100000, seed++, [&](Rng& g) { return sample_truncated_gig(c.p, {c.lo, c.hi}, g); });
    const GigParams& p = c.p;
    auto dens = [&](double s) {
      return std::exp(p.nu * s - 0.5 * (p.delta * p.delta * std::exp(-s) + p.gamma * p.gamma * std::exp(s)));
    };
    const double slo = std::log(c.lo);
    const double shi = std::isinf(c.hi) ? 10.0 : std::log(c.hi);
    const double total = oracle::integrate(dens, slo, shi, 4000);
    auto cdf = [&](double x) { return oracle::integrate(dens, slo, std::log(x), 100) / total; };
    EXPECT_GT(oracle::chi_square_gof(xs, cdf, c.lo, std::exp(shi), 30).p_value, 0.01) << p.nu << " " << c.lo;
    for (double x : xs) ASSERT_TRUE(x >= c.lo && x <= c.hi);
  }
}

TEST(Gig, ModeJustBelowRegionTerminates) {
  // nearly flat left edge once the mode sits below the truncation point
  const GigParams p{-19.1846, 2.70961, 4.76879};
  const double lo = 0.173598;
  auto xs = draw(20000, 70, [&](Rng& g) { return sample_truncated_gig(p, {lo, kInf}, g); });
  auto dens = [&](double s) {
    return std::exp(p.nu * s - 0.5 * (p.delta * p.delta * std::exp(-s) + p.gamma * p.gamma * std::exp(s)));
  };
  const double slo = std::log(lo);
  const double total = oracle::integrate(dens, slo, 3.0, 4000);
  auto cdf = [&](double x) { return oracle::integrate(dens, slo, std::log(x), 100) / total; };
  EXPECT_GT(oracle::chi_square_gof(xs, cdf, lo, std::exp(3.0), 30).p_value, 0.01);
  for (double x : xs) ASSERT_GE(x, lo);
}

TEST(Gig, InvalidParametersThrow) {
  Rng rng(1);
  EXPECT_THROW(sample_gig({1.0, 1.0, 0.0}, rng), std::domain_error);
  EXPECT_THROW(sample_gig({-1.0, 0.0, 1.0}, rng), std::domain_error);
  EXPECT_THROW(sample_gig({0.0, 0.0, 0.0}, rng), std::domain_error);
}
