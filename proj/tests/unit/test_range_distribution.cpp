#include <cmath>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/zeta.hpp>
#include <gtest/gtest.h>

#include "oracles.hpp"
#include "svrg/range_distribution.hpp"

using namespace svrg;

namespace {

constexpr double kLog2 = std::numbers::ln2;

// density of r under σ² = 1 from the independent reference transcription
double reference_range_density(double r, double sigma2) {
  const double x = r * r / sigma2;
  return oracle::range_sq_density_reference(x) * 2.0 * r / sigma2;
}

// CDF of x = r²/σ² by quadrature of the reference density
double reference_x_cdf(double x) {
  static const oracle::TabulatedCdf cdf(oracle::range_sq_density_reference, 1e-6, 80.0, 8000);
  return cdf(x);
}

}  // namespace

TEST(RangeDensity, RepresentationsAgreeAtUnitRange) {
  const auto a = range_density(1.0, 1.0, 1e-12, Representation::SeriesA);
  const auto b = range_density(1.0, 1.0, 1e-12, Representation::SeriesB);
  EXPECT_EQ(a.representation, Representation::SeriesA);
  EXPECT_EQ(b.representation, Representation::SeriesB);
  EXPECT_NEAR(a.value / b.value, 1.0, 1e-10);
}

TEST(RangeDensity, RepresentationsAgreeWhereBothConverge) {
  for (double x = 0.6; x < 6.0; x += 0.05) {
    const auto a = normalized_range_sq_density(x, 1e-14, Representation::SeriesA);
    const auto b = normalized_range_sq_density(x, 1e-14, Representation::SeriesB);
    EXPECT_NEAR(a.value / b.value, 1.0, 1e-10) << "x=" << x;
  }
}

TEST(RangeDensity, MatchesIndependentTranscription) {
  for (double r : {0.05, 0.3, 0.8, 1.2, 1.6, 2.5, 4.0, 6.0}) {
    for (double s2 : {0.25, 1.0, 4.0}) {
      const double ref = reference_range_density(r, s2);
      if (ref < 1e-250) continue;
      EXPECT_NEAR(range_density(r, s2, 1e-13).value / ref, 1.0, 1e-10) << r << " " << s2;
    }
  }
}

TEST(RangeDensity, SelectsRepresentationByThreshold) {
  EXPECT_EQ(range_density(std::sqrt(2.5), 1.0, 1e-10).representation, Representation::SeriesA);
  EXPECT_EQ(range_density(1.0, 1.0, 1e-10).representation, Representation::SeriesB);
  // a tie goes to the small-x series
  EXPECT_EQ(normalized_range_sq_density(2.0, 1e-10).representation, Representation::SeriesB);
}

TEST(RangeDensity, BracketsContainValue) {
  for (double r = 0.05; r < 8.0; r += 0.07) {
    const auto e = range_density(r, 1.0, 1e-9);
    EXPECT_TRUE(e.converged);
    EXPECT_LE(e.lower_bracket, e.value);
    EXPECT_LE(e.value, e.upper_bracket);
    EXPECT_GE(e.value, 0.0);
    EXPECT_LE(e.upper_bracket - e.lower_bracket, 1e-9 * e.lower_bracket + 1e-300);
  }
}

TEST(RangeDensity, ScaleFamily) {
  for (double r : {0.2, 0.9, 1.7, 3.3}) {
    const double base = range_density(r, 1.0, 1e-13).value;
    EXPECT_NEAR(range_density(2.0 * r, 4.0, 1e-13).value, base / 2.0, 1e-13 * base);
  }
}

TEST(RangeDensity, VanishesAtZeroRange) {
  double prev = kInf;
  for (double r : {0.3, 0.1, 0.03, 0.01}) {
    const double v = range_density(r, 1.0, 1e-10).value;
    EXPECT_TRUE(v < prev || v == 0.0);
    prev = v;
  }
  EXPECT_LT(prev, 1e-200);
}

TEST(RangeDensity, IntegratesToOne) {
  for (double s2 : {0.25, 1.0, 4.0}) {
    const double sd = std::sqrt(s2);
    auto f = [&](double r) { return range_density(r, s2, 1e-14).value; };
    const double total = oracle::integrate(f, 1e-6 * sd, 12.0 * sd, 400);
    EXPECT_NEAR(total, 1.0, 1e-8) << "sigma2=" << s2;
  }
}

TEST(RangeDensity, InvalidInputs) {
  EXPECT_THROW(range_density(0.0, 1.0, 1e-8), std::domain_error);
  EXPECT_THROW(range_density(1.0, -1.0, 1e-8), std::domain_error);
  EXPECT_THROW(range_density(1.0, 1.0, 0.0), std::domain_error);
  EXPECT_THROW(range_density(NAN, 1.0, 1e-8), std::domain_error);
}

TEST(RangeDensity, LogDensityMatchesEvaluation) {
  for (double r : {0.1, 0.7, 1.4, 2.9, 7.0}) {
    EXPECT_NEAR(log_range_density(r, 1.3), std::log(range_density(r, 1.3, 1e-14).value), 1e-12);
  }
}

TEST(RangeSeries, TermsDecreaseOnTheirRegions) {
  // large-x series on x > 4/3, small-x series on x < π²
  const double pi2 = std::numbers::pi * std::numbers::pi;
  int checked = 0;
  for (double x = 4.0 / 3.0 + 1e-3; x < 40.0; x *= 1.01) {
    for (int k = 1; k <= 50; ++k) {
      const double prev = range_series::term_a(k - 1, x);
      const double cur = range_series::term_a(k, x);
      if (prev == 0.0) break;
      ASSERT_LT(cur, prev) << "x=" << x << " k=" << k;
      ++checked;
    }
  }
  for (double x = 0.05; x < pi2 - 1e-3; x *= 1.01) {
    for (int k = 1; k <= 50; ++k) {
      const double prev = range_series::term_b(k - 1, x);
      const double cur = range_series::term_b(k, x);
      if (prev == 0.0) break;
      ASSERT_LT(cur, prev) << "x=" << x << " k=" << k;
      ++checked;
    }
  }
  EXPECT_GT(checked, 1000);
}

TEST(RangeSeries, PartialSumsBracketDensity) {
  for (double x = 0.2; x < 12.0; x += 0.1) {
    const auto rep = range_series::select(x, kDefaultRangeThreshold);
    const double scale = std::exp(range_series::log_leading(rep, x));
    const double f = oracle::range_sq_density_reference(x);
    double sum = 1.0;
    double prev_even = kInf, prev_odd = -kInf;
    for (int k = 1; k < 12; ++k) {
      sum += (k % 2 ? -1.0 : 1.0) * range_series::term(rep, k, x);
      const double bound = sum * scale;
      if (k % 2) {
        ASSERT_LE(bound, f * (1 + 1e-12)) << x;
        ASSERT_GE(bound, prev_odd);
        prev_odd = bound;
      } else {
        ASSERT_GE(bound, f * (1 - 1e-12)) << x;
        ASSERT_LE(bound, prev_even);
        prev_even = bound;
      }
    }
  }
}

TEST(RangeSampler, MixtureWeights) {
  const NormalizedRangeSqSampler s(2.0);
  EXPECT_NEAR(s.weight_chi2(), std::erfc(1.0), 1e-15);
  EXPECT_NEAR(s.weight_chi2(), 0.15730, 1e-5);
  const double pi2 = std::numbers::pi * std::numbers::pi;
  EXPECT_NEAR(s.weight_invgamma(), 4.0 / pi2 * boost::math::gamma_q(2.0, pi2 / 4.0), 1e-14);
  EXPECT_NEAR(s.weight_invgamma(), 0.119175, 1e-6);
}

TEST(RangeSampler, RejectsThresholdOutsideMonotoneRegion) {
  EXPECT_THROW(NormalizedRangeSqSampler(1.0), std::domain_error);
  EXPECT_THROW(NormalizedRangeSqSampler(10.0), std::domain_error);
}

TEST(RangeSampler, MeanAndVarianceOfSquaredRange) {
  Rng rng(2024);
  std::vector<double> xs(1000000);
  for (auto& x : xs) x = sample_normalized_range_sq(rng);
  const double mean = oracle::mean(xs);
  const double var = oracle::variance(xs);
  EXPECT_NEAR(mean, 4.0 * kLog2, 3.0 * oracle::standard_error(xs));
  const double target_var = 9.0 * boost::math::zeta(3.0) - 16.0 * kLog2 * kLog2;
  EXPECT_NEAR(target_var, 3.1313, 1e-4);
  // standard error of the sample variance from the fourth central moment
  double m4 = 0.0;
  for (double x : xs) m4 += std::pow(x - mean, 4);
  m4 /= double(xs.size());
  const double se_var = std::sqrt((m4 - var * var) / double(xs.size()));
  EXPECT_NEAR(var, target_var, 3.0 * se_var);
}

TEST(RangeSampler, ChiSquareAgainstQuadratureCdf) {
  Rng rng(77);
  std::vector<double> xs(1000000);
  for (auto& x : xs) x = sample_normalized_range_sq(rng);
  EXPECT_GT(oracle::chi_square_gof(xs, reference_x_cdf, 1e-3, 40.0, 100).p_value, 0.01);
}

TEST(RangeSampler, OtherThresholdsAreAlsoExact) {
  for (double c : {1.4, 5.0, 9.5}) {
    Rng rng(11);
    std::vector<double> xs(200000);
    for (auto& x : xs) x = sample_normalized_range_sq(rng, c);
    EXPECT_GT(oracle::chi_square_gof(xs, reference_x_cdf, 1e-3, 40.0, 50).p_value, 0.01) << c;
  }
}

TEST(SampleRange, MeanRange) {
  Rng rng(5);
  std::vector<double> rs(1000000);
  for (auto& r : rs) r = sample_range(1.0, rng);
  EXPECT_NEAR(oracle::mean(rs), std::sqrt(8.0 / std::numbers::pi), 3.0 * oracle::standard_error(rs));

  Rng rng2(5);
  std::vector<double> r4(1000000);
  for (auto& r : r4) r = sample_range(4.0, rng2);
  EXPECT_NEAR(oracle::mean(r4), 2.0 * oracle::mean(rs), 1e-12);
}

TEST(SampleRange, KolmogorovSmirnovAgainstDensity) {
  Rng rng(6);
  std::vector<double> rs(100000);
  for (auto& r : rs) r = sample_range(2.0, rng);
  auto cdf = [](double r) { return reference_x_cdf(r * r / 2.0); };
  // 1% critical value of the one-sample KS statistic
  EXPECT_LT(oracle::ks_distance(rs, cdf), 1.628 / std::sqrt(100000.0));
}

TEST(SampleRange, RejectsNonPositiveVariance) {
  Rng rng(1);
  EXPECT_THROW(sample_range(0.0, rng), std::domain_error);
}

TEST(ParkinsonMoment, PublishedOrders) {
  EXPECT_NEAR(parkinson_moment(1.0, 1.0), std::sqrt(8.0 / std::numbers::pi), 1e-13);
  EXPECT_NEAR(parkinson_moment(1.0, 1.0), 1.59577, 1e-5);
  EXPECT_NEAR(parkinson_moment(2.0, 1.0), 4.0 * kLog2, 1e-13);
  EXPECT_NEAR(parkinson_moment(2.0, 3.0), 12.0 * kLog2, 1e-12);
  EXPECT_NEAR(parkinson_moment(4.0, 1.0), 9.0 * boost::math::zeta(3.0), 1e-12);
  EXPECT_NEAR(parkinson_moment(4.0, 1.0), 10.8185, 1e-4);
}

TEST(ParkinsonMoment, MatchesQuadratureForFractionalOrders) {
  for (double p : {0.5, 1.5, 2.0 + 1e-6, 3.0, 6.0}) {
    auto f = [&](double r) { return std::pow(r, p) * reference_range_density(r, 1.0); };
    EXPECT_NEAR(parkinson_moment(p, 1.0) / oracle::integrate(f, 1e-6, 15.0, 400), 1.0, 1e-9) << p;
  }
}

TEST(ParkinsonMoment, FourthMomentByMonteCarlo) {
  Rng rng(8);
  std::vector<double> r4(400000);
  for (auto& v : r4) v = std::pow(sample_range(1.0, rng), 4);
  EXPECT_NEAR(oracle::mean(r4), parkinson_moment(4.0, 1.0), 3.0 * oracle::standard_error(r4));
}

TEST(ParkinsonEstimator, Definition) {
  EXPECT_EQ(parkinson_estimator(0.0), 0.0);
  EXPECT_NEAR(parkinson_estimator(std::sqrt(4.0 * kLog2)), 1.0, 1e-15);
}

TEST(ParkinsonEstimator, UnbiasedUnderRangeDensity) {
  Rng rng(9);
  std::vector<double> est(400000);
  for (auto& v : est) v = parkinson_estimator(sample_range(2.5, rng));
  EXPECT_NEAR(oracle::mean(est), 2.5, 3.0 * oracle::standard_error(est));
}
