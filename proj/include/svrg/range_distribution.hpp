#ifndef SVRG_RANGE_DISTRIBUTION_HPP
#define SVRG_RANGE_DISTRIBUTION_HPP

// Density of the daily high-low range of a driftless Brownian log price, and
// an exact sampler for it based on the alternating series method.
//
// With x = r²/σ², the density of x has two convergent representations
//
//   A:  f(x) = 4 (2π)^{-1/2} x^{-1/2} e^{-x/2}      Σ_k (-1)^k a_k(x),
//       a_k = (k+1)² exp{-((k+1)²-1) x/2}
//   B:  f(x) = 4 π² x^{-3} e^{-π²/(2x)}              Σ_k (-1)^k a_k(x),
//       a_k = (x/π²) exp{-π²(k²-1)/(2x)}             (k odd)
//       a_k = (k+1)² exp{-π²((k+1)²-1)/(2x)}         (k even)
//
// The A terms decrease monotonically for x > 4/3 and the B terms for x < π²,
// so for any threshold c in (4/3, π²) the partial sums of A (x > c) or B
// (x <= c) bracket the density from above (even k) and below (odd k).

#include <cmath>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>

#include "svrg/random.hpp"
#include "svrg/special_functions.hpp"
#include "svrg/variates.hpp"

namespace svrg {

inline constexpr double kDefaultRangeThreshold = 2.0;
inline constexpr int kMaxSeriesTerms = 10000;

enum class Representation { SeriesA, SeriesB };

inline const char* to_string(Representation r) {
  return r == Representation::SeriesA ? "SeriesA" : "SeriesB";
}

struct RangeDensityEval {
  double value = 0.0;
  double lower_bracket = 0.0;
  double upper_bracket = 0.0;
  int terms_used = 0;
  Representation representation = Representation::SeriesA;
  bool converged = false;
};

class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, RangeDensityEval best)
      : std::runtime_error(what), best_(best) {}
  const RangeDensityEval& best() const { return best_; }

 private:
  RangeDensityEval best_;
};

namespace range_series {

inline constexpr double kPi2 = std::numbers::pi * std::numbers::pi;

/// log of the leading factor c·h(x) of each representation.
inline double log_leading_a(double x) {
  return std::log(4.0) - 0.5 * std::log(2.0 * std::numbers::pi) - 0.5 * std::log(x) - 0.5 * x;
}
inline double log_leading_b(double x) {
  return std::log(4.0 * kPi2) - 3.0 * std::log(x) - 0.5 * kPi2 / x;
}

/// Term a_k of representation A (k >= 0).
inline double term_a(int k, double x) {
  const double j = k + 1.0;
  return j * j * std::exp(-0.5 * (j * j - 1.0) * x);
}

/// Term a_k of representation B (k >= 0).
inline double term_b(int k, double x) {
  if (k % 2 == 1) return x / kPi2 * std::exp(-0.5 * kPi2 * (double(k) * k - 1.0) / x);
  const double j = k + 1.0;
  return j * j * std::exp(-0.5 * kPi2 * (j * j - 1.0) / x);
}

inline double term(Representation rep, int k, double x) {
  return rep == Representation::SeriesA ? term_a(k, x) : term_b(k, x);
}

inline double log_leading(Representation rep, double x) {
  return rep == Representation::SeriesA ? log_leading_a(x) : log_leading_b(x);
}

/// Representation with monotone terms at x under threshold c (ties go to B).
inline Representation select(double x, double threshold) {
  return x > threshold ? Representation::SeriesA : Representation::SeriesB;
}

/// Alternating accept/reject decision for U against Σ(-1)^k t_k without
/// summing the whole series: decided at the first odd partial sum that is
/// >= U (accept) or even partial sum that is < U (reject).
template <class Term>
bool alternating_accept(double u, Term&& t, int max_terms = kMaxSeriesTerms) {
  double sum = 1.0;  // t_0 == 1 for every series used here
  for (int k = 1; k < max_terms; ++k) {
    const double tk = t(k);
    if (k % 2 == 1) {
      sum -= tk;
      if (u <= sum) return true;
    } else {
      sum += tk;
      if (u > sum) return false;
    }
  }
  throw std::runtime_error("alternating series decision exceeded the term cap");
}

}  // namespace range_series

/// Density of the normalised squared range x = r²/σ² using the given (or
/// automatically selected) representation.
inline RangeDensityEval normalized_range_sq_density(double x, double tol,
                                                    std::optional<Representation> forced = {},
                                                    double threshold = kDefaultRangeThreshold) {
  if (!(x > 0.0) || !std::isfinite(x) || !(tol > 0.0))
    throw std::domain_error("range density: requires finite x > 0 and tol > 0");
  const Representation rep = forced.value_or(range_series::select(x, threshold));
  const double log_lead = range_series::log_leading(rep, x);

  RangeDensityEval out;
  out.representation = rep;
  double prev_sum = 1.0;
  double sum = 1.0;
  double prev_term = 1.0;
  for (int k = 1; k <= kMaxSeriesTerms; ++k) {
    const double tk = range_series::term(rep, k, x);
    prev_sum = sum;
    sum += (k % 2 == 1) ? -tk : tk;
    out.terms_used = k + 1;
    const bool decreasing = tk <= prev_term;
    prev_term = tk;
    const double lo = std::min(sum, prev_sum);
    const double hi = std::max(sum, prev_sum);
    if (decreasing && (tk == 0.0 || hi - lo <= tol * std::abs(lo))) {
      out.converged = true;
      break;
    }
  }
  const double scale = std::exp(log_lead);
  out.lower_bracket = std::max(0.0, std::min(sum, prev_sum)) * scale;
  out.upper_bracket = std::max(sum, prev_sum) * scale;
  out.value = 0.5 * (out.lower_bracket + out.upper_bracket);
  if (!out.converged) throw ConvergenceError("range density: term cap reached", out);
  return out;
}

/// Feller range density f(r | σ²), with alternating partial-sum brackets.
inline RangeDensityEval range_density(double r, double sigma2, double tol,
                                      std::optional<Representation> forced = {},
                                      double threshold = kDefaultRangeThreshold) {
  if (!(r > 0.0) || !std::isfinite(r) || !(sigma2 > 0.0) || !std::isfinite(sigma2) || !(tol > 0.0))
    throw std::domain_error("range_density: requires finite r > 0, sigma2 > 0, tol > 0");
  const double x = r * r / sigma2;
  RangeDensityEval e = normalized_range_sq_density(x, tol, forced, threshold);
  const double jac = 2.0 * r / sigma2;
  e.value *= jac;
  e.lower_bracket *= jac;
  e.upper_bracket *= jac;
  return e;
}

/// log f(r | σ²) to near machine precision (automatic representation).
inline double log_range_density(double r, double sigma2) {
  const double x = r * r / sigma2;
  const Representation rep = range_series::select(x, kDefaultRangeThreshold);
  double sum = 1.0;
  for (int k = 1; k < kMaxSeriesTerms; ++k) {
    const double tk = range_series::term(rep, k, x);
    sum += (k % 2 == 1) ? -tk : tk;
    if (tk <= 1e-17 * sum) break;
  }
  return range_series::log_leading(rep, x) + std::log(sum) + std::log(2.0 * r / sigma2);
}

/// Exact sampler for x = r²/σ².
///
/// Proposal: χ²₁ truncated to (c, ∞) with weight p/(p+q) and IG(2, π²/2)
/// truncated to (0, c] with weight q/(p+q), then the alternating series test.
class NormalizedRangeSqSampler {
 public:
  explicit NormalizedRangeSqSampler(double threshold = kDefaultRangeThreshold)
      : threshold_(threshold) {
    if (!(threshold > 4.0 / 3.0 && threshold < range_series::kPi2))
      throw std::domain_error("range sampler: threshold must lie in (4/3, pi^2)");
    p_ = std::erfc(std::sqrt(0.5 * threshold));
    const double a = 0.5 * range_series::kPi2 / threshold;
    q_ = 4.0 / range_series::kPi2 * regularized_gamma_q(2.0, a);
  }

  double threshold() const { return threshold_; }
  /// Unnormalised branch masses: p = P(χ²₁ > c), q = (4/π²) P(IG(2, π²/2) <= c).
  double weight_chi2() const { return p_; }
  double weight_invgamma() const { return q_; }

  template <Engine64 G>
  double operator()(G& rng) const {
    const double prob_chi2 = p_ / (p_ + q_);
    for (;;) {
      double x;
      Representation rep;
      if (uniform01(rng) < prob_chi2) {
        x = sample_truncated_gamma(0.5, 0.5, {threshold_, kInf}, rng);
        rep = Representation::SeriesA;
      } else {
        x = sample_truncated_invgamma(2.0, 0.5 * range_series::kPi2, {0.0, threshold_}, rng);
        rep = Representation::SeriesB;
      }
      const double u = uniform01(rng);
      if (range_series::alternating_accept(u, [&](int k) { return range_series::term(rep, k, x); }))
        return x;
    }
  }

 private:
  double threshold_;
  double p_;
  double q_;
};

template <Engine64 G>
double sample_normalized_range_sq(G& rng, double threshold = kDefaultRangeThreshold) {
  if (threshold == kDefaultRangeThreshold) {
    static const NormalizedRangeSqSampler sampler(kDefaultRangeThreshold);
    return sampler(rng);
  }
  return NormalizedRangeSqSampler(threshold)(rng);
}

/// Draw r ~ f(· | σ²) as σ √x.
template <Engine64 G>
double sample_range(double sigma2, G& rng) {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
    throw std::domain_error("sample_range: sigma2 must be positive");
  return std::sqrt(sigma2 * sample_normalized_range_sq(rng));
}

/// E(r^p | σ²) = (4/√π) Γ((p+1)/2) (1 - 4/2^p) ζ(p-1) (2σ²)^{p/2}.
///
/// (1 - 2^{2-p}) ζ(p-1) is the Dirichlet eta function at p-1, which removes
/// the 0·∞ form at p = 2 (where the moment is 4 log 2 σ²).
inline double parkinson_moment(double p, double sigma2) {
  if (!(p > 0.0) || !(sigma2 > 0.0))
    throw std::domain_error("parkinson_moment: requires p > 0 and sigma2 > 0");
  return 4.0 / std::sqrt(std::numbers::pi) * std::tgamma(0.5 * (p + 1.0)) * dirichlet_eta(p - 1.0) *
         std::pow(2.0 * sigma2, 0.5 * p);
}

/// r² / (4 log 2), unbiased for σ² under the range density.
inline double parkinson_estimator(double r) {
  return r * r / (4.0 * std::numbers::ln2);
}

}  // namespace svrg

#endif  // SVRG_RANGE_DISTRIBUTION_HPP
