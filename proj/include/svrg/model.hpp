#ifndef SVRG_MODEL_HPP
#define SVRG_MODEL_HPP

// Stochastic volatility with leverage and a range-based measurement:
//
//   y_t = σ_t ε_t,   log σ²_{t+1} = φ log σ²_t + η_t,   log σ²_1 ~ N(0, ω_ηη/(1-φ²))
//   (ε_t, η_t) ~ N(0, [[1, ω_εη], [ω_εη, ω_ηη]])
//   r_t = λ_t^{1/2} r̃_t,  r̃_t ~ range density given σ²_t,  λ_t ~ G(ν₁/2, ν₂/2)
//
// Densities below are normalised; the σ̃² = λσ² forms are the same model in
// the coordinates used by the λ update.

#include <cmath>
#include <cstddef>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "svrg/random.hpp"
#include "svrg/range_distribution.hpp"

namespace svrg {

inline constexpr double kLogTwoPi = 1.8378770664093454836;

struct SvrgParams {
  double phi = 0.95;
  double omega_en = 0.0;  // cov(ε, η); var(ε) is fixed at 1
  double omega_nn = 0.1;  // var(η)
  double nu1 = 20.0;
  double nu2 = 20.0;

  /// var(η | ε) = ω_ηη - ω_εη², the inverse of the (η, η) precision entry.
  double conditional_variance() const { return omega_nn - omega_en * omega_en; }
  double precision_nn() const { return 1.0 / conditional_variance(); }
  double precision_en() const { return -omega_en / conditional_variance(); }
  double precision_ee() const {
    const double pen = precision_en();
    return 1.0 + pen * pen / precision_nn();
  }
  /// Stationary variance of log σ²_t.
  double stationary_variance() const { return omega_nn / (1.0 - phi * phi); }

  bool valid() const {
    return std::abs(phi) < 1.0 && std::isfinite(omega_en) && conditional_variance() > 0.0 && nu1 > 0.0 &&
           nu2 > 0.0 && std::isfinite(nu1) && std::isfinite(nu2);
  }
  void validate() const {
    if (!valid()) throw std::domain_error("SvrgParams: need |phi| < 1, omega_nn > omega_en^2, nu1, nu2 > 0");
  }

  /// Inverse map from the precision entries (ω^(εη), ω^(ηη)).
  static SvrgParams with_precision(SvrgParams base, double prec_en, double prec_nn) {
    base.omega_en = -prec_en / prec_nn;
    base.omega_nn = 1.0 / prec_nn + base.omega_en * base.omega_en;
    return base;
  }
};

/// Hyperparameters. Gamma laws are written G(shape, rate).
struct Priors {
  double phi_a = 20.0;  // (φ+1)/2 ~ Be(a, b)
  double phi_b = 1.5;
  double n0 = 1.0;  // ω^(ηη) ~ G(n0/2, 1/(2 s0))
  double s0 = 5.0;
  double delta0 = 0.0;  // ω^(εη) | ω^(ηη) ~ N(δ0 ω^(ηη), γ0 ω^(ηη))
  double gamma0 = 10.0;
  double nu1_alpha = 16.0;  // ν₁ ~ G(α/2, β/2)
  double nu1_beta = 0.8;
  double nu2_alpha = 16.0;
  double nu2_beta = 0.8;

  void validate() const {
    for (double v : {phi_a, phi_b, n0, s0, gamma0, nu1_alpha, nu1_beta, nu2_alpha, nu2_beta})
      if (!(v > 0.0) || !std::isfinite(v)) throw std::domain_error("Priors: hyperparameters must be positive");
    if (!std::isfinite(delta0)) throw std::domain_error("Priors: delta0 must be finite");
  }

  double nu1_mean() const { return nu1_alpha / nu1_beta; }
  double nu2_mean() const { return nu2_alpha / nu2_beta; }

  double log_prior_phi(double phi) const {
    if (!(std::abs(phi) < 1.0)) return -kInf;
    const double u = 0.5 * (phi + 1.0);
    return (phi_a - 1.0) * std::log(u) + (phi_b - 1.0) * std::log1p(-u) - std::log(2.0) + std::lgamma(phi_a + phi_b) -
           std::lgamma(phi_a) - std::lgamma(phi_b);
  }

  /// Joint prior of the precision entries (ω^(εη), ω^(ηη)).
  double log_prior_precision(double prec_en, double prec_nn) const {
    if (!(prec_nn > 0.0)) return -kInf;
    const double shape = 0.5 * n0, rate = 0.5 / s0;
    const double lg = shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(prec_nn) - rate * prec_nn;
    const double var = gamma0 * prec_nn;
    const double d = prec_en - delta0 * prec_nn;
    return lg - 0.5 * (kLogTwoPi + std::log(var)) - 0.5 * d * d / var;
  }

  double log_prior_nu(double nu1, double nu2) const {
    auto lg = [](double x, double shape, double rate) {
      if (!(x > 0.0)) return -kInf;
      return shape * std::log(rate) - std::lgamma(shape) + (shape - 1.0) * std::log(x) - rate * x;
    };
    return lg(nu1, 0.5 * nu1_alpha, 0.5 * nu1_beta) + lg(nu2, 0.5 * nu2_alpha, 0.5 * nu2_beta);
  }

  double log_prior(const SvrgParams& p) const {
    return log_prior_phi(p.phi) + log_prior_precision(p.precision_en(), p.precision_nn()) + log_prior_nu(p.nu1, p.nu2);
  }
};

/// Daily returns and ranges in percent log units.
struct ReturnRangeSeries {
  std::vector<std::string> dates;
  std::vector<double> y;
  std::vector<double> r;
  std::vector<double> rv;  // optional realised-variance proxy, empty when absent

  std::size_t size() const { return y.size(); }

  void validate() const {
    if (r.size() != y.size() || (!dates.empty() && dates.size() != y.size()) || (!rv.empty() && rv.size() != y.size()))
      throw std::invalid_argument("ReturnRangeSeries: column lengths differ");
    for (std::size_t t = 0; t < y.size(); ++t) {
      if (!std::isfinite(y[t])) throw std::invalid_argument("ReturnRangeSeries: non-finite return at " + std::to_string(t));
      if (!(r[t] > 0.0) || !std::isfinite(r[t]))
        throw std::invalid_argument("ReturnRangeSeries: range must be positive at " + std::to_string(t));
    }
  }

  /// Rows [first, first + count).
  ReturnRangeSeries slice(std::size_t first, std::size_t count) const {
    ReturnRangeSeries out;
    auto cut = [&](const auto& v, auto& dst) {
      if (!v.empty()) dst.assign(v.begin() + first, v.begin() + first + count);
    };
    cut(dates, out.dates);
    cut(y, out.y);
    cut(r, out.r);
    cut(rv, out.rv);
    return out;
  }
};

struct LatentState {
  std::vector<double> sigma2;
  std::vector<double> lambda;

  std::size_t size() const { return sigma2.size(); }
  double sigma2_tilde(std::size_t t) const { return lambda[t] * sigma2[t]; }

  bool valid() const {
    if (lambda.size() != sigma2.size()) return false;
    for (std::size_t t = 0; t < sigma2.size(); ++t)
      if (!(sigma2[t] > 0.0) || !(lambda[t] > 0.0) || !std::isfinite(sigma2[t]) || !std::isfinite(lambda[t]))
        return false;
    return true;
  }
};

// ---------------------------------------------------------------------------
// Log densities

/// f(y_t | σ²_t) = N(0, σ²_t).
inline double log_return_density(double y, double sigma2) {
  return -0.5 * (kLogTwoPi + std::log(sigma2)) - 0.5 * y * y / sigma2;
}

/// Mean of log σ²_{t+1} given (y_t, σ²_t).
inline double transition_mean(double y, double sigma2, const SvrgParams& p) {
  return p.phi * std::log(sigma2) + p.omega_en * y / std::sqrt(sigma2);
}

/// f(σ²_{t+1} | y_t, σ²_t): log-normal with the leverage mean shift and
/// conditional variance ω_ηη - ω_εη².
inline double log_transition_density(double sigma2_next, double y, double sigma2, const SvrgParams& p) {
  const double h = std::log(sigma2_next);
  const double d = h - transition_mean(y, sigma2, p);
  const double v = p.conditional_variance();
  return -h - 0.5 * (kLogTwoPi + std::log(v)) - 0.5 * d * d / v;
}

/// f(σ²_1): log-normal at the stationary variance.
inline double log_initial_density(double sigma2, const SvrgParams& p) {
  const double h = std::log(sigma2);
  const double v = p.stationary_variance();
  return -h - 0.5 * (kLogTwoPi + std::log(v)) - 0.5 * h * h / v;
}

/// f(y_t | σ̃²_t, λ_t).
inline double log_return_density_tilde(double y, double sigma2_tilde, double lambda) {
  return log_return_density(y, sigma2_tilde / lambda);
}

/// f(σ̃²_{t+1} | y_t, λ_{t+1}, σ̃²_t, λ_t).
inline double log_transition_density_tilde(double st_next, double lambda_next, double y, double st, double lambda,
                                           const SvrgParams& p) {
  const double d = std::log(st_next) - std::log(lambda_next) - p.phi * (std::log(st) - std::log(lambda)) -
                   p.omega_en * y * std::sqrt(lambda / st);
  const double v = p.conditional_variance();
  return -std::log(st_next) - 0.5 * (kLogTwoPi + std::log(v)) - 0.5 * d * d / v;
}

/// f(σ̃²_1 | λ_1).
inline double log_initial_density_tilde(double st, double lambda, const SvrgParams& p) {
  const double d = std::log(st) - std::log(lambda);
  const double v = p.stationary_variance();
  return -std::log(st) - 0.5 * (kLogTwoPi + std::log(v)) - 0.5 * d * d / v;
}

/// f(λ_t) = G(ν₁/2, ν₂/2).
inline double log_lambda_density(double lambda, const SvrgParams& p) {
  const double a = 0.5 * p.nu1, b = 0.5 * p.nu2;
  return a * std::log(b) - std::lgamma(a) + (a - 1.0) * std::log(lambda) - b * lambda;
}

/// f(r_t | σ²_t, λ_t): r_t / λ_t^{1/2} has the range density at σ²_t, which
/// by the scale property is the range density at σ̃²_t = λ_t σ²_t.
inline double log_observed_range_density(double r, double sigma2, double lambda) {
  return log_range_density(r, lambda * sigma2);
}

/// Unnormalised log posterior of (σ², λ, φ, ω^(εη), ω^(ηη), ν) given the data.
inline double log_joint_posterior(const ReturnRangeSeries& data, const LatentState& s, const SvrgParams& p,
                                  const Priors& priors) {
  if (!p.valid() || !s.valid() || s.size() != data.size()) return -kInf;
  double lp = priors.log_prior(p) + log_initial_density(s.sigma2[0], p);
  for (std::size_t t = 0; t < data.size(); ++t) {
    lp += log_return_density(data.y[t], s.sigma2[t]);
    lp += log_observed_range_density(data.r[t], s.sigma2[t], s.lambda[t]);
    lp += log_lambda_density(s.lambda[t], p);
    if (t + 1 < data.size()) lp += log_transition_density(s.sigma2[t + 1], data.y[t], s.sigma2[t], p);
  }
  return lp;
}

// ---------------------------------------------------------------------------
// Simulation

struct SimulatedSeries {
  ReturnRangeSeries data;
  LatentState truth;
};

template <Engine64 G>
SimulatedSeries simulate_svrg(const SvrgParams& p, std::size_t n, G& rng) {
  p.validate();
  if (n < 2) throw std::domain_error("simulate_svrg: need n >= 2");
  SimulatedSeries out;
  auto& d = out.data;
  auto& s = out.truth;
  d.y.resize(n);
  d.r.resize(n);
  s.sigma2.resize(n);
  s.lambda.resize(n);
  const double cond_sd = std::sqrt(p.conditional_variance());
  double h = std::sqrt(p.stationary_variance()) * standard_normal(rng);
  for (std::size_t t = 0; t < n; ++t) {
    const double sigma2 = std::exp(h);
    const double eps = standard_normal(rng);
    const double eta = p.omega_en * eps + cond_sd * standard_normal(rng);
    s.sigma2[t] = sigma2;
    d.y[t] = std::sqrt(sigma2) * eps;
    s.lambda[t] = gamma_variate(0.5 * p.nu1, 0.5 * p.nu2, rng);
    d.r[t] = std::sqrt(s.lambda[t]) * sample_range(sigma2, rng);
    h = p.phi * h + eta;
  }
  return out;
}

}  // namespace svrg

#endif  // SVRG_MODEL_HPP
