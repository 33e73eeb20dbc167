#ifndef SVRG_VARIATES_HPP
#define SVRG_VARIATES_HPP

// Non-standard random variate generators used by the MCMC proposals:
// truncated normal, truncated gamma, and (truncated) generalized inverse
// Gaussian. Truncated gamma/GIG draws fall back to an exact rejection sampler
// on the log scale, where both densities are log-concave.

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include <boost/container/static_vector.hpp>

#include "svrg/random.hpp"
#include "svrg/special_functions.hpp"

namespace svrg {

/// Open/closed distinction is immaterial for continuous laws.
struct Interval {
  double lo = -kInf;
  double hi = kInf;

  bool contains(double v) const { return v >= lo && v <= hi; }
  static Interval positive() { return {0.0, kInf}; }
};

class TruncationError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// ---------------------------------------------------------------------------
// Truncated normal

/// Standard normal restricted to [a, b].
template <Engine64 G>
double sample_truncated_standard_normal(double a, double b, G& rng) {
  if (!(a < b)) throw TruncationError("truncated normal: empty region");
  if (b <= 0.0) return -sample_truncated_standard_normal(-b, -a, rng);
  if (a <= 0.0) {
    // region straddles the mode
    if (b - a < 2.5) {
      for (;;) {
        const double z = a + (b - a) * uniform01(rng);
        if (uniform01(rng) <= std::exp(-0.5 * z * z)) return z;
      }
    }
    for (;;) {
      const double z = standard_normal(rng);
      if (z >= a && z <= b) return z;
    }
  }
  // right tail, a > 0
  const double rate = 0.5 * (a + std::sqrt(a * a + 4.0));
  if ((b - a) * rate < 1.0) {
    for (;;) {
      const double z = a + (b - a) * uniform01(rng);
      if (uniform01(rng) <= std::exp(0.5 * (a * a - z * z))) return z;
    }
  }
  for (;;) {
    const double z = a + standard_exponential(rng) / rate;
    if (z > b) continue;
    const double d = z - rate;
    if (uniform01(rng) <= std::exp(-0.5 * d * d)) return z;
  }
}

/// N(mean, variance) restricted to `region`.
template <Engine64 G>
double sample_truncated_normal(double mean, double variance, Interval region, G& rng) {
  if (!(variance > 0.0)) throw std::domain_error("truncated normal: variance must be positive");
  const double sd = std::sqrt(variance);
  return mean + sd * sample_truncated_standard_normal((region.lo - mean) / sd,
                                                      (region.hi - mean) / sd, rng);
}

// ---------------------------------------------------------------------------
// Exact rejection from a piecewise-exponential tangent envelope, for a concave
// log density phi on [lo, hi] (either end may be infinite).

class TangentEnvelope {
 public:
  static constexpr std::size_t kMaxPoints = 8;
  using Points = boost::container::static_vector<double, kMaxPoints>;

  struct Piece {
    double left, right;   // support of the piece
    double anchor;        // tangent point
    double value, slope;  // phi(anchor), phi'(anchor)
    double log_mass;
  };

  template <class Phi, class DPhi>
  TangentEnvelope(Phi&& phi, DPhi&& dphi, double lo, double hi, Points points) {
    std::sort(points.begin(), points.end());
    points.erase(std::unique(points.begin(), points.end()), points.end());
    Points v, d;
    for (double p : points) {
      v.push_back(phi(p));
      d.push_back(dphi(p));
    }
    if (std::isinf(lo) && !(d.front() > 0.0))
      throw TruncationError("tangent envelope: left tail not integrable");
    if (std::isinf(hi) && !(d.back() < 0.0))
      throw TruncationError("tangent envelope: right tail not integrable");

    double left = lo;
    for (std::size_t i = 0; i < points.size(); ++i) {
      double right = hi;
      if (i + 1 < points.size()) {
        const double dd = d[i] - d[i + 1];
        right = dd > 1e-300
                    ? (v[i + 1] - v[i] + points[i] * d[i] - points[i + 1] * d[i + 1]) / dd
                    : 0.5 * (points[i] + points[i + 1]);
        right = std::clamp(right, std::max(left, points[i]), points[i + 1]);
      }
      Piece pc{left, right, points[i], v[i], d[i], 0.0};
      pc.log_mass = piece_log_mass(pc);
      pieces_.push_back(pc);
      left = right;
    }
    max_log_mass_ = -kInf;
    for (const auto& pc : pieces_) max_log_mass_ = std::max(max_log_mass_, pc.log_mass);
    if (!std::isfinite(max_log_mass_)) throw TruncationError("tangent envelope: region has no mass");
    double acc = 0.0;
    for (const auto& pc : pieces_) {
      acc += std::exp(pc.log_mass - max_log_mass_);
      cumulative_.push_back(acc);
    }
  }

  /// log of the envelope integral (an upper bound on the region mass).
  double log_mass() const { return max_log_mass_ + std::log(cumulative_.back()); }

  template <class Phi, Engine64 G>
  double sample(Phi&& phi, G& rng, int max_tries = 100000) const {
    for (int k = 0; k < max_tries; ++k) {
      const double u = uniform01(rng) * cumulative_.back();
      std::size_t i = 0;
      while (i + 1 < cumulative_.size() && cumulative_[i] < u) ++i;
      const Piece& pc = pieces_[i];
      const double s = draw_in_piece(pc, uniform01(rng));
      const double envelope = pc.value + pc.slope * (s - pc.anchor);
      if (std::log(uniform01(rng)) <= phi(s) - envelope) return s;
    }
    throw TruncationError("tangent envelope: rejection sampler did not terminate");
  }

 private:
  static double piece_log_mass(const Piece& pc) {
    const double width = pc.right - pc.left;
    if (!(width > 0.0)) return -kInf;
    const double d = pc.slope;
    if (std::abs(d) * (std::isinf(width) ? 1.0 : width) < 1e-12 && !std::isinf(width))
      return pc.value + std::log(width);
    // integrate exp(value + d (s - anchor)) from left to right, anchored at the
    // endpoint where the exponent is largest
    if (d > 0.0) {
      const double top = pc.value + d * (pc.right - pc.anchor);
      return top + std::log(-std::expm1(-d * width)) - std::log(d);
    }
    const double top = pc.value + d * (pc.left - pc.anchor);
    return top + std::log(-std::expm1(d * width)) - std::log(-d);
  }

  static double draw_in_piece(const Piece& pc, double u) {
    const double width = pc.right - pc.left;
    const double d = pc.slope;
    if (!std::isinf(width) && std::abs(d) * width < 1e-12) return pc.left + u * width;
    if (d > 0.0) return pc.right + std::log1p(u * std::expm1(-d * width)) / d;
    return pc.left + std::log1p(u * std::expm1(d * width)) / d;
  }

  boost::container::static_vector<Piece, kMaxPoints> pieces_;
  Points cumulative_;
  double max_log_mass_;
};

namespace detail {

/// Abscissae for a tangent envelope on [lo, hi] around mode m with width w.
inline TangentEnvelope::Points envelope_points(double lo, double hi, double m, double w,
                                              double slope_lo, double slope_hi) {
  TangentEnvelope::Points pts;
  auto add = [&](double p) {
    if (std::isfinite(p) && p >= lo && p <= hi) pts.push_back(p);
  };
  add(lo);
  add(hi);
  add(m);
  add(m - 1.5 * w);
  add(m + 1.5 * w);
  // a mode just outside the region leaves a nearly flat edge; keep the extra
  // point within a few widths so the envelope stays finite
  if (m < lo) add(lo + std::min(1.0 / std::abs(slope_lo), 1.5 * w));
  if (m > hi) add(hi - std::min(1.0 / std::abs(slope_hi), 1.5 * w));
  return pts;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Truncated gamma

/// Gamma(shape, rate) restricted to `region` ⊂ (0, ∞).
///
/// When the region is one-sided and contains the mode of log X, at least a
/// fraction 1/e of the mass lies inside it and plain rejection is used;
/// otherwise an exact tangent-envelope sampler on s = log x.
template <Engine64 G>
double sample_truncated_gamma(double shape, double rate, Interval region, G& rng) {
  if (!(shape > 0.0) || !(rate > 0.0))
    throw std::domain_error("truncated gamma: shape and rate must be positive");
  const double lo = std::max(region.lo, 0.0);
  const double hi = region.hi;
  if (!(lo < hi)) throw TruncationError("truncated gamma: empty region");
  if (lo == 0.0 && std::isinf(hi)) return gamma_variate(shape, rate, rng);

  const double s_lo = lo > 0.0 ? std::log(lo) : -kInf;
  const double s_hi = std::log(hi);
  const double s_mode = std::log(shape / rate);
  const bool one_sided = lo == 0.0 || std::isinf(hi);
  if (one_sided && s_mode >= s_lo && s_mode <= s_hi) {
    for (int k = 0; k < 200; ++k) {
      const double x = gamma_variate(shape, rate, rng);
      if (x >= lo && x <= hi) return x;
    }
  }
  auto phi = [=](double s) { return shape * s - rate * std::exp(s); };
  auto dphi = [=](double s) { return shape - rate * std::exp(s); };
  const double w = 1.0 / std::sqrt(shape);
  const TangentEnvelope env(phi, dphi, s_lo, s_hi,
                            detail::envelope_points(s_lo, s_hi, s_mode, w, dphi(s_lo), dphi(s_hi)));
  return std::exp(env.sample(phi, rng));
}

/// Inverse gamma IG(shape, scale): density ∝ x^{-shape-1} e^{-scale/x}.
template <Engine64 G>
double sample_invgamma(double shape, double scale, G& rng) {
  return scale / standard_gamma(shape, rng);
}

/// Inverse gamma restricted to `region` ⊂ (0, ∞), via the reciprocal gamma.
template <Engine64 G>
double sample_truncated_invgamma(double shape, double scale, Interval region, G& rng) {
  const double lo = std::max(region.lo, 0.0);
  const Interval recip{std::isinf(region.hi) ? 0.0 : 1.0 / region.hi, lo > 0.0 ? 1.0 / lo : kInf};
  return 1.0 / sample_truncated_gamma(shape, scale, recip, rng);
}

// ---------------------------------------------------------------------------
// Generalized inverse Gaussian

/// GIG(ν, δ, γ): density ∝ x^{ν-1} exp{-(δ²/x + γ² x)/2} on x > 0.
struct GigParams {
  double nu;
  double delta;
  double gamma;

  void validate() const {
    if (!std::isfinite(nu) || !(delta >= 0.0) || !(gamma >= 0.0) || !std::isfinite(delta) ||
        !std::isfinite(gamma))
      throw std::domain_error("GIG: parameters must be finite with delta, gamma >= 0");
    if (delta == 0.0 && gamma == 0.0) throw std::domain_error("GIG: delta and gamma both zero");
    if (nu <= 0.0 && !(delta > 0.0)) throw std::domain_error("GIG: nu <= 0 requires delta > 0");
    if (nu >= 0.0 && !(gamma > 0.0)) throw std::domain_error("GIG: nu >= 0 requires gamma > 0");
  }

  /// log density kernel in s = log x (Jacobian included).
  double log_kernel_log_scale(double s) const {
    return nu * s - 0.5 * (delta * delta * std::exp(-s) + gamma * gamma * std::exp(s));
  }
  double dlog_kernel_log_scale(double s) const {
    return nu + 0.5 * (delta * delta * std::exp(-s) - gamma * gamma * std::exp(s));
  }
  /// Maximiser of log_kernel_log_scale.
  double log_scale_mode() const {
    const double d2 = delta * delta, g2 = gamma * gamma;
    if (d2 == 0.0) return std::log(2.0 * nu / g2);
    if (g2 == 0.0) return std::log(d2 / (-2.0 * nu));
    const double disc = std::sqrt(nu * nu + g2 * d2);
    return nu >= 0.0 ? std::log((nu + disc) / g2) : std::log(d2 / (disc - nu));
  }
};

namespace detail {

inline double gig_mode_standard(double lambda, double omega) {
  if (lambda >= 1.0)
    return (std::sqrt((lambda - 1.0) * (lambda - 1.0) + omega * omega) + (lambda - 1.0)) / omega;
  return omega / (std::sqrt((1.0 - lambda) * (1.0 - lambda) + omega * omega) + (1.0 - lambda));
}

// The three generators below draw from the standardised kernel
// y^{λ-1} exp{-ω(y + 1/y)/2}, λ >= 0, following Hörmann & Leydold (2014).

template <Engine64 G>
double gig_rou_shift(double lambda, double omega, G& rng) {
  const double t = 0.5 * (lambda - 1.0);
  const double s = 0.25 * omega;
  const double xm = gig_mode_standard(lambda, omega);
  const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);

  // extremes of (x - xm) sqrt(f(x)) from the depressed cubic
  const double a = -(2.0 * (lambda + 1.0) / omega + xm);
  const double b = (2.0 * (lambda - 1.0) * xm / omega - 1.0);
  const double c = xm;
  const double p = b - a * a / 3.0;
  const double q = (2.0 * a * a * a) / 27.0 - (a * b) / 3.0 + c;
  const double fi = std::acos(std::clamp(-q / (2.0 * std::sqrt(-(p * p * p) / 27.0)), -1.0, 1.0));
  const double fak = 2.0 * std::sqrt(-p / 3.0);
  const double y1 = fak * std::cos(fi / 3.0) - a / 3.0;
  const double y2 = fak * std::cos(fi / 3.0 + 4.0 / 3.0 * std::numbers::pi) - a / 3.0;
  const double uplus = (y1 - xm) * std::exp(t * std::log(y1) - s * (y1 + 1.0 / y1) - nc);
  const double uminus = (y2 - xm) * std::exp(t * std::log(y2) - s * (y2 + 1.0 / y2) - nc);

  for (;;) {
    const double u = uminus + uniform01(rng) * (uplus - uminus);
    const double v = uniform01(rng);
    const double x = u / v + xm;
    if (x <= 0.0) continue;
    if (std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc) return x;
  }
}

template <Engine64 G>
double gig_rou_noshift(double lambda, double omega, G& rng) {
  const double t = 0.5 * (lambda - 1.0);
  const double s = 0.25 * omega;
  const double xm = gig_mode_standard(lambda, omega);
  const double nc = t * std::log(xm) - s * (xm + 1.0 / xm);
  const double ym = ((lambda + 1.0) + std::sqrt((lambda + 1.0) * (lambda + 1.0) + omega * omega)) / omega;
  const double um = std::exp(0.5 * (lambda + 1.0) * std::log(ym) - s * (ym + 1.0 / ym) - nc);
  for (;;) {
    const double u = um * uniform01(rng);
    const double v = uniform01(rng);
    const double x = u / v;
    if (std::log(v) <= t * std::log(x) - s * (x + 1.0 / x) - nc) return x;
  }
}

template <Engine64 G>
double gig_concave_hat(double lambda, double omega, G& rng) {
  // 0 <= lambda < 1, small omega: three-piece hat
  const double xm = gig_mode_standard(lambda, omega);
  const double x0 = omega / (1.0 - lambda);
  const double k0 = std::exp((lambda - 1.0) * std::log(xm) - 0.5 * omega * (xm + 1.0 / xm));
  double area[3];
  double k1, k2;
  area[0] = k0 * x0;
  if (x0 >= 2.0 / omega) {
    k1 = 0.0;
    area[1] = 0.0;
    k2 = std::pow(x0, lambda - 1.0);
    area[2] = k2 * 2.0 * std::exp(-omega * x0 / 2.0) / omega;
  } else {
    k1 = std::exp(-omega);
    area[1] = lambda == 0.0 ? k1 * std::log(2.0 / (omega * omega))
                            : k1 / lambda * (std::pow(2.0 / omega, lambda) - std::pow(x0, lambda));
    k2 = std::pow(2.0 / omega, lambda - 1.0);
    area[2] = k2 * 2.0 * std::exp(-1.0) / omega;
  }
  const double total = area[0] + area[1] + area[2];
  for (;;) {
    double v = total * uniform01(rng);
    double x, hx;
    if (v <= area[0]) {
      x = x0 * v / area[0];
      hx = k0;
    } else if ((v -= area[0]) <= area[1]) {
      if (lambda == 0.0) {
        x = omega * std::exp(std::exp(omega) * v);
        hx = k1 / x;
      } else {
        x = std::pow(std::pow(x0, lambda) + (lambda / k1 * v), 1.0 / lambda);
        hx = k1 * std::pow(x, lambda - 1.0);
      }
    } else {
      v -= area[1];
      const double a = std::max(x0, 2.0 / omega);
      x = -2.0 / omega * std::log(std::exp(-omega / 2.0 * a) - omega / (2.0 * k2) * v);
      hx = k2 * std::exp(-omega / 2.0 * x);
    }
    const double u = uniform01(rng) * hx;
    if (std::log(u) <= (lambda - 1.0) * std::log(x) - omega / 2.0 * (x + 1.0 / x)) return x;
  }
}

}  // namespace detail

/// Exact draw from GIG(ν, δ, γ).
template <Engine64 G>
double sample_gig(const GigParams& p, G& rng) {
  p.validate();
  if (p.delta == 0.0) return gamma_variate(p.nu, 0.5 * p.gamma * p.gamma, rng);
  if (p.gamma == 0.0) return sample_invgamma(-p.nu, 0.5 * p.delta * p.delta, rng);

  const double omega = p.delta * p.gamma;
  const double alpha = p.delta / p.gamma;
  const double lambda = std::abs(p.nu);
  double y;
  if (omega < 1e-12) {
    // kernel is numerically a gamma/inverse gamma in this regime
    y = lambda > 0.0 ? gamma_variate(lambda, 0.5 * omega, rng) : detail::gig_concave_hat(0.0, omega, rng);
  } else if (lambda > 2.0 || omega > 3.0) {
    y = detail::gig_rou_shift(lambda, omega, rng);
  } else if (lambda >= 1.0 - 2.25 * omega * omega || omega > 0.2) {
    y = detail::gig_rou_noshift(lambda, omega, rng);
  } else {
    y = detail::gig_concave_hat(lambda, omega, rng);
  }
  return p.nu < 0.0 ? alpha / y : alpha * y;
}

/// GIG restricted to `region` ⊂ (0, ∞).
///
/// A one-sided region containing the mode of log X holds at least 1/e of the
/// mass and is handled by rejection; anything else goes through the exact
/// tangent-envelope sampler on the log scale.
template <Engine64 G>
double sample_truncated_gig(const GigParams& p, Interval region, G& rng) {
  p.validate();
  const double lo = std::max(region.lo, 0.0);
  const double hi = region.hi;
  if (!(lo < hi)) throw TruncationError("truncated GIG: empty region");
  if (lo == 0.0 && std::isinf(hi)) return sample_gig(p, rng);

  const double s_lo = lo > 0.0 ? std::log(lo) : -kInf;
  const double s_hi = std::log(hi);
  const double s_mode = p.log_scale_mode();
  const bool one_sided = lo == 0.0 || std::isinf(hi);
  if (one_sided && s_mode >= s_lo && s_mode <= s_hi) {
    for (int k = 0; k < 200; ++k) {
      const double x = sample_gig(p, rng);
      if (x >= lo && x <= hi) return x;
    }
  }
  auto phi = [&](double s) { return p.log_kernel_log_scale(s); };
  auto dphi = [&](double s) { return p.dlog_kernel_log_scale(s); };
  const double curv = 0.5 * (p.delta * p.delta * std::exp(-s_mode) + p.gamma * p.gamma * std::exp(s_mode));
  const double w = 1.0 / std::sqrt(curv);
  const double slo = std::isfinite(s_lo) ? dphi(s_lo) : 0.0;
  const double shi = std::isfinite(s_hi) ? dphi(s_hi) : 0.0;
  const TangentEnvelope env(phi, dphi, s_lo, s_hi,
                            detail::envelope_points(s_lo, s_hi, s_mode, w, slo, shi));
  return std::exp(env.sample(phi, rng));
}

}  // namespace svrg

#endif  // SVRG_VARIATES_HPP
