#ifndef SVRG_MCMC_HPP
#define SVRG_MCMC_HPP

// Metropolis-within-Gibbs sampler: single-site σ² and λ updates with exact
// range-likelihood proposals, then φ, Ω and ν.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <iomanip>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "svrg/model.hpp"
#include "svrg/random.hpp"
#include "svrg/range_distribution.hpp"
#include "svrg/special_functions.hpp"
#include "svrg/variates.hpp"

namespace svrg {

struct McmcConfig {
  std::size_t n_burnin = 1000;
  std::size_t n_draws = 10000;
  std::uint64_t seed = 1;
  /// Split point of the σ² proposal as a multiple of r̃²_t; must lie in (1/π², 3/4).
  double range_threshold = 0.4;
  /// Proposal attempts per site before the site is left unchanged.
  int max_proposal_tries = 1000;
  int newton_max_iter = 100;
  /// Store every k-th latent path after burn-in; 0 stores none.
  std::size_t latent_thin = 0;

  void validate() const {
    if (n_draws == 0) throw std::invalid_argument("McmcConfig: n_draws must be positive");
    if (!(range_threshold > 1.0 / range_series::kPi2 && range_threshold < 0.75))
      throw std::invalid_argument("McmcConfig: range_threshold must lie in (1/pi^2, 3/4)");
    if (max_proposal_tries <= 0 || newton_max_iter <= 0)
      throw std::invalid_argument("McmcConfig: retry caps must be positive");
  }
};

struct BlockStats {
  std::uint64_t proposed = 0;
  std::uint64_t accepted = 0;
  std::uint64_t stalls = 0;

  double acceptance_rate() const { return proposed == 0 ? 0.0 : double(accepted) / double(proposed); }
};

struct SamplerStats {
  BlockStats sigma2, lambda, phi, omega, nu;
  std::uint64_t newton_fallbacks = 0;
};

/// Log-scale Gaussian approximation of the smooth part of a latent
/// conditional, and its moment-matched (inverse) gamma.
struct ProposalMoments {
  double centre = 0.0;              // Taylor expansion point on the log scale
  double forward_precision = 0.0;   // from the t -> t+1 transition; 0 when absent or flat
  double forward_mean = 0.0;
  double backward_precision = 0.0;  // from the t-1 -> t transition (or the stationary law)
  double backward_mean = 0.0;
  double m = 0.0;
  double s = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
};

/// Two-branch proposal for σ²_t: inverse gamma below the split, GIG above.
struct SigmaMixtureProposal {
  double nu1 = 0.0, delta1 = 0.0;
  double nu2 = 0.0, delta2 = 0.0, gamma2 = 0.0;
  double log_p = 0.0, log_q = 0.0;
  double split = 0.0;
  double range_tilde = 0.0;

  double prob_invgamma() const { return 1.0 / (1.0 + std::exp(log_q - log_p)); }
};

struct PosteriorDraws {
  std::vector<SvrgParams> params;
  std::vector<double> sigma2_next;  // predictive σ²_{n+1}
  std::vector<LatentState> latent;
  std::vector<std::size_t> latent_iteration;
  SamplerStats stats;

  std::size_t size() const { return params.size(); }
};

class SvrgSampler {
 public:
  SvrgSampler(ReturnRangeSeries data, Priors priors, McmcConfig config)
      : data_(std::move(data)), priors_(priors), cfg_(config), rng_(config.seed) {
    data_.validate();
    priors_.validate();
    cfg_.validate();
    n_ = data_.size();
    if (n_ < 2) throw std::invalid_argument("SvrgSampler: need at least two observations");
    h_.resize(n_);
    inv_sd_.resize(n_);
    lambda_.assign(n_, 1.0);
    for (std::size_t t = 0; t < n_; ++t) set_log_sigma2(t, std::log(parkinson_estimator(data_.r[t])));
    params_.phi = 0.95;
    params_.omega_en = 0.0;
    params_.omega_nn = 0.1;
    params_.nu1 = priors_.nu1_mean();
    params_.nu2 = priors_.nu2_mean();
  }

  // -- state ---------------------------------------------------------------

  const ReturnRangeSeries& data() const { return data_; }
  const SvrgParams& params() const { return params_; }
  const SamplerStats& stats() const { return stats_; }
  const McmcConfig& config() const { return cfg_; }
  std::size_t size() const { return n_; }
  Rng& rng() { return rng_; }

  LatentState latent() const {
    LatentState s;
    s.sigma2.resize(n_);
    for (std::size_t t = 0; t < n_; ++t) s.sigma2[t] = std::exp(h_[t]);
    s.lambda = lambda_;
    return s;
  }
  double sigma2(std::size_t t) const { return std::exp(h_[t]); }
  double lambda(std::size_t t) const { return lambda_[t]; }

  void set_params(const SvrgParams& p) {
    p.validate();
    params_ = p;
  }
  void set_latent(const LatentState& s) {
    if (s.size() != n_ || !s.valid()) throw std::invalid_argument("set_latent: invalid state");
    for (std::size_t t = 0; t < n_; ++t) set_log_sigma2(t, std::log(s.sigma2[t]));
    lambda_ = s.lambda;
  }

  double log_posterior() const { return log_joint_posterior(data_, latent(), params_, priors_); }

  // -- proposal builders ---------------------------------------------------

  /// Gaussian approximation in h = log σ²_t, expanded at the Parkinson
  /// centre of the bias-corrected range, matched to an inverse gamma.
  ProposalMoments sigma2_moments(std::size_t t) const {
    const double rt2 = range_tilde_sq(t);
    ProposalMoments pm;
    pm.centre = std::log(rt2 / (4.0 * std::numbers::ln2));
    const Transition tr = transition(t);
    pm.backward_precision = tr.back_prec;
    pm.backward_mean = tr.back_mean;
    if (tr.forward) {
      // σ_t^{-1} ≈ e^{-c/2}(1 - (h - c)/2)
      const double ec = std::exp(-0.5 * pm.centre);
      const double slope = params_.phi - 0.5 * params_.omega_en * ec * data_.y[t];
      const double offset = tr.next_h - params_.omega_en * (1.0 + 0.5 * pm.centre) * ec * data_.y[t];
      pm.forward_precision = slope * slope * tr.prec;
      pm.forward_mean = pm.forward_precision > 0.0 ? offset / slope : 0.0;
    }
    combine(pm);
    const MomentMatch mm = match_lognormal_to_invgamma(pm.m, pm.s);
    pm.alpha = mm.alpha;
    pm.beta = mm.beta;
    return pm;
  }

  SigmaMixtureProposal sigma2_proposal(std::size_t t, const ProposalMoments& pm) const {
    SigmaMixtureProposal sp;
    const double rt2 = range_tilde_sq(t);
    const double y2 = data_.y[t] * data_.y[t];
    sp.range_tilde = std::sqrt(rt2);
    sp.split = cfg_.range_threshold * rt2;
    sp.nu1 = pm.alpha + 1.0;
    sp.delta1 = rt2 + y2 + 2.0 * pm.beta;
    sp.nu2 = 1.5 - pm.alpha;
    sp.delta2 = std::sqrt(y2 + 2.0 * pm.beta);
    sp.gamma2 = std::numbers::pi / sp.range_tilde;
    sp.log_p = -0.5 * kLogTwoPi - sp.nu1 * std::log(0.5 * sp.delta1) +
               log_upper_incomplete_gamma(sp.nu1, 0.5 * sp.delta1 / sp.split);
    sp.log_q = 2.0 * std::log(std::numbers::pi) - 5.0 * std::log(sp.range_tilde) + sp.nu2 * std::log(sp.split) +
               log_incomplete_bessel_k_fixed(-sp.nu2, 0.5 * cfg_.range_threshold * range_series::kPi2,
                                       0.5 * sp.delta2 * sp.delta2 / sp.split);
    return sp;
  }
  SigmaMixtureProposal sigma2_proposal(std::size_t t) const { return sigma2_proposal(t, sigma2_moments(t)); }

  /// Gaussian approximation in log λ_t with σ̃²_t held fixed, matched to a gamma.
  ProposalMoments lambda_moments(std::size_t t) const {
    ProposalMoments pm;
    const double nu1 = params_.nu1, nu2 = params_.nu2;
    pm.centre = nu1 > 2.0 ? std::log((0.5 * nu1 - 1.0) / (0.5 * nu2)) : std::log(nu1 / nu2);
    const double log_st = h_[t] + std::log(lambda_[t]);
    const Transition tr = transition(t);
    // in x = log λ_t the state is h_t = log σ̃²_t - x
    pm.backward_precision = tr.back_prec;
    pm.backward_mean = log_st - tr.back_mean;
    if (tr.forward) {
      // σ_t^{-1} = λ^{1/2}/σ̃_t ≈ e^{c/2}(1 + (x - c)/2)/σ̃_t
      const double ec = std::exp(0.5 * pm.centre - 0.5 * log_st);
      const double slope = params_.phi - 0.5 * params_.omega_en * ec * data_.y[t];
      const double offset =
          tr.next_h - params_.phi * log_st - params_.omega_en * data_.y[t] * ec * (1.0 - 0.5 * pm.centre);
      pm.forward_precision = slope * slope * tr.prec;
      pm.forward_mean = pm.forward_precision > 0.0 ? -offset / slope : 0.0;
    }
    combine(pm);
    const MomentMatch mm = match_lognormal_to_gamma(pm.m, pm.s);
    pm.alpha = mm.alpha;
    pm.beta = mm.beta;
    return pm;
  }

  /// Gamma proposal (shape, rate) for λ_t.
  std::array<double, 2> lambda_proposal(std::size_t t, const ProposalMoments& pm) const {
    const double st = std::exp(h_[t]) * lambda_[t];
    const double y = data_.y[t];
    return {0.5 * (params_.nu1 + 1.0 + 2.0 * pm.alpha), 0.5 * (params_.nu2 + y * y / st + 2.0 * pm.beta)};
  }

  /// Truncated-normal proposal (mean, variance) for φ.
  std::array<double, 2> phi_proposal() const {
    const double prec = params_.precision_nn();
    double shh = 0.0, shn = 0.0;
    for (std::size_t t = 0; t + 1 < n_; ++t) {
      shh += h_[t] * h_[t];
      shn += h_[t] * (h_[t + 1] - params_.omega_en * data_.y[t] * inv_sd_[t]);
    }
    const double var = 1.0 / (prec * shh);
    return {var * prec * shn, var};
  }

  /// Normal-gamma posterior of the precision entries ignoring the stationary term.
  struct OmegaPosterior {
    double n1, s1, delta1, gamma1;
  };
  OmegaPosterior omega_posterior() const {
    double xee = 0.0, xen = 0.0, xnn = 0.0;
    for (std::size_t t = 0; t + 1 < n_; ++t) {
      const double e = data_.y[t] * inv_sd_[t];
      const double eta = h_[t + 1] - params_.phi * h_[t];
      xee += e * e;
      xen += e * eta;
      xnn += eta * eta;
    }
    OmegaPosterior op;
    op.n1 = priors_.n0 + double(n_ - 1);
    op.gamma1 = 1.0 / (xee + 1.0 / priors_.gamma0);
    op.delta1 = op.gamma1 * (priors_.delta0 / priors_.gamma0 - xen);
    op.s1 = 1.0 / (1.0 / priors_.s0 + xnn + priors_.delta0 * priors_.delta0 / priors_.gamma0 -
                   op.delta1 * op.delta1 / op.gamma1);
    return op;
  }

  /// Log conditional of θ = (log ν₁, log ν₂) given λ, up to a constant, with
  /// gradient and Hessian.
  struct NuObjective {
    double value;
    std::array<double, 2> grad;
    std::array<double, 4> hess;  // row-major
  };
  NuObjective nu_objective(double th1, double th2) const {
    double sum_log = 0.0, sum = 0.0;
    for (double l : lambda_) {
      sum_log += std::log(l);
      sum += l;
    }
    return nu_objective(th1, th2, sum_log, sum);
  }

  // -- blocks --------------------------------------------------------------

  void update_sigma2_site(std::size_t t) {
    BlockStats& st = stats_.sigma2;
    ++st.proposed;
    const ProposalMoments pm = sigma2_moments(t);
    const SigmaMixtureProposal sp = sigma2_proposal(t, pm);
    const double p_ig = sp.prob_invgamma();
    const double x_scale = sp.range_tilde * sp.range_tilde;
    std::optional<double> cand;
    for (int k = 0; k < cfg_.max_proposal_tries && !cand; ++k) {
      const bool ig = uniform01(rng_) < p_ig;
      const double s2 = ig ? sample_truncated_invgamma(sp.nu1, 0.5 * sp.delta1, {0.0, sp.split}, rng_)
                           : sample_truncated_gig({sp.nu2, sp.delta2, sp.gamma2}, {sp.split, kInf}, rng_);
      const auto rep = ig ? Representation::SeriesA : Representation::SeriesB;
      const double x = x_scale / s2;
      const double u = uniform01(rng_);
      if (range_series::alternating_accept(u, [&](int j) { return range_series::term(rep, j, x); })) cand = s2;
    }
    if (!cand) {
      ++st.stalls;
      return;
    }
    const Transition tr = transition(t);
    const double hc = std::log(*cand);
    auto log_weight = [&](double h) {
      // g(σ²) over the inverse-gamma kernel, both on the σ² scale
      return -h + tr(h, params_) + (pm.alpha + 1.0) * h + pm.beta * std::exp(-h);
    };
    if (std::log(uniform01(rng_)) <= log_weight(hc) - log_weight(h_[t])) {
      set_log_sigma2(t, hc);
      ++st.accepted;
    }
  }

  void update_lambda_site(std::size_t t) {
    BlockStats& st = stats_.lambda;
    ++st.proposed;
    const ProposalMoments pm = lambda_moments(t);
    const auto [shape, rate] = lambda_proposal(t, pm);
    const double cand = gamma_variate(shape, rate, rng_);
    if (!(cand > 0.0) || !std::isfinite(cand)) {
      ++st.stalls;
      return;
    }
    const double log_st = h_[t] + std::log(lambda_[t]);
    const Transition tr = transition(t);
    auto log_weight = [&](double lam) {
      const double x = std::log(lam);
      return -x + tr(log_st - x, params_) - (pm.alpha - 1.0) * x + pm.beta * lam;
    };
    if (std::log(uniform01(rng_)) <= log_weight(cand) - log_weight(lambda_[t])) {
      lambda_[t] = cand;
      set_log_sigma2(t, log_st - std::log(cand));
      ++st.accepted;
    }
  }

  void update_sigma2() {
    for (std::size_t t = 0; t < n_; ++t) update_sigma2_site(t);
  }
  void update_lambda() {
    for (std::size_t t = 0; t < n_; ++t) update_lambda_site(t);
  }

  void update_phi() {
    ++stats_.phi.proposed;
    const auto [mean, var] = phi_proposal();
    const double cand = sample_truncated_normal(mean, var, {-1.0, 1.0}, rng_);
    if (!(std::abs(cand) < 1.0)) return;
    auto log_weight = [&](double phi) {
      return priors_.log_prior_phi(phi) + log_stationary(h_[0], params_.omega_nn / (1.0 - phi * phi));
    };
    if (std::log(uniform01(rng_)) <= log_weight(cand) - log_weight(params_.phi)) {
      params_.phi = cand;
      ++stats_.phi.accepted;
    }
  }

  void update_omega() {
    ++stats_.omega.proposed;
    const OmegaPosterior op = omega_posterior();
    const double prec_nn = gamma_variate(0.5 * op.n1, 0.5 / op.s1, rng_);
    const double prec_en = normal_variate(prec_nn * op.delta1, op.gamma1 * prec_nn, rng_);
    const SvrgParams cand = SvrgParams::with_precision(params_, prec_en, prec_nn);
    if (!cand.valid()) return;
    const double one_minus = 1.0 - params_.phi * params_.phi;
    const double log_ratio =
        log_stationary(h_[0], cand.omega_nn / one_minus) - log_stationary(h_[0], params_.omega_nn / one_minus);
    if (std::log(uniform01(rng_)) <= log_ratio) {
      params_ = cand;
      ++stats_.omega.accepted;
    }
  }

  void update_nu() {
    ++stats_.nu.proposed;
    double sum_log = 0.0, sum = 0.0;
    for (double l : lambda_) {
      sum_log += std::log(l);
      sum += l;
    }
    const std::array<double, 2> cur{std::log(params_.nu1), std::log(params_.nu2)};
    auto obj = [&](const std::array<double, 2>& th) { return nu_objective(th[0], th[1], sum_log, sum); };

    // damped Newton: the objective is concave near its mode but not along
    // the whole ridge between ν₁ and ν₂, so the Hessian is shifted until
    // negative definite away from it
    std::array<double, 2> th = cur;
    NuObjective f = obj(th);
    bool converged = false;
    for (int it = 0; it < cfg_.newton_max_iter; ++it) {
      const auto full = newton_step(f, 0.0);
      // Newton decrement: predicted gain in log density from the full step
      const bool flat = full && f.grad[0] * (*full)[0] + f.grad[1] * (*full)[1] < 1e-8;
      if (flat) {
        converged = true;
        break;
      }
      double damping = full ? 0.0 : 1e-3 * std::max(std::abs(f.hess[0]), std::abs(f.hess[3]));
      auto step = full;
      while (!step) {
        step = newton_step(f, damping);
        damping *= 4.0;
      }
      double scale = 1.0;
      bool improved = false;
      for (int half = 0; half < 40; ++half, scale *= 0.5) {
        const std::array<double, 2> trial{th[0] + scale * (*step)[0], th[1] + scale * (*step)[1]};
        const NuObjective ft = obj(trial);
        if (std::isfinite(ft.value) && ft.value >= f.value) {
          th = trial;
          f = ft;
          improved = true;
          break;
        }
      }
      if (!improved) break;
    }
    auto cov = converged ? inverse_negative_hessian(f) : std::nullopt;

    const NuObjective fc = obj(cur);
    if (!cov) {
      // random-walk fallback around the current point
      ++stats_.newton_fallbacks;
      auto cov_cur = inverse_negative_hessian(fc);
      const std::array<double, 4> c = cov_cur ? *cov_cur : std::array<double, 4>{0.01, 0.0, 0.0, 0.01};
      const auto cand = gaussian_draw(cur, c);
      const NuObjective fn = obj(cand);
      if (std::log(uniform01(rng_)) <= fn.value - fc.value) accept_nu(cand);
      return;
    }
    // independence proposal at the mode; Student-t tails so a chain started
    // far from the mode is not stuck behind a vanishing q(current)
    const std::array<double, 4>& c = *cov;
    const std::array<double, 2> mean{th[0] + c[0] * f.grad[0] + c[1] * f.grad[1],
                                     th[1] + c[2] * f.grad[0] + c[3] * f.grad[1]};
    const auto z = gaussian_draw({0.0, 0.0}, c);
    const double mix = std::sqrt(kNuProposalDf / gamma_variate(0.5 * kNuProposalDf, 0.5, rng_));
    const std::array<double, 2> cand{mean[0] + mix * z[0], mean[1] + mix * z[1]};
    const NuObjective fn = obj(cand);
    const double log_ratio =
        fn.value - fc.value - (log_student_kernel(cand, mean, c) - log_student_kernel(cur, mean, c));
    if (std::log(uniform01(rng_)) <= log_ratio) accept_nu(cand);
  }

  /// One full sweep: σ², λ, then φ, Ω, ν.
  void sweep() {
    update_sigma2();
    update_lambda();
    update_phi();
    update_omega();
    update_nu();
  }

  /// Draw of σ²_{n+1} given the current state.
  double predictive_sigma2() {
    const std::size_t t = n_ - 1;
    const double mean = params_.phi * h_[t] + params_.omega_en * data_.y[t] * inv_sd_[t];
    return std::exp(normal_variate(mean, params_.conditional_variance(), rng_));
  }

 private:
  /// Quadratic pieces of the log conditional of h_t contributed by the
  /// neighbouring transitions.
  struct Transition {
    double back_prec, back_mean;
    bool forward;
    double next_h, y, prec;

    double operator()(double h, const SvrgParams& p) const {
      double v = -0.5 * back_prec * (h - back_mean) * (h - back_mean);
      if (forward) {
        const double d = next_h - p.phi * h - p.omega_en * y * std::exp(-0.5 * h);
        v -= 0.5 * prec * d * d;
      }
      return v;
    }
  };

  Transition transition(std::size_t t) const {
    Transition tr;
    tr.prec = params_.precision_nn();
    if (t == 0) {
      tr.back_prec = 1.0 / params_.stationary_variance();
      tr.back_mean = 0.0;
    } else {
      tr.back_prec = tr.prec;
      tr.back_mean = params_.phi * h_[t - 1] + params_.omega_en * data_.y[t - 1] * inv_sd_[t - 1];
    }
    tr.forward = t + 1 < n_;
    tr.next_h = tr.forward ? h_[t + 1] : 0.0;
    tr.y = data_.y[t];
    return tr;
  }

  static void combine(ProposalMoments& pm) {
    const double prec = pm.forward_precision + pm.backward_precision;
    pm.s = 1.0 / prec;
    pm.m = pm.s * (pm.forward_precision * pm.forward_mean + pm.backward_precision * pm.backward_mean);
  }

  double range_tilde_sq(std::size_t t) const { return data_.r[t] * data_.r[t] / lambda_[t]; }

  void set_log_sigma2(std::size_t t, double h) {
    h_[t] = h;
    inv_sd_[t] = std::exp(-0.5 * h);
  }

  static double log_stationary(double h1, double var) { return -0.5 * std::log(var) - 0.5 * h1 * h1 / var; }

  NuObjective nu_objective(double th1, double th2, double sum_log, double sum) const {
    const double n = double(n_);
    const double nu1 = std::exp(th1), nu2 = std::exp(th2);
    const double a1 = 0.5 * priors_.nu1_alpha, b1 = 0.5 * priors_.nu1_beta;
    const double a2 = 0.5 * priors_.nu2_alpha, b2 = 0.5 * priors_.nu2_beta;
    const double lv2 = th2 - std::numbers::ln2;
    NuObjective o;
    o.value = n * (0.5 * nu1 * lv2 - std::lgamma(0.5 * nu1)) + 0.5 * nu1 * sum_log - 0.5 * nu2 * sum + a1 * th1 -
              b1 * nu1 + a2 * th2 - b2 * nu2;
    const double inner1 = 0.5 * n * (lv2 - digamma(0.5 * nu1)) + 0.5 * sum_log - b1;
    o.grad[0] = nu1 * inner1 + a1;
    o.grad[1] = 0.5 * n * nu1 - 0.5 * nu2 * sum - b2 * nu2 + a2;
    o.hess[0] = nu1 * inner1 - 0.25 * n * nu1 * nu1 * trigamma(0.5 * nu1);
    o.hess[1] = o.hess[2] = 0.5 * n * nu1;
    o.hess[3] = -0.5 * nu2 * sum - b2 * nu2;
    return o;
  }

  static std::optional<std::array<double, 4>> inverse_negative_hessian(const NuObjective& f) {
    const double a = -f.hess[0], b = -f.hess[1], d = -f.hess[3];
    const double det = a * d - b * b;
    if (!(a > 0.0) || !(det > 0.0)) return std::nullopt;
    return std::array<double, 4>{d / det, -b / det, -b / det, a / det};
  }

  /// Ascent step -(H - damping I)^{-1} g, or nothing if that matrix is not
  /// negative definite.
  static std::optional<std::array<double, 2>> newton_step(NuObjective f, double damping) {
    f.hess[0] -= damping;
    f.hess[3] -= damping;
    auto cov = inverse_negative_hessian(f);
    if (!cov) return std::nullopt;
    const auto& c = *cov;
    return std::array<double, 2>{c[0] * f.grad[0] + c[1] * f.grad[1], c[2] * f.grad[0] + c[3] * f.grad[1]};
  }

  std::array<double, 2> gaussian_draw(const std::array<double, 2>& mean, const std::array<double, 4>& c) {
    const double l11 = std::sqrt(c[0]);
    const double l21 = c[2] / l11;
    const double l22 = std::sqrt(std::max(c[3] - l21 * l21, 0.0));
    const double z1 = standard_normal(rng_), z2 = standard_normal(rng_);
    return {mean[0] + l11 * z1, mean[1] + l21 * z1 + l22 * z2};
  }

  static double log_gaussian_kernel(const std::array<double, 2>& x, const std::array<double, 2>& mean,
                                    const std::array<double, 4>& c) {
    const double det = c[0] * c[3] - c[1] * c[2];
    const double d0 = x[0] - mean[0], d1 = x[1] - mean[1];
    return -0.5 * (c[3] * d0 * d0 - 2.0 * c[1] * d0 * d1 + c[0] * d1 * d1) / det;
  }

  static double log_student_kernel(const std::array<double, 2>& x, const std::array<double, 2>& mean,
                                   const std::array<double, 4>& c) {
    const double quad = -2.0 * log_gaussian_kernel(x, mean, c);
    return -0.5 * (kNuProposalDf + 2.0) * std::log1p(quad / kNuProposalDf);
  }

  static constexpr double kNuProposalDf = 10.0;

  void accept_nu(const std::array<double, 2>& th) {
    params_.nu1 = std::exp(th[0]);
    params_.nu2 = std::exp(th[1]);
    ++stats_.nu.accepted;
  }

  ReturnRangeSeries data_;
  Priors priors_;
  McmcConfig cfg_;
  Rng rng_;
  std::size_t n_ = 0;
  std::vector<double> h_;       // log σ²_t
  std::vector<double> inv_sd_;  // σ_t^{-1}
  std::vector<double> lambda_;
  SvrgParams params_;
  SamplerStats stats_;
};

/// Burn in, then record `n_draws` sweeps.
inline PosteriorDraws run_mcmc(const ReturnRangeSeries& data, const Priors& priors, const McmcConfig& config) {
  SvrgSampler sampler(data, priors, config);
  for (std::size_t i = 0; i < config.n_burnin; ++i) sampler.sweep();
  PosteriorDraws out;
  out.params.reserve(config.n_draws);
  out.sigma2_next.reserve(config.n_draws);
  for (std::size_t i = 0; i < config.n_draws; ++i) {
    sampler.sweep();
    out.params.push_back(sampler.params());
    out.sigma2_next.push_back(sampler.predictive_sigma2());
    if (config.latent_thin > 0 && (i + 1) % config.latent_thin == 0) {
      out.latent.push_back(sampler.latent());
      out.latent_iteration.push_back(i + 1);
    }
  }
  out.stats = sampler.stats();
  return out;
}

// ---------------------------------------------------------------------------
// Diagnostics

/// 1 + 2 Σ_{k=1}^{K} w(k/K) ρ̂(k) with the Parzen window and K = ⌊2√n⌋.
inline double inefficiency_factor(const std::vector<double>& x) {
  const std::size_t n = x.size();
  if (n < 100) throw std::invalid_argument("inefficiency_factor: need at least 100 draws");
  double mean = 0.0;
  for (double v : x) mean += v;
  mean /= double(n);
  double c0 = 0.0;
  for (double v : x) c0 += (v - mean) * (v - mean);
  if (!(c0 > 0.0)) throw std::domain_error("inefficiency_factor: constant series");
  const auto bandwidth = std::size_t(std::floor(2.0 * std::sqrt(double(n))));
  double acc = 0.0;
  for (std::size_t k = 1; k <= bandwidth && k < n; ++k) {
    const double z = double(k) / double(bandwidth);
    const double w = z <= 0.5 ? 1.0 - 6.0 * z * z + 6.0 * z * z * z : 2.0 * (1.0 - z) * (1.0 - z) * (1.0 - z);
    double ck = 0.0;
    for (std::size_t i = k; i < n; ++i) ck += (x[i] - mean) * (x[i - k] - mean);
    acc += w * ck / c0;
  }
  return 1.0 + 2.0 * acc;
}

/// Sample quantile with linear interpolation between order statistics.
inline double quantile(std::vector<double> x, double p) {
  if (x.empty()) throw std::invalid_argument("quantile: empty sample");
  std::sort(x.begin(), x.end());
  const double pos = p * double(x.size() - 1);
  const auto lo = std::size_t(std::floor(pos));
  const auto hi = std::min(lo + 1, x.size() - 1);
  return x[lo] + (pos - double(lo)) * (x[hi] - x[lo]);
}

struct ParameterSummary {
  std::string name;
  double mean, sd, lower, upper, inefficiency;
};

inline std::vector<std::pair<std::string, std::vector<double>>> parameter_columns(const PosteriorDraws& d) {
  std::vector<std::pair<std::string, std::vector<double>>> cols{
      {"phi", {}}, {"omega_en", {}}, {"omega_nn", {}}, {"nu1", {}}, {"nu2", {}}};
  for (const auto& p : d.params) {
    cols[0].second.push_back(p.phi);
    cols[1].second.push_back(p.omega_en);
    cols[2].second.push_back(p.omega_nn);
    cols[3].second.push_back(p.nu1);
    cols[4].second.push_back(p.nu2);
  }
  cols.emplace_back("sigma2_next", d.sigma2_next);
  return cols;
}

inline std::vector<ParameterSummary> summarize(const PosteriorDraws& d) {
  std::vector<ParameterSummary> out;
  for (const auto& [name, xs] : parameter_columns(d)) {
    ParameterSummary s{name, 0.0, 0.0, quantile(xs, 0.025), quantile(xs, 0.975), 0.0};
    for (double v : xs) s.mean += v;
    s.mean /= double(xs.size());
    for (double v : xs) s.sd += (v - s.mean) * (v - s.mean);
    s.sd = std::sqrt(s.sd / double(std::max<std::size_t>(xs.size() - 1, 1)));
    try {
      s.inefficiency = inefficiency_factor(xs);
    } catch (const std::exception&) {
      s.inefficiency = std::nan("");
    }
    out.push_back(s);
  }
  return out;
}

/// Plain-text run summary: posterior means, 95% intervals, inefficiency
/// factors and per-block acceptance rates.
inline std::string format_run_report(const PosteriorDraws& d) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(6);
  os << "draws " << d.size() << "\n\n";
  os << std::left << std::setw(12) << "parameter" << std::right << std::setw(14) << "mean" << std::setw(14) << "sd"
     << std::setw(14) << "q2.5" << std::setw(14) << "q97.5" << std::setw(12) << "IF" << "\n";
  for (const auto& s : summarize(d)) {
    os << std::left << std::setw(12) << s.name << std::right << std::setw(14) << s.mean << std::setw(14) << s.sd
       << std::setw(14) << s.lower << std::setw(14) << s.upper << std::setw(12) << std::setprecision(2)
       << s.inefficiency << std::setprecision(6) << "\n";
  }
  os << "\n" << std::left << std::setw(12) << "block" << std::right << std::setw(14) << "acceptance" << std::setw(12)
     << "stalls" << "\n";
  const std::pair<const char*, const BlockStats*> blocks[] = {{"sigma2", &d.stats.sigma2},
                                                              {"lambda", &d.stats.lambda},
                                                              {"phi", &d.stats.phi},
                                                              {"omega", &d.stats.omega},
                                                              {"nu", &d.stats.nu}};
  for (const auto& [name, b] : blocks)
    os << std::left << std::setw(12) << name << std::right << std::setw(14) << b->acceptance_rate() << std::setw(12)
       << b->stalls << "\n";
  os << "newton fallbacks " << d.stats.newton_fallbacks << "\n";
  return os.str();
}

}  // namespace svrg

#endif  // SVRG_MCMC_HPP
