#ifndef SVRG_FORECAST_HPP
#define SVRG_FORECAST_HPP

// One-step-ahead variance forecasts, rolling re-estimation and forecast
// evaluation under noisy volatility proxies.

#include <cmath>
#include <cstdint>
#include <functional>
#include <iomanip>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "svrg/mcmc.hpp"
#include "svrg/model.hpp"
#include "svrg/random.hpp"

namespace svrg {

struct NormalMoments {
  double mean, variance;
};

/// Conditional law of log σ²_{n+1} given the parameters, σ²_n and y_n.
inline NormalMoments predictive_log_variance(const SvrgParams& p, double sigma2_n, double y_n) {
  if (!(sigma2_n > 0.0)) throw std::domain_error("predictive_log_variance: sigma2_n must be positive");
  p.validate();
  return {p.phi * std::log(sigma2_n) + p.omega_en * y_n / std::sqrt(sigma2_n), p.conditional_variance()};
}

template <Engine64 G>
double predictive_draw(const SvrgParams& p, double sigma2_n, double y_n, G& rng) {
  const auto m = predictive_log_variance(p, sigma2_n, y_n);
  return std::exp(normal_variate(m.mean, m.variance, rng));
}

/// Realised SV benchmark: log variance α_t with mean μ, and log realised
/// measure x_t = ξ + α_t + w_t.
struct RsvParams {
  double mu = 0.0;
  double phi = 0.95;
  double xi = 0.0;
  double omega_ww = 0.1;
  double omega_en = 0.0;
  double omega_nn = 0.05;

  void validate() const {
    if (!(std::abs(phi) < 1.0) || !(omega_ww > 0.0) || !(omega_nn > omega_en * omega_en) || !std::isfinite(mu) ||
        !std::isfinite(xi))
      throw std::domain_error("RsvParams: invalid parameters");
  }
};

inline NormalMoments rsv_predictive_log_variance(const RsvParams& p, double alpha_n, double y_n) {
  p.validate();
  return {(1.0 - p.phi) * p.mu + p.phi * alpha_n + p.omega_en * std::exp(-0.5 * alpha_n) * y_n,
          p.omega_nn - p.omega_en * p.omega_en};
}

/// Draw of α_{n+1} (a log variance, not a variance).
template <Engine64 G>
double rsv_predictive_draw(const RsvParams& p, double alpha_n, double y_n, G& rng) {
  const auto m = rsv_predictive_log_variance(p, alpha_n, y_n);
  return normal_variate(m.mean, m.variance, rng);
}

// ---------------------------------------------------------------------------
// Losses

inline double mse_loss(double proxy, double h) {
  if (!std::isfinite(proxy) || !std::isfinite(h)) throw std::domain_error("mse_loss: non-finite input");
  return 0.5 * (h - proxy) * (h - proxy);
}

inline double qlike_loss(double proxy, double h) {
  if (!(proxy > 0.0) || !(h > 0.0) || !std::isfinite(proxy) || !std::isfinite(h))
    throw std::domain_error("qlike_loss: proxy and forecast must be positive");
  const double q = proxy / h;
  return q - std::log(q) - 1.0;
}

/// c such that c·RV has mean equal to the sample variance of the returns
/// (divisor n).
inline double hansen_lunde_factor(const std::vector<double>& rv, const std::vector<double>& y) {
  if (rv.size() != y.size() || y.empty()) throw std::invalid_argument("hansen_lunde_factor: length mismatch");
  double ybar = 0.0, total = 0.0;
  for (std::size_t t = 0; t < y.size(); ++t) {
    ybar += y[t];
    total += rv[t];
  }
  if (!(total > 0.0)) throw std::domain_error("hansen_lunde_factor: total realised variance must be positive");
  ybar /= double(y.size());
  double ss = 0.0;
  for (double v : y) ss += (v - ybar) * (v - ybar);
  return ss / total;
}

inline std::vector<double> hansen_lunde_scale(const std::vector<double>& rv, const std::vector<double>& y) {
  const double c = hansen_lunde_factor(rv, y);
  std::vector<double> out(rv);
  for (auto& v : out) v *= c;
  return out;
}

/// r²/(4 log 2) per day.
inline std::vector<double> parkinson_variance(const std::vector<double>& r) {
  std::vector<double> out(r.size());
  for (std::size_t t = 0; t < r.size(); ++t) out[t] = r[t] * r[t] / (4.0 * std::numbers::ln2);
  return out;
}

// ---------------------------------------------------------------------------
// Conditional predictive ability

struct GwResult {
  double statistic = 0.0;
  int dof = 2;
  double p_value = 1.0;
};

/// Wald test of E[h_t ΔL_t] = 0 with instruments h_t = (1, ΔL_{t-1}) and
/// ΔL_t = a_t - b_t, for one-step forecasts.
inline GwResult giacomini_white_test(const std::vector<double>& loss_a, const std::vector<double>& loss_b) {
  if (loss_a.size() != loss_b.size()) throw std::invalid_argument("giacomini_white_test: series not aligned");
  if (loss_a.size() < 30) throw std::invalid_argument("giacomini_white_test: need at least 30 observations");
  std::vector<double> d(loss_a.size());
  for (std::size_t t = 0; t < d.size(); ++t) d[t] = loss_a[t] - loss_b[t];

  const std::size_t m = d.size() - 1;
  const double n = double(m);
  double z1 = 0.0, z2 = 0.0;
  for (std::size_t t = 1; t < d.size(); ++t) {
    z1 += d[t];
    z2 += d[t - 1] * d[t];
  }
  z1 /= n;
  z2 /= n;
  // sample covariance of Z_t; one-step forecasts need no autocorrelation term
  double s11 = 0.0, s12 = 0.0, s22 = 0.0;
  for (std::size_t t = 1; t < d.size(); ++t) {
    const double a = d[t] - z1, b = d[t - 1] * d[t] - z2;
    s11 += a * a;
    s12 += a * b;
    s22 += b * b;
  }
  s11 /= n;
  s12 /= n;
  s22 /= n;
  const double det = s11 * s22 - s12 * s12;
  if (!(s11 > 0.0) || !(s22 > 0.0) || !(det > 1e-12 * s11 * s22)) return {};
  const double stat = n * (s22 * z1 * z1 - 2.0 * s12 * z1 * z2 + s11 * z2 * z2) / det;
  // chi-square with two degrees of freedom has survival exp(-x/2)
  return {stat, 2, std::exp(-0.5 * stat)};
}

// ---------------------------------------------------------------------------
// Rolling re-estimation

struct ForecastRecord {
  std::string date;    // date of the forecast target
  std::size_t index;   // row of the target in the full series
  double mean;         // predictive mean of σ² on that date
  std::vector<double> draws;
  std::string model;
};

struct ForecastGap {
  std::string date;
  std::size_t index;
  std::string reason;
};

struct RollingForecast {
  std::vector<ForecastRecord> records;
  std::vector<ForecastGap> gaps;
};

struct Forecast {
  double mean;
  std::vector<double> draws;
};

/// Fits one window and returns the forecast for the day after it.
using ForecastRunner = std::function<Forecast(const ReturnRangeSeries& window, std::uint64_t seed)>;

/// Slides a window of `window` days one day at a time; a series of length
/// window + k yields k forecasts. Window i is seeded with mix_seed(master, i).
/// A runner failure leaves a gap and the roll continues.
inline RollingForecast rolling_forecast(const ReturnRangeSeries& series, std::size_t window, const ForecastRunner& run,
                                        const std::string& model, std::uint64_t master_seed,
                                        bool keep_draws = false) {
  series.validate();
  if (window < 2 || window >= series.size())
    throw std::invalid_argument("rolling_forecast: window must be at least 2 and shorter than the series");
  RollingForecast out;
  for (std::size_t start = 0; start + window < series.size(); ++start) {
    const std::size_t target = start + window;
    const std::string date = series.dates.empty() ? std::to_string(target) : series.dates[target];
    try {
      Forecast f = run(series.slice(start, window), mix_seed(master_seed, start));
      if (!(f.mean > 0.0) || !std::isfinite(f.mean)) throw std::domain_error("non-positive predictive mean");
      if (!keep_draws) f.draws.clear();
      out.records.push_back({date, target, f.mean, std::move(f.draws), model});
    } catch (const std::exception& e) {
      out.gaps.push_back({date, target, e.what()});
    }
  }
  return out;
}

/// Full MCMC refit per window; the forecast is the mean of the σ²_{n+1} draws.
inline ForecastRunner svrg_runner(const Priors& priors, McmcConfig config) {
  return [priors, config](const ReturnRangeSeries& window, std::uint64_t seed) {
    McmcConfig c = config;
    c.seed = seed;
    c.latent_thin = 0;
    PosteriorDraws d = run_mcmc(window, priors, c);
    double mean = 0.0;
    for (double v : d.sigma2_next) mean += v;
    mean /= double(d.sigma2_next.size());
    return Forecast{mean, std::move(d.sigma2_next)};
  };
}

/// MCMC sizing used for each refit of a rolling forecast.
inline McmcConfig rolling_mcmc_config() {
  McmcConfig c;
  c.n_burnin = 1000;
  c.n_draws = 6000;
  return c;
}

/// Naive benchmark: exponentially weighted Parkinson variance, rescaled so its
/// window mean matches the return variance. Ignores the seed.
inline ForecastRunner parkinson_ewma_runner(double decay = 0.94) {
  if (!(decay > 0.0 && decay < 1.0)) throw std::invalid_argument("parkinson_ewma_runner: decay must lie in (0, 1)");
  return [decay](const ReturnRangeSeries& window, std::uint64_t) {
    const auto park = parkinson_variance(window.r);
    const double c = hansen_lunde_factor(park, window.y);
    double level = 0.0;
    for (double v : park) level += v;
    level /= double(park.size());
    for (double v : park) level = decay * level + (1.0 - decay) * v;
    return Forecast{c * level, {}};
  };
}

// ---------------------------------------------------------------------------
// Loss tables

struct NamedSeries {
  std::string name;
  std::vector<double> values;
};

struct LossCell {
  double average;
  GwResult gw;       // against the reference model
  bool has_test;     // false for the reference model itself
};

struct LossReport {
  std::vector<std::string> models;  // models[0] is the reference
  std::vector<std::string> proxies;
  std::vector<std::string> losses{"MSE", "QLIKE"};
  /// daily[m][p][l] holds the per-day losses.
  std::vector<std::vector<std::vector<std::vector<double>>>> daily;
  std::vector<std::vector<std::vector<LossCell>>> cells;
};

/// Scores every forecast series against every proxy; all series must be
/// aligned day by day. The first model is the reference for the tests.
inline LossReport evaluate_forecasts(const std::vector<NamedSeries>& models, const std::vector<NamedSeries>& proxies) {
  if (models.empty() || proxies.empty()) throw std::invalid_argument("evaluate_forecasts: need models and proxies");
  const std::size_t n = models.front().values.size();
  for (const auto& s : models)
    if (s.values.size() != n) throw std::invalid_argument("evaluate_forecasts: forecast series not aligned");
  for (const auto& s : proxies)
    if (s.values.size() != n) throw std::invalid_argument("evaluate_forecasts: proxy series not aligned");

  LossReport rep;
  for (const auto& s : models) rep.models.push_back(s.name);
  for (const auto& s : proxies) rep.proxies.push_back(s.name);
  const std::function<double(double, double)> fns[] = {mse_loss, qlike_loss};

  rep.daily.resize(models.size());
  for (std::size_t m = 0; m < models.size(); ++m) {
    rep.daily[m].resize(proxies.size());
    for (std::size_t p = 0; p < proxies.size(); ++p)
      for (const auto& fn : fns) {
        std::vector<double> v(n);
        for (std::size_t t = 0; t < n; ++t) v[t] = fn(proxies[p].values[t], models[m].values[t]);
        rep.daily[m][p].push_back(std::move(v));
      }
  }
  rep.cells.resize(models.size());
  for (std::size_t m = 0; m < models.size(); ++m) {
    rep.cells[m].resize(proxies.size());
    for (std::size_t p = 0; p < proxies.size(); ++p)
      for (std::size_t l = 0; l < rep.losses.size(); ++l) {
        const auto& v = rep.daily[m][p][l];
        double avg = 0.0;
        for (double x : v) avg += x;
        avg /= double(n);
        LossCell cell{avg, {}, m > 0};
        if (m > 0) cell.gw = giacomini_white_test(rep.daily[0][p][l], v);
        rep.cells[m][p].push_back(cell);
      }
  }
  return rep;
}

/// Average loss and test p-value per model, grouped by proxy then loss.
inline std::string format_loss_report(const LossReport& rep) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(3);
  os << std::left << std::setw(12) << "model";
  for (const auto& p : rep.proxies)
    for (const auto& l : rep.losses) {
      const std::string key = p + "/" + l;
      os << std::right << std::setw(14) << key + " avg" << std::setw(10) << "p";
    }
  os << "\n";
  for (std::size_t m = 0; m < rep.models.size(); ++m) {
    os << std::left << std::setw(12) << rep.models[m];
    for (std::size_t p = 0; p < rep.proxies.size(); ++p)
      for (std::size_t l = 0; l < rep.losses.size(); ++l) {
        const auto& c = rep.cells[m][p][l];
        os << std::right << std::setw(14) << c.average;
        if (c.has_test)
          os << std::setw(10) << c.gw.p_value;
        else
          os << std::setw(10) << "-";
      }
    os << "\n";
  }
  return os.str();
}

}  // namespace svrg

#endif  // SVRG_FORECAST_HPP
