#ifndef SVRG_IO_HPP
#define SVRG_IO_HPP

// Text formats: OHLC and return/range CSV input, draw and forecast output,
// and the key=value run configuration.

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "svrg/forecast.hpp"
#include "svrg/mcmc.hpp"
#include "svrg/model.hpp"

namespace svrg {

/// Bad input file or configuration; carries the offending line when known.
class InputError : public std::runtime_error {
 public:
  explicit InputError(const std::string& what, std::size_t line = 0)
      : std::runtime_error(line ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

// ---------------------------------------------------------------------------
// Field helpers

/// Shortest text that reads back to the same double.
inline std::string format_double(double v) {
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (s.empty() || res.ec != std::errc() || res.ptr != s.data() + s.size() || !std::isfinite(v)) return std::nullopt;
  return v;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (ch != '\r') {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return out;
}

/// YYYY-MM-DD with a real calendar date.
inline bool is_iso_date(const std::string& s) {
  if (s.size() != 10 || s[4] != '-' || s[7] != '-') return false;
  for (std::size_t i : {0, 1, 2, 3, 5, 6, 8, 9})
    if (s[i] < '0' || s[i] > '9') return false;
  const std::chrono::year_month_day d{std::chrono::year(std::stoi(s.substr(0, 4))),
                                      std::chrono::month(unsigned(std::stoi(s.substr(5, 2)))),
                                      std::chrono::day(unsigned(std::stoi(s.substr(8, 2))))};
  return d.ok();
}

/// ISO date `offset` days after 2000-01-03.
inline std::string synthetic_date(std::size_t offset) {
  using namespace std::chrono;
  const year_month_day d{sys_days{year{2000} / January / 3} + days{static_cast<int>(offset)}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", int(d.year()), unsigned(d.month()), unsigned(d.day()));
  return buf;
}

namespace detail {

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line;  // source line of each row
};

inline CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string text;
  std::size_t no = 0;
  while (std::getline(in, text)) {
    ++no;
    if (text.find_first_not_of(" \t\r") == std::string::npos) continue;
    auto fields = split_csv_line(text);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size())
      throw InputError("expected " + std::to_string(t.header.size()) + " fields, found " +
                           std::to_string(fields.size()),
                       no);
    t.rows.push_back(std::move(fields));
    t.line.push_back(no);
  }
  if (t.header.empty()) throw InputError("empty file");
  return t;
}

inline double number(const std::string& field, const char* name, std::size_t line) {
  const auto v = parse_double(field);
  if (!v) throw InputError(std::string("malformed ") + name + " '" + field + "'", line);
  return *v;
}

inline bool header_is(const std::vector<std::string>& h, std::initializer_list<const char*> names) {
  if (h.size() != names.size()) return false;
  std::size_t i = 0;
  for (const char* n : names)
    if (h[i++] != n) return false;
  return true;
}

inline void check_dates(const std::vector<std::string>& dates, const std::vector<std::size_t>& lines) {
  for (std::size_t i = 0; i < dates.size(); ++i) {
    if (!is_iso_date(dates[i])) throw InputError("malformed date '" + dates[i] + "'", lines[i]);
    if (i > 0 && !(dates[i - 1] < dates[i]))
      throw InputError("dates must be strictly increasing ('" + dates[i] + "' after '" + dates[i - 1] + "')", lines[i]);
  }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// OHLC input

struct OhlcRow {
  std::string date;
  double open, high, low, close;
  std::optional<double> rv;
};

struct IngestOptions {
  /// Price increment used to floor zero ranges.
  double tick = 0.01;
};

/// Header date,open,high,low,close[,rv].
inline std::vector<OhlcRow> read_ohlc(std::istream& in) {
  const auto t = detail::read_csv(in);
  const bool with_rv = detail::header_is(t.header, {"date", "open", "high", "low", "close", "rv"});
  if (!with_rv && !detail::header_is(t.header, {"date", "open", "high", "low", "close"}))
    throw InputError("expected header date,open,high,low,close[,rv]", 1);
  std::vector<OhlcRow> rows;
  std::vector<std::string> dates;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& f = t.rows[i];
    const std::size_t ln = t.line[i];
    OhlcRow r{f[0], detail::number(f[1], "open", ln), detail::number(f[2], "high", ln),
              detail::number(f[3], "low", ln), detail::number(f[4], "close", ln), std::nullopt};
    if (with_rv) {
      r.rv = detail::number(f[5], "rv", ln);
      if (*r.rv < 0.0) throw InputError("rv must be nonnegative", ln);
    }
    if (!(r.open > 0.0 && r.high > 0.0 && r.low > 0.0 && r.close > 0.0))
      throw InputError("prices must be positive", ln);
    if (r.high < std::max(r.open, r.close)) throw InputError("high below open or close", ln);
    if (r.low > std::min(r.open, r.close)) throw InputError("low above open or close", ln);
    rows.push_back(r);
    dates.push_back(f[0]);
  }
  detail::check_dates(dates, t.line);
  return rows;
}

/// Percent log returns and ranges; the first row only anchors the first
/// return. A zero range becomes one tick above the low.
inline ReturnRangeSeries ingest(const std::vector<OhlcRow>& rows, const IngestOptions& opt = {}) {
  if (rows.size() < 2) throw InputError("need at least two rows");
  if (!(opt.tick > 0.0)) throw InputError("tick must be positive");
  ReturnRangeSeries s;
  const bool with_rv = rows.front().rv.has_value();
  for (std::size_t t = 1; t < rows.size(); ++t) {
    const auto& row = rows[t];
    s.dates.push_back(row.date);
    s.y.push_back(100.0 * (std::log(row.close) - std::log(rows[t - 1].close)));
    double r = 100.0 * std::log(row.high / row.low);
    if (!(r > 0.0)) r = 100.0 * std::log1p(opt.tick / row.low);
    s.r.push_back(r);
    if (with_rv) s.rv.push_back(*row.rv);
  }
  return s;
}

// ---------------------------------------------------------------------------
// Return/range series

/// Header date,y,r[,rv] or date,y,r,sigma2,lambda (simulation output).
struct SeriesFile {
  ReturnRangeSeries data;
  LatentState truth;  // empty unless the file carries it
};

inline void write_series_csv(std::ostream& out, const ReturnRangeSeries& s, const LatentState* truth = nullptr) {
  out << (truth ? "date,y,r,sigma2,lambda\n" : s.rv.empty() ? "date,y,r\n" : "date,y,r,rv\n");
  for (std::size_t t = 0; t < s.size(); ++t) {
    out << (s.dates.empty() ? synthetic_date(t) : s.dates[t]) << ',' << format_double(s.y[t]) << ','
        << format_double(s.r[t]);
    if (truth)
      out << ',' << format_double(truth->sigma2[t]) << ',' << format_double(truth->lambda[t]);
    else if (!s.rv.empty())
      out << ',' << format_double(s.rv[t]);
    out << '\n';
  }
}

inline SeriesFile read_series_csv(std::istream& in) {
  const auto t = detail::read_csv(in);
  const bool latent = detail::header_is(t.header, {"date", "y", "r", "sigma2", "lambda"});
  const bool rv = detail::header_is(t.header, {"date", "y", "r", "rv"});
  if (!latent && !rv && !detail::header_is(t.header, {"date", "y", "r"}))
    throw InputError("expected header date,y,r[,rv] or date,y,r,sigma2,lambda", 1);
  SeriesFile f;
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const std::size_t ln = t.line[i];
    f.data.dates.push_back(row[0]);
    f.data.y.push_back(detail::number(row[1], "y", ln));
    const double r = detail::number(row[2], "r", ln);
    if (!(r > 0.0)) throw InputError("range must be positive", ln);
    f.data.r.push_back(r);
    if (rv) {
      const double v = detail::number(row[3], "rv", ln);
      if (v < 0.0) throw InputError("rv must be nonnegative", ln);
      f.data.rv.push_back(v);
    }
    if (latent) {
      f.truth.sigma2.push_back(detail::number(row[3], "sigma2", ln));
      f.truth.lambda.push_back(detail::number(row[4], "lambda", ln));
      if (!(f.truth.sigma2.back() > 0.0 && f.truth.lambda.back() > 0.0))
        throw InputError("sigma2 and lambda must be positive", ln);
    }
  }
  detail::check_dates(f.data.dates, t.line);
  if (f.data.size() < 2) throw InputError("need at least two rows");
  return f;
}

/// Reads either layout, telling them apart by the header.
inline ReturnRangeSeries read_input(std::istream& in, const IngestOptions& opt = {}) {
  std::string first;
  std::getline(in, first);
  std::stringstream rest;
  rest << first << '\n' << in.rdbuf();
  if (split_csv_line(first).size() > 1 && split_csv_line(first)[1] == "open") return ingest(read_ohlc(rest), opt);
  return read_series_csv(rest).data;
}

// ---------------------------------------------------------------------------
// Output

inline void write_draws_csv(std::ostream& out, const PosteriorDraws& d) {
  out << "iteration,phi,omega_en,omega_nn,nu1,nu2,sigma2_next\n";
  for (std::size_t i = 0; i < d.size(); ++i) {
    const auto& p = d.params[i];
    out << i + 1 << ',' << format_double(p.phi) << ',' << format_double(p.omega_en) << ','
        << format_double(p.omega_nn) << ',' << format_double(p.nu1) << ',' << format_double(p.nu2) << ','
        << format_double(d.sigma2_next[i]) << '\n';
  }
}

inline void write_latent_csv(std::ostream& out, const PosteriorDraws& d, const ReturnRangeSeries& data) {
  out << "iteration,date,sigma2,lambda\n";
  for (std::size_t k = 0; k < d.latent.size(); ++k)
    for (std::size_t t = 0; t < d.latent[k].size(); ++t)
      out << d.latent_iteration[k] << ',' << (data.dates.empty() ? synthetic_date(t) : data.dates[t]) << ','
          << format_double(d.latent[k].sigma2[t]) << ',' << format_double(d.latent[k].lambda[t]) << '\n';
}

inline void write_forecast_csv(std::ostream& out, const std::vector<ForecastRecord>& recs) {
  out << "date,model,mean\n";
  for (const auto& r : recs) out << r.date << ',' << r.model << ',' << format_double(r.mean) << '\n';
}

inline std::vector<ForecastRecord> read_forecast_csv(std::istream& in) {
  const auto t = detail::read_csv(in);
  if (!detail::header_is(t.header, {"date", "model", "mean"})) throw InputError("expected header date,model,mean", 1);
  std::vector<ForecastRecord> out;
  std::map<std::string, std::string> last;  // per model
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    const auto& row = t.rows[i];
    const std::size_t ln = t.line[i];
    if (!is_iso_date(row[0])) throw InputError("malformed date '" + row[0] + "'", ln);
    if (row[1].empty()) throw InputError("empty model tag", ln);
    const double m = detail::number(row[2], "mean", ln);
    if (!(m > 0.0)) throw InputError("forecast mean must be positive", ln);
    if (auto it = last.find(row[1]); it != last.end() && !(it->second < row[0]))
      throw InputError("dates must be strictly increasing for model " + row[1], ln);
    last[row[1]] = row[0];
    out.push_back({row[0], i, m, {}, row[1]});
  }
  return out;
}

// ---------------------------------------------------------------------------
// Run configuration

struct RunConfig {
  std::string input;
  std::string output_dir = ".";
  McmcConfig mcmc;
  Priors priors;
  IngestOptions ingest;
  // simulate
  SvrgParams truth{0.95, -0.15, 0.15, 18.0, 28.0};
  std::size_t n_obs = 2000;
  // forecast
  std::size_t window = 250;
  double ewma_decay = 0.94;
  std::string benchmark = "none";  // none | ewma
};

namespace detail {

template <class T>
T parse_value(const std::string& key, const std::string& v) {
  if constexpr (std::is_same_v<T, std::string>) {
    return v;
  } else if constexpr (std::is_integral_v<T>) {
    T out{};
    const auto res = std::from_chars(v.data(), v.data() + v.size(), out);
    if (v.empty() || res.ec != std::errc() || res.ptr != v.data() + v.size())
      throw InputError("invalid integer for " + key + ": '" + v + "'");
    return out;
  } else {
    const auto d = parse_double(v);
    if (!d) throw InputError("invalid number for " + key + ": '" + v + "'");
    return *d;
  }
}

template <class T>
void bind_key(std::map<std::string, std::function<void(const std::string&)>>& m, const std::string& key, T& field) {
  m[key] = [&field, key](const std::string& v) { field = parse_value<T>(key, v); };
}

inline std::map<std::string, std::function<void(const std::string&)>> setters(RunConfig& c) {
  std::map<std::string, std::function<void(const std::string&)>> m;
  bind_key(m, "input", c.input);
  bind_key(m, "output_dir", c.output_dir);
  bind_key(m, "seed", c.mcmc.seed);
  bind_key(m, "n_burnin", c.mcmc.n_burnin);
  bind_key(m, "n_draws", c.mcmc.n_draws);
  bind_key(m, "range_threshold", c.mcmc.range_threshold);
  bind_key(m, "max_proposal_tries", c.mcmc.max_proposal_tries);
  bind_key(m, "newton_max_iter", c.mcmc.newton_max_iter);
  bind_key(m, "latent_thin", c.mcmc.latent_thin);
  bind_key(m, "prior.phi_a", c.priors.phi_a);
  bind_key(m, "prior.phi_b", c.priors.phi_b);
  bind_key(m, "prior.n0", c.priors.n0);
  bind_key(m, "prior.s0", c.priors.s0);
  bind_key(m, "prior.delta0", c.priors.delta0);
  bind_key(m, "prior.gamma0", c.priors.gamma0);
  bind_key(m, "prior.nu1_alpha", c.priors.nu1_alpha);
  bind_key(m, "prior.nu1_beta", c.priors.nu1_beta);
  bind_key(m, "prior.nu2_alpha", c.priors.nu2_alpha);
  bind_key(m, "prior.nu2_beta", c.priors.nu2_beta);
  bind_key(m, "tick", c.ingest.tick);
  bind_key(m, "sim.phi", c.truth.phi);
  bind_key(m, "sim.omega_en", c.truth.omega_en);
  bind_key(m, "sim.omega_nn", c.truth.omega_nn);
  bind_key(m, "sim.nu1", c.truth.nu1);
  bind_key(m, "sim.nu2", c.truth.nu2);
  bind_key(m, "sim.n", c.n_obs);
  bind_key(m, "window", c.window);
  bind_key(m, "ewma_decay", c.ewma_decay);
  bind_key(m, "benchmark", c.benchmark);
  return m;
}

}  // namespace detail

/// Every key the configuration accepts.
inline std::vector<std::string> config_keys() {
  RunConfig c;
  std::vector<std::string> out;
  for (const auto& [k, _] : detail::setters(c)) out.push_back(k);
  return out;
}

/// `key = value` lines; '#' starts a comment.
inline std::vector<std::pair<std::string, std::string>> read_key_values(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  std::size_t no = 0;
  while (std::getline(in, line)) {
    ++no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw InputError("expected key = value", no);
    auto trim = [](std::string s) {
      const auto b = s.find_first_not_of(" \t\r");
      const auto e = s.find_last_not_of(" \t\r");
      return b == std::string::npos ? std::string() : s.substr(b, e - b + 1);
    };
    std::string key = trim(line.substr(0, eq));
    if (key.empty()) throw InputError("empty key", no);
    out.emplace_back(std::move(key), trim(line.substr(eq + 1)));
  }
  return out;
}

/// Applies settings in order, later ones winning. Unknown keys are collected
/// and reported together before anything else is checked.
inline void apply_settings(RunConfig& c, const std::vector<std::pair<std::string, std::string>>& kv) {
  auto set = detail::setters(c);
  std::string unknown;
  for (const auto& [k, _] : kv)
    if (!set.count(k)) unknown += (unknown.empty() ? "" : ", ") + k;
  if (!unknown.empty()) throw InputError("unknown configuration keys: " + unknown);
  for (const auto& [k, v] : kv) set.at(k)(v);
}

inline void validate(const RunConfig& c) {
  try {
    c.mcmc.validate();
    c.priors.validate();
    c.truth.validate();
  } catch (const std::exception& e) {
    throw InputError(e.what());
  }
  if (!(c.ingest.tick > 0.0)) throw InputError("tick must be positive");
  if (c.window < 2) throw InputError("window must be at least 2");
  if (!(c.ewma_decay > 0.0 && c.ewma_decay < 1.0)) throw InputError("ewma_decay must lie in (0, 1)");
  if (c.benchmark != "none" && c.benchmark != "ewma") throw InputError("benchmark must be none or ewma");
  if (c.n_obs < 2) throw InputError("sim.n must be at least 2");
}

}  // namespace svrg

#endif  // SVRG_IO_HPP
