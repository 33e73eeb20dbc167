// svrg: simulate, fit, forecast and compare from the command line.
//
// Exit status 0 on success, 2 for bad input or configuration, 3 when the
// numerics fail.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "svrg/svrg.hpp"

namespace fs = std::filesystem;
using namespace svrg;

namespace {

struct CommonOptions {
  std::string config_file;
  std::vector<std::string> overrides;
  std::string input;
  std::string output_dir;
  std::string seed;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool with_input) {
  cmd->add_option("-c,--config", o.config_file, "key = value configuration file");
  cmd->add_option("-s,--set", o.overrides, "override one setting, KEY=VALUE (repeatable)");
  cmd->add_option("-o,--output-dir", o.output_dir, "directory for output files");
  cmd->add_option("--seed", o.seed, "master seed");
  if (with_input) cmd->add_option("-i,--input", o.input, "OHLC or date,y,r CSV");
}

RunConfig load_config(const CommonOptions& o) {
  RunConfig c;
  std::vector<std::pair<std::string, std::string>> kv;
  if (!o.config_file.empty()) {
    std::ifstream in(o.config_file);
    if (!in) throw InputError("cannot open config file " + o.config_file);
    kv = read_key_values(in);
  }
  for (const auto& s : o.overrides) {
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw InputError("--set expects KEY=VALUE, got '" + s + "'");
    kv.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  if (!o.input.empty()) kv.emplace_back("input", o.input);
  if (!o.output_dir.empty()) kv.emplace_back("output_dir", o.output_dir);
  if (!o.seed.empty()) kv.emplace_back("seed", o.seed);
  apply_settings(c, kv);
  validate(c);
  return c;
}

ReturnRangeSeries load_input(const std::string& path, const IngestOptions& opt) {
  if (path.empty()) throw InputError("no input file given");
  std::ifstream in(path);
  if (!in) throw InputError("cannot open input file " + path);
  try {
    auto s = read_input(in, opt);
    s.validate();
    return s;
  } catch (const InputError& e) {
    throw InputError(path + ": " + e.what());
  } catch (const std::invalid_argument& e) {
    throw InputError(path + ": " + e.what());
  }
}

std::ofstream open_output(const RunConfig& c, const std::string& name) {
  fs::create_directories(c.output_dir);
  const fs::path p = fs::path(c.output_dir) / name;
  std::ofstream out(p);
  if (!out) throw InputError("cannot write " + p.string());
  return out;
}

int run_simulate(const CommonOptions& o) {
  const RunConfig c = load_config(o);
  Rng rng(c.mcmc.seed);
  const auto sim = simulate_svrg(c.truth, c.n_obs, rng);
  auto out = open_output(c, "simulated.csv");
  write_series_csv(out, sim.data, &sim.truth);
  std::cout << "wrote " << (fs::path(c.output_dir) / "simulated.csv").string() << " (" << sim.data.size()
            << " days)\n";
  return 0;
}

int run_fit(const CommonOptions& o) {
  const RunConfig c = load_config(o);
  const auto data = load_input(c.input, c.ingest);
  const auto draws = run_mcmc(data, c.priors, c.mcmc);
  const std::string report = format_run_report(draws);
  {
    auto out = open_output(c, "draws.csv");
    write_draws_csv(out, draws);
  }
  if (c.mcmc.latent_thin > 0) {
    auto out = open_output(c, "latent.csv");
    write_latent_csv(out, draws, data);
  }
  auto rep = open_output(c, "report.txt");
  rep << report;
  std::cout << report;
  return 0;
}

int run_forecast(const CommonOptions& o) {
  const RunConfig c = load_config(o);
  const auto data = load_input(c.input, c.ingest);
  if (c.window >= data.size()) throw InputError("window must be shorter than the input series");
  McmcConfig m = c.mcmc;
  auto write = [&](const RollingForecast& f, const std::string& name) {
    auto out = open_output(c, name);
    write_forecast_csv(out, f.records);
    for (const auto& g : f.gaps) std::cerr << "gap " << g.date << ": " << g.reason << "\n";
    std::cout << "wrote " << (fs::path(c.output_dir) / name).string() << " (" << f.records.size() << " forecasts, "
              << f.gaps.size() << " gaps)\n";
  };
  write(rolling_forecast(data, c.window, svrg_runner(c.priors, m), "SVRG", c.mcmc.seed), "forecast_svrg.csv");
  if (c.benchmark == "ewma")
    write(rolling_forecast(data, c.window, parkinson_ewma_runner(c.ewma_decay), "RG-EWMA", c.mcmc.seed),
          "forecast_ewma.csv");
  return 0;
}

int run_compare(const CommonOptions& o, const std::vector<std::string>& files) {
  const RunConfig c = load_config(o);
  const auto proxy_data = load_input(c.input, c.ingest);

  std::vector<std::string> order;
  std::map<std::string, std::map<std::string, double>> by_model;
  for (const auto& f : files) {
    std::ifstream in(f);
    if (!in) throw InputError("cannot open forecast file " + f);
    std::vector<ForecastRecord> recs;
    try {
      recs = read_forecast_csv(in);
    } catch (const InputError& e) {
      throw InputError(f + ": " + e.what());
    }
    for (const auto& r : recs) {
      if (!by_model.count(r.model)) order.push_back(r.model);
      if (!by_model[r.model].emplace(r.date, r.mean).second)
        throw InputError(f + ": model " + r.model + " repeats date " + r.date);
    }
  }
  if (order.size() < 2) throw InputError("compare needs forecasts from at least two models");

  // proxies are scaled over the whole proxy sample, then restricted to the
  // dates every model forecasts
  std::vector<NamedSeries> proxies_full;
  if (!proxy_data.rv.empty()) proxies_full.push_back({"RV", hansen_lunde_scale(proxy_data.rv, proxy_data.y)});
  proxies_full.push_back({"RG", hansen_lunde_scale(parkinson_variance(proxy_data.r), proxy_data.y)});

  std::vector<std::string> dates;
  std::vector<std::size_t> rows;
  for (std::size_t t = 0; t < proxy_data.size(); ++t) {
    const auto& d = proxy_data.dates[t];
    bool all = true;
    for (const auto& m : order) all = all && by_model[m].count(d);
    if (all) {
      dates.push_back(d);
      rows.push_back(t);
    }
  }
  if (dates.size() < 30) throw InputError("fewer than 30 dates shared by the proxy file and every forecast file");

  std::vector<NamedSeries> models, proxies;
  for (const auto& m : order) {
    NamedSeries s{m, {}};
    for (const auto& d : dates) s.values.push_back(by_model[m][d]);
    models.push_back(std::move(s));
  }
  for (const auto& p : proxies_full) {
    NamedSeries s{p.name, {}};
    for (std::size_t t : rows) s.values.push_back(p.values[t]);
    proxies.push_back(std::move(s));
  }
  const auto rep = evaluate_forecasts(models, proxies);
  std::ostringstream text;
  text << "days " << dates.size() << " (" << dates.front() << " to " << dates.back() << ")\n"
       << "p-values: conditional predictive ability against " << order.front() << "\n\n"
       << format_loss_report(rep);
  {
    auto out = open_output(c, "loss_report.txt");
    out << text.str();
  }
  auto daily = open_output(c, "daily_losses.csv");
  daily << "date,model,proxy,loss,value\n";
  for (std::size_t m = 0; m < rep.models.size(); ++m)
    for (std::size_t p = 0; p < rep.proxies.size(); ++p)
      for (std::size_t l = 0; l < rep.losses.size(); ++l)
        for (std::size_t t = 0; t < dates.size(); ++t)
          daily << dates[t] << ',' << rep.models[m] << ',' << rep.proxies[p] << ',' << rep.losses[l] << ','
                << format_double(rep.daily[m][p][l][t]) << '\n';
  std::cout << text.str();
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Range-based stochastic volatility with leverage: simulation, estimation and forecasting"};
  app.require_subcommand(1);
  CommonOptions opts;
  std::vector<std::string> forecast_files;

  auto* sim = app.add_subcommand("simulate", "write a synthetic date,y,r,sigma2,lambda series");
  add_common(sim, opts, false);
  auto* fit = app.add_subcommand("fit", "run the sampler and write draws and a run report");
  add_common(fit, opts, true);
  auto* fc = app.add_subcommand("forecast", "rolling one-step-ahead variance forecasts");
  add_common(fc, opts, true);
  auto* cmp = app.add_subcommand("compare", "average losses and predictive-ability tests");
  add_common(cmp, opts, true);
  cmp->add_option("forecasts", forecast_files, "forecast CSV files (date,model,mean)")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    if (*sim) return run_simulate(opts);
    if (*fit) return run_fit(opts);
    if (*fc) return run_forecast(opts);
    if (*cmp) return run_compare(opts, forecast_files);
  } catch (const InputError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
