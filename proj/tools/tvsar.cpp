#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>

#include "CLI11.hpp"
#include "tvsar/config.hpp"
#include "tvsar/evaluation.hpp"
#include "tvsar/io.hpp"

namespace {

using namespace tvsar;
namespace fs = std::filesystem;

constexpr double kPi = 3.14159265358979323846;

struct CommonFlags {
  std::string config_path;
  std::string sampler;
  std::string offset;
  std::uint64_t seed = 0;
  bool seed_set = false;
  int particles = -1, draws = -1, burnin = -1, thin = -1, detrend = -1;
  bool sv = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config_path, "flat key=value config file");
  cmd->add_option("--seed", f.seed, "run seed")->each([&](const std::string&) {
    f.seed_set = true;
  });
  cmd->add_option("--sampler", f.sampler, "ffbsx or pgas");
  cmd->add_option("--particles", f.particles, "PGAS particle count");
  cmd->add_option("--offset", f.offset, "fixed:<x> or dsp");
  cmd->add_option("--draws", f.draws, "post burn-in iterations");
  cmd->add_option("--burnin", f.burnin, "burn-in iterations");
  cmd->add_option("--thin", f.thin, "thinning interval");
  cmd->add_flag("--sv", f.sv, "stochastic volatility noise");
  cmd->add_option("--detrend", f.detrend,
                  "centered moving-average window (0 = 2*max(s)+1)");
}

RunConfig resolve_config(const CommonFlags& f) {
  RunConfig cfg =
      f.config_path.empty() ? RunConfig{} : load_config_file(f.config_path);
  if (f.seed_set) cfg.gibbs.seed = f.seed;
  if (!f.sampler.empty()) apply_config_key(cfg, "sampler.kind", f.sampler);
  if (f.particles >= 0) cfg.gibbs.particles = f.particles;
  if (f.draws >= 0) cfg.gibbs.draws = f.draws;
  if (f.burnin >= 0) cfg.gibbs.burnin = f.burnin;
  if (f.thin >= 0) cfg.gibbs.thin = f.thin;
  if (f.sv) cfg.gibbs.stochastic_volatility = true;
  if (!f.offset.empty()) {
    if (f.offset == "dsp") {
      apply_config_key(cfg, "offset.kind", "dsp");
    } else if (f.offset.rfind("fixed:", 0) == 0) {
      apply_config_key(cfg, "offset.kind", "fixed");
      apply_config_key(cfg, "offset.value", f.offset.substr(6));
    } else {
      throw CLI::ValidationError("--offset must be fixed:<x> or dsp");
    }
  }
  if (f.detrend >= 0) {
    cfg.detrend_window =
        f.detrend == 0
            ? 2 * *std::max_element(cfg.seasons.begin(), cfg.seasons.end()) + 1
            : f.detrend;
  }
  return cfg;
}

Vector load_series(const RunConfig& cfg, const std::string& path) {
  Vector y = read_series_csv(path);
  if (cfg.detrend_window > 0) {
    y = detrend_moving_average(y, cfg.detrend_window);
  }
  return y;
}

std::vector<int> parse_probe_times(const std::string& s, int T) {
  std::vector<int> out;
  if (s.empty()) {
    for (int t : {100, 400, 800}) out.push_back(std::min(t, T));
  } else {
    std::stringstream ss(s);
    std::string field;
    while (std::getline(ss, field, ',')) out.push_back(std::stoi(field));
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

int cmd_simulate(const CommonFlags& flags, const std::string& experiment,
                 const std::string& out_dir, int T, double sigma,
                 int replicates) {
  RunConfig cfg = resolve_config(flags);
  if (!experiment.empty()) cfg.experiment = experiment;
  if (T > 0) cfg.sim_T = T;
  if (sigma > 0) cfg.sim_sigma = sigma;
  if (replicates > 0) cfg.replicates = replicates;
  if (cfg.experiment.empty()) {
    throw CLI::ValidationError("simulate needs --experiment");
  }
  if (!fs::is_directory(out_dir)) {
    throw CLI::ValidationError("output directory does not exist: " + out_dir);
  }

  ExperimentSpec spec = builtin_experiment(cfg.experiment, cfg.sim_T);
  NoiseState noise;
  noise.sigma = cfg.sim_sigma;
  const int warmup = std::max(10 * spec.paths.structure.p_max(), 200);

  for (int rep = 0; rep < cfg.replicates; ++rep) {
    Rng rng = Rng(cfg.gibbs.seed).split(0x5157, rep);
    Vector y = simulate_tvsar(spec.paths, noise, warmup, rng);
    std::string name = "y.csv";
    if (cfg.replicates > 1) {
      char buf[32];
      std::snprintf(buf, sizeof(buf), "y_%03d.csv", rep + 1);
      name = buf;
    }
    write_series_csv(out_dir + "/" + name, y);
  }

  // truth sidecars shared by all replicates
  {
    std::ofstream f(out_dir + "/truth_theta.csv");
    for (int t = 0; t < spec.paths.theta.rows(); ++t) {
      for (int k = 0; k < spec.paths.theta.cols(); ++k) {
        if (k) f << ',';
        f << format_double(spec.paths.theta(t, k));
      }
      f << '\n';
    }
  }
  {
    std::vector<int> times(cfg.sim_T);
    for (int t = 1; t <= cfg.sim_T; ++t) times[t - 1] = t;
    const Vector omegas = default_omegas(cfg.grid_frequencies);
    SpectralGrid truth = true_spectral_grid(spec.paths, noise, times, omegas);
    std::ofstream f(out_dir + "/truth_spectrum.csv");
    f << "t,omega,logf\n";
    for (size_t i = 0; i < times.size(); ++i) {
      for (int k = 0; k < omegas.size(); ++k) {
        f << times[i] << ',' << format_double(omegas[k]) << ','
          << format_double(truth.log_median(i, k)) << '\n';
      }
    }
  }
  std::cout << "wrote " << cfg.replicates << " series to " << out_dir << "\n";
  return 0;
}

int cmd_fit(const CommonFlags& flags, const std::string& data,
            const std::string& out_dir) {
  RunConfig cfg = resolve_config(flags);
  Vector y = load_series(cfg, data);
  SarStructure st(cfg.seasons, cfg.orders);

  fs::create_directories(out_dir);
  std::ofstream run_log(out_dir + "/run.log");
  GibbsConfig gc = cfg.gibbs;
  gc.run_log = &run_log;

  PosteriorDraws draws = gibbs_run(y, st, gc);
  run_log << "seconds=" << draws.seconds << "\n";
  write_archive(out_dir, draws, int(y.size()), gc.seed, config_hash(cfg));
  std::cout << "stored " << draws.theta.size() << " draws in " << out_dir
            << "\n";
  return 0;
}

int cmd_spectrum(const std::string& archive, const std::string& out_csv,
                 const std::string& times_arg, int frequencies,
                 const std::string& truth_path,
                 const std::string& config_path) {
  PosteriorDraws draws = read_archive(archive);
  ArchiveInfo info = read_archive_info(archive);
  if (!config_path.empty()) {
    RunConfig cfg = load_config_file(config_path);
    if (config_hash(cfg) != info.config_hash) {
      std::cerr << "stale archive: config hash mismatch\n";
      return 1;
    }
  }

  std::vector<int> times;
  Vector omegas;
  SpectralGrid truth;
  const bool have_truth = !truth_path.empty();
  if (have_truth) {
    // align with the sidecar grid
    std::ifstream f(truth_path);
    if (!f) throw std::runtime_error("cannot read " + truth_path);
    std::string line;
    std::getline(f, line);  // header
    std::map<int, std::map<double, double>> cells;
    while (std::getline(f, line)) {
      if (line.empty()) continue;
      std::stringstream ss(line);
      std::string a, b, c;
      std::getline(ss, a, ',');
      std::getline(ss, b, ',');
      std::getline(ss, c, ',');
      cells[std::stoi(a)][std::stod(b)] = std::stod(c);
    }
    for (const auto& kv : cells) {
      if (kv.first <= info.T) times.push_back(kv.first);
    }
    const auto& first_row = cells.begin()->second;
    omegas.resize(first_row.size());
    int k = 0;
    for (const auto& kv : first_row) omegas[k++] = kv.first;
    truth.times = times;
    truth.omegas = omegas;
    truth.log_median.resize(times.size(), omegas.size());
    for (size_t i = 0; i < times.size(); ++i) {
      int j = 0;
      for (const auto& kv : cells[times[i]]) {
        truth.log_median(i, j++) = kv.second;
      }
    }
    truth.log_q025 = truth.log_median;
    truth.log_q975 = truth.log_median;
  } else {
    if (times_arg.empty()) {
      const int step = std::max(1, info.T / 200);
      for (int t = 1; t <= info.T; t += step) times.push_back(t);
    } else {
      times = parse_probe_times(times_arg, info.T);
    }
    omegas = default_omegas(frequencies);
  }

  SpectralGrid grid = spectral_grid(draws, times, omegas);
  if (!out_csv.empty()) {
    std::ofstream f(out_csv);
    if (!f) throw std::runtime_error("cannot write " + out_csv);
    f << "t,omega,q025,median,q975\n";
    for (size_t i = 0; i < times.size(); ++i) {
      for (int k = 0; k < omegas.size(); ++k) {
        f << times[i] << ',' << format_double(omegas[k]) << ','
          << format_double(grid.log_q025(i, k)) << ','
          << format_double(grid.log_median(i, k)) << ','
          << format_double(grid.log_q975(i, k)) << '\n';
      }
    }
  }
  if (have_truth) {
    std::cout << "mse_log_spectral=" << format_double(mse_log_spectral(grid, truth))
              << "\n";
  }
  return 0;
}

int cmd_lps(const CommonFlags& flags, const std::string& data, int split,
            int refit_every, const std::string& p_grid,
            const std::string& sp_grid) {
  RunConfig cfg = resolve_config(flags);
  if (split > 0) cfg.lps_split = split;
  if (refit_every > 0) cfg.lps_refit_every = refit_every;
  Vector y = load_series(cfg, data);
  if (cfg.lps_split < 1 || cfg.lps_split >= int(y.size())) {
    throw CLI::ValidationError("--split must leave at least one test point");
  }

  auto parse_range = [](const std::string& s) {
    const auto colon = s.find(':');
    if (colon == std::string::npos) {
      const int v = std::stoi(s);
      return std::pair<int, int>(v, v);
    }
    return std::pair<int, int>(std::stoi(s.substr(0, colon)),
                               std::stoi(s.substr(colon + 1)));
  };

  if (p_grid.empty() && sp_grid.empty()) {
    SarStructure st(cfg.seasons, cfg.orders);
    const double lps =
        lps_one_step(y, cfg.lps_split, st, cfg.gibbs, cfg.lps_refit_every);
    std::cout << "lps=" << format_double(lps) << "\n";
    return 0;
  }
  if (cfg.seasons.size() != 2) {
    throw CLI::ValidationError("order grids need a two-component model");
  }
  const auto [p_lo, p_hi] = parse_range(p_grid.empty() ? "1" : p_grid);
  const auto [sp_lo, sp_hi] = parse_range(sp_grid.empty() ? "1" : sp_grid);

  struct Cell {
    int p, sp;
    double lps;
  };
  std::vector<Cell> cells;
  for (int p = p_lo; p <= p_hi; ++p) {
    for (int sp = sp_lo; sp <= sp_hi; ++sp) {
      SarStructure st(cfg.seasons, {p, sp});
      const double lps =
          lps_one_step(y, cfg.lps_split, st, cfg.gibbs, cfg.lps_refit_every);
      cells.push_back({p, sp, lps});
      std::cout << "p=" << p << " P=" << sp << " lps=" << format_double(lps)
                << "\n";
    }
  }
  const auto best = *std::max_element(
      cells.begin(), cells.end(),
      [](const Cell& a, const Cell& b) { return a.lps < b.lps; });
  std::cout << "best: p=" << best.p << " P=" << best.sp << "\n";
  // most parsimonious model within 1 LPS of the best
  const Cell* pick = nullptr;
  for (const Cell& c : cells) {
    if (c.lps < best.lps - 1.0) continue;
    if (!pick || c.p + c.sp < pick->p + pick->sp ||
        (c.p + c.sp == pick->p + pick->sp && c.p < pick->p)) {
      pick = &c;
    }
  }
  std::cout << "selected: p=" << pick->p << " P=" << pick->sp << "\n";
  return 0;
}

int cmd_diag(const std::vector<std::string>& archives,
             const std::string& times_arg, const std::string& omegas_arg) {
  for (const std::string& archive : archives) {
    PosteriorDraws draws = read_archive(archive);
    ArchiveInfo info = read_archive_info(archive);
    std::cout << "archive " << archive << " draws=" << info.n_draws << "\n";
    for (int k = 0; k < draws.update_rates.size(); ++k) {
      std::cout << "  update_rate k=" << k << " rate="
                << format_double(draws.update_rates[k])
                << (draws.update_rates[k] == 0.0 ? " FLAG=stuck" : "") << "\n";
    }
    const std::vector<int> times = parse_probe_times(times_arg, info.T);
    std::vector<double> omegas;
    if (omegas_arg.empty()) {
      omegas = {kPi / 4, kPi / 2, 3 * kPi / 4};
    } else {
      std::stringstream ss(omegas_arg);
      std::string field;
      while (std::getline(ss, field, ',')) omegas.push_back(std::stod(field));
    }
    Vector w(omegas.size());
    for (size_t i = 0; i < omegas.size(); ++i) w[int(i)] = omegas[i];
    SpectralGrid grid = spectral_grid(draws, times, w);
    for (size_t i = 0; i < times.size(); ++i) {
      for (int k = 0; k < w.size(); ++k) {
        Vector chain(grid.values.size());
        for (size_t j = 0; j < grid.values.size(); ++j) {
          chain[int(j)] = grid.values[j](i, k);
        }
        std::cout << "  ess t=" << times[i] << " omega=" << format_double(w[k]);
        if (chain.size() < 10) {
          std::cout << " ess=n/a (too few draws)\n";
          continue;
        }
        bool zero = false;
        const double e = chain_ess(chain, &zero);
        std::cout << " ess=" << format_double(e)
                  << (zero ? " FLAG=zero-variance" : "") << "\n";
      }
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"time-varying seasonal AR inference"};
  app.require_subcommand(1);

  CommonFlags sim_flags, fit_flags, lps_flags;
  std::string sim_experiment, sim_out;
  int sim_T = 0, sim_reps = 0;
  double sim_sigma = 0;
  CLI::App* sim = app.add_subcommand("simulate", "generate synthetic data");
  add_common(sim, sim_flags);
  sim->add_option("--experiment", sim_experiment,
                  "exp1 | exp1-one-lag | exp2 | exp3");
  sim->add_option("--out", sim_out, "output directory")->required();
  sim->add_option("-T,--length", sim_T, "series length");
  sim->add_option("--sigma", sim_sigma, "innovation stdev");
  sim->add_option("--replicates", sim_reps, "number of series");

  std::string fit_data, fit_out;
  CLI::App* fit = app.add_subcommand("fit", "run the Gibbs sampler");
  add_common(fit, fit_flags);
  fit->add_option("--data", fit_data, "input series CSV")->required();
  fit->add_option("--out", fit_out, "archive directory")->required();

  std::string spec_archive, spec_out, spec_times, spec_truth, spec_config;
  int spec_freqs = 314;
  CLI::App* spec = app.add_subcommand("spectrum", "posterior spectral grid");
  spec->add_option("--archive", spec_archive, "draws archive")->required();
  spec->add_option("--out", spec_out, "output CSV");
  spec->add_option("--times", spec_times, "comma-separated t probes");
  spec->add_option("--frequencies", spec_freqs, "grid size");
  spec->add_option("--truth", spec_truth, "truth sidecar for MSE");
  spec->add_option("--config", spec_config, "config for hash check");

  std::string lps_data, lps_pgrid, lps_spgrid;
  int lps_split = 0, lps_refit = 0;
  CLI::App* lps = app.add_subcommand("lps", "log predictive score");
  add_common(lps, lps_flags);
  lps->add_option("--data", lps_data, "input series CSV")->required();
  lps->add_option("--split", lps_split, "last training index");
  lps->add_option("--refit-every", lps_refit, "refit cadence");
  lps->add_option("--p-grid", lps_pgrid, "regular order range lo:hi");
  lps->add_option("--P-grid", lps_spgrid, "seasonal order range lo:hi");

  std::vector<std::string> diag_archives;
  std::string diag_times, diag_omegas;
  CLI::App* diag = app.add_subcommand("diag", "chain diagnostics");
  diag->add_option("--archive", diag_archives, "draws archive(s)")->required();
  diag->add_option("--times", diag_times, "probe times");
  diag->add_option("--omegas", diag_omegas, "probe frequencies");

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) {
      return cmd_simulate(sim_flags, sim_experiment, sim_out, sim_T, sim_sigma,
                          sim_reps);
    }
    if (fit->parsed()) return cmd_fit(fit_flags, fit_data, fit_out);
    if (spec->parsed()) {
      return cmd_spectrum(spec_archive, spec_out, spec_times, spec_freqs,
                          spec_truth, spec_config);
    }
    if (lps->parsed()) {
      return cmd_lps(lps_flags, lps_data, lps_split, lps_refit, lps_pgrid,
                     lps_spgrid);
    }
    if (diag->parsed()) return cmd_diag(diag_archives, diag_times, diag_omegas);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
