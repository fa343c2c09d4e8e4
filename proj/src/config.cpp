#include "tvsar/config.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

#include "tvsar/io.hpp"

namespace tvsar {

namespace {

std::string strip(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

std::vector<int> parse_int_list(const std::string& s) {
  std::vector<int> out;
  std::stringstream ss(s);
  std::string field;
  while (std::getline(ss, field, ',')) {
    field = strip(field);
    size_t pos = 0;
    const int v = std::stoi(field, &pos);
    if (pos != field.size()) throw std::invalid_argument("bad integer list");
    out.push_back(v);
  }
  if (out.empty()) throw std::invalid_argument("empty integer list");
  return out;
}

int parse_int(const std::string& s) {
  size_t pos = 0;
  const int v = std::stoi(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("bad integer: " + s);
  return v;
}

double parse_real(const std::string& s) {
  size_t pos = 0;
  const double v = std::stod(s, &pos);
  if (pos != s.size()) throw std::invalid_argument("bad real: " + s);
  return v;
}

bool parse_bool(const std::string& s) {
  if (s == "true" || s == "1" || s == "on") return true;
  if (s == "false" || s == "0" || s == "off") return false;
  throw std::invalid_argument("bad boolean: " + s);
}

}  // namespace

void apply_config_key(RunConfig& cfg, const std::string& key,
                      const std::string& value) {
  GibbsConfig& g = cfg.gibbs;
  if (key == "model.seasons") {
    cfg.seasons = parse_int_list(value);
  } else if (key == "model.orders") {
    cfg.orders = parse_int_list(value);
  } else if (key == "sampler.kind") {
    if (value == "ffbsx") g.sampler = GibbsConfig::Sampler::kFfbsx;
    else if (value == "pgas") g.sampler = GibbsConfig::Sampler::kPgas;
    else throw std::invalid_argument("sampler.kind must be ffbsx or pgas");
  } else if (key == "sampler.draws") {
    g.draws = parse_int(value);
  } else if (key == "sampler.burnin") {
    g.burnin = parse_int(value);
  } else if (key == "sampler.thin") {
    g.thin = parse_int(value);
  } else if (key == "sampler.particles") {
    g.particles = parse_int(value);
  } else if (key == "sampler.ess_threshold_frac") {
    g.ess_threshold_frac = parse_real(value);
  } else if (key == "sampler.warm_draws") {
    g.pgas_warm_draws = parse_int(value);
  } else if (key == "sampler.seed") {
    g.seed = std::stoull(value);
  } else if (key == "offset.kind") {
    if (value == "fixed") g.offset.kind = OffsetPolicy::Kind::kFixed;
    else if (value == "dsp") g.offset.kind = OffsetPolicy::Kind::kDspRule;
    else throw std::invalid_argument("offset.kind must be fixed or dsp");
  } else if (key == "offset.value") {
    g.offset.value = parse_real(value);
  } else if (key == "prior.mu0") {
    g.dsp_priors.mu0 = parse_real(value);
  } else if (key == "prior.sigma0") {
    g.dsp_priors.sigma0 = parse_real(value);
  } else if (key == "prior.kappa0") {
    g.dsp_priors.kappa0 = parse_real(value);
  } else if (key == "prior.psi0") {
    g.dsp_priors.psi0 = parse_real(value);
  } else if (key == "prior.sigma_v0") {
    g.sigma_v0 = parse_real(value);
  } else if (key == "noise.sv") {
    g.stochastic_volatility = parse_bool(value);
  } else if (key == "detrend.window") {
    cfg.detrend_window = parse_int(value);
  } else if (key == "sim.experiment") {
    cfg.experiment = value;
  } else if (key == "sim.T") {
    cfg.sim_T = parse_int(value);
  } else if (key == "sim.sigma") {
    cfg.sim_sigma = parse_real(value);
  } else if (key == "sim.replicates") {
    cfg.replicates = parse_int(value);
  } else if (key == "lps.split") {
    cfg.lps_split = parse_int(value);
  } else if (key == "lps.refit_every") {
    cfg.lps_refit_every = parse_int(value);
  } else if (key == "grid.frequencies") {
    cfg.grid_frequencies = parse_int(value);
  } else {
    throw std::invalid_argument("unknown config key: " + key);
  }
}

RunConfig load_config_file(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("cannot read config " + path);
  RunConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = strip(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) +
                                  ": expected key = value");
    }
    try {
      apply_config_key(cfg, strip(line.substr(0, eq)),
                       strip(line.substr(eq + 1)));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": " +
                                  e.what());
    }
  }
  return cfg;
}

std::string canonical_config(const RunConfig& cfg) {
  std::ostringstream out;
  auto list = [](const std::vector<int>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) {
      if (i) s += ',';
      s += std::to_string(v[i]);
    }
    return s;
  };
  const GibbsConfig& g = cfg.gibbs;
  out << "model.seasons=" << list(cfg.seasons) << '\n'
      << "model.orders=" << list(cfg.orders) << '\n'
      << "sampler.kind="
      << (g.sampler == GibbsConfig::Sampler::kPgas ? "pgas" : "ffbsx") << '\n'
      << "sampler.draws=" << g.draws << '\n'
      << "sampler.burnin=" << g.burnin << '\n'
      << "sampler.thin=" << g.thin << '\n'
      << "sampler.particles=" << g.particles << '\n'
      << "sampler.ess_threshold_frac=" << format_double(g.ess_threshold_frac)
      << '\n'
      << "sampler.warm_draws=" << g.pgas_warm_draws << '\n'
      << "sampler.seed=" << g.seed << '\n'
      << "offset.kind="
      << (g.offset.kind == OffsetPolicy::Kind::kDspRule ? "dsp" : "fixed")
      << '\n'
      << "offset.value=" << format_double(g.offset.value) << '\n'
      << "prior.mu0=" << format_double(g.dsp_priors.mu0) << '\n'
      << "prior.sigma0=" << format_double(g.dsp_priors.sigma0) << '\n'
      << "prior.kappa0=" << format_double(g.dsp_priors.kappa0) << '\n'
      << "prior.psi0=" << format_double(g.dsp_priors.psi0) << '\n'
      << "prior.sigma_v0=" << format_double(g.sigma_v0) << '\n'
      << "noise.sv=" << (g.stochastic_volatility ? "true" : "false") << '\n'
      << "detrend.window=" << cfg.detrend_window << '\n';
  return out.str();
}

std::uint64_t config_hash(const RunConfig& cfg) {
  // FNV-1a 64
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical_config(cfg)) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace tvsar
