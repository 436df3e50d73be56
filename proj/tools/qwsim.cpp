// qwsim: config-driven front end over the qw library. Subcommands cover the
// engineered-transmittance tables, single-walker transfer runs, two-photon
// correlation matrices, readout fringe scans, the quench report, and the
// tomography synthesize/fit pair. Every run is a pure function of the
// resolved config plus the seed key; outputs carry the config hash so a CSV
// can be traced back to the exact settings that produced it.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <numbers>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qw/ecc.hpp"
#include "qw/mesh.hpp"
#include "qw/profile.hpp"
#include "qw/spin.hpp"
#include "qw/tomography.hpp"
#include "qw/twophoton.hpp"
#include "qw/walk.hpp"

namespace {

constexpr double kPi = std::numbers::pi;

std::string g12(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

std::string g17(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::uint64_t fnv1a(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string hex16(std::uint64_t h) {
  char buf[24];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

long long parse_int(const std::string& key, const std::string& text) {
  errno = 0;
  char* end = nullptr;
  const long long v = std::strtoll(text.c_str(), &end, 10);
  if (errno != 0 || end == text.c_str() || *end != '\0')
    throw std::invalid_argument("config key '" + key + "': expected an integer, got '" + text +
                                "'");
  return v;
}

double parse_double(const std::string& key, const std::string& text) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(text.c_str(), &end);
  if (errno != 0 || end == text.c_str() || *end != '\0')
    throw std::invalid_argument("config key '" + key + "': expected a number, got '" + text + "'");
  return v;
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> parts;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) parts.push_back(trim(item));
  return parts;
}

// Key-value store with consumption tracking. Handlers read every key they
// understand (recording the canonically formatted resolved value, defaults
// included), then finish() rejects whatever was provided but never read and
// hash() fingerprints the resolved run.
class Config {
 public:
  explicit Config(std::map<std::string, std::string> raw) : raw_(std::move(raw)) {}

  bool has(const std::string& key) const { return raw_.count(key) != 0; }

  long long get_int(const std::string& key, long long fallback) {
    const auto it = raw_.find(key);
    const long long v = it == raw_.end() ? fallback : parse_int(key, it->second);
    resolved_[key] = std::to_string(v);
    return v;
  }

  long long require_int(const std::string& key) {
    require(key);
    return get_int(key, 0);
  }

  double get_double(const std::string& key, double fallback) {
    const auto it = raw_.find(key);
    const double v = it == raw_.end() ? fallback : parse_double(key, it->second);
    resolved_[key] = g17(v);
    return v;
  }

  double require_double(const std::string& key) {
    require(key);
    return get_double(key, 0.0);
  }

  bool get_bool(const std::string& key, bool fallback) {
    const auto it = raw_.find(key);
    bool v = fallback;
    if (it != raw_.end()) {
      const std::string& t = it->second;
      if (t == "true" || t == "1")
        v = true;
      else if (t == "false" || t == "0")
        v = false;
      else
        throw std::invalid_argument("config key '" + key + "': expected true/false, got '" + t +
                                    "'");
    }
    resolved_[key] = v ? "true" : "false";
    return v;
  }

  std::string get_string(const std::string& key, const std::string& fallback) {
    const auto it = raw_.find(key);
    const std::string v = it == raw_.end() ? fallback : it->second;
    resolved_[key] = v;
    return v;
  }

  std::string require_string(const std::string& key) {
    require(key);
    return get_string(key, "");
  }

  std::vector<int> get_int_list(const std::string& key, const std::vector<int>& fallback) {
    const auto it = raw_.find(key);
    std::vector<int> v;
    if (it == raw_.end()) {
      v = fallback;
    } else {
      for (const std::string& part : split_list(it->second))
        v.push_back(static_cast<int>(parse_int(key, part)));
    }
    std::string canon;
    for (std::size_t k = 0; k < v.size(); ++k)
      canon += (k ? "," : "") + std::to_string(v[k]);
    resolved_[key] = canon;
    return v;
  }

  std::vector<double> require_double_list(const std::string& key) {
    require(key);
    std::vector<double> v;
    for (const std::string& part : split_list(raw_.at(key)))
      v.push_back(parse_double(key, part));
    std::string canon;
    for (std::size_t k = 0; k < v.size(); ++k) canon += (k ? "," : "") + g17(v[k]);
    resolved_[key] = canon;
    return v;
  }

  // Every provided key must have been consumed by the command.
  void finish() const {
    for (const auto& [key, value] : raw_)
      if (resolved_.count(key) == 0)
        throw std::invalid_argument("unknown config key '" + key + "'");
  }

  // FNV-1a over the sorted resolved key=value lines; defaults are resolved
  // too, so the hash pins the full effective configuration.
  std::uint64_t hash() const {
    std::string bytes;
    for (const auto& [key, value] : resolved_) bytes += key + "=" + value + "\n";
    return fnv1a(bytes);
  }

 private:
  void require(const std::string& key) const {
    if (!raw_.count(key))
      throw std::invalid_argument("config key '" + key + "' is required");
  }

  std::map<std::string, std::string> raw_;
  std::map<std::string, std::string> resolved_;
};

std::string json_scalar(const std::string& key, const nlohmann::json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_boolean()) return j.get<bool>() ? "true" : "false";
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  if (j.is_number_float()) return g17(j.get<double>());
  throw std::invalid_argument("config key '" + key + "': unsupported JSON value type");
}

// JSON ingestion: a flat object, optionally wrapping per-command sections
// ({"tables": {...}, "seed": 7}). Scalars at the top level apply to every
// command; the section matching `command` is merged in; other sections are
// ignored so one file can drive several commands.
std::map<std::string, std::string> config_from_json(const std::string& text,
                                                    const std::string& command) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw std::invalid_argument(std::string("config is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("JSON config must be an object");

  std::map<std::string, std::string> raw;
  for (const auto& [key, value] : j.items()) {
    if (value.is_object()) {
      if (key != command) continue;
      for (const auto& [k2, v2] : value.items()) {
        if (v2.is_array()) {
          std::string joined;
          for (std::size_t i = 0; i < v2.size(); ++i)
            joined += (i ? "," : "") + json_scalar(k2, v2[i]);
          raw[k2] = joined;
        } else {
          raw[k2] = json_scalar(k2, v2);
        }
      }
    } else if (value.is_array()) {
      std::string joined;
      for (std::size_t i = 0; i < value.size(); ++i)
        joined += (i ? "," : "") + json_scalar(key, value[i]);
      raw[key] = joined;
    } else {
      raw[key] = json_scalar(key, value);
    }
  }
  return raw;
}

// Flat text ingestion: key=value lines, '#' comment lines, blank lines, and
// optional [section] headers. Keys before any header are shared; keys under
// [command] apply; keys under other sections belong to other commands.
std::map<std::string, std::string> config_from_text(const std::string& text,
                                                    const std::string& command) {
  std::map<std::string, std::string> raw;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (t.front() == '[' && t.back() == ']') {
      section = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("config line " + std::to_string(lineno) +
                                  ": expected key=value, got '" + t + "'");
    const std::string key = trim(t.substr(0, eq));
    if (key.empty())
      throw std::invalid_argument("config line " + std::to_string(lineno) + ": empty key");
    if (!section.empty() && section != command) continue;
    raw[key] = trim(t.substr(eq + 1));
  }
  return raw;
}

std::map<std::string, std::string> load_config(const std::string& path,
                                               const std::string& command) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string text = buf.str();
  const auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{')
    return config_from_json(text, command);
  return config_from_text(text, command);
}

std::string hash_line(const Config& cfg) { return "# config_hash=" + hex16(cfg.hash()) + "\n"; }

qw::RVec engineered_couplings(int n) {
  qw::RVec j(n - 1);
  for (int x = 1; x < n; ++x)
    j(x - 1) = kPi / (n + 1) * std::sqrt(double(x) * (n - x));
  return j;
}

qw::RVec phase_grid(int points) {
  if (points < 2) throw std::invalid_argument("points must be at least 2");
  qw::RVec g(points);
  for (int k = 0; k < points; ++k) g(k) = 2.0 * kPi * k / (points - 1);
  return g;
}

qw::Mat chip_unitary(int n, int m, double t_bulk, double t_ends) {
  return qw::compile_unitary(qw::layout_dtqw(qw::table_profile(n, m, t_bulk, t_ends)));
}

// ---------------------------------------------------------------------------
// tables: one row per step count, engineered transmittances and the transfer
// quality they reach. The default step lists mirror the published tables;
// analytic=true swaps the optimizer for the five-site closed forms.

std::vector<int> default_steps(int n) {
  std::vector<int> m_list;
  const int first = n == 7 ? 6 : n + 1;
  for (int m = first; m_list.size() < 9; m += 2) m_list.push_back(m);
  return m_list;
}

std::string cmd_tables(Config& cfg) {
  const int n = static_cast<int>(cfg.require_int("n"));
  const bool analytic = cfg.get_bool("analytic", false);
  std::vector<int> fallback;
  if (n >= 5 && n <= 7) fallback = default_steps(n);
  if (fallback.empty() && !cfg.has("m_list"))
    throw std::invalid_argument("tables: m_list is required when n is not 5, 6, or 7");
  const std::vector<int> m_list = cfg.get_int_list("m_list", fallback);
  cfg.get_int("seed", 0);
  cfg.finish();
  if (analytic && n != 5)
    throw std::invalid_argument("tables: the analytic formulas apply to five-site chains");

  std::string out = hash_line(cfg) + "m,t_bulk,t_ends,q\n";
  for (const int m : m_list) {
    double tb = 0.0, te = 0.0, q = 0.0;
    if (analytic) {
      te = std::pow(std::sin(2.0 * kPi / m), 2);
      tb = std::pow(std::sin(kPi * std::sqrt(6.0) / m), 2);
      q = qw::transfer_quality(qw::table_profile(n, m, tb, te));
    } else {
      const qw::TransmittanceOptimum opt = qw::optimize_transmittances(n, m);
      tb = opt.t_bulk;
      te = opt.t_ends;
      q = opt.q;
    }
    out += std::to_string(m) + "," + g12(tb) + "," + g12(te) + "," + g12(q) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// transfer: run one walker from (1, right) through the profile and dump the
// final site distribution.

std::string cmd_transfer(Config& cfg) {
  const int n = static_cast<int>(cfg.require_int("n"));
  const int m = static_cast<int>(cfg.require_int("m"));
  const std::string kind = cfg.get_string("profile", "table");
  qw::CouplingProfile profile;
  if (kind == "table") {
    const double tb = cfg.require_double("t_bulk");
    const double te = cfg.require_double("t_ends");
    profile = qw::table_profile(n, m, tb, te);
  } else if (kind == "pst" || kind == "minimal") {
    if (cfg.has("t_bulk") || cfg.has("t_ends"))
      throw std::invalid_argument("transfer: t_bulk/t_ends apply to profile=table only");
    profile = kind == "pst" ? qw::pst_profile(n, m) : qw::minimal_profile(n, m);
  } else {
    throw std::invalid_argument("transfer: profile must be table, pst, or minimal");
  }
  cfg.get_int("seed", 0);
  cfg.finish();

  qw::WalkerState state = qw::basis_walker(n, 1, qw::kRight);
  for (int k = 0; k < m; ++k) state = qw::step(state, profile);

  std::string out = hash_line(cfg);
  out += "# transfer_quality=" + g17(qw::transfer_quality(profile)) + "\n";
  out += "site,p_left,p_right\n";
  for (int site = 0; site <= n; ++site) {
    const double pl = std::norm(state.amp(qw::walker_index(n, site, qw::kLeft)));
    const double pr = std::norm(state.amp(qw::walker_index(n, site, qw::kRight)));
    out += std::to_string(site) + "," + g12(pl) + "," + g12(pr) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// correlate: two-photon correlation matrices for the symmetric and
// antisymmetric pair on the configured mesh, with the similarity summary.

std::string cmd_correlate(Config& cfg) {
  const int n = static_cast<int>(cfg.get_int("n", 5));
  const int m = static_cast<int>(cfg.get_int("m", 6));
  const double tb = cfg.get_double("t_bulk", 0.36);
  const double te = cfg.get_double("t_ends", 0.25);
  const int mode_i = static_cast<int>(cfg.get_int("mode_i", 2));
  const int mode_j = static_cast<int>(cfg.get_int("mode_j", 4));
  cfg.get_int("seed", 0);
  cfg.finish();

  const qw::Mat u = chip_unitary(n, m, tb, te);
  const qw::RMat boson = qw::correlation_matrix({mode_i, mode_j, 0.0, u, u});
  const qw::RMat fermion = qw::correlation_matrix({mode_i, mode_j, kPi, u, u});

  std::string out = hash_line(cfg) + "record,r,s,value\n";
  const auto block = [&out, n](const char* name, const qw::RMat& gamma) {
    for (int r = 1; r <= n; ++r)
      for (int s = 1; s <= n; ++s)
        out += std::string(name) + "," + std::to_string(r) + "," + std::to_string(s) + "," +
               g12(gamma(r - 1, s - 1)) + "\n";
  };
  block("gamma_boson", boson);
  block("gamma_fermion", fermion);
  out += "similarity_boson_boson,0,0," + g12(qw::similarity(boson, boson)) + "\n";
  out += "similarity_fermion_fermion,0,0," + g12(qw::similarity(fermion, fermion)) + "\n";
  out += "similarity_boson_fermion,0,0," + g12(qw::similarity(boson, fermion)) + "\n";
  return out;
}

// ---------------------------------------------------------------------------
// fringes: S-curves of the readout stage against the scanned phase,
// plot-ready long format.

std::string cmd_fringes(Config& cfg) {
  const int m = static_cast<int>(cfg.get_int("m", 6));
  const double tb = cfg.get_double("t_bulk", 0.36);
  const double te = cfg.get_double("t_ends", 0.25);
  const int mode_i = static_cast<int>(cfg.get_int("mode_i", 2));
  const int mode_j = static_cast<int>(cfg.get_int("mode_j", 4));
  const double chi = cfg.get_double("chi", kPi);
  qw::EccSettings base;
  base.phi2 = cfg.get_double("phi2", 0.0);
  base.phi5 = cfg.get_double("phi5", 0.0);
  base.eta5 = cfg.get_double("eta5", 1.0);
  const std::string scan = cfg.get_string("scan", "both");
  const int points = static_cast<int>(cfg.get_int("points", 41));
  cfg.get_int("seed", 0);
  cfg.finish();
  if (scan != "phi2" && scan != "phi5" && scan != "both")
    throw std::invalid_argument("fringes: scan must be phi2, phi5, or both");

  // The readout stage is five-mode, so the mesh is too.
  const qw::Mat u = chip_unitary(5, m, tb, te);
  const qw::TwoPhotonInput input{mode_i, mode_j, chi, u, u};
  const qw::RVec grid = phase_grid(points);

  std::string out = hash_line(cfg) + "record,phi,value\n";
  const auto curves = [&out, &grid](const qw::FringeCurves& c, const char* low, const char* high) {
    for (int k = 0; k < grid.size(); ++k)
      out += std::string(low) + "," + g12(c.phases(k)) + "," + g12(c.s_low(k)) + "\n";
    for (int k = 0; k < grid.size(); ++k)
      out += std::string(high) + "," + g12(c.phases(k)) + "," + g12(c.s_high(k)) + "\n";
  };
  if (scan != "phi2")
    curves(qw::fringe_scan(input, base, qw::ScanPhase::kPhi5, grid), "s1", "s5");
  if (scan != "phi5")
    curves(qw::fringe_scan(input, base, qw::ScanPhase::kPhi2, grid), "s2", "s4");
  return out;
}

// ---------------------------------------------------------------------------
// quench: spin-oracle entanglement fractions for the engineered chain at the
// requested time, plus the photonic cascade of the five-mode chip when the
// profile is the discrete mesh.

std::string cmd_quench(Config& cfg) {
  const int n = static_cast<int>(cfg.get_int("n", 5));
  const double time = cfg.get_double("time", (n + 1) / 2.0);
  const std::string profile = cfg.get_string("profile", "chip");
  const int m = static_cast<int>(cfg.get_int("m", 6));
  const double tb = cfg.get_double("t_bulk", 0.36);
  const double te = cfg.get_double("t_ends", 0.25);
  qw::EccSettings settings;
  settings.phi2 = cfg.get_double("phi2", 0.0);
  settings.phi5 = cfg.get_double("phi5", 0.0);
  settings.eta5 = cfg.get_double("eta5", 1.0);
  const int points = static_cast<int>(cfg.get_int("points", 41));
  cfg.get_int("seed", 0);
  cfg.finish();
  if (profile != "chip" && profile != "pst")
    throw std::invalid_argument("quench: profile must be chip or pst");

  const qw::SpinState state = qw::quench_evolve(n, engineered_couplings(n), time);

  std::string out = hash_line(cfg) + "record,value\n";
  out += "spin_e15," + g12(qw::entanglement_fraction_direct(state, 1, n)) + "\n";
  if (n >= 4)
    out += "spin_e24," + g12(qw::entanglement_fraction_direct(state, 2, n - 1)) + "\n";
  out += "rainbow_fidelity," + g12(qw::rainbow_fidelity(state)) + "\n";

  // The cascade readout is five-mode; other sizes report the oracle only.
  if (profile == "chip" && n == 5) {
    const qw::Mat u = chip_unitary(5, m, tb, te);
    const qw::TwoPhotonInput input{2, 4, kPi, u, u};
    const qw::EntanglementFractions ef =
        qw::entanglement_fractions(qw::cascade_observables(input, settings));
    out += "chip_e15," + g12(ef.e15) + "\n";
    out += "chip_e24," + g12(ef.e24) + "\n";

    const qw::RVec grid = phase_grid(points);
    const qw::FringeCurves c5 = qw::fringe_scan(input, settings, qw::ScanPhase::kPhi5, grid);
    const qw::FringeCurves c2 = qw::fringe_scan(input, settings, qw::ScanPhase::kPhi2, grid);
    out += "visibility_s1," + g12(qw::fit_sinusoid(c5.phases, c5.s_low).visibility) + "\n";
    out += "visibility_s5," + g12(qw::fit_sinusoid(c5.phases, c5.s_high).visibility) + "\n";
    out += "visibility_s2," + g12(qw::fit_sinusoid(c2.phases, c2.s_low).visibility) + "\n";
    out += "visibility_s4," + g12(qw::fit_sinusoid(c2.phases, c2.s_high).visibility) + "\n";
  }
  return out;
}

// ---------------------------------------------------------------------------
// tomography-synthesize: draw (or accept) a truth parameter vector, emit its
// measurement tables. The truth is recorded in a comment the measurement
// parser skips, so the file feeds tomography-fit directly.

std::string cmd_tomo_synthesize(Config& cfg) {
  const int n_guides = static_cast<int>(cfg.get_int("n_guides", 5));
  const int n_layers = static_cast<int>(cfg.get_int("n_layers", 6));
  const double noise = cfg.get_double("noise", 0.0);
  const std::uint64_t seed = static_cast<std::uint64_t>(cfg.get_int("seed", 1));
  const bool have_params = cfg.has("params");
  std::vector<double> given;
  if (have_params) given = cfg.require_double_list("params");
  cfg.finish();

  const qw::CircuitModel model = qw::chip_model(n_guides, n_layers);
  const int pc = qw::parameter_count(model);
  const int ns = static_cast<int>(model.slots.size());

  std::mt19937_64 rng(seed);
  const auto uniform = [&rng] { return double(rng() >> 11) * 0x1.0p-53; };
  qw::RVec params(2 * pc);
  if (have_params) {
    if (static_cast<int>(given.size()) != 2 * pc)
      throw std::invalid_argument("tomography-synthesize: params must hold " +
                                  std::to_string(2 * pc) + " values (H block then V block)");
    for (int k = 0; k < 2 * pc; ++k) params(k) = given[k];
  } else {
    // Interior draws: couplers away from 0/1, phases away from the 0/pi
    // conjugation boundary.
    for (int b = 0; b < 2; ++b) {
      for (int k = 0; k < pc - ns; ++k) params(b * pc + k) = 0.15 + 0.70 * uniform();
      for (int k = pc - ns; k < pc; ++k) params(b * pc + k) = 0.30 + (kPi - 0.60) * uniform();
    }
  }
  const std::uint64_t noise_seed = rng();

  const qw::MeasurementSet data = qw::synthesize_measurements(
      qw::compile_circuit(model, params.segment(0, pc)),
      qw::compile_circuit(model, params.segment(pc, pc)), noise, noise_seed);

  std::string out = hash_line(cfg);
  out += "# truth_params=";
  for (int k = 0; k < params.size(); ++k) out += (k ? "," : "") + g17(params(k));
  out += "\n" + qw::measurements_to_text(data);
  return out;
}

// ---------------------------------------------------------------------------
// tomography-fit: reconstruct the circuit behind a measurement file, with
// optional Monte Carlo error bars.

std::string cmd_tomo_fit(Config& cfg) {
  const std::string path = cfg.require_string("data");
  const int n_guides = static_cast<int>(cfg.get_int("n_guides", 5));
  const int n_layers = static_cast<int>(cfg.get_int("n_layers", 6));
  qw::FitOptions opt;
  opt.n_starts = static_cast<int>(cfg.get_int("n_starts", opt.n_starts));
  opt.max_nfev = static_cast<int>(cfg.get_int("max_nfev", opt.max_nfev));
  opt.seed = static_cast<std::uint64_t>(cfg.get_int("seed", static_cast<long long>(opt.seed)));
  const int mc_samples = static_cast<int>(cfg.get_int("monte_carlo", 0));
  cfg.finish();

  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::invalid_argument("cannot read measurement file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  const qw::MeasurementSet data = qw::measurements_from_text(buf.str());

  const qw::CircuitModel model = qw::chip_model(n_guides, n_layers);
  const qw::FitResult fit = qw::fit_circuit(data, model, opt);

  std::string out = hash_line(cfg) + "record,index,value\n";
  for (int k = 0; k < fit.params.size(); ++k)
    out += "param," + std::to_string(k) + "," + g17(fit.params(k)) + "\n";
  out += "residual,0," + g17(fit.residual) + "\n";
  out += "fidelity_hv,0," + g17(qw::reconstruction_fidelity(fit.u_h, fit.u_v)) + "\n";

  if (mc_samples > 0) {
    const qw::MonteCarloErrors mc =
        qw::monte_carlo_errors(data, model, mc_samples, opt.seed, opt);
    for (int k = 0; k < mc.param_mean.size(); ++k)
      out += "mc_param_mean," + std::to_string(k) + "," + g17(mc.param_mean(k)) + "\n";
    for (int k = 0; k < mc.param_std.size(); ++k)
      out += "mc_param_std," + std::to_string(k) + "," + g17(mc.param_std(k)) + "\n";
    const auto stats = [&out](const char* name, const qw::RVec& f) {
      const double mean = f.mean();
      const double sd = std::sqrt((f.array() - mean).square().sum() / (f.size() - 1));
      out += std::string(name) + "_mean,0," + g17(mean) + "\n";
      out += std::string(name) + "_std,0," + g17(sd) + "\n";
    };
    stats("mc_fidelity_h", mc.fidelity_h);
    stats("mc_fidelity_v", mc.fidelity_v);
  }
  return out;
}

void emit(const std::string& out_path, const std::string& content) {
  if (out_path.empty()) {
    std::fwrite(content.data(), 1, content.size(), stdout);
    return;
  }
  std::ofstream out(out_path, std::ios::binary);
  out.write(content.data(), static_cast<std::streamsize>(content.size()));
  if (!out) throw std::invalid_argument("cannot write output file '" + out_path + "'");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"quantum-walk chip experiments: tables, transfer, correlations, fringes,\n"
               "quench report, and circuit tomography"};
  app.require_subcommand(1);

  std::string config_path, out_path;
  long long seed_flag = 0;
  int parallel = 1;
  app.add_option("--config", config_path, "config file (key=value lines or a JSON object)");
  app.add_option("--out", out_path, "output path (default: stdout)");
  auto* seed_opt = app.add_option("--seed", seed_flag, "override the config seed key");
  app.add_option("--parallel", parallel, "worker hint; the core is deterministic either way")
      ->check(CLI::PositiveNumber);

  const std::vector<std::pair<std::string, std::string>> commands = {
      {"tables", "engineered transmittances and transfer quality per step count"},
      {"transfer", "single-walker transfer run: final site distribution"},
      {"correlate", "two-photon correlation matrices and similarity summary"},
      {"fringes", "readout fringe scans over phi2/phi5"},
      {"quench", "spin-oracle quench report plus the chip cascade"},
      {"tomography-synthesize", "measurement tables for a known or drawn circuit"},
      {"tomography-fit", "reconstruct a circuit from a measurement file"},
  };
  std::vector<std::string> overrides;
  for (const auto& [name, description] : commands) {
    auto* sub = app.add_subcommand(name, description);
    sub->fallthrough();
    sub->add_option("overrides", overrides, "key=value settings merged over the config file");
  }

  try {
    app.parse(argc, argv);

    const std::string command = app.get_subcommands().front()->get_name();
    std::map<std::string, std::string> raw;
    if (!config_path.empty()) raw = load_config(config_path, command);
    for (const std::string& kv : overrides) {
      const auto eq = kv.find('=');
      if (eq == std::string::npos || eq == 0)
        throw std::invalid_argument("override '" + kv + "' is not key=value");
      raw[trim(kv.substr(0, eq))] = trim(kv.substr(eq + 1));
    }
    if (seed_opt->count() > 0) raw["seed"] = std::to_string(seed_flag);

    Config cfg(raw);
    std::string output;
    if (command == "tables")
      output = cmd_tables(cfg);
    else if (command == "transfer")
      output = cmd_transfer(cfg);
    else if (command == "correlate")
      output = cmd_correlate(cfg);
    else if (command == "fringes")
      output = cmd_fringes(cfg);
    else if (command == "quench")
      output = cmd_quench(cfg);
    else if (command == "tomography-synthesize")
      output = cmd_tomo_synthesize(cfg);
    else
      output = cmd_tomo_fit(cfg);
    emit(out_path, output);
    return 0;
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  } catch (const qw::convergence_error& e) {
    std::fprintf(stderr, "qwsim: %s\n", e.what());
    return 3;
  } catch (const std::logic_error& e) {
    std::fprintf(stderr, "qwsim: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "qwsim: %s\n", e.what());
    return 1;
  }
}
