#include "qw/tomography.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>

namespace qw {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSigmaFloor = 1e-6;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// mt19937_64 has a standardized output sequence; the uniform mapping and
// Box-Muller transform are spelled out here so streams stay byte-identical
// across standard libraries.
class GaussianStream {
 public:
  explicit GaussianStream(std::uint64_t seed) : eng_(seed) {}

  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (have_) {
      have_ = false;
      return cached_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform();
    } while (u1 <= 0.0);
    const double u2 = uniform();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    cached_ = radius * std::sin(2.0 * kPi * u2);
    have_ = true;
    return radius * std::cos(2.0 * kPi * u2);
  }

 private:
  std::mt19937_64 eng_;
  double cached_ = 0.0;
  bool have_ = false;
};

// Same coincidence-visibility convention as the two-photon module, except
// that a dark classical rate records 0 instead of throwing: a synthesized
// table needs a value in every cell.
double safe_visibility(const Mat& u, int i, int j, int r, int s) {
  const Complex a = u(r - 1, i - 1) * u(s - 1, j - 1);
  const Complex b = u(r - 1, j - 1) * u(s - 1, i - 1);
  const double p_cl = std::norm(a) + std::norm(b);
  if (p_cl < 1e-12) return 0.0;
  return (p_cl - std::norm(a + b)) / p_cl;
}

void model_tables(const Mat& u, RMat& splitting, RMat& visibility) {
  const int n = static_cast<int>(u.rows());
  splitting = u.cwiseAbs2();
  const auto pairs = mode_pairs(n);
  const int p = static_cast<int>(pairs.size());
  visibility.resize(p, p);
  for (int a = 0; a < p; ++a)
    for (int b = 0; b < p; ++b)
      visibility(a, b) =
          safe_visibility(u, pairs[a].first, pairs[a].second, pairs[b].first, pairs[b].second);
}

// n_modes from the shapes; throws when any block disagrees.
int check_measurements(const MeasurementSet& d, bool require_positive_sigmas) {
  const int n = static_cast<int>(d.splitting_h.rows());
  if (n < 2 || d.splitting_h.cols() != n)
    throw std::invalid_argument("measurement set: splitting_h must be square, n >= 2");
  const int p = n * (n - 1) / 2;
  const auto square = [](const RMat& m, int dim) {
    return m.rows() == dim && m.cols() == dim;
  };
  if (!square(d.splitting_v, n) || !square(d.sigma_splitting_h, n) ||
      !square(d.sigma_splitting_v, n))
    throw std::invalid_argument("measurement set: splitting blocks disagree in shape");
  if (!square(d.visibility_h, p) || !square(d.visibility_v, p) ||
      !square(d.sigma_visibility_h, p) || !square(d.sigma_visibility_v, p))
    throw std::invalid_argument("measurement set: visibility blocks must be pairs x pairs");
  if (require_positive_sigmas) {
    const auto positive = [](const RMat& m) { return (m.array() > 0.0).all(); };
    if (!positive(d.sigma_splitting_h) || !positive(d.sigma_splitting_v) ||
        !positive(d.sigma_visibility_h) || !positive(d.sigma_visibility_v))
      throw std::invalid_argument("measurement set: every sigma must be positive");
  }
  return n;
}

void check_model(const CircuitModel& model) {
  const int n = model.mesh.n_modes;
  if (n < 2) throw std::invalid_argument("circuit model: needs at least two guides");
  if (model.mesh.layers.empty()) throw std::invalid_argument("circuit model: needs layers");
  for (const auto& slot : model.slots) {
    if (slot.layer < 1 || slot.layer > static_cast<int>(model.mesh.layers.size()))
      throw std::invalid_argument("circuit model: phase slot layer off the template");
    if (slot.mode < 1 || slot.mode > n)
      throw std::invalid_argument("circuit model: phase slot mode off the template");
  }
}

int coupler_count(const CircuitModel& model) {
  int c = 0;
  for (const auto& layer : model.mesh.layers) c += static_cast<int>(layer.couplers.size());
  return c;
}

// One polarization block of the stacked vector.
RVec block_of(const RVec& params, int block, int pc) {
  return params.segment(block * pc, pc);
}

double block_chi_square(const Mat& u, const RMat& split_d, const RMat& vis_d,
                        const RMat& sig_split, const RMat& sig_vis) {
  RMat split_m, vis_m;
  model_tables(u, split_m, vis_m);
  const double s = (((split_m - split_d).array() / sig_split.array()).square()).sum();
  const double v = (((vis_m - vis_d).array() / sig_vis.array()).square()).sum();
  return s + v;
}

// Internal fit coordinates: T = sin^2(theta) keeps the box [0, 1] without
// constraint handling; phases run free.
RVec to_internal(const RVec& pub, int nc) {
  RVec z = pub;
  for (int k = 0; k < nc; ++k) z(k) = std::asin(std::sqrt(std::min(1.0, std::max(0.0, pub(k)))));
  return z;
}

RVec to_public(const RVec& z, int nc) {
  RVec pub = z;
  for (int k = 0; k < nc; ++k) {
    const double s = std::sin(z(k));
    pub(k) = s * s;
  }
  for (int k = nc; k < z.size(); ++k) pub(k) = std::atan2(std::sin(z(k)), std::cos(z(k)));
  return pub;
}

// Conjugation flips every phase sign and nothing else the data can see;
// pick the branch whose phase sines sum non-negative.
void canonicalize_block(RVec& pub, int nc) {
  double s = 0.0;
  for (int k = nc; k < pub.size(); ++k) s += std::sin(pub(k));
  if (s < 0.0)
    for (int k = nc; k < pub.size(); ++k) pub(k) = -pub(k);
}

struct BlockData {
  RMat split, vis, sig_split, sig_vis;
};

BlockData h_block(const MeasurementSet& d) {
  return {d.splitting_h, d.visibility_h, d.sigma_splitting_h, d.sigma_visibility_h};
}

BlockData v_block(const MeasurementSet& d) {
  return {d.splitting_v, d.visibility_v, d.sigma_splitting_v, d.sigma_visibility_v};
}

struct BlockFit {
  RVec pub;  // public coordinates
  double cost = 0.0;
  bool converged = false;
};

BlockFit fit_block(const BlockData& data, const CircuitModel& model,
                   const std::vector<RVec>& starts, int max_nfev) {
  const int nc = coupler_count(model);
  const auto residuals = [&](const RVec& z) {
    const Mat u = compile_circuit(model, to_public(z, nc));
    RMat split_m, vis_m;
    model_tables(u, split_m, vis_m);
    const int ns = static_cast<int>(split_m.size());
    const int nv = static_cast<int>(vis_m.size());
    RVec r(ns + nv);
    int k = 0;
    for (int row = 0; row < split_m.rows(); ++row)
      for (int col = 0; col < split_m.cols(); ++col, ++k)
        r(k) = (split_m(row, col) - data.split(row, col)) / data.sig_split(row, col);
    for (int row = 0; row < vis_m.rows(); ++row)
      for (int col = 0; col < vis_m.cols(); ++col, ++k)
        r(k) = (vis_m(row, col) - data.vis(row, col)) / data.sig_vis(row, col);
    return r;
  };

  LeastSquaresOptions lm;
  lm.max_nfev = max_nfev;
  struct Candidate {
    RVec z;
    double cost = 0.0;
    bool converged = false;
  };
  std::vector<Candidate> runs;
  runs.reserve(starts.size());
  for (const RVec& start : starts) {
    const LeastSquaresResult run = levenberg_marquardt(residuals, to_internal(start, nc), lm);
    runs.push_back({run.x, run.cost, run.converged});
  }
  std::sort(runs.begin(), runs.end(),
            [](const Candidate& a, const Candidate& b) { return a.cost < b.cost; });
  // A fresh damping schedule un-sticks runs that stalled on a steep wall;
  // two rounds on the leading candidates are cheap next to the start sweep.
  for (int round = 0; round < 2; ++round) {
    for (size_t k = 0; k < runs.size() && k < 4; ++k) {
      const LeastSquaresResult again = levenberg_marquardt(residuals, runs[k].z, lm);
      if (again.cost < runs[k].cost) runs[k] = {again.x, again.cost, again.converged};
    }
    std::sort(runs.begin(), runs.end(),
              [](const Candidate& a, const Candidate& b) { return a.cost < b.cost; });
  }

  // The data cannot split exact twin ties, and chi-square gaps below the
  // statistic's own width carry no evidence either, so every candidate
  // within that band of the best is treated as the same fit and the
  // canonical-domain score decides: phases are declared to live in
  // (0, pi), and the block whose phase sines sum largest wins.
  const int n_data = static_cast<int>(data.split.size() + data.vis.size());
  const int n_par = nc + static_cast<int>(model.slots.size());
  const double band = 3.0 * std::sqrt(2.0 * std::max(1, n_data - n_par));
  const double best_cost = std::min_element(runs.begin(), runs.end(), [](auto& a, auto& b) {
                             return a.cost < b.cost;
                           })->cost;
  BlockFit best;
  best.cost = std::numeric_limits<double>::infinity();
  double best_score = -std::numeric_limits<double>::infinity();
  for (const Candidate& cand : runs) {
    best.converged = best.converged || cand.converged;
    if (cand.cost > best_cost + band) continue;
    RVec pub = to_public(cand.z, nc);
    canonicalize_block(pub, nc);
    double score = 0.0;
    for (int k = nc; k < pub.size(); ++k) score += std::sin(pub(k));
    if (score > best_score) {
      best_score = score;
      best.pub = pub;
      best.cost = cand.cost;
    }
  }
  // The band winner may come from an unpolished run; tighten it in place.
  if (best.pub.size() > 0) {
    const LeastSquaresResult fin = levenberg_marquardt(residuals, to_internal(best.pub, nc), lm);
    if (fin.cost <= best.cost) {
      best.cost = fin.cost;
      best.pub = to_public(fin.x, nc);
      canonicalize_block(best.pub, nc);
    }
  }
  return best;
}

// Maps a fitted block to the canonical representative of its twin fiber:
// the point the pipeline returns for the block's own exact tables. Twins
// tie the chi-square on any data, so this changes gauge, not fit quality.
// The sweep is denser than the data fit's and includes the point itself:
// the representative is the score maximum over the twins found, so two
// runs agree only when both enumerate the fiber well enough to see that
// maximum. If the refit somehow misses the fiber the point is kept as is.
RVec canonical_block(const CircuitModel& model, const RVec& pub, std::vector<RVec> starts,
                     int max_nfev) {
  starts.push_back(pub);
  BlockData exact;
  model_tables(compile_circuit(model, pub), exact.split, exact.vis);
  exact.sig_split = RMat::Constant(exact.split.rows(), exact.split.cols(), kSigmaFloor);
  exact.sig_vis = RMat::Constant(exact.vis.rows(), exact.vis.cols(), kSigmaFloor);
  const BlockFit f = fit_block(exact, model, starts, max_nfev);
  return f.cost <= 1e-3 ? f.pub : pub;
}

}  // namespace

std::vector<std::pair<int, int>> mode_pairs(int n_modes) {
  if (n_modes < 2) throw std::invalid_argument("mode_pairs: need at least two modes");
  std::vector<std::pair<int, int>> pairs;
  for (int a = 1; a <= n_modes; ++a)
    for (int b = a + 1; b <= n_modes; ++b) pairs.emplace_back(a, b);
  return pairs;
}

int measurement_count(const MeasurementSet& data) {
  const int n = check_measurements(data, false);
  const int p = n * (n - 1) / 2;
  return 2 * (n * n + p * p);
}

std::string measurements_to_text(const MeasurementSet& data) {
  check_measurements(data, false);
  std::ostringstream os;
  const auto emit = [&os](const RMat& m) {
    for (int r = 0; r < m.rows(); ++r) {
      for (int c = 0; c < m.cols(); ++c) os << (c ? " " : "") << format_double(m(r, c));
      os << "\n";
    }
  };
  os << "[splitting_h]\n";
  emit(data.splitting_h);
  os << "[splitting_v]\n";
  emit(data.splitting_v);
  os << "[visibility_h]\n";
  emit(data.visibility_h);
  os << "[visibility_v]\n";
  emit(data.visibility_v);
  os << "[sigma]\n";
  emit(data.sigma_splitting_h);
  emit(data.sigma_splitting_v);
  emit(data.sigma_visibility_h);
  emit(data.sigma_visibility_v);
  return os.str();
}

MeasurementSet measurements_from_text(const std::string& text) {
  std::istringstream is(text);
  std::string line;
  std::string section;
  std::vector<std::vector<double>> rows[5];
  const auto section_index = [](const std::string& name) {
    if (name == "[splitting_h]") return 0;
    if (name == "[splitting_v]") return 1;
    if (name == "[visibility_h]") return 2;
    if (name == "[visibility_v]") return 3;
    if (name == "[sigma]") return 4;
    throw std::invalid_argument("measurements_from_text: unknown section " + name);
  };
  int current = -1;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    size_t start = line.find_first_not_of(" \t");
    if (start == std::string::npos || line[start] == '#') continue;
    if (line[start] == '[') {
      current = section_index(line.substr(start));
      continue;
    }
    if (current < 0)
      throw std::invalid_argument("measurements_from_text: data before any section header");
    std::vector<double> row;
    const char* p = line.c_str() + start;
    while (*p) {
      char* end = nullptr;
      const double v = std::strtod(p, &end);
      if (end == p) throw std::invalid_argument("measurements_from_text: malformed number");
      row.push_back(v);
      p = end;
      while (*p == ' ' || *p == '\t') ++p;
    }
    rows[current].push_back(std::move(row));
  }

  const auto take = [](std::vector<std::vector<double>>& src, size_t offset, int nr, int nc) {
    RMat m(nr, nc);
    for (int r = 0; r < nr; ++r) {
      if (offset + r >= src.size() || static_cast<int>(src[offset + r].size()) != nc)
        throw std::invalid_argument("measurements_from_text: block shape mismatch");
      for (int c = 0; c < nc; ++c) m(r, c) = src[offset + r][c];
    }
    return m;
  };

  if (rows[0].empty()) throw std::invalid_argument("measurements_from_text: missing splitting_h");
  const int n = static_cast<int>(rows[0][0].size());
  const int p = n * (n - 1) / 2;
  MeasurementSet data;
  data.splitting_h = take(rows[0], 0, n, n);
  data.splitting_v = take(rows[1], 0, n, n);
  data.visibility_h = take(rows[2], 0, p, p);
  data.visibility_v = take(rows[3], 0, p, p);
  if (static_cast<int>(rows[0].size()) != n || static_cast<int>(rows[1].size()) != n ||
      static_cast<int>(rows[2].size()) != p || static_cast<int>(rows[3].size()) != p ||
      static_cast<int>(rows[4].size()) != 2 * n + 2 * p)
    throw std::invalid_argument("measurements_from_text: block row counts disagree");
  data.sigma_splitting_h = take(rows[4], 0, n, n);
  data.sigma_splitting_v = take(rows[4], n, n, n);
  data.sigma_visibility_h = take(rows[4], 2 * n, p, p);
  data.sigma_visibility_v = take(rows[4], 2 * n + p, p, p);
  check_measurements(data, false);
  return data;
}

MeasurementSet synthesize_measurements(const Mat& u_h, const Mat& u_v, double noise_sigma,
                                       std::uint64_t seed) {
  if (u_h.rows() != u_h.cols() || u_h.rows() < 2)
    throw std::invalid_argument("synthesize_measurements: u_h must be square, n >= 2");
  if (u_v.rows() != u_h.rows() || u_v.cols() != u_h.cols())
    throw std::invalid_argument("synthesize_measurements: u_h and u_v sizes differ");
  if (!is_unitary(u_h, 1e-8) || !is_unitary(u_v, 1e-8))
    throw std::invalid_argument("synthesize_measurements: inputs must be unitary within 1e-8");
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma))
    throw std::invalid_argument("synthesize_measurements: noise_sigma must be finite and >= 0");

  MeasurementSet data;
  model_tables(u_h, data.splitting_h, data.visibility_h);
  model_tables(u_v, data.splitting_v, data.visibility_v);
  const double sigma = std::max(noise_sigma, kSigmaFloor);
  data.sigma_splitting_h = RMat::Constant(data.splitting_h.rows(), data.splitting_h.cols(), sigma);
  data.sigma_splitting_v = data.sigma_splitting_h;
  data.sigma_visibility_h =
      RMat::Constant(data.visibility_h.rows(), data.visibility_h.cols(), sigma);
  data.sigma_visibility_v = data.sigma_visibility_h;

  if (noise_sigma > 0.0) {
    GaussianStream rng(seed);
    const auto jitter = [&](RMat& m, double lo, double hi) {
      for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c)
          m(r, c) = std::min(hi, std::max(lo, m(r, c) + noise_sigma * rng.normal()));
    };
    jitter(data.splitting_h, 0.0, 1.0);
    jitter(data.splitting_v, 0.0, 1.0);
    jitter(data.visibility_h, -1.0, 1.0);
    jitter(data.visibility_v, -1.0, 1.0);
  }
  return data;
}

CircuitModel chip_model(int n_guides, int n_layers) {
  if (n_guides < 2) throw std::invalid_argument("chip_model: need at least two guides");
  if (n_layers < 1) throw std::invalid_argument("chip_model: need at least one layer");
  CircuitModel model;
  model.mesh.n_modes = n_guides;
  for (int k = 1; k <= n_layers; ++k) {
    CouplerLayer layer;
    for (int x = (k % 2 == 1) ? 1 : 2; x + 1 <= n_guides; x += 2)
      layer.couplers.emplace_back(x, 0.5);
    if (k % 2 == 0) layer.mirrors.emplace_back(1, -1);
    if (n_guides % 2 == k % 2) layer.mirrors.emplace_back(n_guides, +1);
    model.mesh.layers.push_back(std::move(layer));
  }
  const int gap_layer = n_layers / 2 + 1;
  if (gap_layer >= 3 && n_layers - gap_layer >= 1)
    for (int w = 1; w < n_guides; ++w) model.slots.push_back({gap_layer, w});
  return model;
}

int parameter_count(const CircuitModel& model) {
  check_model(model);
  return coupler_count(model) + static_cast<int>(model.slots.size());
}

Mat compile_circuit(const CircuitModel& model, const RVec& params) {
  check_model(model);
  const int nc = coupler_count(model);
  const int n = model.mesh.n_modes;
  if (params.size() != nc + static_cast<int>(model.slots.size()))
    throw std::invalid_argument("compile_circuit: parameter count mismatch");
  for (int k = 0; k < nc; ++k)
    if (!(params(k) >= 0.0 && params(k) <= 1.0))
      throw std::invalid_argument("compile_circuit: transmittance outside [0, 1]");

  Mat u = Mat::Identity(n, n);
  int it = 0;
  for (int k = 1; k <= static_cast<int>(model.mesh.layers.size()); ++k) {
    Vec phase = Vec::Ones(n);
    for (size_t s = 0; s < model.slots.size(); ++s)
      if (model.slots[s].layer == k)
        phase(model.slots[s].mode - 1) *= std::polar(1.0, params(nc + static_cast<int>(s)));
    Mat layer = Mat::Identity(n, n);
    for (const auto& [a, placeholder] : model.mesh.layers[k - 1].couplers) {
      if (a < 1 || a + 1 > n) throw std::invalid_argument("compile_circuit: coupler off the mesh");
      const double t = params(it++);
      const double cr = std::sqrt(1.0 - t);
      const double sr = std::sqrt(t);
      layer(a - 1, a - 1) = cr;
      layer(a - 1, a) = sr;
      layer(a, a - 1) = sr;
      layer(a, a) = -cr;
    }
    for (const auto& [w, sgn] : model.mesh.layers[k - 1].mirrors) {
      if (w < 1 || w > n) throw std::invalid_argument("compile_circuit: mirror off the mesh");
      layer(w - 1, w - 1) = sgn;
    }
    u = layer * phase.asDiagonal() * u;
  }
  return u;
}

double chi_square(const RVec& params, const MeasurementSet& data, const CircuitModel& model) {
  const int n = check_measurements(data, true);
  check_model(model);
  if (model.mesh.n_modes != n)
    throw std::invalid_argument("chi_square: model and data mode counts differ");
  const int pc = parameter_count(model);
  if (params.size() != 2 * pc)
    throw std::invalid_argument("chi_square: params must stack an H and a V block");
  const Mat uh = compile_circuit(model, block_of(params, 0, pc));
  const Mat uv = compile_circuit(model, block_of(params, 1, pc));
  const BlockData h = h_block(data);
  const BlockData v = v_block(data);
  return block_chi_square(uh, h.split, h.vis, h.sig_split, h.sig_vis) +
         block_chi_square(uv, v.split, v.vis, v.sig_split, v.sig_vis);
}

std::vector<RVec> fit_starts(const CircuitModel& model, const FitOptions& opt) {
  const int pc = parameter_count(model);
  const int nc = coupler_count(model);
  if (opt.n_starts < 1) throw std::invalid_argument("fit_starts: need at least one start");
  GaussianStream rng(opt.seed);
  std::vector<RVec> starts;
  starts.reserve(opt.n_starts);
  for (int s = 0; s < opt.n_starts; ++s) {
    RVec x(pc);
    for (int k = 0; k < nc; ++k) x(k) = 0.08 + 0.84 * rng.uniform();
    for (int k = nc; k < pc; ++k) x(k) = 0.15 + (kPi - 0.30) * rng.uniform();
    starts.push_back(std::move(x));
  }
  return starts;
}

FitResult fit_circuit(const MeasurementSet& data, const CircuitModel& model,
                      const FitOptions& opt) {
  const int n = check_measurements(data, true);
  check_model(model);
  if (model.mesh.n_modes != n)
    throw std::invalid_argument("fit_circuit: model and data mode counts differ");
  if (opt.max_nfev < 1) throw std::invalid_argument("fit_circuit: max_nfev must be positive");

  const std::vector<RVec> starts = fit_starts(model, opt);
  const int pc = parameter_count(model);
  const BlockFit fh = fit_block(h_block(data), model, starts, opt.max_nfev);
  const BlockFit fv = fit_block(v_block(data), model, starts, opt.max_nfev);

  FitResult res;
  res.params.resize(2 * pc);
  res.params.segment(0, pc) = fh.pub;
  res.params.segment(pc, pc) = fv.pub;
  if (!fh.converged || !fv.converged)
    throw convergence_error("fit_circuit: no start converged within its budget", res.params,
                            fh.cost + fv.cost);
  FitOptions sweep = opt;
  sweep.n_starts = 4 * opt.n_starts;
  const std::vector<RVec> canon_starts = fit_starts(model, sweep);
  res.params.segment(0, pc) = canonical_block(model, fh.pub, canon_starts, opt.max_nfev);
  res.params.segment(pc, pc) = canonical_block(model, fv.pub, canon_starts, opt.max_nfev);
  res.u_h = compile_circuit(model, res.params.segment(0, pc));
  res.u_v = compile_circuit(model, res.params.segment(pc, pc));
  res.residual = chi_square(res.params, data, model);
  return res;
}

RVec canonical_parameters(const CircuitModel& model, const RVec& params, const FitOptions& opt) {
  check_model(model);
  const int pc = parameter_count(model);
  if (params.size() != 2 * pc)
    throw std::invalid_argument("canonical_parameters: expected stacked H and V blocks");
  const Mat u_h = compile_circuit(model, params.segment(0, pc));
  const Mat u_v = compile_circuit(model, params.segment(pc, pc));
  const MeasurementSet exact = synthesize_measurements(u_h, u_v, 0.0, 0u);
  const FitResult fit = fit_circuit(exact, model, opt);
  if (fit.residual > 1e-3)
    throw convergence_error("canonical_parameters: fit did not reach the twin fiber", fit.params,
                            fit.residual);
  return fit.params;
}

MonteCarloErrors monte_carlo_errors(const MeasurementSet& data, const CircuitModel& model,
                                    int n_samples, std::uint64_t seed, const FitOptions& opt) {
  if (n_samples < 20)
    throw std::invalid_argument("monte_carlo_errors: need at least 20 samples");
  const FitResult base = fit_circuit(data, model, opt);
  const int pc = parameter_count(model);
  const int nc = coupler_count(model);

  GaussianStream rng(seed);
  RMat samples(n_samples, 2 * pc);
  MonteCarloErrors out;
  out.fidelity_h.resize(n_samples);
  out.fidelity_v.resize(n_samples);
  LeastSquaresOptions lm;
  lm.max_nfev = opt.max_nfev;

  for (int s = 0; s < n_samples; ++s) {
    MeasurementSet draw = data;
    const auto jitter = [&](RMat& m, const RMat& sig, double lo, double hi) {
      for (int r = 0; r < m.rows(); ++r)
        for (int c = 0; c < m.cols(); ++c)
          m(r, c) = std::min(hi, std::max(lo, m(r, c) + sig(r, c) * rng.normal()));
    };
    jitter(draw.splitting_h, data.sigma_splitting_h, 0.0, 1.0);
    jitter(draw.splitting_v, data.sigma_splitting_v, 0.0, 1.0);
    jitter(draw.visibility_h, data.sigma_visibility_h, -1.0, 1.0);
    jitter(draw.visibility_v, data.sigma_visibility_v, -1.0, 1.0);

    for (int block = 0; block < 2; ++block) {
      const BlockData bd = block == 0 ? h_block(draw) : v_block(draw);
      const RVec warm = block_of(base.params, block, pc);
      const auto residuals = [&](const RVec& z) {
        const Mat u = compile_circuit(model, to_public(z, nc));
        RMat split_m, vis_m;
        model_tables(u, split_m, vis_m);
        RVec r(split_m.size() + vis_m.size());
        int k = 0;
        for (int row = 0; row < split_m.rows(); ++row)
          for (int col = 0; col < split_m.cols(); ++col, ++k)
            r(k) = (split_m(row, col) - bd.split(row, col)) / bd.sig_split(row, col);
        for (int row = 0; row < vis_m.rows(); ++row)
          for (int col = 0; col < vis_m.cols(); ++col, ++k)
            r(k) = (vis_m(row, col) - bd.vis(row, col)) / bd.sig_vis(row, col);
        return r;
      };
      // Warm start on the base branch; no canonical flip afterwards, so the
      // spread measures the branch-local uncertainty.
      const LeastSquaresResult run = levenberg_marquardt(residuals, to_internal(warm, nc), lm);
      const RVec pub = to_public(run.x, nc);
      samples.row(s).segment(block * pc, pc) = pub.transpose();
      const Mat u = compile_circuit(model, pub);
      const double fid = unitary_fidelity(u, block == 0 ? base.u_h : base.u_v);
      (block == 0 ? out.fidelity_h : out.fidelity_v)(s) = fid;
    }
  }

  out.param_mean = samples.colwise().mean().transpose();
  const RMat centered = samples.rowwise() - out.param_mean.transpose();
  out.param_std =
      (centered.array().square().colwise().sum() / double(n_samples - 1)).sqrt().transpose();
  return out;
}

double reconstruction_fidelity(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols() || a.rows() != a.cols())
    throw std::invalid_argument("reconstruction_fidelity: dimension mismatch");
  if (!is_unitary(a, 1e-8) || !is_unitary(b, 1e-8))
    throw std::invalid_argument("reconstruction_fidelity: inputs must be unitary within 1e-8");
  const int n = static_cast<int>(a.rows());

  // max |sum_{r,i} e_r C(r,i) f_i| over unimodular e, f by alternating
  // alignment: each half-step is a closed-form ascent, so the value climbs
  // monotonically from |tr(a' b)| upward.
  const auto aligned = [n](const Mat& c) {
    const auto climb = [n, &c](Vec f) {
      Vec e(n);
      double value = 0.0;
      for (int pass = 0; pass < 200; ++pass) {
        const Vec w = c * f;
        for (int r = 0; r < n; ++r)
          e(r) = std::abs(w(r)) > 0.0 ? Complex(std::conj(w(r)) / std::abs(w(r))) : Complex(1.0);
        const Vec v = c.transpose() * e;
        double next = 0.0;
        for (int i = 0; i < n; ++i) {
          f(i) = std::abs(v(i)) > 0.0 ? Complex(std::conj(v(i)) / std::abs(v(i))) : Complex(1.0);
          next += std::abs(v(i));
        }
        if (next - value <= 1e-15 * (1.0 + next)) return next;
        value = next;
      }
      return value;
    };
    double best = climb(Vec::Ones(n));
    Eigen::Index widest = 0;
    c.cwiseAbs().rowwise().sum().maxCoeff(&widest);
    Vec f0(n);
    for (int i = 0; i < n; ++i)
      f0(i) = std::abs(c(widest, i)) > 0.0
                  ? Complex(std::conj(c(widest, i)) / std::abs(c(widest, i)))
                  : Complex(1.0);
    best = std::max(best, climb(f0));
    return best;
  };

  const Mat straight = a.conjugate().cwiseProduct(b);
  const Mat mirrored = a.conjugate().cwiseProduct(b.conjugate());
  return std::max(aligned(straight), aligned(mirrored)) / n;
}

}  // namespace qw
