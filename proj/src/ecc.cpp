#include "qw/ecc.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include "qw/optim.hpp"

namespace qw {

namespace {

void check_settings(const EccSettings& settings, const char* who) {
  if (!(settings.eta5 > 0.0 && settings.eta5 <= 1.0))
    throw std::invalid_argument(std::string(who) + ": eta5 must lie in (0, 1]");
}

void check_first_chip(const Mat& u, const char* who) {
  if (u.rows() != 5 || u.cols() != 5)
    throw std::invalid_argument(std::string(who) +
                                ": the readout geometry is fixed to 5 modes");
}

// Balanced coupler on 0-based modes (a, b): +c on the low mode, -c on the
// high one, matching the waveguide-mesh convention.
void put_coupler(Mat& m, int a, int b) {
  const double h = std::numbers::sqrt2 / 2.0;
  m(a, a) = h;
  m(a, b) = h;
  m(b, a) = h;
  m(b, b) = -h;
}

// Unnormalized pair-detection table from possibly sub-unitary transfer
// matrices; t(r,s) with r <= s only.
RMat pair_table(const TwoPhotonInput& input) {
  const int n = static_cast<int>(input.u_h.rows());
  RMat p = RMat::Zero(n, n);
  for (int r = 1; r <= n; ++r) {
    p(r - 1, r - 1) = std::norm(two_photon_amplitude(input, r, r));
    for (int s = r + 1; s <= n; ++s)
      p(r - 1, s - 1) = std::norm(two_photon_amplitude(input, r, s)) +
                        std::norm(two_photon_amplitude(input, s, r));
  }
  return p;
}

CascadeObservables assemble(const RMat& pairs) {
  const int n = static_cast<int>(pairs.rows());
  CascadeObservables obs;
  obs.n_prime = RVec::Zero(n);
  obs.p_prime = RMat::Zero(n, n);
  for (int m = 0; m < n; ++m) {
    double count = 2.0 * pairs(m, m);
    for (int s = 0; s < n; ++s) {
      if (s == m) continue;
      const double coincidence = pairs(std::min(m, s), std::max(m, s));
      count += coincidence;
      obs.p_prime(m, s) = coincidence;
    }
    obs.p_prime(m, m) = 2.0 * pairs(m, m);
    obs.n_prime(m) = count;
  }
  return obs;
}

double p25(const TwoPhotonInput& input, const EccSettings& settings) {
  return cascade_observables(input, settings).p_prime(1, 4);
}

}  // namespace

Mat ecc_unitary(const EccSettings& settings) {
  check_settings(settings, "ecc_unitary");
  Mat couplers = Mat::Identity(5, 5);
  put_coupler(couplers, 0, 4);
  put_coupler(couplers, 1, 3);
  Vec phases = Vec::Ones(5);
  phases(1) = std::polar(1.0, settings.phi2);
  phases(4) = std::polar(1.0, settings.phi5);
  return couplers * phases.asDiagonal();
}

Mat loss_embedding(const Mat& u_first, const EccSettings& settings) {
  check_settings(settings, "loss_embedding");
  check_first_chip(u_first, "loss_embedding");
  const double t = std::sqrt(settings.eta5);
  const double r = std::sqrt(1.0 - settings.eta5);
  Mat first = Mat::Identity(6, 6);
  first.topLeftCorner(5, 5) = u_first;
  Mat loss = Mat::Identity(6, 6);
  loss(4, 4) = t;
  loss(4, 5) = r;
  loss(5, 4) = r;
  loss(5, 5) = -t;
  Mat readout = Mat::Identity(6, 6);
  readout.topLeftCorner(5, 5) = ecc_unitary(settings);
  return readout * loss * first;
}

CascadeObservables cascade_observables(const TwoPhotonInput& input,
                                       const EccSettings& settings) {
  check_settings(settings, "cascade_observables");
  check_first_chip(input.u_h, "cascade_observables");
  check_first_chip(input.u_v, "cascade_observables");
  if (!is_unitary(input.u_h, 1e-8) || !is_unitary(input.u_v, 1e-8))
    throw std::invalid_argument(
        "cascade_observables: first-chip matrices must be unitary within 1e-8");
  Vec damp = Vec::Ones(5);
  damp(4) = std::sqrt(settings.eta5);
  const Mat readout = ecc_unitary(settings);
  const Mat stage = readout * damp.asDiagonal();
  TwoPhotonInput evolved = input;
  evolved.u_h = stage * input.u_h;
  evolved.u_v = stage * input.u_v;
  return assemble(pair_table(evolved));
}

EntanglementFractions entanglement_fractions(const CascadeObservables& obs) {
  if (obs.n_prime.size() != 5 || obs.p_prime.rows() != 5 || obs.p_prime.cols() != 5)
    throw std::invalid_argument(
        "entanglement_fractions: observables must cover 5 modes");
  EntanglementFractions e;
  e.e15 = obs.n_prime(4) - obs.p_prime(4, 0);
  e.e24 = obs.n_prime(1) - obs.p_prime(1, 3) - obs.p_prime(1, 2) +
          obs.p_prime(3, 2);
  return e;
}

FringeCurves fringe_scan(const TwoPhotonInput& input, const EccSettings& base,
                         ScanPhase which, const RVec& grid) {
  if (grid.size() < 1)
    throw std::invalid_argument("fringe_scan: empty phase grid");
  FringeCurves curves;
  curves.phases = grid;
  curves.s_low = RVec::Zero(grid.size());
  curves.s_high = RVec::Zero(grid.size());
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    EccSettings settings = base;
    (which == ScanPhase::kPhi2 ? settings.phi2 : settings.phi5) = grid(k);
    const CascadeObservables obs = cascade_observables(input, settings);
    if (which == ScanPhase::kPhi5) {
      curves.s_low(k) = obs.p_prime(0, 1) + obs.p_prime(0, 3);
      curves.s_high(k) = obs.p_prime(4, 1) + obs.p_prime(4, 3);
    } else {
      curves.s_low(k) = obs.p_prime(1, 0) + obs.p_prime(1, 4);
      curves.s_high(k) = obs.p_prime(3, 0) + obs.p_prime(3, 4);
    }
  }
  return curves;
}

SinusoidFit fit_sinusoid(const RVec& phases, const RVec& values) {
  const Eigen::Index n = phases.size();
  if (values.size() != n)
    throw std::invalid_argument("fit_sinusoid: size mismatch");
  if (n < 3)
    throw std::invalid_argument("fit_sinusoid: need at least 3 points");
  RMat design(n, 3);
  design.col(0).setOnes();
  design.col(1) = phases.array().cos();
  design.col(2) = phases.array().sin();
  Eigen::ColPivHouseholderQR<RMat> qr(design);
  if (qr.rank() < 3)
    throw std::invalid_argument("fit_sinusoid: degenerate phase grid");
  const RVec coef = qr.solve(values);
  SinusoidFit fit;
  fit.offset = coef(0);
  fit.amplitude = std::hypot(coef(1), coef(2));
  fit.phase0 = std::atan2(-coef(2), coef(1));
  fit.residual = (design * coef - values).cwiseAbs().maxCoeff();
  if (fit.offset <= 0.0)
    throw std::domain_error("fit_sinusoid: visibility undefined at zero offset");
  fit.visibility = fit.amplitude / fit.offset;
  return fit;
}

EccSettings optimal_phases(const TwoPhotonInput& input, const EccSettings& base) {
  check_settings(base, "optimal_phases");
  const int coarse = 16;
  double best = -1.0;
  EccSettings settings = base;
  for (int a = 0; a < coarse; ++a) {
    for (int b = 0; b < coarse; ++b) {
      EccSettings probe = base;
      probe.phi2 = 2.0 * std::numbers::pi * a / coarse;
      probe.phi5 = 2.0 * std::numbers::pi * b / coarse;
      const double val = p25(input, probe);
      if (val > best) {
        best = val;
        settings = probe;
      }
    }
  }
  RVec x0(2);
  x0 << settings.phi2, settings.phi5;
  const auto objective = [&](const RVec& x) {
    EccSettings probe = base;
    probe.phi2 = x(0);
    probe.phi5 = x(1);
    return -p25(input, probe);
  };
  SimplexOptions opt;
  opt.init_step = 0.2;
  const SimplexResult refined = nelder_mead(objective, x0, opt);
  if (-refined.f >= best) {
    settings.phi2 = refined.x(0);
    settings.phi5 = refined.x(1);
  }
  return settings;
}

}  // namespace qw
