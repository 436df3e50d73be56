#include "qw/walk.hpp"

#include <cmath>
#include <stdexcept>

#include <Eigen/SVD>

namespace qw {

namespace {

// Coin angle at a site: profile angle on sites 1..N-1, mirror (0) elsewhere.
double site_angle(const CouplingProfile& profile, int site) {
  if (site < 1 || site > profile.n_sites - 1) return 0.0;
  return profile.angles(site - 1);
}

}  // namespace

int walker_index(int n_sites, int site, Coin coin) {
  if (n_sites < 3) throw std::invalid_argument("walker_index: need at least 3 sites");
  if (site < 0 || site > n_sites) throw std::invalid_argument("walker_index: site out of range");
  return 2 * site + static_cast<int>(coin);
}

WalkerState make_walker(int n_sites) {
  if (n_sites < 3) throw std::invalid_argument("make_walker: need at least 3 sites");
  WalkerState s;
  s.n_sites = n_sites;
  s.amp = Vec::Zero(2 * (n_sites + 1));
  return s;
}

WalkerState basis_walker(int n_sites, int site, Coin coin) {
  WalkerState s = make_walker(n_sites);
  s.amp(walker_index(n_sites, site, coin)) = 1.0;
  return s;
}

WalkerState step(const WalkerState& state, const CouplingProfile& profile) {
  const int n = state.n_sites;
  if (n != profile.n_sites)
    throw std::invalid_argument("step: profile and state disagree on the site count");
  if (state.amp.size() != 2 * (n + 1))
    throw std::invalid_argument("step: amplitude vector has the wrong dimension");

  const int n_cells = n + 1;
  Vec coined(2 * n_cells);
  for (int x = 0; x < n_cells; ++x) {
    const double th = site_angle(profile, x);
    const double s = std::sin(th);
    const double c = std::cos(th);
    const Complex al = state.amp(2 * x + kLeft);
    const Complex ar = state.amp(2 * x + kRight);
    coined(2 * x + kLeft) = s * al + c * ar;
    coined(2 * x + kRight) = -c * al + s * ar;
  }

  WalkerState out = make_walker(n);
  for (int x = 0; x < n_cells; ++x) {
    const int left_to = (x - 1 + n_cells) % n_cells;
    const int right_to = (x + 1) % n_cells;
    out.amp(2 * left_to + kLeft) = coined(2 * x + kLeft);
    out.amp(2 * right_to + kRight) = coined(2 * x + kRight);
  }
  return out;
}

Mat walk_unitary(const CouplingProfile& profile) {
  const int dim = 2 * (profile.n_sites + 1);
  Mat u(dim, dim);
  for (int site = 0; site <= profile.n_sites; ++site) {
    for (Coin coin : {kLeft, kRight}) {
      const WalkerState col = step(basis_walker(profile.n_sites, site, coin), profile);
      u.col(2 * site + coin) = col.amp;
    }
  }
  return u;
}

double transfer_quality(const CouplingProfile& profile) {
  WalkerState s = basis_walker(profile.n_sites, 1, kRight);
  for (int t = 0; t < profile.n_steps; ++t) s = step(s, profile);
  const Complex a = s.amp(walker_index(profile.n_sites, profile.n_sites, kRight));
  return std::norm(a);
}

std::pair<Complex, Complex> coin_transfer(const CouplingProfile& profile, Complex alpha,
                                          Complex beta) {
  if (std::abs(std::norm(alpha) + std::norm(beta) - 1.0) > 1e-6)
    throw std::invalid_argument("coin_transfer: input coin state is not normalized");
  const int n = profile.n_sites;
  WalkerState s = make_walker(n);
  s.amp(walker_index(n, 1, kRight)) = alpha;
  s.amp(walker_index(n, 1, kLeft)) = beta;
  for (int t = 0; t < profile.n_steps; ++t) s = step(s, profile);
  return {s.amp(walker_index(n, n, kRight)), s.amp(walker_index(n, n - 2, kLeft))};
}

Mat effective_hamiltonian(const CouplingProfile& profile) {
  const int n = profile.n_sites;
  Mat h = Mat::Zero(n, n);
  for (int x = 1; x <= n - 1; ++x) {
    const double v = 0.5 * profile.epsilon * profile.couplings(x - 1);
    h(x - 1, x) = v;
    h(x, x - 1) = v;
  }
  return h;
}

double ctqw_approx_error(const RVec& ring_angles, int steps) {
  const int n_cells = static_cast<int>(ring_angles.size());
  if (n_cells < 2) throw std::invalid_argument("ctqw_approx_error: ring needs at least 2 sites");
  if (steps < 0 || steps % 2 != 0)
    throw std::invalid_argument("ctqw_approx_error: step count must be even");

  // Exact walk on the ring, coin blocks ordered (left, right): index c*L + x.
  const int dim = 2 * n_cells;
  Mat u = Mat::Zero(dim, dim);
  for (int x = 0; x < n_cells; ++x) {
    const double s = std::sin(ring_angles(x));
    const double c = std::cos(ring_angles(x));
    const int left_to = (x - 1 + n_cells) % n_cells;
    const int right_to = (x + 1) % n_cells;
    // Columns are pre-step channels; coin then shift.
    u(left_to, x) = s;               // (x,L) -> (x-1,L)
    u(n_cells + right_to, x) = -c;   // (x,L) -> (x+1,R)
    u(left_to, n_cells + x) = c;     // (x,R) -> (x-1,L)
    u(n_cells + right_to, n_cells + x) = s;  // (x,R) -> (x+1,R)
  }

  Mat u_pow = Mat::Identity(dim, dim);
  for (int t = 0; t < steps; ++t) u_pow = u * u_pow;

  // E|y> = |y-1> (cyclic); W = (1/sqrt(2)) [[iE, -iE], [1, 1]].
  Mat e = Mat::Zero(n_cells, n_cells);
  for (int y = 0; y < n_cells; ++y) e((y - 1 + n_cells) % n_cells, y) = 1.0;
  Mat w = Mat::Zero(dim, dim);
  const Complex i_unit(0.0, 1.0);
  w.topLeftCorner(n_cells, n_cells) = i_unit * e;
  w.topRightCorner(n_cells, n_cells) = -i_unit * e;
  w.bottomLeftCorner(n_cells, n_cells) = Mat::Identity(n_cells, n_cells);
  w.bottomRightCorner(n_cells, n_cells) = Mat::Identity(n_cells, n_cells);
  w /= std::sqrt(2.0);

  // Half-angle hopping generator on the ring; bonds accumulate (L=2 has a
  // doubled bond).
  Mat h = Mat::Zero(n_cells, n_cells);
  for (int x = 0; x < n_cells; ++x) {
    const int x1 = (x + 1) % n_cells;
    h(x, x1) += 0.5 * ring_angles(x);
    h(x1, x) += 0.5 * ring_angles(x);
  }

  Mat blk = Mat::Zero(dim, dim);
  blk.topLeftCorner(n_cells, n_cells) = herm_exp(h, -static_cast<double>(steps));
  blk.bottomRightCorner(n_cells, n_cells) = herm_exp(h, static_cast<double>(steps));

  const double phase = (steps % 4 == 0) ? 1.0 : -1.0;  // i^steps, steps even
  Mat approx = phase * (w * blk * w.adjoint());

  Eigen::JacobiSVD<Mat> svd(u_pow - approx);
  return svd.singularValues()(0);
}

double ctqw_approx_error(const CouplingProfile& profile, int steps) {
  RVec ring = RVec::Zero(profile.n_sites + 1);
  for (int x = 1; x <= profile.n_sites - 1; ++x) ring(x) = profile.angles(x - 1);
  return ctqw_approx_error(ring, steps);
}

}  // namespace qw
