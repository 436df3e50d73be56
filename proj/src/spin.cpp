#include "qw/spin.hpp"

#include <cmath>
#include <stdexcept>

namespace qw {

namespace {

void check_sites(int n) {
  if (n < 2) throw std::invalid_argument("spin: need at least 2 sites");
  if (n > 12) throw std::invalid_argument("spin: 2^N state space capped at N = 12");
}

void check_state(const SpinState& state) {
  check_sites(state.n_spins);
  if (state.amp.size() != Eigen::Index(1) << state.n_spins)
    throw std::invalid_argument("spin: amplitude count must be 2^N");
}

}  // namespace

Mat xy_hamiltonian(const RVec& couplings, double delta) {
  const int n = static_cast<int>(couplings.size()) + 1;
  check_sites(n);
  const int dim = 1 << n;
  Mat h = Mat::Zero(dim, dim);
  for (int b = 0; b < dim; ++b) {
    for (int x = 0; x < n - 1; ++x) {
      const int bx = (b >> x) & 1;
      const int by = (b >> (x + 1)) & 1;
      h(b, b) += couplings(x) * delta * (bx ? 1 : -1) * (by ? 1 : -1);
      // XX + YY exchanges anti-aligned neighbours with amplitude 2 j_x.
      if (bx != by) h(b ^ (1 << x) ^ (1 << (x + 1)), b) += 2.0 * couplings(x);
    }
  }
  return h;
}

SpinState neel_state(int n) {
  check_sites(n);
  SpinState s;
  s.n_spins = n;
  s.amp = Vec::Zero(1 << n);
  int b = 0;
  for (int x = 2; x <= n; x += 2) b |= 1 << (x - 1);
  s.amp(b) = 1.0;
  return s;
}

SpinState rainbow_state(int n) {
  check_sites(n);
  SpinState s;
  s.n_spins = n;
  s.amp = Vec::Zero(1 << n);
  const int pairs = n / 2;
  const double w = std::pow(0.5, 0.5 * pairs);
  for (int sel = 0; sel < (1 << pairs); ++sel) {
    int b = 0;
    for (int k = 0; k < pairs; ++k) {
      const int left = k + 1;
      const int right = n - k;
      b |= 1 << (((sel >> k) & 1) ? left - 1 : right - 1);
    }
    s.amp(b) = w;
  }
  return s;
}

SpinState quench_evolve(int n, const RVec& couplings, double time) {
  check_sites(n);
  if (couplings.size() != n - 1)
    throw std::invalid_argument("quench_evolve: expected n-1 couplings");
  const Mat h = xy_hamiltonian(couplings, 0.0) / 4.0;
  SpinState s = neel_state(n);
  s.amp = herm_exp(h, time) * s.amp;
  return s;
}

double magnetization(const SpinState& state) {
  check_state(state);
  double m = 0.0;
  for (int b = 0; b < state.amp.size(); ++b)
    m += std::norm(state.amp(b)) * __builtin_popcount(unsigned(b));
  return m;
}

double entanglement_fraction_direct(const SpinState& state, int i, int j) {
  check_state(state);
  const int n = state.n_spins;
  if (i < 1 || i > n || j < 1 || j > n || i == j)
    throw std::invalid_argument("entanglement_fraction_direct: sites must be distinct and in 1..N");
  const int mi = 1 << (i - 1);
  const int mj = 1 << (j - 1);
  // rho indexed by 2*bit_i + bit_j; psi+ lives on indices 1 and 2.
  Mat rho = Mat::Zero(4, 4);
  for (int b = 0; b < state.amp.size(); ++b) {
    const int r = 2 * ((b & mi) ? 1 : 0) + ((b & mj) ? 1 : 0);
    const int base = b & ~mi & ~mj;
    for (int r2 = 0; r2 < 4; ++r2) {
      const int b2 = base | ((r2 & 2) ? mi : 0) | ((r2 & 1) ? mj : 0);
      rho(r, r2) += state.amp(b) * std::conj(state.amp(b2));
    }
  }
  return 0.5 * (rho(1, 1) + rho(2, 2) + rho(1, 2) + rho(2, 1)).real();
}

double rainbow_fidelity(const SpinState& state) {
  check_state(state);
  const SpinState ref = rainbow_state(state.n_spins);
  return std::norm(ref.amp.dot(state.amp));
}

double bipartite_entropy(const SpinState& state, int n_left) {
  check_state(state);
  if (n_left < 1 || n_left >= state.n_spins)
    throw std::invalid_argument("bipartite_entropy: cut must leave both blocks nonempty");
  // Sites 1..n_left are the low bits, so the amplitude vector is already the
  // column-major (left, right) coefficient matrix.
  const Eigen::Index rows = Eigen::Index(1) << n_left;
  const Eigen::Index cols = Eigen::Index(1) << (state.n_spins - n_left);
  Eigen::Map<const Mat> m(state.amp.data(), rows, cols);
  const auto sv = Eigen::JacobiSVD<Mat>(m).singularValues();
  double s = 0.0;
  for (int k = 0; k < sv.size(); ++k) {
    const double lam = sv(k) * sv(k);
    if (lam > 1e-15) s -= lam * std::log(lam);
  }
  return s;
}

}  // namespace qw
