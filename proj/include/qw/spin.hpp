#ifndef QW_SPIN_HPP
#define QW_SPIN_HPP

#include "qw/matrix.hpp"

namespace qw {

// Pure state of an open chain of n_spins spin-1/2 sites. Basis states are
// bitstrings b with bit (x-1) = 1 meaning spin up at site x, amplitude at
// index b.
struct SpinState {
  int n_spins = 0;  // 2 <= N <= 12
  Vec amp;          // 2^N entries

  double norm() const { return amp.norm(); }
};

// sum_n j_n (X_n X_{n+1} + Y_n Y_{n+1} + delta Z_n Z_{n+1}) on
// couplings.size()+1 sites. Dense 2^N x 2^N, Hermitian, commutes with the
// total Z by construction.
Mat xy_hamiltonian(const RVec& couplings, double delta);

// |down, up, down, up, ...> with site 1 down.
SpinState neel_state(int n);

// Nested Bell pairs (|up,down> + |down,up>)/sqrt(2) on the mirror pairs
// (x, N+1-x); for odd N the central site stays |down>.
SpinState rainbow_state(int n);

// exp(-i t H) |Neel> with H = xy_hamiltonian(couplings, 0) / 4, so a single
// excitation hops with amplitude j_x / 2 and the engineered couplings
// j_x = pi/(N+1) sqrt(x(N-x)) reach their mirror at t = N+1.
SpinState quench_evolve(int n, const RVec& couplings, double time);

// Expected number of up spins.
double magnetization(const SpinState& state);

// <psi+| rho_ij |psi+> for the reduced pair state on sites i != j, with
// |psi+> = (|up,down> + |down,up>)/sqrt(2). Traces by direct index
// summation.
double entanglement_fraction_direct(const SpinState& state, int i, int j);

// |<rainbow|state>|^2.
double rainbow_fidelity(const SpinState& state);

// Von Neumann entropy of the reduced state on sites 1..n_left.
double bipartite_entropy(const SpinState& state, int n_left);

}  // namespace qw

#endif
