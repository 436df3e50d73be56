#ifndef QW_WALK_HPP
#define QW_WALK_HPP

#include <utility>

#include "qw/matrix.hpp"
#include "qw/profile.hpp"

namespace qw {

// Coin components, ordered (left, right) everywhere.
enum Coin : int { kLeft = 0, kRight = 1 };

// Walker on sites 0..N with a two-level coin. Sites 0 and N act as fixed
// mirrors; a single-photon excitation injected on sites 1..N never reaches
// the two decoupled channels (0,right)/(N,left).
struct WalkerState {
  int n_sites = 0;  // N; amplitudes cover sites 0..N
  Vec amp;          // 2*(N+1) entries, laid out as 2*site + coin

  double norm() const { return amp.norm(); }
};

// Flat index of (site, coin); bounds-checked.
int walker_index(int n_sites, int site, Coin coin);

// Zero state of the right dimension.
WalkerState make_walker(int n_sites);

// Unit amplitude on a single (site, coin) channel.
WalkerState basis_walker(int n_sites, int site, Coin coin);

// One evolution step: site-wise coin rotation
//   [[sin t, cos t], [-cos t, sin t]]  in the (left, right) basis,
// with angle 0 at the mirror sites 0 and N, followed by the shift
// (x,left) -> (x-1,left), (x,right) -> (x+1,right) (cyclic across the
// mirror pair, which keeps the operator unitary without leakage).
WalkerState step(const WalkerState& state, const CouplingProfile& profile);

// Matrix of one step on the full 2*(N+1)-dimensional space.
Mat walk_unitary(const CouplingProfile& profile);

// |<N,right| U^M |1,right>|^2 after the profile's n_steps steps.
double transfer_quality(const CouplingProfile& profile);

// Evolves alpha|1,right> + beta|1,left> for n_steps steps and returns the
// amplitudes on |N,right> and |N-2,left>. Inputs must be normalized.
std::pair<Complex, Complex> coin_transfer(const CouplingProfile& profile, Complex alpha,
                                          Complex beta);

// N x N tridiagonal generator of the continuous-time limit: entries
// (epsilon/2)*j_x on the (x, x+1) bonds, sites 1..N, open ends.
Mat effective_hamiltonian(const CouplingProfile& profile);

// Spectral-norm distance between the exact periodic-ring walk iterated
// `steps` times and its continuous-time approximation
//   i^steps * W * exp(i*steps*H (+) -i*steps*H) * W^dagger,
// where W couples the coin blocks through the cyclic shift. The ring has
// one coin angle per site; `steps` must be even.
double ctqw_approx_error(const RVec& ring_angles, int steps);

// Same, for the open-chain profile embedded on a ring of N+1 sites with
// angle 0 at the mirror site.
double ctqw_approx_error(const CouplingProfile& profile, int steps);

}  // namespace qw

#endif
