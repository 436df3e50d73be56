#ifndef QW_TWOPHOTON_HPP
#define QW_TWOPHOTON_HPP

#include "qw/matrix.hpp"

namespace qw {

// Two photons of opposite polarization injected in distinct modes i and j,
// prepared as (|H_i V_j> + e^{i chi} |V_i H_j>)/sqrt(2). chi = 0 gives the
// symmetric (bosonic) Bell combination, chi = pi the antisymmetric
// (fermionic) one. u_h and u_v are the per-polarization transfer matrices;
// they differ only when the network is polarization-sensitive.
struct TwoPhotonInput {
  int mode_i = 0;  // 1-based
  int mode_j = 0;
  double chi = 0.0;
  Mat u_h;
  Mat u_v;
};

// [[u_h(r,i), u_h(r,j)], [u_v(s,i), u_v(s,j)]]: the 2x2 transfer block from
// inputs (i, j) to the H output r and V output s. 1-based indices.
Mat submatrix(const Mat& u_h, const Mat& u_v, int i, int j, int r, int s);

// Amplitude for the H photon to arrive in mode r and the V photon in mode
// s. Works for arbitrary transfer matrices (sub-unitary blocks model loss
// as missing norm); chi = pi makes it the submatrix determinant over
// sqrt(2), chi = 0 the permanent.
Complex two_photon_amplitude(const TwoPhotonInput& input, int r, int s);

// Probability of finding the photon pair in spatial modes {r, s},
// polarization unresolved: |amp(r,s)|^2 + |amp(s,r)|^2 for r != s,
// |amp(r,r)|^2 for the bunched outcome. Requires u_h, u_v unitary within
// 1e-8.
double output_probability(const TwoPhotonInput& input, int r, int s);

// Symmetrized correlation matrix: gamma(r,r) = P(r,r),
// gamma(r,s) = P(r,s)/2 off the diagonal, so that the diagonal plus twice
// the upper triangle sums to 1.
RMat correlation_matrix(const TwoPhotonInput& input);

// (P_cl - P_q)/P_cl for two indistinguishable photons of one polarization
// entering i and j and detected at {r, s}. P_cl counts distinguishable
// photons over the two classical paths, P_q is the permanent rate. Dips
// are positive, bunching peaks negative. Throws std::domain_error when the
// classical rate vanishes.
double hom_visibility(const Mat& u, int i, int j, int r, int s);

// (sum_ij sqrt(a_ij b_ij))^2 / (sum a * sum b): 1 iff the normalized
// distributions coincide, 0 on disjoint support, invariant under scaling.
double similarity(const RMat& a, const RMat& b);

// Brute-force second-quantized evolution over the 2n polarization-resolved
// channels. Returns the spatial pair distribution p (symmetric, diagonal =
// bunching probabilities); the diagonal plus the upper triangle totals 1
// when the transfer matrices are unitary, less when they are lossy. Capped
// at 8 modes. The `post` stage acts after the input's polarization
// matrices, identically on both polarizations.
RMat fock_oracle(const TwoPhotonInput& input, const Mat& post);
RMat fock_oracle(const TwoPhotonInput& input);

}  // namespace qw

#endif
