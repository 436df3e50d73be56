#ifndef QW_ECC_HPP
#define QW_ECC_HPP

#include "qw/matrix.hpp"
#include "qw/twophoton.hpp"

namespace qw {

// Readout stage appended to a five-mode chip: phase shifters on modes 2
// and 5 followed by balanced couplers on the pairs (1,5) and (2,4); mode 3
// passes straight through. eta5 is the transmission of the chip-to-chip
// interface on mode 5.
struct EccSettings {
  double phi2 = 0.0;
  double phi5 = 0.0;
  double eta5 = 1.0;  // in (0, 1]
};

// The 5x5 readout matrix: diagonal phases first, then the two couplers.
// Unitary by construction; the interface loss is applied separately.
Mat ecc_unitary(const EccSettings& settings);

// Trace-preserving picture of the mode-5 loss: a sixth environment mode
// receives the reflected amplitude of a transmission-eta5 beamsplitter
// placed between the chips. Returns the 6x6 unitary
// (readout + passive env) * loss coupler * (u_first + passive env);
// restricted to the first five modes it equals the sqrt(eta5) amplitude
// scaling used by cascade_observables.
Mat loss_embedding(const Mat& u_first, const EccSettings& settings);

// Photon-counting expectations after the readout. n_prime(m-1) = <a+_m a_m>;
// p_prime(n-1, m-1) = <a+_n a+_m a_m a_n>: off the diagonal the pair
// coincidence rate, on it twice the bunching probability. Rates are left
// unnormalized: with eta5 < 1 they total less than 1 by exactly the mass
// routed into the lost channel.
struct CascadeObservables {
  RVec n_prime;
  RMat p_prime;
};

// Sends the pair through input's five-mode transfer matrices, scales the
// mode-5 amplitude by sqrt(eta5), applies the readout, and counts.
CascadeObservables cascade_observables(const TwoPhotonInput& input,
                                       const EccSettings& settings);

struct EntanglementFractions {
  double e15 = 0.0;
  double e24 = 0.0;
};

// E_15 = N'_5 - P'_51 and E_24 = N'_2 - P'_24 - P'_23 + P'_43. For an
// antisymmetric equal-polarization pair these equal the Bell-state overlap
// <psi+|rho_ij|psi+> of the simulated spin chain at phi2 = phi5 = 0: the
// coupler sign convention absorbs the fermionic string between sites 1 and
// 5, and the P'_43 - P'_23 difference reconstructs the string through the
// passive site 3.
EntanglementFractions entanglement_fractions(const CascadeObservables& obs);

enum class ScanPhase { kPhi2, kPhi5 };

// S-curves against the scanned phase. Scanning phi5 reads the (1,5)
// coupler: s_low = S_1 = P'_12 + P'_14 and s_high = S_5 = P'_52 + P'_54;
// scanning phi2 reads the (2,4) coupler: s_low = S_2 = P'_21 + P'_25,
// s_high = S_4 = P'_41 + P'_45. Summing each coupler's partner modes makes
// every curve independent of the phase not being scanned.
struct FringeCurves {
  RVec phases;
  RVec s_low;
  RVec s_high;
};

FringeCurves fringe_scan(const TwoPhotonInput& input, const EccSettings& base,
                         ScanPhase which, const RVec& grid);

// Least-squares fit of offset + amplitude * cos(phi + phase0). The model is
// linear in {1, cos, sin}, so the fit is closed-form; residual is the
// largest absolute deviation. visibility = amplitude / offset.
struct SinusoidFit {
  double offset = 0.0;
  double amplitude = 0.0;
  double phase0 = 0.0;
  double residual = 0.0;
  double visibility = 0.0;
};

SinusoidFit fit_sinusoid(const RVec& phases, const RVec& values);

// Phases maximizing the target coincidence P'_25, by coarse grid scan plus
// simplex refinement; eta5 is carried over from `base` unchanged.
EccSettings optimal_phases(const TwoPhotonInput& input, const EccSettings& base);

}  // namespace qw

#endif
