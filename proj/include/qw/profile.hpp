#ifndef QW_PROFILE_HPP
#define QW_PROFILE_HPP

#include <string>

#include "qw/matrix.hpp"

namespace qw {

// Site-indexed couplings for a chain of n_sites sites driven for n_steps
// steps. couplings(x-1) = j_x for x = 1..N-1; angles = epsilon * couplings;
// transmittances = sin^2(angles). Aux mirrors at sites 0 and N carry T = 0
// and are not stored. epsilon = (N+1)/M for engineered and two-value
// profiles; the minimally engineered chain derives epsilon from its own
// transfer time instead.
struct CouplingProfile {
  int n_sites = 0;  // N >= 3
  int n_steps = 0;  // M >= 1
  double epsilon = 0.0;
  RVec couplings;       // j_1..j_{N-1}
  RVec angles;          // theta_x = epsilon * j_x, each in [0, pi]
  RVec transmittances;  // sin^2(theta_x)
};

// Builds the derived fields from couplings; throws std::domain_error if any
// angle leaves [0, pi]. Angles beyond pi/2 are legal here (T folds back
// through sin^2); the engineered constructors below are stricter.
CouplingProfile profile_from_couplings(int n, int m, double epsilon, const RVec& couplings);

// Mirror-symmetric engineered couplings j_x = pi/(N+1) sqrt(x(N-x)) with
// epsilon = (N+1)/M; throws std::domain_error when m is too small to keep
// every angle within [0, pi/2].
CouplingProfile pst_profile(int n, int m);

// Uniform bulk with tuned ends: j_1 = j_{N-1} = 1.030 N^(-1/6), j = 1
// elsewhere; epsilon = minimal_transfer_time(n) / m.
CouplingProfile minimal_profile(int n, int m);

// Asymptotic transfer time 2t* = N+1 + 2.29 N^(1/3) of the minimal chain.
double minimal_transfer_time(int n);

// Two-value profile: T = t_ends at x in {1, N-1}, T = t_bulk on x = 2..N-2.
CouplingProfile table_profile(int n, int m, double t_bulk, double t_ends);

struct ContinuumCouplings {
  double j_bulk = 0.0;
  double j_ends = 0.0;
  double fidelity = 0.0;  // |<N| exp(-i (N+1) H) |1>|^2 at the optimum
};

// Two-value coupling pattern (ends j_e, bulk j_b) maximizing the
// continuous-time end-to-end transfer at time N+1 under H(x,x+1) = j_x/2.
// Coarse grid over (0,2]^2 (ties broken toward smaller j_ends), then
// simplex refinement. Deterministic, no randomness involved. For n = 5 the
// optimum coincides with the fully engineered pattern (j_e = pi/3,
// j_b = pi sqrt(6)/6), which is why that case has closed-form
// transmittances sin^2(2 pi / M) and sin^2(pi sqrt(6) / M).
ContinuumCouplings optimize_continuum_couplings(int n);

struct TransmittanceOptimum {
  double t_bulk = 0.0;
  double t_ends = 0.0;
  double q = 0.0;
};

// Optimal two-value transmittances for an m-step walk on n sites: maps the
// continuum optimum through T = sin^2((n+1)/m * j) and evaluates q with the
// discrete walk at those couplings. The mapping is deliberately not a raw
// 2-D maximization of q itself: the discrete landscape contains ballistic
// resonances (q ~ 1 at couplings unrelated to the hopping dynamics), and
// the engineered chain is the continuum optimum expressed in walk steps.
TransmittanceOptimum optimize_transmittances(int n, int m);

// Structured-text round trip (keys: n_sites, n_steps, transmittances).
std::string profile_to_text(const CouplingProfile& p);
CouplingProfile profile_from_text(const std::string& text);

}  // namespace qw

#endif
