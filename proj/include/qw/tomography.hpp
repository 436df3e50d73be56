#ifndef QW_TOMOGRAPHY_HPP
#define QW_TOMOGRAPHY_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "qw/matrix.hpp"
#include "qw/mesh.hpp"
#include "qw/optim.hpp"

namespace qw {

// Splitting ratios and two-photon visibilities of one chip, both photon
// polarizations. splitting(r-1, i-1) = |u(r, i)|^2 for input guide i and
// output guide r; visibility(a, b) pairs input pair a with coincidence
// output pair b in mode_pairs() order. Each datum carries its own standard
// deviation in the matching sigma block.
struct MeasurementSet {
  RMat splitting_h, splitting_v;
  RMat visibility_h, visibility_v;
  RMat sigma_splitting_h, sigma_splitting_v;
  RMat sigma_visibility_h, sigma_visibility_v;
};

// Unordered guide pairs (a, b) with a < b, 1-based, lexicographic. Rows and
// columns of the visibility blocks follow this order.
std::vector<std::pair<int, int>> mode_pairs(int n_modes);

// Total number of data points across both polarizations.
int measurement_count(const MeasurementSet& data);

// Sections [splitting_h], [splitting_v], [visibility_h], [visibility_v]
// hold one matrix each; [sigma] holds the four sigma blocks stacked in
// that order. write -> read -> write is byte-identical.
std::string measurements_to_text(const MeasurementSet& data);
MeasurementSet measurements_from_text(const std::string& text);

// Exact splitting and visibility tables of (u_h, u_v) plus i.i.d. Gaussian
// noise of width noise_sigma, clamped to [0, 1] and [-1, 1]. Recorded
// sigmas are max(noise_sigma, 1e-6); the floor keeps chi_square defined
// for noiseless sets. Byte-identical output for a given seed.
MeasurementSet synthesize_measurements(const Mat& u_h, const Mat& u_v, double noise_sigma,
                                       std::uint64_t seed);

// Relative phase picked up by `mode` where it enters `layer` (both 1-based).
struct PhaseSlot {
  int layer = 0;
  int mode = 0;
};

// Fit template: coupler/mirror geometry of a mesh (its stored
// transmittances are placeholders) plus the phase slots identifiable from
// splitting and visibility data. One parameter block is [T per coupler,
// layer-major | phase per slot]; a full fit vector stacks the H block,
// then the V block.
struct CircuitModel {
  WaveguideMesh mesh;
  std::vector<PhaseSlot> slots;
};

// Standard template: the alternating coupler ladder on n_guides guides and
// n_layers layers, with phase slots for guides 1..n_guides-1 on the single
// gap entering layer n_layers/2 + 1. For the 5-guide, 6-layer chip that is
// 12 + 4 parameters per polarization, and the measurement Jacobian has
// full rank 16: exactly dim U(5) minus the 9 input/output phases such data
// cannot see, so any further slot would only add gauge. Full rank makes
// the class locally rigid, not globally: the parameter-to-table map still
// has isolated twins (distinct coupler settings compiling to E u F for
// diagonal phase matrices E, F, which no splitting or visibility datum can
// distinguish), plus the exact conjugation mirror. Fidelities between a
// reconstruction and an external reference therefore belong to
// reconstruction_fidelity; parameter-space comparisons belong to the
// canonical gauge of canonical_parameters.
CircuitModel chip_model(int n_guides, int n_layers);

// Parameters in one polarization block: couplers + phase slots.
int parameter_count(const CircuitModel& model);

// Layer product with exp(i phi) inserted on each slot's guide before its
// layer. params = [T_1..T_c | phi_1..phi_s]; throws std::invalid_argument
// on size mismatch, T outside [0, 1], or a slot off the template.
Mat compile_circuit(const CircuitModel& model, const RVec& params);

// Sum over both polarization blocks of ((model - data) / sigma)^2; params
// stacks the H and V blocks. Any sigma <= 0 raises std::invalid_argument.
double chi_square(const RVec& params, const MeasurementSet& data, const CircuitModel& model);

struct FitOptions {
  int n_starts = 24;
  int max_nfev = 6000;        // per start, per polarization block
  std::uint64_t seed = 71u;   // multi-start draw; fixed so fits are reproducible
};

struct FitResult {
  RVec params;  // canonical, H block then V block
  Mat u_h, u_v;
  double residual = 0.0;  // chi_square at params
};

// The deterministic multi-start initial points, one polarization block
// each, in public (T, phi) coordinates. Both blocks fit from this list.
std::vector<RVec> fit_starts(const CircuitModel& model, const FitOptions& opt = {});

// Independent multi-start Levenberg-Marquardt fits of the H and V blocks.
// Internally the couplers are optimized as T = sin^2(theta), so the [0, 1]
// box needs no constraint handling. The winning block is canonicalized by
// flipping the sign of every phase when the sines sum negative: splitting
// and visibility data cannot tell u from conj(u), and conjugation is
// exactly the phase-sign flip, so each fit would otherwise land on either
// mirror at random. Parameter twins tie the chi-square exactly on any
// data, so among cost-tied candidates the block whose phase sines sum
// largest wins, and each winning block is then mapped to the canonical
// representative of its twin fiber (a gauge move: the canonical twin
// reproduces the block's tables exactly, so the residual is unchanged).
// Fits of data from twin truths thus return one parameter point. Throws
// convergence_error (best point attached) when no start converges within
// its budget.
FitResult fit_circuit(const MeasurementSet& data, const CircuitModel& model,
                      const FitOptions& opt = {});

// The canonical representative of the parameter twins of `params` (stacked
// H and V blocks): the point the fit pipeline returns for the exact tables
// params generates. Fitting data synthesized from any twin of params, with
// the same options, reproduces this point, so parameter-space statements
// (closed-loop recovery, Monte Carlo coverage of a known truth) are made
// between canonical representatives. Throws convergence_error if the
// internal fit fails to reach the fiber (residual above 1e-3).
RVec canonical_parameters(const CircuitModel& model, const RVec& params,
                          const FitOptions& opt = {});

struct MonteCarloErrors {
  RVec param_mean, param_std;   // stacked like FitResult::params
  RVec fidelity_h, fidelity_v;  // refit vs base reconstruction, per sample
};

// Resamples every datum within its sigma, refits warm-started from the
// base fit (one Levenberg-Marquardt run per block, no canonical flip: the
// refit stays on the base branch), and reports per-parameter spreads plus
// the fidelity distribution against the base reconstruction. n_samples
// below 20 is rejected.
MonteCarloErrors monte_carlo_errors(const MeasurementSet& data, const CircuitModel& model,
                                    int n_samples, std::uint64_t seed,
                                    const FitOptions& opt = {});

// max |tr(F a' E b)| / dim over diagonal phase matrices E, F and complex
// conjugation of b: overlap modulo every symmetry invisible to splitting
// and visibility measurements. Never below unitary_fidelity(a, b).
double reconstruction_fidelity(const Mat& a, const Mat& b);

}  // namespace qw

#endif
