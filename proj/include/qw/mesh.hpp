#ifndef QW_MESH_HPP
#define QW_MESH_HPP

#include <string>
#include <utility>
#include <vector>

#include "qw/matrix.hpp"
#include "qw/profile.hpp"
#include "qw/walk.hpp"

namespace qw {

// (site, coin) channel a waveguide carries at a mesh boundary.
struct ModeChannel {
  int site = 0;
  Coin coin = kLeft;
};

// One column of couplers on adjacent guide pairs (a, a+1), 1-based and
// pairwise disjoint, each carrying a crossing probability T. Guides the
// layer leaves uncovered either pass through or, at the chain edges,
// reflect off the implicit end mirror with the listed amplitude sign.
struct CouplerLayer {
  std::vector<std::pair<int, double>> couplers;  // (lower guide, T)
  std::vector<std::pair<int, int>> mirrors;      // (guide, +1 or -1)
};

// n_modes guides traversing the layers in order. The boundary embeddings
// record which walker channel each guide carries; they are fixed at layout
// time and serialized with the mesh rather than recomputed. Hand-built
// meshes may leave the embeddings empty.
struct WaveguideMesh {
  int n_modes = 0;
  std::vector<CouplerLayer> layers;
  std::vector<ModeChannel> input_channel;  // guide w at index w-1
  std::vector<ModeChannel> output_channel;
};

// Ladder layout of a coupling profile: n_steps layers alternating between
// couplers on (x, x+1) for odd chain sites x (first layer) and for even
// sites, coupler (x, x+1) carrying T_x. Edge guides a layer leaves
// uncovered take the end-mirror reflection amplitude: guide 1 gets -1 in
// even layers, guide N gets +1 when N matches the layer parity (both signs
// fixed by the coin convention). Every profile angle must lie within
// [0, pi/2] so that T alone determines the coupler; throws
// std::domain_error otherwise.
WaveguideMesh layout_dtqw(const CouplingProfile& profile);

// Product of the layer matrices in propagation order. Each coupler embeds
//   [[sqrt(1-T), sqrt(T)], [sqrt(T), -sqrt(1-T)]]
// on its guide pair (the coin rotation read in guide ordering), mirrors
// contribute their sign on the diagonal, untouched guides pass through.
// An empty mesh compiles to the identity.
Mat compile_unitary(const WaveguideMesh& mesh);

// exp(-i time H_eff) for the profile's effective hopping Hamiltonian.
// Time is in walk-step units: an epsilon = 1 engineered profile reaches
// its mirror at time n_steps.
Mat ctqw_target(const CouplingProfile& profile, double time);

// Netlist round trip: n_modes, one line per layer, boundary embeddings.
// write -> read -> write is byte-identical.
std::string mesh_to_text(const WaveguideMesh& mesh);
WaveguideMesh mesh_from_text(const std::string& text);

}  // namespace qw

#endif
