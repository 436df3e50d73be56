#include <cmath>
#include <numbers>

#include <doctest.h>

#include "qw/matrix.hpp"
#include "qw/mesh.hpp"
#include "qw/profile.hpp"
#include "qw/walk.hpp"

using namespace qw;

namespace {

// M-step walk matrix restricted to the waveguide channels of the mesh
// boundaries. The mesh must agree with this entrywise.
Mat embedded_walk(const CouplingProfile& p, const WaveguideMesh& mesh) {
  const Mat u1 = walk_unitary(p);
  Mat u = Mat::Identity(u1.rows(), u1.cols());
  for (int k = 0; k < p.n_steps; ++k) u = u1 * u;
  const int n = mesh.n_modes;
  Mat out(n, n);
  for (int col = 0; col < n; ++col) {
    const auto& in = mesh.input_channel[col];
    for (int row = 0; row < n; ++row) {
      const auto& ch = mesh.output_channel[row];
      out(row, col) = u(walker_index(p.n_sites, ch.site, ch.coin),
                        walker_index(p.n_sites, in.site, in.coin));
    }
  }
  return out;
}

double cross_view_gap(const CouplingProfile& p) {
  const WaveguideMesh mesh = layout_dtqw(p);
  return (compile_unitary(mesh) - embedded_walk(p, mesh)).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_CASE("compile_unitary on hand-built meshes") {
  WaveguideMesh empty;
  empty.n_modes = 3;
  CHECK((compile_unitary(empty) - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() == 0.0);

  WaveguideMesh balanced;
  balanced.n_modes = 2;
  balanced.layers.push_back({{{1, 0.5}}, {}});
  const Mat u = compile_unitary(balanced);
  const double r = 1.0 / std::sqrt(2.0);
  CHECK(std::abs(u(0, 0) - r) < 1e-15);
  CHECK(std::abs(u(0, 1) - r) < 1e-15);
  CHECK(std::abs(u(1, 0) - r) < 1e-15);
  CHECK(std::abs(u(1, 1) + r) < 1e-15);

  // T = 0 passes the upper guide and flips the sign of the lower one.
  WaveguideMesh bar;
  bar.n_modes = 2;
  bar.layers.push_back({{{1, 0.0}}, {}});
  const Mat b = compile_unitary(bar);
  CHECK(b(0, 0) == Complex(1.0));
  CHECK(b(1, 1) == Complex(-1.0));
  CHECK(b(0, 1) == Complex(0.0));

  WaveguideMesh mirrored;
  mirrored.n_modes = 3;
  mirrored.layers.push_back({{{2, 0.5}}, {{1, -1}}});
  CHECK(compile_unitary(mirrored)(0, 0) == Complex(-1.0));

  WaveguideMesh bad = balanced;
  bad.layers[0].couplers.push_back({2, 0.5});
  CHECK_THROWS_AS(compile_unitary(bad), std::invalid_argument);
  bad = balanced;
  bad.layers[0].couplers[0].second = 1.5;
  CHECK_THROWS_AS(compile_unitary(bad), std::invalid_argument);
  bad = balanced;
  bad.layers[0].mirrors.push_back({1, -1});
  CHECK_THROWS_AS(compile_unitary(bad), std::invalid_argument);
  bad = balanced;
  bad.layers[0].mirrors.push_back({3, 1});
  CHECK_THROWS_AS(compile_unitary(bad), std::invalid_argument);
}

TEST_CASE("layout_dtqw reproduces the chip geometry") {
  const auto mesh = layout_dtqw(table_profile(5, 6, 0.36, 0.25));
  CHECK(mesh.n_modes == 5);
  REQUIRE(mesh.layers.size() == 6);
  for (size_t k = 0; k < 6; ++k) {
    const auto& layer = mesh.layers[k];
    REQUIRE(layer.couplers.size() == 2);
    if (k % 2 == 0) {
      // Odd chain sites: couplers (1,2) and (3,4); guide 5 hits the mirror.
      CHECK(layer.couplers[0].first == 1);
      CHECK(layer.couplers[0].second == 0.25);
      CHECK(layer.couplers[1].first == 3);
      CHECK(layer.couplers[1].second == 0.36);
      REQUIRE(layer.mirrors.size() == 1);
      CHECK(layer.mirrors[0] == std::pair<int, int>(5, 1));
    } else {
      CHECK(layer.couplers[0].first == 2);
      CHECK(layer.couplers[0].second == 0.36);
      CHECK(layer.couplers[1].first == 4);
      CHECK(layer.couplers[1].second == 0.25);
      REQUIRE(layer.mirrors.size() == 1);
      CHECK(layer.mirrors[0] == std::pair<int, int>(1, -1));
    }
  }

  // Boundary embeddings: odd guides carry right-movers at the input; after
  // six layers the output boundary has the same parity.
  REQUIRE(mesh.input_channel.size() == 5);
  CHECK(mesh.input_channel[0].site == 1);
  CHECK(mesh.input_channel[0].coin == kRight);
  CHECK(mesh.input_channel[1].site == 1);
  CHECK(mesh.input_channel[1].coin == kLeft);
  CHECK(mesh.input_channel[3].site == 3);
  CHECK(mesh.input_channel[3].coin == kLeft);
  CHECK(mesh.output_channel[4].site == 5);
  CHECK(mesh.output_channel[4].coin == kRight);

  CHECK(is_unitary(compile_unitary(mesh), 1e-10));

  // Couplers store transmittance only, so angles past pi/2 are not
  // representable and must be rejected.
  RVec j(6);
  j << 0.982631, 1.271093, 1.271093, 1.271093, 1.271093, 0.982631;
  const auto folded = profile_from_couplings(7, 6, 8.0 / 6.0, j);
  CHECK_THROWS_AS(layout_dtqw(folded), std::domain_error);
}

TEST_CASE("mesh and walk views agree on every matrix element") {
  for (int n = 3; n <= 8; ++n) {
    for (int m : {1, 2, 3, 6, 11, 24}) {
      CAPTURE(n);
      CAPTURE(m);
      CHECK(cross_view_gap(table_profile(n, m, 0.36, 0.25)) <= 1e-12);
      CHECK(cross_view_gap(table_profile(n, m, 0.72, 0.51)) <= 1e-12);
    }
    CHECK(cross_view_gap(pst_profile(n, n + 1)) <= 1e-12);
    CHECK(cross_view_gap(pst_profile(n, 3 * n)) <= 1e-12);
    if (n >= 5) CHECK(cross_view_gap(minimal_profile(n, 24)) <= 1e-12);
  }
}

TEST_CASE("deleting a layer breaks the cross-view match") {
  const auto p = table_profile(5, 6, 0.36, 0.25);
  auto mesh = layout_dtqw(p);
  const Mat reference = embedded_walk(p, mesh);
  mesh.layers.erase(mesh.layers.begin() + 2);
  const double gap = (compile_unitary(mesh) - reference).cwiseAbs().maxCoeff();
  CHECK(gap > 1e-6);
}

TEST_CASE("mesh matrix element reproduces transfer_quality") {
  // Valid whenever the output boundary parity matches N, which holds for
  // the chip schedule and every mirror-time engineered profile.
  for (const auto& p : {table_profile(5, 6, 0.36, 0.25), pst_profile(5, 12), pst_profile(6, 7),
                        pst_profile(7, 8), table_profile(8, 9, 0.7, 0.5)}) {
    const auto mesh = layout_dtqw(p);
    REQUIRE(mesh.output_channel[p.n_sites - 1].site == p.n_sites);
    REQUIRE(mesh.output_channel[p.n_sites - 1].coin == kRight);
    const Mat u = compile_unitary(mesh);
    CAPTURE(p.n_sites);
    CAPTURE(p.n_steps);
    CHECK(std::abs(std::norm(u(p.n_sites - 1, 0)) - transfer_quality(p)) <= 1e-12);
  }
}

TEST_CASE("ctqw_target hits the mirror state at the transfer time") {
  const auto chip = table_profile(5, 6, 0.36, 0.25);
  CHECK((ctqw_target(chip, 0.0) - Mat::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-14);

  // Engineered couplings with epsilon = 1: the mirror lands at time N+1 and
  // the propagator concentrates on the antidiagonal.
  for (int n = 4; n <= 9; ++n) {
    const Mat u = ctqw_target(pst_profile(n, n + 1), double(n + 1));
    CAPTURE(n);
    for (int x = 0; x < n; ++x) CHECK(std::abs(std::abs(u(n - 1 - x, x)) - 1.0) < 1e-10);
  }

  // Half transfer on five sites: the column from site 2 spreads over
  // {1, 2, 4, 5} with equal weight, site 3 stays dark.
  const Mat h = ctqw_target(pst_profile(5, 6), 3.0);
  CHECK(std::abs(std::abs(h(0, 1)) - 0.5) < 1e-12);
  CHECK(std::abs(std::abs(h(1, 1)) - 0.5) < 1e-12);
  CHECK(std::abs(h(2, 1)) < 1e-12);
  CHECK(std::abs(std::abs(h(3, 1)) - 0.5) < 1e-12);
  CHECK(std::abs(std::abs(h(4, 1)) - 0.5) < 1e-12);
}

TEST_CASE("mesh netlist round trip is byte identical") {
  const auto mesh = layout_dtqw(table_profile(5, 6, 0.36, 0.25));
  const std::string text = mesh_to_text(mesh);
  const WaveguideMesh back = mesh_from_text(text);
  CHECK(mesh_to_text(back) == text);
  CHECK((compile_unitary(back) - compile_unitary(mesh)).cwiseAbs().maxCoeff() == 0.0);
  CHECK(back.input_channel.size() == mesh.input_channel.size());
  CHECK(back.output_channel[4].site == 5);

  // Awkward transmittances must survive the text format exactly.
  const auto awkward = layout_dtqw(table_profile(6, 5, 1.0 / 3.0, 0.1234567890123456789));
  CHECK(mesh_to_text(mesh_from_text(mesh_to_text(awkward))) == mesh_to_text(awkward));

  CHECK_THROWS_AS(mesh_from_text("layer = 1:0.5\n"), std::invalid_argument);
  CHECK_THROWS_AS(mesh_from_text("n_modes = 2\nwidget = 3\n"), std::invalid_argument);
  CHECK_THROWS_AS(mesh_from_text("n_modes = 2\nlayer = 1:0.5, 2:0.5\n"), std::invalid_argument);
}
