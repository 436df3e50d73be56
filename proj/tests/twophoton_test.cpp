#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

#include <doctest.h>

#include "qw/matrix.hpp"
#include "qw/mesh.hpp"
#include "qw/profile.hpp"
#include "qw/spin.hpp"
#include "qw/twophoton.hpp"
#include "test_util.hpp"

using namespace qw;

namespace {

// The fabricated six-step device: five guides, balanced-quench couplers.
Mat chip_unitary() {
  return compile_unitary(layout_dtqw(table_profile(5, 6, 0.36, 0.25)));
}

Mat balanced_coupler() {
  Mat u(2, 2);
  const double r = std::numbers::sqrt2 / 2.0;
  u << r, r, r, -r;
  return u;
}

Mat givens(int n, int a, int b, double delta) {
  Mat g = Mat::Identity(n, n);
  g(a, a) = std::cos(delta);
  g(a, b) = -std::sin(delta);
  g(b, a) = std::sin(delta);
  g(b, b) = std::cos(delta);
  return g;
}

double total_pair_probability(const TwoPhotonInput& input) {
  const int n = static_cast<int>(input.u_h.rows());
  double total = 0.0;
  for (int r = 1; r <= n; ++r)
    for (int s = r; s <= n; ++s) total += output_probability(input, r, s);
  return total;
}

double bunching_mass(const TwoPhotonInput& input) {
  const int n = static_cast<int>(input.u_h.rows());
  double mass = 0.0;
  for (int r = 1; r <= n; ++r) mass += output_probability(input, r, r);
  return mass;
}

}  // namespace

TEST_CASE("submatrix picks the transfer block") {
  const Mat id = Mat::Identity(4, 4);
  const Mat same = submatrix(id, id, 1, 2, 1, 2);
  CHECK((same - Mat::Identity(2, 2)).cwiseAbs().maxCoeff() == 0.0);

  // Swapped outputs read the block antidiagonally.
  const Mat crossed = submatrix(id, id, 1, 2, 2, 1);
  CHECK(std::abs(crossed(0, 0)) == 0.0);
  CHECK(std::abs(crossed(0, 1) - 1.0) == 0.0);
  CHECK(std::abs(crossed(1, 0) - 1.0) == 0.0);
  CHECK(std::abs(crossed(1, 1)) == 0.0);

  const Mat u = qwtest::random_unitary(6, 91);
  const Mat v = qwtest::random_unitary(6, 92);
  const Mat block = submatrix(u, v, 2, 5, 4, 6);
  CHECK(block(0, 0) == u(3, 1));
  CHECK(block(0, 1) == u(3, 4));
  CHECK(block(1, 0) == v(5, 1));
  CHECK(block(1, 1) == v(5, 4));

  // The pair amplitude is the permanent (chi = 0) or determinant (chi = pi)
  // of this block over sqrt(2).
  for (int r = 1; r <= 6; ++r) {
    for (int s = 1; s <= 6; ++s) {
      const Mat m = submatrix(u, v, 2, 5, r, s);
      const Complex boson = two_photon_amplitude({2, 5, 0.0, u, v}, r, s);
      const Complex fermion =
          two_photon_amplitude({2, 5, std::numbers::pi, u, v}, r, s);
      CHECK(std::abs(boson - permanent(m) / std::numbers::sqrt2) <= 1e-15);
      CHECK(std::abs(fermion - determinant2(m) / std::numbers::sqrt2) <= 1e-15);
    }
  }

  CHECK_THROWS_AS(submatrix(u, v, 0, 5, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(submatrix(u, v, 2, 7, 1, 1), std::invalid_argument);
  CHECK_THROWS_AS(submatrix(u, v, 2, 5, 1, 9), std::invalid_argument);
  CHECK_THROWS_AS(submatrix(u, Mat::Identity(5, 5), 1, 2, 1, 2),
                  std::invalid_argument);
}

TEST_CASE("output probabilities of elementary networks") {
  // Straight wires: the pair comes out exactly where it went in.
  const Mat id = Mat::Identity(4, 4);
  const TwoPhotonInput wires{2, 4, 0.0, id, id};
  for (int r = 1; r <= 4; ++r)
    for (int s = r; s <= 4; ++s) {
      const double expected = (r == 2 && s == 4) ? 1.0 : 0.0;
      CHECK(std::abs(output_probability(wires, r, s) - expected) <= 1e-15);
    }

  // Balanced coupler: the symmetric pair bunches (Hong-Ou-Mandel).
  const Mat bal = balanced_coupler();
  const TwoPhotonInput hom{1, 2, 0.0, bal, bal};
  CHECK(output_probability(hom, 1, 1) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(output_probability(hom, 2, 2) == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(output_probability(hom, 1, 2) <= 1e-15);

  // The antisymmetric combination never bunches when both polarizations
  // see the same network.
  const Mat u = qwtest::random_unitary(5, 11);
  const TwoPhotonInput fermion{1, 4, std::numbers::pi, u, u};
  for (int r = 1; r <= 5; ++r) CHECK(output_probability(fermion, r, r) <= 1e-15);

  // Unitarity keeps the pair distribution normalized for any phase.
  for (const double chi : {0.0, 0.77, std::numbers::pi}) {
    const TwoPhotonInput input{2, 5, chi, qwtest::random_unitary(5, 12),
                               qwtest::random_unitary(5, 13)};
    CHECK(total_pair_probability(input) == doctest::Approx(1.0).epsilon(1e-10));
  }

  CHECK_THROWS_AS(output_probability({1, 1, 0.0, id, id}, 1, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(output_probability({0, 2, 0.0, id, id}, 1, 2),
                  std::invalid_argument);
  CHECK_THROWS_AS(output_probability({1, 2, 0.0, 0.5 * id, 0.5 * id}, 1, 2),
                  std::invalid_argument);
}

TEST_CASE("correlation matrix of the six-step chip") {
  const Mat u = chip_unitary();
  REQUIRE(is_unitary(u, 1e-10));
  const TwoPhotonInput fermion{2, 4, std::numbers::pi, u, u};
  const RMat gamma = correlation_matrix(fermion);

  // Diagonal plus twice the upper triangle is the full distribution, and
  // the symmetric storage makes that the plain matrix sum.
  CHECK(gamma.sum() == doctest::Approx(1.0).epsilon(1e-10));
  CHECK((gamma - gamma.transpose()).cwiseAbs().maxCoeff() == 0.0);
  for (int r = 0; r < 5; ++r) CHECK(gamma(r, r) == 0.0);

  // The antisymmetric pair concentrates on the diagonal-neighbor pairs of
  // the quench pattern, not on the injection pair.
  CHECK(gamma(0, 1) == doctest::Approx(0.24002312256110253).epsilon(1e-9));
  CHECK(gamma(0, 3) == doctest::Approx(0.13353788409281162).epsilon(1e-9));
  CHECK(gamma(1, 4) == doctest::Approx(0.08032404474165128).epsilon(1e-9));
  CHECK(gamma(3, 4) == doctest::Approx(0.0444651839035373).epsilon(1e-9));

  const double cross = output_probability(fermion, 1, 2) +
                       output_probability(fermion, 1, 4) +
                       output_probability(fermion, 2, 5) +
                       output_probability(fermion, 4, 5);
  CHECK(cross == doctest::Approx(0.9967004705982054).epsilon(1e-12));
  const double anti = output_probability(fermion, 1, 5) +
                      output_probability(fermion, 2, 4);
  CHECK(anti == doctest::Approx(0.0028785473028354954).epsilon(1e-9));
  CHECK(anti < 0.005);

  // Symmetric input explores a visibly different pattern.
  const TwoPhotonInput boson{2, 4, 0.0, u, u};
  const double sim = similarity(correlation_matrix(boson), gamma);
  CHECK(sim == doctest::Approx(0.09849707232731608).epsilon(1e-9));
  CHECK(sim < 0.1);

  // At the exact half-transfer time of the continuous evolution the four
  // cross pairs split the mass evenly.
  const Mat ut = ctqw_target(pst_profile(5, 6), 3.0);
  const TwoPhotonInput ideal{2, 4, std::numbers::pi, ut, ut};
  CHECK(output_probability(ideal, 1, 2) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(output_probability(ideal, 1, 4) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(output_probability(ideal, 2, 5) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(output_probability(ideal, 4, 5) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(output_probability(ideal, 1, 5) + output_probability(ideal, 2, 4) <=
        1e-20);
}

TEST_CASE("hom_visibility on couplers and straight wires") {
  const Mat bal = balanced_coupler();
  CHECK(hom_visibility(bal, 1, 2, 1, 2) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(hom_visibility(bal, 1, 2, 1, 1) == doctest::Approx(-1.0).epsilon(1e-14));
  CHECK(hom_visibility(bal, 1, 2, 2, 2) == doctest::Approx(-1.0).epsilon(1e-14));

  const Mat id = Mat::Identity(3, 3);
  CHECK(std::abs(hom_visibility(id, 1, 2, 1, 2)) <= 1e-15);
  CHECK_THROWS_AS(hom_visibility(id, 1, 2, 1, 3), std::domain_error);
  CHECK_THROWS_AS(hom_visibility(id, 2, 2, 1, 3), std::invalid_argument);

  // Same number from the polarization pipeline: quantum rate at chi = 0,
  // classical rate as the dephased average of chi = 0 and chi = pi.
  const Mat u = qwtest::random_unitary(5, 31);
  const TwoPhotonInput sym{1, 3, 0.0, u, u};
  const TwoPhotonInput anti{1, 3, std::numbers::pi, u, u};
  for (const auto& [r, s] : {std::pair{1, 3}, {2, 2}, {4, 5}}) {
    const double p_q = output_probability(sym, r, s);
    const double p_cl =
        0.5 * (p_q + output_probability(anti, r, s));
    CHECK(std::abs(hom_visibility(u, 1, 3, r, s) - (p_cl - p_q) / p_cl) <=
          1e-12);
  }
}

TEST_CASE("fock oracle agrees with the amplitude formula") {
  for (const unsigned seed : {3u, 4u}) {
    const Mat u_h = qwtest::random_unitary(5, seed);
    const Mat u_v = qwtest::random_unitary(5, seed + 100);
    for (const double chi : {0.0, 0.77, std::numbers::pi}) {
      const TwoPhotonInput input{2, 4, chi, u_h, u_v};
      const RMat p = fock_oracle(input);
      CHECK((p - p.transpose()).cwiseAbs().maxCoeff() == 0.0);
      for (int r = 1; r <= 5; ++r)
        for (int s = r; s <= 5; ++s)
          CHECK(std::abs(p(r - 1, s - 1) - output_probability(input, r, s)) <=
                1e-10);
    }
  }

  // Post stage folds into the polarization matrices.
  const Mat u = qwtest::random_unitary(4, 7);
  const Mat post = qwtest::random_unitary(4, 8);
  const TwoPhotonInput staged{1, 3, 0.4, u, u};
  const TwoPhotonInput folded{1, 3, 0.4, post * u, post * u};
  CHECK((fock_oracle(staged, post) - fock_oracle(folded)).cwiseAbs().maxCoeff() <=
        1e-12);

  // Dephased mixture of the two Bell phases equals the distinguishable
  // pair rates, term by term.
  const Mat u_h = qwtest::random_unitary(5, 41);
  const Mat u_v = qwtest::random_unitary(5, 42);
  const RMat mixed = 0.5 * (fock_oracle({2, 4, 0.0, u_h, u_v}) +
                            fock_oracle({2, 4, std::numbers::pi, u_h, u_v}));
  for (int r = 1; r <= 5; ++r)
    for (int s = r; s <= 5; ++s) {
      double dist = 0.0;
      if (r == s) {
        dist = 0.5 * (std::norm(u_h(r - 1, 1) * u_v(r - 1, 3)) +
                      std::norm(u_h(r - 1, 3) * u_v(r - 1, 1)));
      } else {
        dist = 0.5 * (std::norm(u_h(r - 1, 1) * u_v(s - 1, 3)) +
                      std::norm(u_h(s - 1, 1) * u_v(r - 1, 3)) +
                      std::norm(u_h(r - 1, 3) * u_v(s - 1, 1)) +
                      std::norm(u_h(s - 1, 3) * u_v(r - 1, 1)));
      }
      CHECK(std::abs(mixed(r - 1, s - 1) - dist) <= 1e-12);
    }

  const Mat big = qwtest::random_unitary(9, 5);
  CHECK_THROWS_AS(fock_oracle({1, 2, 0.0, big, big}), std::invalid_argument);
}

TEST_CASE("polarization mismatch revives bunching") {
  const Mat u = qwtest::random_unitary(5, 21);
  auto mass_at = [&](double delta) {
    const Mat u_v = u * givens(5, 0, 1, delta);
    return bunching_mass({2, 4, std::numbers::pi, u, u_v});
  };
  const double aligned = mass_at(0.0);
  const double slight = mass_at(0.05);
  const double strong = mass_at(0.2);
  CHECK(aligned <= 1e-15);
  CHECK(slight > 1e-6);
  CHECK(strong > slight);
}

TEST_CASE("similarity is a normalized overlap") {
  RMat a(2, 2);
  a << 0.3, 0.1, 0.0, 0.6;
  CHECK(similarity(a, a) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(similarity(a, 2.5 * a) == doctest::Approx(1.0).epsilon(1e-14));

  RMat b(2, 2);
  b << 0.0, 0.5, 0.5, 0.0;
  CHECK(similarity(a, b) < 1.0);
  RMat disjoint(2, 2);
  disjoint << 0.0, 0.0, 1.0, 0.0;
  CHECK(similarity(a, disjoint) == 0.0);
  CHECK(std::abs(similarity(3.0 * a, b) - similarity(a, b)) <= 1e-14);

  RMat negative = a;
  negative(0, 0) = -0.1;
  CHECK_THROWS_AS(similarity(a, negative), std::invalid_argument);
  CHECK_THROWS_AS(similarity(a, RMat::Zero(3, 3)), std::invalid_argument);
  CHECK_THROWS_AS(similarity(RMat::Zero(2, 2), b), std::domain_error);
}

TEST_CASE("fermionic pair statistics match the spin-chain quench") {
  // The antisymmetric photon pair injected at the initially excited sites
  // reproduces the full two-excitation quench distribution: one path goes
  // through the 5x5 mode evolution, the other through the 32-dimensional
  // spin propagator.
  const CouplingProfile profile = pst_profile(5, 6);
  for (const double t : {0.7, 1.9, 3.0}) {
    const Mat u = ctqw_target(profile, t);
    const TwoPhotonInput pair{2, 4, std::numbers::pi, u, u};
    const SpinState state = quench_evolve(5, profile.couplings, t);
    double covered = 0.0;
    for (int r = 1; r <= 5; ++r)
      for (int s = r + 1; s <= 5; ++s) {
        const int basis = (1 << (r - 1)) | (1 << (s - 1));
        const double spin_p = std::norm(state.amp(basis));
        CHECK(std::abs(output_probability(pair, r, s) - spin_p) <= 1e-10);
        covered += spin_p;
      }
    CHECK(covered == doctest::Approx(1.0).epsilon(1e-10));
  }
}
