#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qw/matrix.hpp"
#include "test_util.hpp"

using qw::Complex;
using qw::Mat;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("determinant2 basics") {
  Mat id = Mat::Identity(2, 2);
  CHECK(qw::determinant2(id) == Complex(1, 0));

  Mat swap(2, 2);
  swap << 0, 1, 1, 0;
  CHECK(qw::determinant2(swap) == Complex(-1, 0));

  Mat m = qwtest::random_complex(2, 11);
  const Complex expected = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  CHECK(std::abs(qw::determinant2(m) - expected) < 1e-15);

  CHECK_THROWS_AS(qw::determinant2(Mat::Identity(3, 3)), std::invalid_argument);
}

TEST_CASE("permanent small and Ryser paths") {
  CHECK(std::abs(qw::permanent(Mat(Mat::Identity(2, 2))) - Complex(1, 0)) == 0.0);

  Mat ones = Mat::Ones(2, 2);
  CHECK(std::abs(qw::permanent(ones) - Complex(2, 0)) == 0.0);

  // 3x3 against the 6 permutation terms written out by hand.
  Mat m = qwtest::random_complex(3, 5);
  const Complex expected = m(0, 0) * m(1, 1) * m(2, 2) + m(0, 0) * m(1, 2) * m(2, 1) +
                           m(0, 1) * m(1, 0) * m(2, 2) + m(0, 1) * m(1, 2) * m(2, 0) +
                           m(0, 2) * m(1, 0) * m(2, 1) + m(0, 2) * m(1, 1) * m(2, 0);
  CHECK(std::abs(qw::permanent(m) - expected) < 1e-13);

  CHECK_THROWS_AS(qw::permanent(Mat(Mat::Identity(13, 13))), std::invalid_argument);
}

TEST_CASE("permanent Ryser path matches permutation enumeration") {
  for (int n : {5, 6}) {
    Mat m = qwtest::random_complex(n, 100 + n);
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    Complex brute = 0;
    do {
      Complex term = 1;
      for (int i = 0; i < n; ++i) term *= m(i, p[i]);
      brute += term;
    } while (std::next_permutation(p.begin(), p.end()));
    CHECK(std::abs(qw::permanent(m) - brute) < 1e-11);
  }
}

TEST_CASE("permanent equals determinant on diagonal matrices") {
  for (int n : {4, 7}) {
    Mat d = Mat::Zero(n, n);
    Mat r = qwtest::random_complex(n, 200 + n);
    for (int i = 0; i < n; ++i) d(i, i) = r(i, 0);
    const Complex prod = d.diagonal().prod();
    CHECK(std::abs(qw::permanent(d) - prod) < 1e-12);
    CHECK(std::abs(d.determinant() - prod) < 1e-12);
  }
}

TEST_CASE("is_unitary") {
  Mat id = Mat::Identity(4, 4);
  CHECK(qw::is_unitary(id, 1e-12));

  Mat bad = id;
  bad(1, 2) += 1e-3;
  CHECK_FALSE(qw::is_unitary(bad, 1e-6));

  CHECK(qw::is_unitary(qwtest::random_unitary(6, 42), 1e-10));
  CHECK_THROWS_AS(qw::is_unitary(id, 0.0), std::invalid_argument);
}

TEST_CASE("determinant2 of a 2x2 unitary has unit modulus") {
  for (std::uint64_t s : {1u, 2u, 3u}) {
    Mat u = qwtest::random_unitary(2, s);
    CHECK(std::abs(std::abs(qw::determinant2(u)) - 1.0) < 1e-12);
  }
}

TEST_CASE("herm_exp closed forms") {
  Mat z = Mat::Zero(3, 3);
  CHECK((qw::herm_exp(z, 2.5) - Mat::Identity(3, 3)).cwiseAbs().maxCoeff() < 1e-14);

  Mat sx(2, 2);
  sx << 0, 1, 1, 0;
  // exp(-i t sx) = cos(t) I - i sin(t) sx
  const double t = 0.7;
  Mat e = qw::herm_exp(sx, t);
  CHECK(std::abs(e(0, 0) - Complex(std::cos(t), 0)) < 1e-14);
  CHECK(std::abs(e(0, 1) - Complex(0, -std::sin(t))) < 1e-14);
  Mat epi = qw::herm_exp(sx, kPi);
  CHECK((epi + Mat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-13);

  CHECK(qw::is_unitary(qw::herm_exp(qwtest::random_hermitian(5, 7), 1.3), 1e-10));

  Mat nonherm = qwtest::random_complex(3, 9);
  CHECK_THROWS_AS(qw::herm_exp(nonherm, 1.0), std::invalid_argument);
}

TEST_CASE("herm_exp mirror of an engineered tridiagonal chain") {
  // Couplings j_x/2 with j_x = pi/(N+1) sqrt(x(N-x)): full mirror at t = N+1.
  for (int n : {5, 6}) {
    Mat h = Mat::Zero(n, n);
    for (int x = 1; x < n; ++x) {
      const double j = kPi / (n + 1) * std::sqrt(double(x) * (n - x));
      h(x - 1, x) = j / 2;
      h(x, x - 1) = j / 2;
    }
    Mat u = qw::herm_exp(h, double(n + 1));
    for (int x = 0; x < n; ++x)
      for (int y = 0; y < n; ++y) {
        const double want = (x + y == n - 1) ? 1.0 : 0.0;
        CHECK(std::abs(std::abs(u(x, y)) - want) < 1e-10);
      }
  }
}

TEST_CASE("herm_exp group property") {
  Mat h = qwtest::random_hermitian(5, 21);
  Mat a = qw::herm_exp(h, 0.4) * qw::herm_exp(h, 0.9);
  Mat b = qw::herm_exp(h, 1.3);
  CHECK((a - b).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("unitary_fidelity") {
  Mat u = qwtest::random_unitary(5, 31);
  CHECK(qw::unitary_fidelity(u, u) == doctest::Approx(1.0).epsilon(1e-12));

  Mat v = u * std::exp(Complex(0, 1.234));
  CHECK(qw::unitary_fidelity(u, v) == doctest::Approx(1.0).epsilon(1e-12));

  Mat w = qwtest::random_unitary(5, 32);
  CHECK(qw::unitary_fidelity(u, w) == doctest::Approx(qw::unitary_fidelity(w, u)).epsilon(1e-12));

  // invariant under joint left multiplication
  Mat g = qwtest::random_unitary(5, 33);
  CHECK(qw::unitary_fidelity(Mat(g * u), Mat(g * w)) ==
        doctest::Approx(qw::unitary_fidelity(u, w)).epsilon(1e-12));

  CHECK_THROWS_AS(qw::unitary_fidelity(u, qwtest::random_unitary(4, 34)), std::invalid_argument);
  Mat notu = u;
  notu(0, 0) += 0.1;
  CHECK_THROWS_AS(qw::unitary_fidelity(u, notu), std::invalid_argument);
}

TEST_CASE("unitary_fidelity decreases with rotation offset") {
  auto rot = [](double th) {
    Mat r(2, 2);
    r << std::cos(th), -std::sin(th), std::sin(th), std::cos(th);
    return r;
  };
  Mat u = rot(0.3);
  const double f1 = qw::unitary_fidelity(u, rot(0.3 + 0.05));
  const double f2 = qw::unitary_fidelity(u, rot(0.3 + 0.10));
  CHECK(f1 > f2);
  CHECK(f1 < 1.0);
  CHECK(f2 > 0.0);
}
