#include <doctest.h>

#include <cmath>
#include <numbers>

#include "qw/profile.hpp"

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("pst_profile n=5 m=8 transmittances") {
  auto p = qw::pst_profile(5, 8);
  CHECK(p.transmittances(0) == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(p.transmittances(1) == doctest::Approx(std::pow(std::sin(kPi * std::sqrt(6.0) / 8), 2)).epsilon(1e-12));
  CHECK(p.transmittances(1) == doctest::Approx(0.673).epsilon(2e-3));
}

TEST_CASE("pst_profile mirror symmetry and shape") {
  for (int m : {8, 12, 20}) {
    auto p = qw::pst_profile(5, m);
    CHECK(p.transmittances(0) == doctest::Approx(p.transmittances(3)).epsilon(1e-14));
    CHECK(p.transmittances(1) == doctest::Approx(p.transmittances(2)).epsilon(1e-14));
  }
  auto p7 = qw::pst_profile(7, 20);
  for (int x = 0; x < 6; ++x) {
    CHECK(p7.transmittances(x) > 0.0);
    CHECK(p7.transmittances(x) < 1.0);
  }
  CHECK(p7.transmittances(0) < p7.transmittances(1));
  CHECK(p7.transmittances(1) < p7.transmittances(2));
  CHECK(p7.transmittances(2) == doctest::Approx(p7.transmittances(3)).epsilon(1e-14));
}

TEST_CASE("profile invariants") {
  auto p = qw::pst_profile(6, 9);
  CHECK(p.epsilon == double(7) / 9);
  for (int x = 0; x < p.angles.size(); ++x) {
    CHECK(std::abs(p.transmittances(x) - std::pow(std::sin(p.epsilon * p.couplings(x)), 2)) < 1e-14);
    CHECK(p.transmittances(x) >= 0.0);
    CHECK(p.transmittances(x) <= 1.0);
  }
}

TEST_CASE("pst_profile range and precondition errors") {
  CHECK_THROWS_AS(qw::pst_profile(5, 4), std::domain_error);  // theta_2 > pi/2
  CHECK_THROWS_AS(qw::pst_profile(2, 8), std::invalid_argument);
  CHECK_THROWS_AS(qw::pst_profile(5, 3), std::invalid_argument);
  CHECK_NOTHROW(qw::pst_profile(5, 5));  // theta_max = pi sqrt(6)/5 < pi/2
}

TEST_CASE("minimal_profile values") {
  auto p = qw::minimal_profile(64, 80);
  CHECK(p.couplings(0) == doctest::Approx(0.515).epsilon(1e-12));
  CHECK(p.couplings(62) == doctest::Approx(0.515).epsilon(1e-12));
  CHECK(p.couplings(30) == 1.0);
  CHECK(qw::minimal_transfer_time(64) == doctest::Approx(74.16).epsilon(1e-12));
  CHECK(p.epsilon == doctest::Approx(74.16 / 80).epsilon(1e-12));

  auto p5 = qw::minimal_profile(5, 12);
  CHECK(p5.couplings(1) == p5.couplings(2));
  CHECK(p5.couplings(0) == p5.couplings(3));

  CHECK_THROWS_AS(qw::minimal_profile(4, 10), std::invalid_argument);
}

TEST_CASE("table_profile") {
  auto p = qw::table_profile(5, 6, 0.36, 0.25);
  CHECK(p.transmittances(0) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(p.transmittances(1) == doctest::Approx(0.36).epsilon(1e-12));
  CHECK(p.transmittances(2) == doctest::Approx(0.36).epsilon(1e-12));
  CHECK(p.transmittances(3) == doctest::Approx(0.25).epsilon(1e-12));
  CHECK(p.epsilon == 1.0);

  auto p6 = qw::table_profile(6, 7, 0.916, 0.721);
  CHECK(p6.transmittances(2) == doctest::Approx(0.916).epsilon(1e-12));

  CHECK_THROWS_AS(qw::table_profile(5, 6, 0.0, 0.25), std::domain_error);
  CHECK_THROWS_AS(qw::table_profile(5, 6, 0.36, 1.2), std::domain_error);
}

TEST_CASE("profile text round trip") {
  auto p = qw::pst_profile(5, 8);
  const std::string text = qw::profile_to_text(p);
  auto q = qw::profile_from_text(text);
  CHECK(qw::profile_to_text(q) == text);
  CHECK(q.n_sites == 5);
  CHECK(q.n_steps == 8);
  for (int x = 0; x < 4; ++x)
    CHECK(q.transmittances(x) == doctest::Approx(p.transmittances(x)).epsilon(1e-15));

  CHECK_THROWS_AS(qw::profile_from_text("n_sites = 5\nbogus = 1\n"), std::invalid_argument);
  CHECK_THROWS_AS(qw::profile_from_text("n_sites = 5\nn_steps = 8\ntransmittances = 0.5\n"),
                  std::invalid_argument);
}

TEST_CASE("optimize_continuum_couplings: five sites give the engineered pattern") {
  const auto c5 = qw::optimize_continuum_couplings(5);
  CHECK(c5.j_bulk == doctest::Approx(kPi * std::sqrt(6.0) / 6).epsilon(1e-5));
  CHECK(c5.j_ends == doctest::Approx(kPi / 3).epsilon(1e-5));
  CHECK(c5.fidelity == doctest::Approx(1.0).epsilon(1e-7));

  // Beyond five sites a two-value pattern cannot transfer perfectly.
  for (int n : {6, 7}) {
    const auto c = qw::optimize_continuum_couplings(n);
    CAPTURE(n);
    CHECK(c.fidelity > 0.99);
    CHECK(c.fidelity < 1.0 - 1e-4);
  }

  CHECK_THROWS_AS(qw::optimize_continuum_couplings(4), std::invalid_argument);
}

TEST_CASE("optimize_transmittances recovers published optima") {
  const auto r1 = qw::optimize_transmittances(5, 12);
  CHECK(std::abs(r1.t_bulk - 0.358) <= 0.005);
  CHECK(std::abs(r1.t_ends - 0.250) <= 0.005);
  CHECK(std::abs(r1.q - 0.956) <= 0.002);

  const auto r2 = qw::optimize_transmittances(7, 10);
  CHECK(std::abs(r2.t_bulk - 0.723) <= 0.005);
  CHECK(std::abs(r2.t_ends - 0.501) <= 0.005);
  CHECK(std::abs(r2.q - 0.964) <= 0.002);

  // Lightcone edge: the published seven-site table starts at M = N - 1.
  const auto r3 = qw::optimize_transmittances(7, 6);
  CHECK(std::abs(r3.t_bulk - 0.985) <= 0.005);
  CHECK(std::abs(r3.t_ends - 0.934) <= 0.005);
  CHECK(std::abs(r3.q - 0.819) <= 0.002);

  CHECK_THROWS_AS(qw::optimize_transmittances(4, 12), std::invalid_argument);
  CHECK_THROWS_AS(qw::optimize_transmittances(5, 3), std::invalid_argument);
}

TEST_CASE("optimize_transmittances matches the analytic five-site formulas") {
  for (int m = 8; m <= 22; ++m) {
    const auto r = qw::optimize_transmittances(5, m);
    const double te = std::pow(std::sin(2 * kPi / m), 2);
    const double tb = std::pow(std::sin(kPi * std::sqrt(6.0) / m), 2);
    CAPTURE(m);
    CHECK(std::abs(r.t_ends - te) <= 0.01);
    CHECK(std::abs(r.t_bulk - tb) <= 0.01);
  }
}
