#include "qw/profile.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "qw/optim.hpp"
#include "qw/walk.hpp"

namespace qw {

namespace {

constexpr double kPi = std::numbers::pi;

// Angles may brush pi/2 exactly (T = 1); only genuine overshoot is an error.
constexpr double kAngleSlack = 1e-12;

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

CouplingProfile profile_from_couplings(int n, int m, double epsilon, const RVec& couplings) {
  if (n < 3) throw std::invalid_argument("profile: n_sites must be at least 3");
  if (m < 1) throw std::invalid_argument("profile: n_steps must be at least 1");
  if (couplings.size() != n - 1)
    throw std::invalid_argument("profile: expected n_sites-1 couplings");
  CouplingProfile p;
  p.n_sites = n;
  p.n_steps = m;
  p.epsilon = epsilon;
  p.couplings = couplings;
  p.angles = epsilon * couplings;
  for (int x = 0; x < n - 1; ++x) {
    const double th = p.angles(x);
    if (th < -kAngleSlack || th > kPi + kAngleSlack)
      throw std::domain_error("profile: angle outside [0, pi]; too few steps for these couplings");
  }
  p.transmittances = p.angles.array().sin().square();
  return p;
}

namespace {

// Engineered constructors keep every angle in the first quadrant so the
// transmittance determines the coupling uniquely.
void require_first_quadrant(const CouplingProfile& p, const char* who) {
  if (p.angles.maxCoeff() > kPi / 2 + kAngleSlack)
    throw std::domain_error(std::string(who) + ": too few steps, an angle exceeds pi/2");
}

}  // namespace

CouplingProfile pst_profile(int n, int m) {
  if (n < 3) throw std::invalid_argument("pst_profile: n must be at least 3");
  if (m < n - 1) throw std::invalid_argument("pst_profile: m must be at least n-1");
  RVec j(n - 1);
  for (int x = 1; x < n; ++x)
    j(x - 1) = kPi / (n + 1) * std::sqrt(double(x) * (n - x));
  CouplingProfile p = profile_from_couplings(n, m, double(n + 1) / m, j);
  require_first_quadrant(p, "pst_profile");
  return p;
}

double minimal_transfer_time(int n) {
  return n + 1 + 2.29 * std::cbrt(double(n));
}

CouplingProfile minimal_profile(int n, int m) {
  if (n < 5) throw std::invalid_argument("minimal_profile: n must be at least 5");
  if (m < 1) throw std::invalid_argument("minimal_profile: m must be at least 1");
  RVec j = RVec::Ones(n - 1);
  const double j_opt = 1.030 * std::pow(double(n), -1.0 / 6.0);
  j(0) = j_opt;
  j(n - 2) = j_opt;
  CouplingProfile p = profile_from_couplings(n, m, minimal_transfer_time(n) / m, j);
  require_first_quadrant(p, "minimal_profile");
  return p;
}

CouplingProfile table_profile(int n, int m, double t_bulk, double t_ends) {
  if (n < 3) throw std::invalid_argument("table_profile: n must be at least 3");
  if (m < 1) throw std::invalid_argument("table_profile: m must be at least 1");
  if (!(t_bulk > 0.0 && t_bulk <= 1.0) || !(t_ends > 0.0 && t_ends <= 1.0))
    throw std::domain_error("table_profile: transmittances must lie in (0, 1]");
  const double epsilon = double(n + 1) / m;
  RVec j(n - 1);
  for (int x = 1; x < n; ++x) {
    const double t = (x == 1 || x == n - 1) ? t_ends : t_bulk;
    j(x - 1) = std::asin(std::sqrt(t)) / epsilon;
  }
  return profile_from_couplings(n, m, epsilon, j);
}

std::string profile_to_text(const CouplingProfile& p) {
  std::ostringstream os;
  os << "n_sites = " << p.n_sites << "\n";
  os << "n_steps = " << p.n_steps << "\n";
  os << "transmittances = ";
  for (int x = 0; x < p.transmittances.size(); ++x) {
    if (x) os << ", ";
    os << format_double(p.transmittances(x));
  }
  os << "\n";
  return os.str();
}

CouplingProfile profile_from_text(const std::string& text) {
  int n = -1, m = -1;
  std::vector<double> ts;
  bool have_ts = false;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw std::invalid_argument("profile_from_text: expected key = value lines");
    auto trim = [](std::string s) {
      const auto a = s.find_first_not_of(" \t");
      const auto b = s.find_last_not_of(" \t\r");
      return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    if (key == "n_sites") {
      n = std::stoi(val);
    } else if (key == "n_steps") {
      m = std::stoi(val);
    } else if (key == "transmittances") {
      std::istringstream vs(val);
      std::string item;
      while (std::getline(vs, item, ',')) ts.push_back(std::stod(item));
      have_ts = true;
    } else {
      throw std::invalid_argument("profile_from_text: unknown key '" + key + "'");
    }
  }
  if (n < 0 || m < 0 || !have_ts)
    throw std::invalid_argument("profile_from_text: missing n_sites, n_steps or transmittances");
  if (static_cast<int>(ts.size()) != n - 1)
    throw std::invalid_argument("profile_from_text: expected n_sites-1 transmittances");
  const double epsilon = double(n + 1) / m;
  RVec j(n - 1);
  for (int x = 0; x < n - 1; ++x) {
    if (ts[x] < 0.0 || ts[x] > 1.0)
      throw std::domain_error("profile_from_text: transmittance outside [0, 1]");
    j(x) = std::asin(std::sqrt(ts[x])) / epsilon;
  }
  return profile_from_couplings(n, m, epsilon, j);
}

namespace {

RVec two_value_couplings(int n, double j_bulk, double j_ends) {
  RVec j = RVec::Constant(n - 1, j_bulk);
  j(0) = j_ends;
  j(n - 2) = j_ends;
  return j;
}

double continuum_transfer(int n, double j_bulk, double j_ends) {
  Mat h = Mat::Zero(n, n);
  const RVec j = two_value_couplings(n, j_bulk, j_ends);
  for (int x = 0; x < n - 1; ++x) {
    h(x, x + 1) = 0.5 * j(x);
    h(x + 1, x) = 0.5 * j(x);
  }
  const Mat u = herm_exp(h, double(n + 1));
  return std::norm(u(n - 1, 0));
}

}  // namespace

ContinuumCouplings optimize_continuum_couplings(int n) {
  if (n < 5)
    throw std::invalid_argument("optimize_continuum_couplings: n_sites must be at least 5");

  // Coarse pass on a 0.02 grid over (0,2]^2. Scanning j_ends ascending with
  // strict improvement resolves exact ties toward the smallest j_ends.
  double best_jb = 0.0;
  double best_je = 0.0;
  double best_f = -1.0;
  for (int ie = 1; ie <= 100; ++ie) {
    const double je = 0.02 * ie;
    for (int ib = 1; ib <= 100; ++ib) {
      const double jb = 0.02 * ib;
      const double f = continuum_transfer(n, jb, je);
      if (f > best_f) {
        best_f = f;
        best_jb = jb;
        best_je = je;
      }
    }
  }

  const auto clamped = [](double j) { return std::clamp(j, 1e-4, 2.0); };
  const auto negated = [n, &clamped](const RVec& x) {
    return -continuum_transfer(n, clamped(x(0)), clamped(x(1)));
  };
  SimplexOptions opt;
  opt.init_step = 0.01;
  opt.x_tol = 1e-8;
  RVec x0(2);
  x0 << best_jb, best_je;
  const SimplexResult res = nelder_mead(negated, x0, opt);

  ContinuumCouplings out;
  out.j_bulk = clamped(res.x(0));
  out.j_ends = clamped(res.x(1));
  out.fidelity = -res.f;
  return out;
}

TransmittanceOptimum optimize_transmittances(int n, int m) {
  if (n < 5) throw std::invalid_argument("optimize_transmittances: n_sites must be at least 5");
  // End-to-end transfer needs n-1 hops, so n-1 steps is the shortest walk
  // with any signal at the far mirror.
  if (m < n - 1)
    throw std::invalid_argument("optimize_transmittances: n_steps must be at least n_sites - 1");

  const ContinuumCouplings c = optimize_continuum_couplings(n);
  const double epsilon = double(n + 1) / m;
  const CouplingProfile p =
      profile_from_couplings(n, m, epsilon, two_value_couplings(n, c.j_bulk, c.j_ends));

  TransmittanceOptimum out;
  out.t_bulk = std::pow(std::sin(epsilon * c.j_bulk), 2);
  out.t_ends = std::pow(std::sin(epsilon * c.j_ends), 2);
  out.q = transfer_quality(p);
  return out;
}

}  // namespace qw
