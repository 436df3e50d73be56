#include "qw/twophoton.hpp"

#include <cmath>
#include <complex>
#include <numbers>
#include <stdexcept>

namespace qw {

namespace {

void check_indices(int n, int i, int j, const char* who) {
  if (i < 1 || i > n || j < 1 || j > n)
    throw std::invalid_argument(std::string(who) + ": mode index outside 1..n");
}

int input_dim(const TwoPhotonInput& input, const char* who) {
  const int n = static_cast<int>(input.u_h.rows());
  if (input.u_h.cols() != n || input.u_v.rows() != n || input.u_v.cols() != n)
    throw std::invalid_argument(std::string(who) + ": transfer matrices must be square and equal-sized");
  check_indices(n, input.mode_i, input.mode_j, who);
  if (input.mode_i == input.mode_j)
    throw std::invalid_argument(std::string(who) + ": injection modes must differ");
  return n;
}

void require_unitary(const TwoPhotonInput& input, const char* who) {
  if (!is_unitary(input.u_h, 1e-8) || !is_unitary(input.u_v, 1e-8))
    throw std::invalid_argument(std::string(who) + ": transfer matrices must be unitary within 1e-8");
}

}  // namespace

Mat submatrix(const Mat& u_h, const Mat& u_v, int i, int j, int r, int s) {
  const int n = static_cast<int>(u_h.rows());
  if (u_h.cols() != n || u_v.rows() != n || u_v.cols() != n)
    throw std::invalid_argument("submatrix: transfer matrices must be square and equal-sized");
  check_indices(n, i, j, "submatrix");
  check_indices(n, r, s, "submatrix");
  Mat m(2, 2);
  m << u_h(r - 1, i - 1), u_h(r - 1, j - 1), u_v(s - 1, i - 1), u_v(s - 1, j - 1);
  return m;
}

Complex two_photon_amplitude(const TwoPhotonInput& input, int r, int s) {
  const int n = input_dim(input, "two_photon_amplitude");
  check_indices(n, r, s, "two_photon_amplitude");
  const int i = input.mode_i - 1;
  const int j = input.mode_j - 1;
  // polar(1, chi) at the representable pi misses the real axis by ~1e-16,
  // which would leak into the exact determinant identity; chi = +-pi can
  // only mean the antisymmetric combination, so snap it.
  const Complex cross = std::abs(input.chi) == std::numbers::pi
                            ? Complex(-1.0, 0.0)
                            : std::polar(1.0, input.chi);
  return (input.u_h(r - 1, i) * input.u_v(s - 1, j) +
          cross * input.u_h(r - 1, j) * input.u_v(s - 1, i)) /
         std::sqrt(2.0);
}

double output_probability(const TwoPhotonInput& input, int r, int s) {
  require_unitary(input, "output_probability");
  if (r == s) return std::norm(two_photon_amplitude(input, r, r));
  return std::norm(two_photon_amplitude(input, r, s)) +
         std::norm(two_photon_amplitude(input, s, r));
}

RMat correlation_matrix(const TwoPhotonInput& input) {
  const int n = input_dim(input, "correlation_matrix");
  require_unitary(input, "correlation_matrix");
  RMat gamma(n, n);
  for (int r = 1; r <= n; ++r) {
    gamma(r - 1, r - 1) = output_probability(input, r, r);
    for (int s = r + 1; s <= n; ++s) {
      const double half = 0.5 * output_probability(input, r, s);
      gamma(r - 1, s - 1) = half;
      gamma(s - 1, r - 1) = half;
    }
  }
  return gamma;
}

double hom_visibility(const Mat& u, int i, int j, int r, int s) {
  const int n = static_cast<int>(u.rows());
  if (u.cols() != n) throw std::invalid_argument("hom_visibility: matrix must be square");
  check_indices(n, i, j, "hom_visibility");
  check_indices(n, r, s, "hom_visibility");
  if (i == j) throw std::invalid_argument("hom_visibility: input modes must differ");
  const Complex a = u(r - 1, i - 1) * u(s - 1, j - 1);
  const Complex b = u(r - 1, j - 1) * u(s - 1, i - 1);
  // One classical path when the outputs coincide, two otherwise; the
  // quantum rate divides the permanent by the bunched-state normalization.
  const double p_cl = (r == s) ? std::norm(a) : std::norm(a) + std::norm(b);
  const double p_q = std::norm(a + b) / (r == s ? 2.0 : 1.0);
  if (p_cl < 1e-30)
    throw std::domain_error("hom_visibility: classical coincidence rate vanishes");
  return (p_cl - p_q) / p_cl;
}

double similarity(const RMat& a, const RMat& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols())
    throw std::invalid_argument("similarity: shape mismatch");
  if (a.minCoeff() < 0.0 || b.minCoeff() < 0.0)
    throw std::invalid_argument("similarity: entries must be nonnegative");
  const double sa = a.sum();
  const double sb = b.sum();
  if (sa <= 0.0 || sb <= 0.0)
    throw std::domain_error("similarity: all-zero distribution");
  const double overlap = a.cwiseProduct(b).cwiseSqrt().sum();
  return overlap * overlap / (sa * sb);
}

RMat fock_oracle(const TwoPhotonInput& input, const Mat& post) {
  const int n = input_dim(input, "fock_oracle");
  if (n > 8) throw std::invalid_argument("fock_oracle: capped at 8 modes");
  if (post.rows() != n || post.cols() != n)
    throw std::invalid_argument("fock_oracle: post stage must match the mode count");

  // Channels: 0..n-1 horizontal, n..2n-1 vertical. The pair state is the
  // symmetric coefficient matrix S with |c1 c2> = sum S(c1,c2) a+_c1 a+_c2;
  // a mode map T sends S to T S T^t.
  const int nc = 2 * n;
  Mat t = Mat::Zero(nc, nc);
  t.topLeftCorner(n, n) = post * input.u_h;
  t.bottomRightCorner(n, n) = post * input.u_v;

  Mat s = Mat::Zero(nc, nc);
  const int hi = input.mode_i - 1;
  const int vj = n + input.mode_j - 1;
  const int vi = n + input.mode_i - 1;
  const int hj = input.mode_j - 1;
  const Complex w = 1.0 / (2.0 * std::sqrt(2.0));
  const Complex cross = std::polar(1.0, input.chi) * w;
  s(hi, vj) += w;
  s(vj, hi) += w;
  s(vi, hj) += cross;
  s(hj, vi) += cross;
  const Mat out = t * s * t.transpose();

  RMat p = RMat::Zero(n, n);
  for (int c1 = 0; c1 < nc; ++c1) {
    const int r = c1 % n;
    p(r, r) += std::norm(std::sqrt(2.0) * out(c1, c1));
    for (int c2 = c1 + 1; c2 < nc; ++c2) {
      const int q = c2 % n;
      const double prob = std::norm(2.0 * out(c1, c2));
      if (r == q) {
        p(r, r) += prob;
      } else {
        p(r, q) += prob;
        p(q, r) += prob;
      }
    }
  }
  return p;
}

RMat fock_oracle(const TwoPhotonInput& input) {
  const int n = input_dim(input, "fock_oracle");
  return fock_oracle(input, Mat::Identity(n, n));
}

}  // namespace qw
