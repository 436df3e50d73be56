#ifndef QW_MATRIX_HPP
#define QW_MATRIX_HPP

#include <Eigen/Dense>

#include <algorithm>
#include <complex>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace qw {

using Complex = std::complex<double>;
using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;
using RMat = Eigen::MatrixXd;
using RVec = Eigen::VectorXd;

// m00*m11 - m01*m10 for a 2x2 matrix of any scalar.
template <typename Derived>
typename Derived::Scalar determinant2(const Eigen::MatrixBase<Derived>& m) {
  if (m.rows() != 2 || m.cols() != 2)
    throw std::invalid_argument("determinant2: matrix must be 2x2");
  return m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
}

// Permanent by direct permutation sum for dim <= 4, Ryser inclusion-exclusion
// (Gray-code row sums) for 5 <= dim <= 12. Larger inputs are rejected: every
// call site in this library uses tiny matrices.
template <typename Derived>
typename Derived::Scalar permanent(const Eigen::MatrixBase<Derived>& m) {
  using Scalar = typename Derived::Scalar;
  const int n = static_cast<int>(m.rows());
  if (m.cols() != m.rows() || n == 0)
    throw std::invalid_argument("permanent: matrix must be square and nonempty");
  if (n > 12) throw std::invalid_argument("permanent: dimension capped at 12");

  if (n <= 4) {
    std::vector<int> p(n);
    std::iota(p.begin(), p.end(), 0);
    Scalar sum{0};
    do {
      Scalar term{1};
      for (int i = 0; i < n; ++i) term *= m(i, p[i]);
      sum += term;
    } while (std::next_permutation(p.begin(), p.end()));
    return sum;
  }

  // per(A) = sum_{S != empty} (-1)^(n-|S|) prod_i sum_{j in S} a_ij
  std::vector<Scalar> rowsum(n, Scalar{0});
  Scalar total{0};
  unsigned gray = 0;
  int popcount = 0;
  for (unsigned k = 1; k < (1u << n); ++k) {
    const unsigned next = k ^ (k >> 1);
    const unsigned changed = gray ^ next;
    int j = 0;
    while (!((changed >> j) & 1u)) ++j;
    if (next & changed) {
      for (int i = 0; i < n; ++i) rowsum[i] += m(i, j);
      ++popcount;
    } else {
      for (int i = 0; i < n; ++i) rowsum[i] -= m(i, j);
      --popcount;
    }
    gray = next;
    Scalar prod{1};
    for (int i = 0; i < n; ++i) prod *= rowsum[i];
    total += ((n - popcount) % 2 == 0) ? prod : -prod;
  }
  return total;
}

// Max-norm test of m'm - I.
template <typename Derived>
bool is_unitary(const Eigen::MatrixBase<Derived>& m, double tol) {
  if (tol <= 0) throw std::invalid_argument("is_unitary: tol must be positive");
  if (m.rows() != m.cols()) return false;
  const auto n = m.rows();
  using Scalar = typename Derived::Scalar;
  using Dense = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  Dense g = m.adjoint() * m;
  g -= Dense::Identity(n, n);
  return g.cwiseAbs().maxCoeff() <= tol;
}

// exp(-i t h) of a Hermitian h via spectral decomposition. Hermiticity is
// checked to 1e-12 absolute; analytic inputs everywhere else in the library
// satisfy it exactly.
template <typename Derived>
Eigen::Matrix<std::complex<typename Eigen::NumTraits<typename Derived::Scalar>::Real>,
              Eigen::Dynamic, Eigen::Dynamic>
herm_exp(const Eigen::MatrixBase<Derived>& h,
         typename Eigen::NumTraits<typename Derived::Scalar>::Real t) {
  using Real = typename Eigen::NumTraits<typename Derived::Scalar>::Real;
  using C = std::complex<Real>;
  using CMat = Eigen::Matrix<C, Eigen::Dynamic, Eigen::Dynamic>;
  if (h.rows() != h.cols())
    throw std::invalid_argument("herm_exp: matrix must be square");
  CMat hc = h.template cast<C>();
  if ((hc - hc.adjoint()).cwiseAbs().maxCoeff() > Real(1e-12))
    throw std::invalid_argument("herm_exp: matrix is not Hermitian within 1e-12");
  Eigen::SelfAdjointEigenSolver<CMat> es(hc);
  Eigen::Vector<C, Eigen::Dynamic> phases(h.rows());
  for (Eigen::Index k = 0; k < h.rows(); ++k)
    phases(k) = std::exp(C(0, -t * es.eigenvalues()(k)));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

// |Tr(u' v)| / dim: global-phase-invariant overlap of two unitaries.
template <typename DA, typename DB>
double unitary_fidelity(const Eigen::MatrixBase<DA>& u, const Eigen::MatrixBase<DB>& v) {
  if (u.rows() != v.rows() || u.cols() != v.cols() || u.rows() != u.cols())
    throw std::invalid_argument("unitary_fidelity: dimension mismatch");
  if (!is_unitary(u, 1e-8) || !is_unitary(v, 1e-8))
    throw std::invalid_argument("unitary_fidelity: inputs must be unitary within 1e-8");
  const std::complex<double> tr = (u.adjoint() * v).template cast<std::complex<double>>().trace();
  return std::abs(tr) / static_cast<double>(u.rows());
}

}  // namespace qw

#endif
