#ifndef QW_OPTIM_HPP
#define QW_OPTIM_HPP

#include <functional>
#include <stdexcept>
#include <string>

#include "qw/matrix.hpp"

namespace qw {

// Raised when an iterative fit exhausts its start budget; carries the best
// point seen so far.
class convergence_error : public std::runtime_error {
 public:
  convergence_error(const std::string& what, RVec best, double value)
      : std::runtime_error(what), best_params(std::move(best)), best_value(value) {}
  RVec best_params;
  double best_value = 0.0;
};

struct SimplexOptions {
  int max_iters = 4000;
  double f_tol = 1e-12;   // spread of simplex values
  double x_tol = 1e-9;    // max vertex distance from best
  double init_step = 0.1; // per-coordinate displacement of the start simplex
};

struct SimplexResult {
  RVec x;
  double f = 0.0;
  int iters = 0;
  bool converged = false;
};

// Downhill simplex (reflect 1, expand 2, contract 0.5, shrink 0.5),
// deterministic for a given start point.
SimplexResult nelder_mead(const std::function<double(const RVec&)>& f, const RVec& x0,
                          const SimplexOptions& opt = {});

struct LeastSquaresOptions {
  int max_nfev = 6000;   // residual evaluations, Jacobian columns included
  double g_tol = 1e-10;  // max |J'r| relative to 1 + cost
  double f_tol = 1e-12;  // relative cost decrease per accepted step
  double x_tol = 1e-12;  // relative step size per accepted step
};

struct LeastSquaresResult {
  RVec x;
  double cost = 0.0;  // sum of squared residuals
  int nfev = 0;
  bool converged = false;
};

// Levenberg-Marquardt on a residual vector with a forward-difference
// Jacobian. Damping scales the diagonal of J'J, dropping after accepted
// steps and rising after rejected ones; a point no trial step can improve
// counts as converged. Deterministic for a given start point.
LeastSquaresResult levenberg_marquardt(const std::function<RVec(const RVec&)>& residuals,
                                       const RVec& x0, const LeastSquaresOptions& opt = {});

}  // namespace qw

#endif
