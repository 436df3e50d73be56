#include "qw/optim.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

namespace qw {

SimplexResult nelder_mead(const std::function<double(const RVec&)>& f, const RVec& x0,
                          const SimplexOptions& opt) {
  const int n = static_cast<int>(x0.size());
  if (n < 1) throw std::invalid_argument("nelder_mead: empty start point");

  std::vector<RVec> x(n + 1, x0);
  for (int i = 0; i < n; ++i) x[i + 1](i) += opt.init_step;
  std::vector<double> fx(n + 1);
  for (int i = 0; i <= n; ++i) fx[i] = f(x[i]);

  auto order = [&]() {
    std::vector<int> idx(n + 1);
    std::iota(idx.begin(), idx.end(), 0);
    std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return fx[a] < fx[b]; });
    std::vector<RVec> x2(n + 1);
    std::vector<double> f2(n + 1);
    for (int k = 0; k <= n; ++k) {
      x2[k] = x[idx[k]];
      f2[k] = fx[idx[k]];
    }
    x.swap(x2);
    fx.swap(f2);
  };

  SimplexResult res;
  int iter = 0;
  for (; iter < opt.max_iters; ++iter) {
    order();
    double spread = 0.0;
    for (int k = 1; k <= n; ++k) spread = std::max(spread, (x[k] - x[0]).cwiseAbs().maxCoeff());
    if (fx[n] - fx[0] <= opt.f_tol && spread <= opt.x_tol) {
      res.converged = true;
      break;
    }

    RVec centroid = RVec::Zero(n);
    for (int k = 0; k < n; ++k) centroid += x[k];
    centroid /= n;

    RVec xr = centroid + (centroid - x[n]);
    const double fr = f(xr);
    if (fr < fx[0]) {
      RVec xe = centroid + 2.0 * (xr - centroid);
      const double fe = f(xe);
      if (fe < fr) {
        x[n] = xe;
        fx[n] = fe;
      } else {
        x[n] = xr;
        fx[n] = fr;
      }
    } else if (fr < fx[n - 1]) {
      x[n] = xr;
      fx[n] = fr;
    } else {
      const bool outside = fr < fx[n];
      RVec xc = outside ? RVec(centroid + 0.5 * (xr - centroid))
                        : RVec(centroid + 0.5 * (x[n] - centroid));
      const double fc = f(xc);
      if (fc < (outside ? fr : fx[n])) {
        x[n] = xc;
        fx[n] = fc;
      } else {
        for (int k = 1; k <= n; ++k) {
          x[k] = x[0] + 0.5 * (x[k] - x[0]);
          fx[k] = f(x[k]);
        }
      }
    }
  }
  order();
  res.x = x[0];
  res.f = fx[0];
  res.iters = iter;
  return res;
}

LeastSquaresResult levenberg_marquardt(const std::function<RVec(const RVec&)>& residuals,
                                       const RVec& x0, const LeastSquaresOptions& opt) {
  const int n = static_cast<int>(x0.size());
  if (n < 1) throw std::invalid_argument("levenberg_marquardt: empty start point");
  if (opt.max_nfev < 1) throw std::invalid_argument("levenberg_marquardt: max_nfev must be positive");

  LeastSquaresResult res;
  RVec x = x0;
  RVec r = residuals(x);
  res.nfev = 1;
  const int m = static_cast<int>(r.size());
  if (m < 1) throw std::invalid_argument("levenberg_marquardt: empty residual vector");
  double cost = r.squaredNorm();

  double lambda = 1e-3;
  while (res.nfev + n < opt.max_nfev) {
    RMat jac(m, n);
    for (int k = 0; k < n; ++k) {
      const double h = 1e-7 * std::max(1.0, std::abs(x(k)));
      RVec xk = x;
      xk(k) += h;
      jac.col(k) = (residuals(xk) - r) / h;
    }
    res.nfev += n;

    const RVec g = jac.transpose() * r;
    if (g.cwiseAbs().maxCoeff() <= opt.g_tol * (1.0 + cost)) {
      res.converged = true;
      break;
    }
    const RMat gram = jac.transpose() * jac;
    const RVec scale = gram.diagonal().cwiseMax(1e-12);

    bool stepped = false;
    for (int trial = 0; trial < 24 && res.nfev < opt.max_nfev; ++trial) {
      RMat damped = gram;
      damped.diagonal() += lambda * scale;
      const RVec step = damped.ldlt().solve(-g);
      const RVec xt = x + step;
      const RVec rt = residuals(xt);
      ++res.nfev;
      const double ct = rt.squaredNorm();
      if (ct < cost) {
        const double drop = cost - ct;
        const double move = step.cwiseAbs().maxCoeff();
        x = xt;
        r = rt;
        cost = ct;
        lambda = std::max(lambda / 3.0, 1e-9);
        stepped = true;
        if (drop <= opt.f_tol * (1.0 + cost) || move <= opt.x_tol * (1.0 + x.cwiseAbs().maxCoeff()))
          res.converged = true;
        break;
      }
      lambda *= 4.0;
    }
    // Every trial step failed with budget left: stationary point.
    if (!stepped && res.nfev < opt.max_nfev) res.converged = true;
    if (!stepped || res.converged) break;
  }
  res.x = x;
  res.cost = cost;
  return res;
}

}  // namespace qw
