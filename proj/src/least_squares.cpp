#include "plasmofiber/least_squares.hpp"

#include "plasmofiber/errors.hpp"

#include <algorithm>
#include <cmath>

namespace plasmofiber {

namespace {

Eigen::VectorXd clamp_to(const Eigen::VectorXd &x, const Eigen::VectorXd &lo, const Eigen::VectorXd &hi) {
  return x.cwiseMax(lo).cwiseMin(hi);
}

Eigen::MatrixXd jacobian(const ResidualFn &f, const Eigen::VectorXd &x, const Eigen::VectorXd &lo,
                         const Eigen::VectorXd &hi, const Eigen::VectorXd &r0) {
  Eigen::MatrixXd j(r0.size(), x.size());
  for (Eigen::Index p = 0; p < x.size(); ++p) {
    const double h = 1e-6 * std::max(1.0, std::abs(x[p]));
    Eigen::VectorXd up = x, down = x;
    up[p] = std::min(x[p] + h, hi[p]);
    down[p] = std::max(x[p] - h, lo[p]);
    const double span = up[p] - down[p];
    if (span <= 0.0) {
      j.col(p).setZero();
      continue;
    }
    // One-sided at an active bound, central otherwise.
    const Eigen::VectorXd ru = up[p] == x[p] ? r0 : f(up);
    const Eigen::VectorXd rd = down[p] == x[p] ? r0 : f(down);
    j.col(p) = (ru - rd) / span;
  }
  return j;
}

} // namespace

LmResult levenberg_marquardt(const ResidualFn &f, Eigen::VectorXd x, const Eigen::VectorXd &lo,
                             const Eigen::VectorXd &hi, const LmOptions &opt) {
  if (lo.size() != x.size() || hi.size() != x.size())
    throw Error(ErrorKind::InvalidArgument, "bounds do not match the parameter count");
  x = clamp_to(x, lo, hi);
  Eigen::VectorXd r = f(x);
  if (!r.allFinite()) throw Error(ErrorKind::NonFinite, "residuals are not finite at the start point");
  double cost = r.squaredNorm();
  double lambda = opt.initial_lambda;

  LmResult out;
  for (int it = 0; it < opt.max_iterations; ++it) {
    out.iterations = it + 1;
    const Eigen::MatrixXd j = jacobian(f, x, lo, hi, r);
    const Eigen::MatrixXd jtj = j.transpose() * j;
    const Eigen::VectorXd g = j.transpose() * r;
    bool accepted = false;
    double rel_step = 0.0;
    for (int tries = 0; tries < 60 && !accepted; ++tries) {
      Eigen::MatrixXd a = jtj;
      for (Eigen::Index p = 0; p < x.size(); ++p) a(p, p) += lambda * std::max(jtj(p, p), 1e-12);
      Eigen::VectorXd step = a.ldlt().solve(-g);
      // Parameters pinned at a bound and pushed outward are held fixed.
      Eigen::VectorXd rhs = -g;
      bool pinned = false;
      for (Eigen::Index p = 0; p < x.size(); ++p) {
        if ((x[p] <= lo[p] && step[p] < 0.0) || (x[p] >= hi[p] && step[p] > 0.0)) {
          a.row(p).setZero();
          a.col(p).setZero();
          a(p, p) = 1.0;
          rhs[p] = 0.0;
          pinned = true;
        }
      }
      if (pinned) step = a.ldlt().solve(rhs);
      const Eigen::VectorXd trial = clamp_to(x + step, lo, hi);
      const Eigen::VectorXd rt = f(trial);
      const double ct = rt.allFinite() ? rt.squaredNorm() : std::numeric_limits<double>::infinity();
      if (ct <= cost) {
        rel_step = (trial - x).norm() / (x.norm() + opt.step_tolerance);
        x = trial;
        r = rt;
        cost = ct;
        lambda = std::max(lambda / 10.0, 1e-15);
        accepted = true;
      } else {
        lambda *= 10.0;
      }
    }
    if (!accepted || rel_step < opt.step_tolerance) {
      out.converged = true;
      break;
    }
  }
  out.params = x;
  out.cost = cost;
  const Eigen::MatrixXd j = jacobian(f, x, lo, hi, r);
  out.covariance = (j.transpose() * j).completeOrthogonalDecomposition().pseudoInverse();
  return out;
}

LinearFit weighted_linear_fit(const Eigen::MatrixXd &a, const Eigen::VectorXd &b, const Eigen::VectorXd &w) {
  if (a.rows() != b.size() || w.size() != b.size())
    throw Error(ErrorKind::InvalidArgument, "design, target and weights disagree in size");
  if (a.rows() < a.cols()) throw Error(ErrorKind::InvalidArgument, "fewer observations than parameters");
  const Eigen::VectorXd sw = w.cwiseSqrt();
  const Eigen::MatrixXd aw = sw.asDiagonal() * a;
  const Eigen::VectorXd bw = sw.cwiseProduct(b);
  const Eigen::MatrixXd normal = aw.transpose() * aw;
  Eigen::FullPivLU<Eigen::MatrixXd> lu(normal);
  if (!lu.isInvertible()) throw Error(ErrorKind::ZeroDenominator, "design matrix is rank deficient");
  LinearFit out;
  out.params = lu.solve(aw.transpose() * bw);
  out.covariance = lu.inverse();
  out.chi2 = (aw * out.params - bw).squaredNorm();
  return out;
}

} // namespace plasmofiber
