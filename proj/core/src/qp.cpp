#include "ppapep/qp.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

namespace ppapep {

Vector solve_box_qp(const Matrix& hessian, const Vector& linear, const Vector& lower,
                    const Vector& upper, double tol) {
  const Eigen::Index n = linear.size();
  if (n > 12) throw std::invalid_argument("solve_box_qp: dimension too large for enumeration");
  for (Eigen::Index i = 0; i < n; ++i) {
    if (lower[i] > upper[i]) throw std::invalid_argument("solve_box_qp: empty box");
  }
  const double scale = 1.0 + hessian.cwiseAbs().maxCoeff() + linear.cwiseAbs().maxCoeff();
  std::vector<int> state(static_cast<std::size_t>(n), 0);  // 0 free, 1 lower, 2 upper
  double best_violation = std::numeric_limits<double>::infinity();
  Vector z(n);
  for (;;) {
    std::vector<Eigen::Index> free_idx;
    for (Eigen::Index i = 0; i < n; ++i) {
      const int st = state[static_cast<std::size_t>(i)];
      if (st == 0) {
        free_idx.push_back(i);
      } else {
        z[i] = (st == 1) ? lower[i] : upper[i];
      }
    }
    {
      const auto nf = static_cast<Eigen::Index>(free_idx.size());
      if (nf > 0) {
        Matrix hff(nf, nf);
        Vector rhs(nf);
        for (Eigen::Index a = 0; a < nf; ++a) {
          rhs[a] = -linear[free_idx[a]];
          for (Eigen::Index i = 0; i < n; ++i) {
            if (state[static_cast<std::size_t>(i)] != 0) rhs[a] -= hessian(free_idx[a], i) * z[i];
          }
          for (Eigen::Index b = 0; b < nf; ++b) hff(a, b) = hessian(free_idx[a], free_idx[b]);
        }
        const Vector zf = hff.llt().solve(rhs);
        for (Eigen::Index a = 0; a < nf; ++a) z[free_idx[a]] = zf[a];
      }
      const Vector grad = hessian * z + linear;
      double violation = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        const double bound_tol = tol * (1.0 + std::abs(lower[i]) + std::abs(upper[i]));
        switch (state[static_cast<std::size_t>(i)]) {
          case 0:
            violation =
                std::max({violation, (lower[i] - z[i]) - bound_tol, (z[i] - upper[i]) - bound_tol});
            break;
          case 1:
            violation = std::max(violation, -grad[i] - tol * scale);
            break;
          default:
            violation = std::max(violation, grad[i] - tol * scale);
            break;
        }
      }
      if (violation <= 0.0) return z;
      best_violation = std::min(best_violation, violation);
    }
    Eigen::Index k = 0;
    while (k < n && state[static_cast<std::size_t>(k)] == 2) {
      state[static_cast<std::size_t>(k)] = 0;
      ++k;
    }
    if (k == n) break;
    ++state[static_cast<std::size_t>(k)];
  }
  throw QpError("box QP: no bound pattern satisfies the KKT conditions", best_violation);
}

QpSolution solve_inequality_qp(const InequalityQp& qp, double tol) {
  const Eigen::Index n = qp.linear.size();
  const Eigen::Index m = qp.ineq.rows();
  if (m > 24)
    throw std::invalid_argument("solve_inequality_qp: too many constraints for enumeration");
  const double scale = 1.0 + qp.hessian.cwiseAbs().maxCoeff() + qp.linear.cwiseAbs().maxCoeff() +
                       (m > 0 ? qp.ineq.cwiseAbs().maxCoeff() : 0.0);
  double best_violation = std::numeric_limits<double>::infinity();

  const std::uint32_t total = (m == 0) ? 1u : (1u << m);
  std::vector<std::uint32_t> masks;
  masks.reserve(total);
  for (std::uint32_t mask = 0; mask < total; ++mask) {
    if (std::popcount(mask) <= n) masks.push_back(mask);
  }
  std::stable_sort(masks.begin(), masks.end(), [](std::uint32_t a, std::uint32_t b) {
    return std::popcount(a) < std::popcount(b);
  });

  for (const std::uint32_t mask : masks) {
    std::vector<Eigen::Index> active;
    for (Eigen::Index k = 0; k < m; ++k) {
      if (mask & (1u << k)) active.push_back(k);
    }
    const auto na = static_cast<Eigen::Index>(active.size());
    Matrix kkt = Matrix::Zero(n + na, n + na);
    Vector rhs(n + na);
    kkt.topLeftCorner(n, n) = qp.hessian;
    rhs.head(n) = -qp.linear;
    for (Eigen::Index a = 0; a < na; ++a) {
      kkt.block(n + a, 0, 1, n) = qp.ineq.row(active[a]);
      kkt.block(0, n + a, n, 1) = qp.ineq.row(active[a]).transpose();
      rhs[n + a] = qp.ineq_rhs[active[a]];
    }
    Eigen::FullPivLU<Matrix> lu(kkt);
    lu.setThreshold(1e-12);
    if (!lu.isInvertible()) continue;
    const Vector sol = lu.solve(rhs);
    const Vector z = sol.head(n);

    double violation = 0.0;
    Vector multipliers = Vector::Zero(m);
    for (Eigen::Index a = 0; a < na; ++a) {
      multipliers[active[a]] = sol[n + a];
      violation = std::max(violation, -sol[n + a] - tol * scale);
    }
    if (m > 0) {
      const Vector slack = qp.ineq * z - qp.ineq_rhs;
      for (Eigen::Index k = 0; k < m; ++k) {
        const double ctol =
            tol * (1.0 + std::abs(qp.ineq_rhs[k]) +
                   qp.ineq.row(k).cwiseAbs().sum() * (1.0 + z.cwiseAbs().maxCoeff()));
        violation = std::max(violation, slack[k] - ctol);
      }
    }
    if (violation <= 0.0) return QpSolution{z, multipliers};
    best_violation = std::min(best_violation, violation);
  }
  throw QpError("inequality QP: no working set satisfies the KKT conditions", best_violation);
}

}  // namespace ppapep
