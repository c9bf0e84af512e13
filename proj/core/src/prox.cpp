#include "ppapep/prox.hpp"

#include <Eigen/Cholesky>
#include <Eigen/LU>
#include <cmath>
#include <limits>
#include <sstream>

#include "ppapep/qp.hpp"

namespace ppapep {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

void require_square_invertible(const Matrix& m, const char* what) {
  if (m.rows() != m.cols() || m.rows() == 0) {
    throw std::invalid_argument(std::string(what) + ": linear map must be square");
  }
  Eigen::FullPivLU<Matrix> lu(m);
  if (!lu.isInvertible())
    throw std::invalid_argument(std::string(what) + ": linear map is singular");
}

Matrix metric_inverse_times(const Metric& metric, const Matrix& m) {
  Matrix out(m.rows(), m.cols());
  for (Eigen::Index j = 0; j < m.cols(); ++j) out.col(j) = metric.solve(m.col(j));
  return out;
}

Vector soft_threshold(const Vector& x, double threshold) {
  Vector y(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double mag = std::abs(x[i]) - threshold;
    y[i] = (mag > 0.0) ? std::copysign(mag, x[i]) : 0.0;
  }
  return y;
}

Vector prox_l1(const ScaledL1& f, double alpha, const Vector& x, const Metric& metric) {
  if (!f.map && metric.is_diagonal()) {
    return soft_threshold(x, alpha * f.weight / metric.scalar_value());
  }
  // Dual: min_u 0.5 u^T L B^{-1} L^T u - u^T L x  s.t. |u_i| <= alpha w,
  // then y = x - B^{-1} L^T u.
  const Eigen::Index n = x.size();
  const Matrix l = f.map ? *f.map : Matrix::Identity(n, n);
  const Matrix binv_lt = metric_inverse_times(metric, l.transpose());
  const Matrix h = symmetrized(l * binv_lt);
  const Vector bound = Vector::Constant(l.rows(), alpha * f.weight);
  const Vector u = solve_box_qp(h, -(l * x), -bound, bound);
  return x - binv_lt * u;
}

Vector prox_quadratic(const Quadratic& f, double alpha, const Vector& x, const Metric& metric) {
  const Eigen::Index n = x.size();
  const Matrix lhs = symmetrized(alpha * f.q + metric.matrix(n));
  const Vector rhs = metric.apply(x) - alpha * f.b;
  Eigen::LLT<Matrix> llt(lhs);
  if (llt.info() != Eigen::Success) {
    throw ProxError("quadratic prox: alpha Q + B is not positive definite", kInf);
  }
  Vector y = llt.solve(rhs);
  // One step of iterative refinement keeps the stationarity residual at
  // roundoff level even for badly scaled Q.
  y += llt.solve(rhs - lhs * y);
  return y;
}

Vector prox_box(const BoxIndicator& f, const Vector& x, const Metric& metric) {
  if (!f.map && metric.is_diagonal()) {
    return x.cwiseMax(f.lower).cwiseMin(f.upper);
  }
  // Substitute w = L y: min 0.5 (L^{-1} w - x)^T B (L^{-1} w - x) over the box.
  const Eigen::Index n = x.size();
  const Matrix l = f.map ? *f.map : Matrix::Identity(n, n);
  const Matrix linv = l.fullPivLu().inverse();
  const Matrix b = metric.matrix(n);
  const Matrix h = symmetrized(linv.transpose() * b * linv);
  const Vector lin = -(linv.transpose() * (b * x));
  const Vector w = solve_box_qp(h, lin, f.lower, f.upper);
  return linv * w;
}

Vector prox_max_affine(const MaxAffine& f, double alpha, const Vector& x, const Metric& metric) {
  // Epigraph form over z = (y, t):
  //   min alpha t + 0.5 (y - x)^T B (y - x)  s.t.  a_k^T y - t <= -c_k.
  const Eigen::Index n = x.size();
  const Eigen::Index k = f.slopes.rows();
  InequalityQp qp;
  qp.hessian = Matrix::Zero(n + 1, n + 1);
  qp.hessian.topLeftCorner(n, n) = metric.matrix(n);
  qp.linear = Vector::Zero(n + 1);
  qp.linear.head(n) = -metric.apply(x);
  qp.linear[n] = alpha;
  qp.ineq.resize(k, n + 1);
  qp.ineq.leftCols(n) = f.slopes;
  qp.ineq.col(n).setConstant(-1.0);
  qp.ineq_rhs = -f.offsets;
  return solve_inequality_qp(qp).z.head(n);
}

}  // namespace

ProxFunction ProxFunction::scaled_l1(double weight, Eigen::Index dim) {
  if (!(weight >= 0.0) || !std::isfinite(weight))
    throw std::invalid_argument("l1 weight must be >= 0");
  if (dim < 1) throw std::invalid_argument("l1 dimension must be >= 1");
  ProxFunction f(ScaledL1{weight, std::nullopt});
  f.minimizer_ = Vector::Zero(dim);
  return f;
}

ProxFunction ProxFunction::scaled_l1(double weight, Matrix map) {
  if (!(weight >= 0.0) || !std::isfinite(weight))
    throw std::invalid_argument("l1 weight must be >= 0");
  require_square_invertible(map, "scaled_l1");
  const Eigen::Index dim = map.cols();
  ProxFunction f(ScaledL1{weight, std::move(map)});
  f.minimizer_ = Vector::Zero(dim);
  return f;
}

ProxFunction ProxFunction::quadratic(Matrix q, Vector b) {
  if (q.rows() != q.cols() || q.rows() != b.size()) {
    throw std::invalid_argument("quadratic: Q must be square and match b");
  }
  const double scale = 1.0 + q.cwiseAbs().maxCoeff();
  if ((q - q.transpose()).cwiseAbs().maxCoeff() > 1e-12 * scale) {
    throw std::invalid_argument("quadratic: Q must be symmetric");
  }
  q = symmetrized(q);
  const SymmetricEigen eig = symmetric_eigen(q);
  if (eig.values[0] < -1e-12 * scale) throw std::invalid_argument("quadratic: Q must be PSD");

  // x* = -Q^+ b, accepted when it actually zeroes the gradient.
  const double cutoff = 1e-12 * scale;
  Vector coeff = eig.vectors.transpose() * b;
  for (Eigen::Index i = 0; i < coeff.size(); ++i) {
    coeff[i] = (eig.values[i] > cutoff) ? -coeff[i] / eig.values[i] : 0.0;
  }
  Vector x_star = eig.vectors * coeff;
  const double grad = (q * x_star + b).cwiseAbs().maxCoeff();
  const double grad_tol = 1e-10 * (scale + b.cwiseAbs().maxCoeff());

  ProxFunction f(Quadratic{std::move(q), std::move(b)});
  if (grad <= grad_tol) f.minimizer_ = std::move(x_star);
  return f;
}

ProxFunction ProxFunction::box_indicator(Vector lower, Vector upper) {
  if (lower.size() != upper.size() || lower.size() == 0) {
    throw std::invalid_argument("box: bounds must be non-empty and of equal length");
  }
  if ((lower.array() > upper.array()).any()) throw std::invalid_argument("box: lower > upper");
  return ProxFunction(BoxIndicator{std::move(lower), std::move(upper), std::nullopt});
}

ProxFunction ProxFunction::box_indicator(Vector lower, Vector upper, Matrix map) {
  require_square_invertible(map, "box_indicator");
  if (map.rows() != lower.size()) throw std::invalid_argument("box: map rows must match bounds");
  ProxFunction f = box_indicator(std::move(lower), std::move(upper));
  std::get<BoxIndicator>(f.impl_).map = std::move(map);
  return f;
}

ProxFunction ProxFunction::max_affine(Matrix slopes, Vector offsets,
                                      std::optional<Vector> minimizer) {
  if (slopes.rows() != offsets.size() || slopes.rows() == 0) {
    throw std::invalid_argument("max_affine: need one offset per affine piece");
  }
  ProxFunction f(MaxAffine{std::move(slopes), std::move(offsets)});
  f.minimizer_ = std::move(minimizer);
  return f;
}

std::string_view ProxFunction::family_name() const noexcept {
  return std::visit(Overloaded{[](const ScaledL1&) { return std::string_view("l1"); },
                               [](const Quadratic&) { return std::string_view("quad"); },
                               [](const BoxIndicator&) { return std::string_view("box"); },
                               [](const MaxAffine&) { return std::string_view("maxaffine"); }},
                    impl_);
}

double ProxFunction::value(const Vector& x) const {
  return std::visit(
      Overloaded{[&](const ScaledL1& f) {
                   return f.weight * (f.map ? (*f.map * x).lpNorm<1>() : x.lpNorm<1>());
                 },
                 [&](const Quadratic& f) { return 0.5 * x.dot(f.q * x) + f.b.dot(x); },
                 [&](const BoxIndicator& f) {
                   const Vector lx = f.map ? Vector(*f.map * x) : x;
                   for (Eigen::Index i = 0; i < lx.size(); ++i) {
                     const double slack =
                         1e-9 * (1.0 + std::abs(f.lower[i]) + std::abs(f.upper[i]));
                     if (lx[i] < f.lower[i] - slack || lx[i] > f.upper[i] + slack) return kInf;
                   }
                   return 0.0;
                 },
                 [&](const MaxAffine& f) { return (f.slopes * x + f.offsets).maxCoeff(); }},
      impl_);
}

Vector ProxFunction::prox(double alpha, const Vector& x, const Metric& metric) const {
  if (!(alpha > 0.0) || !std::isfinite(alpha)) {
    std::ostringstream os;
    os << "prox step length must be positive (got " << alpha << ")";
    throw std::invalid_argument(os.str());
  }
  try {
    return std::visit(
        Overloaded{[&](const ScaledL1& f) { return prox_l1(f, alpha, x, metric); },
                   [&](const Quadratic& f) { return prox_quadratic(f, alpha, x, metric); },
                   [&](const BoxIndicator& f) { return prox_box(f, x, metric); },
                   [&](const MaxAffine& f) { return prox_max_affine(f, alpha, x, metric); }},
        impl_);
  } catch (const QpError& e) {
    std::ostringstream os;
    os << family_name() << " prox subproblem failed: " << e.what() << " (KKT residual "
       << e.residual() << ")";
    throw ProxError(os.str(), e.residual());
  }
}

ProxFunction ProxFunction::with_minimizer(Vector x_star) const {
  ProxFunction f = *this;
  f.minimizer_ = std::move(x_star);
  return f;
}

ProxFunction ProxFunction::composed_with(const Matrix& m) const {
  require_square_invertible(m, "composed_with");
  ProxFunction out = std::visit(
      Overloaded{
          [&](const ScaledL1& f) {
            return ProxFunction(ScaledL1{f.weight, Matrix(f.map ? Matrix(*f.map * m) : m)});
          },
          [&](const Quadratic& f) {
            return ProxFunction(
                Quadratic{symmetrized(m.transpose() * f.q * m), m.transpose() * f.b});
          },
          [&](const BoxIndicator& f) {
            return ProxFunction(
                BoxIndicator{f.lower, f.upper, Matrix(f.map ? Matrix(*f.map * m) : m)});
          },
          [&](const MaxAffine& f) { return ProxFunction(MaxAffine{f.slopes * m, f.offsets}); }},
      impl_);
  if (minimizer_) out.minimizer_ = m.fullPivLu().solve(*minimizer_);
  return out;
}

Vector prox_step(const ProxFunction& f, double alpha, const Vector& x, const Metric& metric) {
  return f.prox(alpha, x, metric);
}

}  // namespace ppapep
