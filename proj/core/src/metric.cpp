#include "ppapep/metric.hpp"

#include <cmath>
#include <sstream>

namespace ppapep {

Metric Metric::scalar(double b) {
  if (!std::isfinite(b) || !(b > 0.0)) {
    std::ostringstream os;
    os << "scalar metric must be positive (got " << b << ")";
    throw std::invalid_argument(os.str());
  }
  Metric m;
  m.kind_ = (b == 1.0) ? Kind::Identity : Kind::Scalar;
  m.scalar_ = b;
  return m;
}

Metric Metric::dense(const Matrix& b) {
  if (b.rows() != b.cols() || b.rows() == 0) {
    throw std::invalid_argument("metric matrix must be square and non-empty");
  }
  if (!b.allFinite()) throw std::invalid_argument("metric matrix has non-finite entries");
  const double scale = b.cwiseAbs().maxCoeff();
  const double asym = (b - b.transpose()).cwiseAbs().maxCoeff();
  if (asym > 1e-12 * scale) {
    std::ostringstream os;
    os << "metric matrix is not symmetric (max |B - B^T| = " << asym << ")";
    throw std::invalid_argument(os.str());
  }
  Metric m;
  m.kind_ = Kind::Dense;
  m.b_ = symmetrized(b);
  const SymmetricEigen eig = symmetric_eigen(m.b_);
  if (!(eig.values[0] > 0.0)) {
    std::ostringstream os;
    os << "metric matrix is not positive definite (min eigenvalue " << eig.values[0] << ")";
    throw std::invalid_argument(os.str());
  }
  const Vector root = eig.values.cwiseSqrt();
  m.sqrt_ = symmetrized(eig.vectors * root.asDiagonal() * eig.vectors.transpose());
  m.inv_sqrt_ =
      symmetrized(eig.vectors * root.cwiseInverse().asDiagonal() * eig.vectors.transpose());
  m.llt_.compute(m.b_);
  return m;
}

std::optional<Eigen::Index> Metric::dim() const {
  if (kind_ == Kind::Dense) return b_.rows();
  return std::nullopt;
}

void Metric::check_dim(Eigen::Index n) const {
  if (kind_ == Kind::Dense && n != b_.rows()) {
    std::ostringstream os;
    os << "vector dimension " << n << " does not match metric dimension " << b_.rows();
    throw std::invalid_argument(os.str());
  }
}

Vector Metric::apply(const Vector& x) const {
  check_dim(x.size());
  switch (kind_) {
    case Kind::Identity:
      return x;
    case Kind::Scalar:
      return scalar_ * x;
    default:
      return b_ * x;
  }
}

Vector Metric::solve(const Vector& u) const {
  check_dim(u.size());
  switch (kind_) {
    case Kind::Identity:
      return u;
    case Kind::Scalar:
      return u / scalar_;
    default:
      return llt_.solve(u);
  }
}

double Metric::norm(const Vector& x) const { return std::sqrt(std::max(0.0, x.dot(apply(x)))); }

double Metric::dual_norm(const Vector& u) const {
  return std::sqrt(std::max(0.0, u.dot(solve(u))));
}

Matrix Metric::matrix(Eigen::Index n) const {
  check_dim(n);
  if (kind_ == Kind::Dense) return b_;
  return scalar_ * Matrix::Identity(n, n);
}

Matrix Metric::sqrt_matrix(Eigen::Index n) const {
  check_dim(n);
  if (kind_ == Kind::Dense) return sqrt_;
  return std::sqrt(scalar_) * Matrix::Identity(n, n);
}

Matrix Metric::inv_sqrt_matrix(Eigen::Index n) const {
  check_dim(n);
  if (kind_ == Kind::Dense) return inv_sqrt_;
  return Matrix::Identity(n, n) / std::sqrt(scalar_);
}

}  // namespace ppapep
