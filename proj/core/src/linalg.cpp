#include "ppapep/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

namespace ppapep {
namespace {

template <class T>
using Mat = Eigen::Matrix<T, Eigen::Dynamic, Eigen::Dynamic>;
template <class T>
using Vec = Eigen::Matrix<T, Eigen::Dynamic, 1>;

template <class T>
struct EigenPairs {
  Vec<T> values;
  Mat<T> vectors;
};

// Reduces the symmetric matrix held in z to tridiagonal form (diagonal d,
// subdiagonal e with e[0] = 0). When `want_vectors` is set, z is overwritten
// by the accumulated orthogonal transform.
template <class T>
void tridiagonalize(Mat<T>& z, Vec<T>& d, Vec<T>& e, bool want_vectors) {
  const Eigen::Index n = z.rows();
  d.resize(n);
  e.resize(n);
  for (Eigen::Index i = n - 1; i > 0; --i) {
    const Eigen::Index l = i - 1;
    T h = T(0);
    if (l > 0) {
      T scale = T(0);
      for (Eigen::Index k = 0; k <= l; ++k) scale += std::abs(z(i, k));
      if (scale == T(0)) {
        e[i] = z(i, l);
      } else {
        for (Eigen::Index k = 0; k <= l; ++k) {
          z(i, k) /= scale;
          h += z(i, k) * z(i, k);
        }
        T f = z(i, l);
        const T g = (f >= T(0)) ? -std::sqrt(h) : std::sqrt(h);
        e[i] = scale * g;
        h -= f * g;
        z(i, l) = f - g;
        f = T(0);
        for (Eigen::Index j = 0; j <= l; ++j) {
          if (want_vectors) z(j, i) = z(i, j) / h;
          T acc = T(0);
          for (Eigen::Index k = 0; k <= j; ++k) acc += z(j, k) * z(i, k);
          for (Eigen::Index k = j + 1; k <= l; ++k) acc += z(k, j) * z(i, k);
          e[j] = acc / h;
          f += e[j] * z(i, j);
        }
        const T hh = f / (h + h);
        for (Eigen::Index j = 0; j <= l; ++j) {
          f = z(i, j);
          const T g2 = e[j] - hh * f;
          e[j] = g2;
          for (Eigen::Index k = 0; k <= j; ++k) z(j, k) -= (f * e[k] + g2 * z(i, k));
        }
      }
    } else {
      e[i] = z(i, l);
    }
    d[i] = h;
  }
  d[0] = T(0);
  e[0] = T(0);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (want_vectors) {
      if (d[i] != T(0)) {
        for (Eigen::Index j = 0; j < i; ++j) {
          T g = T(0);
          for (Eigen::Index k = 0; k < i; ++k) g += z(i, k) * z(k, j);
          for (Eigen::Index k = 0; k < i; ++k) z(k, j) -= g * z(k, i);
        }
      }
      d[i] = z(i, i);
      z(i, i) = T(1);
      for (Eigen::Index j = 0; j < i; ++j) z(j, i) = z(i, j) = T(0);
    } else {
      d[i] = z(i, i);
    }
  }
}

// Implicit QL on the tridiagonal (d, e); rotations are applied to z when
// `want_vectors` is set.
template <class T>
void tridiagonal_ql(Vec<T>& d, Vec<T>& e, Mat<T>& z, bool want_vectors) {
  const Eigen::Index n = d.size();
  for (Eigen::Index i = 1; i < n; ++i) e[i - 1] = e[i];
  if (n > 0) e[n - 1] = T(0);
  constexpr int kMaxSweeps = 60;
  for (Eigen::Index l = 0; l < n; ++l) {
    int iter = 0;
    Eigen::Index m = l;
    do {
      for (m = l; m < n - 1; ++m) {
        const T dd = std::abs(d[m]) + std::abs(d[m + 1]);
        if (std::abs(e[m]) <= std::numeric_limits<T>::epsilon() * dd) break;
      }
      if (m != l) {
        if (++iter > kMaxSweeps) {
          throw std::runtime_error("symmetric_eigen: QL iteration failed to converge");
        }
        T g = (d[l + 1] - d[l]) / (T(2) * e[l]);
        T r = std::hypot(g, T(1));
        g = d[m] - d[l] + e[l] / (g + (g >= T(0) ? std::abs(r) : -std::abs(r)));
        T s = T(1);
        T c = T(1);
        T p = T(0);
        Eigen::Index i = m - 1;
        bool underflow = false;
        for (; i >= l; --i) {
          T f = s * e[i];
          const T b = c * e[i];
          r = std::hypot(f, g);
          e[i + 1] = r;
          if (r == T(0)) {
            d[i + 1] -= p;
            e[m] = T(0);
            underflow = true;
            break;
          }
          s = f / r;
          c = g / r;
          g = d[i + 1] - p;
          r = (d[i] - g) * s + T(2) * c * b;
          p = s * r;
          d[i + 1] = g + p;
          g = c * r - b;
          if (want_vectors) {
            for (Eigen::Index k = 0; k < n; ++k) {
              f = z(k, i + 1);
              z(k, i + 1) = s * z(k, i) + c * f;
              z(k, i) = c * z(k, i) - s * f;
            }
          }
          if (i == 0) break;
        }
        if (underflow) continue;
        d[l] -= p;
        e[l] = g;
        e[m] = T(0);
      }
    } while (m != l);
  }
}

template <class T>
EigenPairs<T> decompose(const Mat<T>& a, bool want_vectors) {
  if (a.rows() != a.cols()) throw std::invalid_argument("symmetric_eigen: matrix must be square");
  const Eigen::Index n = a.rows();
  Mat<T> z = a.template triangularView<Eigen::Lower>();
  z.template triangularView<Eigen::StrictlyUpper>() =
      z.transpose().template triangularView<Eigen::StrictlyUpper>();
  Vec<T> d;
  Vec<T> e;
  if (n == 0) return {};
  tridiagonalize(z, d, e, want_vectors);
  tridiagonal_ql(d, e, z, want_vectors);

  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index x, Eigen::Index y) { return d[x] < d[y]; });
  EigenPairs<T> out;
  out.values.resize(n);
  if (want_vectors) out.vectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    out.values[k] = d[order[static_cast<std::size_t>(k)]];
    if (want_vectors) out.vectors.col(k) = z.col(order[static_cast<std::size_t>(k)]);
  }
  return out;
}

}  // namespace

SymmetricEigen symmetric_eigen(const Matrix& a) {
  EigenPairs<double> e = decompose(a, true);
  return {std::move(e.values), std::move(e.vectors)};
}

Vector symmetric_eigenvalues(const Matrix& a) { return decompose(a, false).values; }

ExtVector symmetric_eigenvalues(const ExtMatrix& a) { return decompose(a, false).values; }

}  // namespace ppapep
