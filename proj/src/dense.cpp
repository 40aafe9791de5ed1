#include "lobpcg/dense.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "lobpcg/error.hpp"

namespace lobpcg {

DenseMatrix::DenseMatrix(std::size_t rows, std::size_t cols, double fill)
    : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

DenseMatrix::DenseMatrix(std::initializer_list<std::initializer_list<double>> rows)
    : rows_(rows.size()), cols_(rows.size() == 0 ? 0 : rows.begin()->size()) {
  data_.assign(rows_ * cols_, 0.0);
  std::size_t i = 0;
  for (const auto& row : rows) {
    if (row.size() != cols_) {
      throw Error(ErrorCode::DimensionMismatch, "ragged initializer for DenseMatrix");
    }
    std::size_t j = 0;
    for (double v : row) (*this)(i, j++) = v;
    ++i;
  }
}

DenseMatrix DenseMatrix::identity(std::size_t n) {
  DenseMatrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

DenseMatrix DenseMatrix::diagonal(std::span<const double> d) {
  DenseMatrix m(d.size(), d.size());
  for (std::size_t i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

DenseMatrix DenseMatrix::transposed() const {
  DenseMatrix t(cols_, rows_);
  for (std::size_t j = 0; j < cols_; ++j)
    for (std::size_t i = 0; i < rows_; ++i) t(j, i) = (*this)(i, j);
  return t;
}

DenseMatrix DenseMatrix::columns(std::size_t first, std::size_t count) const {
  if (first + count > cols_) {
    throw Error(ErrorCode::DimensionMismatch, "column range out of bounds");
  }
  DenseMatrix out(rows_, count);
  std::copy_n(data_.begin() + static_cast<std::ptrdiff_t>(first * rows_), count * rows_,
              out.data_.begin());
  return out;
}

DenseMatrix DenseMatrix::select_columns(std::span<const std::size_t> idx) const {
  DenseMatrix out(rows_, idx.size());
  for (std::size_t k = 0; k < idx.size(); ++k) {
    if (idx[k] >= cols_) throw Error(ErrorCode::IndexOutOfRange, "column index out of bounds");
    std::ranges::copy(col(idx[k]), out.col(k).begin());
  }
  return out;
}

DenseMatrix DenseMatrix::row_range(std::size_t first, std::size_t count) const {
  if (first + count > rows_) {
    throw Error(ErrorCode::DimensionMismatch, "row range out of bounds");
  }
  DenseMatrix out(count, cols_);
  for (std::size_t j = 0; j < cols_; ++j)
    for (std::size_t i = 0; i < count; ++i) out(i, j) = (*this)(first + i, j);
  return out;
}

double DenseMatrix::max_abs() const noexcept {
  double m = 0.0;
  for (double v : data_) m = std::max(m, std::abs(v));
  return m;
}

bool DenseMatrix::all_finite() const noexcept {
  return std::ranges::all_of(data_, [](double v) { return std::isfinite(v); });
}

DenseMatrix& DenseMatrix::operator+=(const DenseMatrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_) {
    throw Error(ErrorCode::DimensionMismatch, "shape mismatch in +=");
  }
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += other.data_[k];
  return *this;
}

DenseMatrix& DenseMatrix::operator-=(const DenseMatrix& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_) {
    throw Error(ErrorCode::DimensionMismatch, "shape mismatch in -=");
  }
  for (std::size_t k = 0; k < data_.size(); ++k) data_[k] -= other.data_[k];
  return *this;
}

DenseMatrix& DenseMatrix::operator*=(double s) noexcept {
  for (double& v : data_) v *= s;
  return *this;
}

DenseMatrix operator+(DenseMatrix a, const DenseMatrix& b) { return a += b; }
DenseMatrix operator-(DenseMatrix a, const DenseMatrix& b) { return a -= b; }
DenseMatrix operator*(double s, DenseMatrix a) { return a *= s; }

DenseMatrix hcat(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.cols() == 0) return b;
  if (b.cols() == 0) return a;
  if (a.rows() != b.rows()) throw Error(ErrorCode::DimensionMismatch, "hcat row mismatch");
  DenseMatrix out(a.rows(), a.cols() + b.cols());
  std::ranges::copy(a.data(), out.data().begin());
  std::ranges::copy(b.data(), out.data().begin() + static_cast<std::ptrdiff_t>(a.data().size()));
  return out;
}

DenseMatrix matmul(Trans trans_a, const DenseMatrix& a, const DenseMatrix& b) {
  const bool t = trans_a == Trans::Yes;
  const std::size_t m = t ? a.cols() : a.rows();
  const std::size_t inner = t ? a.rows() : a.cols();
  if (inner != b.rows()) {
    throw Error(ErrorCode::DimensionMismatch,
                "matmul inner dimensions " + std::to_string(inner) + " and " +
                    std::to_string(b.rows()));
  }
  DenseMatrix c(m, b.cols());
  if (t) {
    for (std::size_t j = 0; j < b.cols(); ++j)
      for (std::size_t i = 0; i < m; ++i) c(i, j) = dot(a.col(i), b.col(j));
  } else {
    for (std::size_t j = 0; j < b.cols(); ++j) {
      auto cj = c.col(j);
      for (std::size_t k = 0; k < inner; ++k) {
        const double bkj = b(k, j);
        if (bkj == 0.0) continue;
        auto ak = a.col(k);
        for (std::size_t i = 0; i < m; ++i) cj[i] += ak[i] * bkj;
      }
    }
  }
  return c;
}

bool is_symmetric(const DenseMatrix& m) {
  if (m.rows() != m.cols()) return false;
  const double tol = 1e-12 * std::max(1.0, m.max_abs());
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (std::size_t i = j + 1; i < m.rows(); ++i)
      if (std::abs(m(i, j) - m(j, i)) > tol) return false;
  return true;
}

DenseMatrix symmetrized(const DenseMatrix& m) {
  if (m.rows() != m.cols()) throw Error(ErrorCode::DimensionMismatch, "symmetrized: not square");
  DenseMatrix s(m.rows(), m.cols());
  for (std::size_t j = 0; j < m.cols(); ++j)
    for (std::size_t i = 0; i < m.rows(); ++i) s(i, j) = 0.5 * (m(i, j) + m(j, i));
  return s;
}

namespace {

// Householder reduction to tridiagonal form. On return v holds the
// accumulated orthogonal transform, d the diagonal and e the subdiagonal
// (e[0] unused).
void tridiagonalize(DenseMatrix& v, std::vector<double>& d, std::vector<double>& e) {
  const std::size_t n = v.rows();
  for (std::size_t j = 0; j < n; ++j) d[j] = v(n - 1, j);

  for (std::size_t i = n - 1; i > 0; --i) {
    double scale = 0.0;
    double h = 0.0;
    for (std::size_t k = 0; k < i; ++k) scale += std::abs(d[k]);
    if (scale == 0.0) {
      e[i] = d[i - 1];
      for (std::size_t j = 0; j < i; ++j) {
        d[j] = v(i - 1, j);
        v(i, j) = 0.0;
        v(j, i) = 0.0;
      }
    } else {
      for (std::size_t k = 0; k < i; ++k) {
        d[k] /= scale;
        h += d[k] * d[k];
      }
      double f = d[i - 1];
      double g = std::sqrt(h);
      if (f > 0) g = -g;
      e[i] = scale * g;
      h -= f * g;
      d[i - 1] = f - g;
      for (std::size_t j = 0; j < i; ++j) e[j] = 0.0;

      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        v(j, i) = f;
        g = e[j] + v(j, j) * f;
        for (std::size_t k = j + 1; k < i; ++k) {
          g += v(k, j) * d[k];
          e[k] += v(k, j) * f;
        }
        e[j] = g;
      }
      f = 0.0;
      for (std::size_t j = 0; j < i; ++j) {
        e[j] /= h;
        f += e[j] * d[j];
      }
      const double hh = f / (h + h);
      for (std::size_t j = 0; j < i; ++j) e[j] -= hh * d[j];
      for (std::size_t j = 0; j < i; ++j) {
        f = d[j];
        g = e[j];
        for (std::size_t k = j; k < i; ++k) v(k, j) -= (f * e[k] + g * d[k]);
        d[j] = v(i - 1, j);
        v(i, j) = 0.0;
      }
    }
    d[i] = h;
  }

  for (std::size_t i = 0; i + 1 < n; ++i) {
    v(n - 1, i) = v(i, i);
    v(i, i) = 1.0;
    const double h = d[i + 1];
    if (h != 0.0) {
      for (std::size_t k = 0; k <= i; ++k) d[k] = v(k, i + 1) / h;
      for (std::size_t j = 0; j <= i; ++j) {
        double g = 0.0;
        for (std::size_t k = 0; k <= i; ++k) g += v(k, i + 1) * v(k, j);
        for (std::size_t k = 0; k <= i; ++k) v(k, j) -= g * d[k];
      }
    }
    for (std::size_t k = 0; k <= i; ++k) v(k, i + 1) = 0.0;
  }
  for (std::size_t j = 0; j < n; ++j) {
    d[j] = v(n - 1, j);
    v(n - 1, j) = 0.0;
  }
  v(n - 1, n - 1) = 1.0;
  e[0] = 0.0;
}

// Implicit-shift QL on the tridiagonal (d, e), rotating the columns of v.
void tridiagonal_ql(DenseMatrix& v, std::vector<double>& d, std::vector<double>& e) {
  const std::ptrdiff_t n = static_cast<std::ptrdiff_t>(v.rows());
  constexpr double eps = std::numeric_limits<double>::epsilon();
  constexpr int kMaxSweepsPerValue = 60;

  for (std::ptrdiff_t i = 1; i < n; ++i) e[i - 1] = e[i];
  e[n - 1] = 0.0;

  double f = 0.0;
  double tst1 = 0.0;
  for (std::ptrdiff_t l = 0; l < n; ++l) {
    tst1 = std::max(tst1, std::abs(d[l]) + std::abs(e[l]));
    std::ptrdiff_t m = l;
    while (m < n - 1 && std::abs(e[m]) > eps * tst1) ++m;

    if (m > l) {
      int sweeps = 0;
      do {
        if (++sweeps > kMaxSweepsPerValue) {
          throw Error(ErrorCode::NoConvergence, "tridiagonal QL exceeded its sweep cap");
        }
        double g = d[l];
        double p = (d[l + 1] - g) / (2.0 * e[l]);
        double r = std::hypot(p, 1.0);
        if (p < 0) r = -r;
        d[l] = e[l] / (p + r);
        d[l + 1] = e[l] * (p + r);
        const double dl1 = d[l + 1];
        double h = g - d[l];
        for (std::ptrdiff_t i = l + 2; i < n; ++i) d[i] -= h;
        f += h;

        p = d[m];
        double c = 1.0;
        double c2 = c;
        double c3 = c;
        const double el1 = e[l + 1];
        double s = 0.0;
        double s2 = 0.0;
        for (std::ptrdiff_t i = m - 1; i >= l; --i) {
          c3 = c2;
          c2 = c;
          s2 = s;
          g = c * e[i];
          h = c * p;
          r = std::hypot(p, e[i]);
          e[i + 1] = s * r;
          s = e[i] / r;
          c = p / r;
          p = c * d[i] - s * g;
          d[i + 1] = h + s * (c * g + s * d[i]);
          auto vi = v.col(static_cast<std::size_t>(i));
          auto vi1 = v.col(static_cast<std::size_t>(i + 1));
          for (std::ptrdiff_t k = 0; k < n; ++k) {
            h = vi1[k];
            vi1[k] = s * vi[k] + c * h;
            vi[k] = c * vi[k] - s * h;
          }
        }
        p = -s * s2 * c3 * el1 * e[l] / dl1;
        e[l] = s * p;
        d[l] = c * p;
      } while (std::abs(e[l]) > eps * tst1);
    }
    d[l] += f;
    e[l] = 0.0;
  }
}

}  // namespace

SymEigResult sym_eig(const DenseMatrix& m) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "sym_eig requires a nonempty square matrix");
  }
  if (!is_symmetric(m)) throw Error(ErrorCode::NonSymmetric, "sym_eig input is not symmetric");

  const std::size_t n = m.rows();
  DenseMatrix v = symmetrized(m);
  std::vector<double> d(n);
  std::vector<double> e(n);
  if (n == 1) {
    return {{m(0, 0)}, DenseMatrix::identity(1)};
  }
  tridiagonalize(v, d, e);
  tridiagonal_ql(v, d, e);

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::ranges::stable_sort(order, [&](std::size_t a, std::size_t b) { return d[a] < d[b]; });

  SymEigResult out;
  out.values.resize(n);
  out.vectors = DenseMatrix(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    out.values[k] = d[order[k]];
    std::ranges::copy(v.col(order[k]), out.vectors.col(k).begin());
  }
  return out;
}

DenseMatrix cholesky(const DenseMatrix& m) {
  if (m.rows() == 0 || m.rows() != m.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "cholesky requires a nonempty square matrix");
  }
  const std::size_t n = m.rows();
  const double pivot_floor = static_cast<double>(n) * 1e-14 * m.max_abs();
  DenseMatrix l(n, n);
  for (std::size_t j = 0; j < n; ++j) {
    double pivot = m(j, j);
    for (std::size_t k = 0; k < j; ++k) pivot -= l(j, k) * l(j, k);
    if (!(pivot > pivot_floor)) {
      throw Error(ErrorCode::NotPositiveDefinite,
                  "cholesky pivot " + std::to_string(j) + " is not positive");
    }
    const double ljj = std::sqrt(pivot);
    l(j, j) = ljj;
    for (std::size_t i = j + 1; i < n; ++i) {
      double s = m(i, j);
      for (std::size_t k = 0; k < j; ++k) s -= l(i, k) * l(j, k);
      l(i, j) = s / ljj;
    }
  }
  return l;
}

DenseMatrix solve_lower(const DenseMatrix& l, const DenseMatrix& b) {
  const std::size_t n = l.rows();
  if (l.cols() != n || b.rows() != n) throw Error(ErrorCode::DimensionMismatch, "solve_lower");
  DenseMatrix x = b;
  for (std::size_t c = 0; c < x.cols(); ++c) {
    auto xc = x.col(c);
    for (std::size_t j = 0; j < n; ++j) {
      xc[j] /= l(j, j);
      const double xj = xc[j];
      for (std::size_t i = j + 1; i < n; ++i) xc[i] -= l(i, j) * xj;
    }
  }
  return x;
}

DenseMatrix solve_lower_transposed(const DenseMatrix& l, const DenseMatrix& b) {
  const std::size_t n = l.rows();
  if (l.cols() != n || b.rows() != n) {
    throw Error(ErrorCode::DimensionMismatch, "solve_lower_transposed");
  }
  DenseMatrix x = b;
  for (std::size_t c = 0; c < x.cols(); ++c) {
    auto xc = x.col(c);
    for (std::size_t j = n; j-- > 0;) {
      double s = xc[j];
      auto lj = l.col(j);
      for (std::size_t i = j + 1; i < n; ++i) s -= lj[i] * xc[i];
      xc[j] = s / l(j, j);
    }
  }
  return x;
}

double max_abs_diff(const DenseMatrix& a, const DenseMatrix& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "max_abs_diff shape mismatch");
  }
  double m = 0.0;
  for (std::size_t k = 0; k < a.data().size(); ++k) {
    m = std::max(m, std::abs(a.data()[k] - b.data()[k]));
  }
  return m;
}

double dot(std::span<const double> x, std::span<const double> y) {
  double s = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
  return s;
}

double norm2(std::span<const double> x) { return std::sqrt(dot(x, x)); }

}  // namespace lobpcg
