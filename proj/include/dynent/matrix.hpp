#pragma once

#include <cmath>
#include <cstddef>
#include <vector>

#include "dynent/errors.hpp"

namespace dynent {

using Vec = std::vector<double>;

// Dense row-major matrix of doubles. Sized for the small problems in this
// library: control dimensions k <= 4 on the algebra side, sample sizes up to
// a few thousand on the distance-matrix side.
class Mat {
 public:
  Mat() = default;
  Mat(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Mat identity(std::size_t n) {
    Mat m(n, n);
    for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
    return m;
  }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }

  std::vector<double>& data() { return data_; }
  const std::vector<double>& data() const { return data_; }

  Mat transposed() const {
    Mat t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
    return t;
  }

  friend bool operator==(const Mat& a, const Mat& b) {
    return a.rows_ == b.rows_ && a.cols_ == b.cols_ && a.data_ == b.data_;
  }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> data_;
};

inline Vec matvec(const Mat& a, const Vec& x) {
  Vec y(a.rows(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double s = 0.0;
    const double* r = a.row(i);
    for (std::size_t j = 0; j < a.cols(); ++j) s += r[j] * x[j];
    y[i] = s;
  }
  return y;
}

inline Mat matmul(const Mat& a, const Mat& b) {
  Mat c(a.rows(), b.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t k = 0; k < a.cols(); ++k) {
      double aik = a(i, k);
      if (aik == 0.0) continue;
      for (std::size_t j = 0; j < b.cols(); ++j) c(i, j) += aik * b(k, j);
    }
  return c;
}

inline double dot(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

inline double norm2(const Vec& a) { return std::sqrt(dot(a, a)); }

struct SymEigen {
  Vec values;   // ascending
  Mat vectors;  // columns are eigenvectors
};

// Cyclic Jacobi for symmetric matrices. n is tiny here, so simplicity over
// speed. Rotation decisions depend only on entry ratios, which keeps the
// decomposition equivariant under scaling of the input by powers of two.
inline SymEigen sym_eigen(const Mat& a_in) {
  const std::size_t n = a_in.rows();
  if (n != a_in.cols()) throw Error(Errc::non_square, "sym_eigen needs a square matrix");
  Mat a = a_in;
  Mat v = Mat::identity(n);
  double frob = 0.0;
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) frob += a(i, j) * a(i, j);
  frob = std::sqrt(frob);
  const double tol = (frob > 0.0 ? frob : 1.0) * 1e-15;

  for (int sweep = 0; sweep < 100; ++sweep) {
    double off = 0.0;
    for (std::size_t p = 0; p + 1 < n; ++p)
      for (std::size_t q = p + 1; q < n; ++q) off += std::abs(a(p, q));
    if (off <= tol) break;
    for (std::size_t p = 0; p + 1 < n; ++p) {
      for (std::size_t q = p + 1; q < n; ++q) {
        if (std::abs(a(p, q)) <= tol / (double)(n * n)) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * a(p, q));
        const double t = (theta >= 0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (std::size_t i = 0; i < n; ++i) {
          const double aip = a(i, p), aiq = a(i, q);
          a(i, p) = c * aip - s * aiq;
          a(i, q) = s * aip + c * aiq;
        }
        for (std::size_t j = 0; j < n; ++j) {
          const double apj = a(p, j), aqj = a(q, j);
          a(p, j) = c * apj - s * aqj;
          a(q, j) = s * apj + c * aqj;
        }
        for (std::size_t i = 0; i < n; ++i) {
          const double vip = v(i, p), viq = v(i, q);
          v(i, p) = c * vip - s * viq;
          v(i, q) = s * vip + c * viq;
        }
      }
    }
  }

  SymEigen out;
  out.values.resize(n);
  for (std::size_t i = 0; i < n; ++i) out.values[i] = a(i, i);
  // sort ascending, reorder vectors accordingly
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) order[i] = i;
  for (std::size_t i = 0; i + 1 < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j)
      if (out.values[order[j]] < out.values[order[i]]) std::swap(order[i], order[j]);
  SymEigen sorted;
  sorted.values.resize(n);
  sorted.vectors = Mat(n, n);
  for (std::size_t k = 0; k < n; ++k) {
    sorted.values[k] = out.values[order[k]];
    for (std::size_t i = 0; i < n; ++i) sorted.vectors(i, k) = v(i, order[k]);
  }
  return sorted;
}

// Pseudoinverse of a symmetric PSD matrix, rank threshold relative to the
// largest eigenvalue.
inline Mat pinv_sym(const Mat& a, double rank_rtol = 1e-10) {
  const std::size_t n = a.rows();
  SymEigen e = sym_eigen(a);
  double lmax = 0.0;
  for (double w : e.values) lmax = std::max(lmax, std::abs(w));
  const double cut = lmax * rank_rtol;
  Mat out(n, n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    if (std::abs(e.values[k]) <= cut) continue;
    const double inv = 1.0 / e.values[k];
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out(i, j) += inv * e.vectors(i, k) * e.vectors(j, k);
  }
  return out;
}

// Symmetric inverse square root (for mapping Euclidean balls onto quadratic
// norm balls). Requires SPD input.
inline Mat inv_sqrt_sym(const Mat& a) {
  const std::size_t n = a.rows();
  SymEigen e = sym_eigen(a);
  Mat out(n, n, 0.0);
  for (std::size_t k = 0; k < n; ++k) {
    if (e.values[k] <= 0.0)
      throw Error(Errc::negative_input, "inv_sqrt_sym: matrix not positive definite");
    const double inv = 1.0 / std::sqrt(e.values[k]);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) out(i, j) += inv * e.vectors(i, k) * e.vectors(j, k);
  }
  return out;
}

}  // namespace dynent
