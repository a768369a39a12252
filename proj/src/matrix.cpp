#include "rankr/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rankr/error.hpp"

namespace rankr {

namespace {

void require_dim(int n) {
  if (n < 0 || n > kMaxDim) {
    fail(ErrorCode::kInvalidArgument, "dimension " + std::to_string(n) + " outside [0, 8]");
  }
}

struct Lu {
  Mat lu;
  std::array<int, kMaxDim> perm{};
  int sign = 1;
  bool singular = false;
};

Lu lu_decompose(const Mat& m) {
  if (!m.is_square()) fail(ErrorCode::kDimensionMismatch, "LU of a non-square matrix");
  Lu out{m};
  const int n = m.n();
  for (int i = 0; i < n; ++i) out.perm[static_cast<std::size_t>(i)] = i;
  double scale = max_abs(m);
  if (scale == 0.0) {
    out.singular = n > 0;
    return out;
  }
  Mat& a = out.lu;
  for (int k = 0; k < n; ++k) {
    int p = k;
    for (int i = k + 1; i < n; ++i) {
      if (std::abs(a(i, k)) > std::abs(a(p, k))) p = i;
    }
    if (std::abs(a(p, k)) <= 1e-300 * scale) {
      out.singular = true;
      return out;
    }
    if (p != k) {
      for (int j = 0; j < n; ++j) std::swap(a(p, j), a(k, j));
      std::swap(out.perm[static_cast<std::size_t>(p)], out.perm[static_cast<std::size_t>(k)]);
      out.sign = -out.sign;
    }
    for (int i = k + 1; i < n; ++i) {
      a(i, k) /= a(k, k);
      const double f = a(i, k);
      for (int j = k + 1; j < n; ++j) a(i, j) -= f * a(k, j);
    }
  }
  return out;
}

Vec lu_solve(const Lu& f, const Vec& b) {
  const int n = f.lu.n();
  Vec x(n);
  for (int i = 0; i < n; ++i) x[i] = b[f.perm[static_cast<std::size_t>(i)]];
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < i; ++j) x[i] -= f.lu(i, j) * x[j];
  }
  for (int i = n - 1; i >= 0; --i) {
    for (int j = i + 1; j < n; ++j) x[i] -= f.lu(i, j) * x[j];
    x[i] /= f.lu(i, i);
  }
  return x;
}

}  // namespace

// ---------------------------------------------------------------- Vec

Vec::Vec(int n, double fill) : n_(n) {
  require_dim(n);
  std::fill_n(data_.begin(), n, fill);
}

Vec::Vec(std::initializer_list<double> values) : n_(static_cast<int>(values.size())) {
  require_dim(n_);
  std::copy(values.begin(), values.end(), data_.begin());
}

Vec Vec::from_span(std::span<const double> values) {
  Vec v(static_cast<int>(values.size()));
  std::copy(values.begin(), values.end(), v.data_.begin());
  return v;
}

Vec& Vec::operator+=(const Vec& other) {
  assert(n_ == other.n_);
  for (int i = 0; i < n_; ++i) data_[static_cast<std::size_t>(i)] += other[i];
  return *this;
}

Vec& Vec::operator-=(const Vec& other) {
  assert(n_ == other.n_);
  for (int i = 0; i < n_; ++i) data_[static_cast<std::size_t>(i)] -= other[i];
  return *this;
}

Vec& Vec::operator*=(double s) {
  for (int i = 0; i < n_; ++i) data_[static_cast<std::size_t>(i)] *= s;
  return *this;
}

bool operator==(const Vec& a, const Vec& b) {
  return a.n_ == b.n_ && std::equal(a.begin(), a.end(), b.begin());
}

double dot(const Vec& a, const Vec& b) {
  if (a.size() != b.size()) fail(ErrorCode::kDimensionMismatch, "dot of unequal vectors");
  double s = 0.0;
  for (int i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double norm(const Vec& a) {
  double scale = 0.0;
  for (double x : a) scale = std::max(scale, std::abs(x));
  if (scale == 0.0) return 0.0;
  double s = 0.0;
  for (double x : a) s += (x / scale) * (x / scale);
  return scale * std::sqrt(s);
}

double sum(const Vec& a) {
  double s = 0.0;
  for (double x : a) s += x;
  return s;
}

// ---------------------------------------------------------------- Mat

Mat::Mat(int rows, int cols) : rows_(rows), cols_(cols) {
  require_dim(rows);
  require_dim(cols);
}

Mat::Mat(std::initializer_list<std::initializer_list<double>> rows)
    : Mat(static_cast<int>(rows.size()), rows.size() ? static_cast<int>(rows.begin()->size()) : 0) {
  int i = 0;
  for (const auto& r : rows) {
    if (static_cast<int>(r.size()) != cols_) fail(ErrorCode::kDimensionMismatch, "ragged matrix literal");
    int j = 0;
    for (double x : r) (*this)(i, j++) = x;
    ++i;
  }
}

Mat Mat::identity(int n) {
  Mat m(n, n);
  for (int i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Mat Mat::diagonal(const Vec& d) {
  Mat m(d.size(), d.size());
  for (int i = 0; i < d.size(); ++i) m(i, i) = d[i];
  return m;
}

Mat Mat::unit(int n, int i, int j) {
  Mat m(n, n);
  m(i, j) = 1.0;
  return m;
}

Vec Mat::row(int i) const {
  Vec v(cols_);
  for (int j = 0; j < cols_; ++j) v[j] = (*this)(i, j);
  return v;
}

Vec Mat::col(int j) const {
  Vec v(rows_);
  for (int i = 0; i < rows_; ++i) v[i] = (*this)(i, j);
  return v;
}

void Mat::set_col(int j, const Vec& v) {
  assert(v.size() == rows_);
  for (int i = 0; i < rows_; ++i) (*this)(i, j) = v[i];
}

void Mat::set_row(int i, const Vec& v) {
  assert(v.size() == cols_);
  for (int j = 0; j < cols_; ++j) (*this)(i, j) = v[j];
}

Vec Mat::diag() const {
  const int k = std::min(rows_, cols_);
  Vec d(k);
  for (int i = 0; i < k; ++i) d[i] = (*this)(i, i);
  return d;
}

Mat Mat::transposed() const {
  Mat t(cols_, rows_);
  for (int i = 0; i < rows_; ++i) {
    for (int j = 0; j < cols_; ++j) t(j, i) = (*this)(i, j);
  }
  return t;
}

Mat Mat::block(int r0, int c0, int nrows, int ncols) const {
  assert(r0 + nrows <= rows_ && c0 + ncols <= cols_);
  Mat b(nrows, ncols);
  for (int i = 0; i < nrows; ++i) {
    for (int j = 0; j < ncols; ++j) b(i, j) = (*this)(r0 + i, c0 + j);
  }
  return b;
}

Mat& Mat::operator+=(const Mat& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_) fail(ErrorCode::kDimensionMismatch, "matrix sum");
  for (int k = 0; k < rows_ * cols_; ++k) data_[static_cast<std::size_t>(k)] += other.data_[static_cast<std::size_t>(k)];
  return *this;
}

Mat& Mat::operator-=(const Mat& other) {
  if (rows_ != other.rows_ || cols_ != other.cols_) fail(ErrorCode::kDimensionMismatch, "matrix difference");
  for (int k = 0; k < rows_ * cols_; ++k) data_[static_cast<std::size_t>(k)] -= other.data_[static_cast<std::size_t>(k)];
  return *this;
}

Mat& Mat::operator*=(double s) {
  for (int k = 0; k < rows_ * cols_; ++k) data_[static_cast<std::size_t>(k)] *= s;
  return *this;
}

Mat operator*(const Mat& a, const Mat& b) {
  if (a.cols_ != b.rows_) fail(ErrorCode::kDimensionMismatch, "matrix product");
  Mat c(a.rows_, b.cols_);
  for (int i = 0; i < a.rows_; ++i) {
    for (int k = 0; k < a.cols_; ++k) {
      const double aik = a(i, k);
      if (aik == 0.0) continue;
      for (int j = 0; j < b.cols_; ++j) c(i, j) += aik * b(k, j);
    }
  }
  return c;
}

Vec operator*(const Mat& a, const Vec& v) {
  if (a.cols_ != v.size()) fail(ErrorCode::kDimensionMismatch, "matrix-vector product");
  Vec out(a.rows_);
  for (int i = 0; i < a.rows_; ++i) {
    double s = 0.0;
    for (int j = 0; j < a.cols_; ++j) s += a(i, j) * v[j];
    out[i] = s;
  }
  return out;
}

bool operator==(const Mat& a, const Mat& b) {
  if (a.rows_ != b.rows_ || a.cols_ != b.cols_) return false;
  auto va = a.values();
  auto vb = b.values();
  return std::equal(va.begin(), va.end(), vb.begin());
}

double frobenius_norm(const Mat& m) {
  const double scale = max_abs(m);
  if (scale == 0.0) return 0.0;
  double s = 0.0;
  for (double x : m.values()) s += (x / scale) * (x / scale);
  return scale * std::sqrt(s);
}

double max_abs(const Mat& m) {
  double s = 0.0;
  for (double x : m.values()) s = std::max(s, std::abs(x));
  return s;
}

double trace(const Mat& m) {
  double s = 0.0;
  for (int i = 0; i < std::min(m.rows(), m.cols()); ++i) s += m(i, i);
  return s;
}

double det(const Mat& m) {
  Lu f = lu_decompose(m);
  if (f.singular) return 0.0;
  double d = f.sign;
  for (int i = 0; i < m.n(); ++i) d *= f.lu(i, i);
  return d;
}

Mat inverse(const Mat& m) {
  Lu f = lu_decompose(m);
  if (f.singular) fail(ErrorCode::kSingularMatrix, "inverse of a singular matrix");
  const int n = m.n();
  Mat inv(n, n);
  for (int j = 0; j < n; ++j) {
    Vec e(n);
    e[j] = 1.0;
    inv.set_col(j, lu_solve(f, e));
  }
  return inv;
}

Vec solve(const Mat& a, const Vec& b) {
  Lu f = lu_decompose(a);
  if (f.singular) fail(ErrorCode::kSingularMatrix, "solve with a singular matrix");
  return lu_solve(f, b);
}

Mat commutator(const Mat& a, const Mat& b) { return a * b - b * a; }

Mat power(const Mat& m, int k) {
  Mat base = k < 0 ? inverse(m) : m;
  unsigned e = static_cast<unsigned>(k < 0 ? -k : k);
  Mat result = Mat::identity(m.n());
  while (e != 0) {
    if (e & 1U) result = result * base;
    e >>= 1U;
    if (e != 0) base = base * base;
  }
  return result;
}

Mat outer(const Vec& u, const Vec& v) {
  Mat m(u.size(), v.size());
  for (int i = 0; i < u.size(); ++i) {
    for (int j = 0; j < v.size(); ++j) m(i, j) = u[i] * v[j];
  }
  return m;
}

Mat hstack(const Mat& a, const Mat& b) {
  if (a.rows() != b.rows()) fail(ErrorCode::kDimensionMismatch, "hstack row counts differ");
  Mat m(a.rows(), a.cols() + b.cols());
  for (int i = 0; i < a.rows(); ++i) {
    for (int j = 0; j < a.cols(); ++j) m(i, j) = a(i, j);
    for (int j = 0; j < b.cols(); ++j) m(i, a.cols() + j) = b(i, j);
  }
  return m;
}

}  // namespace rankr
