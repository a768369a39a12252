#pragma once

#include <array>
#include <cassert>
#include <cstddef>
#include <initializer_list>
#include <span>

namespace rankr {

/// Largest supported matrix dimension.
inline constexpr int kMaxDim = 8;

/// Small real vector with inline storage (at most kMaxDim entries).
class Vec {
 public:
  Vec() = default;
  explicit Vec(int n, double fill = 0.0);
  Vec(std::initializer_list<double> values);
  static Vec from_span(std::span<const double> values);

  int size() const { return n_; }
  double& operator[](int i) {
    assert(i >= 0 && i < n_);
    return data_[static_cast<std::size_t>(i)];
  }
  double operator[](int i) const {
    assert(i >= 0 && i < n_);
    return data_[static_cast<std::size_t>(i)];
  }
  std::span<double> values() { return {data_.data(), static_cast<std::size_t>(n_)}; }
  std::span<const double> values() const {
    return {data_.data(), static_cast<std::size_t>(n_)};
  }
  double* begin() { return data_.data(); }
  double* end() { return data_.data() + n_; }
  const double* begin() const { return data_.data(); }
  const double* end() const { return data_.data() + n_; }

  Vec& operator+=(const Vec& other);
  Vec& operator-=(const Vec& other);
  Vec& operator*=(double s);

  friend Vec operator+(Vec a, const Vec& b) { return a += b; }
  friend Vec operator-(Vec a, const Vec& b) { return a -= b; }
  friend Vec operator*(double s, Vec a) { return a *= s; }
  friend Vec operator*(Vec a, double s) { return a *= s; }
  friend bool operator==(const Vec& a, const Vec& b);

 private:
  std::array<double, kMaxDim> data_{};
  int n_ = 0;
};

double dot(const Vec& a, const Vec& b);
double norm(const Vec& a);
double sum(const Vec& a);

/// Dense row-major real matrix with inline storage, rows and cols at most kMaxDim.
class Mat {
 public:
  Mat() = default;
  Mat(int rows, int cols);
  explicit Mat(int n) : Mat(n, n) {}
  Mat(std::initializer_list<std::initializer_list<double>> rows);

  static Mat identity(int n);
  static Mat zeros(int rows, int cols) { return Mat(rows, cols); }
  static Mat diagonal(const Vec& d);
  /// Elementary matrix E_ij (0-based) of size n.
  static Mat unit(int n, int i, int j);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  /// Dimension of a square matrix.
  int n() const {
    assert(rows_ == cols_);
    return rows_;
  }
  bool is_square() const { return rows_ == cols_; }

  double& operator()(int i, int j) {
    assert(i >= 0 && i < rows_ && j >= 0 && j < cols_);
    return data_[static_cast<std::size_t>(i * cols_ + j)];
  }
  double operator()(int i, int j) const {
    assert(i >= 0 && i < rows_ && j >= 0 && j < cols_);
    return data_[static_cast<std::size_t>(i * cols_ + j)];
  }
  std::span<double> values() {
    return {data_.data(), static_cast<std::size_t>(rows_ * cols_)};
  }
  std::span<const double> values() const {
    return {data_.data(), static_cast<std::size_t>(rows_ * cols_)};
  }

  Vec row(int i) const;
  Vec col(int j) const;
  void set_col(int j, const Vec& v);
  void set_row(int i, const Vec& v);
  Vec diag() const;

  Mat transposed() const;
  /// Sub-block starting at (r0, c0).
  Mat block(int r0, int c0, int nrows, int ncols) const;

  Mat& operator+=(const Mat& other);
  Mat& operator-=(const Mat& other);
  Mat& operator*=(double s);

  friend Mat operator+(Mat a, const Mat& b) { return a += b; }
  friend Mat operator-(Mat a, const Mat& b) { return a -= b; }
  friend Mat operator*(double s, Mat a) { return a *= s; }
  friend Mat operator*(Mat a, double s) { return a *= s; }
  friend Mat operator*(const Mat& a, const Mat& b);
  friend Vec operator*(const Mat& a, const Vec& v);
  friend bool operator==(const Mat& a, const Mat& b);

 private:
  std::array<double, kMaxDim * kMaxDim> data_{};
  int rows_ = 0;
  int cols_ = 0;
};

double frobenius_norm(const Mat& m);
double max_abs(const Mat& m);
double trace(const Mat& m);
/// Determinant by LU with partial pivoting.
double det(const Mat& m);
/// Inverse by LU with partial pivoting; throws SingularMatrix.
Mat inverse(const Mat& m);
/// Solves a x = b for square a; throws SingularMatrix.
Vec solve(const Mat& a, const Vec& b);
/// a b - b a
Mat commutator(const Mat& a, const Mat& b);
/// Integer power (negative powers use the inverse).
Mat power(const Mat& m, int k);
/// Outer product u v^T.
Mat outer(const Vec& u, const Vec& v);
/// Columns [a | b].
Mat hstack(const Mat& a, const Mat& b);

}  // namespace rankr
