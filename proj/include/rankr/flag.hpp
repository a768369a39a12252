#pragma once

#include <vector>

#include "rankr/config.hpp"
#include "rankr/matrix.hpp"

namespace rankr {

/// Full flag in R^n stored as its chain of orthogonal projectors
/// P_1 < P_2 < ... < P_{n-1}, together with one orthonormal frame that
/// realizes it. Equality and distances only look at the projectors.
class Flag {
 public:
  Flag() = default;

  /// Throws NotOrthogonal unless k^T k = I within tol.lin.
  static Flag from_frame(const Mat& k, const Tolerances& tol = default_tolerances());
  /// Flag spanned by the leading columns of an invertible matrix.
  static Flag from_basis(const Mat& g, const Tolerances& tol = default_tolerances());
  static Flag standard(int n);
  /// span{e_n} < span{e_n, e_{n-1}} < ...
  static Flag reversed(int n);

  int n() const { return frame_.rows(); }
  /// P_i for 1 <= i <= n - 1.
  const Mat& projector(int i) const { return projectors_[static_cast<std::size_t>(i - 1)]; }
  /// Orthonormal frame with det +1 whose leading columns span the flag.
  const Mat& frame() const { return frame_; }

 private:
  Mat frame_;
  std::vector<Mat> projectors_;
};

/// max_i |P_i - P'_i|_F
double flag_distance(const Flag& a, const Flag& b);

struct Transversality {
  bool transverse = false;
  /// min over i of |det [first i columns of a | first n-i columns of b]|
  double margin = 0.0;
};

Transversality transverse(const Flag& a, const Flag& b, const Tolerances& tol = default_tolerances());

/// g . f, the flag of the orthogonal factor of g k for a frame k of f.
Flag act(const Mat& g, const Flag& f, const Tolerances& tol = default_tolerances());

}  // namespace rankr
