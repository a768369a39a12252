#include "rankr/flag.hpp"

#include <algorithm>
#include <cmath>

#include "rankr/error.hpp"
#include "rankr/kernel.hpp"

namespace rankr {

Flag Flag::from_frame(const Mat& k, const Tolerances& tol) {
  if (!k.is_square()) fail(ErrorCode::kDimensionMismatch, "flag frame must be square");
  const int n = k.n();
  if (frobenius_norm(k.transposed() * k - Mat::identity(n)) > tol.lin * std::max(1.0, std::sqrt(static_cast<double>(n)))) {
    fail(ErrorCode::kNotOrthogonal, "flag frame is not orthogonal");
  }
  Flag f;
  f.frame_ = k;
  if (det(k) < 0.0) {
    for (int i = 0; i < n; ++i) f.frame_(i, n - 1) = -f.frame_(i, n - 1);
  }
  f.projectors_.reserve(static_cast<std::size_t>(n - 1));
  Mat p(n, n);
  for (int i = 0; i + 1 < n; ++i) {
    const Vec c = f.frame_.col(i);
    p += outer(c, c);
    f.projectors_.push_back(p);
  }
  return f;
}

Flag Flag::from_basis(const Mat& g, const Tolerances& tol) { return from_frame(qr_decompose(g, tol).q, tol); }

Flag Flag::standard(int n) { return from_frame(Mat::identity(n)); }

Flag Flag::reversed(int n) {
  Mat k(n, n);
  for (int j = 0; j < n; ++j) k(n - 1 - j, j) = 1.0;
  return from_frame(k);
}

double flag_distance(const Flag& a, const Flag& b) {
  if (a.n() != b.n()) fail(ErrorCode::kDimensionMismatch, "flags of different dimension");
  double d = 0.0;
  for (int i = 1; i < a.n(); ++i) d = std::max(d, frobenius_norm(a.projector(i) - b.projector(i)));
  return d;
}

Transversality transverse(const Flag& a, const Flag& b, const Tolerances& tol) {
  if (a.n() != b.n()) fail(ErrorCode::kDimensionMismatch, "flags of different dimension");
  const int n = a.n();
  double margin = 1.0;
  for (int i = 1; i < n; ++i) {
    Mat m(n, n);
    for (int j = 0; j < i; ++j) m.set_col(j, a.frame().col(j));
    for (int j = 0; j < n - i; ++j) m.set_col(i + j, b.frame().col(j));
    margin = std::min(margin, std::abs(det(m)));
  }
  return {margin > tol.transverse, margin};
}

Flag act(const Mat& g, const Flag& f, const Tolerances& tol) { return Flag::from_basis(g * f.frame(), tol); }

}  // namespace rankr
