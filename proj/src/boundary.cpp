#include "rankr/boundary.hpp"

#include <algorithm>

#include "rankr/decompositions.hpp"
#include "rankr/error.hpp"

namespace rankr {

BoundaryPoint BoundaryPoint::make(Flag flag, const CartanVec& direction, const Tolerances& tol) {
  if (direction.size() != flag.n()) fail(ErrorCode::kDimensionMismatch, "direction and flag sizes differ");
  const double nh = norm(direction);
  if (nh == 0.0) fail(ErrorCode::kZeroVector, "boundary direction is zero");
  const Vec h = project_traceless(direction * (1.0 / nh));
  if (chamber_classify(h, tol).kind == ChamberKind::kOutside) {
    fail(ErrorCode::kNotInterior, "boundary direction outside the closed chamber");
  }
  return {std::move(flag), h * (1.0 / norm(h))};
}

bool BoundaryPoint::is_regular(const Tolerances& tol) const {
  return chamber_classify(direction, tol).kind == ChamberKind::kInterior;
}

BoundaryPoint act(const Mat& g, const BoundaryPoint& xi, const Tolerances& tol) {
  return {act(g, xi.flag, tol), xi.direction};
}

double busemann(const BoundaryPoint& xi, const Mat& gx, const Mat& gy, const Tolerances& tol) {
  const Mat& k = xi.flag.frame();
  const Vec ax = iwasawa(inverse(gx) * k, tol).a;
  const Vec ay = iwasawa(inverse(gy) * k, tol).a;
  return inner(xi.direction, ax) - inner(xi.direction, ay);
}

double directional_distance(const BoundaryPoint& xi, const Mat& gx, const Mat& gy, const Tolerances& tol) {
  return inner(xi.direction, cartan_vector(gx, gy, tol));
}

bool boundary_converges(const std::vector<BoundaryPoint>& seq, const BoundaryPoint& xi, double eps) {
  if (seq.empty()) return false;
  const std::size_t tail = std::max<std::size_t>(1, seq.size() / 4);
  for (std::size_t j = seq.size() - tail; j < seq.size(); ++j) {
    if (flag_distance(seq[j].flag, xi.flag) >= eps) return false;
    if (norm(seq[j].direction - xi.direction) >= eps) return false;
  }
  return true;
}

}  // namespace rankr
