#pragma once

#include <vector>

#include "rankr/config.hpp"
#include "rankr/flag.hpp"
#include "rankr/lie.hpp"
#include "rankr/matrix.hpp"

namespace rankr {

/// Point (k, H) of the geometric boundary: a flag and a unit direction in
/// the closed chamber.
struct BoundaryPoint {
  Flag flag;
  CartanVec direction;

  /// Normalizes the direction; throws ZeroVector for H = 0 and NotInterior
  /// when H is outside the closed chamber.
  static BoundaryPoint make(Flag flag, const CartanVec& direction, const Tolerances& tol = default_tolerances());
  bool is_regular(const Tolerances& tol = default_tolerances()) const;
};

BoundaryPoint act(const Mat& g, const BoundaryPoint& xi, const Tolerances& tol = default_tolerances());

/// B_xi(x, y) for x = gx.o, y = gy.o, from the Iwasawa A-projection.
double busemann(const BoundaryPoint& xi, const Mat& gx, const Mat& gy, const Tolerances& tol = default_tolerances());

/// <xi.direction, H(x, y)>
double directional_distance(const BoundaryPoint& xi, const Mat& gx, const Mat& gy,
                            const Tolerances& tol = default_tolerances());

/// True when the trailing quarter of the sequence (at least its last
/// element) lies within eps of xi in both flag and direction.
bool boundary_converges(const std::vector<BoundaryPoint>& seq, const BoundaryPoint& xi, double eps);

}  // namespace rankr
