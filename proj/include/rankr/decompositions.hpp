#pragma once

#include "rankr/config.hpp"
#include "rankr/flag.hpp"
#include "rankr/lie.hpp"
#include "rankr/matrix.hpp"

namespace rankr {

/// g = k1 exp(diag h) k2 with h descending.
struct KAK {
  Mat k1;
  CartanVec h;
  Mat k2;
};

/// g = k exp(diag a) nplus with nplus unit upper triangular.
struct KAN {
  Mat k;
  CartanVec a;
  Mat nplus;
};

/// Left singular vectors are sign-normalized so that the largest-magnitude
/// entry of each is positive; a residual det -1 is absorbed by the last one.
KAK cartan_decompose(const Mat& g, const Tolerances& tol = default_tolerances());

/// H(x, y) for x = gx.o and y = gy.o.
CartanVec cartan_vector(const Mat& gx, const Mat& gy, const Tolerances& tol = default_tolerances());

/// d(x, y) = |H(x, y)|
double distance(const Mat& gx, const Mat& gy, const Tolerances& tol = default_tolerances());

KAN iwasawa(const Mat& g, const Tolerances& tol = default_tolerances());

/// Flag of the K-factor of the Iwasawa decomposition.
Flag iwasawa_projection(const Mat& g, const Tolerances& tol = default_tolerances());

/// The w with g in N+ m_w P, read off from ranks of the lower-left blocks.
/// Throws IllConditionedCell when a decisive singular value sits within a
/// decade of the rank threshold.
WeylElem bruhat_cell(const Mat& g, const Tolerances& tol = default_tolerances());

/// kappa(n) = iwasawa_projection(n m_{w*})
Flag kappa(const Mat& nplus, const Tolerances& tol = default_tolerances());

}  // namespace rankr
