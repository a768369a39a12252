#pragma once

#include <vector>

#include "rankr/config.hpp"
#include "rankr/matrix.hpp"

namespace rankr {

/// Element of the Cartan subspace: a traceless real n-vector.
using CartanVec = Vec;

/// Trace form tr(x y^T); on Cartan vectors, the Euclidean product.
double inner(const Vec& x, const Vec& y);
double inner(const Mat& x, const Mat& y);

/// Subtracts the mean so that the coordinates sum to zero.
Vec project_traceless(Vec h);
bool is_traceless(const Vec& h, double tol = 1e-12);

/// iota(h)_i = -h_{n+1-i}
Vec opposition(const Vec& h);

enum class ChamberKind { kInterior, kWall, kOutside };

struct ChamberInfo {
  ChamberKind kind = ChamberKind::kInterior;
  /// 0-based i such that the simple root h_i - h_{i+1} vanishes.
  std::vector<int> vanishing;
};

ChamberInfo chamber_classify(const Vec& h, const Tolerances& tol = default_tolerances());

/// Minimum over positive roots of alpha(h / |h|); 0 on a wall. For this
/// root system the value for opposition(h) is the same.
double min_root_gap(const Vec& h, const Tolerances& tol = default_tolerances());

/// Positive root alpha_ij(H) = H_i - H_j, 0-based with i < j.
struct Root {
  int i = 0;
  int j = 0;
  double operator()(const Vec& h) const { return h[i] - h[j]; }
  friend bool operator==(const Root&, const Root&) = default;
};

std::vector<Root> positive_roots(int n);

/// Roots that are strictly positive on H.
std::vector<Root> horospherical_subalgebra(const Vec& h, const Tolerances& tol = default_tolerances());

/// Permutation w with perm[k] = w(k), 0-based.
struct WeylElem {
  std::vector<int> perm;
  int n() const { return static_cast<int>(perm.size()); }
  bool is_odd() const;
  friend bool operator==(const WeylElem&, const WeylElem&) = default;
};

WeylElem weyl_identity(int n);
/// The order-reversing permutation.
WeylElem longest_element(int n);
/// All n! permutations in lexicographic order.
std::vector<WeylElem> weyl_group(int n);

/// Representative m_w in SO(n): m_w e_k = e_{w(k)}, with the (w(0), 0)
/// entry negated for odd w.
Mat weyl_matrix(const WeylElem& w);

/// (w h)_{w(k)} = h_k, so that m_w diag(h) m_w^{-1} = diag(w h).
Vec weyl_act(const WeylElem& w, const Vec& h);

}  // namespace rankr
