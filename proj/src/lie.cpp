#include "rankr/lie.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rankr/error.hpp"

namespace rankr {

double inner(const Vec& x, const Vec& y) {
  if (x.size() != y.size()) fail(ErrorCode::kDimensionMismatch, "inner product of unequal vectors");
  return dot(x, y);
}

double inner(const Mat& x, const Mat& y) {
  if (x.rows() != y.rows() || x.cols() != y.cols()) fail(ErrorCode::kDimensionMismatch, "inner product of unequal matrices");
  double s = 0.0;
  auto a = x.values();
  auto b = y.values();
  for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
  return s;
}

Vec project_traceless(Vec h) {
  if (h.size() == 0) return h;
  const double mean = sum(h) / h.size();
  for (double& x : h) x -= mean;
  return h;
}

bool is_traceless(const Vec& h, double tol) { return std::abs(sum(h)) <= tol * std::max(1.0, norm(h)); }

Vec opposition(const Vec& h) {
  const int n = h.size();
  Vec out(n);
  for (int i = 0; i < n; ++i) out[i] = -h[n - 1 - i];
  return out;
}

ChamberInfo chamber_classify(const Vec& h, const Tolerances& tol) {
  const double eps = tol.wall * norm(h);
  ChamberInfo info;
  bool outside = false;
  for (int i = 0; i + 1 < h.size(); ++i) {
    const double gap = h[i] - h[i + 1];
    if (gap < -eps) {
      outside = true;
    } else if (gap <= eps) {
      info.vanishing.push_back(i);
    }
  }
  if (outside) {
    info.kind = ChamberKind::kOutside;
    info.vanishing.clear();
  } else if (!info.vanishing.empty()) {
    info.kind = ChamberKind::kWall;
  }
  return info;
}

double min_root_gap(const Vec& h, const Tolerances& tol) {
  const double nh = norm(h);
  if (nh == 0.0) fail(ErrorCode::kZeroVector, "min_root_gap of the zero vector");
  double gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i + 1 < h.size(); ++i) gap = std::min(gap, h[i] - h[i + 1]);
  if (gap <= tol.wall * nh) return 0.0;
  return gap / nh;
}

std::vector<Root> positive_roots(int n) {
  std::vector<Root> out;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) out.push_back({i, j});
  }
  return out;
}

std::vector<Root> horospherical_subalgebra(const Vec& h, const Tolerances& tol) {
  const double nh = norm(h);
  if (nh == 0.0) fail(ErrorCode::kZeroVector, "horospherical subalgebra of the zero vector");
  std::vector<Root> out;
  for (const Root& r : positive_roots(h.size())) {
    if (r(h) > tol.wall * nh) out.push_back(r);
  }
  return out;
}

bool WeylElem::is_odd() const {
  std::vector<bool> seen(perm.size(), false);
  int transpositions = 0;
  for (std::size_t i = 0; i < perm.size(); ++i) {
    if (seen[i]) continue;
    int len = 0;
    for (std::size_t j = i; !seen[j]; j = static_cast<std::size_t>(perm[j])) {
      seen[j] = true;
      ++len;
    }
    transpositions += len - 1;
  }
  return transpositions % 2 == 1;
}

WeylElem weyl_identity(int n) {
  WeylElem w;
  w.perm.resize(static_cast<std::size_t>(n));
  std::iota(w.perm.begin(), w.perm.end(), 0);
  return w;
}

WeylElem longest_element(int n) {
  WeylElem w = weyl_identity(n);
  std::reverse(w.perm.begin(), w.perm.end());
  return w;
}

std::vector<WeylElem> weyl_group(int n) {
  std::vector<WeylElem> out;
  WeylElem w = weyl_identity(n);
  do {
    out.push_back(w);
  } while (std::next_permutation(w.perm.begin(), w.perm.end()));
  return out;
}

Mat weyl_matrix(const WeylElem& w) {
  const int n = w.n();
  Mat m(n, n);
  for (int k = 0; k < n; ++k) m(w.perm[static_cast<std::size_t>(k)], k) = 1.0;
  if (w.is_odd()) m(w.perm[0], 0) = -1.0;
  return m;
}

Vec weyl_act(const WeylElem& w, const Vec& h) {
  Vec out(h.size());
  for (int k = 0; k < h.size(); ++k) out[w.perm[static_cast<std::size_t>(k)]] = h[k];
  return out;
}

}  // namespace rankr
