#include "rankr/decompositions.hpp"

#include <cmath>
#include <string>

#include "rankr/error.hpp"
#include "rankr/kernel.hpp"

namespace rankr {

KAK cartan_decompose(const Mat& g, const Tolerances& tol) {
  const int n = g.n();
  Svd s = svd(g, tol);
  for (int j = 0; j < n; ++j) {
    int best = 0;
    for (int i = 1; i < n; ++i) {
      if (std::abs(s.u(i, j)) > std::abs(s.u(best, j))) best = i;
    }
    if (s.u(best, j) < 0.0) {
      for (int i = 0; i < n; ++i) {
        s.u(i, j) = -s.u(i, j);
        s.v(i, j) = -s.v(i, j);
      }
    }
  }
  if (det(s.u) < 0.0) {
    for (int i = 0; i < n; ++i) {
      s.u(i, n - 1) = -s.u(i, n - 1);
      s.v(i, n - 1) = -s.v(i, n - 1);
    }
  }
  Vec h(n);
  for (int i = 0; i < n; ++i) h[i] = std::log(s.sigma[i]);
  KAK out;
  out.k1 = s.u;
  out.h = project_traceless(h);
  out.k2 = nearest_orthogonal(s.v.transposed());
  return out;
}

CartanVec cartan_vector(const Mat& gx, const Mat& gy, const Tolerances& tol) {
  const Vec s = singular_values(inverse(gx) * gy, tol);
  Vec h(s.size());
  for (int i = 0; i < s.size(); ++i) h[i] = std::log(s[i]);
  return project_traceless(h);
}

double distance(const Mat& gx, const Mat& gy, const Tolerances& tol) { return norm(cartan_vector(gx, gy, tol)); }

KAN iwasawa(const Mat& g, const Tolerances& tol) {
  const QR f = qr_decompose(g, tol);
  const int n = g.n();
  KAN out;
  out.k = f.q;
  Vec a(n);
  for (int i = 0; i < n; ++i) a[i] = std::log(f.r(i, i));
  out.a = project_traceless(a);
  out.nplus = f.r;
  for (int i = 0; i < n; ++i) {
    const double d = f.r(i, i);
    for (int j = 0; j < n; ++j) out.nplus(i, j) /= d;
    out.nplus(i, i) = 1.0;
  }
  return out;
}

Flag iwasawa_projection(const Mat& g, const Tolerances& tol) { return Flag::from_frame(iwasawa(g, tol).k, tol); }

WeylElem bruhat_cell(const Mat& g, const Tolerances& tol) {
  const int n = g.n();
  const double scale = singular_values(g, tol)[0];
  const double eps = tol.rank;
  // r[i][j]: rank of rows i..n-1, columns 0..j-1 (0-based rows, j columns).
  std::vector<std::vector<int>> r(static_cast<std::size_t>(n + 1), std::vector<int>(static_cast<std::size_t>(n + 1), 0));
  for (int i = 0; i < n; ++i) {
    for (int j = 1; j <= n; ++j) {
      const Mat b = g.block(i, 0, n - i, j);
      const Vec s = singular_values(b, tol);
      int rank = 0;
      for (double x : s) {
        const double rel = x / scale;
        if (rel > eps / 10.0 && rel < eps * 10.0) {
          fail(ErrorCode::kIllConditionedCell, "lower-left block singular value near the rank threshold");
        }
        if (rel > eps) ++rank;
      }
      r[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = rank;
    }
  }
  WeylElem w;
  w.perm.assign(static_cast<std::size_t>(n), -1);
  std::vector<bool> used(static_cast<std::size_t>(n), false);
  for (int j = 1; j <= n; ++j) {
    int target = -1;
    for (int i = n - 1; i >= 0; --i) {
      const auto ui = static_cast<std::size_t>(i);
      const auto uj = static_cast<std::size_t>(j);
      if (r[ui][uj] - r[ui][uj - 1] == 1) {
        target = i;
        break;
      }
    }
    if (target < 0 || used[static_cast<std::size_t>(target)]) {
      fail(ErrorCode::kIllConditionedCell, "inconsistent rank pattern in column " + std::to_string(j));
    }
    used[static_cast<std::size_t>(target)] = true;
    w.perm[static_cast<std::size_t>(j - 1)] = target;
  }
  return w;
}

Flag kappa(const Mat& nplus, const Tolerances& tol) {
  return iwasawa_projection(nplus * weyl_matrix(longest_element(nplus.n())), tol);
}

}  // namespace rankr
