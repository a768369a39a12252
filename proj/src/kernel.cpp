#include "rankr/kernel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "rankr/error.hpp"

namespace rankr {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double sign_of(double x) { return x < 0.0 ? -1.0 : 1.0; }

int sweep_cap(int n, const Tolerances& tol) { return tol.jacobi_sweep_factor * n * n; }

// Columns of a sorted by the given values, descending.
std::vector<int> descending_order(const Vec& v) {
  std::vector<int> idx(static_cast<std::size_t>(v.size()));
  std::iota(idx.begin(), idx.end(), 0);
  std::stable_sort(idx.begin(), idx.end(), [&](int a, int b) { return v[a] > v[b]; });
  return idx;
}

double column_spread(const Mat& a) {
  double lo = std::numeric_limits<double>::infinity();
  double hi = 0.0;
  for (int j = 0; j < a.cols(); ++j) {
    const double c = norm(a.col(j));
    lo = std::min(lo, c);
    hi = std::max(hi, c);
  }
  return lo > 0.0 ? hi / lo : std::numeric_limits<double>::infinity();
}

}  // namespace

QR qr_decompose(const Mat& g, const Tolerances& tol) {
  if (!g.is_square()) fail(ErrorCode::kDimensionMismatch, "qr_decompose needs a square matrix");
  const int n = g.n();
  Mat q(n, n);
  Mat r(n, n);
  for (int j = 0; j < n; ++j) {
    Vec v = g.col(j);
    const double col_norm = norm(v);
    for (int pass = 0; pass < 2; ++pass) {
      for (int i = 0; i < j; ++i) {
        double c = 0.0;
        for (int k = 0; k < n; ++k) c += q(k, i) * v[k];
        for (int k = 0; k < n; ++k) v[k] -= c * q(k, i);
        r(i, j) += c;
      }
    }
    const double nrm = norm(v);
    if (col_norm == 0.0 || nrm < tol.det * col_norm) {
      fail(ErrorCode::kSingularMatrix, "Gram-Schmidt pivot below threshold");
    }
    r(j, j) = nrm;
    for (int k = 0; k < n; ++k) q(k, j) = v[k] / nrm;
  }
  return {q, r};
}

QR qr_householder(const Mat& a) {
  const int n = a.rows();
  const int m = a.cols();
  Vec row_norms(n);
  for (int i = 0; i < n; ++i) row_norms[i] = norm(a.row(i));
  const std::vector<int> order = descending_order(row_norms);
  Mat r(n, m);
  for (int i = 0; i < n; ++i) r.set_row(i, a.row(order[static_cast<std::size_t>(i)]));
  Mat q = Mat::identity(n);  // accumulated as q^T during the sweep
  for (int k = 0; k < std::min(n - 1, m); ++k) {
    double scale = 0.0;
    for (int i = k; i < n; ++i) scale = std::max(scale, std::abs(r(i, k)));
    if (scale == 0.0) continue;
    Vec v(n);
    double s = 0.0;
    for (int i = k; i < n; ++i) {
      v[i] = r(i, k) / scale;
      s += v[i] * v[i];
    }
    const double alpha = -sign_of(v[k]) * std::sqrt(s);
    v[k] -= alpha;
    double vv = 0.0;
    for (int i = k; i < n; ++i) vv += v[i] * v[i];
    if (vv == 0.0) continue;
    for (int j = 0; j < m; ++j) {
      double d = 0.0;
      for (int i = k; i < n; ++i) d += v[i] * r(i, j);
      d = 2.0 * d / vv;
      for (int i = k; i < n; ++i) r(i, j) -= d * v[i];
    }
    for (int j = 0; j < n; ++j) {
      double d = 0.0;
      for (int i = k; i < n; ++i) d += v[i] * q(i, j);
      d = 2.0 * d / vv;
      for (int i = k; i < n; ++i) q(i, j) -= d * v[i];
    }
    for (int i = k + 1; i < n; ++i) r(i, k) = 0.0;
  }
  for (int k = 0; k < std::min(n, m); ++k) {
    if (r(k, k) < 0.0) {
      for (int j = 0; j < m; ++j) r(k, j) = -r(k, j);
      for (int j = 0; j < n; ++j) q(k, j) = -q(k, j);
    }
  }
  // a = P^T (q^T)^T r, i.e. rows of q^T are scattered back through the permutation.
  Mat qt = q.transposed();
  Mat out(n, n);
  for (int i = 0; i < n; ++i) out.set_row(order[static_cast<std::size_t>(i)], qt.row(i));
  return {out, r};
}

Svd svd_jacobi(const Mat& a, const Tolerances& tol) {
  if (a.rows() < a.cols()) fail(ErrorCode::kDimensionMismatch, "svd_jacobi needs rows >= cols");
  const int rows = a.rows();
  const int n = a.cols();
  Mat u = a;
  Mat v = Mat::identity(n);
  const double thresh = std::max(1e-15, 4.0 * n * kEps);
  const int cap = sweep_cap(std::max(n, 2), tol);
  bool converged = false;
  for (int sweep = 0; sweep < cap && !converged; ++sweep) {
    converged = true;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        double alpha = 0.0, beta = 0.0, gamma = 0.0;
        for (int i = 0; i < rows; ++i) {
          alpha += u(i, p) * u(i, p);
          beta += u(i, q) * u(i, q);
          gamma += u(i, p) * u(i, q);
        }
        if (alpha == 0.0 || beta == 0.0) continue;
        if (std::abs(gamma) <= thresh * std::sqrt(alpha) * std::sqrt(beta)) continue;
        converged = false;
        const double zeta = (beta - alpha) / (2.0 * gamma);
        const double t = std::abs(zeta) > 1e150
                             ? 0.5 / zeta
                             : sign_of(zeta) / (std::abs(zeta) + std::sqrt(1.0 + zeta * zeta));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double s = c * t;
        for (int i = 0; i < rows; ++i) {
          const double up = u(i, p), uq = u(i, q);
          u(i, p) = c * up - s * uq;
          u(i, q) = s * up + c * uq;
        }
        for (int i = 0; i < n; ++i) {
          const double vp = v(i, p), vq = v(i, q);
          v(i, p) = c * vp - s * vq;
          v(i, q) = s * vp + c * vq;
        }
      }
    }
  }
  if (!converged) fail(ErrorCode::kNoConvergence, "one-sided Jacobi sweep cap reached");
  Vec sigma(n);
  for (int j = 0; j < n; ++j) sigma[j] = norm(u.col(j));
  const std::vector<int> order = descending_order(sigma);
  Svd out{Mat(rows, n), Vec(n), Mat(n, n)};
  for (int j = 0; j < n; ++j) {
    const int src = order[static_cast<std::size_t>(j)];
    out.sigma[j] = sigma[src];
    Vec col = u.col(src);
    if (sigma[src] > 0.0) col *= 1.0 / sigma[src];
    out.u.set_col(j, col);
    out.v.set_col(j, v.col(src));
  }
  return out;
}

Vec singular_values(const Mat& g, const Tolerances& tol) {
  if (g.rows() < g.cols()) return singular_values(g.transposed(), tol);
  if (g.is_square()) {
    const Mat t = g.transposed();
    if (column_spread(t) > column_spread(g)) return svd_jacobi(t, tol).sigma;
  }
  return svd_jacobi(g, tol).sigma;
}

Svd svd(const Mat& g, const Tolerances& tol) {
  if (!g.is_square()) fail(ErrorCode::kDimensionMismatch, "svd needs a square matrix");
  // g^T v = u sigma  =>  g = v sigma u^T
  Svd t = svd_jacobi(g.transposed(), tol);
  return {t.v, t.sigma, t.u};
}

SymEig sym_eig(const Mat& s, const Tolerances& tol) {
  if (!s.is_square()) fail(ErrorCode::kDimensionMismatch, "sym_eig needs a square matrix");
  const int n = s.n();
  Mat a = s;
  Mat v = Mat::identity(n);
  const double frob = frobenius_norm(a);
  const int cap = sweep_cap(std::max(n, 2), tol);
  int sweep = 0;
  for (; sweep < cap; ++sweep) {
    double off = 0.0;
    for (int p = 0; p < n; ++p) {
      for (int q = p + 1; q < n; ++q) off += a(p, q) * a(p, q);
    }
    if (std::sqrt(off) <= kEps * 1e-2 * frob || off == 0.0) break;
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (std::abs(apq) <= 1e-300) continue;
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = std::abs(theta) > 1e150
                             ? 0.5 / theta
                             : sign_of(theta) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double sn = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p), akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k), aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p), vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }
  if (sweep == cap) fail(ErrorCode::kNoConvergence, "Jacobi eigensolver sweep cap reached");
  const Vec d = a.diag();
  const std::vector<int> order = descending_order(d);
  SymEig out{Vec(n), Mat(n, n)};
  for (int j = 0; j < n; ++j) {
    out.values[j] = d[order[static_cast<std::size_t>(j)]];
    out.vectors.set_col(j, v.col(order[static_cast<std::size_t>(j)]));
  }
  return out;
}

Mat sym_exp_log(SymFn fn, const Mat& s, const Tolerances& tol) {
  if (!s.is_square()) fail(ErrorCode::kDimensionMismatch, "sym_exp_log needs a square matrix");
  if (frobenius_norm(s - s.transposed()) > tol.lin * std::max(1.0, frobenius_norm(s))) {
    fail(ErrorCode::kNotSymmetric, "matrix is not symmetric");
  }
  const Mat sym = 0.5 * (s + s.transposed());
  const SymEig e = sym_eig(sym, tol);
  const int n = s.n();
  Vec f(n);
  for (int i = 0; i < n; ++i) {
    if (fn == SymFn::kExp) {
      f[i] = std::exp(e.values[i]);
    } else {
      if (!(e.values[i] > 0.0)) fail(ErrorCode::kNotPositiveDefinite, "log of a matrix that is not positive definite");
      f[i] = std::log(e.values[i]);
    }
  }
  Mat out = e.vectors * Mat::diagonal(f) * e.vectors.transposed();
  return 0.5 * (out + out.transposed());
}

int rank_tol(const Mat& m, double tol) {
  if (m.rows() == 0 || m.cols() == 0 || max_abs(m) == 0.0) return 0;
  const Vec s = singular_values(m);
  return rank_tol(m, tol, s[0]);
}

int rank_tol(const Mat& m, double tol, double scale) {
  if (m.rows() == 0 || m.cols() == 0 || max_abs(m) == 0.0) return 0;
  const Vec s = singular_values(m);
  int r = 0;
  for (double x : s) {
    if (x > tol * scale) ++r;
  }
  return r;
}

double condition_number(const Mat& m) {
  const Vec s = singular_values(m);
  const double lo = s[s.size() - 1];
  return lo > 0.0 ? s[0] / lo : std::numeric_limits<double>::infinity();
}

Mat nearest_orthogonal(const Mat& m) {
  Mat x = m;
  for (int it = 0; it < 100; ++it) {
    const Mat xi = inverse(x);
    const double gamma = std::sqrt(frobenius_norm(xi) / frobenius_norm(x));
    const Mat next = 0.5 * (gamma * x + (1.0 / gamma) * xi.transposed());
    const double step = frobenius_norm(next - x);
    x = next;
    if (step <= 1e-15 * std::sqrt(static_cast<double>(m.n()))) break;
  }
  return x;
}

// ---------------------------------------------------------------- eigenvalues

namespace {

using Work = std::array<std::array<double, kMaxDim + 1>, kMaxDim + 1>;

void balance(Work& a, int n) {
  constexpr double radix = 2.0;
  constexpr double sqrdx = radix * radix;
  bool done = false;
  while (!done) {
    done = true;
    for (int i = 1; i <= n; ++i) {
      double r = 0.0, c = 0.0;
      for (int j = 1; j <= n; ++j) {
        if (j != i) {
          c += std::abs(a[j][i]);
          r += std::abs(a[i][j]);
        }
      }
      if (c == 0.0 || r == 0.0) continue;
      double g = r / radix;
      double f = 1.0;
      const double s = c + r;
      while (c < g) {
        f *= radix;
        c *= sqrdx;
      }
      g = r * radix;
      while (c > g) {
        f /= radix;
        c /= sqrdx;
      }
      if ((c + r) / f < 0.95 * s) {
        done = false;
        g = 1.0 / f;
        for (int j = 1; j <= n; ++j) a[i][j] *= g;
        for (int j = 1; j <= n; ++j) a[j][i] *= f;
      }
    }
  }
}

void hessenberg(Work& a, int n) {
  for (int k = 1; k <= n - 2; ++k) {
    double scale = 0.0;
    for (int i = k + 1; i <= n; ++i) scale = std::max(scale, std::abs(a[i][k]));
    if (scale == 0.0) continue;
    std::array<double, kMaxDim + 1> v{};
    double s = 0.0;
    for (int i = k + 1; i <= n; ++i) {
      v[static_cast<std::size_t>(i)] = a[i][k] / scale;
      s += v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
    }
    const double alpha = -sign_of(v[static_cast<std::size_t>(k + 1)]) * std::sqrt(s);
    v[static_cast<std::size_t>(k + 1)] -= alpha;
    double vv = 0.0;
    for (int i = k + 1; i <= n; ++i) vv += v[static_cast<std::size_t>(i)] * v[static_cast<std::size_t>(i)];
    if (vv == 0.0) continue;
    for (int j = 1; j <= n; ++j) {
      double d = 0.0;
      for (int i = k + 1; i <= n; ++i) d += v[static_cast<std::size_t>(i)] * a[i][j];
      d = 2.0 * d / vv;
      for (int i = k + 1; i <= n; ++i) a[i][j] -= d * v[static_cast<std::size_t>(i)];
    }
    for (int i = 1; i <= n; ++i) {
      double d = 0.0;
      for (int j = k + 1; j <= n; ++j) d += a[i][j] * v[static_cast<std::size_t>(j)];
      d = 2.0 * d / vv;
      for (int j = k + 1; j <= n; ++j) a[i][j] -= d * v[static_cast<std::size_t>(j)];
    }
    for (int i = k + 2; i <= n; ++i) a[i][k] = 0.0;
  }
}

double copysign_of(double mag, double s) { return s >= 0.0 ? std::abs(mag) : -std::abs(mag); }

// Francis double-shift QR on an upper Hessenberg matrix (1-based).
void francis(Work& a, int n, std::vector<double>& wr, std::vector<double>& wi, int max_its) {
  double anorm = 0.0;
  for (int i = 1; i <= n; ++i) {
    for (int j = std::max(i - 1, 1); j <= n; ++j) anorm += std::abs(a[i][j]);
  }
  int nn = n;
  double t = 0.0;
  double p = 0.0, q = 0.0, r = 0.0, s = 0.0, w = 0.0, x = 0.0, y = 0.0, z = 0.0;
  while (nn >= 1) {
    int its = 0;
    int l = 0;
    do {
      for (l = nn; l >= 2; --l) {
        s = std::abs(a[l - 1][l - 1]) + std::abs(a[l][l]);
        if (s == 0.0) s = anorm;
        if (std::abs(a[l][l - 1]) + s == s) {
          a[l][l - 1] = 0.0;
          break;
        }
      }
      x = a[nn][nn];
      if (l == nn) {
        wr[static_cast<std::size_t>(nn)] = x + t;
        wi[static_cast<std::size_t>(nn)] = 0.0;
        --nn;
      } else {
        y = a[nn - 1][nn - 1];
        w = a[nn][nn - 1] * a[nn - 1][nn];
        if (l == nn - 1) {
          p = 0.5 * (y - x);
          q = p * p + w;
          z = std::sqrt(std::abs(q));
          x += t;
          if (q >= 0.0) {
            z = p + copysign_of(z, p);
            wr[static_cast<std::size_t>(nn - 1)] = wr[static_cast<std::size_t>(nn)] = x + z;
            if (z != 0.0) wr[static_cast<std::size_t>(nn)] = x - w / z;
            wi[static_cast<std::size_t>(nn - 1)] = wi[static_cast<std::size_t>(nn)] = 0.0;
          } else {
            wr[static_cast<std::size_t>(nn - 1)] = wr[static_cast<std::size_t>(nn)] = x + p;
            wi[static_cast<std::size_t>(nn)] = z;
            wi[static_cast<std::size_t>(nn - 1)] = -z;
          }
          nn -= 2;
        } else {
          if (its == max_its) fail(ErrorCode::kNoConvergence, "Francis QR iteration cap reached");
          if (its % 10 == 0 && its > 0) {
            t += x;
            for (int i = 1; i <= nn; ++i) a[i][i] -= x;
            s = std::abs(a[nn][nn - 1]) + std::abs(a[nn - 1][nn - 2]);
            y = x = 0.75 * s;
            w = -0.4375 * s * s;
          }
          ++its;
          int m = nn - 2;
          for (; m >= l; --m) {
            z = a[m][m];
            r = x - z;
            s = y - z;
            p = (r * s - w) / a[m + 1][m] + a[m][m + 1];
            q = a[m + 1][m + 1] - z - r - s;
            r = a[m + 2][m + 1];
            s = std::abs(p) + std::abs(q) + std::abs(r);
            p /= s;
            q /= s;
            r /= s;
            if (m == l) break;
            const double u = std::abs(a[m][m - 1]) * (std::abs(q) + std::abs(r));
            const double v = std::abs(p) * (std::abs(a[m - 1][m - 1]) + std::abs(z) + std::abs(a[m + 1][m + 1]));
            if (u + v == v) break;
          }
          for (int i = m + 2; i <= nn; ++i) {
            a[i][i - 2] = 0.0;
            if (i != m + 2) a[i][i - 3] = 0.0;
          }
          for (int k = m; k <= nn - 1; ++k) {
            if (k != m) {
              p = a[k][k - 1];
              q = a[k + 1][k - 1];
              r = 0.0;
              if (k != nn - 1) r = a[k + 2][k - 1];
              x = std::abs(p) + std::abs(q) + std::abs(r);
              if (x != 0.0) {
                p /= x;
                q /= x;
                r /= x;
              }
            }
            s = copysign_of(std::sqrt(p * p + q * q + r * r), p);
            if (s != 0.0) {
              if (k == m) {
                if (l != m) a[k][k - 1] = -a[k][k - 1];
              } else {
                a[k][k - 1] = -s * x;
              }
              p += s;
              x = p / s;
              y = q / s;
              z = r / s;
              q /= p;
              r /= p;
              for (int j = k; j <= nn; ++j) {
                p = a[k][j] + q * a[k + 1][j];
                if (k != nn - 1) {
                  p += r * a[k + 2][j];
                  a[k + 2][j] -= p * z;
                }
                a[k + 1][j] -= p * y;
                a[k][j] -= p * x;
              }
              const int mmin = nn < k + 3 ? nn : k + 3;
              for (int i = l; i <= mmin; ++i) {
                p = x * a[i][k] + y * a[i][k + 1];
                if (k != nn - 1) {
                  p += z * a[i][k + 2];
                  a[i][k + 2] -= p * r;
                }
                a[i][k + 1] -= p * q;
                a[i][k] -= p;
              }
            }
          }
        }
      }
    } while (l < nn - 1);
  }
}

struct Dsu {
  std::vector<int> parent;
  explicit Dsu(int n) : parent(static_cast<std::size_t>(n)) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int i) {
    while (parent[static_cast<std::size_t>(i)] != i) {
      parent[static_cast<std::size_t>(i)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(i)])];
      i = parent[static_cast<std::size_t>(i)];
    }
    return i;
  }
  void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

// Orthonormal basis of the k-dimensional subspace where p is smallest.
Mat smallest_right_vectors(const Mat& p, int k, const Tolerances& tol) {
  const Svd s = svd_jacobi(p, tol);
  const int n = p.cols();
  Mat out(n, k);
  for (int j = 0; j < k; ++j) out.set_col(j, s.v.col(n - k + j));
  return out;
}

bool spectral_less(std::complex<double> a, std::complex<double> b) {
  const double ma = std::abs(a), mb = std::abs(b);
  if (ma != mb) return ma > mb;
  if (a.real() != b.real()) return a.real() > b.real();
  return a.imag() < b.imag();
}

}  // namespace

std::vector<std::complex<double>> eigenvalues(const Mat& g, const Tolerances& tol) {
  if (!g.is_square()) fail(ErrorCode::kDimensionMismatch, "eigenvalues need a square matrix");
  const int n = g.n();
  Work a{};
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a[static_cast<std::size_t>(i + 1)][static_cast<std::size_t>(j + 1)] = g(i, j);
  }
  balance(a, n);
  hessenberg(a, n);
  std::vector<double> wr(static_cast<std::size_t>(n + 1)), wi(static_cast<std::size_t>(n + 1));
  francis(a, n, wr, wi, std::max(60, tol.jacobi_sweep_factor));
  std::vector<std::complex<double>> out;
  out.reserve(static_cast<std::size_t>(n));
  for (int i = 1; i <= n; ++i) out.emplace_back(wr[static_cast<std::size_t>(i)], wi[static_cast<std::size_t>(i)]);
  return out;
}

std::vector<EigenCluster> eig_real(const Mat& g, const Tolerances& tol) {
  const int n = g.n();
  const auto lam = eigenvalues(g, tol);
  Dsu dsu(n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      const double scale = std::max(std::abs(lam[static_cast<std::size_t>(i)]), std::abs(lam[static_cast<std::size_t>(j)]));
      if (std::abs(lam[static_cast<std::size_t>(i)] - lam[static_cast<std::size_t>(j)]) <= tol.eig_cluster * scale) dsu.unite(i, j);
    }
  }
  std::vector<EigenCluster> clusters;
  std::vector<int> root_to_cluster(static_cast<std::size_t>(n), -1);
  for (int i = 0; i < n; ++i) {
    const int root = dsu.find(i);
    int& c = root_to_cluster[static_cast<std::size_t>(root)];
    if (c < 0) {
      c = static_cast<int>(clusters.size());
      clusters.emplace_back();
    }
    clusters[static_cast<std::size_t>(c)].members.push_back(lam[static_cast<std::size_t>(i)]);
  }

  const double gnorm = frobenius_norm(g);
  const Mat id = Mat::identity(n);
  for (auto& c : clusters) {
    std::sort(c.members.begin(), c.members.end(), spectral_less);
    c.multiplicity = static_cast<int>(c.members.size());
    std::complex<double> mean = 0.0;
    for (auto z : c.members) mean += z;
    mean /= static_cast<double>(c.multiplicity);
    double spread = 0.0;
    for (auto z : c.members) spread = std::max(spread, std::abs(z - mean));
    const int m = c.multiplicity;
    if (std::abs(mean.imag()) <= tol.eig_cluster * std::abs(mean)) {
      c.value = mean.real();
      const Mat shifted = (1.0 / gnorm) * (g - mean.real() * id);
      c.basis = smallest_right_vectors(power(shifted, m), m, tol);
      const Mat b = c.basis.transposed() * g * c.basis;
      const double dev = frobenius_norm(b - mean.real() * Mat::identity(m));
      c.defective = dev > 1e3 * spread && dev > 1e-7 * std::abs(mean.real());
    } else {
      c.value = mean;
      if (mean.imag() < 0.0) continue;  // basis filled from the partner below
      const double a = mean.real();
      const double r2 = std::norm(mean);
      const Mat quad = (1.0 / (gnorm * gnorm)) * (g * g - 2.0 * a * g + r2 * id);
      c.basis = smallest_right_vectors(power(quad, m), 2 * m, tol);
      const Mat b = c.basis.transposed() * g * c.basis;
      const Mat pb = b * b - 2.0 * a * b + r2 * Mat::identity(2 * m);
      const double dev = frobenius_norm(pb);
      c.defective = dev > 1e3 * spread * 2.0 * std::abs(mean.imag()) && dev > 1e-7 * r2;
    }
  }
  std::stable_sort(clusters.begin(), clusters.end(),
                   [](const EigenCluster& a, const EigenCluster& b) { return spectral_less(a.value, b.value); });
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    auto& c = clusters[i];
    if (std::abs(c.value.imag()) == 0.0) continue;
    for (std::size_t j = 0; j < clusters.size(); ++j) {
      if (j == i || clusters[j].value.imag() * c.value.imag() >= 0.0) continue;
      if (clusters[j].multiplicity != c.multiplicity) continue;
      if (std::abs(clusters[j].value - std::conj(c.value)) <= tol.eig_cluster * std::abs(c.value)) {
        c.conjugate = static_cast<int>(j);
        break;
      }
    }
    if (c.conjugate < 0) fail(ErrorCode::kNoConvergence, "complex eigenvalue without a conjugate partner");
  }
  for (auto& c : clusters) {
    if (c.conjugate >= 0 && c.value.imag() < 0.0) {
      const auto& partner = clusters[static_cast<std::size_t>(c.conjugate)];
      c.basis = partner.basis;
      c.defective = partner.defective;
    }
  }
  return clusters;
}

}  // namespace rankr
