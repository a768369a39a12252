#pragma once

#include <complex>
#include <vector>

#include "rankr/config.hpp"
#include "rankr/matrix.hpp"

namespace rankr {

struct QR {
  Mat q;
  Mat r;
};

/// Gram-Schmidt QR with one reorthogonalization pass. r has a positive
/// diagonal; throws SingularMatrix when a pivot norm drops below tol.det.
QR qr_decompose(const Mat& g, const Tolerances& tol = default_tolerances());

/// Householder QR with rows presorted by decreasing norm. Accurate on
/// row-graded input; no singularity check, r gets a nonnegative diagonal.
QR qr_householder(const Mat& a);

struct Svd {
  Mat u;
  Vec sigma;  // descending
  Mat v;      // a = u * diag(sigma) * v^T
};

/// One-sided (Hestenes) Jacobi on the columns of a square matrix.
Svd svd_jacobi(const Mat& a, const Tolerances& tol = default_tolerances());

/// Descending singular values.
Vec singular_values(const Mat& g, const Tolerances& tol = default_tolerances());

/// Left singular vectors and singular values of g (columns sorted by sigma).
Svd svd(const Mat& g, const Tolerances& tol = default_tolerances());

struct SymEig {
  Vec values;   // descending
  Mat vectors;  // columns
};

/// Cyclic Jacobi eigensolver for a symmetric matrix.
SymEig sym_eig(const Mat& s, const Tolerances& tol = default_tolerances());

enum class SymFn { kExp, kLog };

Mat sym_exp_log(SymFn fn, const Mat& s, const Tolerances& tol = default_tolerances());
inline Mat sym_exp(const Mat& s) { return sym_exp_log(SymFn::kExp, s); }
inline Mat sym_log(const Mat& s) { return sym_exp_log(SymFn::kLog, s); }

/// Number of singular values above tol * sigma_1.
int rank_tol(const Mat& m, double tol);
/// Number of singular values above tol * scale.
int rank_tol(const Mat& m, double tol, double scale);

/// sigma_max / sigma_min (infinity when singular).
double condition_number(const Mat& m);

/// Nearest orthogonal matrix (orthogonal polar factor) by Newton iteration.
Mat nearest_orthogonal(const Mat& m);

/// Eigenvalues by Hessenberg reduction and Francis double-shift QR,
/// unordered.
std::vector<std::complex<double>> eigenvalues(const Mat& g, const Tolerances& tol = default_tolerances());

struct EigenCluster {
  std::complex<double> value;                  // cluster mean
  int multiplicity = 0;
  std::vector<std::complex<double>> members;   // individual computed eigenvalues
  Mat basis;      // n x m (real) or n x 2m (complex pair), orthonormal columns
  bool defective = false;
  int conjugate = -1;  // index of the conjugate entry, -1 for real clusters
  bool is_real() const { return conjugate < 0; }
};

/// Eigenvalues grouped by relative proximity, each with an invariant
/// subspace basis. Order: descending modulus, then descending real part,
/// then ascending imaginary part. A conjugate pair shares one real basis.
std::vector<EigenCluster> eig_real(const Mat& g, const Tolerances& tol = default_tolerances());

}  // namespace rankr
