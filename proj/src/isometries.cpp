#include "rankr/isometries.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rankr/error.hpp"

namespace rankr {

namespace {

struct Block {
  Mat basis;
  bool real = true;
  bool defective = false;
  bool decide = false;  // defectiveness is settled from the restricted block
  std::complex<double> mu;
  std::vector<std::complex<double>> members;
  double dev = 0.0;
  int start = 0;
};

Mat shifted_operator(const Mat& g, std::complex<double> mu, bool real) {
  const Mat id = Mat::identity(g.n());
  if (real) return g - mu.real() * id;
  return g * g - 2.0 * mu.real() * g + std::norm(mu) * id;
}

double projector_change(const Mat& a, const Mat& b) {
  return frobenius_norm(a * a.transposed() - b * b.transposed());
}

// Shifted inverse subspace iteration towards the invariant subspace of the
// eigenvalues within dev of mu; gap is the distance to the rest.
Mat refine_subspace(const Mat& g, Mat x, std::complex<double> mu, bool real, double dev, double gap) {
  if (x.cols() == g.n() || !(gap > dev)) return x;
  const Mat op = inverse(shifted_operator(g, mu + 0.1 * (gap - dev) + dev, real));
  for (int it = 0; it < 80; ++it) {
    Mat y;
    try {
      y = qr_householder(op * x).q.block(0, 0, g.n(), x.cols());
    } catch (const Error&) {
      break;
    }
    const double change = projector_change(x, y);
    x = y;
    if (change < 1e-14) break;
  }
  return x;
}

double distance_to_rest(const std::vector<EigenCluster>& spectrum, const std::vector<std::complex<double>>& group,
                        std::complex<double> mu) {
  double gap = std::numeric_limits<double>::infinity();
  for (const EigenCluster& c : spectrum) {
    for (auto z : c.members) {
      for (auto w : {z, std::conj(z)}) {
        bool inside = false;
        for (auto q : group) inside = inside || q == w || q == std::conj(w);
        if (!inside) gap = std::min({gap, std::abs(w - mu), std::abs(w - std::conj(mu))});
      }
    }
  }
  return gap;
}

// Splits a diagonalizable cluster into groups of nearly equal members, each
// refined to an exact invariant subspace. A group may still hide a Jordan
// block; that is settled once the restricted block is known.
std::vector<Block> split_cluster(const Mat& g, const std::vector<EigenCluster>& spectrum, const EigenCluster& c,
                                 const Tolerances& tol) {
  const int n = g.n();
  std::vector<std::complex<double>> members = c.members;
  std::sort(members.begin(), members.end(), [](auto a, auto b) {
    if (std::abs(a) != std::abs(b)) return std::abs(a) > std::abs(b);
    return a.real() > b.real();
  });
  const double scale = frobenius_norm(g);
  std::vector<Block> out;
  std::size_t i = 0;
  while (i < members.size()) {
    std::size_t j = i + 1;
    while (j < members.size() && std::abs(members[j] - members[j - 1]) <= 1e-5 * std::abs(members[j - 1])) ++j;
    const std::vector<std::complex<double>> group(members.begin() + static_cast<long>(i),
                                                  members.begin() + static_cast<long>(j));
    const int k = static_cast<int>(group.size());
    std::complex<double> mu = 0.0;
    for (auto z : group) mu += z;
    mu /= static_cast<double>(k);
    Block b;
    b.real = c.is_real();
    b.mu = mu;
    b.decide = k > 1;
    b.members = group;
    for (auto z : group) b.dev = std::max(b.dev, std::abs(z - mu));
    const int dim = b.real ? k : 2 * k;
    const Mat op = (1.0 / (b.real ? scale : scale * scale)) * shifted_operator(g, mu, b.real);
    const Svd sv = svd_jacobi(power(op, k), tol);
    b.basis = refine_subspace(g, sv.v.block(0, n - dim, n, dim), mu, b.real, b.dev,
                              distance_to_rest(spectrum, group, mu));
    out.push_back(b);
    i = j;
  }
  return out;
}

double min_gap(const Vec& h) {
  double gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i + 1 < h.size(); ++i) gap = std::min(gap, h[i] - h[i + 1]);
  return gap;
}

Mat nilpotent_log(const Mat& unip) {
  const int n = unip.n();
  const Mat x = unip - Mat::identity(n);
  Mat term = x;
  Mat out(n, n);
  for (int m = 1; m < n; ++m) {
    out += ((m % 2 == 1) ? 1.0 : -1.0) / m * term;
    term = term * x;
  }
  return out;
}

}  // namespace

std::string_view to_string(IsometryKind kind) {
  switch (kind) {
    case IsometryKind::kElliptic: return "elliptic";
    case IsometryKind::kRegularAxial: return "regular-axial";
    case IsometryKind::kNonregularAxial: return "nonregular-axial";
    case IsometryKind::kStrictlyParabolic: return "strictly-parabolic";
    case IsometryKind::kMixedParabolic: return "mixed-parabolic";
  }
  return "unknown";
}

std::optional<IsometryKind> parse_isometry_kind(std::string_view s) {
  for (auto k : {IsometryKind::kElliptic, IsometryKind::kRegularAxial, IsometryKind::kNonregularAxial,
                 IsometryKind::kStrictlyParabolic, IsometryKind::kMixedParabolic}) {
    if (to_string(k) == s) return k;
  }
  return std::nullopt;
}

std::string_view to_string(EscapeOutcome outcome) {
  switch (outcome) {
    case EscapeOutcome::kEscaped: return "escaped";
    case EscapeOutcome::kFixedPointVisible: return "fixed-point-visible";
    case EscapeOutcome::kInconclusive: return "inconclusive";
  }
  return "unknown";
}

SpectralAnalysis analyze(const Mat& g, const Tolerances& tol) {
  if (!g.is_square()) fail(ErrorCode::kDimensionMismatch, "element must be square");
  const int n = g.n();
  SpectralAnalysis out;
  out.element = g;
  out.spectrum = eig_real(g, tol);

  std::vector<Block> blocks;
  for (std::size_t i = 0; i < out.spectrum.size(); ++i) {
    const EigenCluster& c = out.spectrum[i];
    if (!c.is_real() && c.conjugate < static_cast<int>(i)) continue;
    if (!c.defective && c.multiplicity > 1) {
      for (Block& b : split_cluster(g, out.spectrum, c, tol)) blocks.push_back(std::move(b));
    } else {
      Block b;
      b.real = c.is_real();
      b.defective = c.defective;
      b.mu = c.value;
      b.members = c.members;
      for (auto z : c.members) b.dev = std::max(b.dev, std::abs(z - c.value));
      b.basis = refine_subspace(g, c.basis, c.value, b.real, b.dev, distance_to_rest(out.spectrum, c.members, c.value));
      blocks.push_back(b);
    }
  }
  Mat s(n, n);
  int col = 0;
  for (Block& b : blocks) {
    if (col + b.basis.cols() > n) fail(ErrorCode::kIllConditionedSpectrum, "invariant subspaces overfill the space");
    b.start = col;
    for (int j = 0; j < b.basis.cols(); ++j) s.set_col(col + j, b.basis.col(j));
    col += b.basis.cols();
  }
  if (col != n) fail(ErrorCode::kIllConditionedSpectrum, "invariant subspaces do not fill the space");
  if (condition_number(s) > tol.spectrum_condition) {
    fail(ErrorCode::kIllConditionedSpectrum, "generalized eigenbasis is ill-conditioned");
  }
  if (det(s) < 0.0) {
    for (int i = 0; i < n; ++i) s(i, n - 1) = -s(i, n - 1);
  }
  out.basis = s;

  const Mat sinv = inverse(s);
  const Mat b = sinv * g * s;
  Mat eb(n, n);
  Mat hb(n, n);
  for (Block& blk : blocks) {
    const int m = blk.basis.cols();
    const Mat bb = b.block(blk.start, blk.start, m, m);
    if (blk.decide) {
      const Mat id = Mat::identity(m);
      const Mat p = blk.real ? bb - blk.mu.real() * id : bb * bb - 2.0 * blk.mu.real() * bb + std::norm(blk.mu) * id;
      const double slack = blk.real ? blk.dev : blk.dev * (2.0 * std::abs(blk.mu) + blk.dev);
      blk.defective = frobenius_norm(p) > 1e3 * slack + 1e-10 * (blk.real ? std::abs(blk.mu) : std::norm(blk.mu));
    }
    Mat e_part(m, m);
    Mat h_part(m, m);
    if (blk.real) {
      const double lam = trace(bb) / m;
      const double sg = lam < 0.0 ? -1.0 : 1.0;
      e_part = sg * Mat::identity(m);
      h_part = blk.defective ? std::abs(lam) * Mat::identity(m) : sg * bb;
    } else {
      const double r = std::pow(std::abs(det(bb)), 1.0 / m);
      h_part = r * Mat::identity(m);
      if (blk.defective) {
        const double a = trace(bb) / m;
        const Mat id = Mat::identity(m);
        Mat ss = bb;
        for (int it = 0; it < 100; ++it) {
          const Mat p = ss * ss - 2.0 * a * ss + r * r * id;
          const Mat dp = 2.0 * ss - 2.0 * a * id;
          const Mat step = p * inverse(dp);
          ss -= step;
          if (frobenius_norm(step) <= 1e-15 * frobenius_norm(ss)) break;
        }
        e_part = (1.0 / r) * ss;
      } else {
        e_part = (1.0 / r) * bb;
      }
    }
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        eb(blk.start + i, blk.start + j) = e_part(i, j);
        hb(blk.start + i, blk.start + j) = h_part(i, j);
      }
    }
  }
  out.parts.e = s * eb * sinv;
  out.parts.h = s * hb * sinv;
  out.parts.u = inverse(out.parts.e * out.parts.h) * g;

  Vec logs(n);
  int k = 0;
  for (const Block& blk : blocks) {
    for (auto z : blk.members) {
      const double l = std::log(std::abs(blk.defective ? blk.mu : z));
      logs[k++] = l;
      if (!blk.real) logs[k++] = l;
    }
  }
  std::sort(logs.begin(), logs.end(), std::greater<>());
  out.translation = project_traceless(logs);
  return out;
}

JordanParts jordan_decompose(const Mat& g, const Tolerances& tol) { return analyze(g, tol).parts; }

CartanVec translation_vector(const Mat& g, const Tolerances& tol) { return analyze(g, tol).translation; }

IsometryClass classify(const SpectralAnalysis& a, const Tolerances& tol) {
  const int n = a.element.n();
  if (frobenius_norm(a.element - Mat::identity(n)) <= tol.lin) fail(ErrorCode::kIdentityInput, "identity has no class");
  IsometryClass out;
  out.translation = a.translation;
  out.unipotent_deviation = frobenius_norm(a.parts.u - Mat::identity(n));
  out.moduli = Vec(n);
  int k = 0;
  for (const EigenCluster& c : a.spectrum) {
    for (auto z : c.members) out.moduli[k++] = std::abs(z);
  }
  const bool translating = norm(a.translation) > tol.translation;
  const bool unipotent = out.unipotent_deviation > tol.unipotent;
  if (!translating) {
    out.kind = unipotent ? IsometryKind::kStrictlyParabolic : IsometryKind::kElliptic;
  } else if (unipotent) {
    out.kind = IsometryKind::kMixedParabolic;
  } else {
    out.kind = chamber_classify(a.translation, tol).kind == ChamberKind::kInterior ? IsometryKind::kRegularAxial
                                                                                    : IsometryKind::kNonregularAxial;
  }
  return out;
}

IsometryClass classify(const Mat& g, const Tolerances& tol) {
  if (frobenius_norm(g - Mat::identity(g.n())) <= tol.lin) fail(ErrorCode::kIdentityInput, "identity has no class");
  return classify(analyze(g, tol), tol);
}

FixedPoints fixed_points(const SpectralAnalysis& a, const Tolerances& tol) {
  const double nl = norm(a.translation);
  if (nl <= tol.translation) fail(ErrorCode::kNotTranslating, "translation vector vanishes");
  const int n = a.basis.n();
  Mat rev(n, n);
  for (int j = 0; j < n; ++j) rev.set_col(j, a.basis.col(n - 1 - j));
  return {BoundaryPoint::make(Flag::from_basis(a.basis, tol), a.translation * (1.0 / nl), tol),
          BoundaryPoint::make(Flag::from_basis(rev, tol), opposition(a.translation) * (1.0 / nl), tol)};
}

FixedPoints fixed_points(const Mat& g, const Tolerances& tol) { return fixed_points(analyze(g, tol), tol); }

Contraction contraction_factor(const Mat& g, const Tolerances& tol) {
  const SpectralAnalysis a = analyze(g, tol);
  if (classify(a, tol).kind != IsometryKind::kRegularAxial) fail(ErrorCode::kNotRegularAxial, "element is not regular axial");
  return {min_gap(a.translation), min_gap(opposition(a.translation))};
}

bool is_generic_parabolic(const Mat& g, const Tolerances& tol) {
  SpectralAnalysis a;
  try {
    a = analyze(g, tol);
    if (classify(a, tol).kind != IsometryKind::kStrictlyParabolic) fail(ErrorCode::kNotParabolic, "not strictly parabolic");
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIdentityInput) fail(ErrorCode::kNotParabolic, "identity is not parabolic");
    throw;
  }
  const int n = g.n();
  return rank_tol(a.parts.u - Mat::identity(n), tol.rank) == n - 1;
}

Flag parabolic_fixed_flag(const Mat& g, const Tolerances& tol) {
  if (!is_generic_parabolic(g, tol)) fail(ErrorCode::kNotParabolic, "element is not generic parabolic");
  const int n = g.n();
  const Mat u = jordan_decompose(g, tol).u;
  Mat nil = u - Mat::identity(n);
  nil *= 1.0 / frobenius_norm(nil);
  Mat frame(n, n);
  Mat prev(n, n);
  Mat power_i = Mat::identity(n);
  for (int i = 1; i < n; ++i) {
    power_i = power_i * nil;
    const Svd s = svd_jacobi(power_i, tol);
    Mat q(n, n);
    for (int j = n - i; j < n; ++j) {
      const Vec v = s.v.col(j);
      q += outer(v, v);
    }
    const Mat d = q - prev;
    int best = 0;
    for (int j = 1; j < n; ++j) {
      if (norm(d.col(j)) > norm(d.col(best))) best = j;
    }
    Vec v = d.col(best);
    v *= 1.0 / norm(v);
    frame.set_col(i - 1, v);
    prev = q;
  }
  // Complete with the coordinate vector farthest from the span so far.
  Vec last(n);
  double best = -1.0;
  for (int k = 0; k < n; ++k) {
    Vec e(n);
    e[k] = 1.0;
    const Vec r = e - prev * e;
    if (norm(r) > best) {
      best = norm(r);
      last = r;
    }
  }
  frame.set_col(n - 1, last);
  return Flag::from_basis(frame, tol);
}

EscapeReport parabolic_escape_test(const Mat& g, const BoundaryPoint& eta, const std::vector<Flag>& samples, int jmax,
                                   std::optional<double> delta, const Tolerances& tol) {
  const int n = g.n();
  IsometryClass cls;
  try {
    cls = classify(g, tol);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::kIdentityInput) fail(ErrorCode::kNotParabolic, "identity is not parabolic");
    throw;
  }
  if (cls.kind != IsometryKind::kStrictlyParabolic) fail(ErrorCode::kNotParabolic, "element is not strictly parabolic");
  if (flag_distance(act(g, eta.flag, tol), eta.flag) > 1e-8) fail(ErrorCode::kNotFixed, "element does not fix eta");

  EscapeReport report;
  const Mat& k = eta.flag.frame();
  const Mat local = k.transposed() * g * k;
  const Mat y = nilpotent_log(local);
  double worst = 0.0;
  for (const Root& r : horospherical_subalgebra(eta.direction, tol)) worst = std::max(worst, std::abs(y(r.i, r.j)));
  if (worst <= 1e-9 * std::max(1.0, frobenius_norm(y))) {
    Mat rev(n, n);
    for (int j = 0; j < n; ++j) rev.set_col(j, k.col(n - 1 - j));
    report.outcome = EscapeOutcome::kFixedPointVisible;
    report.fixed_flag = Flag::from_basis(rev, tol);
    return report;
  }

  double d = delta.value_or(1.0);
  if (!delta) {
    for (const Flag& s : samples) d = std::min(d, transverse(eta.flag, s, tol).margin);
  }
  report.delta = d;
  const Mat ginv = inverse(g);
  bool inconclusive = false;
  for (const Flag& s : samples) {
    Flag fwd = s;
    Flag bwd = s;
    int last_inside = 0;
    for (int j = 1; j <= jmax; ++j) {
      fwd = act(g, fwd, tol);
      bwd = act(ginv, bwd, tol);
      if (transverse(eta.flag, fwd, tol).margin >= d || transverse(eta.flag, bwd, tol).margin >= d) last_inside = j;
    }
    if (last_inside == jmax) inconclusive = true;
    report.per_sample.push_back(last_inside + 1);
    report.escape_index = std::max(report.escape_index, last_inside + 1);
  }
  report.outcome = inconclusive ? EscapeOutcome::kInconclusive : EscapeOutcome::kEscaped;
  return report;
}

}  // namespace rankr
