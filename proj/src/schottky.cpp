#include "rankr/schottky.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rankr/error.hpp"
#include "rankr/isometries.hpp"
#include "rankr/kernel.hpp"

namespace rankr {

namespace {

Mat cayley(const Mat& a) {
  const Mat id = Mat::identity(a.n());
  return inverse(id - a) * (id + a);
}

Vec default_direction(int n) {
  Vec h(n);
  for (int i = 0; i < n; ++i) h[i] = n - 1 - 2 * i;
  return h * (1.0 / norm(h));
}

double margin_to(const Flag& f, const Neighborhood& u) { return u.radius - flag_distance(f, u.center); }

// Minimum margin of the current images against a target.
double min_margin(const std::vector<Flag>& flags, const Neighborhood& target, std::size_t* worst = nullptr) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < flags.size(); ++i) {
    const double v = margin_to(flags[i], target);
    if (v < m) {
      m = v;
      if (worst) *worst = i;
    }
  }
  return m;
}

std::vector<Flag> neighborhood_samples(const Neighborhood& u, int count, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> ur(0.8, 1.0);
  std::vector<Flag> out;
  out.reserve(static_cast<std::size_t>(count) + 1);
  out.push_back(u.center);
  for (int i = 0; i < count; ++i) out.push_back(sample_flag_at(u.center, ur(rng) * u.radius * (1.0 - 1e-12), rng));
  return out;
}

std::vector<Flag> complement_samples(const Neighborhood& u, int count, std::mt19937_64& rng) {
  std::vector<Flag> out;
  out.reserve(static_cast<std::size_t>(count));
  while (static_cast<int>(out.size()) < count) {
    Flag f = random_flag(u.center.n(), rng);
    if (margin_to(f, u) < 0.0) out.push_back(std::move(f));
  }
  return out;
}

// One containment condition: images of `sources` under step^(j k) must land
// in `target` for j = 1..multiples.
struct Condition {
  int generator = 0;
  int sign = 1;
  int target = 0;
  int multiples = 1;
  std::vector<Flag> sources;
  std::vector<int> origin;
};

std::vector<Condition> conditions_for(const PingPongTable& t, int m, int resolution, std::uint64_t seed) {
  std::vector<Condition> out;
  const int count = static_cast<int>(t.neighborhoods.size());
  for (int sign : {1, -1}) {
    Condition c;
    c.generator = m;
    c.sign = sign;
    c.target = sign > 0 ? t.attracting_index(m) : t.repelling_index(m);
    const int excluded = sign > 0 ? t.repelling_index(m) : t.attracting_index(m);
    c.multiples = t.is_axial(m) ? 1 : 3;
    for (int i = 0; i < count; ++i) {
      if (i == excluded) continue;
      std::mt19937_64 rng(seed * 1000003ULL + static_cast<std::uint64_t>(i));
      for (Flag& f : neighborhood_samples(t.neighborhoods[static_cast<std::size_t>(i)], resolution, rng)) {
        c.sources.push_back(std::move(f));
        c.origin.push_back(i);
      }
    }
    if (!t.is_axial(m)) {
      std::mt19937_64 rng(seed * 1000003ULL + 7919ULL * static_cast<std::uint64_t>(m + 1) + (sign > 0 ? 0 : 1));
      for (Flag& f : complement_samples(t.neighborhoods[static_cast<std::size_t>(c.target)], resolution, rng)) {
        c.sources.push_back(std::move(f));
        c.origin.push_back(-1);
      }
    }
    out.push_back(std::move(c));
  }
  return out;
}

void advance(std::vector<Flag>& flags, const Mat& step, const Tolerances& tol) {
  for (Flag& f : flags) f = act(step, f, tol);
}

}  // namespace

Flag random_flag(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) m(i, j) = nd(rng);
  }
  return Flag::from_frame(qr_householder(m).q);
}

Flag sample_flag_at(const Flag& center, double rho, std::mt19937_64& rng) {
  const int n = center.n();
  std::normal_distribution<double> nd(0.0, 1.0);
  Mat a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      a(i, j) = nd(rng);
      a(j, i) = -a(i, j);
    }
  }
  a *= 1.0 / frobenius_norm(a);
  auto at = [&](double t) { return Flag::from_frame(center.frame() * cayley(t * a)); };
  double lo = 0.0;
  double hi = std::max(rho, 1e-12);
  for (int it = 0; it < 60 && flag_distance(at(hi), center) < rho; ++it) hi *= 2.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = 0.5 * (lo + hi);
    (flag_distance(at(mid), center) < rho ? lo : hi) = mid;
  }
  return at(lo);
}

Mat adapt_frame(const Flag& plus, const Flag& minus, const Tolerances& tol) {
  if (plus.n() != minus.n()) fail(ErrorCode::kDimensionMismatch, "flags of different dimension");
  if (!transverse(plus, minus, tol).transverse) fail(ErrorCode::kNotTransverse, "adapted frame needs transverse flags");
  const int n = plus.n();
  Mat g(n, n);
  for (int i = 1; i <= n; ++i) {
    Vec v;
    if (i == 1) {
      v = plus.frame().col(0);
    } else {
      const Mat a = plus.frame().block(0, 0, n, i);
      const int wdim = n - i + 1;
      Mat comp = Mat::identity(n);
      if (wdim < n) comp = comp - minus.projector(wdim);
      const Svd s = svd_jacobi(comp * a, tol);
      v = a * s.v.col(i - 1);
    }
    v *= 1.0 / norm(v);
    if (dot(v, plus.frame().col(i - 1)) < 0.0) v *= -1.0;
    g.set_col(i - 1, v);
  }
  const double d = det(g);
  if (d < 0.0) {
    for (int r = 0; r < n; ++r) g(r, n - 1) = -g(r, n - 1);
  }
  return std::pow(std::abs(d), -1.0 / n) * g;
}

Mat make_axial(const Flag& plus, const Flag& minus, const CartanVec& l, const Tolerances& tol) {
  if (l.size() != plus.n()) fail(ErrorCode::kDimensionMismatch, "translation vector size");
  if (chamber_classify(l, tol).kind != ChamberKind::kInterior) {
    fail(ErrorCode::kNotInterior, "translation vector must be chamber-interior");
  }
  const Mat g = adapt_frame(plus, minus, tol);
  Vec e(l.size());
  for (int i = 0; i < l.size(); ++i) e[i] = std::exp(l[i]);
  return g * Mat::diagonal(e) * inverse(g);
}

Mat make_generic_parabolic(const Flag& f) {
  const int n = f.n();
  Mat u = Mat::identity(n);
  for (int i = 0; i + 1 < n; ++i) u(i, i + 1) = 1.0;
  return f.frame() * u * f.frame().transposed();
}

Mat PingPongTable::generator(int m) const {
  return power(bases[static_cast<std::size_t>(m)], powers[static_cast<std::size_t>(m)]);
}

std::vector<Mat> PingPongTable::generators() const {
  std::vector<Mat> out;
  for (int m = 0; m < generator_count(); ++m) out.push_back(generator(m));
  return out;
}

PingPongTable build_table(const std::vector<Flag>& flags, const std::vector<CartanVec>& l_choices,
                          const BuildOptions& options, const Tolerances& tol) {
  const int l = static_cast<int>(l_choices.size());
  const int p = static_cast<int>(flags.size()) - 2 * l;
  if (p < 0 || l + p < 1) fail(ErrorCode::kInvalidArgument, "need 2l + p flags with l + p >= 1");
  if (options.k_max < 1 || options.resolution < 0 || !(options.radius_policy > 0.0)) {
    fail(ErrorCode::kInvalidArgument, "bad build options");
  }
  double min_dist = std::numeric_limits<double>::infinity();
  double min_margin_t = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < flags.size(); ++i) {
    for (std::size_t j = i + 1; j < flags.size(); ++j) {
      const Transversality tr = transverse(flags[i], flags[j], tol);
      min_margin_t = std::min(min_margin_t, tr.margin);
      if (!tr.transverse) {
        fail(ErrorCode::kNotTransverse, "flags " + std::to_string(i) + " and " + std::to_string(j) + " are not transverse");
      }
      min_dist = std::min(min_dist, flag_distance(flags[i], flags[j]));
    }
  }
  const double radius = std::min({options.radius_policy, min_dist / 3.0, min_margin_t / 4.0});

  PingPongTable t;
  t.axial = l;
  const int n = flags.front().n();
  for (int m = 0; m < l; ++m) {
    const CartanVec& lm = l_choices[static_cast<std::size_t>(m)];
    const Flag& minus = flags[static_cast<std::size_t>(2 * m)];
    const Flag& plus = flags[static_cast<std::size_t>(2 * m + 1)];
    t.bases.push_back(make_axial(plus, minus, lm, tol));
    const Vec dir = lm * (1.0 / norm(lm));
    t.points.push_back(BoundaryPoint::make(minus, opposition(dir), tol));
    t.points.push_back(BoundaryPoint::make(plus, dir, tol));
  }
  for (int j = 0; j < p; ++j) {
    const Flag& f = flags[static_cast<std::size_t>(2 * l + j)];
    t.bases.push_back(make_generic_parabolic(f));
    t.points.push_back(BoundaryPoint::make(f, default_direction(n), tol));
  }
  for (const BoundaryPoint& pt : t.points) t.neighborhoods.push_back({pt.flag, radius});
  t.powers.assign(static_cast<std::size_t>(l + p), 1);

  for (int m = 0; m < l + p; ++m) {
    std::vector<Condition> conds = conditions_for(t, m, options.resolution, options.seed);
    const int multiples = conds.front().multiples;
    const int horizon = options.k_max * multiples;
    // margins[c][s - 1] is the worst margin after s steps.
    std::vector<std::vector<double>> margins(conds.size());
    std::vector<Mat> steps;
    for (const Condition& c : conds) {
      steps.push_back(c.sign > 0 ? t.bases[static_cast<std::size_t>(m)] : inverse(t.bases[static_cast<std::size_t>(m)]));
    }
    int found = 0;
    for (int s = 1; s <= horizon && found == 0; ++s) {
      for (std::size_t c = 0; c < conds.size(); ++c) {
        advance(conds[c].sources, steps[c], tol);
        margins[c].push_back(min_margin(conds[c].sources, t.neighborhoods[static_cast<std::size_t>(conds[c].target)]));
      }
      if (s % multiples != 0) continue;
      const int k = s / multiples;
      bool ok = true;
      for (std::size_t c = 0; c < conds.size() && ok; ++c) {
        for (int j = 1; j <= multiples && ok; ++j) ok = margins[c][static_cast<std::size_t>(j * k - 1)] > 0.0;
      }
      if (ok) found = k;
    }
    if (found == 0) {
      fail(ErrorCode::kPowerExhausted, "generator " + std::to_string(m) + " not certified up to power " +
                                           std::to_string(options.k_max));
    }
    t.powers[static_cast<std::size_t>(m)] = found;
  }
  return t;
}

std::string_view to_string(CertificationStatus status) {
  switch (status) {
    case CertificationStatus::kCertified: return "certified-at-resolution";
    case CertificationStatus::kFailed: return "failed";
    case CertificationStatus::kFailedPrecondition: return "failed-precondition";
  }
  return "unknown";
}

CertificationReport certify_klein(const PingPongTable& t, int resolution, std::uint64_t seed, const Tolerances& tol) {
  CertificationReport r;
  r.resolution = resolution;
  r.min_margin = std::numeric_limits<double>::infinity();
  if (t.generator_count() < 2) {
    r.status = CertificationStatus::kFailedPrecondition;
    r.reason = "Klein's criterion needs two factors, one with at least three elements";
    r.min_margin = 0.0;
    return r;
  }
  const std::size_t count = t.neighborhoods.size();
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = i + 1; j < count; ++j) {
      const Neighborhood& a = t.neighborhoods[i];
      const Neighborhood& b = t.neighborhoods[j];
      const double gap = flag_distance(a.center, b.center) - a.radius - b.radius;
      r.min_margin = std::min(r.min_margin, gap);
      if (gap > 0.0) continue;
      Witness w;
      w.source = static_cast<int>(i);
      w.target = static_cast<int>(j);
      w.margin = gap;
      w.flag = a.center;
      double best = std::numeric_limits<double>::infinity();
      for (int step = 0; step <= 400; ++step) {
        const double x = step / 400.0;
        Flag f;
        try {
          f = Flag::from_basis((1.0 - x) * a.center.frame() + x * b.center.frame(), tol);
        } catch (const Error&) {
          continue;
        }
        const double worst = std::max(flag_distance(f, a.center) / a.radius, flag_distance(f, b.center) / b.radius);
        if (worst < best) {
          best = worst;
          w.flag = f;
        }
      }
      r.status = CertificationStatus::kFailed;
      r.witness = w;
      r.reason = "neighborhoods " + std::to_string(i) + " and " + std::to_string(j) + " overlap";
      return r;
    }
  }
  r.generator_margins.assign(static_cast<std::size_t>(t.generator_count()), std::numeric_limits<double>::infinity());
  for (int m = 0; m < t.generator_count(); ++m) {
    const int k = t.powers[static_cast<std::size_t>(m)];
    for (Condition& c : conditions_for(t, m, resolution, seed)) {
      const Mat step = c.sign > 0 ? t.bases[static_cast<std::size_t>(m)] : inverse(t.bases[static_cast<std::size_t>(m)]);
      const Neighborhood& target = t.neighborhoods[static_cast<std::size_t>(c.target)];
      std::vector<Flag> images = c.sources;
      for (int j = 1; j <= c.multiples; ++j) {
        for (int s = 0; s < k; ++s) advance(images, step, tol);
        std::size_t worst = 0;
        const double mm = min_margin(images, target, &worst);
        r.samples_checked += static_cast<long>(images.size());
        double& gm = r.generator_margins[static_cast<std::size_t>(m)];
        gm = std::min(gm, mm);
        if (mm < r.min_margin) r.min_margin = mm;
        if (mm <= 0.0 && !r.witness) {
          r.witness = Witness{c.sources[worst], m, c.sign, j, c.origin[worst], c.target, mm};
        }
      }
    }
  }
  if (r.witness) {
    r.status = CertificationStatus::kFailed;
    r.reason = "an image left its target neighborhood";
  } else {
    r.status = CertificationStatus::kCertified;
  }
  return r;
}

NonelementaryReport check_nonelementary(const std::vector<Mat>& generators, const Tolerances& tol) {
  struct Fixed {
    int generator;
    Flag flag;
  };
  std::vector<Fixed> fixed;
  int usable = 0;
  for (std::size_t i = 0; i < generators.size(); ++i) {
    const Mat& g = generators[i];
    const SpectralAnalysis a = analyze(g, tol);
    const IsometryKind kind = classify(a, tol).kind;
    if (kind == IsometryKind::kRegularAxial) {
      const FixedPoints fp = fixed_points(a, tol);
      fixed.push_back({static_cast<int>(i), fp.attracting.flag});
      fixed.push_back({static_cast<int>(i), fp.repelling.flag});
      ++usable;
    } else if (kind == IsometryKind::kStrictlyParabolic && is_generic_parabolic(g, tol)) {
      fixed.push_back({static_cast<int>(i), parabolic_fixed_flag(g, tol)});
      ++usable;
    }
  }
  if (usable < 2) {
    fail(ErrorCode::kInsufficientGenerators, "need two regular axial or generic parabolic generators");
  }
  NonelementaryReport r;
  for (std::size_t i = 0; i < fixed.size(); ++i) {
    for (std::size_t j = i + 1; j < fixed.size(); ++j) {
      if (fixed[i].generator == fixed[j].generator) continue;
      if (!transverse(fixed[i].flag, fixed[j].flag, tol).transverse) {
        r.reason = "fixed flags of generators " + std::to_string(fixed[i].generator) + " and " +
                   std::to_string(fixed[j].generator) + " are not transverse";
        return r;
      }
    }
  }
  r.nonelementary = true;
  r.reason = "fixed flags pairwise transverse";
  return r;
}

NonelementaryReport check_nonelementary(const PingPongTable& table, const Tolerances& tol) {
  return check_nonelementary(table.bases, tol);
}

double min_word_separation(const std::vector<Mat>& generators, int max_length) {
  if (generators.empty()) fail(ErrorCode::kInsufficientGenerators, "no generators");
  std::vector<Mat> letters;
  for (const Mat& g : generators) {
    letters.push_back(g);
    letters.push_back(inverse(g));
  }
  const int n = generators.front().n();
  std::vector<Mat> values{Mat::identity(n)};
  struct Frame {
    Mat value;
    int last;
    int length;
  };
  std::vector<Frame> stack{{Mat::identity(n), -1, 0}};
  while (!stack.empty()) {
    Frame f = stack.back();
    stack.pop_back();
    if (f.length == max_length) continue;
    for (int a = static_cast<int>(letters.size()) - 1; a >= 0; --a) {
      if (f.last >= 0 && (a ^ 1) == f.last) continue;
      Mat v = f.value * letters[static_cast<std::size_t>(a)];
      values.push_back(v);
      stack.push_back({v, a, f.length + 1});
    }
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < values.size(); ++i) {
    for (std::size_t j = i + 1; j < values.size(); ++j) best = std::min(best, frobenius_norm(values[i] - values[j]));
  }
  return best;
}

}  // namespace rankr
