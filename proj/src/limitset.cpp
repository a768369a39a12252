#include "rankr/limitset.hpp"

#include <cctype>
#include <cmath>
#include <limits>
#include <map>
#include <random>

#include "rankr/kernel.hpp"

namespace rankr {

namespace {

Vec unit_or_zero(const Vec& v) {
  const double s = norm(v);
  return s > 0.0 ? v * (1.0 / s) : v;
}

double direction_distance(const Vec& a, const Vec& b) { return norm(a - b); }

// Applies letter a to a flag, one base step at a time for table letters.
struct FlagStepper {
  std::vector<Mat> steps;
  std::vector<int> repeats;


  Flag apply(int a, Flag f, const Tolerances& tol) const {
    for (int i = 0; i < repeats[static_cast<std::size_t>(a)]; ++i) f = act(steps[static_cast<std::size_t>(a)], f, tol);
    return f;
  }
};

}  // namespace

Alphabet Alphabet::from_generators(const std::vector<Mat>& generators) {
  Alphabet a;
  for (const Mat& g : generators) {
    a.steps.push_back(g);
    a.steps.push_back(inverse(g));
  }
  a.letters = a.steps;
  a.repeats.assign(a.steps.size(), 1);
  return a;
}

Alphabet Alphabet::from_table(const PingPongTable& table) {
  Alphabet a;
  for (int m = 0; m < table.generator_count(); ++m) {
    const Mat& base = table.bases[static_cast<std::size_t>(m)];
    const int k = table.powers[static_cast<std::size_t>(m)];
    a.steps.push_back(base);
    a.steps.push_back(inverse(base));
    a.repeats.push_back(k);
    a.repeats.push_back(k);
    a.letters.push_back(power(a.steps[a.steps.size() - 2], k));
    a.letters.push_back(power(a.steps.back(), k));
  }
  return a;
}

std::string word_name(const Letters& w) {
  if (w.empty()) return "1";
  std::string s;
  for (int a : w) {
    const char c = static_cast<char>('a' + a / 2);
    s.push_back(a % 2 == 0 ? c : static_cast<char>(std::toupper(c)));
  }
  return s;
}

Letters parse_word(const std::string& s) {
  Letters w;
  if (s == "1") return w;
  for (char c : s) {
    if (c >= 'a' && c <= 'z') {
      w.push_back(2 * (c - 'a'));
    } else if (c >= 'A' && c <= 'Z') {
      w.push_back(2 * (c - 'A') + 1);
    } else {
      fail(ErrorCode::kMalformedInput, "bad letter in word " + s);
    }
  }
  return w;
}

bool is_cyclically_reduced(const Letters& w) { return w.size() < 2 || (w.front() ^ 1) != w.back(); }

Letters canonical_rotation(const Letters& w) {
  Letters best = w;
  Letters r = w;
  for (std::size_t i = 1; i < w.size(); ++i) {
    std::rotate(r.begin(), r.begin() + 1, r.end());
    if (r < best) best = r;
  }
  return best;
}

namespace {

// D^-1 r D for upper triangular r.
Mat conjugate_by_scales(const Mat& r, const Vec& d) {
  const int n = r.n();
  Mat out(n, n);
  for (int i = 0; i < n; ++i) {
    out(i, i) = r(i, i);
    for (int j = i + 1; j < n; ++j) out(i, j) = r(i, j) * std::exp(d[j] - d[i]);
  }
  return out;
}

// Moves each row's max-abs of c into d.
void normalize_rows(Mat& c, Vec& d) {
  for (int i = 0; i < c.rows(); ++i) {
    double s = 0.0;
    for (int j = 0; j < c.cols(); ++j) s = std::max(s, std::abs(c(i, j)));
    if (s == 0.0) continue;
    for (int j = 0; j < c.cols(); ++j) c(i, j) /= s;
    d[i] += std::log(s);
  }
}

double max_entry(const Vec& d) { return *std::max_element(d.begin(), d.end()); }

Mat scaled_rows(const Mat& c, const Vec& d, double shift) {
  Mat out = c;
  for (int i = 0; i < c.rows(); ++i) {
    const double s = std::exp(d[i] - shift);
    for (int j = 0; j < c.cols(); ++j) out(i, j) *= s;
  }
  return out;
}

}  // namespace

GradedProduct GradedProduct::identity(int n) {
  GradedProduct p;
  p.q_ = Mat::identity(n);
  p.c_ = Mat::identity(n);
  p.d_ = Vec(n);
  return p;
}

GradedProduct GradedProduct::times(const Mat& g_transposed) const {
  const QR f = qr_householder(g_transposed * q_);
  GradedProduct p;
  p.q_ = f.q;
  p.c_ = conjugate_by_scales(f.r, d_) * c_;
  p.d_ = d_;
  normalize_rows(p.c_, p.d_);
  return p;
}

double GradedProduct::log_norm() const {
  const double m = max_entry(d_);
  return m + std::log(frobenius_norm(scaled_rows(c_, d_, m)));
}

Mat GradedProduct::scaled_value() const { return (q_ * scaled_rows(c_, d_, max_entry(d_))).transposed(); }

Mat GradedProduct::value() const { return std::exp(max_entry(d_)) * scaled_value(); }

// Left singular vectors of P are those of A = c^T D. Each pair of QR steps
// A = Q T, T^T = Q' T' leaves A' = T'^T of the same shape with U(A) = Q U(A')
// and shrinks the coupling across a scale gap by the square of its ratio.
// After two pairs, indices separated by a gap beyond 1e10 decouple and each
// block goes to Jacobi at its own scale.
GradedSvd GradedProduct::svd() const {
  const int n = q_.n();
  Mat c = c_;
  Vec d = d_;
  Mat acc = Mat::identity(n);
  for (int step = 0; step < 2; ++step) {
    const QR f1 = qr_householder(c.transposed());
    acc = acc * f1.q;
    c = conjugate_by_scales(f1.r, d);
    normalize_rows(c, d);
    const QR f2 = qr_householder(c.transposed());
    c = conjugate_by_scales(f2.r, d);
    normalize_rows(c, d);
  }
  Vec g(n);
  for (int i = 0; i < n; ++i) g[i] = d[i] + std::log(std::abs(c(i, i)));
  constexpr double kSplit = 23.0;  // log 1e10
  Mat u(n, n);
  std::vector<std::pair<double, int>> order;
  Vec log_sigma(n);
  int start = 0;
  while (start < n) {
    int end = start + 1;
    while (end < n && g[end - 1] - g[end] <= kSplit) ++end;
    const int m = end - start;
    double shift = -std::numeric_limits<double>::infinity();
    for (int i = start; i < end; ++i) shift = std::max(shift, d[i]);
    Mat block(m, m);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) block(i, j) = c(start + j, start + i) * std::exp(d[start + j] - shift);
    }
    const Svd s = svd_jacobi(block);
    for (int i = 0; i < m; ++i) {
      log_sigma[start + i] = shift + std::log(s.sigma[i]);
      for (int j = 0; j < m; ++j) u(start + j, start + i) = s.u(j, i);
    }
    start = end;
  }
  for (int i = 0; i < n; ++i) order.emplace_back(log_sigma[i], i);
  std::stable_sort(order.begin(), order.end(), [](const auto& x, const auto& y) { return x.first > y.first; });
  const Mat full = acc * u;
  GradedSvd out{Vec(n), Mat(n, n)};
  for (int k = 0; k < n; ++k) {
    out.log_sigma[k] = order[static_cast<std::size_t>(k)].first;
    const int col = order[static_cast<std::size_t>(k)].second;
    for (int i = 0; i < n; ++i) out.u(i, k) = full(i, col);
  }
  return out;
}

WordDynamics word_dynamics(const Alphabet& alphabet, const Letters& w, int max_periods) {
  if (w.empty()) fail(ErrorCode::kIdentityInput, "empty word has no dynamics");
  const int n = alphabet.n();
  WordDynamics out;
  Mat x = Mat::identity(n);
  Vec prev(n, std::numeric_limits<double>::quiet_NaN());
  Vec sums(n);
  for (int period = 1; period <= max_periods; ++period) {
    sums = Vec(n);
    for (auto it = w.rbegin(); it != w.rend(); ++it) {
      const auto a = static_cast<std::size_t>(*it);
      for (int rep = 0; rep < alphabet.repeats[a]; ++rep) {
        const QR f = qr_householder(alphabet.steps[a] * x);
        x = f.q;
        for (int i = 0; i < n; ++i) sums[i] += std::log(std::abs(f.r(i, i)));
      }
    }
    out.periods = period;
    double change = 0.0;
    double scale = 1.0;
    for (int i = 0; i < n; ++i) {
      change = std::max(change, std::abs(sums[i] - prev[i]));
      scale = std::max(scale, std::abs(sums[i]));
    }
    prev = sums;
    if (period >= 2 && change <= 1e-12 * scale) {
      out.converged = true;
      break;
    }
  }
  std::sort(sums.begin(), sums.end(), std::greater<>());
  out.translation = project_traceless(sums);
  out.attracting = Flag::from_frame(x);
  return out;
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  const unsigned hw = std::thread::hardware_concurrency();
  return hw == 0 ? 1 : static_cast<int>(hw);
}

LimitSample make_sample(const WordView& w, const SampleOptions& options, const Tolerances& tol) {
  LimitSample s;
  s.word = w.word;
  s.length = static_cast<int>(w.word.size());
  const int n = w.product.n();
  if (w.word.empty()) {
    s.cartan_direction = Vec(n);
    s.angular_flag = Flag::standard(n);
    return s;
  }
  s.overflow = w.product.log_norm() > kOverflowLogNorm;
  const GradedSvd svd = w.product.svd();
  s.cartan_direction = unit_or_zero(project_traceless(svd.log_sigma));
  s.angular_flag = Flag::from_frame(svd.u, tol);
  if (!options.classify) return s;
  try {
    const WordDynamics d = word_dynamics(w.alphabet, w.word);
    if (d.converged && norm(d.translation) > tol.translation * std::max(1.0, static_cast<double>(s.length))) {
      s.kind = chamber_classify(d.translation, tol).kind == ChamberKind::kInterior ? IsometryKind::kRegularAxial
                                                                                  : IsometryKind::kNonregularAxial;
      s.jordan_direction = unit_or_zero(d.translation);
    } else {
      Mat m = w.product.scaled_value();
      m *= std::pow(std::abs(det(m)), -1.0 / n);
      const IsometryClass c = classify(m, tol);
      s.kind = c.kind;
      if (c.kind == IsometryKind::kRegularAxial || c.kind == IsometryKind::kNonregularAxial) {
        s.jordan_direction = unit_or_zero(c.translation);
      }
    }
  } catch (const Error&) {
    s.kind.reset();
  }
  return s;
}

std::vector<LimitSample> enumerate(const Alphabet& alphabet, const EnumerateOptions& options, const Tolerances& tol) {
  if (options.max_length < 1) fail(ErrorCode::kInvalidArgument, "max_length must be at least 1");
  const SampleOptions so{options.classify};
  const std::function<std::optional<LimitSample>(const WordView&)> f =
      [&](const WordView& w) -> std::optional<LimitSample> {
    if (static_cast<int>(w.word.size()) < options.min_length) return std::nullopt;
    return make_sample(w, so, tol);
  };
  return map_words<LimitSample>(alphabet, options.max_length, options.workers, f);
}

std::uint64_t word_count(int l, int max_length) {
  if (l < 1 || max_length < 0) return 1;
  if (l == 1) return 2ULL * static_cast<std::uint64_t>(max_length) + 1ULL;
  std::uint64_t total = 1;
  std::uint64_t level = 2ULL * static_cast<std::uint64_t>(l);
  for (int k = 1; k <= max_length; ++k) {
    total += level;
    level *= 2ULL * static_cast<std::uint64_t>(l) - 1ULL;
  }
  return total;
}

std::vector<CartanVec> dedup_directions(std::vector<CartanVec> v) {
  std::map<std::vector<long long>, CartanVec> keyed;
  for (const CartanVec& d : v) {
    std::vector<long long> key;
    for (double x : d) key.push_back(std::llround(x * 1e9));
    keyed.emplace(std::move(key), d);
  }
  std::vector<CartanVec> out;
  out.reserve(keyed.size());
  for (auto& [key, d] : keyed) out.push_back(d);
  return out;
}

std::vector<CartanVec> limit_cone_sample(const Alphabet& alphabet, int max_length, int workers, const Tolerances& tol) {
  const std::function<std::optional<CartanVec>(const WordView&)> f =
      [&](const WordView& w) -> std::optional<CartanVec> {
    if (w.word.empty() || !is_cyclically_reduced(w.word) || canonical_rotation(w.word) != w.word) return std::nullopt;
    const WordDynamics d = word_dynamics(w.alphabet, w.word);
    if (!d.converged || norm(d.translation) <= tol.translation) return std::nullopt;
    if (chamber_classify(d.translation, tol).kind != ChamberKind::kInterior) return std::nullopt;
    return unit_or_zero(d.translation);
  };
  return dedup_directions(map_words<CartanVec>(alphabet, max_length, workers, f));
}

std::vector<CartanVec> directional_sample(const Alphabet& alphabet, int max_length, int min_length, int workers) {
  const std::function<std::optional<CartanVec>(const WordView&)> f =
      [&](const WordView& w) -> std::optional<CartanVec> {
    if (w.word.empty() || static_cast<int>(w.word.size()) < min_length) return std::nullopt;
    return unit_or_zero(project_traceless(w.product.log_singular_values()));
  };
  return dedup_directions(map_words<CartanVec>(alphabet, max_length, workers, f));
}

double one_sided_distance(const std::vector<CartanVec>& a, const std::vector<CartanVec>& b) {
  if (a.empty() || b.empty()) fail(ErrorCode::kEmptySample, "one-sided distance of an empty set");
  // Exact nearest neighbour, scanning b outward in its first coordinate.
  std::vector<CartanVec> sorted = b;
  std::sort(sorted.begin(), sorted.end(), [](const CartanVec& x, const CartanVec& y) { return x[0] < y[0]; });
  double worst = 0.0;
  for (const CartanVec& x : a) {
    const auto mid = std::lower_bound(sorted.begin(), sorted.end(), x[0],
                                      [](const CartanVec& y, double v) { return y[0] < v; });
    double best = std::numeric_limits<double>::infinity();
    for (auto it = mid; it != sorted.end() && (*it)[0] - x[0] < best; ++it) {
      best = std::min(best, direction_distance(x, *it));
    }
    for (auto it = mid; it != sorted.begin() && x[0] - (*(it - 1))[0] < best;) {
      --it;
      best = std::min(best, direction_distance(x, *it));
    }
    worst = std::max(worst, best);
  }
  return worst;
}

ConeReport cone_theorem_check(const Alphabet& alphabet, const std::vector<int>& p_lengths, int cone_length,
                              int workers, const Tolerances& tol) {
  ConeReport r;
  r.cone_length = cone_length;
  r.cone = limit_cone_sample(alphabet, cone_length, workers, tol);
  const std::vector<CartanVec>& cone = r.cone;
  r.cone_size = cone.size();
  if (cone.empty()) fail(ErrorCode::kEmptySample, "no regular-axial word up to the cone length");
  for (int lp : p_lengths) {
    const std::vector<CartanVec> p = directional_sample(alphabet, lp, lp, workers);
    r.lengths.push_back(lp);
    r.forward.push_back(one_sided_distance(p, cone));
    r.backward.push_back(one_sided_distance(cone, p));
    r.p_samples.push_back(p);
  }
  r.non_increasing = true;
  for (std::size_t i = 1; i < r.forward.size(); ++i) r.non_increasing = r.non_increasing && r.forward[i] <= r.forward[i - 1];
  return r;
}

MinimalityReport minimality_check(const PingPongTable& table, const MinimalityOptions& o, const Tolerances& tol) {
  if (table.generator_count() < 1) fail(ErrorCode::kInsufficientGenerators, "empty table");
  const Alphabet alphabet = Alphabet::from_table(table);
  MinimalityReport r;

  // Targets and containment from the angular flags of right-extended words.
  const int longest = std::max(o.target_length, o.containment_max);
  struct Angular {
    int length;
    Flag flag;
  };
  const std::function<std::optional<Angular>(const WordView&)> f = [&](const WordView& w) -> std::optional<Angular> {
    const int len = static_cast<int>(w.word.size());
    const bool target = len == o.target_length;
    const bool contained = len >= o.containment_min && len <= o.containment_max;
    if (!target && !contained) return std::nullopt;
    return Angular{len, Flag::from_frame(w.product.left_vectors(), tol)};
  };
  const std::vector<Angular> angular = map_words<Angular>(alphabet, longest, o.workers, f);

  r.worst_containment_margin = std::numeric_limits<double>::infinity();
  std::vector<const Flag*> targets;
  for (const Angular& a : angular) {
    if (a.length >= o.containment_min && a.length <= o.containment_max) {
      double best = -std::numeric_limits<double>::infinity();
      for (const Neighborhood& u : table.neighborhoods) best = std::max(best, u.radius - flag_distance(a.flag, u.center));
      ++r.containment_checked;
      if (best > 0.0) ++r.containment_inside;
      r.worst_containment_margin = std::min(r.worst_containment_margin, best);
    }
    if (a.length == o.target_length) targets.push_back(&a.flag);
  }

  // Orbit of the first attracting point, built by left extension so each
  // node costs one letter.
  const FlagStepper stepper{alphabet.steps, alphabet.repeats};
  const Flag xi0 = table.points[static_cast<std::size_t>(table.attracting_index(0))].flag;
  std::vector<std::vector<Flag>> by_length(static_cast<std::size_t>(o.orbit_length) + 1);
  struct Node {
    Flag flag;
    int first;
    int length;
  };
  std::vector<Node> stack{{xi0, -1, 0}};
  const int alphabet_size = 2 * table.generator_count();
  while (!stack.empty()) {
    Node node = std::move(stack.back());
    stack.pop_back();
    by_length[static_cast<std::size_t>(node.length)].push_back(node.flag);
    if (node.length == o.orbit_length) continue;
    for (int a = alphabet_size - 1; a >= 0; --a) {
      if (node.first >= 0 && (a ^ 1) == node.first) continue;
      stack.push_back({stepper.apply(a, node.flag, tol), a, node.length + 1});
    }
  }

  r.targets = static_cast<int>(targets.size());
  for (const Flag* t : targets) {
    int found = -1;
    double best = std::numeric_limits<double>::infinity();
    for (int len = 0; len <= o.orbit_length && found < 0; ++len) {
      for (const Flag& g : by_length[static_cast<std::size_t>(len)]) {
        const double d = flag_distance(g, *t);
        best = std::min(best, d);
        if (d < o.eps) {
          found = len;
          break;
        }
      }
    }
    r.first_length.push_back(found);
    if (found >= 0) ++r.approached;
    r.worst_distance = std::max(r.worst_distance, best);
  }
  if (r.containment_checked == 0) r.worst_containment_margin = 0.0;
  return r;
}

ProductReport product_structure_check(const PingPongTable& table, int max_length, double eps, int pairs,
                                      std::uint64_t seed, int min_length, int workers) {
  const Alphabet alphabet = Alphabet::from_table(table);
  EnumerateOptions eo;
  eo.max_length = max_length;
  eo.min_length = std::min(min_length, max_length);
  eo.workers = workers;
  eo.classify = false;
  const std::vector<LimitSample> samples = enumerate(alphabet, eo);
  std::vector<std::size_t> longest;
  for (std::size_t i = 0; i < samples.size(); ++i) {
    if (samples[i].length == max_length) longest.push_back(i);
  }
  ProductReport r;
  if (longest.size() < 2) fail(ErrorCode::kEmptySample, "too few long words for cross pairs");
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, longest.size() - 1);
  for (int p = 0; p < pairs; ++p) {
    const std::size_t i = longest[pick(rng)];
    std::size_t j = longest[pick(rng)];
    while (j == i) j = longest[pick(rng)];
    const Flag& f = samples[i].angular_flag;
    const Vec& h = samples[j].cartan_direction;
    bool ok = false;
    for (const LimitSample& s : samples) {
      if (direction_distance(s.cartan_direction, h) < eps && flag_distance(s.angular_flag, f) < eps) {
        ok = true;
        break;
      }
    }
    ++r.pairs;
    if (ok) ++r.successes;
  }
  r.fraction = r.pairs > 0 ? static_cast<double>(r.successes) / r.pairs : 0.0;
  return r;
}

AxialDensityReport axial_density_check(const PingPongTable& table, int max_length, double eps, int workers,
                                       const Tolerances& tol) {
  const Alphabet alphabet = Alphabet::from_table(table);
  struct Entry {
    bool sample;
    Flag flag;
    Vec direction;
  };
  const std::function<std::optional<Entry>(const WordView&)> f = [&](const WordView& w) -> std::optional<Entry> {
    if (w.word.empty()) return std::nullopt;
    if (static_cast<int>(w.word.size()) == max_length) {
      return Entry{true, Flag::from_frame(w.product.left_vectors(), tol),
                   unit_or_zero(project_traceless(w.product.log_singular_values()))};
    }
    return std::nullopt;
  };
  const std::function<std::optional<Entry>(const WordView&)> g = [&](const WordView& w) -> std::optional<Entry> {
    if (w.word.empty() || !is_cyclically_reduced(w.word)) return std::nullopt;
    const WordDynamics d = word_dynamics(w.alphabet, w.word);
    if (!d.converged || norm(d.translation) <= tol.translation) return std::nullopt;
    if (chamber_classify(d.translation, tol).kind != ChamberKind::kInterior) return std::nullopt;
    return Entry{false, d.attracting, unit_or_zero(d.translation)};
  };
  const std::vector<Entry> samples = map_words<Entry>(alphabet, max_length, workers, f);
  const std::vector<Entry> axial = map_words<Entry>(alphabet, max_length, workers, g);
  AxialDensityReport r;
  r.samples = static_cast<int>(samples.size());
  r.axial_words = static_cast<int>(axial.size());
  if (axial.empty() || samples.empty()) fail(ErrorCode::kEmptySample, "no axial words or samples");
  int within = 0;
  for (const Entry& s : samples) {
    double best = std::numeric_limits<double>::infinity();
    for (const Entry& a : axial) {
      best = std::min(best, std::max(flag_distance(s.flag, a.flag), direction_distance(s.direction, a.direction)));
    }
    r.worst_distance = std::max(r.worst_distance, best);
    if (best < eps) ++within;
  }
  r.within_eps = static_cast<double>(within) / r.samples;
  return r;
}

}  // namespace rankr
