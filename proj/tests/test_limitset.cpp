#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <numbers>
#include <random>
#include <set>

#include "rankr/error.hpp"
#include "rankr/isometries.hpp"
#include "rankr/limitset.hpp"
#include "test_util.hpp"

using namespace rankr;
using rankr::testing::dist;
using rankr::testing::exp_diag;
using rankr::testing::random_orthogonal;
using rankr::testing::random_sl;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return ErrorCode::kInvalidArgument;
}

Flag line_flag(double angle) {
  const double c = std::cos(angle), s = std::sin(angle);
  return Flag::from_frame(Mat{{c, -s}, {s, c}});
}

PingPongTable circle_table() {
  const double q = std::numbers::pi / 4;
  return build_table({line_flag(0), line_flag(2 * q), line_flag(q), line_flag(3 * q)}, {Vec{1, -1}, Vec{1, -1}});
}

PingPongTable sl3_table() {
  std::mt19937_64 rng(24);
  std::vector<Flag> flags;
  for (int i = 0; i < 4; ++i) flags.push_back(random_flag(3, rng));
  return build_table(flags, {Vec{3, -1, -2}, Vec{2, 1, -3}}, BuildOptions{0.25, 60, 500, 3});
}

Mat plain_value(const Alphabet& a, const Letters& w) {
  Mat p = Mat::identity(a.n());
  for (int x : w) p = p * a.letters[static_cast<std::size_t>(x)];
  return p;
}

std::vector<Letters> words_of(const Alphabet& a, int max_length) {
  const std::function<std::optional<Letters>(const WordView&)> f = [](const WordView& w) {
    return std::optional<Letters>(w.word);
  };
  return map_words<Letters>(a, max_length, 1, f);
}

// Every sequence over the alphabet, filtered to reduced words.
std::vector<Letters> brute_force_words(int letters, int max_length) {
  std::vector<Letters> out{{}};
  std::vector<Letters> level{{}};
  for (int len = 1; len <= max_length; ++len) {
    std::vector<Letters> next;
    for (const Letters& w : level) {
      for (int a = 0; a < letters; ++a) {
        Letters v = w;
        v.push_back(a);
        next.push_back(v);
      }
    }
    level.clear();
    for (const Letters& w : next) {
      bool reduced = true;
      for (std::size_t i = 1; i < w.size(); ++i) reduced = reduced && (w[i] ^ 1) != w[i - 1];
      if (reduced) level.push_back(w);
    }
    out.insert(out.end(), level.begin(), level.end());
  }
  return out;
}

std::string bytes_of(const std::vector<LimitSample>& samples) {
  std::string s;
  auto put = [&](const void* p, std::size_t n) { s.append(static_cast<const char*>(p), n); };
  for (const LimitSample& x : samples) {
    for (int a : x.word) put(&a, sizeof a);
    for (double v : x.cartan_direction) put(&v, sizeof v);
    for (double v : x.angular_flag.frame().values()) put(&v, sizeof v);
    if (x.jordan_direction) {
      for (double v : *x.jordan_direction) put(&v, sizeof v);
    }
    const int kind = x.kind ? static_cast<int>(*x.kind) : -1;
    put(&kind, sizeof kind);
    s.push_back(x.overflow ? '1' : '0');
  }
  return s;
}

}  // namespace

TEST(Words, NamesRoundTrip) {
  EXPECT_EQ(word_name({}), "1");
  EXPECT_EQ(word_name({0, 3, 1}), "aBA");
  EXPECT_EQ(parse_word("aBA"), (Letters{0, 3, 1}));
  EXPECT_TRUE(parse_word("1").empty());
  EXPECT_EQ(code_of([] { parse_word("a-b"); }), ErrorCode::kMalformedInput);
  EXPECT_TRUE(is_cyclically_reduced(parse_word("ab")));
  EXPECT_FALSE(is_cyclically_reduced(parse_word("abA")));
  EXPECT_EQ(canonical_rotation(parse_word("Ba")), parse_word("aB"));
  EXPECT_EQ(canonical_rotation(parse_word("cab")), parse_word("abc"));
}

TEST(Enumerate, Counts) {
  std::mt19937_64 rng(60);
  const Alphabet two = Alphabet::from_generators({random_sl(rng, 3), random_sl(rng, 3)});
  EnumerateOptions o;
  o.max_length = 3;
  EXPECT_EQ(enumerate(two, o).size(), 53u);
  const Alphabet one = Alphabet::from_generators({random_sl(rng, 3)});
  for (int k = 1; k <= 6; ++k) {
    o.max_length = k;
    EXPECT_EQ(enumerate(one, o).size(), static_cast<std::size_t>(2 * k + 1));
    EXPECT_EQ(word_count(1, k), static_cast<std::uint64_t>(2 * k + 1));
  }
  const Alphabet three = Alphabet::from_generators({random_sl(rng, 2), random_sl(rng, 2), random_sl(rng, 2)});
  for (int l = 2; l <= 3; ++l) {
    for (int len = 1; len <= 4; ++len) {
      const std::uint64_t closed = 1 + 2ULL * l * (static_cast<std::uint64_t>(std::pow(2 * l - 1, len)) - 1) / (2 * l - 2);
      EXPECT_EQ(word_count(l, len), closed);
      EXPECT_EQ(word_count(l, len), brute_force_words(2 * l, len).size());
    }
  }
  o.max_length = 4;
  EXPECT_EQ(enumerate(three, o).size(), word_count(3, 4));
}

TEST(Enumerate, DepthFirstAlphabetOrder) {
  std::mt19937_64 rng(61);
  const Alphabet a = Alphabet::from_generators({random_sl(rng, 2), random_sl(rng, 2)});
  std::vector<Letters> expected = brute_force_words(4, 5);
  std::sort(expected.begin(), expected.end());
  EXPECT_EQ(words_of(a, 5), expected);
}

TEST(Enumerate, DeterministicAcrossWorkers) {
  const Alphabet a = Alphabet::from_table(sl3_table());
  EnumerateOptions o;
  o.max_length = 6;
  o.workers = 1;
  const std::string one = bytes_of(enumerate(a, o));
  o.workers = 4;
  EXPECT_EQ(bytes_of(enumerate(a, o)), one);
  o.workers = 8;
  EXPECT_EQ(bytes_of(enumerate(a, o)), one);
}

TEST(Enumerate, WorkerErrorsPropagate) {
  std::mt19937_64 rng(62);
  const Alphabet a = Alphabet::from_generators({random_sl(rng, 2), random_sl(rng, 2)});
  const std::function<std::optional<int>(const WordView&)> f = [](const WordView& w) -> std::optional<int> {
    if (w.word.size() == 3) fail(ErrorCode::kOverflow, "boom");
    return 0;
  };
  EXPECT_EQ(code_of([&] { map_words<int>(a, 4, 4, f); }), ErrorCode::kOverflow);
  EXPECT_EQ(code_of([] { map_words<int>(Alphabet{}, 2, 1, {}); }), ErrorCode::kInsufficientGenerators);
  EnumerateOptions o;
  o.max_length = 0;
  EXPECT_EQ(code_of([&] { enumerate(a, o); }), ErrorCode::kInvalidArgument);
}

TEST(Samples, MatchPlainProductsOnShortWords) {
  std::mt19937_64 rng(63);
  const Alphabet a = Alphabet::from_generators({random_sl(rng, 3, 0.5), random_sl(rng, 3, 0.5)});
  EnumerateOptions o;
  o.max_length = 4;
  for (const LimitSample& s : enumerate(a, o)) {
    const Mat p = plain_value(a, s.word);
    if (s.word.empty()) {
      EXPECT_EQ(norm(s.cartan_direction), 0.0);
      EXPECT_FALSE(s.kind.has_value());
      continue;
    }
    const Svd svd = svd_jacobi(p);
    Vec logs(3);
    for (int i = 0; i < 3; ++i) logs[i] = std::log(svd.sigma[i]);
    Vec h = project_traceless(logs);
    h *= 1.0 / norm(h);
    EXPECT_LT(norm(h - s.cartan_direction), 1e-9) << word_name(s.word);
    if (svd.sigma[0] / svd.sigma[1] > 1.01 && svd.sigma[1] / svd.sigma[2] > 1.01) {
      EXPECT_LT(flag_distance(Flag::from_frame(svd.u), s.angular_flag), 1e-7) << word_name(s.word);
    }
    EXPECT_EQ(s.jordan_direction.has_value(),
              *s.kind == IsometryKind::kRegularAxial || *s.kind == IsometryKind::kNonregularAxial);
    EXPECT_EQ(*s.kind, classify(p).kind) << word_name(s.word);
  }
}

TEST(Samples, GradedProductValue) {
  std::mt19937_64 rng(64);
  const Alphabet a = Alphabet::from_generators({random_sl(rng, 3), random_sl(rng, 3)});
  const std::function<std::optional<double>(const WordView&)> f = [&](const WordView& w) {
    const Mat p = plain_value(a, w.word);
    return std::optional<double>(dist(w.product.value(), p) / frobenius_norm(p));
  };
  for (double e : map_words<double>(a, 5, 1, f)) EXPECT_LT(e, 1e-12);
}

TEST(Samples, UnitDescendingDirections) {
  const Alphabet a = Alphabet::from_table(sl3_table());
  EnumerateOptions o;
  o.max_length = 7;
  o.min_length = 1;
  o.classify = false;
  for (const LimitSample& s : enumerate(a, o)) {
    EXPECT_NEAR(norm(s.cartan_direction), 1.0, 1e-12);
    EXPECT_NEAR(sum(s.cartan_direction), 0.0, 1e-12);
    EXPECT_GE(s.cartan_direction[0], s.cartan_direction[1]);
    EXPECT_GE(s.cartan_direction[1], s.cartan_direction[2]);
  }
}

TEST(Samples, RankOneSingleDirection) {
  const Alphabet a = Alphabet::from_table(circle_table());
  EnumerateOptions o;
  o.max_length = 6;
  o.min_length = 1;
  const Vec expected{1 / std::numbers::sqrt2, -1 / std::numbers::sqrt2};
  for (const LimitSample& s : enumerate(a, o)) EXPECT_LT(norm(s.cartan_direction - expected), 1e-12);
}

// |log sigma_i(c D^k c^-1) - k log d_i| <= log cond(c), whatever k.
TEST(Samples, PowerDirectionsApproachJordan) {
  std::mt19937_64 rng(65);
  const Vec l{2, 1, -3};
  for (int trial = 0; trial < 20; ++trial) {
    const Mat c = random_sl(rng, 3);
    const Mat g = c * exp_diag(l) * inverse(c);
    const double slack = std::log(condition_number(c)) + 1e-9;
    const Alphabet a = Alphabet::from_generators({g});
    EnumerateOptions o;
    o.max_length = 400;
    o.classify = false;
    const std::vector<LimitSample> samples = enumerate(a, o);
    const std::function<std::optional<Vec>(const WordView&)> f = [](const WordView& w) {
      return std::optional<Vec>(w.product.log_singular_values());
    };
    const std::vector<Vec> logs = map_words<Vec>(a, 400, 1, f);
    ASSERT_EQ(logs.size(), 801u);
    double previous = 1e300;
    for (std::size_t i = 0; i < logs.size(); ++i) {
      const Letters& w = samples[i].word;
      if (w.empty() || w[0] != 0) continue;
      const double k = static_cast<double>(w.size());
      for (int j = 0; j < 3; ++j) EXPECT_LE(std::abs(logs[i][j] - k * l[j]), slack) << trial << " " << k;
      if (w.size() % 100 == 0) {
        const double d = norm(samples[i].cartan_direction - l * (1.0 / norm(l)));
        EXPECT_LT(d, previous);
        previous = d;
      }
    }
    EXPECT_LT(previous, 2 * std::sqrt(3.0) * slack / (400 * norm(l)));
    EXPECT_TRUE(samples.back().overflow);
  }
}

TEST(Dynamics, MatchesSpectralAnalysis) {
  std::mt19937_64 rng(66);
  const Alphabet a = Alphabet::from_generators({random_sl(rng, 3), random_sl(rng, 3)});
  int regular = 0;
  for (const Letters& w : words_of(a, 4)) {
    if (w.empty() || !is_cyclically_reduced(w)) continue;
    const Mat p = plain_value(a, w);
    const IsometryClass c = classify(p);
    if (c.kind != IsometryKind::kRegularAxial) continue;
    if (min_root_gap(c.translation) < 0.05) continue;
    ++regular;
    const WordDynamics d = word_dynamics(a, w);
    EXPECT_TRUE(d.converged);
    EXPECT_LT(norm(d.translation - c.translation), 1e-8 * std::max(1.0, norm(c.translation))) << word_name(w);
    EXPECT_LT(flag_distance(d.attracting, fixed_points(p).attracting.flag), 1e-7) << word_name(w);
  }
  EXPECT_GT(regular, 20);
}

TEST(Dynamics, TableWordsConverge) {
  const Alphabet a = Alphabet::from_table(sl3_table());
  for (const Letters& w : words_of(a, 5)) {
    if (w.empty() || !is_cyclically_reduced(w)) continue;
    const WordDynamics d = word_dynamics(a, w);
    EXPECT_TRUE(d.converged) << word_name(w);
    EXPECT_NEAR(sum(d.translation), 0.0, 1e-9);
  }
}

// The cone of <g> holds L(g) and L(g^-1) = iota(L(g)).
TEST(Cone, SingleGenerator) {
  std::mt19937_64 rng(67);
  const Vec l{2, 1, -3};
  const Mat diag = exp_diag(l);
  const Mat c = random_sl(rng, 3);
  const Vec u = l * (1.0 / norm(l));
  for (const Mat& g : {diag, Mat(c * diag * inverse(c))}) {
    const std::vector<CartanVec> cone = limit_cone_sample(Alphabet::from_generators({g}), 8);
    ASSERT_EQ(cone.size(), 2u);
    EXPECT_LT(std::min(norm(cone[0] - u), norm(cone[1] - u)), 1e-9);
    EXPECT_LT(std::min(norm(cone[0] - opposition(u)), norm(cone[1] - opposition(u))), 1e-9);
  }
  const Vec symmetric{1.5, 0, -1.5};
  const std::vector<CartanVec> one = limit_cone_sample(Alphabet::from_generators({c * exp_diag(symmetric) * inverse(c)}), 8);
  ASSERT_EQ(one.size(), 1u);
  EXPECT_LT(norm(one[0] - symmetric * (1.0 / norm(symmetric))), 1e-9);
  const Alphabet conj = Alphabet::from_generators({c * diag * inverse(c)});
  const double d10 = one_sided_distance(directional_sample(conj, 10, 10), limit_cone_sample(conj, 2));
  const double d40 = one_sided_distance(directional_sample(conj, 40, 40), limit_cone_sample(conj, 2));
  EXPECT_LT(d40, d10);
  const Alphabet exact = Alphabet::from_generators({diag});
  EXPECT_LT(one_sided_distance(directional_sample(exact, 10, 1), limit_cone_sample(exact, 2)), 1e-12);
  EXPECT_LT(one_sided_distance(limit_cone_sample(exact, 2), directional_sample(exact, 10, 1)), 1e-12);
}

TEST(Cone, RankOneDistancesVanish) {
  const ConeReport r = cone_theorem_check(Alphabet::from_table(circle_table()), {4, 6}, 6);
  EXPECT_EQ(r.cone_size, 1u);
  for (double d : r.forward) EXPECT_LT(d, 1e-12);
  for (double d : r.backward) EXPECT_LT(d, 1e-12);
}

TEST(Cone, ConjugatesShareOneEntry) {
  std::mt19937_64 rng(68);
  const Alphabet a = Alphabet::from_generators({random_sl(rng, 3), random_sl(rng, 3)});
  const Tolerances& tol = default_tolerances();
  std::set<std::vector<long long>> expected;
  for (const Letters& w : words_of(a, 4)) {
    if (w.empty() || !is_cyclically_reduced(w)) continue;
    const CartanVec t = translation_vector(plain_value(a, w));
    if (norm(t) <= tol.translation || chamber_classify(t).kind != ChamberKind::kInterior) continue;
    std::vector<long long> key;
    for (double x : t * (1.0 / norm(t))) key.push_back(std::llround(x * 1e6));
    expected.insert(key);
  }
  std::set<std::vector<long long>> got;
  for (const CartanVec& d : limit_cone_sample(a, 4)) {
    std::vector<long long> key;
    for (double x : d) key.push_back(std::llround(x * 1e6));
    got.insert(key);
  }
  EXPECT_EQ(got, expected);
}

TEST(Cone, EmptySample) {
  const double t = 0.3;
  const Mat rot{{std::cos(t), -std::sin(t), 0}, {std::sin(t), std::cos(t), 0}, {0, 0, 1}};
  EXPECT_EQ(code_of([&] { cone_theorem_check(Alphabet::from_generators({rot}), {4}, 4); }), ErrorCode::kEmptySample);
}

TEST(Cone, OneSidedDistanceBruteForce) {
  std::mt19937_64 rng(69);
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<CartanVec> a, b;
    for (int i = 0; i < 200; ++i) a.push_back(rankr::testing::random_regular_direction(rng, 4));
    for (int i = 0; i < 150; ++i) b.push_back(rankr::testing::random_regular_direction(rng, 4));
    double worst = 0.0;
    for (const CartanVec& x : a) {
      double best = 1e300;
      for (const CartanVec& y : b) best = std::min(best, norm(x - y));
      worst = std::max(worst, best);
    }
    EXPECT_EQ(one_sided_distance(a, b), worst);
  }
  EXPECT_EQ(code_of([] { one_sided_distance({}, {Vec{1, -1}}); }), ErrorCode::kEmptySample);
}

TEST(Cone, Sl3TrendDecreases) {
  const ConeReport r = cone_theorem_check(Alphabet::from_table(sl3_table()), {4, 6, 8}, 9, 2);
  ASSERT_EQ(r.forward.size(), 3u);
  EXPECT_LT(r.forward[2], r.forward[0]);
  EXPECT_GT(r.cone_size, 100u);
}

TEST(Minimality, ContainmentAndApproach) {
  const PingPongTable t = sl3_table();
  MinimalityOptions o;
  o.target_length = 5;
  o.orbit_length = 7;
  o.containment_max = 6;
  o.eps = 0.08;
  const MinimalityReport r = minimality_check(t, o);
  EXPECT_EQ(r.containment_inside, r.containment_checked);
  EXPECT_GT(r.worst_containment_margin, 0.0);
  EXPECT_EQ(r.targets, 4 * 81);
  EXPECT_EQ(r.approached, r.targets);
  for (int len : r.first_length) EXPECT_LE(len, 7);
}

TEST(Minimality, RankOne) {
  MinimalityOptions o;
  o.target_length = 4;
  o.orbit_length = 6;
  o.containment_max = 6;
  const MinimalityReport r = minimality_check(circle_table(), o);
  EXPECT_EQ(r.containment_inside, r.containment_checked);
  EXPECT_EQ(r.approached, r.targets);
}

TEST(Product, RankOneAlwaysSucceeds) {
  const ProductReport r = product_structure_check(circle_table(), 6, 0.1, 100, 3, 4);
  EXPECT_EQ(r.pairs, 100);
  EXPECT_EQ(r.fraction, 1.0);
}

TEST(Product, Sl3Deterministic) {
  const PingPongTable t = sl3_table();
  const ProductReport a = product_structure_check(t, 7, 0.1, 50, 5, 4, 1);
  const ProductReport b = product_structure_check(t, 7, 0.1, 50, 5, 4, 3);
  EXPECT_EQ(a.successes, b.successes);
  EXPECT_GT(a.fraction, 0.5);
}

TEST(AxialDensity, Tables) {
  const AxialDensityReport circle = axial_density_check(circle_table(), 6, 0.1);
  EXPECT_EQ(circle.within_eps, 1.0);
  const AxialDensityReport sl3 = axial_density_check(sl3_table(), 5, 0.1);
  EXPECT_EQ(sl3.samples, 4 * 81);
  EXPECT_EQ(sl3.within_eps, 1.0);
  EXPECT_LT(sl3.worst_distance, 0.1);
}
