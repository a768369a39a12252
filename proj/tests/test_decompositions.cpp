#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rankr/decompositions.hpp"
#include "rankr/error.hpp"
#include "rankr/kernel.hpp"
#include "test_util.hpp"

using namespace rankr;
using rankr::testing::dist;
using rankr::testing::exp_diag;

namespace {

const double kPhi = (1.0 + std::sqrt(5.0)) / 2.0;

// Random element of P = M A N+: upper triangular, det 1, diagonal signs
// with an even number of minus signs.
Mat random_parabolic(std::mt19937_64& rng, int n) {
  Mat p = rankr::testing::random_unipotent(rng, n);
  const Vec a = rankr::testing::random_traceless(rng, n, 0.5);
  std::uniform_int_distribution<int> coin(0, 1);
  Vec m(n, 1.0);
  for (int i = 0; i + 1 < n; ++i) {
    if (coin(rng)) {
      m[i] = -1.0;
      m[n - 1] = -m[n - 1];
    }
  }
  return Mat::diagonal(m) * exp_diag(a) * p;
}

TEST(Cartan, Examples) {
  EXPECT_LT(norm(cartan_decompose(Mat::identity(3)).h), 1e-15);
  const KAK d = cartan_decompose(Mat::diagonal(Vec{2, 1, 0.5}));
  EXPECT_LT(norm(d.h - Vec{std::log(2.0), 0, -std::log(2.0)}), 1e-15);
  EXPECT_LT(dist(d.k1, Mat::identity(3)), 1e-15);
  EXPECT_LT(dist(d.k2, Mat::identity(3)), 1e-15);
  const KAK s = cartan_decompose(Mat{{1, 1}, {0, 1}});
  EXPECT_NEAR(s.h[0], std::log(kPhi), 1e-15);
  EXPECT_NEAR(s.h[1], -std::log(kPhi), 1e-15);
}

TEST(Cartan, RoundTripAndCanonicalSigns) {
  std::mt19937_64 rng(21);
  for (int t = 0; t < 1000; ++t) {
    const int n = 2 + t % 7;
    const Mat g = rankr::testing::random_sl(rng, n);
    const KAK d = cartan_decompose(g);
    EXPECT_LE(dist(d.k1 * exp_diag(d.h) * d.k2, g), 1e-10 * frobenius_norm(g));
    EXPECT_NEAR(det(d.k1), 1.0, 1e-10);
    EXPECT_NEAR(det(d.k2), 1.0, 1e-10);
    EXPECT_LE(dist(d.k2 * d.k2.transposed(), Mat::identity(n)), 1e-10);
    for (int i = 0; i + 1 < n; ++i) EXPECT_GE(d.h[i], d.h[i + 1]);
    for (int j = 0; j + 1 < n; ++j) {
      double best = 0.0;
      for (int i = 0; i < n; ++i) {
        if (std::abs(d.k1(i, j)) > std::abs(best)) best = d.k1(i, j);
      }
      EXPECT_GT(best, 0.0);
    }
  }
}

TEST(CartanVector, Examples) {
  std::mt19937_64 rng(22);
  const Mat x = rankr::testing::random_sl(rng, 3);
  EXPECT_LT(norm(cartan_vector(x, x)), 1e-7);
  for (double t : {0.3, 2.0, 11.0}) {
    const Vec h = cartan_vector(Mat::identity(2), exp_diag(Vec{t, -t}));
    EXPECT_NEAR(h[0], t, 1e-13 * t);
    EXPECT_NEAR(h[1], -t, 1e-13 * t);
  }
}

TEST(CartanVector, InvarianceAndSymmetry) {
  std::mt19937_64 rng(23);
  for (int t = 0; t < 500; ++t) {
    const int n = 2 + t % 5;
    const Mat g = rankr::testing::random_sl(rng, n);
    const Mat x = rankr::testing::random_sl(rng, n);
    const Mat y = rankr::testing::random_sl(rng, n);
    const Vec h = cartan_vector(x, y);
    EXPECT_LE(norm(cartan_vector(g * x, g * y) - h), 1e-9 * std::max(1.0, norm(h)));
    EXPECT_LE(norm(cartan_vector(y, x) - opposition(h)), 1e-9 * std::max(1.0, norm(h)));
    // Coset independence: right multiplication by K does not move the point.
    const Mat k = rankr::testing::random_orthogonal(rng, n);
    EXPECT_LE(norm(cartan_vector(x * k, y) - h), 1e-9 * std::max(1.0, norm(h)));
  }
}

TEST(CartanVector, HorosphericalInequality) {
  std::mt19937_64 rng(24);
  for (int t = 0; t < 500; ++t) {
    const int n = 2 + t % 5;
    const Mat a = rankr::testing::random_unipotent(rng, n);
    const Mat b = rankr::testing::random_unipotent(rng, n);
    const Vec h = rankr::testing::random_traceless(rng, n);
    const Vec hp = rankr::testing::random_traceless(rng, n);
    const double d = distance(a * exp_diag(h), b * exp_diag(hp));
    EXPECT_GE(d, norm(hp - h) - 1e-9);
  }
}

TEST(Iwasawa, Examples) {
  KAN d = iwasawa(Mat::identity(3));
  EXPECT_LT(dist(d.k, Mat::identity(3)), 1e-15);
  EXPECT_LT(norm(d.a), 1e-15);
  EXPECT_LT(dist(d.nplus, Mat::identity(3)), 1e-15);
  d = iwasawa(Mat{{1, 0}, {1, 1}});
  const double h = 1.0 / std::sqrt(2.0);
  EXPECT_LT(dist(d.k, Mat{{h, -h}, {h, h}}), 1e-15);
  EXPECT_NEAR(d.a[0], std::log(std::sqrt(2.0)), 1e-15);
  EXPECT_NEAR(d.a[1], -std::log(std::sqrt(2.0)), 1e-15);
  EXPECT_LT(dist(d.nplus, Mat{{1, 0.5}, {0, 1}}), 1e-15);
  std::mt19937_64 rng(25);
  const Mat an = exp_diag(rankr::testing::random_traceless(rng, 4)) * rankr::testing::random_unipotent(rng, 4);
  EXPECT_LT(dist(iwasawa(an).k, Mat::identity(4)), 1e-14);
}

TEST(Iwasawa, RoundTrip) {
  std::mt19937_64 rng(26);
  for (int t = 0; t < 1000; ++t) {
    const int n = 2 + t % 7;
    const Mat g = rankr::testing::random_sl(rng, n);
    const KAN d = iwasawa(g);
    EXPECT_LE(dist(d.k * exp_diag(d.a) * d.nplus, g), 1e-10 * frobenius_norm(g));
    for (int i = 0; i < n; ++i) {
      EXPECT_EQ(d.nplus(i, i), 1.0);
      for (int j = 0; j < i; ++j) EXPECT_EQ(d.nplus(i, j), 0.0);
    }
  }
}

TEST(IwasawaProjection, Examples) {
  std::mt19937_64 rng(27);
  EXPECT_LT(flag_distance(iwasawa_projection(Mat::identity(3)), Flag::standard(3)), 1e-15);
  const Mat an = exp_diag(rankr::testing::random_traceless(rng, 3)) * rankr::testing::random_unipotent(rng, 3);
  EXPECT_LT(flag_distance(iwasawa_projection(an), Flag::standard(3)), 1e-14);
  const Mat k = rankr::testing::random_orthogonal(rng, 3);
  EXPECT_LT(flag_distance(iwasawa_projection(k), Flag::from_frame(k)), 1e-14);
}

TEST(Bruhat, Examples) {
  EXPECT_EQ(bruhat_cell(Mat::identity(4)), weyl_identity(4));
  EXPECT_EQ(bruhat_cell(weyl_matrix(longest_element(4))), longest_element(4));
  std::mt19937_64 rng(28);
  for (int t = 0; t < 1000; ++t) {
    const int n = 2 + t % 4;
    EXPECT_EQ(bruhat_cell(rankr::testing::random_sl(rng, n)), longest_element(n));
  }
}

TEST(Bruhat, EveryCellExhaustive) {
  std::mt19937_64 rng(29);
  for (int n = 2; n <= 4; ++n) {
    for (const WeylElem& w : weyl_group(n)) {
      for (int rep = 0; rep < 5; ++rep) {
        const Mat g = rankr::testing::random_unipotent(rng, n) * weyl_matrix(w) * random_parabolic(rng, n);
        EXPECT_EQ(bruhat_cell(g), w);
      }
    }
  }
}

TEST(Bruhat, IllConditioned) {
  // Lower-left entry at the rank threshold makes the cell ambiguous.
  const Mat g{{1, 0}, {1e-8, 1}};
  try {
    bruhat_cell(g);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kIllConditionedCell);
  }
}

TEST(Kappa, Identity) { EXPECT_LT(flag_distance(kappa(Mat::identity(3)), Flag::reversed(3)), 1e-15); }

// The chamber n e^{-a+ t} o converges to the boundary flag kappa(n); the
// oracle reads the flag from the singular frame of a finite point.
TEST(Kappa, FiniteTimeLimit) {
  const Mat n2 = Mat{{1, 1}, {0, 1}};
  const double h = 1.0 / std::sqrt(2.0);
  EXPECT_LT(flag_distance(kappa(n2), Flag::from_frame(Mat{{h, -h}, {h, h}})), 1e-14);
  std::mt19937_64 rng(30);
  for (int t = 0; t < 50; ++t) {
    const int n = 2 + t % 4;
    const Mat u = rankr::testing::random_unipotent(rng, n);
    Vec dir(n);
    for (int i = 0; i < n; ++i) dir[i] = -(n - 1 - 2.0 * i) * 1.0;  // -H for regular H
    const Mat far = u * exp_diag(dir * 12.0);
    const Flag approx = Flag::from_frame(cartan_decompose(far).k1);
    EXPECT_LT(flag_distance(kappa(u), approx), 1e-6);
  }
}

TEST(Kappa, Injective) {
  std::mt19937_64 rng(31);
  for (int t = 0; t < 100; ++t) {
    const int n = 2 + t % 4;
    const Mat a = rankr::testing::random_unipotent(rng, n);
    const Mat b = rankr::testing::random_unipotent(rng, n);
    EXPECT_GT(flag_distance(kappa(a), kappa(b)), 1e-6);
  }
}

}  // namespace
