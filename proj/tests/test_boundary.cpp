#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "rankr/boundary.hpp"
#include "rankr/decompositions.hpp"
#include "rankr/error.hpp"
#include "rankr/kernel.hpp"
#include "test_util.hpp"

using namespace rankr;
using rankr::testing::exp_diag;

namespace {

BoundaryPoint random_point(std::mt19937_64& rng, int n) {
  return BoundaryPoint::make(Flag::from_frame(rankr::testing::random_orthogonal(rng, n)), rankr::testing::random_regular_direction(rng, n));
}

// Finite-s oracle: (d(x,s)^2 - d(y,s)^2) / (2s) = B + c/s up to terms that
// decay like exp(-gap s), so one Richardson step at s and 2s removes c.
double busemann_oracle(const BoundaryPoint& xi, const Mat& x, const Mat& y) {
  double gap = 1e300;
  for (int i = 0; i + 1 < xi.direction.size(); ++i) gap = std::min(gap, xi.direction[i] - xi.direction[i + 1]);
  const double s = std::max(40.0, 15.0 / gap);
  auto quad = [&](double t) {
    const Mat ray = xi.flag.frame() * exp_diag(xi.direction * t);
    const double a = distance(x, ray);
    const double b = distance(y, ray);
    return (a - b) * (a + b) / (2.0 * t);
  };
  return 2.0 * quad(2.0 * s) - quad(s);
}

TEST(Flag, FromFrameAndMInvariance) {
  EXPECT_EQ(flag_distance(Flag::from_frame(Mat::identity(3)), Flag::standard(3)), 0.0);
  std::mt19937_64 rng(1);
  const Mat k = rankr::testing::random_orthogonal(rng, 4);
  const Mat m = Mat::diagonal(Vec{-1, -1, 1, 1});
  EXPECT_LT(flag_distance(Flag::from_frame(k), Flag::from_frame(k * m)), 1e-15);
  const Mat k2 = rankr::testing::random_orthogonal(rng, 2);
  EXPECT_LT(flag_distance(Flag::from_frame(k2), Flag::from_frame(k2 * Mat::diagonal(Vec{-1, 1}))), 1e-15);
  EXPECT_THROW(Flag::from_frame(Mat{{1, 1}, {0, 1}}), Error);
}

TEST(Flag, ProjectorInvariants) {
  std::mt19937_64 rng(2);
  for (int t = 0; t < 100; ++t) {
    const int n = 2 + t % 7;
    const Flag f = Flag::from_frame(rankr::testing::random_orthogonal(rng, n));
    for (int i = 1; i < n; ++i) {
      const Mat& p = f.projector(i);
      EXPECT_LT(rankr::testing::dist(p * p, p), 1e-10);
      EXPECT_LT(rankr::testing::dist(p.transposed(), p), 1e-10);
      EXPECT_NEAR(trace(p), i, 1e-9);
      if (i + 1 < n) EXPECT_LT(rankr::testing::dist(p * f.projector(i + 1), p), 1e-10);
    }
  }
}

TEST(FlagDistance, Cases) {
  EXPECT_NEAR(flag_distance(Flag::standard(2), Flag::reversed(2)), std::sqrt(2.0), 1e-15);
  std::mt19937_64 rng(3);
  for (int t = 0; t < 500; ++t) {
    const int n = 2 + t % 5;
    const Flag a = Flag::from_frame(rankr::testing::random_orthogonal(rng, n));
    const Flag b = Flag::from_frame(rankr::testing::random_orthogonal(rng, n));
    const Flag c = Flag::from_frame(rankr::testing::random_orthogonal(rng, n));
    EXPECT_EQ(flag_distance(a, a), 0.0);
    EXPECT_LE(flag_distance(a, c), flag_distance(a, b) + flag_distance(b, c) + 1e-12);
    EXPECT_NEAR(flag_distance(a, b), flag_distance(b, a), 1e-15);
  }
}

TEST(Transverse, Cases) {
  const Transversality sr = transverse(Flag::standard(4), Flag::reversed(4));
  EXPECT_TRUE(sr.transverse);
  EXPECT_NEAR(sr.margin, 1.0, 1e-15);
  EXPECT_FALSE(transverse(Flag::standard(4), Flag::standard(4)).transverse);
  std::mt19937_64 rng(4);
  for (int t = 0; t < 1000; ++t) {
    const int n = 2 + t % 7;
    const Flag a = Flag::from_frame(rankr::testing::random_orthogonal(rng, n));
    const Flag b = Flag::from_frame(rankr::testing::random_orthogonal(rng, n));
    const Transversality r = transverse(a, b);
    EXPECT_TRUE(r.transverse);
    EXPECT_LE(r.margin, 1.0 + 1e-12);
    // K-invariance of the margin.
    const Mat k = rankr::testing::random_orthogonal(rng, n);
    EXPECT_NEAR(transverse(act(k, a), act(k, b)).margin, r.margin, 1e-10);
  }
}

TEST(Act, Cases) {
  std::mt19937_64 rng(5);
  const BoundaryPoint xi = random_point(rng, 3);
  EXPECT_LT(flag_distance(act(Mat::identity(3), xi).flag, xi.flag), 1e-15);
  const Mat k = rankr::testing::random_orthogonal(rng, 3);
  const BoundaryPoint std_pt = BoundaryPoint::make(Flag::standard(3), Vec{1, 0, -1});
  EXPECT_LT(flag_distance(act(k, std_pt).flag, Flag::from_frame(k)), 1e-14);
  const Mat an = exp_diag(rankr::testing::random_traceless(rng, 3)) * rankr::testing::random_unipotent(rng, 3);
  EXPECT_LT(flag_distance(act(an, std_pt).flag, Flag::standard(3)), 1e-14);
  EXPECT_EQ(act(an, std_pt).direction, std_pt.direction);
}

TEST(Act, LeftActionAndFrameIndependence) {
  std::mt19937_64 rng(6);
  for (int t = 0; t < 300; ++t) {
    const int n = 2 + t % 5;
    const BoundaryPoint xi = random_point(rng, n);
    const Mat g1 = rankr::testing::random_sl(rng, n);
    const Mat g2 = rankr::testing::random_sl(rng, n);
    EXPECT_LT(flag_distance(act(g1 * g2, xi).flag, act(g1, act(g2, xi)).flag), 1e-8);
    Vec signs(n, 1.0);
    signs[0] = -1.0;
    signs[n - 1] = -1.0;
    const Flag alt = Flag::from_frame(xi.flag.frame() * Mat::diagonal(signs));
    EXPECT_LT(flag_distance(act(g1, alt), act(g1, xi.flag)), 1e-10);
  }
}

TEST(Busemann, Cases) {
  const Vec h = Vec{2, 1, -3} * (1.0 / std::sqrt(14.0));
  const BoundaryPoint xi = BoundaryPoint::make(Flag::standard(3), h);
  for (double t : {0.5, 3.0, 10.0}) {
    EXPECT_NEAR(busemann(xi, Mat::identity(3), exp_diag(h * t)), t, 1e-12 * t);
  }
  std::mt19937_64 rng(7);
  const Mat x = rankr::testing::random_sl(rng, 3);
  EXPECT_NEAR(busemann(xi, x, x), 0.0, 1e-14);
  // N+ fixes the standard regular point: B(o, n.o) = 0, checked on the oracle.
  for (int t = 0; t < 20; ++t) {
    const Mat u = rankr::testing::random_unipotent(rng, 3);
    EXPECT_NEAR(busemann(xi, Mat::identity(3), u), 0.0, 1e-6);
    EXPECT_NEAR(busemann_oracle(xi, Mat::identity(3), u), 0.0, 1e-6);
  }
}

TEST(Busemann, MatchesFiniteRayOracle) {
  std::mt19937_64 rng(8);
  double worst = 0.0;
  for (int t = 0; t < 500; ++t) {
    const int n = 2 + t % 4;
    const BoundaryPoint xi = random_point(rng, n);
    const Mat x = rankr::testing::random_sl(rng, n);
    const Mat y = rankr::testing::random_sl(rng, n);
    worst = std::max(worst, std::abs(busemann(xi, x, y) - busemann_oracle(xi, x, y)));
  }
  EXPECT_LE(worst, 1e-6);
}

TEST(Busemann, CocycleAndBound) {
  std::mt19937_64 rng(9);
  for (int t = 0; t < 300; ++t) {
    const int n = 2 + t % 5;
    const BoundaryPoint xi = random_point(rng, n);
    const Mat x = rankr::testing::random_sl(rng, n);
    const Mat y = rankr::testing::random_sl(rng, n);
    const Mat z = rankr::testing::random_sl(rng, n);
    EXPECT_NEAR(busemann(xi, x, y) + busemann(xi, y, z), busemann(xi, x, z), 1e-9);
    EXPECT_LE(std::abs(busemann(xi, x, y)), distance(x, y) + 1e-9);
  }
}

TEST(DirectionalDistance, Cases) {
  std::mt19937_64 rng(10);
  const BoundaryPoint xi = random_point(rng, 3);
  const Mat x = rankr::testing::random_sl(rng, 3);
  EXPECT_NEAR(directional_distance(xi, x, x), 0.0, 1e-7);
  const Vec h{3, 1, -4};
  const BoundaryPoint al = BoundaryPoint::make(Flag::standard(3), h);
  const double t = 1.7;
  EXPECT_NEAR(directional_distance(al, Mat::identity(3), exp_diag(h * t)), t * norm(h), 1e-12);
  EXPECT_NEAR(directional_distance(al, Mat::identity(3), exp_diag(h * t)), distance(Mat::identity(3), exp_diag(h * t)), 1e-12);
}

TEST(DirectionalDistance, BoundsOrbitBusemann) {
  std::mt19937_64 rng(11);
  for (int t = 0; t < 100; ++t) {
    const int n = 2 + t % 4;
    const BoundaryPoint xi = random_point(rng, n);
    const Mat x = rankr::testing::random_sl(rng, n);
    const Mat y = rankr::testing::random_sl(rng, n);
    const double dd = directional_distance(xi, x, y);
    EXPECT_GE(dd, -1e-9);
    EXPECT_LE(dd, distance(x, y) + 1e-9);
    for (int j = 0; j < 100; ++j) {
      const Mat g = rankr::testing::random_sl(rng, n);
      EXPECT_GE(dd, busemann(act(g, xi), x, y) - 1e-6);
    }
  }
}

TEST(BoundaryConverges, Cases) {
  std::mt19937_64 rng(12);
  const BoundaryPoint xi = random_point(rng, 3);
  EXPECT_TRUE(boundary_converges(std::vector<BoundaryPoint>(10, xi), xi, 1e-9));
  std::vector<BoundaryPoint> drift;
  const Vec other = Vec{1, 0.2, -1.2};
  for (int j = 1; j <= 20; ++j) {
    drift.push_back(BoundaryPoint::make(xi.flag, xi.direction * (1.0 / j) + other * (1.0 - 1.0 / j)));
  }
  EXPECT_FALSE(boundary_converges(drift, xi, 1e-3));
}

}  // namespace
