#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "rankr/error.hpp"
#include "rankr/lie.hpp"
#include "test_util.hpp"

using namespace rankr;

namespace {

TEST(Inner, Basics) {
  EXPECT_EQ(inner(Vec{0, 0}, Vec{1, -1}), 0.0);
  EXPECT_EQ(inner(Vec{1, -1}, Vec{1, -1}), 2.0);
  EXPECT_THROW(inner(Vec{1, -1}, Vec{1, 0, -1}), Error);
}

TEST(Inner, AdKInvariant) {
  std::mt19937_64 rng(1);
  for (int s = 0; s < 200; ++s) {
    const int n = 2 + s % 7;
    const Mat k = rankr::testing::random_orthogonal(rng, n);
    const Mat x = rankr::testing::gaussian(rng, n, n);
    const Mat y = rankr::testing::gaussian(rng, n, n);
    const Mat kx = k * x * k.transposed();
    const Mat ky = k * y * k.transposed();
    // Oracle: the trace of X Y^T computed directly.
    EXPECT_NEAR(inner(kx, ky), trace(x * y.transposed()), 1e-10);
  }
}

TEST(Opposition, Examples) {
  EXPECT_EQ(opposition(Vec{0.7, -0.7}), (Vec{0.7, -0.7}));
  EXPECT_EQ(opposition(Vec{2, 0, -2}), (Vec{2, 0, -2}));
  EXPECT_EQ(opposition(Vec{3, 1, -4}), (Vec{4, -1, -3}));
}

TEST(Opposition, InvolutionPreservingChamber) {
  std::mt19937_64 rng(2);
  for (int s = 0; s < 200; ++s) {
    const int n = 2 + s % 7;
    Vec h = rankr::testing::random_traceless(rng, n);
    std::sort(h.begin(), h.end(), std::greater<>());
    const Vec o = opposition(h);
    EXPECT_EQ(opposition(o), h);
    EXPECT_NEAR(inner(o, o), inner(h, h), 1e-12);
    EXPECT_NE(chamber_classify(o).kind, ChamberKind::kOutside);
    EXPECT_NEAR(sum(o), 0.0, 1e-12);
  }
}

TEST(Chamber, Classify) {
  EXPECT_EQ(chamber_classify(Vec{1, 0, -1}).kind, ChamberKind::kInterior);
  const ChamberInfo w = chamber_classify(Vec{1, 1, -2});
  EXPECT_EQ(w.kind, ChamberKind::kWall);
  EXPECT_EQ(w.vanishing, std::vector<int>{0});
  EXPECT_EQ(chamber_classify(Vec{0, 1, -1}).kind, ChamberKind::kOutside);
}

TEST(MinRootGap, Examples) {
  EXPECT_NEAR(min_root_gap(Vec{1, 0, -1} * (1 / std::sqrt(2.0))), 1 / std::sqrt(2.0), 1e-15);
  for (double t : {0.1, 1.0, 37.0}) EXPECT_NEAR(min_root_gap(Vec{t, -t}), std::sqrt(2.0), 1e-14);
  EXPECT_EQ(min_root_gap(Vec{1, 1, -2}), 0.0);
  EXPECT_THROW(min_root_gap(Vec{0, 0}), Error);
}

TEST(MinRootGap, PositiveIffInterior) {
  std::mt19937_64 rng(3);
  for (int s = 0; s < 500; ++s) {
    const int n = 2 + s % 7;
    Vec h = rankr::testing::random_traceless(rng, n);
    std::sort(h.begin(), h.end(), std::greater<>());
    if (s % 5 == 0 && n > 2) h[1] = h[0];
    h = project_traceless(h);
    EXPECT_EQ(min_root_gap(h) > 0.0, chamber_classify(h).kind == ChamberKind::kInterior);
  }
}

TEST(Horospherical, Examples) {
  EXPECT_EQ(horospherical_subalgebra(Vec{3, 1, 0, -4}).size(), 6u);
  const auto r = horospherical_subalgebra(Vec{1, 1, -2} * (1 / std::sqrt(6.0)));
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0], (Root{0, 2}));
  EXPECT_EQ(r[1], (Root{1, 2}));
  EXPECT_THROW(horospherical_subalgebra(Vec{0, 0, 0}), Error);
}

TEST(Weyl, RepresentativesInSO) {
  std::mt19937_64 rng(4);
  for (int n = 2; n <= 5; ++n) {
    const auto group = weyl_group(n);
    int count = 1;
    for (int i = 2; i <= n; ++i) count *= i;
    EXPECT_EQ(static_cast<int>(group.size()), count);
    for (const auto& w : group) {
      const Mat m = weyl_matrix(w);
      EXPECT_NEAR(det(m), 1.0, 1e-15);
      EXPECT_EQ(m * m.transposed(), Mat::identity(n));
      const Vec h = rankr::testing::random_traceless(rng, n);
      EXPECT_LT(rankr::testing::dist(m * Mat::diagonal(h) * m.transposed(), Mat::diagonal(weyl_act(w, h))), 1e-15);
    }
  }
}

TEST(Weyl, LongestElementReversesChamber) {
  const WeylElem w = longest_element(4);
  const Vec h{3, 1, -1, -3};
  EXPECT_EQ(weyl_act(w, h), (Vec{-3, -1, 1, 3}));
  EXPECT_EQ(opposition(h), weyl_act(w, h) * -1.0);
}

}  // namespace
