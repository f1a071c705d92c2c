#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <set>

#include "gsg/geometry.hpp"
#include "oracles.hpp"

using namespace gsg;

TEST(EnumeratePairs, BinomialCounts) {
  EXPECT_EQ(enumerate_pairs(5).size(), 10u);
  EXPECT_EQ(enumerate_pairs(2).size(), 1u);
  EXPECT_EQ(enumerate_pairs(8).size(), 28u);
}

TEST(EnumeratePairs, LexicographicUniqueOrdered) {
  const auto pairs = enumerate_pairs(6);
  std::set<std::pair<std::size_t, std::size_t>> seen;
  for (std::size_t k = 0; k < pairs.size(); ++k) {
    EXPECT_LT(pairs[k].i, pairs[k].j);
    EXPECT_TRUE(seen.insert({pairs[k].i, pairs[k].j}).second);
    if (k > 0) {
      EXPECT_TRUE(std::pair(pairs[k - 1].i, pairs[k - 1].j) < std::pair(pairs[k].i, pairs[k].j));
    }
  }
}

TEST(EnumeratePairs, RejectsFewerThanTwo) {
  EXPECT_THROW(enumerate_pairs(1), ConfigError);
  EXPECT_THROW(enumerate_pairs(0), ConfigError);
}

TEST(MaxTdoa, HandValues) {
  EXPECT_EQ(max_tdoa_samples(0.15, 16000, 343), 6);
  const double d = (Vec3(2, 1.8, 0) - Vec3(1, 1.2, 0)).norm();
  EXPECT_NEAR(d, 1.16619, 1e-5);
  EXPECT_EQ(max_tdoa_samples(d, 44100, 343), 149);
  EXPECT_EQ(max_tdoa_samples(0.0, 44100, 343), 0);
  EXPECT_EQ(max_tdoa_samples(0.15, 16000, 343, 4), 24);
  EXPECT_THROW(max_tdoa_samples(0.15, 0, 343), ConfigError);
  EXPECT_THROW(max_tdoa_samples(0.15, 16000, -1), ConfigError);
}

TEST(MicArray, RejectsInvalidGeometry) {
  EXPECT_THROW(MicArray({{0, 0, 0}}, 16000), ConfigError);
  EXPECT_THROW(MicArray({{0, 0, 0}, {0, 0, 0}}, 16000), ConfigError);
  EXPECT_THROW(MicArray({{0, 0, 0}, {NAN, 0, 0}}, 16000), ConfigError);
  EXPECT_THROW(MicArray({{0, 0, 0}, {1, 0, 0}}, 0), ConfigError);
  EXPECT_NO_THROW(MicArray({{0, 0, 0}, {1, 0, 0}}, 16000));
}

TEST(TdoaAt, HandValues) {
  const MicArray a({{0, 0, 0}, {1, 0, 0}}, 3430, 343);
  EXPECT_EQ(tdoa_at(Vec3(2, 0, 0), a, 0), 10);
  EXPECT_EQ(tdoa_at(Vec3(0.5, 0, 0), a, 0), 0);
  EXPECT_EQ(tdoa_at(Vec3(0.5, 3, 0), a, 0), 0);
}

TEST(TdoaAt, RoundsHalfAwayFromZero) {
  // Range difference of exactly 0.25 m at 10 samples/m is 2.5 samples.
  const MicArray a({{0, 0, 0}, {1, 0, 0}}, 3430, 343);
  EXPECT_EQ(tdoa_at(Vec3(0.625, 0, 0), a, 0), 3);
  EXPECT_EQ(tdoa_at(Vec3(0.375, 0, 0), a, 0), -3);
  EXPECT_EQ(round_half_away(2.5), 3);
  EXPECT_EQ(round_half_away(-2.5), -3);
  EXPECT_EQ(round_toward_zero(-6.99), -6);
}

TEST(TdoaAt, AntisymmetricInPairOrder) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-3, 3);
  const Vec3 p0(0.2, 0.1, 0.0), p1(1.1, -0.4, 0.3);
  const MicArray fwd({p0, p1}, 44100), rev({p1, p0}, 44100);
  for (int k = 0; k < 500; ++k) {
    const Vec3 p(u(rng), u(rng), u(rng));
    EXPECT_EQ(tdoa_at(p, fwd, 0), -tdoa_at(p, rev, 0));
  }
}

TEST(TdoaAt, AlwaysWithinAdmissibleRange) {
  const MicArray a({{0, 0, 0}, {0.15, 0, 0}, {0.3, 0.1, 0}, {0.1, 0.4, 0.2}}, 96000);
  const SearchRegion r({-1, -1, -0.5}, {2, 2, 1}, 0.1, 3);
  for (std::size_t g = 0; g < r.cell_count(); ++g) {
    for (std::size_t n = 0; n < a.pair_count(); ++n) {
      const auto t = tdoa_at(r.point(static_cast<CellIndex>(g)), a, n);
      EXPECT_LE(std::abs(t), a.max_tdoa(n));
    }
  }
}

TEST(TdoaAt, FrameAndArrayOverloadsAgree) {
  const MicArray a({{1, 1.2, 0}, {2, 1.8, 0}, {0.3, 0.2, 0.5}}, 44100);
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-2, 4);
  for (std::size_t n = 0; n < a.pair_count(); ++n) {
    const auto f = make_pair_frame(a, n);
    for (int k = 0; k < 200; ++k) {
      const Vec3 p(u(rng), u(rng), u(rng));
      EXPECT_EQ(tdoa_at(p, f, a.fs(), a.c(), 2), tdoa_at(p, a, n, 2));
    }
  }
}

TEST(SearchRegion, TableCounts) {
  const Vec3 o(0, 0, 0), e(2, 2, 0);
  EXPECT_EQ(SearchRegion(o, e, 0.1).cell_count(), 400u);
  EXPECT_EQ(SearchRegion(o, e, 0.05).cell_count(), 1600u);
  EXPECT_EQ(SearchRegion(o, e, 0.01).cell_count(), 40000u);
  EXPECT_EQ(SearchRegion(o, {2, 2, 1}, 0.1, 3).cell_count(), 4000u);
}

TEST(SearchRegion, IndexRoundTripIsExact) {
  const SearchRegion r({-0.3, 0.7, 1.1}, {1.0, 0.6, 0.5}, 0.1, 3);
  for (std::size_t g = 0; g < r.cell_count(); ++g) {
    const auto cell = static_cast<CellIndex>(g);
    const auto ijk = r.coords(cell);
    EXPECT_EQ(r.index(ijk[0], ijk[1], ijk[2]), cell);
    const auto back = r.cell_of(r.point(cell));
    ASSERT_TRUE(back.has_value());
    EXPECT_EQ(*back, cell);
  }
  EXPECT_FALSE(r.cell_of(Vec3(-5, 0, 0)).has_value());
}

TEST(SearchRegion, RejectsBadParameters) {
  EXPECT_THROW(SearchRegion({0, 0, 0}, {1, 1, 1}, 0.0), ConfigError);
  EXPECT_THROW(SearchRegion({0, 0, 0}, {1, 1, 1}, 0.1, 4), ConfigError);
  EXPECT_THROW(SearchRegion({0, 0, 0}, {0.05, 1, 1}, 0.1), ConfigError);
}

TEST(PairFrame, AxisAlignedPairIsIdentity) {
  const MicArray a({{0, 0, 0}, {1, 0, 0}}, 16000);
  const auto f = make_pair_frame(a, 0);
  EXPECT_TRUE(f.translation.isApprox(Vec3(0.5, 0, 0)));
  EXPECT_TRUE(f.rotation.isApprox(Mat3::Identity(), 1e-12));
}

TEST(PairFrame, FigureOnePairAngle) {
  const MicArray a({{1, 1.2, 0}, {2, 1.8, 0}}, 44100);
  const auto f = make_pair_frame(a, 0);
  const double angle = std::atan2(f.axis().y(), f.axis().x()) * 180.0 / std::numbers::pi;
  EXPECT_NEAR(angle, 30.964, 1e-3);
}

TEST(PairFrame, OrthonormalAndMapsMicsToAxis) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-2, 2);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<Vec3> mics;
    for (int m = 0; m < 4; ++m) mics.emplace_back(u(rng), u(rng), trial % 2 ? u(rng) : 0.0);
    const MicArray a(mics, 16000);
    for (std::size_t n = 0; n < a.pair_count(); ++n) {
      const auto f = make_pair_frame(a, n);
      EXPECT_LT((f.rotation.transpose() * f.rotation - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
      const double h = a.pair_distance(n) / 2;
      EXPECT_LT((f.to_local(a.mic(a.pair(n).i)) - Vec3(-h, 0, 0)).cwiseAbs().maxCoeff(), 1e-9);
      EXPECT_LT((f.to_local(a.mic(a.pair(n).j)) - Vec3(h, 0, 0)).cwiseAbs().maxCoeff(), 1e-9);
    }
  }
}

TEST(PairFrame, RoundTripRandomPoints) {
  const MicArray a({{0.3, -0.2, 0.4}, {1.7, 0.9, -0.6}}, 16000);
  const auto f = make_pair_frame(a, 0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int k = 0; k < 1000; ++k) {
    const Vec3 p(u(rng), u(rng), u(rng));
    EXPECT_LT((f.to_global(f.to_local(p)) - p).norm(), 1e-9);
  }
}

TEST(PairFrame, VerticalBaselineUsesFallbackUpVector) {
  const MicArray a({{0, 0, 0}, {0, 0, 1}}, 16000);
  const auto f = make_pair_frame(a, 0);
  EXPECT_LT((f.rotation.transpose() * f.rotation - Mat3::Identity()).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_LT((f.to_local(Vec3(0, 0, 1)) - Vec3(0.5, 0, 0)).norm(), 1e-12);
}

TEST(RangeDifference, MatchesOracle) {
  const Vec3 ri(0, 0, 0), rj(1, 2, 0.5), p(3, -1, 2);
  EXPECT_NEAR(range_difference(p, ri, rj) * 44100 / 343, oracle::exact_tdoa(p, ri, rj, 44100, 343), 1e-9);
}
