#include <gtest/gtest.h>

#include "gmner/errors.hpp"
#include "gmner/geometry.hpp"
#include "support/oracles.hpp"

using namespace gmner;

TEST(Rle, EncodesColumnMajorStartingWithZeros)
{
	// 3 wide, 2 tall; pixel (x, y).
	Bitmap b(2, 3);
	b << false, true, true,
	     true, true, false;
	const RleMask m = rle_encode(b);
	EXPECT_EQ(m.width, 3);
	EXPECT_EQ(m.height, 2);
	// column-major: (0,0)=0 (0,1)=1 (1,0)=1 (1,1)=1 (2,0)=1 (2,1)=0
	EXPECT_EQ(m.counts, (std::vector<std::uint32_t>{1, 4, 1}));
	EXPECT_EQ(m.area(), 4u);
	EXPECT_TRUE(m.valid());
}

TEST(Rle, LeadingForegroundGivesZeroFirstRun)
{
	Bitmap b = Bitmap::Constant(2, 2, true);
	EXPECT_EQ(rle_encode(b).counts, (std::vector<std::uint32_t>{0, 4}));
	EXPECT_EQ(rle_encode(Bitmap::Constant(2, 2, false)).counts, (std::vector<std::uint32_t>{4}));
}

TEST(Rle, DecodeRejectsBadSum)
{
	EXPECT_THROW(rle_decode(RleMask{2, 2, {1, 2}}), DataError);
	EXPECT_FALSE((RleMask{2, 2, {1, 0, 3}}).valid());
	EXPECT_TRUE((RleMask{2, 2, {0, 1, 3}}).valid());
}

TEST(Rle, RoundTripRandom)
{
	oracle::Rng rng(7);
	for (int k = 0; k < 2000; ++k) {
		const int w = oracle::uniform_int(rng, 1, 64), h = oracle::uniform_int(rng, 1, 64);
		const Bitmap b = k % 2 ? oracle::random_bitmap(rng, w, h) : oracle::random_blobs(rng, w, h);
		const RleMask m = rle_encode(b);
		ASSERT_TRUE(m.valid());
		ASSERT_EQ(m.total(), std::uint64_t(w) * std::uint64_t(h));
		ASSERT_TRUE((rle_decode(m) == b).all());
	}
}

TEST(Rasterize, IntegerBoxIsPixelBlock)
{
	const Bitmap b = rasterize_box({0, 0, 2, 2}, 4, 4);
	EXPECT_EQ(b.count(), 4);
	EXPECT_TRUE(b.topLeftCorner(2, 2).all());
	const Bitmap c = rasterize_box({1, 2, 4, 3}, 5, 5);
	for (int x = 0; x < 5; ++x)
		for (int y = 0; y < 5; ++y)
			EXPECT_EQ(c(y, x), x >= 1 && x < 4 && y == 2) << x << "," << y;
}

TEST(Rasterize, FractionalBoxUsesPixelCentres)
{
	// centres 2.5..6.5 fall in [2.5, 7.5)
	const Bitmap b = rasterize_box({2.5, 2.5, 7.5, 7.5}, 10, 10);
	EXPECT_EQ(b.count(), 25);
	EXPECT_TRUE(b.block(2, 2, 5, 5).all());
	EXPECT_EQ(rasterize_box({0.6, 0, 1.4, 1}, 3, 1).count(), 0);
}

TEST(Rasterize, ClampsToImage)
{
	EXPECT_EQ(rasterize_box({-3, -3, 100, 100}, 4, 3).count(), 12);
	const BBox c = clamp_box({-1, 2, 50, 9}, 10, 5);
	EXPECT_EQ(c, (BBox{0, 2, 10, 5}));
}

TEST(BBoxTest, Validity)
{
	EXPECT_TRUE((BBox{0, 0, 1, 1}).valid());
	EXPECT_FALSE((BBox{1, 0, 1, 1}).valid());
	EXPECT_FALSE((BBox{-1, 0, 1, 1}).valid());
	EXPECT_TRUE((BBox{0, 0, 10, 5}).within(10, 5));
	EXPECT_FALSE((BBox{0, 0, 11, 5}).within(10, 5));
	EXPECT_DOUBLE_EQ((BBox{1, 2, 4, 6}).area(), 12.0);
}
