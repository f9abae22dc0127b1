#include "gmner/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "gmner/errors.hpp"

namespace gmner {

bool BBox::valid() const
{
	return std::isfinite(x1) && std::isfinite(y1) && std::isfinite(x2) && std::isfinite(y2) &&
	       x1 >= 0 && y1 >= 0 && x1 < x2 && y1 < y2;
}

bool BBox::within(int image_width, int image_height) const
{
	return valid() && x2 <= image_width && y2 <= image_height;
}

std::uint64_t RleMask::area() const
{
	std::uint64_t ones = 0;
	for (std::size_t i = 1; i < counts.size(); i += 2)
		ones += counts[i];
	return ones;
}

std::uint64_t RleMask::total() const
{
	return std::accumulate(counts.begin(), counts.end(), std::uint64_t{0});
}

bool RleMask::valid() const
{
	if (width < 1 || height < 1 || counts.empty())
		return false;
	for (std::size_t i = 1; i < counts.size(); ++i)
		if (counts[i] == 0)
			return false;
	return total() == static_cast<std::uint64_t>(width) * static_cast<std::uint64_t>(height);
}

RleMask rle_encode(const Bitmap& bitmap)
{
	RleMask out;
	out.height = static_cast<int>(bitmap.rows());
	out.width = static_cast<int>(bitmap.cols());
	const bool* px = bitmap.data();
	const Eigen::Index n = bitmap.size();

	bool current = false;
	std::uint32_t run = 0;
	for (Eigen::Index i = 0; i < n; ++i) {
		if (px[i] != current) {
			out.counts.push_back(run);
			run = 0;
			current = px[i];
		}
		++run;
	}
	out.counts.push_back(run);
	return out;
}

Bitmap rle_decode(const RleMask& mask)
{
	if (mask.width < 1 || mask.height < 1)
		throw DataError("rle: mask dimensions must be >= 1");
	const std::uint64_t expected = static_cast<std::uint64_t>(mask.width) * mask.height;
	if (mask.total() != expected)
		throw DataError("rle: counts sum " + std::to_string(mask.total()) + " != width*height " +
		                std::to_string(expected));

	Bitmap out(mask.height, mask.width);
	bool* px = out.data();
	bool value = false;
	std::size_t pos = 0;
	for (std::uint32_t run : mask.counts) {
		std::fill_n(px + pos, run, value);
		pos += run;
		value = !value;
	}
	return out;
}

Bitmap rasterize_box(const BBox& box, int width, int height)
{
	Bitmap out = Bitmap::Constant(height, width, false);
	// pixel x covered iff x1 <= x + 0.5 < x2
	auto lo = [](double a, int limit) {
		return std::clamp(static_cast<int>(std::ceil(a - 0.5)), 0, limit);
	};
	const int cx0 = lo(box.x1, width), cx1 = lo(box.x2, width);
	const int cy0 = lo(box.y1, height), cy1 = lo(box.y2, height);
	if (cx1 > cx0 && cy1 > cy0)
		out.block(cy0, cx0, cy1 - cy0, cx1 - cx0).setConstant(true);
	return out;
}

BBox clamp_box(const BBox& box, int width, int height)
{
	const double w = width, h = height;
	return {std::clamp(box.x1, 0.0, w), std::clamp(box.y1, 0.0, h), std::clamp(box.x2, 0.0, w),
	        std::clamp(box.y2, 0.0, h)};
}

} // namespace gmner
