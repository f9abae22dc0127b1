#pragma once

#include <cstdint>
#include <vector>

#include <Eigen/Core>

namespace gmner {

/// Axis-aligned box in continuous pixel coordinates: (x1, y1) top-left,
/// (x2, y2) bottom-right. Area uses the continuous convention (no +1).
struct BBox {
	double x1 = 0;
	double y1 = 0;
	double x2 = 0;
	double y2 = 0;

	double width() const { return x2 - x1; }
	double height() const { return y2 - y1; }
	double area() const { return width() * height(); }

	/// x1 < x2, y1 < y2, all coordinates non-negative.
	bool valid() const;
	bool within(int image_width, int image_height) const;

	friend bool operator==(const BBox&, const BBox&) = default;
};

/// Binary grid with rows = image height and cols = image width. Eigen's
/// column-major storage makes data()[x * height + y] the pixel at (x, y),
/// which is exactly the RLE scan order.
using Bitmap = Eigen::Array<bool, Eigen::Dynamic, Eigen::Dynamic>;

/// COCO-style uncompressed RLE: column-major runs, first run counts zeros
/// (possibly zero-length), runs alternate zero/one.
struct RleMask {
	int width = 0;
	int height = 0;
	std::vector<std::uint32_t> counts;

	/// Number of foreground pixels.
	std::uint64_t area() const;
	std::uint64_t total() const;
	/// sum(counts) == width*height, dims >= 1, and only the leading run may be zero-length.
	bool valid() const;

	friend bool operator==(const RleMask&, const RleMask&) = default;
};

RleMask rle_encode(const Bitmap& bitmap);

/// Throws DataError when counts do not sum to width*height.
Bitmap rle_decode(const RleMask& mask);

/// Half-open rasterization: pixel (x, y) is set iff its centre (x+0.5, y+0.5)
/// lies in [x1, x2) x [y1, y2). For integer boxes this is exactly the pixel
/// block [x1, x2) x [y1, y2).
Bitmap rasterize_box(const BBox& box, int width, int height);

/// Clamp a box to [0, width] x [0, height].
BBox clamp_box(const BBox& box, int width, int height);

} // namespace gmner
