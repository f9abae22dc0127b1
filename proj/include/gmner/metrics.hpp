#pragma once

#include <cstdint>

#include <Eigen/Core>

#include "gmner/geometry.hpp"

namespace gmner {

/// Continuous-area box IoU. Throws DataError on a zero-area or invalid box.
double box_iou(const BBox& a, const BBox& b);

struct MaskOverlap {
	std::uint64_t intersection = 0;
	std::uint64_t area_a = 0;
	std::uint64_t area_b = 0;

	std::uint64_t union_area() const { return area_a + area_b - intersection; }
};

/// Pixel overlap counted by walking both run lists; no bitmap is decoded.
/// Throws DataError on dimension mismatch or inconsistent counts.
MaskOverlap mask_overlap(const RleMask& a, const RleMask& b);

/// |A n B| / |A u B|. Throws DataError when both masks are empty.
double mask_iou(const RleMask& a, const RleMask& b);

/// 2|A n B| / (|A| + |B|). Same error contract as mask_iou.
double dice_coefficient(const RleMask& a, const RleMask& b);

/// Rating counts: rows are items, columns are categories, every row sums to
/// the same number of raters r >= 2.
using AgreementTable = Eigen::Matrix<std::int64_t, Eigen::Dynamic, Eigen::Dynamic>;

/// Fleiss' kappa. Returns 1.0 when chance agreement is 1 and observed
/// agreement is 1; throws DataError when chance agreement is 1 otherwise, or
/// when the table is malformed.
double fleiss_kappa(const AgreementTable& table);

} // namespace gmner
