#include "gmner/metrics.hpp"

#include <algorithm>
#include <string>

#include "gmner/errors.hpp"

namespace gmner {

double box_iou(const BBox& a, const BBox& b)
{
	if (!a.valid() || !b.valid())
		throw DataError("box_iou: degenerate or invalid box");
	const double iw = std::min(a.x2, b.x2) - std::max(a.x1, b.x1);
	const double ih = std::min(a.y2, b.y2) - std::max(a.y1, b.y1);
	if (iw <= 0 || ih <= 0)
		return 0.0;
	const double inter = iw * ih;
	return inter / (a.area() + b.area() - inter);
}

namespace {

// Cursor over an RLE run list yielding (length, value) segments.
struct RunCursor {
	const std::vector<std::uint32_t>& counts;
	std::size_t index = 0;
	std::uint64_t left = 0;

	explicit RunCursor(const std::vector<std::uint32_t>& c) : counts(c) { advance(); }

	void advance()
	{
		while (left == 0 && index < counts.size())
			left = counts[index++];
	}
	bool done() const { return left == 0; }
	// value of the run currently being consumed (index already points past it)
	bool value() const { return (index - 1) % 2 == 1; }
	void consume(std::uint64_t n)
	{
		left -= n;
		advance();
	}
};

} // namespace

MaskOverlap mask_overlap(const RleMask& a, const RleMask& b)
{
	if (a.width != b.width || a.height != b.height)
		throw DataError("mask dimension mismatch: " + std::to_string(a.width) + "x" +
		                std::to_string(a.height) + " vs " + std::to_string(b.width) + "x" +
		                std::to_string(b.height));
	const std::uint64_t n = static_cast<std::uint64_t>(a.width) * static_cast<std::uint64_t>(a.height);
	if (a.total() != n || b.total() != n)
		throw DataError("mask counts do not sum to width*height");

	MaskOverlap out;
	out.area_a = a.area();
	out.area_b = b.area();
	RunCursor ca(a.counts), cb(b.counts);
	while (!ca.done() && !cb.done()) {
		const std::uint64_t step = std::min(ca.left, cb.left);
		if (ca.value() && cb.value())
			out.intersection += step;
		ca.consume(step);
		cb.consume(step);
	}
	return out;
}

double mask_iou(const RleMask& a, const RleMask& b)
{
	const MaskOverlap o = mask_overlap(a, b);
	if (o.area_a == 0 && o.area_b == 0)
		throw DataError("mask_iou: both masks are empty");
	return static_cast<double>(o.intersection) / static_cast<double>(o.union_area());
}

double dice_coefficient(const RleMask& a, const RleMask& b)
{
	const MaskOverlap o = mask_overlap(a, b);
	if (o.area_a == 0 && o.area_b == 0)
		throw DataError("dice_coefficient: both masks are empty");
	return 2.0 * static_cast<double>(o.intersection) / static_cast<double>(o.area_a + o.area_b);
}

double fleiss_kappa(const AgreementTable& t)
{
	if (t.rows() < 1 || t.cols() < 1)
		throw DataError("fleiss_kappa: table needs at least one item and one category");
	if ((t.array() < 0).any())
		throw DataError("fleiss_kappa: rating counts must be non-negative");
	const Eigen::Matrix<std::int64_t, Eigen::Dynamic, 1> row_sums = t.rowwise().sum();
	const std::int64_t r = row_sums(0);
	if (r < 2)
		throw DataError("fleiss_kappa: need at least 2 raters per item");
	for (Eigen::Index i = 0; i < row_sums.size(); ++i)
		if (row_sums(i) != r)
			throw DataError("fleiss_kappa: row " + std::to_string(i) + " sums to " +
			                std::to_string(row_sums(i)) + ", expected " + std::to_string(r));

	const Eigen::MatrixXd n = t.cast<double>();
	const double items = static_cast<double>(t.rows());
	const double raters = static_cast<double>(r);

	const Eigen::VectorXd per_item =
	    (n.array().square().rowwise().sum() - raters) / (raters * (raters - 1.0));
	const double p_bar = per_item.mean();
	const Eigen::RowVectorXd p_j = n.colwise().sum() / (items * raters);
	const double p_e = p_j.squaredNorm();

	if (1.0 - p_e == 0.0) {
		if (p_bar == 1.0)
			return 1.0;
		throw DataError("fleiss_kappa: undefined (chance agreement is 1)");
	}
	return (p_bar - p_e) / (1.0 - p_e);
}

} // namespace gmner
