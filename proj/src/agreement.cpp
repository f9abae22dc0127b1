#include "gmner/agreement.hpp"

#include <map>
#include <tuple>

#include "gmner/errors.hpp"

namespace gmner {

RleMask union_mask(const std::vector<RleMask>& masks)
{
	if (masks.empty())
		throw DataError("union_mask: no masks");
	Bitmap acc = rle_decode(masks.front());
	for (std::size_t i = 1; i < masks.size(); ++i) {
		if (masks[i].width != masks.front().width || masks[i].height != masks.front().height)
			throw DataError("union_mask: mask dimension mismatch");
		acc = acc || rle_decode(masks[i]);
	}
	return rle_encode(acc);
}

AgreementSummary compare_annotations(const DatasetSplit& first, const DatasetSplit& second)
{
	using Key = std::tuple<std::string, int, int>;
	std::map<Key, const GoldEntity*> other;
	for (const Sample& s : second.samples)
		for (const GoldEntity& e : s.entities)
			other.emplace(Key{s.id, e.start, e.end}, &e);

	AgreementSummary out;
	std::vector<std::pair<bool, bool>> judgements;
	double dice_sum = 0;
	std::size_t consistent = 0;
	for (const Sample& s : first.samples) {
		for (const GoldEntity& a : s.entities) {
			auto it = other.find({s.id, a.start, a.end});
			if (it == other.end())
				continue;
			const GoldEntity& b = *it->second;
			judgements.emplace_back(a.groundable(), b.groundable());
			if (a.groundable() && b.groundable()) {
				const RleMask ua = union_mask(a.masks), ub = union_mask(b.masks);
				const MaskOverlap o = mask_overlap(ua, ub);
				if (o.area_a + o.area_b == 0)
					continue;
				++out.n_mask_pairs;
				dice_sum += 2.0 * static_cast<double>(o.intersection) / static_cast<double>(o.area_a + o.area_b);
				if (static_cast<double>(o.intersection) / static_cast<double>(o.union_area()) > 0.5)
					++consistent;
			}
		}
	}

	out.n_items = judgements.size();
	if (out.n_items > 0) {
		AgreementTable table = AgreementTable::Zero(static_cast<Eigen::Index>(out.n_items), 2);
		for (std::size_t i = 0; i < judgements.size(); ++i) {
			table(static_cast<Eigen::Index>(i), judgements[i].first ? 1 : 0) += 1;
			table(static_cast<Eigen::Index>(i), judgements[i].second ? 1 : 0) += 1;
		}
		out.kappa = fleiss_kappa(table);
	}
	if (out.n_mask_pairs > 0) {
		out.mean_dice = dice_sum / static_cast<double>(out.n_mask_pairs);
		out.consistent_rate = static_cast<double>(consistent) / static_cast<double>(out.n_mask_pairs);
	}
	return out;
}

nlohmann::json to_json(const AgreementSummary& s)
{
	return {{"n_items", s.n_items},
	        {"fleiss_kappa", s.kappa},
	        {"n_mask_pairs", s.n_mask_pairs},
	        {"mean_dice", s.mean_dice},
	        {"consistent_rate", s.consistent_rate}};
}

} // namespace gmner
